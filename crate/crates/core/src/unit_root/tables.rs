//! Response-surface encoding of Dickey-Fuller and Engle-Granger residual-test
//! distributions, loaded from `data/df_response_surfaces.txt`.

use std::collections::HashMap;
use std::sync::OnceLock;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::Deterministic;

const SURFACES: &str = include_str!("../../data/df_response_surfaces.txt");

/// Largest supported number of I(1) regressors in a residual test.
pub const MAX_REGRESSORS: usize = 6;

/// Tabulated significance levels of [`eg_critical_value`].
pub const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Half-width of the window over which the two p-value pieces are blended.
const BLEND: f64 = 0.1;

/// Sample size for critical values: finite `n` or the asymptotic limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSize {
    Finite(usize),
    Asymptotic,
}

#[derive(Debug, Clone, Default)]
struct Surface {
    cv: [Option<[f64; 4]>; 3],
    small: Option<[f64; 3]>,
    large: Option<[f64; 4]>,
    tau_min: f64,
    tau_star: f64,
    tau_max: f64,
    /// Largest tau up to which the right-tail piece is increasing.
    large_peak: f64,
}

type Key = (Deterministic, usize);

fn level_index(level: f64) -> Option<usize> {
    LEVELS.iter().position(|l| (l - level).abs() < 1e-9)
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| Error::Parse {
            location: format!("df_response_surfaces.txt:{line}"),
            message: format!("bad number `{tok}`"),
        }),
    }
}

fn parse(text: &str) -> Result<HashMap<Key, Surface>> {
    let mut map: HashMap<Key, Surface> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse {
            location: format!("df_response_surfaces.txt:{}", i + 1),
            message: format!("malformed record `{line}`"),
        };
        if toks.len() < 3 {
            return Err(bad());
        }
        let case = Deterministic::parse(toks[1]).map_err(|_| bad())?;
        let k: usize = toks[2].parse().map_err(|_| bad())?;
        let nums = toks[3..]
            .iter()
            .map(|t| parse_f64(t, i + 1))
            .collect::<Result<Vec<_>>>()?;
        let entry = map.entry((case, k)).or_default();
        match (toks[0], nums.len()) {
            ("cv", 5) => {
                let li = level_index(nums[0]).ok_or_else(bad)?;
                entry.cv[li] = Some([nums[1], nums[2], nums[3], nums[4]]);
            }
            ("small", 3) => entry.small = Some([nums[0], nums[1], nums[2]]),
            ("large", 4) => entry.large = Some([nums[0], nums[1], nums[2], nums[3]]),
            ("bounds", 3) => {
                entry.tau_min = nums[0];
                entry.tau_star = nums[1];
                entry.tau_max = nums[2];
            }
            _ => return Err(bad()),
        }
    }
    for s in map.values_mut() {
        if let Some(large) = s.large {
            // the cubic right-tail piece may turn over below tau_max; hold it at its peak
            let hi = if s.tau_max.is_finite() { s.tau_max } else { s.tau_star + 10.0 };
            let d = |t: f64| large[1] + 2.0 * large[2] * t + 3.0 * large[3] * t * t;
            let mut t = s.tau_star;
            while t < hi && d(t) > 0.0 {
                t += 1e-3;
            }
            s.large_peak = t.min(hi);
        }
    }
    Ok(map)
}

fn surfaces() -> &'static HashMap<Key, Surface> {
    static TABLE: OnceLock<HashMap<Key, Surface>> = OnceLock::new();
    TABLE.get_or_init(|| parse(SURFACES).expect("bundled response surfaces parse"))
}

fn surface(case: Deterministic, n_regressors: usize) -> Result<&'static Surface> {
    if n_regressors > MAX_REGRESSORS {
        return Err(Error::Unsupported(format!(
            "{n_regressors} regressors; at most {MAX_REGRESSORS} are tabulated"
        )));
    }
    surfaces().get(&(case, n_regressors)).ok_or_else(|| {
        Error::Unsupported(format!(
            "no response surface for case {case} with {n_regressors} regressors"
        ))
    })
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Asymptotic p-value from the MacKinnon-style surfaces.
fn asymptotic_pvalue(s: &Surface, tau: f64) -> Result<f64> {
    let (Some(small), Some(large)) = (s.small, s.large) else {
        return Err(Error::Unsupported("incomplete p-value surface".into()));
    };
    if tau.is_nan() {
        return Err(Error::Estimation("statistic is NaN".into()));
    }
    if tau < s.tau_min {
        return Ok(0.0);
    }
    if tau > s.tau_max {
        return Ok(1.0);
    }
    let lo = s.tau_star - BLEND;
    let hi = s.tau_star + BLEND;
    let z = if tau <= lo {
        poly(&small, tau)
    } else if tau >= hi {
        poly(&large, tau.min(s.large_peak))
    } else {
        let w = (tau - lo) / (hi - lo);
        (1.0 - w) * poly(&small, tau) + w * poly(&large, tau)
    };
    Ok(std_normal().cdf(z))
}

/// Critical value of the unit-root (`n_regressors = 0`) or Engle-Granger residual
/// test at `level` ∈ {0.01, 0.05, 0.10}.
///
/// Uses the finite-sample response surface when tabulated for the case; otherwise
/// (no deterministic terms with two or more series) the asymptotic p-value surface
/// is inverted.
pub fn eg_critical_value(n_regressors: usize, case: Deterministic, level: f64, n: SampleSize) -> Result<f64> {
    let li = level_index(level).ok_or_else(|| {
        Error::Unsupported(format!("level {level}; tabulated levels are 0.01, 0.05, 0.10"))
    })?;
    let s = surface(case, n_regressors)?;
    if let Some(b) = s.cv[li] {
        return Ok(match n {
            SampleSize::Asymptotic => b[0],
            SampleSize::Finite(n) => {
                let inv = 1.0 / n as f64;
                b[0] + inv * (b[1] + inv * (b[2] + inv * b[3]))
            }
        });
    }
    invert_pvalue(s, level)
}

fn invert_pvalue(s: &Surface, level: f64) -> Result<f64> {
    let (mut lo, mut hi) = (s.tau_min, s.tau_star + 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if asymptotic_pvalue(s, mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Probability of a statistic at least as negative as `stat` under the unit-root
/// (no-cointegration) null.
///
/// `n = Some(size)` shifts the statistic so that the finite-sample critical values
/// at 1%, 5% and 10% map exactly onto their asymptotic counterparts (linear
/// interpolation of the shift between those knots, constant outside); `None`
/// returns the asymptotic p-value.
pub fn df_pvalue(stat: f64, case: Deterministic, n: Option<usize>, n_regressors: usize) -> Result<f64> {
    let s = surface(case, n_regressors)?;
    let tau = match n {
        None => stat,
        Some(size) => {
            if size < 20 {
                return Err(Error::InsufficientData(format!(
                    "finite-sample p-values need n >= 20, got {size}"
                )));
            }
            stat + finite_sample_shift(s, size, stat)
        }
    };
    asymptotic_pvalue(s, tau)
}

fn finite_sample_shift(s: &Surface, n: usize, stat: f64) -> f64 {
    let knots: Vec<(f64, f64)> = s
        .cv
        .iter()
        .flatten()
        .map(|b| {
            let inv = 1.0 / n as f64;
            let finite = b[0] + inv * (b[1] + inv * (b[2] + inv * b[3]));
            (finite, b[0] - finite)
        })
        .collect();
    match knots.as_slice() {
        [] => 0.0,
        [only] => only.1,
        _ => {
            let first = knots[0];
            let last = knots[knots.len() - 1];
            if stat <= first.0 {
                return first.1;
            }
            if stat >= last.0 {
                return last.1;
            }
            for w in knots.windows(2) {
                let (a, b) = (w[0], w[1]);
                if stat <= b.0 {
                    let u = (stat - a.0) / (b.0 - a.0);
                    return a.1 + u * (b.1 - a.1);
                }
            }
            last.1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_is_complete() {
        for case in Deterministic::ALL {
            for k in 0..=MAX_REGRESSORS {
                let s = surface(case, k).unwrap();
                assert!(s.small.is_some() && s.large.is_some(), "{case} {k}");
                for level in LEVELS {
                    eg_critical_value(k, case, level, SampleSize::Asymptotic).unwrap();
                }
            }
        }
    }

    #[test]
    fn inverse_consistency_at_five_percent() {
        for case in Deterministic::ALL {
            for k in 0..=MAX_REGRESSORS {
                let cv = eg_critical_value(k, case, 0.05, SampleSize::Asymptotic).unwrap();
                let p = df_pvalue(cv, case, None, k).unwrap();
                assert!((p - 0.05).abs() <= 0.005, "{case} {k}: p({cv}) = {p}");
            }
        }
    }

    #[test]
    fn finite_sample_knots_map_exactly() {
        for k in 0..4 {
            for level in LEVELS {
                let cv = eg_critical_value(k, Deterministic::Constant, level, SampleSize::Finite(50)).unwrap();
                let p = df_pvalue(cv, Deterministic::Constant, Some(50), k).unwrap();
                let pa = df_pvalue(
                    eg_critical_value(k, Deterministic::Constant, level, SampleSize::Asymptotic).unwrap(),
                    Deterministic::Constant,
                    None,
                    k,
                )
                .unwrap();
                assert!((p - pa).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_statistic_has_large_pvalue() {
        assert!(df_pvalue(0.0, Deterministic::Constant, Some(100), 0).unwrap() > 0.90);
    }

    #[test]
    fn tail_limits() {
        let mut prev = 1.0;
        for i in 0..60 {
            let p = df_pvalue(-2.0 - i as f64 * 0.5, Deterministic::Constant, None, 2).unwrap();
            assert!(p <= prev);
            prev = p;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn strictly_monotone_in_the_interior() {
        for case in Deterministic::ALL {
            for k in 0..=MAX_REGRESSORS {
                let s = surface(case, k).unwrap();
                let hi = s.large_peak.min(s.tau_max).min(3.0);
                let lo = s.tau_min.max(-12.0);
                let mut prev = -1.0;
                let steps = 2000;
                for i in 0..=steps {
                    let tau = lo + (hi - lo) * i as f64 / steps as f64;
                    let p = df_pvalue(tau, case, None, k).unwrap();
                    assert!(p > prev || (p == 0.0 && prev == 0.0) || p >= 1.0 - 1e-15, "{case} {k} at {tau}");
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn table_values_used_for_published_models() {
        let cv = |k, case| eg_critical_value(k, case, 0.05, SampleSize::Asymptotic).unwrap();
        assert!((cv(2, Deterministic::Constant) + 3.74).abs() <= 0.02);
        assert!((cv(3, Deterministic::Constant) + 4.10).abs() <= 0.02);
        assert!((cv(3, Deterministic::ConstantTrend) + 4.43).abs() <= 0.02);
        assert!((cv(4, Deterministic::Constant) + 4.41).abs() <= 0.02);
    }

    #[test]
    fn unsupported_inputs() {
        assert!(matches!(
            df_pvalue(-3.0, Deterministic::Constant, None, 7),
            Err(Error::Unsupported(_))
        ));
        assert!(eg_critical_value(1, Deterministic::Constant, 0.2, SampleSize::Asymptotic).is_err());
    }
}
