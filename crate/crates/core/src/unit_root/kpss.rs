use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Deterministic;
use crate::regress::ols_fit;
use crate::series::TimeSeries;

/// Upper-tail levels of the asymptotic KPSS critical values.
pub const KPSS_LEVELS: [f64; 4] = [0.10, 0.05, 0.025, 0.01];
/// Level stationarity (constant).
pub const KPSS_CRITICAL_C: [f64; 4] = [0.347, 0.463, 0.574, 0.739];
/// Trend stationarity (constant and trend).
pub const KPSS_CRITICAL_CT: [f64; 4] = [0.119, 0.146, 0.176, 0.216];

/// Interval that contains the p-value: `lower < p <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PBracket {
    pub lower: f64,
    pub upper: f64,
}

impl fmt::Display for PBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.upper >= 1.0 {
            write!(f, "> {:.3}", self.lower)
        } else if self.lower <= 0.0 {
            write!(f, "< {:.3}", self.upper)
        } else {
            write!(f, "{:.3}-{:.3}", self.lower, self.upper)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpssResult {
    pub statistic: f64,
    pub p_bracket: PBracket,
    pub bandwidth: usize,
    pub case: Deterministic,
}

impl KpssResult {
    pub fn critical_value(&self, level: f64) -> Option<f64> {
        kpss_critical_value(self.case, level)
    }
}

/// Asymptotic critical value for `level` ∈ {0.10, 0.05, 0.025, 0.01}.
pub fn kpss_critical_value(case: Deterministic, level: f64) -> Option<f64> {
    let i = KPSS_LEVELS.iter().position(|l| (l - level).abs() < 1e-9)?;
    match case {
        Deterministic::None => None,
        Deterministic::Constant => Some(KPSS_CRITICAL_C[i]),
        Deterministic::ConstantTrend => Some(KPSS_CRITICAL_CT[i]),
    }
}

fn autocovariances(e: &[f64], max_lag: usize) -> Vec<f64> {
    let n = e.len() as f64;
    (0..=max_lag)
        .map(|j| e[j..].iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / n)
        .collect()
}

/// Newey-West (1994) data-based bandwidth for the Bartlett kernel.
pub fn nw_bandwidth(residuals: &[f64]) -> Result<usize> {
    let n = residuals.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!(
            "bandwidth selection needs at least 10 residuals, got {n}"
        )));
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let var = residuals.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(Error::Degenerate("residuals have zero variance".into()));
    }
    let pilot = (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize;
    let gamma = autocovariances(residuals, pilot.min(n - 1));
    let s0 = gamma[0] + 2.0 * gamma[1..].iter().sum::<f64>();
    let s1 = 2.0 * gamma[1..]
        .iter()
        .enumerate()
        .map(|(j, g)| (j + 1) as f64 * g)
        .sum::<f64>();
    if s0 == 0.0 {
        return Ok(0);
    }
    let ratio_sq = (s1 / s0).powi(2);
    let bw = (1.1447 * ratio_sq.powf(1.0 / 3.0) * (n as f64).powf(1.0 / 3.0)).floor();
    Ok((bw as usize).min(n - 1))
}

/// Bartlett-kernel long-run variance.
pub fn long_run_variance(residuals: &[f64], bandwidth: usize) -> f64 {
    let gamma = autocovariances(residuals, bandwidth.min(residuals.len() - 1));
    let l = bandwidth as f64;
    gamma[0]
        + 2.0
            * gamma[1..]
                .iter()
                .enumerate()
                .map(|(j, g)| (1.0 - (j + 1) as f64 / (l + 1.0)) * g)
                .sum::<f64>()
}

/// KPSS stationarity test around a constant or a linear trend.
pub fn kpss_test(s: &TimeSeries, case: Deterministic) -> Result<KpssResult> {
    if case == Deterministic::None {
        return Err(Error::Unsupported(
            "KPSS needs a constant or a constant and trend".into(),
        ));
    }
    let y = s.values();
    let n = y.len();
    if n < 20 {
        return Err(Error::InsufficientData(format!(
            "KPSS on `{}` needs at least 20 observations, got {n}",
            s.name()
        )));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::Degenerate(format!("series `{}` is constant", s.name())));
    }
    let design = DMatrix::from_fn(n, case.count(), |t, j| if j == 0 { 1.0 } else { (t + 1) as f64 });
    let fit = ols_fit(&design, y)?;
    let e = &fit.residuals;
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if fit.ssr <= (f64::EPSILON * scale).powi(2) * n as f64 {
        return Err(Error::Degenerate(format!(
            "series `{}` is exactly deterministic",
            s.name()
        )));
    }
    let bandwidth = nw_bandwidth(e)?;
    let lrv = long_run_variance(e, bandwidth);
    let mut partial = 0.0;
    let eta = e
        .iter()
        .map(|v| {
            partial += v;
            partial * partial
        })
        .sum::<f64>()
        / (n as f64).powi(2);
    let statistic = eta / lrv;
    let crit = match case {
        Deterministic::Constant => KPSS_CRITICAL_C,
        _ => KPSS_CRITICAL_CT,
    };
    // critical values ascend as the level falls
    let mut p_bracket = PBracket {
        lower: KPSS_LEVELS[0],
        upper: 1.0,
    };
    for (i, cv) in crit.iter().enumerate() {
        if statistic > *cv {
            p_bracket = PBracket {
                lower: KPSS_LEVELS.get(i + 1).copied().unwrap_or(0.0),
                upper: KPSS_LEVELS[i],
            };
        }
    }
    Ok(KpssResult {
        statistic,
        p_bracket,
        bandwidth,
        case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;

    #[test]
    fn constant_residuals_error() {
        assert!(matches!(nw_bandwidth(&[1.0; 40]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn iid_bandwidth_is_small_and_ar_bandwidth_larger() {
        let mut iid: Vec<usize> = (0..1000)
            .map(|s| nw_bandwidth(&sim::white_noise(&mut sim::stream(s, 0), 100, 1.0)).unwrap())
            .collect();
        iid.sort_unstable();
        let median_iid = iid[500];
        assert!(median_iid <= 6, "{median_iid}");
        for s in 0..50 {
            let ar = sim::ar1(&mut sim::stream(s, 1), 400, 0.9, 1.0);
            assert!(nw_bandwidth(&ar).unwrap() > median_iid);
        }
    }

    #[test]
    fn invariant_to_added_constant_and_trend() {
        let v = sim::ar1(&mut sim::stream(3, 0), 120, 0.4, 1.0);
        let s = TimeSeries::new("a", 1900, v.clone()).unwrap();
        let shifted = TimeSeries::new("a", 1900, v.iter().map(|x| x + 17.5).collect()).unwrap();
        let trended = TimeSeries::new(
            "a",
            1900,
            v.iter().enumerate().map(|(t, x)| x + 3.0 - 0.25 * t as f64).collect(),
        )
        .unwrap();
        let a = kpss_test(&s, Deterministic::Constant).unwrap();
        let b = kpss_test(&shifted, Deterministic::Constant).unwrap();
        assert!((a.statistic - b.statistic).abs() <= 1e-10 * a.statistic);
        let c = kpss_test(&s, Deterministic::ConstantTrend).unwrap();
        let d = kpss_test(&trended, Deterministic::ConstantTrend).unwrap();
        assert!((c.statistic - d.statistic).abs() <= 1e-10 * c.statistic);
    }

    #[test]
    fn bracket_reporting() {
        let rw = sim::random_walk(&mut sim::stream(1, 0), 500, 1.0);
        let r = kpss_test(&TimeSeries::new("rw", 1500, rw).unwrap(), Deterministic::Constant).unwrap();
        assert!(r.statistic > KPSS_CRITICAL_C[1]);
        assert!(r.p_bracket.upper <= 0.05);
        assert!(kpss_test(&TimeSeries::new("k", 1, vec![2.0; 30]).unwrap(), Deterministic::Constant).is_err());
    }
}
