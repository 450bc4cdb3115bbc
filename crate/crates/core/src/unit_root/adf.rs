use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::tables::df_pvalue;
use crate::error::{Error, Result};
use crate::model::Deterministic;
use crate::regress::ols_fit;
use crate::series::TimeSeries;

/// Outcome of an (augmented) Dickey-Fuller test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    /// t-statistic of the lagged level.
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    pub case: Deterministic,
    pub n_obs: usize,
}

/// Schwert's rule `floor(12 (n/100)^{1/4})`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Lag-length selection criterion for [`adf_test`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagCriterion {
    #[default]
    Bic,
}

pub(crate) struct DfRegression {
    pub statistic: f64,
    pub ssr: f64,
    pub n_obs: usize,
    pub n_params: usize,
}

/// `Δs_t = ρ s_{t-1} + Σ_{j=1..lags} γ_j Δs_{t-j} + deterministics` over
/// `t = first..len-1` (0-based indices into `values`, `first > lags`).
pub(crate) fn df_regression(values: &[f64], case: Deterministic, lags: usize, first: usize) -> Result<DfRegression> {
    let n = values.len();
    debug_assert!(first > lags);
    if first >= n {
        return Err(Error::InsufficientData("no observations left for the DF regression".into()));
    }
    let rows = n - first;
    let k = 1 + lags + case.count();
    if rows <= k {
        return Err(Error::DegreesOfFreedom {
            observations: rows,
            parameters: k,
        });
    }
    let dy = |t: usize| values[t] - values[t - 1];
    let design = DMatrix::from_fn(rows, k, |r, j| {
        let t = first + r;
        match j {
            0 => values[t - 1],
            j if j <= lags => dy(t - j),
            j if j == lags + 1 => 1.0,
            _ => t as f64,
        }
    });
    let target: Vec<f64> = (first..n).map(dy).collect();
    let fit = ols_fit(&design, &target)?;
    Ok(DfRegression {
        statistic: fit.t_ratios[0],
        ssr: fit.ssr,
        n_obs: rows,
        n_params: k,
    })
}

fn check_not_constant(values: &[f64], name: &str) -> Result<()> {
    let first = values[0];
    if values.iter().all(|v| *v == first) {
        return Err(Error::Degenerate(format!("series `{name}` is constant")));
    }
    Ok(())
}

/// Augmented Dickey-Fuller test with the lag order chosen by BIC.
///
/// Every order in `0..=max_lag` is fitted over the common sample that the largest
/// order allows; the selected order is then refitted on its own maximal sample and
/// its t-statistic is converted to a finite-sample p-value.
pub fn adf_test(s: &TimeSeries, case: Deterministic, max_lag: Option<usize>, criterion: LagCriterion) -> Result<UnitRootResult> {
    let values = s.values();
    let n = values.len();
    let max_lag = max_lag.unwrap_or_else(|| default_max_lag(n));
    if n < max_lag + 10 {
        return Err(Error::InsufficientData(format!(
            "ADF test on `{}` needs at least {} observations, got {n}",
            s.name(),
            max_lag + 10
        )));
    }
    check_not_constant(values, s.name())?;
    if values.windows(2).all(|w| w[1] - w[0] == values[1] - values[0]) {
        return Err(Error::Degenerate(format!(
            "series `{}` has constant differences",
            s.name()
        )));
    }

    let LagCriterion::Bic = criterion;
    let mut best: Option<(f64, usize)> = None;
    for p in 0..=max_lag {
        let Ok(reg) = df_regression(values, case, p, max_lag + 1) else {
            continue;
        };
        if reg.ssr <= 0.0 {
            continue;
        }
        let m = reg.n_obs as f64;
        let bic = (reg.ssr / m).ln() + reg.n_params as f64 * m.ln() / m;
        if best.is_none_or(|(b, _)| bic < b) {
            best = Some((bic, p));
        }
    }
    let (_, lags) = best.ok_or_else(|| Error::Degenerate(format!("no ADF regression could be fitted for `{}`", s.name())))?;
    let reg = df_regression(values, case, lags, lags + 1)?;
    let p_value = df_pvalue(reg.statistic, case, Some(reg.n_obs.max(20)), 0)?;
    Ok(UnitRootResult {
        statistic: reg.statistic,
        p_value,
        lags_used: lags,
        case,
        n_obs: reg.n_obs,
    })
}

/// Dickey-Fuller t-statistic of a residual series with no deterministic terms and
/// `lags` augmentation lags. Returns the statistic and the regression size.
pub fn residual_df_statistic(residuals: &[f64], lags: usize) -> Result<(f64, usize)> {
    if residuals.iter().all(|e| e.abs() <= f64::EPSILON * 16.0) {
        return Err(Error::Degenerate("residuals are identically zero".into()));
    }
    let reg = df_regression(residuals, Deterministic::None, lags, lags + 1)?;
    Ok((reg.statistic, reg.n_obs))
}
