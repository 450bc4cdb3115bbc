//! Integration-order pretests: augmented Dickey-Fuller with BIC lag selection, KPSS
//! with a Newey-West Bartlett bandwidth, and the Dickey-Fuller / Engle-Granger
//! critical values and p-values.

mod adf;
mod kpss;
mod tables;

use rayon::prelude::*;

pub use adf::{adf_test, default_max_lag, residual_df_statistic, LagCriterion, UnitRootResult};
pub use kpss::{
    kpss_critical_value, kpss_test, long_run_variance, nw_bandwidth, KpssResult, PBracket,
    KPSS_CRITICAL_C, KPSS_CRITICAL_CT, KPSS_LEVELS,
};
pub use tables::{df_pvalue, eg_critical_value, SampleSize, LEVELS, MAX_REGRESSORS};

pub use crate::model::Deterministic as DeterministicCase;

use crate::error::Result;
use crate::model::Deterministic;
use crate::regress::ols_fit;
use crate::sim;

/// Simulated null distribution of the Engle-Granger residual DF statistic:
/// `n_regressors + 1` independent Gaussian random walks of length `n`, levels OLS
/// with the given deterministic terms, plain DF regression on the residuals.
///
/// Repetition `i` uses `sim::stream(seed, i)`; the output is ordered by repetition.
pub fn simulate_residual_df(n_regressors: usize, case: Deterministic, n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sim::stream(seed, i);
            let y = sim::random_walk(&mut rng, n, 1.0);
            let xs: Vec<Vec<f64>> = (0..n_regressors)
                .map(|_| sim::random_walk(&mut rng, n, 1.0))
                .collect();
            let k = n_regressors + case.count();
            let design = nalgebra::DMatrix::from_fn(n, k.max(1), |t, j| {
                if j < n_regressors {
                    xs[j][t]
                } else if j == n_regressors {
                    1.0
                } else {
                    (t + 1) as f64
                }
            });
            let resid = if k == 0 {
                y
            } else {
                ols_fit(&design, &y)?.residuals
            };
            Ok(residual_df_statistic(&resid, 0)?.0)
        })
        .collect()
}
