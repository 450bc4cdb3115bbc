//! Per-candidate checking: Engle-Granger step-1 screening, error-correction
//! estimation and Breusch-Godfrey residual filtering.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::model::{CandidateSpec, ModelForm};
use crate::regress::{
    levels_ols, nls_ec_fit, ols_fit, short_run_design, short_run_fit, EcProblem, FittedModel,
    LeastSquaresProblem, NlsOptions, OlsEstimate,
};
use crate::series::AlignedDataset;
use crate::unit_root::{df_pvalue, eg_critical_value, residual_df_statistic, SampleSize};

/// Regressor set of the Breusch-Godfrey auxiliary regression for EC models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BgDesign {
    /// Jacobian of the EC regression at the optimum.
    #[default]
    Jacobian,
    /// The untransformed regressors of the EC regression.
    Raw,
}

/// Screening and filtering thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Level of the residual unit-root test.
    pub eg_level: f64,
    /// Candidates whose BG LM p-value is at or below this are discarded.
    pub bglm_level: f64,
    pub bglm_lags: usize,
    pub bg_design: BgDesign,
    /// Augmentation lags of the residual DF regression.
    pub eg_lags: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eg_level: 0.05,
            bglm_level: 0.20,
            bglm_lags: 2,
            bg_design: BgDesign::Jacobian,
            eg_lags: 0,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.eg_level > 0.0 && self.eg_level < 1.0) || !(self.bglm_level > 0.0 && self.bglm_level < 1.0) {
            return Err(Error::Config(format!(
                "eg_level and bglm_level must lie in (0, 1), got {} and {}",
                self.eg_level, self.bglm_level
            )));
        }
        if self.bglm_lags == 0 {
            return Err(Error::Config("BG LM test needs at least one lag".into()));
        }
        Ok(())
    }
}

/// Engle-Granger step 1: levels OLS plus a DF test on its residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgScreenResult {
    pub levels_fit: OlsEstimate,
    pub statistic: f64,
    /// Asymptotic critical value at `level`.
    pub critical_value: f64,
    pub level: f64,
    /// Asymptotic p-value of the statistic.
    pub p_value: f64,
    pub n_regressors: usize,
    pub cointegrated: bool,
}

/// Outcome of a Breusch-Godfrey LM test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgLmResult {
    pub lm_statistic: f64,
    pub p_value: f64,
    pub lags: usize,
}

pub fn eg_step1(spec: &CandidateSpec, data: &AlignedDataset, thresholds: &Thresholds) -> Result<EgScreenResult> {
    if spec.form != ModelForm::Levels {
        return Err(Error::Config(format!("`{}` is not a levels-form model", spec.id)));
    }
    let needed = spec.subset.len() + spec.deterministic.count() + 10;
    if data.len() < needed {
        return Err(Error::InsufficientData(format!(
            "Engle-Granger screen of `{}` needs {needed} observations, got {}",
            spec.id,
            data.len()
        )));
    }
    let k = spec.subset.len();
    let levels_fit = levels_ols(spec, data)?;
    let (statistic, _) = residual_df_statistic(&levels_fit.residuals, thresholds.eg_lags)?;
    let critical_value = eg_critical_value(k, spec.deterministic, thresholds.eg_level, SampleSize::Asymptotic)?;
    let p_value = df_pvalue(statistic, spec.deterministic, None, k)?;
    Ok(EgScreenResult {
        levels_fit,
        statistic,
        critical_value,
        level: thresholds.eg_level,
        p_value,
        n_regressors: k,
        cointegrated: statistic < critical_value,
    })
}

/// Breusch-Godfrey LM test: `n R²` of the residuals regressed on `design` and
/// `lags` of their own lags (pre-sample values zero), against χ²(lags).
pub fn bg_lm_test(residuals: &[f64], design: &DMatrix<f64>, lags: usize) -> Result<BgLmResult> {
    let n = residuals.len();
    if design.nrows() != n {
        return Err(Error::Config(format!(
            "{n} residuals but {} design rows",
            design.nrows()
        )));
    }
    if lags == 0 || 2 * lags >= n {
        return Err(Error::Config(format!("{lags} lags for {n} residuals")));
    }
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let scale = residuals.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if !(sse > 0.0) || scale <= f64::MIN_POSITIVE {
        return Err(Error::Degenerate("residuals are identically zero".into()));
    }
    let k = design.ncols();
    let aux = DMatrix::from_fn(n, k + lags, |t, j| {
        if j < k {
            design[(t, j)]
        } else {
            let l = j - k + 1;
            if t >= l {
                residuals[t - l]
            } else {
                0.0
            }
        }
    });
    let fit = ols_fit(&aux, residuals)
        .map_err(|e| Error::Degenerate(format!("BG auxiliary regression: {e}")))?;
    let r2 = (1.0 - fit.ssr / sse).clamp(0.0, 1.0);
    let lm = n as f64 * r2;
    let chi = ChiSquared::new(lags as f64).expect("positive dof");
    Ok(BgLmResult {
        lm_statistic: lm,
        p_value: (1.0 - chi.cdf(lm)).clamp(0.0, 1.0),
        lags,
    })
}

/// Why a candidate left the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscardReason {
    Eg,
    Bglm,
    Error,
}

/// A candidate that passed every filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Survivor {
    pub spec: CandidateSpec,
    pub estimate: FittedModel,
    pub bg: BgLmResult,
    /// Residual DF statistic and its critical value (levels form only).
    pub eg_statistic: Option<f64>,
    pub eg_critical_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CandidateOutcome {
    Survivor(Box<Survivor>),
    Discarded {
        spec: CandidateSpec,
        reason: DiscardReason,
        detail: String,
    },
}

impl CandidateOutcome {
    pub fn spec(&self) -> &CandidateSpec {
        match self {
            CandidateOutcome::Survivor(s) => &s.spec,
            CandidateOutcome::Discarded { spec, .. } => spec,
        }
    }

    pub fn survivor(&self) -> Option<&Survivor> {
        match self {
            CandidateOutcome::Survivor(s) => Some(s),
            CandidateOutcome::Discarded { .. } => None,
        }
    }

    fn discard(spec: &CandidateSpec, reason: DiscardReason, detail: impl Into<String>) -> Self {
        CandidateOutcome::Discarded {
            spec: spec.clone(),
            reason,
            detail: detail.into(),
        }
    }
}

/// Design of the BG auxiliary regression for a fitted EC model.
pub fn ec_bg_design(spec: &CandidateSpec, data: &AlignedDataset, params: &[f64], design: BgDesign) -> Result<DMatrix<f64>> {
    let problem = EcProblem::new(spec, data)?;
    match design {
        BgDesign::Jacobian => {
            let p = nalgebra::DVector::from_column_slice(params);
            Ok(-problem.jacobian(&p))
        }
        BgDesign::Raw => {
            let levels = problem.levels_design();
            if !spec.phi_free {
                return Ok(levels);
            }
            // Δx_i, x_i(t-1), y_(t-1), deterministic terms
            let n = problem.n_obs();
            let k = spec.subset.len();
            let y = data.target_values();
            let cols = spec
                .subset
                .iter()
                .map(|c| data.require(c))
                .collect::<Result<Vec<_>>>()?;
            let det = spec.deterministic.count();
            Ok(DMatrix::from_fn(n, 2 * k + 1 + det, |t, j| {
                let obs = t + 1;
                if j < k {
                    cols[j][obs] - cols[j][obs - 1]
                } else if j < 2 * k {
                    cols[j - k][obs - 1]
                } else if j == 2 * k {
                    y[obs - 1]
                } else {
                    levels[(t, k + (j - 2 * k - 1))]
                }
            }))
        }
    }
}

/// Checks one levels-form candidate given its (shared) Engle-Granger screen.
pub fn check_with_screen(
    spec: &CandidateSpec,
    data: &AlignedDataset,
    screen: &Result<EgScreenResult>,
    thresholds: &Thresholds,
    nls: &NlsOptions,
) -> CandidateOutcome {
    let screen = match screen {
        Ok(s) => s,
        Err(e) => return CandidateOutcome::discard(spec, DiscardReason::Error, e.to_string()),
    };
    if !screen.cointegrated {
        return CandidateOutcome::discard(
            spec,
            DiscardReason::Eg,
            format!(
                "residual DF {:.3} does not fall below {:.3}",
                screen.statistic, screen.critical_value
            ),
        );
    }
    let est = match nls_ec_fit(spec, data, nls) {
        Ok(e) => e,
        Err(e) => return CandidateOutcome::discard(spec, DiscardReason::Error, e.to_string()),
    };
    if !est.converged {
        return CandidateOutcome::discard(
            spec,
            DiscardReason::Error,
            format!("no convergence after {} iterations", est.iterations),
        );
    }
    if est.phi_nonstationary {
        return CandidateOutcome::discard(
            spec,
            DiscardReason::Error,
            format!("phi = {:.4} lies outside (-1, 1)", est.phi.unwrap_or(f64::NAN)),
        );
    }
    let bg = ec_bg_design(spec, data, &est.params, thresholds.bg_design)
        .and_then(|d| bg_lm_test(&est.residuals, &d, thresholds.bglm_lags));
    let bg = match bg {
        Ok(b) => b,
        Err(e) => return CandidateOutcome::discard(spec, DiscardReason::Error, e.to_string()),
    };
    if bg.p_value <= thresholds.bglm_level {
        return CandidateOutcome::discard(
            spec,
            DiscardReason::Bglm,
            format!("BG LM p-value {:.4} <= {}", bg.p_value, thresholds.bglm_level),
        );
    }
    CandidateOutcome::Survivor(Box::new(Survivor {
        spec: spec.clone(),
        estimate: FittedModel::ErrorCorrection(est),
        bg,
        eg_statistic: Some(screen.statistic),
        eg_critical_value: Some(screen.critical_value),
    }))
}

/// Short-run candidates: OLS in differences followed by the BG LM filter.
pub fn check_short_run(spec: &CandidateSpec, data: &AlignedDataset, thresholds: &Thresholds) -> CandidateOutcome {
    let fitted = short_run_fit(spec, data).and_then(|fit| {
        let (design, _) = short_run_design(spec, data)?;
        let bg = bg_lm_test(&fit.ols.residuals, &design, thresholds.bglm_lags)?;
        Ok((fit, bg))
    });
    match fitted {
        Err(e) => CandidateOutcome::discard(spec, DiscardReason::Error, e.to_string()),
        Ok((_, bg)) if bg.p_value <= thresholds.bglm_level => CandidateOutcome::discard(
            spec,
            DiscardReason::Bglm,
            format!("BG LM p-value {:.4} <= {}", bg.p_value, thresholds.bglm_level),
        ),
        Ok((fit, bg)) => CandidateOutcome::Survivor(Box::new(Survivor {
            spec: spec.clone(),
            estimate: FittedModel::ShortRun(fit),
            bg,
            eg_statistic: None,
            eg_critical_value: None,
        })),
    }
}

/// Full check of one candidate. Estimation failures become `Discarded(Error)`.
pub fn check_candidate(spec: &CandidateSpec, data: &AlignedDataset, thresholds: &Thresholds, nls: &NlsOptions) -> CandidateOutcome {
    match spec.form {
        ModelForm::Levels => {
            let screen = eg_step1(spec, data, thresholds);
            check_with_screen(spec, data, &screen, thresholds, nls)
        }
        ModelForm::Differences => check_short_run(spec, data, thresholds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Deterministic;
    use crate::sim;

    fn pair(y: Vec<f64>, x: Vec<f64>) -> AlignedDataset {
        AlignedDataset::from_columns(1900, vec![("y".into(), y), ("x".into(), x)]).unwrap()
    }

    #[test]
    fn identical_series_is_a_degenerate_diagnostic() {
        let x = sim::random_walk(&mut sim::stream(1, 0), 100, 1.0);
        let data = pair(x.clone(), x);
        let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::None, false).unwrap();
        let screen = eg_step1(&spec, &data, &Thresholds::default());
        assert!(matches!(screen, Err(Error::Degenerate(_))), "{screen:?}");
        let out = check_candidate(&spec, &data, &Thresholds::default(), &NlsOptions::default());
        assert!(matches!(
            out,
            CandidateOutcome::Discarded {
                reason: DiscardReason::Error,
                ..
            }
        ));
    }

    #[test]
    fn bg_zero_residuals_error() {
        let d = DMatrix::from_element(20, 1, 1.0);
        assert!(bg_lm_test(&[0.0; 20], &d, 2).is_err());
    }

    #[test]
    fn bg_detects_strong_autocorrelation() {
        let mut hits = 0;
        for seed in 0..200 {
            let e = sim::ar1(&mut sim::stream(seed, 2), 100, 0.9, 1.0);
            let d = DMatrix::from_element(100, 1, 1.0);
            let mean = e.iter().sum::<f64>() / 100.0;
            let e: Vec<f64> = e.iter().map(|v| v - mean).collect();
            if bg_lm_test(&e, &d, 2).unwrap().p_value < 0.01 {
                hits += 1;
            }
        }
        assert!(hits >= 198, "{hits}/200");
    }

    #[test]
    fn check_is_deterministic() {
        let mut rng = sim::stream(4, 0);
        let x = sim::random_walk(&mut rng, 150, 1.0);
        let eta = sim::ar1(&mut rng, 150, 0.5, 0.5);
        let y = x.iter().zip(&eta).map(|(a, b)| 2.0 * a + b + 3.0).collect();
        let data = pair(y, x);
        let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::Constant, true).unwrap();
        let a = check_candidate(&spec, &data, &Thresholds::default(), &NlsOptions::default());
        let b = check_candidate(&spec, &data, &Thresholds::default(), &NlsOptions::default());
        assert_eq!(a, b);
        assert!(a.survivor().is_some(), "{a:?}");
        let s = a.survivor().unwrap();
        assert!(s.eg_statistic.unwrap() < s.eg_critical_value.unwrap());
    }

    #[test]
    fn raw_and_jacobian_designs_have_expected_shapes() {
        let mut rng = sim::stream(8, 0);
        let x = sim::random_walk(&mut rng, 60, 1.0);
        let y = x.iter().map(|v| v + sim::normal(&mut rng)).collect();
        let data = pair(y, x);
        let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::ConstantTrend, true).unwrap();
        let est = nls_ec_fit(&spec, &data, &NlsOptions::default()).unwrap();
        let j = ec_bg_design(&spec, &data, &est.params, BgDesign::Jacobian).unwrap();
        let r = ec_bg_design(&spec, &data, &est.params, BgDesign::Raw).unwrap();
        assert_eq!(j.shape(), (59, 4));
        assert_eq!(r.shape(), (59, 5));
        assert!(bg_lm_test(&est.residuals, &r, 2).is_ok());
    }
}
