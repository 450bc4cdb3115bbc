use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::nls::EcEstimate;
use super::ols::{ols_fit, OlsEstimate};
use crate::error::{Error, Result};
use crate::model::{CandidateSpec, ModelForm};
use crate::series::AlignedDataset;

/// OLS fit of the short-run model `Δy_t = c + Σ β_i Δx_it + ε_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortRunEstimate {
    pub spec_id: String,
    /// Differenced predictors, then `c` when present.
    pub param_names: Vec<String>,
    pub betas: Vec<(String, f64)>,
    pub constant: Option<f64>,
    pub ols: OlsEstimate,
    /// Calendar year of the first residual.
    pub first_year: i32,
}

impl ShortRunEstimate {
    pub fn sigma2(&self) -> f64 {
        self.ols.sigma2()
    }
}

/// Regressor matrix of a short-run spec: differenced predictors, then the constant.
pub fn short_run_design(spec: &CandidateSpec, data: &AlignedDataset) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if spec.form != ModelForm::Differences {
        return Err(Error::Config(format!("`{}` is not a difference-form model", spec.id)));
    }
    let y = data.target_values();
    let n = y.len();
    if n < 2 {
        return Err(Error::InsufficientData("need at least two observations".into()));
    }
    let cols = spec
        .subset
        .iter()
        .map(|name| data.require(name))
        .collect::<Result<Vec<_>>>()?;
    let k = cols.len() + usize::from(spec.deterministic.has_constant());
    let design = DMatrix::from_fn(n - 1, k, |t, j| {
        if j < cols.len() {
            cols[j][t + 1] - cols[j][t]
        } else {
            1.0
        }
    });
    let dy = (1..n).map(|t| y[t] - y[t - 1]).collect();
    Ok((design, dy))
}

pub fn short_run_fit(spec: &CandidateSpec, data: &AlignedDataset) -> Result<ShortRunEstimate> {
    let (design, dy) = short_run_design(spec, data)?;
    let ols = ols_fit(&design, &dy)?;
    let mut param_names = spec.subset.clone();
    if spec.deterministic.has_constant() {
        param_names.push("c".into());
    }
    Ok(ShortRunEstimate {
        spec_id: spec.id.clone(),
        betas: spec
            .subset
            .iter()
            .zip(&ols.coefficients)
            .map(|(n, b)| (n.clone(), *b))
            .collect(),
        constant: spec
            .deterministic
            .has_constant()
            .then(|| ols.coefficients[spec.subset.len()]),
        param_names,
        ols,
        first_year: data.first_year() + 1,
    })
}

/// Either kind of fitted candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    ErrorCorrection(EcEstimate),
    ShortRun(ShortRunEstimate),
}

impl FittedModel {
    pub fn spec_id(&self) -> &str {
        match self {
            FittedModel::ErrorCorrection(e) => &e.spec_id,
            FittedModel::ShortRun(s) => &s.spec_id,
        }
    }

    pub fn ssr(&self) -> f64 {
        match self {
            FittedModel::ErrorCorrection(e) => e.ssr,
            FittedModel::ShortRun(s) => s.ols.ssr,
        }
    }

    pub fn n_obs(&self) -> usize {
        match self {
            FittedModel::ErrorCorrection(e) => e.n_obs,
            FittedModel::ShortRun(s) => s.ols.n_obs,
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            FittedModel::ErrorCorrection(e) => e.n_params,
            FittedModel::ShortRun(s) => s.ols.n_params,
        }
    }

    pub fn residuals(&self) -> &[f64] {
        match self {
            FittedModel::ErrorCorrection(e) => &e.residuals,
            FittedModel::ShortRun(s) => &s.ols.residuals,
        }
    }

    pub fn param_names(&self) -> &[String] {
        match self {
            FittedModel::ErrorCorrection(e) => &e.param_names,
            FittedModel::ShortRun(s) => &s.param_names,
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            FittedModel::ErrorCorrection(e) => &e.params,
            FittedModel::ShortRun(s) => &s.ols.coefficients,
        }
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        match self {
            FittedModel::ErrorCorrection(e) => &e.covariance,
            FittedModel::ShortRun(s) => &s.ols.covariance,
        }
    }

    pub fn t_ratios(&self) -> Vec<(String, f64)> {
        match self {
            FittedModel::ErrorCorrection(e) => e.t_ratios.clone(),
            FittedModel::ShortRun(s) => s
                .param_names
                .iter()
                .cloned()
                .zip(s.ols.t_ratios.iter().copied())
                .collect(),
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.ssr() / (self.n_obs() - self.n_params()) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Deterministic;

    #[test]
    fn drift_only_model_estimates_mean_difference() {
        let y = vec![0.0, 1.0, 3.0, 4.0, 6.0, 7.5];
        let data = AlignedDataset::from_columns(2000, vec![("y".into(), y)]).unwrap();
        let spec = CandidateSpec::differences(vec![], Deterministic::Constant).unwrap();
        let fit = short_run_fit(&spec, &data).unwrap();
        assert!((fit.constant.unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(fit.ols.n_obs, 5);
        assert_eq!(fit.first_year, 2001);
    }
}
