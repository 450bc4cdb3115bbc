//! Monte Carlo forecasts with coefficient uncertainty and forecast comparisons.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateSpec, ModelForm};
use crate::regress::{nls_ec_fit, short_run_fit, FittedModel, NlsOptions};
use crate::series::AlignedDataset;
use crate::sim;

/// How the error bounds are formed from the simulated paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// Mean ± 2 pointwise standard deviations.
    #[default]
    StdDev,
    /// Pointwise 2.275% and 97.725% quantiles (the normal ±2σ coverage).
    Quantile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig {
    pub reps: usize,
    pub seed: u64,
    pub horizon_start: i32,
    pub horizon_end: i32,
    pub include_coefficient_uncertainty: bool,
    pub band: BandKind,
}

impl ForecastConfig {
    pub fn new(horizon_start: i32, horizon_end: i32, seed: u64) -> Self {
        Self {
            reps: 10_000,
            seed,
            horizon_start,
            horizon_end,
            include_coefficient_uncertainty: true,
            band: BandKind::StdDev,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("forecast needs at least one repetition".into()));
        }
        if self.horizon_start > self.horizon_end {
            return Err(Error::Config(format!(
                "horizon {}..{} is empty",
                self.horizon_start, self.horizon_end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBands {
    pub spec_id: String,
    pub years: Vec<i32>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Pointwise standard deviation of the simulated paths.
    pub sd: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub band: BandKind,
    /// Set when the coefficient covariance was not positive definite and only its
    /// diagonal was used.
    pub diagonal_covariance_fallback: bool,
}

impl ForecastBands {
    pub fn widths(&self) -> Vec<f64> {
        self.upper.iter().zip(&self.lower).map(|(u, l)| u - l).collect()
    }
}

/// Coefficients of one simulated path.
struct Coefs {
    betas: Vec<f64>,
    c: f64,
    trend: f64,
    phi: f64,
}

fn unpack(spec: &CandidateSpec, names: &[String], theta: &[f64]) -> Coefs {
    let get = |n: &str| names.iter().position(|m| m == n).map_or(0.0, |i| theta[i]);
    Coefs {
        betas: spec.subset.iter().map(|s| get(s)).collect(),
        c: get("c"),
        trend: get("trend"),
        phi: get("phi"),
    }
}

/// Lower Cholesky factor of the covariance, or of its diagonal when the full matrix
/// is not positive definite.
fn covariance_factor(cov: &[Vec<f64>]) -> (DMatrix<f64>, bool) {
    let k = cov.len();
    let m = DMatrix::from_fn(k, k, |i, j| cov[i][j]);
    if k == 0 {
        return (m, false);
    }
    match m.clone().cholesky() {
        Some(ch) => (ch.l(), false),
        None => (
            DMatrix::from_fn(k, k, |i, j| if i == j { m[(i, i)].max(0.0).sqrt() } else { 0.0 }),
            true,
        ),
    }
}

/// Last year used to estimate `model`.
fn estimation_end(model: &FittedModel) -> i32 {
    let (first, n) = match model {
        FittedModel::ErrorCorrection(e) => (e.first_year, e.n_obs),
        FittedModel::ShortRun(s) => (s.first_year, s.ols.n_obs),
    };
    first + n as i32 - 1
}

/// Simulated conditional forecasts of the target over the configured horizon.
///
/// Repetition `i` draws coefficients (when enabled) and Gaussian innovations from
/// `sim::stream(seed, i)` and runs the model recursion from the observed target
/// in the year before the horizon, conditioning on observed predictors.
pub fn mc_forecast(spec: &CandidateSpec, model: &FittedModel, data: &AlignedDataset, config: &ForecastConfig) -> Result<ForecastBands> {
    config.validate()?;
    if model.spec_id() != spec.id {
        return Err(Error::Config(format!("model `{}` is not an estimate of `{}`", model.spec_id(), spec.id)));
    }
    let end = estimation_end(model);
    if config.horizon_start <= end {
        return Err(Error::Config(format!(
            "horizon starts in {} but the model was estimated up to {end}",
            config.horizon_start
        )));
    }
    if config.horizon_start - 1 < data.first_year() || config.horizon_end > data.last_year() {
        return Err(Error::Config(format!(
            "data cover {}..{}, the forecast needs {}..{}",
            data.first_year(),
            data.last_year(),
            config.horizon_start - 1,
            config.horizon_end
        )));
    }
    let idx0 = (config.horizon_start - 1 - data.first_year()) as usize;
    let h = (config.horizon_end - config.horizon_start + 1) as usize;
    let y0 = data.target_values()[idx0];
    let xs: Vec<&[f64]> = spec.subset.iter().map(|s| data.require(s)).collect::<Result<_>>()?;
    // predictor values at idx0..=idx0+h
    let x_path: Vec<Vec<f64>> = xs.iter().map(|x| x[idx0..=idx0 + h].to_vec()).collect();

    let names = model.param_names().to_vec();
    let theta_hat = model.params().to_vec();
    let sigma = model.sigma2().max(0.0).sqrt();
    if !sigma.is_finite() {
        return Err(Error::DegreesOfFreedom {
            observations: model.n_obs(),
            parameters: model.n_params(),
        });
    }
    let (factor, fallback) = covariance_factor(model.covariance());
    let phi_index = names.iter().position(|n| n == "phi");
    // trend index of the first horizon year, counted from the estimation sample start
    let t0 = match model {
        FittedModel::ErrorCorrection(e) => (config.horizon_start - e.first_year + 2) as f64,
        FittedModel::ShortRun(_) => 0.0,
    };
    let form = spec.form;

    let paths: Vec<Vec<f64>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = sim::stream(config.seed, rep);
            let theta = if config.include_coefficient_uncertainty && !theta_hat.is_empty() {
                let mut attempt = 0;
                loop {
                    let z = DVector::from_fn(theta_hat.len(), |_, _| sim::normal(&mut rng));
                    let draw = DVector::from_column_slice(&theta_hat) + &factor * z;
                    if phi_index.is_none_or(|i| draw[i].abs() < 1.0) {
                        break draw.iter().copied().collect::<Vec<f64>>();
                    }
                    attempt += 1;
                    if attempt == 100 {
                        return Err(Error::Estimation(
                            "100 coefficient draws in a row had |phi| >= 1".into(),
                        ));
                    }
                }
            } else {
                theta_hat.clone()
            };
            let k = unpack(spec, &names, &theta);
            let mut path = Vec::with_capacity(h);
            let mut y_prev = y0;
            for step in 0..h {
                let eps = if sigma > 0.0 { sigma * sim::normal(&mut rng) } else { 0.0 };
                let y = match form {
                    ModelForm::Levels => {
                        let t = t0 + step as f64;
                        let fit_now: f64 = k.betas.iter().zip(&x_path).map(|(b, x)| b * x[step + 1]).sum();
                        let fit_prev: f64 = k.betas.iter().zip(&x_path).map(|(b, x)| b * x[step]).sum();
                        let eq_now = k.c + k.trend * t + fit_now;
                        let eq_prev = k.c + k.trend * (t - 1.0) + fit_prev;
                        eq_now + k.phi * (y_prev - eq_prev) + eps
                    }
                    ModelForm::Differences => {
                        let dx: f64 = k.betas.iter().zip(&x_path).map(|(b, x)| b * (x[step + 1] - x[step])).sum();
                        y_prev + k.c + dx + eps
                    }
                };
                path.push(y);
                y_prev = y;
            }
            Ok(path)
        })
        .collect::<Result<_>>()?;

    let reps = paths.len() as f64;
    let mut mean = vec![0.0; h];
    for p in &paths {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= reps);
    let mut var = vec![0.0; h];
    for p in &paths {
        for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
            *s += (v - m).powi(2);
        }
    }
    let sd: Vec<f64> = var
        .iter()
        .map(|s| if paths.len() > 1 { (s / (reps - 1.0)).sqrt() } else { 0.0 })
        .collect();
    let (lower, upper) = match config.band {
        BandKind::StdDev => (
            mean.iter().zip(&sd).map(|(m, s)| m - 2.0 * s).collect(),
            mean.iter().zip(&sd).map(|(m, s)| m + 2.0 * s).collect(),
        ),
        BandKind::Quantile => {
            let mut lo = Vec::with_capacity(h);
            let mut hi = Vec::with_capacity(h);
            for step in 0..h {
                let mut col: Vec<f64> = paths.iter().map(|p| p[step]).collect();
                col.sort_by(|a, b| a.total_cmp(b));
                lo.push(quantile(&col, 0.02275).min(mean[step]));
                hi.push(quantile(&col, 0.97725).max(mean[step]));
            }
            (lo, hi)
        }
    };
    Ok(ForecastBands {
        spec_id: spec.id.clone(),
        years: (config.horizon_start..=config.horizon_end).collect(),
        mean,
        lower,
        upper,
        sd,
        reps: config.reps,
        seed: config.seed,
        band: config.band,
        diagonal_covariance_fallback: fallback,
    })
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Estimates `spec` on `data` (EC model by NLS, short-run model by OLS).
pub fn fit_spec(spec: &CandidateSpec, data: &AlignedDataset, nls: &NlsOptions) -> Result<FittedModel> {
    match spec.form {
        ModelForm::Levels => {
            let est = nls_ec_fit(spec, data, nls)?;
            if !est.converged {
                return Err(Error::Estimation(format!("`{}` did not converge", spec.id)));
            }
            Ok(FittedModel::ErrorCorrection(est))
        }
        ModelForm::Differences => Ok(FittedModel::ShortRun(short_run_fit(spec, data)?)),
    }
}

/// Training window end and forecast horizon end (inclusive years).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train_end: i32,
    pub horizon_end: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub split: Split,
    pub spec_id: String,
    pub available: bool,
    pub error: Option<String>,
    pub bands: Option<ForecastBands>,
    pub realization: Vec<f64>,
    pub rmse: Option<f64>,
    pub mean_band_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub target: String,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    /// Long-format CSV: one line per split, model and forecast year.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["train_end", "horizon_end", "model", "year", "realization", "mean", "lower", "upper"])
            .map_err(io)?;
        for row in &self.rows {
            let Some(b) = &row.bands else {
                continue;
            };
            for (i, year) in b.years.iter().enumerate() {
                w.write_record([
                    row.split.train_end.to_string(),
                    row.split.horizon_end.to_string(),
                    row.spec_id.clone(),
                    year.to_string(),
                    row.realization[i].to_string(),
                    b.mean[i].to_string(),
                    b.lower[i].to_string(),
                    b.upper[i].to_string(),
                ])
                .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Re-estimates every model on each training window and forecasts the following
/// years. Every model and split uses `config.seed`. Estimation or forecast failures
/// mark the row unavailable.
pub fn forecast_compare(
    models: &[CandidateSpec],
    data: &AlignedDataset,
    splits: &[Split],
    config: &ForecastConfig,
    nls: &NlsOptions,
) -> Result<ComparisonReport> {
    if models.is_empty() {
        return Err(Error::Config("no models to compare".into()));
    }
    if splits.is_empty() {
        return Err(Error::Config("no forecast splits given".into()));
    }
    let mut rows = Vec::new();
    for &split in splits {
        if split.train_end >= split.horizon_end || split.train_end < data.first_year() || split.horizon_end > data.last_year() {
            return Err(Error::Config(format!(
                "split {}/{} does not fit the data range {}..{}",
                split.train_end,
                split.horizon_end,
                data.first_year(),
                data.last_year()
            )));
        }
        let train = data.window(data.first_year(), split.train_end)?;
        let from = (split.train_end + 1 - data.first_year()) as usize;
        let to = (split.horizon_end - data.first_year()) as usize;
        let realization = data.target_values()[from..=to].to_vec();
        let cfg = ForecastConfig {
            horizon_start: split.train_end + 1,
            horizon_end: split.horizon_end,
            ..*config
        };
        for spec in models {
            let outcome = fit_spec(spec, &train, nls).and_then(|m| mc_forecast(spec, &m, data, &cfg));
            rows.push(match outcome {
                Ok(b) => {
                    let h = realization.len() as f64;
                    let rmse = (b.mean.iter().zip(&realization).map(|(m, r)| (m - r).powi(2)).sum::<f64>() / h).sqrt();
                    let width = b.widths().iter().sum::<f64>() / h;
                    ComparisonRow {
                        split,
                        spec_id: spec.id.clone(),
                        available: true,
                        error: None,
                        bands: Some(b),
                        realization: realization.clone(),
                        rmse: Some(rmse),
                        mean_band_width: Some(width),
                    }
                }
                Err(e) => ComparisonRow {
                    split,
                    spec_id: spec.id.clone(),
                    available: false,
                    error: Some(e.to_string()),
                    bands: None,
                    realization: realization.clone(),
                    rmse: None,
                    mean_band_width: None,
                },
            });
        }
    }
    Ok(ComparisonReport {
        target: data.target().to_string(),
        rows,
    })
}
