//! Levenberg-Marquardt estimation of the error-correction regression
//!
//! ```text
//! Δy_t = Σ β_i Δx_it + δφ + (φ - 1)[y_{t-1} - c - δt - Σ β_i x_i(t-1)] + ε_t
//! ```
//!
//! which is the level relation `y_t = c + δt + Σ β_i x_it + η_t` with AR(1) noise
//! `η_t = φ η_{t-1} + ε_t` rewritten in error-correction form. The trend `t` is the
//! 1-based observation index within the dataset.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ols::{lstsq, ols_fit, t_ratio, to_rows, OlsEstimate};
use crate::error::{Error, Result};
use crate::model::{CandidateSpec, ModelForm};
use crate::series::AlignedDataset;

/// Stopping rules of the Marquardt iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NlsOptions {
    /// Maximum relative coefficient change at convergence.
    pub tol: f64,
    pub max_iter: usize,
    pub initial_lambda: f64,
}

impl Default for NlsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 500,
            initial_lambda: 1e-3,
        }
    }
}

impl NlsOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.initial_lambda > 0.0) {
            return Err(Error::Config(format!("invalid NLS options {self:?}")));
        }
        Ok(())
    }
}

/// A nonlinear least-squares problem with an analytic Jacobian of the residuals.
pub trait LeastSquaresProblem {
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, params: &DVector<f64>) -> DMatrix<f64>;
}

/// Result of [`levenberg_marquardt`].
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: DVector<f64>,
    pub ssr: f64,
    pub iterations: usize,
    pub converged: bool,
    /// SSR after the start and after every accepted step.
    pub ssr_trace: Vec<f64>,
}

const LAMBDA_MAX: f64 = 1e16;

/// Marquardt's damped Gauss-Newton iteration with `diag(JᵀJ)` scaling.
///
/// Converged when every coefficient changes by less than `tol` relative to
/// `max(|θ_j|, ‖r‖ / ‖J_j‖)`, or when no damped step can lower the SSR any further.
pub fn levenberg_marquardt<P: LeastSquaresProblem>(
    problem: &P,
    start: DVector<f64>,
    options: &NlsOptions,
) -> Result<LmOutcome> {
    options.validate()?;
    let mut params = start;
    let mut r = problem.residuals(&params);
    let mut ssr = r.norm_squared();
    if !ssr.is_finite() {
        return Err(Error::Estimation("non-finite residuals at the start point".into()));
    }
    let mut lambda = options.initial_lambda;
    let mut trace = vec![ssr];
    let k = params.len();

    for iter in 1..=options.max_iter {
        let jac = problem.jacobian(&params);
        let mut scale = DVector::zeros(k);
        for j in 0..k {
            let n = jac.column(j).norm();
            if n == 0.0 || !n.is_finite() {
                return Err(Error::SingularDesign(format!(
                    "Jacobian column {j} vanishes"
                )));
            }
            scale[j] = n;
        }
        let grad = jac.transpose() * &r;
        let jtj = jac.transpose() * &jac;
        let scaled_jtj = DMatrix::from_fn(k, k, |i, j| jtj[(i, j)] / (scale[i] * scale[j]));
        let scaled_grad = grad.component_div(&scale);

        loop {
            let mut a = scaled_jtj.clone();
            for i in 0..k {
                a[(i, i)] += lambda;
            }
            let step = a
                .cholesky()
                .map(|c| c.solve(&(-&scaled_grad)).component_div(&scale));
            if let Some(step) = step {
                let candidate = &params + &step;
                let r_new = problem.residuals(&candidate);
                let ssr_new = r_new.norm_squared();
                if ssr_new.is_finite() && ssr_new <= ssr {
                    let res_norm = ssr.sqrt();
                    let converged = (0..k).all(|j| {
                        let reference = params[j].abs().max(res_norm / scale[j]);
                        step[j].abs() <= options.tol * reference
                    });
                    params = candidate;
                    r = r_new;
                    ssr = ssr_new;
                    trace.push(ssr);
                    lambda = (lambda / 10.0).max(1e-12);
                    if converged {
                        return Ok(LmOutcome {
                            params,
                            ssr,
                            iterations: iter,
                            converged: true,
                            ssr_trace: trace,
                        });
                    }
                    break;
                }
            }
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                // no damped step lowers the SSR: numerically at a minimum
                return Ok(LmOutcome {
                    params,
                    ssr,
                    iterations: iter,
                    converged: true,
                    ssr_trace: trace,
                });
            }
        }
    }
    Ok(LmOutcome {
        params,
        ssr,
        iterations: options.max_iter,
        converged: false,
        ssr_trace: trace,
    })
}

/// Fitted error-correction (or restricted levels) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcEstimate {
    pub spec_id: String,
    /// Names of the free parameters, in the order of `params` and `covariance`:
    /// predictors, then `c`, `trend`, `phi` when present.
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    pub betas: Vec<(String, f64)>,
    pub constant: Option<f64>,
    pub trend: Option<f64>,
    pub phi: Option<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub t_ratios: Vec<(String, f64)>,
    pub residuals: Vec<f64>,
    /// Calendar year of the first residual.
    pub first_year: i32,
    pub ssr: f64,
    pub n_obs: usize,
    pub n_params: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the fitted `|φ| ≥ 1`, i.e. the noise is not stationary.
    pub phi_nonstationary: bool,
}

impl EcEstimate {
    pub fn sigma2(&self) -> f64 {
        self.ssr / (self.n_obs - self.n_params) as f64
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.param_names.iter().position(|n| n == name)?;
        Some(self.covariance[i][i].max(0.0).sqrt())
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        let i = self.param_names.iter().position(|n| n == name)?;
        Some(self.params[i])
    }
}

/// Which parameters a spec estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EcLayout {
    pub n_betas: usize,
    pub constant: bool,
    pub trend: bool,
    pub phi: bool,
}

impl EcLayout {
    pub fn of(spec: &CandidateSpec) -> Self {
        Self {
            n_betas: spec.subset.len(),
            constant: spec.deterministic.has_constant(),
            trend: spec.deterministic.has_trend(),
            phi: spec.phi_free,
        }
    }

    pub fn len(&self) -> usize {
        self.n_betas + usize::from(self.constant) + usize::from(self.trend) + usize::from(self.phi)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn constant_index(&self) -> Option<usize> {
        self.constant.then_some(self.n_betas)
    }

    pub fn trend_index(&self) -> Option<usize> {
        self.trend
            .then_some(self.n_betas + usize::from(self.constant))
    }

    pub fn phi_index(&self) -> Option<usize> {
        self.phi.then_some(self.len() - 1)
    }

    pub fn names(&self, predictors: &[String]) -> Vec<String> {
        let mut names: Vec<String> = predictors.to_vec();
        if self.constant {
            names.push("c".into());
        }
        if self.trend {
            names.push("trend".into());
        }
        if self.phi {
            names.push("phi".into());
        }
        names
    }
}

/// The error-correction regression over the sample that loses the first observation.
#[derive(Debug, Clone)]
pub struct EcProblem {
    pub layout: EcLayout,
    pub first_year: i32,
    dy: Vec<f64>,
    y_lag: Vec<f64>,
    x: Vec<Vec<f64>>,
    x_lag: Vec<Vec<f64>>,
    trend: Vec<f64>,
}

impl EcProblem {
    pub fn new(spec: &CandidateSpec, data: &AlignedDataset) -> Result<Self> {
        if spec.form != ModelForm::Levels {
            return Err(Error::Config(format!(
                "`{}` is not a levels-form model",
                spec.id
            )));
        }
        let layout = EcLayout::of(spec);
        let y = data.target_values();
        let n = y.len();
        if n < layout.len() + 3 {
            return Err(Error::InsufficientData(format!(
                "{} observations are too few for {} parameters",
                n,
                layout.len()
            )));
        }
        let cols = spec
            .subset
            .iter()
            .map(|name| data.require(name))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            layout,
            first_year: data.first_year() + 1,
            dy: (1..n).map(|t| y[t] - y[t - 1]).collect(),
            y_lag: y[..n - 1].to_vec(),
            x: cols.iter().map(|c| c[1..].to_vec()).collect(),
            x_lag: cols.iter().map(|c| c[..n - 1].to_vec()).collect(),
            trend: (2..=n).map(|t| t as f64).collect(),
        })
    }

    pub fn n_obs(&self) -> usize {
        self.dy.len()
    }

    /// Levels of `y_t`, i.e. the regressand of the restricted model.
    pub fn y_level(&self) -> Vec<f64> {
        self.dy.iter().zip(&self.y_lag).map(|(d, l)| d + l).collect()
    }

    /// Design of the restricted (`φ = 0`) levels regression: predictors, constant, trend.
    pub fn levels_design(&self) -> DMatrix<f64> {
        let n = self.n_obs();
        let k = self.layout.n_betas + usize::from(self.layout.constant) + usize::from(self.layout.trend);
        DMatrix::from_fn(n, k, |t, j| {
            if j < self.layout.n_betas {
                self.x[j][t]
            } else if self.layout.constant && j == self.layout.n_betas {
                1.0
            } else {
                self.trend[t]
            }
        })
    }

    fn unpack(&self, p: &DVector<f64>) -> (f64, f64, f64) {
        let c = self.layout.constant_index().map_or(0.0, |i| p[i]);
        let d = self.layout.trend_index().map_or(0.0, |i| p[i]);
        let phi = self.layout.phi_index().map_or(0.0, |i| p[i]);
        (c, d, phi)
    }

    /// Value of the error-correction bracket `y_{t-1} - c - δt - Σβx_{t-1}`.
    fn ec_term(&self, p: &DVector<f64>, t: usize) -> f64 {
        let (c, d, _) = self.unpack(p);
        let mut v = self.y_lag[t] - c - d * self.trend[t];
        for i in 0..self.layout.n_betas {
            v -= p[i] * self.x_lag[i][t];
        }
        v
    }
}

impl LeastSquaresProblem for EcProblem {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let (_, d, phi) = self.unpack(p);
        DVector::from_fn(self.n_obs(), |t, _| {
            let mut short_run = 0.0;
            for i in 0..self.layout.n_betas {
                short_run += p[i] * (self.x[i][t] - self.x_lag[i][t]);
            }
            self.dy[t] - short_run - d * phi - (phi - 1.0) * self.ec_term(p, t)
        })
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let (_, d, phi) = self.unpack(p);
        let n = self.n_obs();
        let mut jac = DMatrix::zeros(n, self.layout.len());
        for t in 0..n {
            for i in 0..self.layout.n_betas {
                jac[(t, i)] = -(self.x[i][t] - phi * self.x_lag[i][t]);
            }
            if let Some(ci) = self.layout.constant_index() {
                jac[(t, ci)] = phi - 1.0;
            }
            if let Some(ti) = self.layout.trend_index() {
                jac[(t, ti)] = -(self.trend[t] - phi * (self.trend[t] - 1.0));
            }
            if let Some(pi) = self.layout.phi_index() {
                jac[(t, pi)] = -d - self.ec_term(p, t);
            }
        }
        jac
    }
}

/// Lag-1 autocorrelation clamped to `(-0.99, 0.99)`.
fn phi_start(residuals: &[f64]) -> f64 {
    let num: f64 = residuals.windows(2).map(|w| w[0] * w[1]).sum();
    let den: f64 = residuals.iter().map(|e| e * e).sum();
    if den > 0.0 {
        (num / den).clamp(-0.99, 0.99)
    } else {
        0.0
    }
}

/// Full-sample OLS of `y` on the spec's predictors and deterministic terms
/// (predictors first, then constant, then trend with `t` = 1..n).
pub fn levels_ols(spec: &CandidateSpec, data: &AlignedDataset) -> Result<OlsEstimate> {
    let y = data.target_values();
    let n = y.len();
    let cols = spec
        .subset
        .iter()
        .map(|name| data.require(name))
        .collect::<Result<Vec<_>>>()?;
    let k = cols.len() + spec.deterministic.count();
    let design = DMatrix::from_fn(n, k, |t, j| {
        if j < cols.len() {
            cols[j][t]
        } else if j == cols.len() {
            1.0
        } else {
            (t + 1) as f64
        }
    });
    ols_fit(&design, y)
}

/// Estimates the error-correction model of a levels-form spec.
///
/// With `φ` restricted to zero the regression is linear and solved by OLS over the
/// same sample; otherwise the Marquardt iteration runs from the better (lower SSR)
/// of two warm starts: the full-sample levels OLS with `φ` at the lag-1
/// autocorrelation of its residuals, and the restricted optimum with `φ = 0`.
pub fn nls_ec_fit(spec: &CandidateSpec, data: &AlignedDataset, options: &NlsOptions) -> Result<EcEstimate> {
    let problem = EcProblem::new(spec, data)?;
    let layout = problem.layout;
    let n = problem.n_obs();
    if n < layout.len() + 2 {
        return Err(Error::InsufficientData(format!(
            "{n} usable observations for {} parameters",
            layout.len()
        )));
    }
    let restricted = ols_fit(&problem.levels_design(), &problem.y_level())?;

    let (params, ssr, iterations, converged) = if layout.phi {
        let step1 = levels_ols(spec, data)?;
        let mut a = step1.coefficients.clone();
        a.push(phi_start(&step1.residuals));
        let mut b = restricted.coefficients.clone();
        b.push(0.0);
        let a = DVector::from_vec(a);
        let b = DVector::from_vec(b);
        let start = if problem.residuals(&a).norm_squared() < problem.residuals(&b).norm_squared() {
            a
        } else {
            b
        };
        let out = levenberg_marquardt(&problem, start, options)?;
        (out.params, out.ssr, out.iterations, out.converged)
    } else {
        (
            DVector::from_vec(restricted.coefficients.clone()),
            restricted.ssr,
            0,
            true,
        )
    };

    let residuals = problem.residuals(&params);
    let jac = problem.jacobian(&params);
    let (_, jtj_inv) = lstsq(&jac, &residuals)
        .map_err(|e| Error::Estimation(format!("singular Jacobian at the optimum: {e}")))?;
    let dof = n - layout.len();
    let cov = jtj_inv * (ssr / dof as f64);
    let cov = (&cov + cov.transpose()) * 0.5;

    let names = layout.names(&spec.subset);
    let t_ratios = names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), t_ratio(params[i], cov[(i, i)])))
        .collect();
    let phi = layout.phi_index().map(|i| params[i]);
    Ok(EcEstimate {
        spec_id: spec.id.clone(),
        betas: spec
            .subset
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), params[i]))
            .collect(),
        constant: layout.constant_index().map(|i| params[i]),
        trend: layout.trend_index().map(|i| params[i]),
        phi,
        param_names: names,
        params: params.iter().copied().collect(),
        covariance: to_rows(&cov),
        t_ratios,
        residuals: residuals.iter().copied().collect(),
        first_year: problem.first_year,
        ssr,
        n_obs: n,
        n_params: layout.len(),
        converged,
        iterations,
        phi_nonstationary: phi.is_some_and(|p| p.abs() >= 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Deterministic;
    use crate::sim;

    fn dgp(seed: u64, n: usize, beta: f64, phi: f64, sd: f64) -> AlignedDataset {
        let mut rng = sim::stream(seed, 0);
        let x = sim::random_walk(&mut rng, n, 1.0);
        let eta = sim::ar1(&mut rng, n, phi, sd);
        let y: Vec<f64> = x.iter().zip(&eta).map(|(x, e)| beta * x + e).collect();
        AlignedDataset::from_columns(1900, vec![("y".into(), y), ("x".into(), x)]).unwrap()
    }

    #[test]
    fn recovers_generating_values() {
        let data = dgp(7, 200, 0.4, 0.5, 0.01);
        let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::None, true).unwrap();
        let est = nls_ec_fit(&spec, &data, &NlsOptions::default()).unwrap();
        assert!(est.converged);
        assert!((est.betas[0].1 - 0.4).abs() < 0.05, "{:?}", est.betas);
        assert!((est.phi.unwrap() - 0.5).abs() < 0.15, "{:?}", est.phi);
        assert!(!est.phi_nonstationary);
    }

    #[test]
    fn restricted_spec_is_ols_on_levels() {
        let data = dgp(3, 120, 1.5, 0.3, 0.5);
        let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::ConstantTrend, false).unwrap();
        let est = nls_ec_fit(&spec, &data, &NlsOptions::default()).unwrap();
        let p = EcProblem::new(&spec, &data).unwrap();
        let ols = ols_fit(&p.levels_design(), &p.y_level()).unwrap();
        for (a, b) in est.params.iter().zip(&ols.coefficients) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        assert!(est.phi.is_none());
    }

    #[test]
    fn marquardt_on_restricted_problem_reaches_ols() {
        let data = dgp(11, 150, 0.8, 0.0, 0.3);
        let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::Constant, false).unwrap();
        let p = EcProblem::new(&spec, &data).unwrap();
        let ols = ols_fit(&p.levels_design(), &p.y_level()).unwrap();
        let opts = NlsOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let out = levenberg_marquardt(&p, DVector::from_vec(vec![0.0, 0.0]), &opts).unwrap();
        assert!(out.converged);
        assert!((out.params[0] - ols.coefficients[0]).abs() < 1e-6);
        assert!(out.ssr_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exact_linear_relation() {
        let mut rng = sim::stream(5, 0);
        let x = sim::random_walk(&mut rng, 60, 1.0);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let data = AlignedDataset::from_columns(1950, vec![("y".into(), y), ("x".into(), x)]).unwrap();
        let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::Constant, false).unwrap();
        let est = nls_ec_fit(&spec, &data, &NlsOptions::default()).unwrap();
        assert!(est.ssr < 1e-16);
        assert!(est.t_ratios.iter().all(|(_, t)| !t.is_nan()));
    }

    #[test]
    fn unrestricted_fit_never_worse_than_restricted() {
        for seed in 0..20 {
            let data = dgp(100 + seed, 80, 1.0, 0.6, 1.0);
            for det in Deterministic::ALL {
                let free = CandidateSpec::levels(vec!["x".into()], det, true).unwrap();
                let a = nls_ec_fit(&free, &data, &NlsOptions::default()).unwrap();
                let b = nls_ec_fit(&free.restricted_twin(), &data, &NlsOptions::default()).unwrap();
                assert!(a.ssr <= b.ssr * (1.0 + 1e-12), "seed {seed} {det}");
            }
        }
    }
}
