//! Johansen rank tests for the lag-1 vector error-correction model and the check
//! that a single-equation EC term lies in the estimated cointegration space.

mod tables;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateSpec, Deterministic, ModelForm};
use crate::regress::EcEstimate;
use crate::series::AlignedDataset;
use crate::sim;

pub use tables::{johansen_critical_value, johansen_pvalue, TABLE_LEVELS, TABLE_SIZES};

/// Deterministic specification of the VEC model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JohansenCase {
    /// `Δz = α(β'z + γ) + ε`.
    RestrictedConstant,
    /// `Δz = α(β'z + γ + δt) + α⊥δ' + ε`.
    RestrictedTrendWithDrift,
}

impl JohansenCase {
    pub const ALL: [JohansenCase; 2] = [JohansenCase::RestrictedConstant, JohansenCase::RestrictedTrendWithDrift];

    pub fn code(self) -> &'static str {
        match self {
            JohansenCase::RestrictedConstant => "a",
            JohansenCase::RestrictedTrendWithDrift => "b",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "restricted_constant" => Ok(JohansenCase::RestrictedConstant),
            "b" | "restricted_trend" | "restricted_trend_with_drift" => Ok(JohansenCase::RestrictedTrendWithDrift),
            other => Err(Error::Config(format!("unknown Johansen case `{other}`"))),
        }
    }

    /// The EC-model deterministic terms this case corresponds to.
    pub fn matching_deterministic(self) -> Deterministic {
        match self {
            JohansenCase::RestrictedConstant => Deterministic::Constant,
            JohansenCase::RestrictedTrendWithDrift => Deterministic::ConstantTrend,
        }
    }
}

/// Which rank statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankStatistic {
    Trace,
    MaxEig,
}

impl RankStatistic {
    pub fn code(self) -> &'static str {
        match self {
            RankStatistic::Trace => "trace",
            RankStatistic::MaxEig => "maxeig",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JohansenOptions {
    pub case: JohansenCase,
    /// Lagged differences added to the VEC; zero is the minimal form.
    pub lags: usize,
    /// Level of the sequential rank tests.
    pub level: f64,
}

impl Default for JohansenOptions {
    fn default() -> Self {
        Self {
            case: JohansenCase::RestrictedConstant,
            lags: 0,
            level: 0.05,
        }
    }
}

/// Outcome of a Johansen test on `z` (the dataset's columns, target first).
///
/// Matrices are stored row-major as nested vectors. `beta` columns are scaled so
/// that the first variable has coefficient one wherever that entry is nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecResult {
    pub variables: Vec<String>,
    pub dimension: usize,
    pub case: JohansenCase,
    pub lags: usize,
    pub n_obs: usize,
    pub level: f64,
    pub eigenvalues: Vec<f64>,
    /// Statistics for the null hypotheses `rank <= r`, `r = 0..d-1`.
    pub trace_stats: Vec<f64>,
    pub max_eig_stats: Vec<f64>,
    pub trace_pvalues: Vec<f64>,
    pub max_eig_pvalues: Vec<f64>,
    pub trace_critical_values: Vec<f64>,
    pub max_eig_critical_values: Vec<f64>,
    /// Rank chosen by sequential trace testing.
    pub selected_rank: usize,
    /// Rank chosen by sequential max-eigenvalue testing.
    pub max_eig_rank: usize,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub delta: Option<Vec<f64>>,
    pub delta_prime: Option<Vec<f64>>,
    pub alpha_perp: Option<Vec<Vec<f64>>>,
    pub omega: Vec<Vec<f64>>,
}

impl VecResult {
    pub fn beta_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.beta, self.dimension, self.selected_rank)
    }

    pub fn alpha_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.alpha, self.dimension, self.selected_rank)
    }
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

/// Residuals of the columns of `z` after regression on `on`.
fn partial_out(z: &DMatrix<f64>, on: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    match on {
        None => Ok(z.clone()),
        Some(x) => {
            let coef = x
                .clone()
                .svd(true, true)
                .solve(z, 1e-13)
                .map_err(|e| Error::Estimation(format!("partialling out: {e}")))?;
            Ok(z - x * coef)
        }
    }
}

/// Moment matrices, ordered eigenvalues and eigenvectors of the reduced-rank
/// regression.
struct Rrr {
    n: usize,
    s00: DMatrix<f64>,
    s01: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    /// Columns normalised so that `v' S11 v = I`.
    vectors: DMatrix<f64>,
    z0: DMatrix<f64>,
    z1: DMatrix<f64>,
    z2: Option<DMatrix<f64>>,
}

fn build_and_solve(z: &DMatrix<f64>, case: JohansenCase, lags: usize) -> Result<Rrr> {
    let big_t = z.nrows();
    let d = z.ncols();
    let first = 1 + lags;
    if big_t <= first + d + 2 {
        return Err(Error::InsufficientData(format!(
            "{big_t} observations are too few for a {d}-variable VEC with {lags} lags"
        )));
    }
    let n = big_t - first;
    let z0 = DMatrix::from_fn(n, d, |r, j| z[(first + r, j)] - z[(first + r - 1, j)]);
    let z1 = DMatrix::from_fn(n, d + 1, |r, j| {
        let t = first + r;
        if j < d {
            z[(t - 1, j)]
        } else {
            match case {
                JohansenCase::RestrictedConstant => 1.0,
                JohansenCase::RestrictedTrendWithDrift => (t + 1) as f64,
            }
        }
    });
    let n_z2 = lags * d + usize::from(case == JohansenCase::RestrictedTrendWithDrift);
    let z2 = (n_z2 > 0).then(|| {
        DMatrix::from_fn(n, n_z2, |r, j| {
            let t = first + r;
            if j < lags * d {
                let (l, c) = (j / d + 1, j % d);
                z[(t - l, c)] - z[(t - l - 1, c)]
            } else {
                1.0
            }
        })
    });
    let r0 = partial_out(&z0, z2.as_ref())?;
    let r1 = partial_out(&z1, z2.as_ref())?;
    let nf = n as f64;
    let s00 = r0.tr_mul(&r0) / nf;
    let s01 = r0.tr_mul(&r1) / nf;
    let s11 = r1.tr_mul(&r1) / nf;
    let s00_chol = s00
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Estimation("S00 is not positive definite".into()))?;
    let s11_chol = s11
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Estimation("S11 is not positive definite (collinear levels?)".into()))?;
    let m = s01.transpose() * s00_chol.solve(&s01);
    let l = s11_chol.l();
    let li_m = l
        .solve_lower_triangular(&m)
        .ok_or_else(|| Error::Estimation("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&li_m.transpose())
        .ok_or_else(|| Error::Estimation("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..d + 1).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let v = DMatrix::from_fn(d + 1, d + 1, |i, j| eig.eigenvectors[(i, idx[j])]);
    let vectors = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or_else(|| Error::Estimation("triangular solve failed".into()))?;
    let eigenvalues: Vec<f64> = idx[..d].iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    if eigenvalues.iter().any(|&l| !(l < 1.0 - 1e-12)) {
        return Err(Error::Estimation(format!(
            "eigenvalue {:.3e} at or above one: moment matrices are near-singular",
            eigenvalues[0]
        )));
    }
    Ok(Rrr {
        n,
        s00,
        s01,
        eigenvalues,
        vectors,
        z0,
        z1,
        z2,
    })
}

fn statistics(eigenvalues: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let d = eigenvalues.len();
    let nf = n as f64;
    let max: Vec<f64> = eigenvalues.iter().map(|l| -nf * (1.0 - l).ln()).collect();
    let trace = (0..d).map(|r| max[r..].iter().sum()).collect();
    (trace, max)
}

/// Smallest `r` whose null is not rejected at `level`; `d` when every null is.
fn sequential_rank(pvalues: &[f64], level: f64) -> usize {
    pvalues.iter().position(|&p| p > level).unwrap_or(pvalues.len())
}

/// Orthonormal basis of the orthogonal complement of the columns of `a`.
fn orthogonal_complement(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    let r = a.ncols();
    if r == 0 {
        return DMatrix::identity(d, d);
    }
    let proj = a * (a.tr_mul(a)).try_inverse().unwrap_or_else(|| DMatrix::zeros(r, r)) * a.transpose();
    let p = DMatrix::identity(d, d) - proj;
    let p = (&p + p.transpose()) * 0.5;
    let eig = SymmetricEigen::new(p);
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let mut out = DMatrix::from_fn(d, d - r, |i, j| eig.eigenvectors[(i, idx[j])]);
    for j in 0..d - r {
        let k = out.column(j).iamax();
        if out[(k, j)] < 0.0 {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

/// Johansen trace and maximum-eigenvalue tests with estimates at the trace-selected rank.
pub fn johansen_test(data: &AlignedDataset, options: &JohansenOptions) -> Result<VecResult> {
    let names: Vec<String> = data.column_names().map(str::to_string).collect();
    let d = names.len();
    if !(2..=tables::MAX_DIMENSION).contains(&d) {
        return Err(Error::Unsupported(format!(
            "Johansen tests support 2 to {} variables, got {d}",
            tables::MAX_DIMENSION
        )));
    }
    if data.len() < 5 * d {
        return Err(Error::InsufficientData(format!(
            "a {d}-variable Johansen test needs at least {} observations, got {}",
            5 * d,
            data.len()
        )));
    }
    if !(options.level > 0.0 && options.level < 1.0) {
        return Err(Error::Config(format!("level {} outside (0, 1)", options.level)));
    }
    let cols: Vec<&[f64]> = names.iter().map(|c| data.require(c)).collect::<Result<_>>()?;
    let z = DMatrix::from_fn(data.len(), d, |t, j| cols[j][t]);
    let rrr = build_and_solve(&z, options.case, options.lags)?;
    let (trace_stats, max_eig_stats) = statistics(&rrr.eigenvalues, rrr.n);

    let mut trace_pvalues = Vec::with_capacity(d);
    let mut max_eig_pvalues = Vec::with_capacity(d);
    let mut trace_cv = Vec::with_capacity(d);
    let mut max_cv = Vec::with_capacity(d);
    for r in 0..d {
        let m = d - r;
        trace_pvalues.push(johansen_pvalue(trace_stats[r], RankStatistic::Trace, options.case, m, rrr.n)?);
        max_eig_pvalues.push(johansen_pvalue(max_eig_stats[r], RankStatistic::MaxEig, options.case, m, rrr.n)?);
        trace_cv.push(johansen_critical_value(RankStatistic::Trace, options.case, m, rrr.n, options.level)?);
        max_cv.push(johansen_critical_value(RankStatistic::MaxEig, options.case, m, rrr.n, options.level)?);
    }
    let rank = sequential_rank(&trace_pvalues, options.level);
    let max_eig_rank = sequential_rank(&max_eig_pvalues, options.level);

    let mut beta_full = rrr.vectors.columns(0, rank).into_owned();
    let mut alpha = &rrr.s01 * &beta_full;
    for j in 0..rank {
        let lead = beta_full[(0, j)];
        let scale = if lead.abs() > 1e-12 * beta_full.column(j).norm() {
            lead
        } else {
            let k = beta_full.column(j).iamax();
            beta_full[(k, j)].signum()
        };
        beta_full.column_mut(j).unscale_mut(scale);
        alpha.column_mut(j).scale_mut(scale);
    }
    let omega = &rrr.s00 - &alpha * alpha.transpose();
    let omega = (&omega + omega.transpose()) * 0.5;
    let beta = beta_full.rows(0, d).into_owned();
    let last: Vec<f64> = beta_full.row(d).iter().copied().collect();

    let (gamma, delta, delta_prime, alpha_perp) = match options.case {
        JohansenCase::RestrictedConstant => (last, None, None, None),
        JohansenCase::RestrictedTrendWithDrift => {
            // constant of the regression of Δz on (β'Z1, lagged differences, 1)
            let ec = &rrr.z1 * &beta_full;
            let z2 = rrr.z2.as_ref().expect("case b always has a constant");
            let x = DMatrix::from_fn(rrr.n, rank + z2.ncols(), |t, j| {
                if j < rank {
                    ec[(t, j)]
                } else {
                    z2[(t, j - rank)]
                }
            });
            let coef = x
                .svd(true, true)
                .solve(&rrr.z0, 1e-13)
                .map_err(|e| Error::Estimation(format!("drift regression: {e}")))?;
            let mu0: DVector<f64> = coef.row(coef.nrows() - 1).transpose();
            let perp = orthogonal_complement(&alpha);
            let gamma = if rank == 0 {
                Vec::new()
            } else {
                let ata = alpha.tr_mul(&alpha);
                let g = ata
                    .try_inverse()
                    .ok_or_else(|| Error::Estimation("α'α is singular".into()))?
                    * alpha.tr_mul(&mu0);
                g.iter().copied().collect()
            };
            let dp: Vec<f64> = perp.tr_mul(&mu0).iter().copied().collect();
            (gamma, Some(last), Some(dp), Some(to_rows(&perp)))
        }
    };

    Ok(VecResult {
        variables: names,
        dimension: d,
        case: options.case,
        lags: options.lags,
        n_obs: rrr.n,
        level: options.level,
        eigenvalues: rrr.eigenvalues,
        trace_stats,
        max_eig_stats,
        trace_pvalues,
        max_eig_pvalues,
        trace_critical_values: trace_cv,
        max_eig_critical_values: max_cv,
        selected_rank: rank,
        max_eig_rank,
        alpha: to_rows(&alpha),
        beta: to_rows(&beta),
        gamma,
        delta,
        delta_prime,
        alpha_perp,
        omega: to_rows(&omega),
    })
}

/// Null distribution of the rank-zero trace and max-eigenvalue statistics for an
/// `m`-variable system: `m` independent Gaussian random walks of `n_obs + 1`
/// points, lag-1 VEC with the given deterministic case. Repetition `i` uses
/// `sim::stream(seed, i)`.
pub fn simulate_rank_zero(case: JohansenCase, m: usize, n_obs: usize, reps: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sim::stream(seed, i);
            let mut z = DMatrix::zeros(n_obs + 1, m);
            for t in 1..=n_obs {
                for j in 0..m {
                    z[(t, j)] = z[(t - 1, j)] + sim::normal(&mut rng);
                }
            }
            let rrr = build_and_solve(&z, case, 0)?;
            let (trace, max) = statistics(&rrr.eigenvalues, rrr.n);
            Ok((trace[0], max[0]))
        })
        .collect()
}

/// Whether an EC term lies in the Johansen cointegration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    /// Weights of the cointegrating vectors.
    pub xi: Vec<f64>,
    /// Coefficient names of the EC term: target, predictors, `c`, then `trend`.
    pub coefficient_names: Vec<String>,
    /// EC-term coefficients `(1, -β, -c[, -δ])` of the single-equation model.
    pub ec_coefficients: Vec<f64>,
    pub reconstructed_ec: Vec<f64>,
    /// Standard errors bounding each coefficient (zero for the target).
    pub bounds: Vec<f64>,
    pub within_bounds: bool,
}

/// Fits `ξ` so that `Σ ξ_i (β_i, γ_i[, δ_i])` reproduces the EC term of `ec`.
///
/// The target coefficient is matched exactly; the others by weighted least squares
/// with weights `1/se²` from the EC estimate. The verdict requires every
/// reconstructed coefficient to lie within one standard error.
pub fn ec_consistency(vec: &VecResult, ec: &EcEstimate, spec: &CandidateSpec) -> Result<ConsistencyResult> {
    if spec.form != ModelForm::Levels {
        return Err(Error::Config(format!("`{}` is not a levels-form model", spec.id)));
    }
    if ec.spec_id != spec.id {
        return Err(Error::Config(format!("estimate of `{}` does not belong to `{}`", ec.spec_id, spec.id)));
    }
    if spec.deterministic != vec.case.matching_deterministic() {
        return Err(Error::Config(format!(
            "Johansen case {} needs EC deterministic terms {}, got {}",
            vec.case.code(),
            vec.case.matching_deterministic(),
            spec.deterministic
        )));
    }
    let r = vec.selected_rank;
    if r == 0 {
        return Err(Error::NoCointegrationSpace);
    }
    if vec.variables.len() != spec.subset.len() + 1 || vec.variables[1..].iter().any(|v| !spec.subset.contains(v)) {
        return Err(Error::Config(format!(
            "VEC variables {:?} do not match the target plus {:?}",
            vec.variables, spec.subset
        )));
    }

    let d = vec.dimension;
    let trend = vec.case == JohansenCase::RestrictedTrendWithDrift;
    let p = d + 1 + usize::from(trend);
    let beta = vec.beta_matrix();
    let delta = vec.delta.clone().unwrap_or_default();
    let a = DMatrix::from_fn(p, r, |i, j| {
        if i < d {
            beta[(i, j)]
        } else if i == d {
            vec.gamma[j]
        } else {
            delta[j]
        }
    });

    let mut names = vec![vec.variables[0].clone()];
    let mut target = vec![1.0];
    let mut se = vec![0.0];
    for v in &vec.variables[1..] {
        names.push(v.clone());
        target.push(-ec.param(v).ok_or_else(|| Error::Config(format!("EC estimate lacks `{v}`")))?);
        se.push(ec.std_error(v).unwrap_or(0.0));
    }
    for term in ["c", "trend"].iter().take(1 + usize::from(trend)) {
        names.push((*term).to_string());
        target.push(-ec.param(term).ok_or_else(|| Error::Config(format!("EC estimate lacks `{term}`")))?);
        se.push(ec.std_error(term).unwrap_or(0.0));
    }

    // weighted least squares with the target row as an equality constraint (KKT system)
    let floor = 1e-12 * se.iter().fold(1.0f64, |m, s| m.max(*s));
    let w: Vec<f64> = se.iter().map(|s| 1.0 / s.max(floor).powi(2)).collect();
    let mut kkt = DMatrix::zeros(r + 1, r + 1);
    let mut rhs = DVector::zeros(r + 1);
    for i in 1..p {
        for j in 0..r {
            rhs[j] += w[i] * a[(i, j)] * target[i];
            for k in 0..r {
                kkt[(j, k)] += w[i] * a[(i, j)] * a[(i, k)];
            }
        }
    }
    let scale = w.iter().skip(1).fold(1.0f64, |m, v| m.max(*v));
    for j in 0..r {
        kkt[(j, r)] = scale * a[(0, j)];
        kkt[(r, j)] = scale * a[(0, j)];
    }
    rhs[r] = scale;
    let xi: Option<DVector<f64>> = if a.row(0).iter().all(|v| v.abs() < 1e-12) {
        None
    } else {
        kkt.clone()
            .lu()
            .solve(&rhs)
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .or_else(|| kkt.svd(true, true).solve(&rhs, 1e-14).ok())
            .map(|s| s.rows(0, r).into_owned())
    };
    let Some(xi) = xi else {
        // the target cannot be reached from the cointegration space
        return Ok(ConsistencyResult {
            xi: vec![0.0; r],
            coefficient_names: names,
            reconstructed_ec: vec![0.0; p],
            ec_coefficients: target,
            bounds: se,
            within_bounds: false,
        });
    };
    let recon: Vec<f64> = (&a * &xi).iter().copied().collect();
    let within = recon
        .iter()
        .zip(&target)
        .zip(&se)
        .skip(1)
        .all(|((x, t), s)| (x - t).abs() <= *s)
        && (recon[0] - 1.0).abs() <= 1e-8;
    Ok(ConsistencyResult {
        xi: xi.iter().copied().collect(),
        coefficient_names: names,
        ec_coefficients: target,
        reconstructed_ec: recon,
        bounds: se,
        within_bounds: within,
    })
}
