use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Design matrices whose column-equilibrated condition number exceeds this are singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsEstimate {
    pub coefficients: Vec<f64>,
    /// Row-major `s² (XᵀX)⁻¹`.
    pub covariance: Vec<Vec<f64>>,
    pub t_ratios: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    pub n_obs: usize,
    pub n_params: usize,
}

impl OlsEstimate {
    pub fn sigma2(&self) -> f64 {
        self.ssr / (self.n_obs - self.n_params) as f64
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.n_params)
            .map(|i| self.covariance[i][i].max(0.0).sqrt())
            .collect()
    }
}

/// `coef / sqrt(var)` that never produces NaN or infinity.
pub fn t_ratio(coef: f64, var: f64) -> f64 {
    let se = var.max(0.0).sqrt();
    if se > 0.0 && se.is_finite() {
        let t = coef / se;
        if t.is_finite() {
            return t;
        }
    }
    if coef == 0.0 {
        0.0
    } else {
        f64::MAX.copysign(coef)
    }
}

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Least-squares solve of `design · b ≈ target` through an SVD of the
/// column-equilibrated design. Returns the coefficients and the unscaled
/// `(XᵀX)⁻¹`.
pub(crate) fn lstsq(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = design.ncols();
    let norms: Vec<f64> = (0..k).map(|j| design.column(j).norm()).collect();
    if let Some(j) = norms.iter().position(|&n| n == 0.0 || !n.is_finite()) {
        return Err(Error::SingularDesign(format!("column {j} is zero or non-finite")));
    }
    let mut scaled = design.clone();
    for (j, n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }
    let svd = scaled.svd(true, true);
    let s = &svd.singular_values;
    let smax = s.max();
    let smin = s.min();
    if smin <= 0.0 || smax / smin > MAX_CONDITION {
        return Err(Error::SingularDesign(format!(
            "condition number {:.3e} exceeds {MAX_CONDITION:e}",
            if smin > 0.0 { smax / smin } else { f64::INFINITY }
        )));
    }
    let u = svd.u.as_ref().expect("u computed");
    let v_t = svd.v_t.as_ref().expect("v_t computed");
    let uty = u.transpose() * target;
    let mut z = DVector::zeros(k);
    for i in 0..k {
        z[i] = uty[i] / s[i];
    }
    let scaled_coef = v_t.transpose() * z;
    let coef = DVector::from_fn(k, |j, _| scaled_coef[j] / norms[j]);
    // (XᵀX)⁻¹ = D⁻¹ V Σ⁻² Vᵀ D⁻¹
    let mut vs = v_t.transpose();
    for i in 0..k {
        vs.column_mut(i).scale_mut(1.0 / s[i]);
    }
    let mut inv = &vs * vs.transpose();
    for i in 0..k {
        for j in 0..k {
            inv[(i, j)] /= norms[i] * norms[j];
        }
    }
    Ok((coef, inv))
}

/// Ordinary least squares of `target` on the columns of `design`.
pub fn ols_fit(design: &DMatrix<f64>, target: &[f64]) -> Result<OlsEstimate> {
    let (n, k) = design.shape();
    if target.len() != n {
        return Err(Error::Config(format!(
            "target has {} rows, design has {n}",
            target.len()
        )));
    }
    if n <= k {
        return Err(Error::DegreesOfFreedom {
            observations: n,
            parameters: k,
        });
    }
    let y = DVector::from_column_slice(target);
    let (coef, xtx_inv) = lstsq(design, &y)?;
    let fitted = design * &coef;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let s2 = ssr / (n - k) as f64;
    let cov = xtx_inv * s2;
    let cov = (&cov + cov.transpose()) * 0.5;
    let t_ratios = (0..k).map(|i| t_ratio(coef[i], cov[(i, i)])).collect();
    Ok(OlsEstimate {
        coefficients: coef.iter().copied().collect(),
        covariance: to_rows(&cov),
        t_ratios,
        residuals,
        ssr,
        n_obs: n,
        n_params: k,
    })
}

/// Builds a design matrix from column slices.
pub fn design_from_columns(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_fit() {
        let x = design_from_columns(&[&[1.0, 2.0, 3.0]]);
        let fit = ols_fit(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-14);
        assert!(fit.ssr < 1e-28);
        assert!(fit.t_ratios[0].is_finite());
    }

    #[test]
    fn slope_and_intercept_by_hand() {
        // normal equations: slope = Sxy/Sxx = 3/5, intercept = 2 - 0.6*2.5
        let x = design_from_columns(&[&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]]);
        let fit = ols_fit(&x, &[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert!((fit.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((fit.coefficients[1] - 0.6).abs() < 1e-12);
        assert!((fit.ssr - 0.2).abs() < 1e-12);
        // s² = 0.1, (XᵀX)⁻¹[1][1] = 1/Sxx = 0.2
        assert!((fit.covariance[1][1] - 0.02).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_are_singular() {
        let c = [1.0, 2.0, 3.0, 5.0];
        let x = design_from_columns(&[&c, &c]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::SingularDesign(_))
        ));
    }

    #[test]
    fn too_few_rows() {
        let x = design_from_columns(&[&[1.0, 2.0], &[3.0, 1.0]]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0]),
            Err(Error::DegreesOfFreedom { .. })
        ));
    }

    proptest! {
        #[test]
        fn residuals_are_orthogonal(
            rows in prop::collection::vec((-10.0f64..10.0, -1e4f64..1e4, -5.0f64..5.0), 8..40)
        ) {
            let ones = vec![1.0; rows.len()];
            let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.0 * 2.0 - r.1 * 1e-3 + r.2).collect();
            let x = design_from_columns(&[&ones, &a, &b]);
            if let Ok(fit) = ols_fit(&x, &y) {
                let e = DVector::from_vec(fit.residuals.clone());
                let xte = x.transpose() * &e;
                let scale = x.norm() * e.norm().max(1.0);
                prop_assert!(xte.amax() <= 1e-8 * scale);
                let ssr: f64 = fit.residuals.iter().map(|v| v * v).sum();
                prop_assert!((ssr - fit.ssr).abs() <= 1e-10 * ssr.max(1e-300));
                for i in 0..3 {
                    for j in 0..3 {
                        prop_assert!((fit.covariance[i][j] - fit.covariance[j][i]).abs() <= 1e-12 * fit.covariance[i][i].abs().max(fit.covariance[j][j].abs()));
                    }
                    prop_assert!(fit.covariance[i][i] >= 0.0);
                }
            }
        }
    }
}
