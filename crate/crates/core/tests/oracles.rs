//! Cross-checks against reference values computed with numpy, scipy and
//! statsmodels (tests/fixtures/make_oracles.py) on fixed fixture series.

use cointsearch::cointegration::{bg_lm_test, eg_step1, Thresholds};
use cointsearch::io::load_dataset;
use cointsearch::johansen::{johansen_test, JohansenCase, JohansenOptions};
use cointsearch::model::{CandidateSpec, Deterministic};
use cointsearch::regress::{design_from_columns, levels_ols, nls_ec_fit, short_run_fit, NlsOptions};
use cointsearch::unit_root::{adf_test, kpss_test, LagCriterion};
use cointsearch::AlignedDataset;
use serde_json::Value;

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn oracles() -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture("oracles.json")).unwrap()).unwrap()
}

fn panel() -> AlignedDataset {
    load_dataset(fixture("panel.csv")).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{what}: {a} vs {b}");
}

fn spec(id: &str) -> CandidateSpec {
    CandidateSpec::parse_id(id).unwrap()
}

#[test]
fn levels_ols_matches_lstsq() {
    let o = &oracles()["ols_levels"];
    let fit = levels_ols(&spec("L|C|x3,x5|nophi"), &panel()).unwrap();
    for (a, b) in fit.coefficients.iter().zip(floats(&o["params"])) {
        close(*a, b, 1e-10, "coefficient");
    }
    close(fit.ssr, o["ssr"].as_f64().unwrap(), 1e-10, "ssr");
}

#[test]
fn breusch_godfrey_matches_statsmodels() {
    let o = &oracles()["bg_raw"];
    let data = panel();
    let s = spec("L|C|x3,x5|nophi");
    let fit = levels_ols(&s, &data).unwrap();
    let ones = vec![1.0; data.len()];
    let design = design_from_columns(&[data.require("x3").unwrap(), data.require("x5").unwrap(), &ones]);
    let bg = bg_lm_test(&fit.residuals, &design, 2).unwrap();
    close(bg.lm_statistic, o["lm"].as_f64().unwrap(), 1e-9, "LM");
    close(bg.p_value, o["p"].as_f64().unwrap(), 1e-9, "p");
}

#[test]
fn adf_matches_statsmodels() {
    let data = panel();
    let ar = load_dataset(fixture("ar_series.csv")).unwrap();
    for row in oracles()["adf"].as_array().unwrap() {
        let name = row["series"].as_str().unwrap();
        let case = Deterministic::parse(row["case"].as_str().unwrap()).unwrap();
        let s = if name == "z" { ar.series("z") } else { data.series(name) }.unwrap();
        let max_lag = if name == "z" { 6 } else { 4 };
        let fixed = adf_test(&s, case, Some(0), LagCriterion::Bic).unwrap();
        close(fixed.statistic, row["stat_lag0"].as_f64().unwrap(), 1e-9, "DF statistic");
        let bic = adf_test(&s, case, Some(max_lag), LagCriterion::Bic).unwrap();
        assert_eq!(bic.lags_used as u64, row["lag_bic"].as_u64().unwrap(), "{name} {case:?}");
        close(bic.statistic, row["stat_bic"].as_f64().unwrap(), 1e-9, "ADF statistic");
        // statsmodels reports asymptotic p-values; ours use the finite-sample surface
        close(bic.p_value, row["p_bic"].as_f64().unwrap(), 0.05, "ADF p-value");
    }
}

#[test]
fn kpss_matches_statsmodels() {
    let data = panel();
    for row in oracles()["kpss"].as_array().unwrap() {
        let case = Deterministic::parse(row["case"].as_str().unwrap()).unwrap();
        let r = kpss_test(&data.series(row["series"].as_str().unwrap()).unwrap(), case).unwrap();
        assert_eq!(r.bandwidth as u64, row["bandwidth"].as_u64().unwrap());
        close(r.statistic, row["stat"].as_f64().unwrap(), 1e-9, "KPSS");
    }
}

#[test]
fn engle_granger_statistic_matches_statsmodels() {
    let eg = eg_step1(&spec("L|C|x3,x5|phi"), &panel(), &Thresholds::default()).unwrap();
    close(eg.statistic, oracles()["eg"]["stat"].as_f64().unwrap(), 1e-9, "EG");
    assert!(eg.cointegrated);
}

#[test]
fn ec_nls_matches_scipy_least_squares() {
    let data = panel();
    for row in oracles()["ec"].as_array().unwrap() {
        let s = spec(row["id"].as_str().unwrap());
        let fit = nls_ec_fit(&s, &data, &NlsOptions { tol: 1e-12, ..NlsOptions::default() }).unwrap();
        assert!(fit.converged);
        close(fit.ssr, row["ssr"].as_f64().unwrap(), 1e-9, "ssr");
        for (a, b) in fit.params.iter().zip(floats(&row["params"])) {
            close(*a, b, 1e-5, &s.id);
        }
        if let Some(se) = row["se"].as_array() {
            for (i, b) in se.iter().enumerate() {
                close(fit.covariance[i][i].sqrt(), b.as_f64().unwrap(), 1e-4, "standard error");
            }
        }
    }
}

#[test]
fn short_run_ols_matches_lstsq() {
    let o = &oracles()["short_run"];
    let fit = short_run_fit(&spec("D|C|x3,x5|nophi"), &panel()).unwrap();
    for (a, b) in fit.ols.coefficients.iter().zip(floats(&o["params"])) {
        close(*a, b, 1e-10, "coefficient");
    }
    close(fit.ols.ssr, o["ssr"].as_f64().unwrap(), 1e-10, "ssr");
}

#[test]
fn johansen_matches_generalised_eigenproblem() {
    let data = panel();
    let cols = ["y", "x3", "x5"].iter().map(|v| (v.to_string(), data.require(v).unwrap().to_vec())).collect();
    let z = AlignedDataset::from_columns(data.first_year(), cols).unwrap();
    for (code, case) in [("a", JohansenCase::RestrictedConstant), ("b", JohansenCase::RestrictedTrendWithDrift)] {
        let o = &oracles()["johansen"][code];
        let v = johansen_test(&z, &JohansenOptions { case, lags: 0, level: 0.05 }).unwrap();
        for (a, b) in v.eigenvalues.iter().zip(floats(&o["eigenvalues"])) {
            close(*a, b, 1e-9, "eigenvalue");
        }
        for (a, b) in v.trace_stats.iter().zip(floats(&o["trace"])) {
            close(*a, b, 1e-8, "trace");
        }
    }
}
