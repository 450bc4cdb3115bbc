//! Monte Carlo checks of test size, power and end-to-end behaviour on seeded
//! synthetic data.

use cointsearch::cointegration::{bg_lm_test, check_candidate, eg_step1, CandidateOutcome, DiscardReason, Thresholds};
use cointsearch::forecast::{fit_spec, mc_forecast, ForecastConfig};
use cointsearch::generator::{run_search, SearchConfig};
use cointsearch::johansen::{ec_consistency, johansen_test, JohansenOptions};
use cointsearch::model::{CandidateSpec, Deterministic, ModelForm};
use cointsearch::regress::{FittedModel, NlsOptions};
use cointsearch::sim;
use cointsearch::unit_root::{adf_test, kpss_critical_value, kpss_test, LagCriterion};
use cointsearch::{AlignedDataset, TimeSeries};
use nalgebra::DMatrix;
use rayon::prelude::*;

fn share(reps: u64, f: impl Fn(u64) -> bool + Sync) -> f64 {
    (0..reps).into_par_iter().filter(|&i| f(i)).count() as f64 / reps as f64
}

fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::new("s", 1, values).unwrap()
}

fn dataset(cols: Vec<(&str, Vec<f64>)>) -> AlignedDataset {
    AlignedDataset::from_columns(1901, cols.into_iter().map(|(n, v)| (n.to_string(), v)).collect()).unwrap()
}

fn adf_p(values: Vec<f64>, case: Deterministic) -> f64 {
    adf_test(&series(values), case, None, LagCriterion::Bic).unwrap().p_value
}

#[test]
fn adf_rejects_white_noise() {
    let power = share(500, |i| adf_p(sim::white_noise(&mut sim::stream(101, i), 200, 1.0), Deterministic::Constant) < 0.05);
    assert!(power >= 0.9, "power {power}");
}

#[test]
fn adf_size_on_random_walks() {
    let size = share(5000, |i| adf_p(sim::random_walk(&mut sim::stream(102, i), 200, 1.0), Deterministic::Constant) < 0.05);
    assert!((0.035..=0.065).contains(&size), "size {size}");
}

#[test]
fn kpss_size_and_power() {
    let cv = kpss_critical_value(Deterministic::Constant, 0.05).unwrap();
    let stat = |v: Vec<f64>, case| kpss_test(&series(v), case).unwrap().statistic;
    let accept = share(2000, |i| stat(sim::white_noise(&mut sim::stream(103, i), 500, 1.0), Deterministic::Constant) < cv);
    assert!((0.93..=0.97).contains(&accept), "acceptance {accept}");
    let power = share(500, |i| stat(sim::random_walk(&mut sim::stream(104, i), 500, 1.0), Deterministic::Constant) > cv);
    assert!(power >= 0.85, "power {power}");
    let cv_ct = kpss_critical_value(Deterministic::ConstantTrend, 0.05).unwrap();
    let trend_size = share(2000, |i| {
        let noise = sim::white_noise(&mut sim::stream(105, i), 300, 1.0);
        let v = noise.iter().enumerate().map(|(t, e)| 3.0 + 0.05 * t as f64 + e).collect();
        stat(v, Deterministic::ConstantTrend) > cv_ct
    });
    assert!((0.035..=0.065).contains(&trend_size), "size {trend_size}");
}

#[test]
fn engle_granger_size_and_power() {
    let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::Constant, false).unwrap();
    let t = Thresholds::default();
    let accepted = share(2000, |i| {
        let mut rng = sim::stream(106, i);
        let y = sim::random_walk(&mut rng, 200, 1.0);
        let x = sim::random_walk(&mut rng, 200, 1.0);
        !eg_step1(&spec, &dataset(vec![("y", y), ("x", x)]), &t).unwrap().cointegrated
    });
    assert!((0.93..=0.97).contains(&accepted), "non-rejection {accepted}");
    let power = share(500, |i| {
        let mut rng = sim::stream(107, i);
        let x = sim::random_walk(&mut rng, 200, 1.0);
        let u = sim::ar1(&mut rng, 200, 0.5, 0.3);
        let y = x.iter().zip(&u).map(|(a, b)| 2.0 * a + b).collect();
        eg_step1(&spec, &dataset(vec![("y", y), ("x", x)]), &t).unwrap().cointegrated
    });
    assert!(power >= 0.9, "power {power}");
}

#[test]
fn breusch_godfrey_null_and_power() {
    let design = |n: usize| DMatrix::from_element(n, 1, 1.0);
    let center = |mut e: Vec<f64>| {
        let m = e.iter().sum::<f64>() / e.len() as f64;
        e.iter_mut().for_each(|v| *v -= m);
        e
    };
    let pass = share(2000, |i| {
        let e = center(sim::white_noise(&mut sim::stream(108, i), 100, 1.0));
        bg_lm_test(&e, &design(100), 2).unwrap().p_value > 0.20
    });
    assert!((0.77..=0.83).contains(&pass), "share above 0.20: {pass}");
    let power = share(500, |i| {
        let e = center(sim::ar1(&mut sim::stream(109, i), 100, 0.9, 1.0));
        bg_lm_test(&e, &design(100), 2).unwrap().p_value < 0.01
    });
    assert!(power >= 0.99, "power {power}");
}

#[test]
fn candidate_check_end_to_end() {
    let t = Thresholds::default();
    let nls = NlsOptions::default();
    let phi = CandidateSpec::levels(vec!["x".into()], Deterministic::Constant, true).unwrap();
    let restricted = phi.restricted_twin();

    let survives = share(300, |i| {
        let mut rng = sim::stream(110, i);
        let x = sim::random_walk(&mut rng, 200, 1.0);
        let e = sim::white_noise(&mut rng, 200, 0.3);
        let y = x.iter().zip(&e).map(|(a, b)| 1.0 + 2.0 * a + b).collect();
        matches!(check_candidate(&phi, &dataset(vec![("y", y), ("x", x)]), &t, &nls), CandidateOutcome::Survivor(_))
    });
    assert!(survives >= 0.7, "survivors {survives}");

    let eg_discards = share(1000, |i| {
        let mut rng = sim::stream(111, i);
        let y = sim::random_walk(&mut rng, 200, 1.0);
        let x = sim::random_walk(&mut rng, 200, 1.0);
        matches!(
            check_candidate(&phi, &dataset(vec![("y", y), ("x", x)]), &t, &nls),
            CandidateOutcome::Discarded { reason: DiscardReason::Eg, .. }
        )
    });
    assert!((0.93..=0.97).contains(&eg_discards), "EG discards {eg_discards}");

    let bg_rate = |ar2: bool, seed: u64| {
        share(500, |i| {
            let mut rng = sim::stream(seed, i);
            let x = sim::random_walk(&mut rng, 200, 1.0);
            let e = if ar2 { sim::ar2(&mut rng, 200, 0.3, 0.4, 0.3) } else { sim::white_noise(&mut rng, 200, 0.3) };
            let y = x.iter().zip(&e).map(|(a, b)| 1.0 + 2.0 * a + b).collect();
            matches!(
                check_candidate(&restricted, &dataset(vec![("y", y), ("x", x)]), &t, &nls),
                CandidateOutcome::Discarded { reason: DiscardReason::Bglm, .. }
            )
        })
    };
    let (white, ar2) = (bg_rate(false, 112), bg_rate(true, 113));
    assert!(ar2 > white + 0.3, "BG discards: white {white}, AR(2) {ar2}");
}

fn null_panel(seed: u64, n: usize) -> AlignedDataset {
    let mut rng = sim::stream(seed, 0);
    let cols = ["y", "x1", "x2", "x3", "x4", "x5"].map(|c| (c, sim::random_walk(&mut rng, n, 1.0))).to_vec();
    dataset(cols)
}

#[test]
fn null_search_survivors_are_rare() {
    let predictors: Vec<String> = (1..=5).map(|i| format!("x{i}")).collect();
    let levels = SearchConfig::new("y", predictors.clone(), ModelForm::Levels);
    let differences = SearchConfig::new("y", predictors, ModelForm::Differences);
    let mut passed_eg = 0;
    let mut screened = 0;
    for seed in 0..20 {
        let data = null_panel(120 + seed, 150);
        let report = run_search(&data, &levels).unwrap();
        screened += report.n_candidates;
        passed_eg += report.n_candidates - report.discarded.iter().filter(|d| d.reason == DiscardReason::Eg).count();

        let diff = run_search(&data, &differences).unwrap();
        assert!(diff.ranked.iter().all(|m| m.bg_lm_pvalue > 0.20));
        assert_eq!(diff.ranked.len() + diff.discarded.len(), 63);
    }
    let rate = passed_eg as f64 / screened as f64;
    assert!(rate < 0.10, "EG pass rate {rate}");
}

fn bivariate(seed: u64, n: usize, cointegrated: bool) -> AlignedDataset {
    let mut rng = sim::stream(seed, 0);
    let x = sim::random_walk(&mut rng, n, 1.0);
    let y = if cointegrated {
        let u = sim::ar1(&mut rng, n, 0.5, 0.5);
        x.iter().zip(&u).map(|(a, b)| 1.0 + 2.0 * a + b).collect()
    } else {
        sim::random_walk(&mut rng, n, 1.0)
    };
    dataset(vec![("y", y), ("x", x)])
}

#[test]
fn johansen_rank_size_and_power() {
    let opts = JohansenOptions::default();
    let zero = share(2000, |i| johansen_test(&bivariate(130_000 + i, 400, false), &opts).unwrap().selected_rank == 0);
    assert!((0.93..=0.97).contains(&zero), "rank 0 share {zero}");
    let one = share(500, |i| johansen_test(&bivariate(140_000 + i, 400, true), &opts).unwrap().selected_rank == 1);
    assert!(one >= 0.8, "rank 1 share {one}");
}

#[test]
fn ec_relation_lies_in_the_cointegration_space() {
    let spec = CandidateSpec::levels(vec!["x".into()], Deterministic::Constant, true).unwrap();
    let results: Vec<Option<bool>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let data = bivariate(150_000 + seed, 200, true);
            let vec = johansen_test(&data, &JohansenOptions::default()).unwrap();
            if vec.selected_rank == 0 {
                return None;
            }
            let FittedModel::ErrorCorrection(ec) = fit_spec(&spec, &data, &NlsOptions::default()).unwrap() else {
                unreachable!()
            };
            Some(ec_consistency(&vec, &ec, &spec).unwrap().within_bounds)
        })
        .collect();
    let checked: Vec<bool> = results.into_iter().flatten().collect();
    let within = checked.iter().filter(|b| **b).count() as f64 / checked.len() as f64;
    assert!(checked.len() >= 150 && within >= 0.8, "within bounds {within} of {}", checked.len());
}

#[test]
fn band_shapes() {
    let nls = NlsOptions::default();
    let mut rng = sim::stream(160, 0);
    let x = sim::random_walk(&mut rng, 140, 1.0);
    let u = sim::ar1(&mut rng, 140, 0.6, 0.5);
    let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| 1.0 + 2.0 * a + b).collect();
    let walk: Vec<f64> = sim::random_walk(&mut rng, 140, 1.0).iter().enumerate().map(|(t, v)| v + 0.2 * t as f64).collect();
    let data = dataset(vec![("y", y), ("x", x), ("w", walk)]);
    let train = data.window(1901, 2000).unwrap();
    let mut cfg = ForecastConfig::new(2001, 2040, 9);
    cfg.include_coefficient_uncertainty = false;

    let drift = CandidateSpec::differences(Vec::new(), Deterministic::Constant).unwrap();
    let w_data = data.clone().with_target("w").unwrap();
    let model = fit_spec(&drift, &w_data.window(1901, 2000).unwrap(), &nls).unwrap();
    let w = mc_forecast(&drift, &model, &w_data, &cfg).unwrap().widths();
    for (h, wh) in w.iter().enumerate() {
        let ratio = wh / (w[0] * ((h + 1) as f64).sqrt());
        assert!((ratio - 1.0).abs() <= 0.05, "h={} ratio {ratio}", h + 1);
    }

    let ec = CandidateSpec::levels(vec!["x".into()], Deterministic::Constant, true).unwrap();
    let model = fit_spec(&ec, &train, &nls).unwrap();
    let w = mc_forecast(&ec, &model, &data, &cfg).unwrap().widths();
    let late = &w[20..];
    let spread = late.iter().cloned().fold(f64::MIN, f64::max) / late.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1.1, "EC band does not settle: {w:?}");
    let sr = CandidateSpec::differences(vec!["x".into()], Deterministic::Constant).unwrap();
    let model = fit_spec(&sr, &train, &nls).unwrap();
    let ws = mc_forecast(&sr, &model, &data, &cfg).unwrap().widths();
    assert!(ws[39] > 2.5 * ws[4] && ws[39] > 2.0 * w[39]);
}
