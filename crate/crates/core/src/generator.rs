//! Candidate enumeration, search orchestration and information-criterion ranking.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cointegration::{
    check_short_run, check_with_screen, eg_step1, CandidateOutcome, DiscardReason, EgScreenResult,
    Thresholds,
};
use crate::error::{Error, Result};
use crate::model::{CandidateSpec, Deterministic, ModelForm};
use crate::regress::{FittedModel, NlsOptions};
use crate::series::AlignedDataset;

/// Column name of a merged predictor group, e.g. `x2+x3`.
pub fn merged_name(group: &[String]) -> String {
    group.join("+")
}

/// Replaces every merge group in `predictors` by its merged name (at the position of
/// its first member). Returns the new list and the merged names.
pub fn apply_merge_groups(predictors: &[String], merge_groups: &[Vec<String>]) -> Result<(Vec<String>, Vec<String>)> {
    let mut seen = HashSet::new();
    for group in merge_groups {
        if group.len() < 2 {
            return Err(Error::Config(format!("merge group {group:?} needs at least two members")));
        }
        for m in group {
            if !predictors.contains(m) {
                return Err(Error::Config(format!("merge group member `{m}` is not a predictor")));
            }
            if !seen.insert(m.as_str()) {
                return Err(Error::Config(format!("`{m}` appears in more than one merge group")));
            }
        }
    }
    let mut out = Vec::new();
    let mut merged = Vec::new();
    let first_member = |g: &Vec<String>| g.iter().filter_map(|m| predictors.iter().position(|q| q == m)).min();
    for (i, p) in predictors.iter().enumerate() {
        match merge_groups.iter().find(|g| g.contains(p)) {
            None => out.push(p.clone()),
            Some(g) if first_member(g) == Some(i) => {
                let name = merged_name(g);
                out.push(name.clone());
                merged.push(name);
            }
            Some(_) => {}
        }
    }
    Ok((out, merged))
}

/// All candidate specs of a search, in deterministic order: lexicographic by the
/// predictor-index list of the subset, then deterministic case, then the φ flag.
///
/// With merge groups, members are replaced by their sum and only specs containing
/// every merged predictor are returned.
pub fn enumerate_candidates(predictors: &[String], mode: ModelForm, merge_groups: &[Vec<String>]) -> Result<Vec<CandidateSpec>> {
    if predictors.is_empty() {
        return Err(Error::Config("predictor list is empty".into()));
    }
    let unique: HashSet<&String> = predictors.iter().collect();
    if unique.len() != predictors.len() {
        return Err(Error::Config(format!("duplicate predictors in {predictors:?}")));
    }
    let (preds, merged) = apply_merge_groups(predictors, merge_groups)?;
    let k = preds.len();
    if k > 20 {
        return Err(Error::Unsupported(format!("{k} predictors give too many subsets")));
    }
    let required: Vec<usize> = merged
        .iter()
        .map(|m| preds.iter().position(|p| p == m).expect("merged name present"))
        .collect();

    let mut subsets: Vec<Vec<usize>> = (0u32..(1 << k))
        .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s| required.iter().all(|r| s.contains(r)))
        .collect();
    subsets.sort();

    let mut specs = Vec::new();
    for s in subsets {
        let names: Vec<String> = s.iter().map(|&i| preds[i].clone()).collect();
        match mode {
            ModelForm::Levels => {
                if names.is_empty() {
                    continue;
                }
                for det in Deterministic::ALL {
                    for phi in [false, true] {
                        specs.push(CandidateSpec::levels(names.clone(), det, phi)?);
                    }
                }
            }
            ModelForm::Differences => {
                for det in [Deterministic::None, Deterministic::Constant] {
                    if names.is_empty() && det == Deterministic::None {
                        continue;
                    }
                    specs.push(CandidateSpec::differences(names.clone(), det)?);
                }
            }
        }
    }
    Ok(specs)
}

/// AIC and BIC of a fit: `ln SSR + 2N/n` and `ln SSR + N ln n / n`.
pub fn score(ssr: f64, n_params: usize, n_obs: usize) -> Result<(f64, f64)> {
    if n_obs == 0 {
        return Err(Error::InsufficientData("scoring needs at least one observation".into()));
    }
    if !(ssr > 0.0) || !ssr.is_finite() {
        return Err(Error::Degenerate(format!("SSR {ssr} leaves the criteria undefined")));
    }
    let n = n_obs as f64;
    let k = n_params as f64;
    Ok((ssr.ln() + 2.0 * k / n, ssr.ln() + k * n.ln() / n))
}

/// `exp(-(s_i - min)/2)` for every score.
pub fn evidence_ratios(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::Config("no scores given".into()));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite score {s}")));
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(scores.iter().map(|s| (-(s - min) / 2.0).exp()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationScores {
    pub aic: f64,
    pub bic: f64,
    pub er_aic: f64,
    pub er_bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    /// 1-based position in the BIC ordering.
    pub bic_rank: usize,
    pub aic_rank: usize,
    pub spec: CandidateSpec,
    pub estimate: FittedModel,
    pub scores: InformationScores,
    pub bg_lm_pvalue: f64,
    pub eg_statistic: Option<f64>,
    pub eg_critical_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscardEntry {
    pub spec_id: String,
    pub reason: DiscardReason,
    pub detail: String,
}

/// Configuration of one search run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub target: String,
    pub predictors: Vec<String>,
    #[serde(default = "default_mode")]
    pub mode: ModelForm,
    #[serde(default)]
    pub merge_groups: Vec<Vec<String>>,
    #[serde(default, flatten)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub nls: NlsOptions,
    #[serde(default = "all_cases")]
    pub deterministic_options: Vec<Deterministic>,
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> ModelForm {
    ModelForm::Levels
}

fn all_cases() -> Vec<Deterministic> {
    Deterministic::ALL.to_vec()
}

impl SearchConfig {
    pub fn new(target: impl Into<String>, predictors: Vec<String>, mode: ModelForm) -> Self {
        Self {
            target: target.into(),
            predictors,
            mode,
            merge_groups: Vec::new(),
            thresholds: Thresholds::default(),
            nls: NlsOptions::default(),
            deterministic_options: all_cases(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.predictors.is_empty() {
            return Err(Error::Config("no predictors configured".into()));
        }
        if self.predictors.contains(&self.target) {
            return Err(Error::Config(format!("target `{}` is also listed as a predictor", self.target)));
        }
        if self.deterministic_options.is_empty() {
            return Err(Error::Config("no deterministic cases allowed".into()));
        }
        self.thresholds.validate()?;
        self.nls.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub target: String,
    pub mode: ModelForm,
    pub first_year: i32,
    pub last_year: i32,
    pub n_candidates: usize,
    /// Residual count shared by every scored model.
    pub n_obs: usize,
    pub ranked: Vec<RankedModel>,
    pub discarded: Vec<DiscardEntry>,
}

impl SearchReport {
    pub fn best(&self) -> Option<&RankedModel> {
        self.ranked.first()
    }

    pub fn find(&self, spec_id: &str) -> Option<&RankedModel> {
        self.ranked.iter().find(|m| m.spec.id == spec_id)
    }
}

/// Adds a summed column for every merge group that the dataset lacks.
pub fn add_merged_columns(data: &mut AlignedDataset, merge_groups: &[Vec<String>]) -> Result<()> {
    for g in merge_groups {
        let name = merged_name(g);
        if data.column(&name).is_some() {
            continue;
        }
        let mut sum = vec![0.0; data.len()];
        for m in g {
            for (s, v) in sum.iter_mut().zip(data.require(m)?) {
                *s += v;
            }
        }
        data.push_column(name, sum)?;
    }
    Ok(())
}

/// Checks every spec. Levels twins share one Engle-Granger screen. Candidates run
/// in parallel; the output order follows `specs`.
pub fn evaluate_candidates(specs: &[CandidateSpec], data: &AlignedDataset, thresholds: &Thresholds, nls: &NlsOptions) -> Vec<CandidateOutcome> {
    let mut keys: Vec<(Vec<String>, Deterministic)> = specs
        .iter()
        .filter(|s| s.form == ModelForm::Levels)
        .map(|s| (s.subset.clone(), s.deterministic))
        .collect();
    keys.sort();
    keys.dedup();
    let screens: BTreeMap<(Vec<String>, Deterministic), Result<EgScreenResult>> = keys
        .into_par_iter()
        .map(|key| {
            let spec = CandidateSpec::levels(key.0.clone(), key.1, false);
            let screen = spec.and_then(|s| eg_step1(&s, data, thresholds));
            (key, screen)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    specs
        .par_iter()
        .map(|spec| match spec.form {
            ModelForm::Levels => {
                let screen = &screens[&(spec.subset.clone(), spec.deterministic)];
                check_with_screen(spec, data, screen, thresholds, nls)
            }
            ModelForm::Differences => check_short_run(spec, data, thresholds),
        })
        .collect()
}

fn order(a: &(f64, usize, &str), b: &(f64, usize, &str)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2))
}

/// Scores survivors, computes evidence ratios within the cohort and sorts by BIC
/// (ties: fewer parameters, then spec id). Discards keep the input order.
pub fn rank_outcomes(outcomes: Vec<CandidateOutcome>) -> (Vec<RankedModel>, Vec<DiscardEntry>) {
    let mut discarded = Vec::new();
    let mut scored = Vec::new();
    for outcome in outcomes {
        match outcome {
            CandidateOutcome::Discarded { spec, reason, detail } => discarded.push(DiscardEntry {
                spec_id: spec.id,
                reason,
                detail,
            }),
            CandidateOutcome::Survivor(s) => {
                let est = &s.estimate;
                match score(est.ssr(), est.n_params(), est.n_obs()) {
                    Ok((aic, bic)) => scored.push((s, aic, bic)),
                    Err(e) => discarded.push(DiscardEntry {
                        spec_id: s.spec.id.clone(),
                        reason: DiscardReason::Error,
                        detail: e.to_string(),
                    }),
                }
            }
        }
    }
    if scored.is_empty() {
        return (Vec::new(), discarded);
    }
    let aics: Vec<f64> = scored.iter().map(|s| s.1).collect();
    let bics: Vec<f64> = scored.iter().map(|s| s.2).collect();
    let er_aic = evidence_ratios(&aics).expect("finite scores");
    let er_bic = evidence_ratios(&bics).expect("finite scores");

    let key = |i: usize, s: f64| (s, scored[i].0.spec.n_params(), scored[i].0.spec.id.as_str());
    let mut by_aic: Vec<usize> = (0..scored.len()).collect();
    by_aic.sort_by(|&a, &b| order(&key(a, aics[a]), &key(b, aics[b])));
    let mut aic_rank = vec![0; scored.len()];
    for (r, &i) in by_aic.iter().enumerate() {
        aic_rank[i] = r + 1;
    }
    let mut by_bic: Vec<usize> = (0..scored.len()).collect();
    by_bic.sort_by(|&a, &b| order(&key(a, bics[a]), &key(b, bics[b])));
    let mut bic_rank = vec![0; scored.len()];
    for (r, &i) in by_bic.iter().enumerate() {
        bic_rank[i] = r + 1;
    }

    let mut ranked: Vec<Option<RankedModel>> = vec![None; scored.len()];
    for (i, (s, aic, bic)) in scored.into_iter().enumerate() {
        let s = *s;
        ranked[bic_rank[i] - 1] = Some(RankedModel {
            bic_rank: bic_rank[i],
            aic_rank: aic_rank[i],
            scores: InformationScores {
                aic,
                bic,
                er_aic: er_aic[i],
                er_bic: er_bic[i],
            },
            bg_lm_pvalue: s.bg.p_value,
            eg_statistic: s.eg_statistic,
            eg_critical_value: s.eg_critical_value,
            spec: s.spec,
            estimate: s.estimate,
        });
    }
    (ranked.into_iter().map(|m| m.expect("every rank filled")).collect(), discarded)
}

/// Enumerates, checks and ranks every candidate of `config` on `data`.
pub fn run_search(data: &AlignedDataset, config: &SearchConfig) -> Result<SearchReport> {
    config.validate()?;
    let mut data = data.clone().with_target(&config.target)?;
    for p in &config.predictors {
        data.require(p)?;
    }
    add_merged_columns(&mut data, &config.merge_groups)?;
    if data.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} observations are too few for a search",
            data.len()
        )));
    }
    let specs: Vec<CandidateSpec> = enumerate_candidates(&config.predictors, config.mode, &config.merge_groups)?
        .into_iter()
        .filter(|s| config.deterministic_options.contains(&s.deterministic))
        .collect();
    let outcomes = evaluate_candidates(&specs, &data, &config.thresholds, &config.nls);
    let (ranked, discarded) = rank_outcomes(outcomes);
    Ok(SearchReport {
        target: config.target.clone(),
        mode: config.mode,
        first_year: data.first_year(),
        last_year: data.last_year(),
        n_candidates: specs.len(),
        n_obs: data.len() - 1,
        ranked,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn counts_for_one_to_six_predictors() {
        for k in 1..=6 {
            let p = names(k);
            assert_eq!(enumerate_candidates(&p, ModelForm::Levels, &[]).unwrap().len(), 6 * ((1 << k) - 1));
            assert_eq!(enumerate_candidates(&p, ModelForm::Differences, &[]).unwrap().len(), (1 << (k + 1)) - 1);
        }
    }

    #[test]
    fn merged_counts() {
        let g = vec![vec!["x2".to_string(), "x3".to_string()]];
        let lv = enumerate_candidates(&names(5), ModelForm::Levels, &g).unwrap();
        assert_eq!(lv.len(), 48);
        assert!(lv.iter().all(|s| s.subset.contains(&"x2+x3".to_string())));
        assert_eq!(enumerate_candidates(&names(5), ModelForm::Differences, &g).unwrap().len(), 16);
        let bad = vec![vec!["x2".to_string(), "x9".to_string()]];
        assert!(enumerate_candidates(&names(5), ModelForm::Levels, &bad).is_err());
        let overlap = vec![vec!["x1".into(), "x2".into()], vec!["x2".into(), "x3".into()]];
        assert!(enumerate_candidates(&names(5), ModelForm::Levels, &overlap).is_err());
    }

    #[test]
    fn order_is_lexicographic() {
        let specs = enumerate_candidates(&names(2), ModelForm::Levels, &[]).unwrap();
        let ids: Vec<&str> = specs.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(&ids[..3], &["L|0|x1|nophi", "L|0|x1|phi", "L|C|x1|nophi"]);
        assert_eq!(ids[6], "L|0|x1,x2|nophi");
        assert_eq!(ids[12], "L|0|x2|nophi");
        assert!(enumerate_candidates(&[], ModelForm::Levels, &[]).is_err());
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(1.0, 0, 10).unwrap(), (0.0, 0.0));
        let (a, b) = score(2.5, 3, 25).unwrap();
        assert!((a - 1.1563).abs() < 1e-4 && (b - 1.3026).abs() < 1e-4);
        assert!(score(0.0, 1, 10).is_err());
        let (a, b) = score(0.3, 1, 8).unwrap();
        assert!(b > a);
    }

    #[test]
    fn er_examples() {
        assert_eq!(evidence_ratios(&[5.0, 5.0]).unwrap(), vec![1.0, 1.0]);
        let e = evidence_ratios(&[3.0, 5.0]).unwrap();
        assert!((e[1] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(evidence_ratios(&[7.0]).unwrap(), vec![1.0]);
        assert!(evidence_ratios(&[]).is_err());
    }

    proptest! {
        #[test]
        fn bic_minus_aic(ssr in 1e-6f64..1e6, n_params in 1usize..12, n_obs in 8usize..500) {
            let (a, b) = score(ssr, n_params, n_obs).unwrap();
            let n = n_obs as f64;
            prop_assert!((b - a - n_params as f64 * (n.ln() - 2.0) / n).abs() < 1e-10);
            prop_assert!(b > a);
        }

        #[test]
        fn er_in_unit_interval(scores in proptest::collection::vec(-50.0f64..50.0, 1..30)) {
            let er = evidence_ratios(&scores).unwrap();
            prop_assert!(er.iter().all(|e| *e > 0.0 && *e <= 1.0));
            prop_assert!(er.contains(&1.0));
        }
    }
}
