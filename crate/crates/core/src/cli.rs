//! Command-line front end (`coint`): `unitroot`, `search`, `johansen`, `forecast`
//! and `compare`. Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cointegration::BgDesign;
use crate::error::{Error, ErrorClass, Result};
use crate::forecast::{fit_spec, forecast_compare, mc_forecast, BandKind, ComparisonReport, ForecastBands, ForecastConfig, Split};
use crate::generator::{add_merged_columns, run_search, SearchConfig, SearchReport};
use crate::io::{load_dataset, FileConfig};
use crate::johansen::{ec_consistency, johansen_test, ConsistencyResult, JohansenCase, JohansenOptions, VecResult};
use crate::model::{CandidateSpec, Deterministic, ModelForm};
use crate::regress::FittedModel;
use crate::series::AlignedDataset;
use crate::unit_root::{adf_test, kpss_test, KpssResult, LagCriterion, UnitRootResult};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "coint", version, about = "Exhaustive cointegration and short-run model search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ADF (0, C, CT) and KPSS (C, CT) tests for every series
    Unitroot(UnitrootArgs),
    /// Enumerate, screen, estimate and rank candidate models
    Search(SearchArgs),
    /// Johansen rank tests, optionally checked against EC models
    Johansen(JohansenArgs),
    /// Monte Carlo forecast of one model
    Forecast(ForecastArgs),
    /// Forecast comparison of several models over training splits
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// CSV file with a `year` column followed by numeric series
    #[arg(long)]
    data: PathBuf,
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct UnitrootArgs {
    #[command(flatten)]
    common: Common,
    /// Series to test (default: all)
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Largest ADF lag (default: Schwert rule)
    #[arg(long)]
    max_lag: Option<usize>,
    /// Also test first differences
    #[arg(long)]
    differences: bool,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    mode: Option<CliMode>,
    /// Merge group such as `x2+x3` (repeatable)
    #[arg(long = "merge")]
    merge: Vec<String>,
    #[arg(long)]
    eg_level: Option<f64>,
    #[arg(long)]
    bglm_level: Option<f64>,
    #[arg(long)]
    bglm_lags: Option<usize>,
    #[arg(long, value_enum)]
    bg_design: Option<CliBgDesign>,
    /// Augmentation lags of the residual DF regression
    #[arg(long)]
    eg_lags: Option<usize>,
    /// Allowed deterministic cases, e.g. `0,C,CT`
    #[arg(long, value_delimiter = ',')]
    deterministic: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Target series (default: first data column)
    #[arg(long)]
    target: Option<String>,
    /// Predictor series (default: all other columns)
    #[arg(long, value_delimiter = ',')]
    predictors: Vec<String>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CliMode {
    Levels,
    Differences,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CliBgDesign {
    Jacobian,
    Raw,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CliCase {
    A,
    B,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CliBand {
    Std,
    Quantile,
}

#[derive(Args, Debug)]
struct JohansenArgs {
    #[command(flatten)]
    common: Common,
    /// Variables of the VEC, target first (default: all columns)
    #[arg(long, value_delimiter = ',')]
    variables: Vec<String>,
    #[arg(long, value_enum)]
    case: Option<CliCase>,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long)]
    level: Option<f64>,
    /// EC model id to check against the cointegration space (repeatable)
    #[arg(long = "consistency")]
    consistency: Vec<String>,
}

#[derive(Args, Debug)]
struct ForecastOptions {
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ignore coefficient uncertainty
    #[arg(long)]
    no_coefficient_uncertainty: bool,
    #[arg(long, value_enum)]
    band: Option<CliBand>,
}

#[derive(Args, Debug)]
struct ForecastArgs {
    #[command(flatten)]
    common: Common,
    /// Model id, e.g. `L|C|x3,x5|phi`
    #[arg(long)]
    model: String,
    #[arg(long)]
    target: Option<String>,
    /// Last year of the estimation sample
    #[arg(long)]
    train_end: i32,
    /// Last forecast year
    #[arg(long)]
    horizon_end: i32,
    #[command(flatten)]
    options: ForecastOptions,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Model ids (repeatable, at least two)
    #[arg(long = "model", required = true)]
    models: Vec<String>,
    #[arg(long)]
    target: Option<String>,
    /// Split `TRAIN_END:HORIZON_END` (repeatable)
    #[arg(long = "split", required = true)]
    splits: Vec<String>,
    #[command(flatten)]
    options: ForecastOptions,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
    }
}

/// Runs the CLI with `argv` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Versioned JSON envelope of every report.
#[derive(Serialize)]
struct Envelope<'a, M: Serialize, R: Serialize> {
    schema_version: u32,
    tool: &'static str,
    tool_version: &'static str,
    command: &'a str,
    metadata: M,
    result: R,
}

fn to_json<M: Serialize, R: Serialize>(command: &str, metadata: M, result: R) -> Result<String> {
    let env = Envelope {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        metadata,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit(common: &Common, text: String) -> Result<()> {
    match &common.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(common: &Common) -> Result<(AlignedDataset, FileConfig)> {
    let cfg = match &common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    Ok((load_dataset(&common.data)?, cfg))
}

fn no_csv(common: &Common, command: &str) -> Result<()> {
    if common.format == Format::Csv {
        return Err(Error::Config(format!("`{command}` has no CSV output; use table or json")));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Unitroot(a) => unitroot(a),
        Command::Search(a) => search(a),
        Command::Johansen(a) => johansen(a),
        Command::Forecast(a) => forecast(a),
        Command::Compare(a) => compare(a),
    }
}

#[derive(Serialize)]
struct DataMeta {
    first_year: i32,
    last_year: i32,
    n_obs: usize,
}

fn data_meta(d: &AlignedDataset) -> DataMeta {
    DataMeta {
        first_year: d.first_year(),
        last_year: d.last_year(),
        n_obs: d.len(),
    }
}

#[derive(Serialize)]
struct AdfEntry {
    case: Deterministic,
    result: Option<UnitRootResult>,
    error: Option<String>,
}

#[derive(Serialize)]
struct KpssEntry {
    case: Deterministic,
    result: Option<KpssResult>,
    error: Option<String>,
}

#[derive(Serialize)]
struct UnitRootRow {
    variable: String,
    differenced: bool,
    adf: Vec<AdfEntry>,
    kpss: Vec<KpssEntry>,
}

fn unitroot(a: UnitrootArgs) -> Result<()> {
    no_csv(&a.common, "unitroot")?;
    let (data, _) = load(&a.common)?;
    let columns: Vec<String> = if a.columns.is_empty() {
        data.column_names().map(str::to_string).collect()
    } else {
        a.columns.clone()
    };
    let mut rows = Vec::new();
    for name in &columns {
        let level = data.series(name)?;
        let mut variants = vec![(level.clone(), false)];
        if a.differences {
            variants.push((level.diff(1)?, true));
        }
        for (s, differenced) in variants {
            let adf = Deterministic::ALL
                .iter()
                .map(|&case| {
                    let r = adf_test(&s, case, a.max_lag, LagCriterion::Bic);
                    AdfEntry {
                        case,
                        error: r.as_ref().err().map(|e| e.to_string()),
                        result: r.ok(),
                    }
                })
                .collect();
            let kpss = [Deterministic::Constant, Deterministic::ConstantTrend]
                .iter()
                .map(|&case| {
                    let r = kpss_test(&s, case);
                    KpssEntry {
                        case,
                        error: r.as_ref().err().map(|e| e.to_string()),
                        result: r.ok(),
                    }
                })
                .collect();
            rows.push(UnitRootRow {
                variable: name.clone(),
                differenced,
                adf,
                kpss,
            });
        }
    }
    let text = match a.common.format {
        Format::Json => to_json("unitroot", data_meta(&data), &rows)?,
        _ => render_unitroot(&rows),
    };
    emit(&a.common, text)
}

fn render_unitroot(rows: &[UnitRootRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:>8} {:>8} {:>8}   {:>12} {:>12}", "variable", "ADF 0", "ADF C", "ADF CT", "KPSS C", "KPSS CT");
    for r in rows {
        let name = if r.differenced { format!("d({})", r.variable) } else { r.variable.clone() };
        let adf: Vec<String> = r
            .adf
            .iter()
            .map(|e| e.result.as_ref().map_or("n/a".into(), |u| format!("{:.3}", u.p_value)))
            .collect();
        let kpss: Vec<String> = r
            .kpss
            .iter()
            .map(|e| e.result.as_ref().map_or("n/a".into(), |k| k.p_bracket.to_string()))
            .collect();
        let _ = writeln!(s, "{:<16} {:>8} {:>8} {:>8}   {:>12} {:>12}", name, adf[0], adf[1], adf[2], kpss[0], kpss[1]);
    }
    s
}

fn search_config(a: &SearchArgs, file: &FileConfig, data: &AlignedDataset) -> Result<SearchConfig> {
    let mut file = file.clone();
    if let Some(t) = &a.model.target {
        file.target = Some(t.clone());
    }
    if !a.model.predictors.is_empty() {
        file.predictors = Some(a.model.predictors.clone());
    }
    let mut cfg = file.search_config(data);
    if let Some(m) = a.mode {
        cfg.mode = match m {
            CliMode::Levels => ModelForm::Levels,
            CliMode::Differences => ModelForm::Differences,
        };
    }
    if !a.merge.is_empty() {
        cfg.merge_groups = a.merge.iter().map(|g| g.split('+').map(|m| m.trim().to_string()).collect()).collect();
    }
    let t = &mut cfg.thresholds;
    if let Some(v) = a.eg_level {
        t.eg_level = v;
    }
    if let Some(v) = a.bglm_level {
        t.bglm_level = v;
    }
    if let Some(v) = a.bglm_lags {
        t.bglm_lags = v;
    }
    if let Some(v) = a.eg_lags {
        t.eg_lags = v;
    }
    if let Some(d) = a.bg_design {
        t.bg_design = match d {
            CliBgDesign::Jacobian => BgDesign::Jacobian,
            CliBgDesign::Raw => BgDesign::Raw,
        };
    }
    if !a.deterministic.is_empty() {
        cfg.deterministic_options = a.deterministic.iter().map(|d| Deterministic::parse(d)).collect::<Result<_>>()?;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct SearchMeta<'a> {
    data: DataMeta,
    config: &'a SearchConfig,
}

fn search(a: SearchArgs) -> Result<()> {
    no_csv(&a.common, "search")?;
    let (data, file) = load(&a.common)?;
    let cfg = search_config(&a, &file, &data)?;
    let report = run_search(&data, &cfg)?;
    let text = match a.common.format {
        Format::Json => to_json(
            "search",
            SearchMeta {
                data: data_meta(&data),
                config: &cfg,
            },
            &report,
        )?,
        _ => render_search(&report),
    };
    emit(&a.common, text)
}

fn render_search(r: &SearchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} candidates for `{}` ({:?}), {}-{}, {} residuals each; {} survivors",
        r.n_candidates,
        r.target,
        r.mode,
        r.first_year,
        r.last_year,
        r.n_obs,
        r.ranked.len()
    );
    let _ = writeln!(
        s,
        "{:>4} {:<32} {:>9} {:>9} {:>7} {:>11} {:>7} {:>17}",
        "BIC", "model", "BIC", "AIC", "ER BIC", "ER AIC", "BG LM", "EG DF (0.05 cv)"
    );
    for m in &r.ranked {
        let eg = match (m.eg_statistic, m.eg_critical_value) {
            (Some(a), Some(b)) => format!("{a:.2} ({b:.2})"),
            _ => "-".into(),
        };
        let _ = writeln!(
            s,
            "{:>4} {:<32} {:>9.4} {:>9.4} {:>7.3} {:>6.3} ({:>2}) {:>7.3} {:>17}",
            m.bic_rank, m.spec.id, m.scores.bic, m.scores.aic, m.scores.er_bic, m.scores.er_aic, m.aic_rank, m.bg_lm_pvalue, eg
        );
        let coefs: Vec<String> = m
            .estimate
            .param_names()
            .iter()
            .zip(m.estimate.params())
            .zip(m.estimate.t_ratios())
            .map(|((n, v), (_, t))| format!("{n}={v:.4e} (t {t:.2})"))
            .collect();
        let _ = writeln!(s, "       {}", coefs.join("  "));
    }
    let count = |reason| r.discarded.iter().filter(|d| d.reason == reason).count();
    use crate::cointegration::DiscardReason::*;
    let _ = writeln!(
        s,
        "discarded: {} by EG, {} by BG LM, {} by estimation errors",
        count(Eg),
        count(Bglm),
        count(Error)
    );
    for d in r.discarded.iter().filter(|d| d.reason == Error) {
        let _ = writeln!(s, "  {}: {}", d.spec_id, d.detail);
    }
    s
}

#[derive(Serialize)]
struct ConsistencyEntry {
    spec_id: String,
    result: Option<ConsistencyResult>,
    error: Option<String>,
}

#[derive(Serialize)]
struct JohansenOut {
    vec: VecResult,
    consistency: Vec<ConsistencyEntry>,
}

fn johansen(a: JohansenArgs) -> Result<()> {
    no_csv(&a.common, "johansen")?;
    let (data, file) = load(&a.common)?;
    let section = file.johansen.clone().unwrap_or_default();
    let opts = JohansenOptions {
        case: match a.case {
            Some(CliCase::A) => JohansenCase::RestrictedConstant,
            Some(CliCase::B) => JohansenCase::RestrictedTrendWithDrift,
            None => section.case.unwrap_or(JohansenCase::RestrictedConstant),
        },
        lags: a.lags.or(section.lags).unwrap_or(0),
        level: a.level.or(section.level).unwrap_or(0.05),
    };
    let mut data = data;
    let variables: Vec<String> = if a.variables.is_empty() {
        data.column_names().map(str::to_string).collect()
    } else {
        let groups: Vec<Vec<String>> = a
            .variables
            .iter()
            .filter(|v| v.contains('+'))
            .map(|v| v.split('+').map(str::to_string).collect())
            .collect();
        add_merged_columns(&mut data, &groups)?;
        a.variables.clone()
    };
    let cols = variables
        .iter()
        .map(|v| Ok((v.clone(), data.require(v)?.to_vec())))
        .collect::<Result<Vec<_>>>()?;
    let z = AlignedDataset::from_columns(data.first_year(), cols)?;
    let vec = johansen_test(&z, &opts)?;
    let target = variables[0].clone();
    let ec_data = data.clone().with_target(&target)?;
    let nls = file.nls.unwrap_or_default();
    let consistency = a
        .consistency
        .iter()
        .map(|id| {
            let r = CandidateSpec::parse_id(id).and_then(|spec| match fit_spec(&spec, &ec_data, &nls)? {
                FittedModel::ErrorCorrection(ec) => ec_consistency(&vec, &ec, &spec),
                FittedModel::ShortRun(_) => Err(Error::Config(format!("`{id}` is not an EC model"))),
            });
            ConsistencyEntry {
                spec_id: id.clone(),
                error: r.as_ref().err().map(|e| e.to_string()),
                result: r.ok(),
            }
        })
        .collect();
    let out = JohansenOut { vec, consistency };
    let text = match a.common.format {
        Format::Json => to_json("johansen", data_meta(&z), &out)?,
        _ => render_johansen(&out),
    };
    emit(&a.common, text)
}

fn render_johansen(o: &JohansenOut) -> String {
    let v = &o.vec;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Johansen case {} on {} ({} obs, {} lags)",
        v.case.code(),
        v.variables.join(", "),
        v.n_obs,
        v.lags
    );
    let _ = writeln!(s, "{:>3} {:>10} {:>10} {:>8} {:>10} {:>8}", "r", "eigenvalue", "trace", "p", "max-eig", "p");
    for r in 0..v.dimension {
        let _ = writeln!(
            s,
            "{:>3} {:>10.4} {:>10.3} {:>8.4} {:>10.3} {:>8.4}",
            r, v.eigenvalues[r], v.trace_stats[r], v.trace_pvalues[r], v.max_eig_stats[r], v.max_eig_pvalues[r]
        );
    }
    let _ = writeln!(s, "rank by trace: {}, by max-eigenvalue: {} (level {})", v.selected_rank, v.max_eig_rank, v.level);
    for (i, name) in v.variables.iter().enumerate().filter(|_| v.selected_rank > 0) {
        let b: Vec<String> = v.beta[i].iter().map(|x| format!("{x:>11.4e}")).collect();
        let _ = writeln!(s, "  beta[{name}] {}", b.join(" "));
    }
    for c in &o.consistency {
        match (&c.result, &c.error) {
            (Some(r), _) => {
                let _ = writeln!(s, "{}: within bounds = {}, xi = {:?}", c.spec_id, r.within_bounds, r.xi);
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "{}: {e}", c.spec_id);
            }
            _ => {}
        }
    }
    s
}

fn forecast_config(o: &ForecastOptions, file: &FileConfig, start: i32, end: i32) -> ForecastConfig {
    let section = file.forecast.clone().unwrap_or_default();
    let mut cfg = ForecastConfig::new(start, end, o.seed.or(file.seed).unwrap_or(0));
    cfg.reps = o.reps.or(section.reps).unwrap_or(cfg.reps);
    cfg.include_coefficient_uncertainty =
        !o.no_coefficient_uncertainty && section.include_coefficient_uncertainty.unwrap_or(true);
    cfg.band = match o.band {
        Some(CliBand::Std) => BandKind::StdDev,
        Some(CliBand::Quantile) => BandKind::Quantile,
        None => section.band.unwrap_or_default(),
    };
    cfg
}

fn prepare_models(ids: &[String], data: &mut AlignedDataset) -> Result<Vec<CandidateSpec>> {
    let specs: Vec<CandidateSpec> = ids.iter().map(|id| CandidateSpec::parse_id(id)).collect::<Result<_>>()?;
    let groups: Vec<Vec<String>> = specs
        .iter()
        .flat_map(|s| s.subset.iter())
        .filter(|v| v.contains('+'))
        .map(|v| v.split('+').map(str::to_string).collect())
        .collect();
    add_merged_columns(data, &groups)?;
    Ok(specs)
}

fn forecast(a: ForecastArgs) -> Result<()> {
    let (data, file) = load(&a.common)?;
    let target = a.target.clone().or(file.target.clone()).unwrap_or_else(|| data.target().to_string());
    let mut data = data.with_target(&target)?;
    let spec = prepare_models(std::slice::from_ref(&a.model), &mut data)?.remove(0);
    let cfg = forecast_config(&a.options, &file, a.train_end + 1, a.horizon_end);
    let train = data.window(data.first_year(), a.train_end)?;
    let model = fit_spec(&spec, &train, &file.nls.unwrap_or_default())?;
    let bands = mc_forecast(&spec, &model, &data, &cfg)?;
    let text = match a.common.format {
        Format::Json => to_json("forecast", data_meta(&data), &bands)?,
        Format::Csv => bands_csv(&bands)?,
        Format::Table => render_bands(&bands),
    };
    emit(&a.common, text)
}

fn bands_csv(b: &ForecastBands) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["year", "mean", "lower", "upper", "sd"]).map_err(io)?;
    for i in 0..b.years.len() {
        w.write_record([
            b.years[i].to_string(),
            b.mean[i].to_string(),
            b.lower[i].to_string(),
            b.upper[i].to_string(),
            b.sd[i].to_string(),
        ])
        .map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

fn render_bands(b: &ForecastBands) -> String {
    let mut s = format!("{} ({} repetitions, seed {})\n", b.spec_id, b.reps, b.seed);
    if b.diagonal_covariance_fallback {
        s.push_str("warning: covariance not positive definite, diagonal used\n");
    }
    let _ = writeln!(s, "{:>6} {:>14} {:>14} {:>14}", "year", "mean", "lower", "upper");
    for i in 0..b.years.len() {
        let _ = writeln!(s, "{:>6} {:>14.6e} {:>14.6e} {:>14.6e}", b.years[i], b.mean[i], b.lower[i], b.upper[i]);
    }
    s
}

fn parse_split(s: &str) -> Result<Split> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("split `{s}` must look like TRAIN_END:HORIZON_END")))?;
    let p = |v: &str| v.trim().parse::<i32>().map_err(|_| Error::Config(format!("`{v}` in split `{s}` is not a year")));
    Ok(Split {
        train_end: p(a)?,
        horizon_end: p(b)?,
    })
}

fn compare(a: CompareArgs) -> Result<()> {
    if a.models.len() < 2 {
        return Err(Error::Config("compare needs at least two models".into()));
    }
    let (data, file) = load(&a.common)?;
    let target = a.target.clone().or(file.target.clone()).unwrap_or_else(|| data.target().to_string());
    let mut data = data.with_target(&target)?;
    let specs = prepare_models(&a.models, &mut data)?;
    let splits: Vec<Split> = a.splits.iter().map(|s| parse_split(s)).collect::<Result<_>>()?;
    let cfg = forecast_config(&a.options, &file, 0, 0);
    let report = forecast_compare(&specs, &data, &splits, &cfg, &file.nls.unwrap_or_default())?;
    let text = match a.common.format {
        Format::Json => to_json("compare", data_meta(&data), &report)?,
        Format::Csv => report.to_csv()?,
        Format::Table => render_compare(&report),
    };
    emit(&a.common, text)
}

fn render_compare(r: &ComparisonReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>9} {:>11} {:<32} {:>12} {:>12}", "train_end", "horizon_end", "model", "RMSE", "band width");
    for row in &r.rows {
        match (row.rmse, row.mean_band_width) {
            (Some(e), Some(w)) => {
                let _ = writeln!(
                    s,
                    "{:>9} {:>11} {:<32} {:>12.4e} {:>12.4e}",
                    row.split.train_end, row.split.horizon_end, row.spec_id, e, w
                );
            }
            _ => {
                let _ = writeln!(
                    s,
                    "{:>9} {:>11} {:<32} unavailable: {}",
                    row.split.train_end,
                    row.split.horizon_end,
                    row.spec_id,
                    row.error.as_deref().unwrap_or("")
                );
            }
        }
    }
    s
}
