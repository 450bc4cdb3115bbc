//! CSV ingestion and the declarative run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cointegration::BgDesign;
use crate::error::{Error, Result};
use crate::forecast::BandKind;
use crate::generator::SearchConfig;
use crate::johansen::JohansenCase;
use crate::model::{Deterministic, ModelForm};
use crate::regress::NlsOptions;
use crate::series::AlignedDataset;

/// Reads an annual dataset. The first column must be `year` with consecutive
/// integers; every other column is a numeric series. The first series is the
/// default target.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<AlignedDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_dataset(&text)
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Parses CSV text in the [`load_dataset`] format. Locations in errors are 1-based
/// file lines and columns.
pub fn parse_dataset(text: &str) -> Result<AlignedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(parse_error("line 1", "file is empty")),
        Some(r) => r.map_err(|e| parse_error("line 1", e.to_string()))?,
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    if names.first().map(String::as_str) != Some("year") {
        return Err(parse_error("line 1, column 1", "first column must be named `year`"));
    }
    if names.len() < 2 {
        return Err(parse_error("line 1", "no series columns"));
    }
    for (j, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(parse_error(format!("line 1, column {}", j + 1), "empty column name"));
        }
        if let Some(k) = names[..j].iter().position(|n| n == name) {
            return Err(parse_error(
                format!("line 1, column {}", j + 1),
                format!("duplicate column `{name}` (also column {})", k + 1),
            ));
        }
    }

    let mut first_year = None;
    let mut prev_year: Option<i32> = None;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len() - 1];
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != names.len() {
            return Err(parse_error(
                format!("line {line}"),
                format!("{} fields, expected {}", record.len(), names.len()),
            ));
        }
        let year: i32 = record[0]
            .parse()
            .map_err(|_| parse_error(format!("line {line}, column 1 (year)"), format!("`{}` is not an integer year", &record[0])))?;
        if let Some(p) = prev_year {
            if year <= p {
                return Err(parse_error(
                    format!("line {line}, column 1 (year)"),
                    format!("year {year} does not follow {p}"),
                ));
            }
            if year > p + 1 {
                let missing = if year == p + 2 {
                    format!("{}", p + 1)
                } else {
                    format!("{}-{}", p + 1, year - 1)
                };
                return Err(parse_error(
                    format!("line {line}, column 1 (year)"),
                    format!("gap in years: {missing} missing"),
                ));
            }
        }
        first_year.get_or_insert(year);
        prev_year = Some(year);
        for (j, cell) in record.iter().enumerate().skip(1) {
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                parse_error(
                    format!("line {line}, column {} ({})", j + 1, names[j]),
                    format!("`{cell}` is not a finite number"),
                )
            })?;
            columns[j - 1].push(v);
        }
    }
    let Some(first_year) = first_year else {
        return Err(Error::InsufficientData("file has a header but no rows".into()));
    };
    AlignedDataset::from_columns(first_year, names.into_iter().skip(1).zip(columns).collect())
}

/// Writes a dataset in the [`load_dataset`] format.
pub fn dataset_to_csv(data: &AlignedDataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    let names: Vec<&str> = data.column_names().collect();
    let mut header = vec!["year".to_string()];
    header.extend(names.iter().map(|n| n.to_string()));
    w.write_record(&header).map_err(io)?;
    for (i, year) in data.years().iter().enumerate() {
        let mut row = vec![year.to_string()];
        for n in &names {
            row.push(data.require(n)?[i].to_string());
        }
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Forecast settings of a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastSection {
    pub reps: Option<usize>,
    pub include_coefficient_uncertainty: Option<bool>,
    pub band: Option<BandKind>,
}

/// Johansen settings of a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JohansenSection {
    pub case: Option<JohansenCase>,
    pub lags: Option<usize>,
    pub level: Option<f64>,
}

/// The TOML run configuration. Every key is optional; command-line flags override
/// file values, which override built-in defaults.
///
/// ```toml
/// target = "y"
/// predictors = ["x1", "x2", "x3", "x4", "x5"]
/// mode = "levels"                 # or "differences"
/// merge_groups = [["x2", "x3"]]
/// eg_level = 0.05
/// bglm_level = 0.20
/// bglm_lags = 2
/// bg_design = "jacobian"          # or "raw"
/// eg_lags = 0
/// deterministic_options = ["none", "constant", "constant_trend"]
/// seed = 42
///
/// [nls]
/// tol = 1e-4
/// max_iter = 500
/// initial_lambda = 1e-3
///
/// [forecast]
/// reps = 10000
/// include_coefficient_uncertainty = true
/// band = "std_dev"                # or "quantile"
///
/// [johansen]
/// case = "restricted_constant"    # or "restricted_trend_with_drift"
/// lags = 0
/// level = 0.05
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub target: Option<String>,
    pub predictors: Option<Vec<String>>,
    pub mode: Option<ModelForm>,
    pub merge_groups: Option<Vec<Vec<String>>>,
    pub eg_level: Option<f64>,
    pub bglm_level: Option<f64>,
    pub bglm_lags: Option<usize>,
    pub bg_design: Option<BgDesign>,
    pub eg_lags: Option<usize>,
    pub deterministic_options: Option<Vec<Deterministic>>,
    pub seed: Option<u64>,
    pub nls: Option<NlsOptions>,
    pub forecast: Option<ForecastSection>,
    pub johansen: Option<JohansenSection>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Search configuration for `data`: the target defaults to the dataset's first
    /// series and the predictors to every other series.
    pub fn search_config(&self, data: &AlignedDataset) -> SearchConfig {
        let target = self.target.clone().unwrap_or_else(|| data.target().to_string());
        let predictors = self
            .predictors
            .clone()
            .unwrap_or_else(|| data.column_names().filter(|c| *c != target).map(str::to_string).collect());
        let mut cfg = SearchConfig::new(target, predictors, self.mode.unwrap_or(ModelForm::Levels));
        if let Some(g) = &self.merge_groups {
            cfg.merge_groups = g.clone();
        }
        let t = &mut cfg.thresholds;
        if let Some(v) = self.eg_level {
            t.eg_level = v;
        }
        if let Some(v) = self.bglm_level {
            t.bglm_level = v;
        }
        if let Some(v) = self.bglm_lags {
            t.bglm_lags = v;
        }
        if let Some(v) = self.bg_design {
            t.bg_design = v;
        }
        if let Some(v) = self.eg_lags {
            t.eg_lags = v;
        }
        if let Some(d) = &self.deterministic_options {
            cfg.deterministic_options = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.nls {
            cfg.nls = n;
        }
        cfg
    }
}
