//! Annual time series and the aligned multi-column dataset every estimator works on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named, gap-free annual series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    start_year: i32,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series, rejecting empty input and non-finite values.
    pub fn new(name: impl Into<String>, start_year: i32, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::InsufficientData(format!("series `{name}` is empty")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                series: name,
                year: start_year + i as i32,
            });
        }
        Ok(Self {
            name,
            start_year,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at a calendar year, if covered.
    pub fn at(&self, year: i32) -> Option<f64> {
        let idx = year.checked_sub(self.start_year)?;
        usize::try_from(idx).ok().and_then(|i| self.values.get(i).copied())
    }

    /// `d`-fold first difference. The result starts `d` years later.
    pub fn diff(&self, d: usize) -> Result<TimeSeries> {
        if d == 0 {
            return Err(Error::Config("difference order must be positive".into()));
        }
        if self.len() <= d {
            return Err(Error::InsufficientData(format!(
                "cannot difference `{}` of length {} {} times",
                self.name,
                self.len(),
                d
            )));
        }
        let mut values = self.values.clone();
        for _ in 0..d {
            values = values.windows(2).map(|w| w[1] - w[0]).collect();
        }
        Ok(TimeSeries {
            name: self.name.clone(),
            start_year: self.start_year + d as i32,
            values,
        })
    }

    /// Backshift by `k` years: the result at year `t` is this series at `t - k`.
    pub fn lag(&self, k: usize) -> Result<TimeSeries> {
        if k == 0 {
            return Err(Error::Config("lag order must be positive".into()));
        }
        if self.len() <= k {
            return Err(Error::InsufficientData(format!(
                "cannot lag `{}` of length {} by {}",
                self.name,
                self.len(),
                k
            )));
        }
        Ok(TimeSeries {
            name: self.name.clone(),
            start_year: self.start_year + k as i32,
            values: self.values[..self.len() - k].to_vec(),
        })
    }

    /// Restricts the series to `[first, last]`.
    pub fn window(&self, first: i32, last: i32) -> Result<TimeSeries> {
        if first < self.start_year || last > self.end_year() || first > last {
            return Err(Error::Alignment(format!(
                "window {first}-{last} outside `{}` ({}-{})",
                self.name,
                self.start_year,
                self.end_year()
            )));
        }
        let lo = (first - self.start_year) as usize;
        let hi = (last - self.start_year) as usize;
        Ok(TimeSeries {
            name: self.name.clone(),
            start_year: first,
            values: self.values[lo..=hi].to_vec(),
        })
    }
}

/// Equal-length named columns over one shared year range, with a designated target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedDataset {
    first_year: i32,
    columns: Vec<(String, Vec<f64>)>,
    target: String,
}

impl AlignedDataset {
    /// Builds a dataset from already aligned columns. The first column is the target.
    pub fn from_columns(first_year: i32, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let Some((target, first)) = columns.first() else {
            return Err(Error::Alignment("dataset has no columns".into()));
        };
        let len = first.len();
        if len == 0 {
            return Err(Error::InsufficientData("dataset has no rows".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (name, values) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(Error::Alignment(format!("duplicate column `{name}`")));
            }
            if values.len() != len {
                return Err(Error::Alignment(format!(
                    "column `{name}` has {} values, expected {len}",
                    values.len()
                )));
            }
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    series: name.clone(),
                    year: first_year + i as i32,
                });
            }
        }
        let target = target.clone();
        Ok(Self {
            first_year,
            columns,
            target,
        })
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.first_year + self.len() as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.columns[0].1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn years(&self) -> Vec<i32> {
        (self.first_year..=self.last_year()).collect()
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn target_values(&self) -> &[f64] {
        self.column(&self.target).expect("target column exists")
    }

    /// Designates another existing column as the target.
    pub fn with_target(mut self, name: &str) -> Result<Self> {
        if self.column(name).is_none() {
            return Err(Error::Config(format!("unknown target column `{name}`")));
        }
        self.target = name.to_string();
        Ok(self)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Looks up a column, failing with a configuration error when absent.
    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .ok_or_else(|| Error::Config(format!("dataset has no column `{name}`")))
    }

    pub fn series(&self, name: &str) -> Result<TimeSeries> {
        TimeSeries::new(name, self.first_year, self.require(name)?.to_vec())
    }

    /// Appends a column; the name must be new.
    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if self.column(&name).is_some() {
            return Err(Error::Alignment(format!("duplicate column `{name}`")));
        }
        if values.len() != self.len() {
            return Err(Error::Alignment(format!(
                "column `{name}` has {} values, expected {}",
                values.len(),
                self.len()
            )));
        }
        self.columns.push((name, values));
        Ok(())
    }

    /// Restricts every column to `[first, last]`.
    pub fn window(&self, first: i32, last: i32) -> Result<AlignedDataset> {
        if first < self.first_year || last > self.last_year() || first > last {
            return Err(Error::Alignment(format!(
                "window {first}-{last} outside dataset range {}-{}",
                self.first_year,
                self.last_year()
            )));
        }
        let lo = (first - self.first_year) as usize;
        let hi = (last - self.first_year) as usize;
        Ok(AlignedDataset {
            first_year: first,
            columns: self
                .columns
                .iter()
                .map(|(n, v)| (n.clone(), v[lo..=hi].to_vec()))
                .collect(),
            target: self.target.clone(),
        })
    }

    /// The columns as series, in order.
    pub fn to_series(&self) -> Vec<TimeSeries> {
        self.columns
            .iter()
            .map(|(n, v)| TimeSeries {
                name: n.clone(),
                start_year: self.first_year,
                values: v.clone(),
            })
            .collect()
    }
}

/// Truncates every series to the common year range. Column order is preserved and
/// the first series becomes the target.
pub fn align(series: &[TimeSeries]) -> Result<AlignedDataset> {
    let Some(first) = series.first() else {
        return Err(Error::Alignment("no series to align".into()));
    };
    let mut lo = first.start_year();
    let mut hi = first.end_year();
    for s in series {
        lo = lo.max(s.start_year());
        hi = hi.min(s.end_year());
        if lo > hi {
            return Err(Error::Alignment(format!(
                "series `{}` ({}-{}) does not overlap the common range of the preceding series",
                s.name(),
                s.start_year(),
                s.end_year()
            )));
        }
    }
    let columns = series
        .iter()
        .map(|s| Ok((s.name().to_string(), s.window(lo, hi)?.values)))
        .collect::<Result<Vec<_>>>()?;
    AlignedDataset::from_columns(lo, columns)
}
