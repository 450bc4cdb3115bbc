//! Candidate model specifications shared by the estimators and the generator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic terms of a regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    None,
    Constant,
    ConstantTrend,
}

impl Deterministic {
    pub const ALL: [Deterministic; 3] = [
        Deterministic::None,
        Deterministic::Constant,
        Deterministic::ConstantTrend,
    ];

    pub fn has_constant(self) -> bool {
        !matches!(self, Deterministic::None)
    }

    pub fn has_trend(self) -> bool {
        matches!(self, Deterministic::ConstantTrend)
    }

    /// Number of deterministic regressors.
    pub fn count(self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Constant => 1,
            Deterministic::ConstantTrend => 2,
        }
    }

    /// Short code used in ids and tables: `0`, `C`, `CT`.
    pub fn code(self) -> &'static str {
        match self {
            Deterministic::None => "0",
            Deterministic::Constant => "C",
            Deterministic::ConstantTrend => "CT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "0" | "none" | "n" => Ok(Deterministic::None),
            "c" | "constant" => Ok(Deterministic::Constant),
            "ct" | "constant_trend" | "constant_and_trend" => Ok(Deterministic::ConstantTrend),
            other => Err(Error::Config(format!("unknown deterministic case `{other}`"))),
        }
    }
}

impl fmt::Display for Deterministic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Level (cointegrating, error-correction) or first-difference (short-run) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelForm {
    Levels,
    Differences,
}

/// One candidate model of the search.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateSpec {
    pub form: ModelForm,
    /// Predictor column names, in predictor-list order.
    pub subset: Vec<String>,
    pub deterministic: Deterministic,
    /// Whether the AR(1) noise coefficient is estimated (levels form only).
    pub phi_free: bool,
    pub id: String,
}

impl CandidateSpec {
    pub fn levels(subset: Vec<String>, deterministic: Deterministic, phi_free: bool) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::Config(
                "a levels-form model needs at least one predictor".into(),
            ));
        }
        Ok(Self::build(ModelForm::Levels, subset, deterministic, phi_free))
    }

    pub fn differences(subset: Vec<String>, deterministic: Deterministic) -> Result<Self> {
        match deterministic {
            Deterministic::ConstantTrend => Err(Error::Config(
                "short-run models allow no trend".into(),
            )),
            Deterministic::None if subset.is_empty() => Err(Error::Config(
                "a short-run model without predictors needs a constant".into(),
            )),
            _ => Ok(Self::build(ModelForm::Differences, subset, deterministic, false)),
        }
    }

    fn build(form: ModelForm, subset: Vec<String>, deterministic: Deterministic, phi_free: bool) -> Self {
        let prefix = match form {
            ModelForm::Levels => "L",
            ModelForm::Differences => "D",
        };
        let vars = if subset.is_empty() {
            "-".to_string()
        } else {
            subset.join(",")
        };
        let id = format!(
            "{prefix}|{}|{vars}|{}",
            deterministic.code(),
            if phi_free { "phi" } else { "nophi" }
        );
        Self {
            form,
            subset,
            deterministic,
            phi_free,
            id,
        }
    }

    /// Parses an id such as `L|C|x3,x5|phi` or `D|0|-|nophi`.
    pub fn parse_id(id: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed model id `{id}`"));
        let parts: Vec<&str> = id.trim().split('|').collect();
        let [form, det, vars, phi] = parts[..] else {
            return Err(bad());
        };
        let deterministic = Deterministic::parse(det)?;
        let subset: Vec<String> = if vars == "-" {
            Vec::new()
        } else {
            vars.split(',').map(|v| v.trim().to_string()).collect()
        };
        if subset.iter().any(String::is_empty) {
            return Err(bad());
        }
        let phi_free = match phi {
            "phi" => true,
            "nophi" => false,
            _ => return Err(bad()),
        };
        match form {
            "L" => Self::levels(subset, deterministic, phi_free),
            "D" if !phi_free => Self::differences(subset, deterministic),
            _ => Err(bad()),
        }
    }

    /// Number of freely estimated coefficients.
    pub fn n_params(&self) -> usize {
        self.subset.len() + self.deterministic.count() + usize::from(self.phi_free)
    }

    /// The same spec with the noise coefficient restricted to zero.
    pub fn restricted_twin(&self) -> CandidateSpec {
        Self::build(self.form, self.subset.clone(), self.deterministic, false)
    }
}

impl fmt::Display for CandidateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_invariants() {
        assert!(CandidateSpec::levels(vec![], Deterministic::Constant, false).is_err());
        assert!(CandidateSpec::differences(vec![], Deterministic::None).is_err());
        assert!(CandidateSpec::differences(vec![], Deterministic::Constant).is_ok());
        assert!(CandidateSpec::differences(vec!["x".into()], Deterministic::ConstantTrend).is_err());
        let s = CandidateSpec::levels(vec!["x3".into(), "x5".into()], Deterministic::Constant, true).unwrap();
        assert_eq!(s.id, "L|C|x3,x5|phi");
        assert_eq!(s.n_params(), 4);
        assert_eq!(s.restricted_twin().n_params(), 3);
        assert_eq!(CandidateSpec::parse_id(&s.id).unwrap(), s);
        let d = CandidateSpec::differences(vec![], Deterministic::Constant).unwrap();
        assert_eq!(CandidateSpec::parse_id("D|C|-|nophi").unwrap(), d);
        assert!(CandidateSpec::parse_id("D|C|x1|phi").is_err());
        assert!(CandidateSpec::parse_id("L|C|x1").is_err());
    }
}
