//! Exhaustive search for cointegrated level-form models and short-run
//! difference-form models of an annual time series.
//!
//! The pipeline: unit-root pretests ([`unit_root`]), Engle-Granger screening and
//! error-correction estimation with Breusch-Godfrey residual filtering
//! ([`cointegration`]), information-criterion ranking over every predictor subset
//! ([`generator`]), Johansen rank tests and cross-checks ([`johansen`]), and Monte
//! Carlo forecasting with coefficient uncertainty ([`forecast`]).

pub mod cli;
pub mod cointegration;
pub mod error;
pub mod forecast;
pub mod generator;
pub mod io;
pub mod johansen;
pub mod model;
pub mod regress;
pub mod series;
pub mod sim;
pub mod unit_root;

pub use error::{Error, Result};
pub use model::{CandidateSpec, Deterministic, ModelForm};
pub use series::{align, AlignedDataset, TimeSeries};
