//! OLS and Levenberg-Marquardt estimation.

mod nls;
mod ols;

pub use nls::{
    levels_ols, levenberg_marquardt, nls_ec_fit, EcEstimate, EcLayout, EcProblem,
    LeastSquaresProblem, LmOutcome, NlsOptions,
};
pub use ols::{design_from_columns, ols_fit, t_ratio, OlsEstimate, MAX_CONDITION};

mod short_run;
pub use short_run::{short_run_design, short_run_fit, FittedModel, ShortRunEstimate};
