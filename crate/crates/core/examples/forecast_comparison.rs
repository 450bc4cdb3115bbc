//! Monte Carlo forecasts of an EC model and a short-run model over two
//! training splits, compared by RMSE and band width.

use cointsearch::forecast::{forecast_compare, ForecastConfig, Split};
use cointsearch::model::{CandidateSpec, Deterministic};
use cointsearch::regress::NlsOptions;
use cointsearch::sim::cointegrated_panel;

fn main() -> cointsearch::Result<()> {
    let data = cointegrated_panel(21, 100, 0.3)?;
    let models = [
        CandidateSpec::levels(vec!["x3".into(), "x5".into()], Deterministic::Constant, true)?,
        CandidateSpec::differences(vec!["x3".into(), "x5".into()], Deterministic::Constant)?,
    ];
    let splits = [
        Split { train_end: 1979, horizon_end: 1999 },
        Split { train_end: 1989, horizon_end: 1999 },
    ];
    let mut config = ForecastConfig::new(0, 0, 2024);
    config.reps = 5000;
    let report = forecast_compare(&models, &data, &splits, &config, &NlsOptions::default())?;
    for row in &report.rows {
        println!(
            "{}-{} {:<18} RMSE {:>8.4}  mean band width {:>8.4}",
            row.split.train_end,
            row.split.horizon_end,
            row.spec_id,
            row.rmse.unwrap_or(f64::NAN),
            row.mean_band_width.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
