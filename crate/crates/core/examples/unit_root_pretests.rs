//! ADF and KPSS pretests on a synthetic panel, in levels and first differences.

use cointsearch::model::Deterministic;
use cointsearch::sim::cointegrated_panel;
use cointsearch::unit_root::{adf_test, kpss_test, LagCriterion};

fn main() -> cointsearch::Result<()> {
    let data = cointegrated_panel(11, 120, 0.3)?;
    println!("{:<8} {:>10} {:>8} {:>5} {:>12}", "series", "ADF(C) t", "p", "lags", "KPSS(C) p");
    for name in data.column_names() {
        let level = data.series(name)?;
        for (label, s) in [(name.to_string(), level.clone()), (format!("d({name})"), level.diff(1)?)] {
            let adf = adf_test(&s, Deterministic::Constant, None, LagCriterion::Bic)?;
            let kpss = kpss_test(&s, Deterministic::Constant)?;
            println!(
                "{:<8} {:>10.3} {:>8.4} {:>5} {:>12}",
                label, adf.statistic, adf.p_value, adf.lags_used, kpss.p_bracket
            );
        }
    }
    Ok(())
}
