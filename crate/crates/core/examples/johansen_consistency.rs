//! Johansen rank test on (y, x3, x5) and a check that the single-equation EC
//! relation lies in the estimated cointegration space.

use cointsearch::forecast::fit_spec;
use cointsearch::johansen::{ec_consistency, johansen_test, JohansenCase, JohansenOptions};
use cointsearch::model::{CandidateSpec, Deterministic};
use cointsearch::regress::{FittedModel, NlsOptions};
use cointsearch::sim::cointegrated_panel;
use cointsearch::AlignedDataset;

fn main() -> cointsearch::Result<()> {
    let data = cointegrated_panel(3, 200, 0.3)?;
    let cols = ["y", "x3", "x5"]
        .iter()
        .map(|v| Ok((v.to_string(), data.require(v)?.to_vec())))
        .collect::<cointsearch::Result<Vec<_>>>()?;
    let z = AlignedDataset::from_columns(data.first_year(), cols)?;
    let opts = JohansenOptions {
        case: JohansenCase::RestrictedConstant,
        lags: 0,
        level: 0.05,
    };
    let vec = johansen_test(&z, &opts)?;
    for r in 0..vec.dimension {
        println!(
            "r <= {r}: trace {:>8.3} (p {:.4})  max-eig {:>8.3} (p {:.4})",
            vec.trace_stats[r], vec.trace_pvalues[r], vec.max_eig_stats[r], vec.max_eig_pvalues[r]
        );
    }
    println!("selected rank {}", vec.selected_rank);

    let spec = CandidateSpec::levels(vec!["x3".into(), "x5".into()], Deterministic::Constant, true)?;
    let FittedModel::ErrorCorrection(ec) = fit_spec(&spec, &data, &NlsOptions::default())? else {
        unreachable!()
    };
    let check = ec_consistency(&vec, &ec, &spec)?;
    println!("xi = {:?}, within bounds: {}", check.xi, check.within_bounds);
    for ((name, ec), rec) in check.coefficient_names.iter().zip(&check.ec_coefficients).zip(&check.reconstructed_ec) {
        println!("  {name:>6}: EC {ec:>9.4}  Johansen {rec:>9.4}");
    }
    Ok(())
}
