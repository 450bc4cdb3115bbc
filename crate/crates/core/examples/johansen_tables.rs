//! Regenerates `data/johansen_critical_values.txt`: quantiles of the rank-zero
//! trace and max-eigenvalue statistics for 1 to 6 non-cointegrated directions,
//! both deterministic cases and several effective sample sizes.
//!
//! ```text
//! cargo run --release --example johansen_tables -- 100000 > crates/core/data/johansen_critical_values.txt
//! ```

use cointsearch::johansen::{simulate_rank_zero, JohansenCase, TABLE_LEVELS, TABLE_SIZES};

const SEED: u64 = 0x10_4a45;

fn quantile(sorted: &[f64], upper: f64) -> f64 {
    let pos = (1.0 - upper) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    println!("# Johansen rank-zero null quantiles, simulated with {reps} replications per cell.");
    println!("# Gaussian random walks, lag-1 VEC, effective sample size n.");
    println!("# columns: statistic case m n upper_tail_probability quantile");
    println!("#   statistic: trace | maxeig");
    println!("#   case: a = restricted constant, b = restricted trend with unrestricted drift");
    println!("#   m: dimension minus tested rank");
    for case in JohansenCase::ALL {
        for m in 1..=6 {
            for (k, &n) in TABLE_SIZES.iter().enumerate() {
                let seed = SEED + (case as u64) * 1000 + (m as u64) * 10 + k as u64;
                let draws = simulate_rank_zero(case, m, n, reps, seed).expect("simulation");
                let mut trace: Vec<f64> = draws.iter().map(|d| d.0).collect();
                let mut max: Vec<f64> = draws.iter().map(|d| d.1).collect();
                trace.sort_by(|a, b| a.total_cmp(b));
                max.sort_by(|a, b| a.total_cmp(b));
                for (name, s) in [("trace", &trace), ("maxeig", &max)] {
                    for &p in &TABLE_LEVELS {
                        println!("{name} {} {m} {n} {p} {:.4}", case.code(), quantile(s, p));
                    }
                }
                eprintln!("case {} m {m} n {n} done", case.code());
            }
        }
    }
}
