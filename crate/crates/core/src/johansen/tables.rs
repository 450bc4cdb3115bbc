use std::collections::HashMap;
use std::sync::OnceLock;

use statrs::distribution::{ContinuousCDF, Normal};

use super::{JohansenCase, RankStatistic};
use crate::error::{Error, Result};

pub(crate) const MAX_DIMENSION: usize = 6;

/// Upper-tail probabilities at which quantiles are tabulated.
pub const TABLE_LEVELS: [f64; 20] = [
    0.001, 0.0025, 0.005, 0.01, 0.025, 0.05, 0.075, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80,
    0.90, 0.95, 0.99,
];

/// Effective sample sizes of the tabulated finite-sample distributions.
pub const TABLE_SIZES: [usize; 6] = [25, 50, 100, 200, 400, 1000];

const RAW: &str = include_str!("../../data/johansen_critical_values.txt");

type Key = (RankStatistic, JohansenCase, usize);
/// Quantiles indexed by `[size][level]`.
type Table = HashMap<Key, Vec<Vec<f64>>>;

fn parse(raw: &str) -> Table {
    let mut table: Table = HashMap::new();
    for (no, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || -> ! { panic!("malformed Johansen table line {}: {line}", no + 1) };
        if f.len() != 6 {
            bad();
        }
        let stat = match f[0] {
            "trace" => RankStatistic::Trace,
            "maxeig" => RankStatistic::MaxEig,
            _ => bad(),
        };
        let case = JohansenCase::parse(f[1]).unwrap_or_else(|_| bad());
        let m: usize = f[2].parse().unwrap_or_else(|_| bad());
        let n: usize = f[3].parse().unwrap_or_else(|_| bad());
        let p: f64 = f[4].parse().unwrap_or_else(|_| bad());
        let v: f64 = f[5].parse().unwrap_or_else(|_| bad());
        let (Some(i), Some(j)) = (
            TABLE_SIZES.iter().position(|&s| s == n),
            TABLE_LEVELS.iter().position(|&l| (l - p).abs() < 1e-12),
        ) else {
            bad()
        };
        let entry = table
            .entry((stat, case, m))
            .or_insert_with(|| vec![vec![f64::NAN; TABLE_LEVELS.len()]; TABLE_SIZES.len()]);
        entry[i][j] = v;
    }
    table
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| parse(RAW))
}

/// Quantiles at each tabulated level for effective sample size `n`, linear in `1/n`
/// between tabulated sizes and held constant outside them.
fn quantiles(stat: RankStatistic, case: JohansenCase, m: usize, n: usize) -> Result<Vec<f64>> {
    if m == 0 || m > MAX_DIMENSION {
        return Err(Error::Unsupported(format!(
            "Johansen tables cover 1 to {MAX_DIMENSION} non-cointegrated directions, got {m}"
        )));
    }
    let rows = table()
        .get(&(stat, case, m))
        .ok_or_else(|| Error::Unsupported(format!("no {} table for case {} and m = {m}", stat.code(), case.code())))?;
    let last = TABLE_SIZES.len() - 1;
    let row = |i: usize| -> Result<&Vec<f64>> {
        let r = &rows[i];
        if r.iter().any(|v| v.is_nan()) {
            return Err(Error::Unsupported(format!("incomplete {} table for case {} and m = {m}", stat.code(), case.code())));
        }
        Ok(r)
    };
    if n <= TABLE_SIZES[0] {
        return row(0).cloned();
    }
    if n >= TABLE_SIZES[last] {
        return row(last).cloned();
    }
    let i = TABLE_SIZES.iter().position(|&s| s >= n).expect("bracketed");
    let (n0, n1) = (TABLE_SIZES[i - 1] as f64, TABLE_SIZES[i] as f64);
    let w = (1.0 / n as f64 - 1.0 / n0) / (1.0 / n1 - 1.0 / n0);
    Ok(row(i - 1)?.iter().zip(row(i)?).map(|(a, b)| a + w * (b - a)).collect())
}

fn probit(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

fn norm_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

/// Asymptotic-to-finite p-value of a rank statistic with `m = d - r` directions
/// under the null and `n` effective observations. The tabulated quantiles are
/// interpolated in probit scale and extrapolated linearly beyond the table.
pub fn johansen_pvalue(statistic: f64, stat: RankStatistic, case: JohansenCase, m: usize, n: usize) -> Result<f64> {
    if !statistic.is_finite() {
        return Err(Error::Degenerate(format!("non-finite {} statistic", stat.code())));
    }
    let q = quantiles(stat, case, m, n)?;
    let z: Vec<f64> = TABLE_LEVELS.iter().map(|&p| probit(p)).collect();
    // q decreases as the level increases
    let k = q.len();
    let seg = if statistic >= q[0] {
        0
    } else if statistic <= q[k - 1] {
        k - 2
    } else {
        (0..k - 1).find(|&i| statistic <= q[i] && statistic >= q[i + 1]).expect("bracketed")
    };
    let (q0, q1) = (q[seg], q[seg + 1]);
    let zz = z[seg] + (statistic - q0) / (q1 - q0) * (z[seg + 1] - z[seg]);
    Ok(norm_cdf(zz).clamp(0.0, 1.0))
}

/// Critical value at upper-tail `level` (interpolated in probit scale).
pub fn johansen_critical_value(stat: RankStatistic, case: JohansenCase, m: usize, n: usize, level: f64) -> Result<f64> {
    if !(TABLE_LEVELS[0]..=TABLE_LEVELS[TABLE_LEVELS.len() - 1]).contains(&level) {
        return Err(Error::Unsupported(format!("level {level} is outside the tabulated range")));
    }
    let q = quantiles(stat, case, m, n)?;
    let zl = probit(level);
    let z: Vec<f64> = TABLE_LEVELS.iter().map(|&p| probit(p)).collect();
    let i = (0..z.len() - 1).find(|&i| zl >= z[i] && zl <= z[i + 1]).expect("level in range");
    Ok(q[i] + (zl - z[i]) / (z[i + 1] - z[i]) * (q[i + 1] - q[i]))
}
