use std::sync::OnceLock;

use crate::error::{domain, Result};

/// Largest `n` whose factorial is finite in `f64`.
const TABLE_MAX: usize = 170;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(TABLE_MAX + 1);
        let mut prod = 1.0_f64;
        out.push(0.0);
        for n in 1..=TABLE_MAX {
            prod *= n as f64;
            out.push(prod.ln());
        }
        out
    })
}

/// `ln(n!)`.
///
/// Exact products up to `170!`, Stirling series beyond.
pub fn log_factorial(n: i64) -> Result<f64> {
    if n < 0 {
        return domain(format!("log_factorial of negative integer {n}"));
    }
    Ok(log_factorial_unchecked(n as usize))
}

pub(crate) fn log_factorial_unchecked(n: usize) -> f64 {
    if n <= TABLE_MAX {
        return table()[n];
    }
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // ln Γ(x) for x > 170
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}
