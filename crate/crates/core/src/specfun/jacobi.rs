//! The explicit finite sum for the Jacobi polynomial `P^{(-k, N-k)}_{j+k}` that
//! appears in the Wu–Yang monopole harmonics.

use super::factorial::log_factorial_unchecked as lf;
use crate::error::{domain, Result};

/// Admissible `s` and the factorial arguments of one term of the sum.
#[derive(Debug, Clone, Copy)]
struct Term {
    /// power of `(1-x)/2`
    p_minus: i64,
    /// power of `(1+x)/2`
    p_plus: i64,
    negative: bool,
    log_coeff: f64,
}

fn check(n: i64, j: i64, k: i64) -> Result<()> {
    if n < 1 || j < 0 || k < -j || k > n + j {
        return domain(format!(
            "quantum numbers (N={n}, j={j}, k={k}) violate N >= 1, j >= 0, -j <= k <= N+j"
        ));
    }
    Ok(())
}

fn terms(n: i64, j: i64, k: i64) -> impl Iterator<Item = Term> {
    let prefactor = lf(j as usize) + lf((j + n) as usize);
    let s_lo = 0.max(k - n);
    let s_hi = j.min(j + k);
    (s_lo..=s_hi).map(move |s| {
        let p_minus = j + k - s;
        let log_coeff = prefactor
            - lf(s as usize)
            - lf((j - s) as usize)
            - lf((n - k + s) as usize)
            - lf(p_minus as usize);
        Term {
            p_minus,
            p_plus: s,
            negative: p_minus % 2 == 1,
            log_coeff,
        }
    })
}

/// Powers of `(1-x)/2` and `(1+x)/2` that divide every term of the sum.
pub fn common_powers(n: i64, k: i64) -> (i64, i64) {
    (k.max(0), (k - n).max(0))
}

/// `P̃_{N,j,k}(x) = j!(j+N)! Σ_s (-1)^{j+k-s} ((1-x)/2)^{j+k-s} ((1+x)/2)^s / (s!(j-s)!(N-k+s)!(j+k-s)!)`
pub fn jacobi_sum(n: i64, j: i64, k: i64, x: f64) -> Result<f64> {
    jacobi_sum_impl(n, j, k, x, (0, 0))
}

/// `P̃_{N,j,k}(x)` divided analytically by `((1-x)/2)^{max(k,0)} ((1+x)/2)^{max(k-N,0)}`.
///
/// The quotient is a polynomial of degree `j - max(0, -k, k-N)` and is finite at
/// both endpoints.
pub fn jacobi_sum_reduced(n: i64, j: i64, k: i64, x: f64) -> Result<f64> {
    jacobi_sum_impl(n, j, k, x, common_powers(n, k))
}

fn jacobi_sum_impl(n: i64, j: i64, k: i64, x: f64, shift: (i64, i64)) -> Result<f64> {
    check(n, j, k)?;
    if !(-1.0..=1.0).contains(&x) {
        return domain(format!("jacobi_sum argument {x} outside [-1, 1]"));
    }
    let minus = 0.5 * (1.0 - x);
    let plus = 0.5 * (1.0 + x);
    Ok(reduced_sum_halfangle(n, j, k, minus, plus, shift))
}

/// Sum evaluated from `(1-x)/2` and `(1+x)/2` directly so callers working in θ
/// can pass `sin²(θ/2)` and `cos²(θ/2)` without cancellation.
pub(crate) fn reduced_sum_halfangle(
    n: i64,
    j: i64,
    k: i64,
    minus: f64,
    plus: f64,
    shift: (i64, i64),
) -> f64 {
    terms(n, j, k)
        .map(|t| {
            let mag = t.log_coeff.exp()
                * minus.powi((t.p_minus - shift.0) as i32)
                * plus.powi((t.p_plus - shift.1) as i32);
            if t.negative {
                -mag
            } else {
                mag
            }
        })
        .sum()
}

/// Number of terms in the sum, i.e. admissible values of `s`.
pub fn term_count(n: i64, j: i64, k: i64) -> usize {
    terms(n, j, k).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact rational evaluation at a dyadic point, as numerator / denominator in i128.
    fn exact_sum(n: i64, j: i64, k: i64, x_num: i128, x_den: i128) -> (i128, i128) {
        fn fact(m: i64) -> i128 {
            (1..=m as i128).product::<i128>().max(1)
        }
        let mut num: i128 = 0;
        let mut den: i128 = 1;
        for s in 0..=j {
            if n - k + s < 0 || j + k - s < 0 || j - s < 0 {
                continue;
            }
            let p = j + k - s;
            // ((1-x)/2)^p ((1+x)/2)^s = (x_den - x_num)^p (x_den + x_num)^s / (2 x_den)^(p+s)
            let tn = fact(j) * fact(j + n) * (x_den - x_num).pow(p as u32) * (x_den + x_num).pow(s as u32);
            let td = fact(s) * fact(j - s) * fact(n - k + s) * fact(p) * (2 * x_den).pow((p + s) as u32);
            let tn = if p % 2 == 1 { -tn } else { tn };
            num = num * td + tn * den;
            den *= td;
            let g = gcd(num.abs(), den);
            num /= g;
            den /= g;
        }
        (num, den)
    }

    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.max(1)
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn lowest_cases() {
        // (1,0,0): single s = 0 term equal to 1
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((jacobi_sum(1, 0, 0, x).unwrap() - 1.0).abs() < 1e-15);
        }
        // (1,0,1): single term -(1-x)/2, whose reduced form is the constant -1
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((jacobi_sum(1, 0, 1, x).unwrap() + 0.5 * (1.0 - x)).abs() < 1e-15);
            assert!((jacobi_sum_reduced(1, 0, 1, x).unwrap() + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_rational_oracle() {
        for &(n, j, k) in &[(2, 1, 0), (3, 2, -1), (4, 3, 5), (6, 3, 9), (5, 2, 2), (10, 4, -4)] {
            for &(xn, xd) in &[(1i128, 1i128), (0, 1), (-1, 1), (1, 3), (-3, 4)] {
                let (num, den) = exact_sum(n, j, k, xn, xd);
                let want = num as f64 / den as f64;
                let got = jacobi_sum(n, j, k, xn as f64 / xd as f64).unwrap();
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                    "({n},{j},{k}) at {xn}/{xd}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn reduced_times_common_factor_is_full() {
        for &(n, j, k) in &[(3, 2, 2), (4, 1, 5), (2, 2, -2), (6, 3, 9)] {
            let (a, b) = common_powers(n, k);
            for x in [-0.9, -0.2, 0.4, 0.95] {
                let full = jacobi_sum(n, j, k, x).unwrap();
                let red = jacobi_sum_reduced(n, j, k, x).unwrap();
                let factor = (0.5 * (1.0 - x)).powi(a as i32) * (0.5 * (1.0 + x)).powi(b as i32);
                assert!((full - red * factor).abs() <= 1e-12 * full.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(jacobi_sum(0, 0, 0, 0.0).is_err());
        assert!(jacobi_sum(2, -1, 0, 0.0).is_err());
        assert!(jacobi_sum(2, 1, -2, 0.0).is_err());
        assert!(jacobi_sum(2, 1, 4, 0.0).is_err());
        assert!(jacobi_sum(2, 1, 0, 1.5).is_err());
    }

    #[test]
    fn recurrence_cross_check_where_alpha_is_regular() {
        // for k <= 0 the parameters alpha = -k >= 0, beta = N - k > 0 are ordinary
        // and the standard three-term recurrence applies
        fn jacobi_recurrence(nn: i64, alpha: f64, beta: f64, x: f64) -> f64 {
            let mut p0 = 1.0;
            if nn == 0 {
                return p0;
            }
            let mut p1 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
            for m in 2..=nn {
                let m = m as f64;
                let a = alpha + beta;
                let c1 = 2.0 * m * (m + a) * (2.0 * m + a - 2.0);
                let c2 = (2.0 * m + a - 1.0) * (alpha * alpha - beta * beta);
                let c3 = (2.0 * m + a - 2.0) * (2.0 * m + a - 1.0) * (2.0 * m + a);
                let c4 = 2.0 * (m + alpha - 1.0) * (m + beta - 1.0) * (2.0 * m + a);
                let p2 = ((c2 + c3 * x) * p1 - c4 * p0) / c1;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
        for &(n, j, k) in &[(2, 2, 0), (3, 2, -1), (5, 3, -2), (4, 1, 0)] {
            let nn = j + k;
            for x in [-0.8, -0.1, 0.3, 0.9] {
                let rec = jacobi_recurrence(nn, -k as f64, (n - k) as f64, x);
                let got = jacobi_sum(n, j, k, x).unwrap();
                // the explicit sum equals the Jacobi polynomial up to a k-dependent
                // constant; compare the ratio at two points
                let rec2 = jacobi_recurrence(nn, -k as f64, (n - k) as f64, 0.5);
                let got2 = jacobi_sum(n, j, k, 0.5).unwrap();
                assert!((got * rec2 - got2 * rec).abs() <= 1e-10 * (got * rec2).abs().max(1e-12));
            }
        }
    }
}
