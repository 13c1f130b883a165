//! Airy function `Ai` on the real line.
//!
//! Three representations are stitched together:
//! * Maclaurin series for `|x| <= SERIES_RADIUS`,
//! * Taylor expansions about tabulated nodes on `SERIES_RADIUS < |x| < ASYMPTOTIC_RADIUS`,
//!   the table itself being generated by Taylor-stepping inward from the asymptotic values,
//! * the large-argument asymptotic expansions (DLMF 9.7.5, 9.7.9) beyond.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use crate::error::{domain, Result};

/// `Ai(0) = 3^(-2/3) / Γ(2/3)`
#[allow(clippy::excessive_precision)]
pub const AI_ZERO: f64 = 0.355_028_053_887_817_239_260;
/// `-Ai'(0) = 3^(-1/3) / Γ(1/3)`
#[allow(clippy::excessive_precision)]
const AIP_ZERO_NEG: f64 = 0.258_819_403_792_806_798_405;

pub(crate) const SERIES_RADIUS: f64 = 3.0;
pub(crate) const ASYMPTOTIC_RADIUS: f64 = 8.0;
const NODE_STEP: f64 = 0.25;
/// Tables extend half a step into the series disc so the two overlap.
const TABLE_INNER: f64 = 2.5;

/// `Ai(x)` with absolute error below `1e-10` on `|x| <= 30`.
pub fn airy_ai(x: f64) -> Result<f64> {
    airy_ai_with_derivative(x).map(|(ai, _)| ai)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai_with_derivative(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return domain(format!("Airy function of non-finite argument {x}"));
    }
    let ax = x.abs();
    Ok(if ax <= SERIES_RADIUS {
        maclaurin(x)
    } else if ax < ASYMPTOTIC_RADIUS {
        tabulated(x)
    } else {
        asymptotic(x)
    })
}

pub(crate) fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ 3^k (1/3)_k x^{3k}/(3k)!,  g = Σ 3^k (2/3)_k x^{3k+1}/(3k+1)!
    let mut f_term = 1.0;
    let mut g_term = x;
    let mut f = f_term;
    let mut g = g_term;
    // derivative terms: d/dx of x^{3k} and x^{3k+1}
    let mut df = 0.0;
    let mut dg = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        f_term *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        g_term *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += f_term;
        g += g_term;
        if x != 0.0 {
            df += 3.0 * kf * f_term / x;
            dg += (3.0 * kf + 1.0) * g_term / x;
        }
        if f_term.abs() < 1e-18 * f.abs() && g_term.abs() < 1e-18 * g.abs().max(1e-300) {
            break;
        }
    }
    (AI_ZERO * f - AIP_ZERO_NEG * g, AI_ZERO * df - AIP_ZERO_NEG * dg)
}

/// Taylor expansion of the solution of `y'' = x y` about `x0`.
fn taylor(x0: f64, y: f64, dy: f64, h: f64) -> (f64, f64) {
    // c_{n+2} = (x0 c_n + c_{n-1}) / ((n+1)(n+2))
    let mut c_prev = 0.0; // c_{n-1}
    let mut c0 = y;
    let mut c1 = dy;
    let mut value = c0 + c1 * h;
    let mut deriv = c1;
    let mut hp = h; // h^{n-1} for the derivative sum at n = 2
    let mut n = 0usize;
    let scale = y.abs().max(dy.abs()).max(1e-300);
    loop {
        let c2 = (x0 * c0 + c_prev) / (((n + 1) * (n + 2)) as f64);
        let p = n + 2;
        deriv += p as f64 * c2 * hp;
        hp *= h;
        let term = c2 * hp;
        value += term;
        if n > 4 && term.abs() < 1e-19 * scale && c2.abs() * hp.abs() < 1e-19 * scale {
            break;
        }
        if n > 120 {
            break;
        }
        c_prev = c0;
        c0 = c1;
        c1 = c2;
        n += 1;
    }
    (value, deriv)
}

/// Coefficients `u_k` of the large-argument expansions.
fn u_coefficients() -> &'static [f64] {
    static U: OnceLock<Vec<f64>> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = vec![1.0_f64];
        for k in 1..60 {
            let kf = k as f64;
            let prev = u[k - 1];
            u.push(
                prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                    / ((2.0 * kf - 1.0) * 216.0 * kf),
            );
        }
        u
    })
}

fn v_coefficient(k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u_coefficients()[k]
}

pub(crate) fn asymptotic(x: f64) -> (f64, f64) {
    let u = u_coefficients();
    let t = x.abs();
    let zeta = 2.0 / 3.0 * t * t.sqrt();
    let q = t.powf(0.25);
    if x > 0.0 {
        let mut sum_u = 0.0;
        let mut sum_v = 0.0;
        let mut zp = 1.0;
        let mut last = f64::INFINITY;
        for (k, uk) in u.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let tu = sign * uk * zp;
            if tu.abs() > last {
                break;
            }
            last = tu.abs();
            sum_u += tu;
            sum_v += sign * v_coefficient(k) * zp;
            if tu.abs() < 1e-17 {
                break;
            }
            zp /= zeta;
        }
        let e = (-zeta).exp() / (2.0 * PI.sqrt());
        (e / q * sum_u, -e * q * sum_v)
    } else {
        // even and odd parts of the expansion
        let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
        let mut zp = 1.0;
        let mut last = f64::INFINITY;
        for (k, uk) in u.iter().enumerate() {
            let tu = uk * zp;
            if tu.abs() > last {
                break;
            }
            last = tu.abs();
            let tv = v_coefficient(k) * zp;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                pu += sign * tu;
                pv += sign * tv;
            } else {
                qu += sign * tu;
                qv += sign * tv;
            }
            if tu.abs() < 1e-17 {
                break;
            }
            zp /= zeta;
        }
        let phase = zeta - FRAC_PI_4;
        let (s, c) = phase.sin_cos();
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        let ai = inv_sqrt_pi / q * (c * pu + s * qu);
        let aip = inv_sqrt_pi * q * (s * pv - c * qv);
        (ai, aip)
    }
}

struct Table {
    /// node `i` sits at `TABLE_INNER + i * NODE_STEP` (mirrored for the negative side)
    positive: Vec<(f64, f64)>,
    negative: Vec<(f64, f64)>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let count = ((ASYMPTOTIC_RADIUS - TABLE_INNER) / NODE_STEP).round() as usize;
        let build = |sign: f64| {
            let mut nodes = vec![(0.0, 0.0); count + 1];
            let mut x = sign * ASYMPTOTIC_RADIUS;
            let (mut y, mut dy) = asymptotic(x);
            nodes[count] = (y, dy);
            for i in (0..count).rev() {
                let h = -sign * NODE_STEP;
                // two half steps per node keeps the truncation far below rounding
                for _ in 0..2 {
                    let (ny, ndy) = taylor(x, y, dy, 0.5 * h);
                    x += 0.5 * h;
                    y = ny;
                    dy = ndy;
                }
                nodes[i] = (y, dy);
            }
            nodes
        };
        Table {
            positive: build(1.0),
            negative: build(-1.0),
        }
    })
}

pub(crate) fn tabulated(x: f64) -> (f64, f64) {
    let t = table();
    let ax = x.abs();
    let i = ((ax - TABLE_INNER) / NODE_STEP).round() as usize;
    let nodes = if x > 0.0 { &t.positive } else { &t.negative };
    let i = i.min(nodes.len() - 1);
    let x0 = x.signum() * (TABLE_INNER + i as f64 * NODE_STEP);
    let (y, dy) = nodes[i];
    taylor(x0, y, dy, x - x0)
}
