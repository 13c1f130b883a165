use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{domain, Error, Result};

use super::torus::{End, TorusParams};

const INITIAL_SAMPLES: usize = 64;
const MAX_SAMPLES: usize = 1 << 22;
const FD_STEP: f64 = 1e-6;

/// Numerical Maslov index of the path from the central point of the `+` sheet,
/// through one fold, to the central point of the `-` sheet.
#[derive(Debug, Clone, Serialize)]
pub struct MaslovEstimate {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub eps: Vec<f64>,
    pub raw_estimates: Vec<f64>,
    pub extrapolated: f64,
    pub index: i64,
}

/// Base point of the path: `π/2` if it lies inside the band, else the midpoint.
pub fn central_point(t: &TorusParams) -> f64 {
    let margin = 1e-3 * (t.theta_max - t.theta_min);
    if FRAC_PI_2 > t.theta_min + margin && FRAC_PI_2 < t.theta_max - margin {
        FRAC_PI_2
    } else {
        t.theta_mid()
    }
}

/// `sin(x)/x`, accurate for small `x`.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// The path `s ↦ (θ(s), p_θ(s))` through the fold at `end`, with `s ∈ [-1, 1]`,
/// `θ = θ_end ± Δ s²`, and `p_θ` carrying the sign of `s` (via the `+` sheet at `s = 1`
/// for the `θ_min` fold).
struct FoldPath<'a> {
    t: &'a TorusParams,
    end: End,
    delta: f64,
}

impl FoldPath<'_> {
    fn theta(&self, s: f64) -> f64 {
        match self.end {
            End::Min => self.t.theta_min + self.delta * s * s,
            End::Max => self.t.theta_max - self.delta * s * s,
        }
    }

    fn dtheta(&self, s: f64) -> f64 {
        match self.end {
            End::Min => 2.0 * self.delta * s,
            End::Max => -2.0 * self.delta * s,
        }
    }

    /// `p_θ(s)`, written as `s · sqrt(band / s²) / sin θ` so it is analytic through `s = 0`.
    fn momentum(&self, s: f64) -> f64 {
        let t = self.t;
        let th = self.theta(s);
        let (t0, t1) = (t.theta_min, t.theta_max);
        let half_gap = 0.5 * self.delta * s * s;
        // sin(half_gap) / s²
        let near = 0.5 * self.delta * sinc(half_gap);
        let reduced = match self.end {
            End::Min => 4.0 * (0.5 * (th + t0)).sin() * near * (0.5 * (t1 + th)).sin() * (0.5 * (t1 - th)).sin(),
            End::Max => 4.0 * (0.5 * (th + t0)).sin() * (0.5 * (th - t0)).sin() * (0.5 * (t1 + th)).sin() * near,
        };
        s * (-t.c * reduced).max(0.0).sqrt() / th.sin()
    }

    fn dmomentum(&self, s: f64) -> f64 {
        (self.momentum(s + FD_STEP) - self.momentum(s - FD_STEP)) / (2.0 * FD_STEP)
    }

    /// `θ'(s) - iε p_θ'(s)` as `(re, im)`.
    fn jacobian(&self, s: f64, eps: f64) -> (f64, f64) {
        (self.dtheta(s), -eps * self.dmomentum(s))
    }
}

fn wrap(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    } else if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Unwrapped argument variation of the Jacobian along the path, divided by `π`.
/// `None` when two consecutive samples differ by more than `π/2`.
fn variation(path: &FoldPath, eps: f64, n: usize, s_end: f64) -> Option<f64> {
    let (re, im) = path.jacobian(1.0, eps);
    let mut prev = im.atan2(re);
    let mut total = 0.0;
    for i in 1..=n {
        let s = 1.0 + (s_end - 1.0) * i as f64 / n as f64;
        let (re, im) = path.jacobian(s, eps);
        let arg = im.atan2(re);
        let d = wrap(arg - prev);
        if d.abs() > FRAC_PI_2 {
            return None;
        }
        total += d;
        prev = arg;
    }
    Some(total / PI)
}

fn resolved_variation(path: &FoldPath, eps: f64, s_end: f64) -> Result<f64> {
    let mut n = INITIAL_SAMPLES;
    while n <= MAX_SAMPLES {
        if let Some(v) = variation(path, eps, n, s_end) {
            return Ok(v);
        }
        n *= 2;
    }
    Err(Error::Resolution(format!(
        "argument unwrapping still jumps by more than π/2 with {MAX_SAMPLES} samples at ε = {eps}"
    )))
}

/// Polynomial (Neville) extrapolation of `(x_i, y_i)` to `x = 0`.
fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            p[i] = (xb * p[i] - xa * p[i + 1]) / (xb - xa);
        }
    }
    p[0]
}

fn validate_eps(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return domain("ε list is empty");
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return domain("every ε must be finite and positive");
    }
    for (i, a) in eps_list.iter().enumerate() {
        if eps_list[i + 1..].contains(a) {
            return domain(format!("ε = {a} repeated"));
        }
    }
    Ok(())
}

fn path_for(t: &TorusParams, end: End) -> Result<FoldPath<'_>> {
    t.require_fold(end)?;
    let delta = (central_point(t) - t.end_theta(end)).abs();
    Ok(FoldPath { t, end, delta })
}

/// Maslov index of the path `σ₊(central) → fold at `end` → σ₋(central)`.
///
/// For each `ε` the continuous argument of `θ'(s) - iε p_θ'(s)` is followed
/// along the path; the raw estimates `Δarg/π` are extrapolated to `ε → 0` and
/// rounded. Through `θ_min` the index is `-1`; through `θ_max` it is `+1`,
/// the two routes differing by the Maslov number `2` of the θ-cycle.
pub fn maslov_index_numeric(t: &TorusParams, end: End, eps_list: &[f64]) -> Result<MaslovEstimate> {
    validate_eps(eps_list)?;
    let path = path_for(t, end)?;
    let raw = eps_list
        .iter()
        .map(|&eps| resolved_variation(&path, eps, -1.0))
        .collect::<Result<Vec<_>>>()?;
    let extrapolated = extrapolate_to_zero(eps_list, &raw);
    Ok(MaslovEstimate {
        e: t.e,
        p: t.p,
        eps: eps_list.to_vec(),
        raw_estimates: raw,
        extrapolated,
        index: extrapolated.round() as i64,
    })
}

/// Index of a path that stays on the `+` sheet, from the central point to
/// `s_stop` (fraction of the way towards the `θ_min` fold, exclusive).
pub fn plus_sheet_index(t: &TorusParams, s_stop: f64, eps: f64) -> Result<i64> {
    if !(0.0 < s_stop && s_stop < 1.0) {
        return domain(format!("s_stop = {s_stop} must lie in (0, 1)"));
    }
    validate_eps(&[eps])?;
    let path = path_for(t, End::Min)?;
    Ok(resolved_variation(&path, eps, s_stop)?.round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::torus::{make_torus, momenta, Branch};

    #[test]
    fn path_momentum_matches_torus() {
        let t = make_torus(1.3, 0.2).unwrap();
        for end in [End::Min, End::Max] {
            let path = path_for(&t, end).unwrap();
            for s in [0.9, 0.3, 1e-3, -0.4] {
                let th = path.theta(s);
                let (pt, _) = momenta(&t, th, Branch::Plus).unwrap();
                assert!((path.momentum(s).abs() - pt).abs() < 1e-12 * (1.0 + pt));
            }
            assert!(path.momentum(0.5) > 0.0 && path.momentum(-0.5) < 0.0);
        }
    }

    #[test]
    fn symmetric_torus_index() {
        let t = make_torus(1.0, 0.0).unwrap();
        let est = maslov_index_numeric(&t, End::Min, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        assert_eq!(est.index, -1);
        assert!((est.raw_estimates[2] + 1.0).abs() < 0.1);
        assert!((est.extrapolated + 1.0).abs() < 1e-3);
        let est = maslov_index_numeric(&t, End::Max, &[1e-2, 5e-3]).unwrap();
        assert_eq!(est.index, 1);
    }

    #[test]
    fn plus_sheet_alone_is_zero() {
        let t = make_torus(2.0, 0.3).unwrap();
        assert_eq!(plus_sheet_index(&t, 0.1, 1e-3).unwrap(), 0);
    }

    #[test]
    fn refusals() {
        let t = make_torus(0.75, -0.5).unwrap();
        assert!(matches!(
            maslov_index_numeric(&t, End::Min, &[1e-2]),
            Err(Error::Degenerate(_))
        ));
        let t = make_torus(1.0, 0.0).unwrap();
        assert!(maslov_index_numeric(&t, End::Min, &[]).is_err());
        assert!(maslov_index_numeric(&t, End::Min, &[1e-2, 1e-2]).is_err());
        assert!(maslov_index_numeric(&t, End::Min, &[-1e-2]).is_err());
    }

    #[test]
    fn neville_is_exact_on_lines() {
        let xs = [0.4, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((extrapolate_to_zero(&xs, &ys) - 3.0).abs() < 1e-14);
    }
}
