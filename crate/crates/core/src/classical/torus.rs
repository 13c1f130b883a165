use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specfun::integrate_adaptive;

/// Field strength used by every quasi-classical construction.
pub const B_WKB: f64 = 0.5;

/// Tolerance on `|z| - 1` for classifying a turning point as a pole.
pub const POLE_CLASSIFY_TOL: f64 = 1e-10;

const ACTION_ABS_TOL: f64 = 1e-14;
const ACTION_REL_TOL: f64 = 1e-14;
const MAX_PANELS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EndKind {
    Fold,
    Pole,
}

/// One of the two ends of the band `[θ_min, θ_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Min,
    Max,
}

/// Sheet of the torus over the band: `p_θ = ±P_θ(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Invariant torus `Λ(E, P)` of the magnetic geodesic flow at `B = 1/2`.
///
/// Over the band `θ_min <= θ <= θ_max` the torus is the graph of
/// `p_θ = ±sqrt(a + b cos θ + c cos² θ) / sin θ`, `p_φ = P + cos θ / 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusParams {
    pub e: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub end_kind_min: EndKind,
    pub end_kind_max: EndKind,
    /// `sqrt(b² - 4ac) = |c| (z_hi - z_lo)`
    pub discriminant_root: f64,
    /// `I(θ_max)`, the action accumulated across the whole band
    pub action_total: f64,
}

/// Builds `Λ(E, P)`, computing the turning points directly from `(a, b, c)`.
pub fn make_torus(e: f64, p: f64) -> Result<TorusParams> {
    if !(e.is_finite() && e > 0.0) {
        return domain(format!("torus energy E = {e} must be finite and positive"));
    }
    if !p.is_finite() {
        return domain(format!("torus momentum P = {p} is not finite"));
    }
    let bound = e + B_WKB * B_WKB;
    if p * p >= bound {
        return Err(Error::EmptyTorus {
            p_sq: p * p,
            bound,
        });
    }
    let a = e - p * p;
    let b = -p;
    let c = -bound;
    let disc = b * b - 4.0 * a * c;
    let root = disc.sqrt();
    // cancellation-free quadratic roots
    let q = -0.5 * (b + b.signum() * root);
    let (r1, r2) = (q / c, a / q);
    let (mut z_lo, mut z_hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    let classify = |z: &mut f64| -> Result<EndKind> {
        if (z.abs() - 1.0).abs() <= POLE_CLASSIFY_TOL {
            *z = z.signum();
            Ok(EndKind::Pole)
        } else if z.abs() > 1.0 {
            Err(Error::Numerical(format!("turning point z = {z} outside [-1, 1]")))
        } else {
            Ok(EndKind::Fold)
        }
    };
    let end_kind_max = classify(&mut z_lo)?;
    let end_kind_min = classify(&mut z_hi)?;
    let mut torus = TorusParams {
        e,
        p,
        a,
        b,
        c,
        z_lo,
        z_hi,
        theta_min: z_hi.acos(),
        theta_max: z_lo.acos(),
        end_kind_min,
        end_kind_max,
        discriminant_root: root,
        action_total: 0.0,
    };
    let mid = torus.theta_mid();
    torus.action_total = torus.action_from_end(End::Min, mid)? + torus.action_from_end(End::Max, mid)?;
    Ok(torus)
}

impl TorusParams {
    pub fn theta_mid(&self) -> f64 {
        0.5 * (self.theta_min + self.theta_max)
    }

    pub fn end_theta(&self, end: End) -> f64 {
        match end {
            End::Min => self.theta_min,
            End::Max => self.theta_max,
        }
    }

    pub fn end_kind(&self, end: End) -> EndKind {
        match end {
            End::Min => self.end_kind_min,
            End::Max => self.end_kind_max,
        }
    }

    /// A torus with a pole-touching end (`P = ±1/2`).
    pub fn is_degenerate(&self) -> bool {
        self.end_kind_min == EndKind::Pole || self.end_kind_max == EndKind::Pole
    }

    /// `a + b z + c z²` as printed.
    pub fn quadratic(&self, z: f64) -> f64 {
        self.a + self.b * z + self.c * z * z
    }

    /// `a + b cos θ + c cos² θ`, evaluated in the factored form
    /// `|c| (cos θ_min - cos θ)(cos θ - cos θ_max)` with half-angle products so
    /// that it stays accurate next to the turning points.
    pub fn band(&self, theta: f64) -> f64 {
        let (t0, t1) = (self.theta_min, self.theta_max);
        let upper = 2.0 * (0.5 * (theta + t0)).sin() * (0.5 * (theta - t0)).sin();
        let lower = 2.0 * (0.5 * (t1 + theta)).sin() * (0.5 * (t1 - theta)).sin();
        -self.c * upper * lower
    }

    /// `band` at distance `d >= 0` from `end` towards the interior, without
    /// forming `θ_end ± d` for the factor that vanishes at the end.
    pub fn band_from_end(&self, end: End, d: f64) -> f64 {
        let (t0, t1) = (self.theta_min, self.theta_max);
        let (upper, lower) = match end {
            End::Min => {
                let th = t0 + d;
                (
                    2.0 * (0.5 * (th + t0)).sin() * (0.5 * d).sin(),
                    2.0 * (0.5 * (t1 + th)).sin() * (0.5 * (t1 - th)).sin(),
                )
            }
            End::Max => {
                let th = t1 - d;
                (
                    2.0 * (0.5 * (th + t0)).sin() * (0.5 * (th - t0)).sin(),
                    2.0 * (0.5 * (t1 + th)).sin() * (0.5 * d).sin(),
                )
            }
        };
        -self.c * upper * lower
    }

    /// `κ = sqrt(D / sin θ_end)`, the fold coefficient in `p_θ ≈ κ sqrt(|θ - θ_end|)`.
    pub fn fold_kappa(&self, end: End) -> Result<f64> {
        self.require_fold(end)?;
        Ok((self.discriminant_root / self.end_theta(end).sin()).sqrt())
    }

    pub fn require_fold(&self, end: End) -> Result<()> {
        match self.end_kind(end) {
            EndKind::Fold => Ok(()),
            EndKind::Pole => Err(Error::Degenerate(format!(
                "the {end:?} end of Λ(E={}, P={}) touches a pole",
                self.e, self.p
            ))),
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_min && theta <= self.theta_max
    }

    fn check_band(&self, theta: f64) -> Result<()> {
        if !self.contains(theta) {
            return domain(format!(
                "theta = {theta} outside the band [{}, {}]",
                self.theta_min, self.theta_max
            ));
        }
        Ok(())
    }

    /// `|p_θ|` on the band.
    fn p_theta_abs(&self, theta: f64) -> f64 {
        let band = self.band(theta).max(0.0);
        if band == 0.0 {
            return 0.0;
        }
        band.sqrt() / theta.sin()
    }

    /// `∫` of `|p_θ|` from the `end` turning point to `theta`, using the
    /// substitution `θ = θ_end ± u²` that removes the square-root endpoint.
    fn action_from_end(&self, end: End, theta: f64) -> Result<f64> {
        let t_end = self.end_theta(end);
        let span = (theta - t_end).abs();
        if span == 0.0 {
            return Ok(0.0);
        }
        let dir = match end {
            End::Min => 1.0,
            End::Max => -1.0,
        };
        let integrand = |u: f64| {
            let d = u * u;
            let band = self.band_from_end(end, d).max(0.0);
            2.0 * u * band.sqrt() / (t_end + dir * d).sin()
        };
        integrate_adaptive(integrand, 0.0, span.sqrt(), ACTION_ABS_TOL, ACTION_REL_TOL, MAX_PANELS)
            .map(|r| r.value)
    }

    /// `∫ sqrt(-band)/sin θ` from the `end` fold outwards to `theta`, the modulus
    /// of the imaginary action in the classically forbidden region.
    pub fn evanescent_action(&self, end: End, theta: f64) -> Result<f64> {
        self.require_fold(end)?;
        let t_end = self.end_theta(end);
        let dir = match end {
            End::Min => -1.0,
            End::Max => 1.0,
        };
        let span = dir * (theta - t_end);
        if !(span >= 0.0 && theta > 0.0 && theta < PI) {
            return domain(format!("theta = {theta} is not beyond the {end:?} fold at {t_end}"));
        }
        if span == 0.0 {
            return Ok(0.0);
        }
        let integrand = |u: f64| {
            let d = u * u;
            let band = self.band_from_end(end, -d).min(0.0);
            2.0 * u * (-band).sqrt() / (t_end + dir * d).sin()
        };
        integrate_adaptive(integrand, 0.0, span.sqrt(), ACTION_ABS_TOL, ACTION_REL_TOL, MAX_PANELS)
            .map(|r| r.value)
    }

    /// Action measured from the `end` turning point (always non-negative).
    pub fn action_from(&self, end: End, theta: f64) -> Result<f64> {
        let from_min = action_i(self, theta)?;
        Ok(match end {
            End::Min => from_min,
            End::Max => self.action_total - from_min,
        })
    }
}

/// `(p_θ, p_φ)` on the requested branch.
pub fn momenta(t: &TorusParams, theta: f64, branch: Branch) -> Result<(f64, f64)> {
    t.check_band(theta)?;
    Ok((
        branch.sign() * t.p_theta_abs(theta),
        t.p + B_WKB * theta.cos(),
    ))
}

/// `I(θ) = ∫_{θ_min}^{θ} sqrt(a + b cos t + c cos² t) / sin t dt`, so `I(θ_min) = 0`.
pub fn action_i(t: &TorusParams, theta: f64) -> Result<f64> {
    t.check_band(theta)?;
    let mid = t.theta_mid();
    if theta <= mid {
        t.action_from_end(End::Min, theta)
    } else {
        Ok(t.action_total - t.action_from_end(End::Max, theta)?)
    }
}

/// Margin under which printed arcsin arguments are clamped to `[-1, 1]`.
pub const ARCSIN_CLAMP_TOL: f64 = 1e-9;

fn arcsin_checked(x: f64, what: &str) -> Result<f64> {
    if x.abs() > 1.0 + ARCSIN_CLAMP_TOL || !x.is_finite() {
        return Err(Error::Inconsistency(format!(
            "arcsin argument {what} = {x} leaves [-1, 1]"
        )));
    }
    Ok(x.clamp(-1.0, 1.0).asin())
}

/// The three arcsin arguments of the printed antiderivative.
fn closed_form_arguments(t: &TorusParams, z: f64) -> [f64; 3] {
    let (a, b, c) = (t.a, t.b, t.c);
    let sd = t.discriminant_root;
    [
        (2.0 * a + b + (b + 2.0 * c) * z) / ((z - 1.0) * sd),
        (2.0 * a - b + (b - 2.0 * c) * z) / ((z + 1.0) * sd),
        (2.0 * c * z + b) / sd,
    ]
}

fn closed_form_coefficients(t: &TorusParams) -> [f64; 3] {
    [
        0.5 * (t.p + 0.5).abs(),
        0.5 * (t.p - 0.5).abs(),
        (t.e + 0.25).sqrt(),
    ]
}

/// The printed closed form of `I(θ)`, shifted to vanish at `θ_min`.
///
/// At the fold each arcsin argument tends to `±1`; the shift uses those exact
/// limits rather than evaluating the arcsines where they are ill-conditioned.
pub fn action_i_closed_form(t: &TorusParams, theta: f64) -> Result<f64> {
    if t.is_degenerate() {
        return Err(Error::Degenerate(
            "closed-form action needs fold turning points at both ends".into(),
        ));
    }
    if !(theta > t.theta_min && theta < t.theta_max) {
        return domain(format!(
            "closed-form action needs theta strictly inside ({}, {}), got {theta}",
            t.theta_min, t.theta_max
        ));
    }
    let coeffs = closed_form_coefficients(t);
    let args = closed_form_arguments(t, theta.cos());
    let limits = closed_form_arguments(t, t.z_hi);
    let mut value = 0.0;
    for (i, ((&k, &arg), &lim)) in coeffs.iter().zip(&args).zip(&limits).enumerate() {
        if (lim.abs() - 1.0).abs() > 1e-6 {
            return Err(Error::Inconsistency(format!(
                "arcsin argument {i} tends to {lim} at the fold instead of ±1"
            )));
        }
        value += k * (arcsin_checked(arg, &format!("#{i}"))? - lim.signum() * FRAC_PI_2);
    }
    Ok(value)
}

/// `sin θ / sqrt(a + b cos θ + c cos² θ)`, the density of the invariant measure
/// on one sheet with respect to `dθ dφ`.
pub fn invariant_density(t: &TorusParams, theta: f64) -> Result<f64> {
    t.check_band(theta)?;
    let band = t.band(theta);
    if band <= 0.0 {
        return Err(Error::Divergence(theta));
    }
    Ok(theta.sin() / band.sqrt())
}

/// `μ(Λ) = 2 · 2π · ∫ dθ / P_θ(θ)` (two sheets, full φ-circle), with the fold
/// singularities removed by the square-root substitution.
pub fn invariant_measure_total(t: &TorusParams) -> Result<f64> {
    let mid = t.theta_mid();
    let mut total = 0.0;
    for (end, dir) in [(End::Min, 1.0), (End::Max, -1.0)] {
        let t_end = t.end_theta(end);
        let span = (mid - t_end).abs();
        let integrand = |u: f64| {
            if u == 0.0 {
                // limit of 2u sin θ / sqrt(band) at the turning point
                return match t.end_kind(end) {
                    EndKind::Fold => 2.0 * t_end.sin().sqrt() / t.discriminant_root.sqrt(),
                    EndKind::Pole => 0.0,
                };
            }
            let d = u * u;
            let theta = t_end + dir * d;
            let band = t.band_from_end(end, d);
            if band <= 0.0 {
                return 0.0;
            }
            2.0 * u * theta.sin() / band.sqrt()
        };
        total += integrate_adaptive(integrand, 0.0, span.sqrt(), 1e-14, 1e-14, MAX_PANELS)?.value;
    }
    Ok(4.0 * PI * total)
}

/// The printed simplifications for the turning data next to the values
/// computed from `(a, b, c)`.
#[derive(Debug, Clone, Serialize)]
pub struct PrintedFormCheck {
    /// printed `(-P/2 ∓ sqrt(E² + E(1/4 - P²))) / (E + 1/4)`, upper then lower sign
    pub z_printed: [f64; 2],
    /// `(-b ∓ sqrt(Δ)) / (2c)`, upper then lower sign
    pub z_from_discriminant: [f64; 2],
    pub z_computed: [f64; 2],
    /// printed `(P sqrt(E) ∓ sqrt(E + 1/4 - P²)/2) / (E + 1/4)`
    pub sin_printed: [f64; 2],
    pub sin_computed: [f64; 2],
    /// printed `sqrt(E² + E(1/4 - P²))`
    pub discriminant_printed: f64,
    pub discriminant_computed: f64,
}

pub fn printed_forms(t: &TorusParams) -> PrintedFormCheck {
    let (e, p) = (t.e, t.p);
    let r = (e * e + e * (0.25 - p * p)).sqrt();
    let sd = t.discriminant_root;
    let s = (e + 0.25 - p * p).sqrt();
    PrintedFormCheck {
        z_printed: [(-0.5 * p - r) / (e + 0.25), (-0.5 * p + r) / (e + 0.25)],
        z_from_discriminant: [(-t.b - sd) / (2.0 * t.c), (-t.b + sd) / (2.0 * t.c)],
        z_computed: [t.z_lo, t.z_hi],
        sin_printed: [
            (p * e.sqrt() - 0.5 * s) / (e + 0.25),
            (p * e.sqrt() + 0.5 * s) / (e + 0.25),
        ],
        sin_computed: [t.theta_max.sin(), t.theta_min.sin()],
        discriminant_printed: r,
        discriminant_computed: sd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_torus() {
        let t = make_torus(1.0, 0.0).unwrap();
        assert_eq!((t.a, t.b, t.c), (1.0, 0.0, -1.25));
        let z = 2.0 / 5f64.sqrt();
        assert!((t.z_hi - z).abs() < 1e-15 && (t.z_lo + z).abs() < 1e-15);
        assert!((t.theta_min - 0.463_647_609_000_806_1).abs() < 1e-12);
        assert!((t.theta_max - 2.677_945_044_588_987).abs() < 1e-12);
        assert_eq!((t.end_kind_min, t.end_kind_max), (EndKind::Fold, EndKind::Fold));
        assert!((t.discriminant_root - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn pole_touching_torus() {
        let t = make_torus(0.75, -0.5).unwrap();
        assert_eq!(t.z_hi, 1.0);
        assert!((t.z_lo + 0.5).abs() < 1e-15);
        assert!((t.theta_max - 2.0 * PI / 3.0).abs() < 1e-14);
        assert_eq!(t.end_kind_min, EndKind::Pole);
        assert_eq!(t.end_kind_max, EndKind::Fold);
        assert!(t.is_degenerate());
        assert!(t.fold_kappa(End::Min).is_err());
    }

    #[test]
    fn empty_and_invalid() {
        assert!(matches!(
            make_torus(1.0, 5f64.sqrt() / 2.0),
            Err(Error::EmptyTorus { .. })
        ));
        assert!(matches!(make_torus(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(make_torus(-1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn momenta_examples() {
        let t = make_torus(1.0, 0.0).unwrap();
        let (pt, pp) = momenta(&t, FRAC_PI_2, Branch::Plus).unwrap();
        assert!((pt - 1.0).abs() < 1e-14 && pp.abs() < 1e-16);
        let (pt, pp) = momenta(&t, t.theta_min, Branch::Minus).unwrap();
        assert!(pt.abs() < 1e-7);
        assert!((pp - 0.5 * t.theta_min.cos()).abs() < 1e-16);
        let (_, pp) = momenta(&t, PI / 3.0, Branch::Plus).unwrap();
        assert!((pp - 0.25).abs() < 1e-15);
        assert!(momenta(&t, 0.1, Branch::Plus).is_err());
    }

    #[test]
    fn action_basics() {
        let t = make_torus(1.0, 0.0).unwrap();
        assert_eq!(action_i(&t, t.theta_min).unwrap(), 0.0);
        let h = 1e-5;
        let d = (action_i(&t, FRAC_PI_2 + h).unwrap() - action_i(&t, FRAC_PI_2 - h).unwrap())
            / (2.0 * h);
        assert!((d - 1.0).abs() < 1e-6);
        assert!(action_i(&t, 0.1).is_err());
    }

    #[test]
    fn density_behaviour() {
        let t = make_torus(1.0, 0.0).unwrap();
        assert!((invariant_density(&t, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            invariant_density(&t, t.theta_min),
            Err(Error::Divergence(_))
        ));
        // (θ - θ_min)^{-1/2} blow-up
        let probe = |d: f64| invariant_density(&t, t.theta_min + d).unwrap() * d.sqrt();
        assert!((probe(1e-8) - probe(1e-10)).abs() < 1e-3 * probe(1e-10));
    }

    #[test]
    fn closed_form_refuses_degenerate_and_ends() {
        let t = make_torus(0.75, -0.5).unwrap();
        assert!(matches!(action_i_closed_form(&t, 1.0), Err(Error::Degenerate(_))));
        let t = make_torus(1.0, 0.0).unwrap();
        assert!(action_i_closed_form(&t, t.theta_min).is_err());
        assert!(action_i_closed_form(&t, t.theta_min + 1e-12).unwrap().abs() < 1e-8);
    }

    #[test]
    fn printed_forms_discrepancies() {
        let t = make_torus(1.0, 0.0).unwrap();
        let chk = printed_forms(&t);
        // explicit printed roots agree with the computed ones as a set
        let mut zp = chk.z_printed;
        zp.sort_by(f64::total_cmp);
        assert!((zp[0] - t.z_lo).abs() < 1e-14 && (zp[1] - t.z_hi).abs() < 1e-14);
        // ... but the (-b ∓ √Δ)/(2c) form assigns the opposite sign to each label
        assert!((chk.z_from_discriminant[0] - chk.z_printed[1]).abs() < 1e-14);
        // printed √Δ is half of the true discriminant root
        assert!((2.0 * chk.discriminant_printed - chk.discriminant_computed).abs() < 1e-14);
        // printed sin θ is negative for one root at P = 0
        assert!(chk.sin_printed[0] < 0.0);
        assert!(chk.sin_computed.iter().all(|&s| s > 0.0));
    }
}
