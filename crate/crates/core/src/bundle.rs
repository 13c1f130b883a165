//! Two-chart model of the line bundle `L^N` over the sphere.
//!
//! Chart `U1` excludes the south pole, chart `U2` the north pole. Fibre
//! coordinates are related by the clutching function `e^{-iNφ}`, so a section
//! that reads `Θ(θ) e^{i m1 φ}` on `U1` reads `Θ(θ) e^{i (m1 - N) φ}` on `U2`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::QuadratureRule;

/// Default half-width of the excluded polar caps.
pub const POLE_GUARD: f64 = 1e-3;
/// Grid points with `sin θ` below this are rejected by the Laplacian.
pub const MIN_SIN_THETA: f64 = 1e-8;
/// Largest finite-difference step used by [`apply_laplacian`].
pub const MAX_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    U1,
    U2,
}

impl Chart {
    pub fn as_str(self) -> &'static str {
        match self {
            Chart::U1 => "u1",
            Chart::U2 => "u2",
        }
    }
}

impl std::str::FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Ok(Chart::U1),
            "u2" => Ok(Chart::U2),
            other => domain(format!("unknown chart '{other}' (expected u1 or u2)")),
        }
    }
}

/// The bundle `L^N` with Chern number `N` and field strength `B = N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonopoleBundle {
    degree: i64,
}

impl MonopoleBundle {
    pub fn new(degree: i64) -> Self {
        Self { degree }
    }

    /// Bundle for a half-integer field strength; fails unless `2B` is an integer.
    pub fn from_field_strength(b: Ratio<i64>) -> Result<Self> {
        let twice = b * 2;
        if !twice.is_integer() {
            return domain(format!("field strength {b} violates 2B ∈ Z"));
        }
        Ok(Self::new(twice.to_integer()))
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn field_strength(&self) -> Ratio<i64> {
        Ratio::new(self.degree, 2)
    }

    pub fn b(&self) -> f64 {
        0.5 * self.degree as f64
    }

    pub fn conjugate(&self) -> Self {
        Self::new(-self.degree)
    }
}

/// Coefficient of `dφ` in the chart potential:
/// `A1 = B(1 - cos θ)`, `A2 = -B(1 + cos θ)`.
pub fn vector_potential(chart: Chart, b: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return domain(format!("theta = {theta} outside (0, π)"));
    }
    Ok(match chart {
        Chart::U1 => b * (1.0 - theta.cos()),
        Chart::U2 => -b * (1.0 + theta.cos()),
    })
}

pub type ProfileFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// θ-dependence of a single-mode section.
#[derive(Clone)]
pub enum Profile {
    Function(ProfileFn),
    Sampled {
        theta: Vec<f64>,
        values: Vec<Complex64>,
    },
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Function(_) => f.write_str("Profile::Function(..)"),
            Profile::Sampled { theta, .. } => {
                write!(f, "Profile::Sampled({} points)", theta.len())
            }
        }
    }
}

/// A section of `L^N` consisting of one Fourier mode per chart.
///
/// Only the `U1` index is stored; the `U2` index follows from the clutching
/// rule, so sections violating it cannot be built.
#[derive(Debug, Clone)]
pub struct Section {
    degree: i64,
    m1: i64,
    profile: Profile,
}

impl Section {
    pub fn new<F>(degree: i64, m1: i64, profile: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            degree,
            m1,
            profile: Profile::Function(Arc::new(profile)),
        }
    }

    pub fn from_profile(degree: i64, m1: i64, profile: Profile) -> Self {
        Self {
            degree,
            m1,
            profile,
        }
    }

    /// Real profile convenience constructor.
    pub fn real<F>(degree: i64, m1: i64, profile: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(degree, m1, move |t| Complex64::new(profile(t), 0.0))
    }

    pub fn sampled(degree: i64, m1: i64, theta: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if theta.len() != values.len() {
            return domain(format!(
                "sampled section has {} angles but {} values",
                theta.len(),
                values.len()
            ));
        }
        Ok(Self::from_profile(
            degree,
            m1,
            Profile::Sampled { theta, values },
        ))
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn bundle(&self) -> MonopoleBundle {
        MonopoleBundle::new(self.degree)
    }

    pub fn m1(&self) -> i64 {
        self.m1
    }

    pub fn m2(&self) -> i64 {
        self.m1 - self.degree
    }

    pub fn fourier_index(&self, chart: Chart) -> i64 {
        match chart {
            Chart::U1 => self.m1,
            Chart::U2 => self.m2(),
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// `Θ(θ)`; sampled profiles only answer at their own nodes.
    pub fn profile_at(&self, theta: f64) -> Result<Complex64> {
        match &self.profile {
            Profile::Function(f) => Ok(f(theta)),
            Profile::Sampled { theta: grid, values } => grid
                .iter()
                .position(|&t| t == theta)
                .map(|i| values[i])
                .ok_or_else(|| {
                    Error::Domain(format!("sampled profile has no node at theta = {theta}"))
                }),
        }
    }

    fn function(&self) -> Result<&ProfileFn> {
        match &self.profile {
            Profile::Function(f) => Ok(f),
            Profile::Sampled { .. } => {
                domain("operation needs an evaluable profile, got a sampled one")
            }
        }
    }

    /// Value in the trivialisation of `chart` at `(θ, φ)`.
    pub fn evaluate(&self, chart: Chart, theta: f64, phi: f64) -> Result<Complex64> {
        let m = self.fourier_index(chart) as f64;
        Ok(self.profile_at(theta)? * Complex64::from_polar(1.0, m * phi))
    }

    /// Samples the profile on `grid`.
    pub fn sample(&self, grid: &[f64]) -> Result<Section> {
        let f = self.function()?;
        let values = grid.iter().map(|&t| f(t)).collect();
        Section::sampled(self.degree, self.m1, grid.to_vec(), values)
    }

    /// `(θ, Θ(θ))` pairs of a sampled section.
    pub fn samples(&self) -> Option<(&[f64], &[Complex64])> {
        match &self.profile {
            Profile::Sampled { theta, values } => Some((theta, values)),
            Profile::Function(_) => None,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Section {
        let profile = match &self.profile {
            Profile::Function(f) => {
                let f = Arc::clone(f);
                Profile::Function(Arc::new(move |t| factor * f(t)))
            }
            Profile::Sampled { theta, values } => Profile::Sampled {
                theta: theta.clone(),
                values: values.iter().map(|v| factor * v).collect(),
            },
        };
        Section::from_profile(self.degree, self.m1, profile)
    }

    /// CSV with header `theta,re,im,chart,m,N`, 17 significant digits.
    pub fn to_csv(&self, chart: Chart) -> Result<String> {
        let (theta, values) = self
            .samples()
            .ok_or_else(|| Error::Domain("only sampled sections serialise to CSV".into()))?;
        let mut out = String::with_capacity(64 * theta.len() + 32);
        out.push_str(CSV_HEADER);
        out.push('\n');
        let m = self.fourier_index(chart);
        for (t, v) in theta.iter().zip(values) {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(v.re),
                fmt_f64(v.im),
                chart.as_str(),
                m,
                self.degree
            )
            .expect("writing to a String");
        }
        Ok(out)
    }
}

pub const CSV_HEADER: &str = "theta,re,im,chart,m,N";

/// Decimal float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Uniform grid of `n` points on `[guard, π - guard]`.
pub fn polar_grid(n: usize, guard: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return domain(format!("grid needs at least 2 points, got {n}"));
    }
    if !(guard > 0.0 && guard < 0.5 * PI) {
        return domain(format!("pole guard {guard} outside (0, π/2)"));
    }
    let h = (PI - 2.0 * guard) / (n - 1) as f64;
    Ok((0..n).map(|i| guard + i as f64 * h).collect())
}

/// Chart form of the magnetic Laplacian on a single Fourier mode:
/// `-(1/sin θ) d/dθ(sin θ df/dθ) + (m - A_chart(θ))² / sin² θ · f`.
fn mode_operator<F>(f: &F, theta: f64, h: f64, m: f64, potential: f64) -> Complex64
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let derivs = |h: f64| {
        let fm2 = f(theta - 2.0 * h);
        let fm1 = f(theta - h);
        let f0 = f(theta);
        let fp1 = f(theta + h);
        let fp2 = f(theta + 2.0 * h);
        let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
        let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
        (f0, d1, d2)
    };
    let (f0, d1a, d2a) = derivs(h);
    let (_, d1b, d2b) = derivs(0.5 * h);
    // one Richardson step on the O(h^4) stencils
    let d1 = (16.0 * d1b - d1a) / 15.0;
    let d2 = (16.0 * d2b - d2a) / 15.0;
    let (s, c) = theta.sin_cos();
    let kinetic = m - potential;
    -(d2 + c / s * d1) + f0 * (kinetic * kinetic / (s * s))
}

fn fd_step(grid: &[f64], i: usize) -> f64 {
    let theta = grid[i];
    let mut h = MAX_FD_STEP;
    if i > 0 {
        h = h.min((theta - grid[i - 1]).abs());
    }
    if i + 1 < grid.len() {
        h = h.min((grid[i + 1] - theta).abs());
    }
    h.min(theta / 8.0).min((PI - theta) / 8.0)
}

/// Applies `Δ^{L^N}` to `section` in the trivialisation of `chart`.
pub fn apply_laplacian_in_chart(
    bundle: &MonopoleBundle,
    section: &Section,
    grid: &[f64],
    chart: Chart,
) -> Result<Section> {
    if bundle.degree() != section.degree() {
        return Err(Error::BundleMismatch {
            left: bundle.degree(),
            right: section.degree(),
        });
    }
    let f = section.function()?;
    let b = bundle.b();
    let m = section.fourier_index(chart) as f64;
    let mut values = Vec::with_capacity(grid.len());
    for (i, &theta) in grid.iter().enumerate() {
        if !(theta > 0.0 && theta < PI) || theta.sin() < MIN_SIN_THETA {
            return Err(Error::PoleProximity { theta, time: None });
        }
        let a = vector_potential(chart, b, theta)?;
        let h = fd_step(grid, i);
        values.push(mode_operator(f.as_ref(), theta, h, m, a));
    }
    Section::sampled(section.degree(), section.m1(), grid.to_vec(), values)
}

/// Applies `Δ^{L^N}` using the `U1` chart formula.
pub fn apply_laplacian(bundle: &MonopoleBundle, section: &Section, grid: &[f64]) -> Result<Section> {
    apply_laplacian_in_chart(bundle, section, grid, Chart::U1)
}

/// `⟨s1|s2⟩ = ∫ conj(s1) s2 dvol`, with the φ-integral done analytically and the
/// x = cos θ integral by `rule`.
pub fn inner_product(s1: &Section, s2: &Section, rule: &QuadratureRule) -> Result<Complex64> {
    inner_product_segments(s1, s2, rule, &[0.0, PI])
}

/// As [`inner_product`], with the θ-range split at `breakpoints` (ascending, in
/// radians) and `rule` applied on each piece in the variable `x = cos θ`.
pub fn inner_product_segments(
    s1: &Section,
    s2: &Section,
    rule: &QuadratureRule,
    breakpoints: &[f64],
) -> Result<Complex64> {
    if s1.degree() != s2.degree() {
        return Err(Error::BundleMismatch {
            left: s1.degree(),
            right: s2.degree(),
        });
    }
    if s1.m1() != s2.m1() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let f1 = s1.function()?;
    let f2 = s2.function()?;
    let mut total = Complex64::new(0.0, 0.0);
    for w in breakpoints.windows(2) {
        let (t_lo, t_hi) = (w[0], w[1]);
        match t_lo.partial_cmp(&t_hi) {
            Some(std::cmp::Ordering::Less) => {}
            Some(std::cmp::Ordering::Equal) => continue,
            _ => return domain(format!("breakpoints not ascending: {t_lo} > {t_hi}")),
        }
        let (x_lo, x_hi) = (t_hi.cos(), t_lo.cos());
        for (x, wx) in rule.mapped(x_lo, x_hi) {
            let theta = x.clamp(-1.0, 1.0).acos();
            total += wx * f1(theta).conj() * f2(theta);
        }
    }
    Ok(2.0 * PI * total)
}

pub fn norm(s: &Section, rule: &QuadratureRule) -> Result<f64> {
    Ok(inner_product(s, s, rule)?.re.max(0.0).sqrt())
}

/// Conjugation `L^N → L^{-N}`, `ψ → conj ψ`, `m → -m`.
pub fn conjugate_section(s: &Section) -> Section {
    let profile = match &s.profile {
        Profile::Function(f) => {
            let f = Arc::clone(f);
            Profile::Function(Arc::new(move |t| f(t).conj()))
        }
        Profile::Sampled { theta, values } => Profile::Sampled {
            theta: theta.clone(),
            values: values.iter().map(|v| v.conj()).collect(),
        },
    };
    Section::from_profile(-s.degree, -s.m1, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gauss_legendre;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn potentials() {
        let p = vector_potential(Chart::U1, 0.5, 0.5 * PI).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(vector_potential(Chart::U1, 0.5, 1e-9).unwrap().abs() < 1e-17);
        for theta in [0.1, 0.7, 1.9, 3.0] {
            let d = vector_potential(Chart::U1, 1.5, theta).unwrap()
                - vector_potential(Chart::U2, 1.5, theta).unwrap();
            assert!((d - 3.0).abs() < 1e-14);
        }
        assert!(vector_potential(Chart::U1, 0.5, 0.0).is_err());
    }

    #[test]
    fn field_strength_quantisation() {
        assert_eq!(
            MonopoleBundle::from_field_strength(Ratio::new(3, 2)).unwrap().degree(),
            3
        );
        assert!(MonopoleBundle::from_field_strength(Ratio::new(1, 3)).is_err());
    }

    #[test]
    fn clutching_is_structural() {
        let s = Section::real(3, 1, |t| t.sin());
        assert_eq!(s.m2(), -2);
        let v1 = s.evaluate(Chart::U1, 1.0, 0.4).unwrap();
        let v2 = s.evaluate(Chart::U2, 1.0, 0.4).unwrap();
        let lhs = v1;
        let rhs = Complex64::from_polar(1.0, 3.0 * 0.4) * v2;
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn laplacian_of_cos_half_theta() {
        let bundle = MonopoleBundle::new(1);
        let s = Section::real(1, 0, |t| (0.5 * t).cos());
        let grid = polar_grid(200, POLE_GUARD).unwrap();
        let out = apply_laplacian(&bundle, &s, &grid).unwrap();
        let (theta, values) = out.samples().unwrap();
        for (t, v) in theta.iter().zip(values) {
            // rounding grows like eps/h^2 as the step shrinks towards the poles
            assert!((v - c(0.5 * (0.5 * t).cos())).norm() < 1e-7, "theta = {t}");
        }
    }

    #[test]
    fn flat_laplacian_kills_constants() {
        let bundle = MonopoleBundle::new(0);
        let s = Section::real(0, 0, |_| 1.0);
        let grid = polar_grid(50, 0.01).unwrap();
        let out = apply_laplacian(&bundle, &s, &grid).unwrap();
        assert!(out.samples().unwrap().1.iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn chart_formulas_agree() {
        let bundle = MonopoleBundle::new(2);
        let s = Section::new(2, 1, |t| Complex64::new(t.sin() * (0.3 * t).cos(), t.cos()));
        let grid = polar_grid(101, 0.05).unwrap();
        let a = apply_laplacian_in_chart(&bundle, &s, &grid, Chart::U1).unwrap();
        let b = apply_laplacian_in_chart(&bundle, &s, &grid, Chart::U2).unwrap();
        for (x, y) in a.samples().unwrap().1.iter().zip(b.samples().unwrap().1) {
            assert!((x - y).norm() <= 1e-10 * x.norm().max(1.0));
        }
    }

    #[test]
    fn laplacian_rejects_pole_points_and_mismatch() {
        let s = Section::real(1, 0, |t| t.cos());
        let bundle = MonopoleBundle::new(1);
        assert!(matches!(
            apply_laplacian(&bundle, &s, &[0.0, 0.5]),
            Err(Error::PoleProximity { .. })
        ));
        assert!(matches!(
            apply_laplacian(&MonopoleBundle::new(2), &s, &[0.5]),
            Err(Error::BundleMismatch { .. })
        ));
    }

    #[test]
    fn inner_products() {
        let rule = gauss_legendre(40).unwrap();
        let a = Section::real(1, 0, |t| (0.5 * t).cos() / (2.0 * PI).sqrt());
        let b = Section::real(1, 1, |t| (0.5 * t).sin());
        assert_eq!(inner_product(&a, &b, &rule).unwrap(), Complex64::new(0.0, 0.0));
        assert!((inner_product(&a, &a, &rule).unwrap() - c(1.0)).norm() < 1e-14);
        let other = Section::real(2, 0, |t| t.cos());
        assert!(matches!(
            inner_product(&a, &other, &rule),
            Err(Error::BundleMismatch { .. })
        ));
    }

    #[test]
    fn conjugation() {
        let y = Section::real(1, 1, |t| -(0.5 * t).sin() / (2.0 * PI).sqrt());
        let cy = conjugate_section(&y);
        assert_eq!((cy.degree(), cy.m1(), cy.m2()), (-1, -1, 0));
        let back = conjugate_section(&cy);
        assert_eq!((back.degree(), back.m1()), (1, 1));
        let v = back.profile_at(0.8).unwrap();
        assert!((v - y.profile_at(0.8).unwrap()).norm() < 1e-16);
    }

    #[test]
    fn csv_layout() {
        let s = Section::real(2, 1, |t| t).sample(&[0.5, 1.0]).unwrap();
        let csv = s.to_csv(Chart::U2).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "theta,re,im,chart,m,N");
        assert_eq!(
            lines[1],
            "5.0000000000000000e-1,5.0000000000000000e-1,0.0000000000000000e0,u2,-1,2"
        );
        assert!(Section::real(2, 1, |t| t).to_csv(Chart::U1).is_err());
    }
}
