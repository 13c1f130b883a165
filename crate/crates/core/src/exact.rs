//! Exact monopole harmonics `Y_{N,j,k}`: spectrum, θ-profiles from the explicit
//! Jacobi sum, numerically normalized sections, `L_z` and the `N = 1` sections.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::bundle::{conjugate_section, inner_product, Section};
use crate::error::{domain, Error, Result};
use crate::specfun::{common_powers, gauss_legendre, log_factorial, reduced_sum_halfangle, QuadratureRule};
use crate::wkb::QuantumNumbers;

/// `(N, j, k)` labelling `Y_{N,j,k}`; the same ranges as the quasi-classical labels.
pub type HarmonicLabel = QuantumNumbers;

/// Printed constants deviating from the numerical norm by more than this are flagged.
pub const PRINTED_CONSTANT_TOL: f64 = 1e-8;

fn check_level(n: i64, j: i64) -> Result<()> {
    if n < 1 || j < 0 {
        return domain(format!("level (N={n}, j={j}) needs N >= 1 and j >= 0"));
    }
    Ok(())
}

/// `E_{N,j} = j(j+1) + (N/2)(2j+1)`.
pub fn eigenvalue(n: i64, j: i64) -> Result<Ratio<i64>> {
    check_level(n, j)?;
    Ok(Ratio::from_integer(j * (j + 1)) + Ratio::new(n * (2 * j + 1), 2))
}

/// `m_{N,j} = N + 2j + 1`.
pub fn multiplicity(n: i64, j: i64) -> Result<i64> {
    check_level(n, j)?;
    Ok(n + 2 * j + 1)
}

/// All labels of the level `(N, j)`, ordered by `k`.
pub fn labels(n: i64, j: i64) -> Result<Vec<HarmonicLabel>> {
    check_level(n, j)?;
    (-j..=n + j).map(|k| QuantumNumbers::new(n, j, k)).collect()
}

/// The printed constant `[(N+2j+1)/(4π) · (N+j+k)!(j+k)! / ((N+j)! j!)]^{1/2}`.
pub fn printed_constant(label: &HarmonicLabel) -> Result<f64> {
    let (n, j, k) = (label.n, label.j, label.k);
    let log = log_factorial(n + j + k)? + log_factorial(j + k)?
        - log_factorial(n + j)?
        - log_factorial(j)?;
    Ok(((n + 2 * j + 1) as f64 / (4.0 * PI)).sqrt() * (0.5 * log).exp())
}

/// `((1-x)/2)^{|k|/2} ((1+x)/2)^{|N-k|/2} R(x)` from `minus = (1-x)/2` and
/// `plus = (1+x)/2`, where `R` is the Jacobi sum with its common factors removed.
/// The negative half-powers of the printed form cancel against those factors.
fn bare_profile(label: &HarmonicLabel, minus: f64, plus: f64) -> f64 {
    let (n, j, k) = (label.n, label.j, label.k);
    let reduced = reduced_sum_halfangle(n, j, k, minus, plus, common_powers(n, k));
    minus.sqrt().powi(k.abs() as i32) * plus.sqrt().powi((n - k).abs() as i32) * reduced
}

/// `Θ̃_{N,j,k}(x)` with the printed constant.
pub fn theta_profile(label: &HarmonicLabel, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return domain(format!("theta_profile argument {x} outside [-1, 1]"));
    }
    Ok(printed_constant(label)? * bare_profile(label, 0.5 * (1.0 - x), 0.5 * (1.0 + x)))
}

/// Same as [`theta_profile`] at `x = cos θ`, using `sin²(θ/2)`, `cos²(θ/2)`.
pub fn theta_profile_at_angle(label: &HarmonicLabel, theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return domain(format!("theta = {theta} outside [0, π]"));
    }
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(printed_constant(label)? * bare_profile(label, s * s, c * c))
}

/// Gauss order integrating every product of level-`(N, ≤ j)` profiles exactly.
pub fn gram_rule_order(n: i64, j_max: i64) -> usize {
    (n + 2 * (j_max + (n + j_max)) + 8) as usize
}

/// `Y_{N,j,k}` normalized numerically, with the printed constant's own norm.
#[derive(Debug, Clone)]
pub struct ExactHarmonic {
    pub label: HarmonicLabel,
    pub eigenvalue: Ratio<i64>,
    /// `1 / ‖bare profile‖`
    pub scale: f64,
    /// norm of the section built with the printed constant (1 if the constant is right)
    pub printed_norm: f64,
    pub section: Section,
}

impl ExactHarmonic {
    pub fn profile(&self, theta: f64) -> f64 {
        let (s, c) = (0.5 * theta).sin_cos();
        self.scale * bare_profile(&self.label, s * s, c * c)
    }

    /// `numerical norm / printed-constant norm`.
    pub fn norm_ratio(&self) -> f64 {
        1.0 / self.printed_norm
    }
}

fn bare_norm(label: &HarmonicLabel, rule: &QuadratureRule) -> f64 {
    let sq = rule.integrate(|x| {
        let v = bare_profile(label, 0.5 * (1.0 - x), 0.5 * (1.0 + x));
        v * v
    });
    (2.0 * PI * sq).sqrt()
}

/// `Y_{N,j,k}` with `Θ(θ) = Θ̃(cos θ)` on `U1`, renormalized to unit norm. The
/// sign of the printed form is kept.
pub fn harmonic_section(label: &HarmonicLabel) -> Result<ExactHarmonic> {
    let order = gram_rule_order(label.n, label.j);
    let rule = gauss_legendre(order.min(crate::specfun::MAX_GAUSS_ORDER))?;
    harmonic_with_rule(label, &rule)
}

fn harmonic_with_rule(label: &HarmonicLabel, rule: &QuadratureRule) -> Result<ExactHarmonic> {
    let norm = bare_norm(label, rule);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Numerical(format!(
            "profile of (N={}, j={}, k={}) has norm {norm}",
            label.n, label.j, label.k
        )));
    }
    let scale = 1.0 / norm;
    let printed_norm = printed_constant(label)? * norm;
    let lab = *label;
    let section = Section::real(label.n, label.k, move |theta| {
        let (s, c) = (0.5 * theta).sin_cos();
        scale * bare_profile(&lab, s * s, c * c)
    });
    Ok(ExactHarmonic {
        label: *label,
        eigenvalue: eigenvalue(label.n, label.j)?,
        scale,
        printed_norm,
        section,
    })
}

/// `L_z` eigenvalue in both chart forms, `-i∂_φ ∓ N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LzEigenvalue {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub u1: Ratio<i64>,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub u2: Ratio<i64>,
}

/// `L_z Y_{N,j,k} = (k - N/2) Y_{N,j,k}`, checked on both chart forms.
pub fn lz_apply(label: &HarmonicLabel) -> Result<Ratio<i64>> {
    let half_n = Ratio::new(label.n, 2);
    let lz = LzEigenvalue {
        u1: Ratio::from_integer(label.k) - half_n,
        u2: Ratio::from_integer(label.k - label.n) + half_n,
    };
    if lz.u1 != lz.u2 {
        return Err(Error::Inconsistency(format!(
            "L_z chart forms disagree: {} vs {}",
            lz.u1, lz.u2
        )));
    }
    Ok(lz.u1)
}

/// The sections `S_a = cos(θ/2)`, `S_b = sin(θ/2) e^{-iφ}` of `L^{-1}` over `U1`:
/// the conjugated `N = 1, j = 0` harmonics scaled by `√(2π)`. `S_b` has its sign
/// flipped to the conventional form.
pub fn tamm_sections() -> Result<(Section, Section)> {
    let scale = (2.0 * PI).sqrt();
    let a = harmonic_section(&QuantumNumbers::new(1, 0, 0)?)?;
    let b = harmonic_section(&QuantumNumbers::new(1, 0, 1)?)?;
    Ok((
        conjugate_section(&a.section).scaled(Complex64::new(scale, 0.0)),
        conjugate_section(&b.section).scaled(Complex64::new(-scale, 0.0)),
    ))
}

/// Gram matrix of all normalized `Y_{N,j,k}` with `j <= j_max`, ordered by `(j, k)`.
#[derive(Debug, Clone, Serialize)]
pub struct GramReport {
    #[serde(rename = "N")]
    pub n: i64,
    pub j_max: i64,
    pub labels: Vec<HarmonicLabel>,
    pub rule_order: usize,
    pub max_offdiag: f64,
    pub max_diag_error: f64,
    #[serde(skip)]
    pub matrix: Vec<Vec<Complex64>>,
}

pub fn gram_matrix(n: i64, j_max: i64) -> Result<GramReport> {
    check_level(n, j_max)?;
    let order = gram_rule_order(n, j_max);
    let rule = gauss_legendre(order)?;
    let mut harmonics = Vec::new();
    for j in 0..=j_max {
        for label in labels(n, j)? {
            harmonics.push(harmonic_with_rule(&label, &rule)?);
        }
    }
    let m = harmonics.len();
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    let (mut max_off, mut max_diag) = (0.0f64, 0.0f64);
    for a in 0..m {
        for b in 0..m {
            let g = inner_product(&harmonics[a].section, &harmonics[b].section, &rule)?;
            if a == b {
                max_diag = max_diag.max((g - 1.0).norm());
            } else {
                max_off = max_off.max(g.norm());
            }
            matrix[a][b] = g;
        }
    }
    Ok(GramReport {
        n,
        j_max,
        labels: harmonics.iter().map(|h| h.label).collect(),
        rule_order: order,
        max_offdiag: max_off,
        max_diag_error: max_diag,
        matrix,
    })
}

/// One row of the printed-constant validation table.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantCheck {
    #[serde(rename = "N")]
    pub n: i64,
    pub j: i64,
    pub k: i64,
    pub printed_constant: f64,
    /// norm of the section built with the printed constant
    pub printed_norm: f64,
    pub deviates: bool,
}

/// Checks the printed normalization constant for every label with `N <= n_max`, `j <= j_max`.
pub fn printed_constant_table(n_max: i64, j_max: i64) -> Result<Vec<ConstantCheck>> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for j in 0..=j_max {
            for label in labels(n, j)? {
                let h = harmonic_section(&label)?;
                rows.push(ConstantCheck {
                    n,
                    j,
                    k: label.k,
                    printed_constant: printed_constant(&label)?,
                    printed_norm: h.printed_norm,
                    deviates: (h.printed_norm - 1.0).abs() > PRINTED_CONSTANT_TOL,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{apply_laplacian, polar_grid, Chart};

    fn lab(n: i64, j: i64, k: i64) -> HarmonicLabel {
        QuantumNumbers::new(n, j, k).unwrap()
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(eigenvalue(1, 0).unwrap(), Ratio::new(1, 2));
        assert_eq!(eigenvalue(3, 2).unwrap(), Ratio::new(27, 2));
        assert!(eigenvalue(0, 0).is_err());
        for n in 1..8 {
            for j in 0..5 {
                assert_eq!(labels(n, j).unwrap().len() as i64, multiplicity(n, j).unwrap());
            }
        }
    }

    #[test]
    fn printed_n1_profiles() {
        let c = 1.0 / (2.0 * PI).sqrt();
        let y = harmonic_section(&lab(1, 0, 0)).unwrap();
        let y1 = harmonic_section(&lab(1, 0, 1)).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let th = f64::acos(x);
            assert!((y.profile(th) - c * (0.5 * (1.0 + x)).sqrt()).abs() < 1e-14);
            assert!((y1.profile(th) + c * (0.5 * (1.0 - x)).sqrt()).abs() < 1e-14);
        }
        // the printed constant is right for k = 0, off by √2 for k = 1
        assert!((y.printed_norm - 1.0).abs() < 1e-14);
        assert!((y1.printed_norm - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn brute_force_product() {
        // (2,1,0) at x = 0: C · 2^{-1} · P̃(0)
        let l = lab(2, 1, 0);
        let c = ((2.0 + 2.0 + 1.0) / (4.0 * PI) * 6.0 * 1.0 / (6.0 * 1.0)).sqrt();
        // P̃ = 1!3! Σ_s (-1)^{1-s} (1/2)^{1-s}(1/2)^s / (s!(1-s)!(2+s)!(1-s)!) at x=0
        let p = 6.0 * (-0.5 / 2.0 + 0.5 / 6.0);
        let expect = c * 0.5 * p;
        assert!((theta_profile(&l, 0.0).unwrap() - expect).abs() < 1e-15);
        assert!(theta_profile(&l, 1.5).is_err());
    }

    #[test]
    fn eigen_residual() {
        let grid = polar_grid(400, 1e-3).unwrap();
        for (n, j, k) in [(1, 0, 0), (2, 1, 3), (3, 2, -2), (5, 1, 0)] {
            let h = harmonic_section(&lab(n, j, k)).unwrap();
            let e = *h.eigenvalue.numer() as f64 / *h.eigenvalue.denom() as f64;
            let ly = apply_laplacian(&h.section.bundle(), &h.section, &grid).unwrap();
            let (_, vals) = ly.samples().unwrap();
            for (t, v) in grid.iter().zip(vals) {
                let f = h.profile(*t);
                assert!((v.re - e * f).abs() < 1e-6 * (1.0 + f.abs()), "{n} {j} {k} θ={t}");
            }
        }
    }

    #[test]
    fn gram_small() {
        let g = gram_matrix(3, 2).unwrap();
        assert_eq!(g.labels.len(), 4 + 6 + 8);
        assert!(g.max_offdiag < 1e-12, "{}", g.max_offdiag);
        assert!(g.max_diag_error < 1e-10);
    }

    #[test]
    fn lz_values() {
        assert_eq!(lz_apply(&lab(1, 0, 0)).unwrap(), Ratio::new(-1, 2));
        assert_eq!(lz_apply(&lab(1, 0, 1)).unwrap(), Ratio::new(1, 2));
        assert_eq!(lz_apply(&lab(4, 2, -2)).unwrap(), Ratio::from_integer(-4));
    }

    #[test]
    fn tamm() {
        let (a, b) = tamm_sections().unwrap();
        assert_eq!((a.degree(), a.m1(), a.m2()), (-1, 0, 1));
        assert_eq!((b.degree(), b.m1(), b.m2()), (-1, -1, 0));
        for th in [0.2, 1.0, 2.5] {
            assert!((a.evaluate(Chart::U1, th, 0.4).unwrap().re - (0.5 * th).cos()).abs() < 1e-14);
            let bu2 = b.evaluate(Chart::U2, th, 0.4).unwrap();
            assert!((bu2 - Complex64::new((0.5 * th).sin(), 0.0)).norm() < 1e-14);
        }
        let rule = gauss_legendre(16).unwrap();
        assert_eq!(inner_product(&a, &b, &rule).unwrap().norm(), 0.0);
    }

    #[test]
    fn pole_regularity() {
        for (n, j, k) in [(3, 1, 2), (4, 2, -1), (2, 2, 4)] {
            let h = harmonic_section(&lab(n, j, k)).unwrap();
            let (m1, m2) = (k.abs(), (k - n).abs());
            for t in [1e-2, 1e-3] {
                assert!((h.profile(t) / t.powi(m1 as i32)).abs() < 1e3);
                assert!((h.profile(PI - t) / t.powi(m2 as i32)).abs() < 1e3);
            }
        }
    }
}
