//! Quasi-classical eigensections: Bohr–Sommerfeld data, eikonals, the
//! two-sheet canonical operator and its Airy uniformization at the folds.

use std::f64::consts::{FRAC_PI_4, PI};
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::bundle::{Chart, Section, POLE_GUARD};
use crate::classical::{
    action_i, invariant_measure_total, make_torus, Branch, End, EndKind, TorusParams,
};
use crate::error::{domain, Error, Result};
use crate::specfun::airy_ai;

/// Largest `N` and `j` accepted; keeps every rational in range of `i64`.
pub const MAX_LABEL: i64 = 1_000_000;

/// Half-width around a fold inside which the amplitude `A` is interpolated
/// towards its limit instead of evaluating the `0/0` form.
pub const DELTA_A: f64 = 1e-4;

const COLLAR_MIN: f64 = 1e-3;
const COLLAR_MAX: f64 = 0.2;
const BLEND_LO: f64 = 0.3;
const BLEND_HI: f64 = 0.7;

/// Labels `(N, j, k)` with `ħ = 1/N`, `P = k/N - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuantumNumbers {
    #[serde(rename = "N")]
    pub n: i64,
    pub j: i64,
    pub k: i64,
}

impl QuantumNumbers {
    pub fn new(n: i64, j: i64, k: i64) -> Result<Self> {
        if !(1..=MAX_LABEL).contains(&n) {
            return domain(format!("N = {n} outside [1, {MAX_LABEL}]"));
        }
        if !(0..=MAX_LABEL).contains(&j) {
            return domain(format!("j = {j} outside [0, {MAX_LABEL}]"));
        }
        if k < -j || k > n + j {
            return domain(format!("k = {k} outside [-j, N + j] = [{}, {}]", -j, n + j));
        }
        Ok(QuantumNumbers { n, j, k })
    }

    /// Number of zeros of the θ-profile inside the band, `N I_tot / π - 1/2`.
    pub fn radial_number(&self) -> i64 {
        self.j - 0.max(-self.k).max(self.k - self.n)
    }

    /// Fourier index of the section in `chart`.
    pub fn fourier_index(&self, chart: Chart) -> i64 {
        match chart {
            Chart::U1 => self.k,
            Chart::U2 => self.k - self.n,
        }
    }
}

/// Bohr–Sommerfeld data of a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuantizedParams {
    /// `λ = Ê / N²`, the torus energy
    #[serde(rename = "E", serialize_with = "crate::rational::serialize")]
    pub e: Ratio<i64>,
    #[serde(rename = "P", serialize_with = "crate::rational::serialize")]
    pub p: Ratio<i64>,
    /// almost-eigenvalue `j(j+1) + (N/2)(2j+1) + 1/4`
    #[serde(rename = "E_hat", serialize_with = "crate::rational::serialize")]
    pub e_hat: Ratio<i64>,
    /// multiplicity predicted by quantization, `N + 2j + 1`
    pub m_hat: i64,
}

pub fn quantized_params(qn: &QuantumNumbers) -> QuantizedParams {
    let (n, j, k) = (qn.n, qn.j, qn.k);
    let e_hat = Ratio::from_integer(j * (j + 1)) + Ratio::new(n * (2 * j + 1), 2) + Ratio::new(1, 4);
    QuantizedParams {
        e: e_hat / (n * n),
        p: Ratio::new(k, n) - Ratio::new(1, 2),
        e_hat,
        m_hat: n + 2 * j + 1,
    }
}

pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `τ = ±I(θ) + (P ± 1/2) φ`, the `+` sign on `U1` and `-` on `U2`.
pub fn eikonal(
    t: &TorusParams,
    branch: Branch,
    chart: Chart,
    qn: &QuantumNumbers,
    theta: f64,
    phi: f64,
) -> Result<f64> {
    let i = action_i(t, theta)?;
    let m = qn.fourier_index(chart) as f64 / qn.n as f64;
    Ok(branch.sign() * i + m * phi)
}

/// Half-width of the region next to `end` where the oscillatory form is refused:
/// one Airy wavelength `2 N^{-2/3} κ^{-2/3}`, clamped to `[1e-3, 0.2]`; the pole
/// guard at a pole-touching end.
pub fn fold_collar(t: &TorusParams, end: End, n: i64) -> f64 {
    match t.end_kind(end) {
        EndKind::Pole => POLE_GUARD,
        EndKind::Fold => {
            let kappa = (t.discriminant_root / t.end_theta(end).sin()).sqrt();
            (2.0 * (n as f64).powf(-2.0 / 3.0) * kappa.powf(-2.0 / 3.0)).clamp(COLLAR_MIN, COLLAR_MAX)
        }
    }
}

/// `(θ_min + ε_min, θ_max - ε_max)`, where the oscillatory form applies.
pub fn oscillatory_domain(t: &TorusParams, n: i64) -> (f64, f64) {
    (
        t.theta_min + fold_collar(t, End::Min, n),
        t.theta_max - fold_collar(t, End::Max, n),
    )
}

fn check_oscillatory(t: &TorusParams, n: i64, theta: f64) -> Result<()> {
    let (lo, hi) = oscillatory_domain(t, n);
    if theta > lo && theta < hi {
        Ok(())
    } else {
        Err(Error::FoldRegion { theta, lo, hi })
    }
}

/// Two-sheet canonical operator with chart indices `0` (sheet `+`) and `-1`
/// (sheet `-`): `(u₊ e^{iNτ⁺} + i u₋ e^{iNτ⁻}) / band^{1/4}`.
///
/// `u` is the amplitude on the torus as a function of `(sheet, θ, φ)`.
pub fn canonical_operator_nonsingular<U>(
    t: &TorusParams,
    qn: &QuantumNumbers,
    u: U,
    chart: Chart,
    theta: f64,
    phi: f64,
) -> Result<Complex64>
where
    U: Fn(Branch, f64, f64) -> f64,
{
    check_oscillatory(t, qn.n, theta)?;
    let n = qn.n as f64;
    let i = action_i(t, theta)?;
    let m_phi = qn.fourier_index(chart) as f64 * phi;
    let w = t.band(theta).powf(-0.25);
    let plus = Complex64::from_polar(u(Branch::Plus, theta, phi), n * i + m_phi);
    let minus = Complex64::from_polar(u(Branch::Minus, theta, phi), -n * i + m_phi);
    Ok((plus + Complex64::i() * minus) * w)
}

/// `Φ` at the fold `end`: `((3/2) ΔI)^{2/3}` on the band side, with `ΔI` the
/// action measured from that fold, and `-((3/2)|ΔI|)^{2/3}` beyond it, with
/// `|ΔI|` the evanescent action.
pub fn fold_phase_phi(t: &TorusParams, end: End, theta: f64) -> Result<f64> {
    t.require_fold(end)?;
    let inside = check_fold_argument(t, end, theta)?;
    if inside {
        Ok(phi_from_action(t.action_from(end, theta)?))
    } else {
        Ok(-phi_from_action(t.evanescent_action(end, theta)?))
    }
}

fn phi_from_action(delta_i: f64) -> f64 {
    (1.5 * delta_i).powf(2.0 / 3.0)
}

/// Whether `theta` is on the band side of `end`; errors outside `(0, π)` or past
/// the opposite end.
fn check_fold_argument(t: &TorusParams, end: End, theta: f64) -> Result<bool> {
    if !(theta > 0.0 && theta < PI) {
        return domain(format!("theta = {theta} outside (0, π)"));
    }
    let (beyond, past_other) = match end {
        End::Min => (theta < t.theta_min, theta > t.theta_max),
        End::Max => (theta > t.theta_max, theta < t.theta_min),
    };
    if past_other {
        return domain(format!(
            "theta = {theta} lies beyond the opposite end of [{}, {}]",
            t.theta_min, t.theta_max
        ));
    }
    Ok(!beyond)
}

/// `A(θ_end) = 2u₀ / (D^{1/6} sin^{1/3} θ_end)`.
fn amplitude_limit(t: &TorusParams, end: End, u0: f64) -> f64 {
    2.0 * u0 / (t.discriminant_root.powf(1.0 / 6.0) * t.end_theta(end).sin().powf(1.0 / 3.0))
}

fn amplitude_from_action(t: &TorusParams, u0: f64, theta: f64, delta_i: f64) -> f64 {
    2.0 * u0 * t.band(theta).abs().powf(-0.25) * (1.5 * delta_i).powf(1.0 / 6.0)
}

/// Airy amplitude `A` at the fold `end`: `2u₀ |band|^{-1/4} ((3/2)|ΔI|)^{1/6}`,
/// with `ΔI` the real action on the band side and the evanescent action beyond
/// the fold. Within [`DELTA_A`] of the fold, where both factors vanish, the
/// value is interpolated linearly to its limit.
pub fn fold_amplitude_a(t: &TorusParams, end: End, u0: f64, theta: f64) -> Result<f64> {
    t.require_fold(end)?;
    let inside = check_fold_argument(t, end, theta)?;
    let dist = (theta - t.end_theta(end)).abs();
    let action = |th: f64| if inside { t.action_from(end, th) } else { t.evanescent_action(end, th) };
    if dist >= DELTA_A {
        return Ok(amplitude_from_action(t, u0, theta, action(theta)?));
    }
    let limit = amplitude_limit(t, end, u0);
    let edge = edge_theta(t, end, inside);
    let a_edge = amplitude_from_action(t, u0, edge, action(edge)?);
    Ok(limit + (a_edge - limit) * dist / DELTA_A)
}

/// The point [`DELTA_A`] from the fold, on the band side or beyond it.
fn edge_theta(t: &TorusParams, end: End, inside: bool) -> f64 {
    let d = if inside { DELTA_A } else { -DELTA_A };
    match end {
        End::Min => t.theta_min + d,
        End::Max => t.theta_max - d,
    }
}

/// `10s³ - 15s⁴ + 6s⁵` clamped to `[0, 1]`.
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

/// Which closed form a profile is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WkbForm {
    /// `2e^{iπ/4}u₀ band^{-1/4} sin(N I + π/4)` away from the folds
    Osc,
    /// Airy-uniform form over the whole sphere
    Airy,
    /// `Airy` for tori with two folds, `Osc` otherwise
    Auto,
}

impl FromStr for WkbForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "osc" => Ok(WkbForm::Osc),
            "airy" => Ok(WkbForm::Airy),
            "auto" => Ok(WkbForm::Auto),
            other => domain(format!("unknown WKB form {other:?} (expected osc, airy or auto)")),
        }
    }
}

impl WkbForm {
    pub fn as_str(self) -> &'static str {
        match self {
            WkbForm::Osc => "osc",
            WkbForm::Airy => "airy",
            WkbForm::Auto => "auto",
        }
    }
}

/// Precomputed data of one fold end.
#[derive(Debug, Clone, Serialize)]
struct FoldData {
    end: End,
    limit: f64,
    /// `A` at [`DELTA_A`] inside and outside the fold
    edge_amplitude: [f64; 2],
}

/// The almost-eigensection `U_{N,j,k}` of a label.
#[derive(Debug, Clone, Serialize)]
pub struct WkbSection {
    pub qn: QuantumNumbers,
    pub params: QuantizedParams,
    pub torus: TorusParams,
    pub u0: f64,
    /// fold collars at `θ_min` and `θ_max`
    pub collar: [f64; 2],
    folds: Vec<FoldData>,
}

impl WkbSection {
    /// Builds the section with `u₀ = μ(Λ)^{-1/2}`.
    pub fn new(qn: QuantumNumbers) -> Result<Self> {
        let params = quantized_params(&qn);
        let torus = make_torus(ratio_to_f64(params.e), ratio_to_f64(params.p))?;
        let u0 = invariant_measure_total(&torus)?.powf(-0.5);
        Self::assemble(qn, params, torus, u0)
    }

    fn assemble(qn: QuantumNumbers, params: QuantizedParams, torus: TorusParams, u0: f64) -> Result<Self> {
        if !(u0.is_finite() && u0 > 0.0) {
            return domain(format!("normalization amplitude u0 = {u0} must be positive"));
        }
        let mut folds = Vec::new();
        if !torus.is_degenerate() {
            for end in [End::Min, End::Max] {
                let (inner, outer) = (edge_theta(&torus, end, true), edge_theta(&torus, end, false));
                folds.push(FoldData {
                    end,
                    limit: amplitude_limit(&torus, end, u0),
                    edge_amplitude: [
                        amplitude_from_action(&torus, u0, inner, torus.action_from(end, inner)?),
                        amplitude_from_action(&torus, u0, outer, torus.evanescent_action(end, outer)?),
                    ],
                });
            }
        }
        let collar = [
            fold_collar(&torus, End::Min, qn.n),
            fold_collar(&torus, End::Max, qn.n),
        ];
        Ok(WkbSection {
            qn,
            params,
            torus,
            u0,
            collar,
            folds,
        })
    }

    /// Same section with a different normalization amplitude.
    pub fn with_u0(&self, u0: f64) -> Result<Self> {
        Self::assemble(self.qn, self.params, self.torus.clone(), u0)
    }

    /// `(1/2π)(E + 1/4)^{-1/4}`, the amplitude as printed.
    pub fn printed_u0(&self) -> f64 {
        (self.torus.e + 0.25).powf(-0.25) / (2.0 * PI)
    }

    pub fn is_degenerate(&self) -> bool {
        self.torus.is_degenerate()
    }

    pub fn e_hat(&self) -> f64 {
        ratio_to_f64(self.params.e_hat)
    }

    pub fn oscillatory_domain(&self) -> (f64, f64) {
        (
            self.torus.theta_min + self.collar[0],
            self.torus.theta_max - self.collar[1],
        )
    }

    /// The form actually used for `form`.
    pub fn resolve(&self, form: WkbForm) -> WkbForm {
        match form {
            WkbForm::Auto if self.is_degenerate() => WkbForm::Osc,
            WkbForm::Auto => WkbForm::Airy,
            other => other,
        }
    }

    /// θ-interval on which `form` is defined.
    pub fn domain_of(&self, form: WkbForm) -> Result<(f64, f64)> {
        match self.resolve(form) {
            WkbForm::Osc => {
                let (lo, hi) = self.oscillatory_domain();
                if lo >= hi {
                    return Err(Error::FoldRegion {
                        theta: self.torus.theta_mid(),
                        lo,
                        hi,
                    });
                }
                Ok((lo, hi))
            }
            _ => {
                self.require_folds()?;
                Ok((POLE_GUARD, PI - POLE_GUARD))
            }
        }
    }

    fn require_folds(&self) -> Result<()> {
        if self.is_degenerate() {
            return Err(Error::Degenerate(format!(
                "Λ(E={}, P={}) touches a pole; the Airy form needs two folds",
                self.torus.e, self.torus.p
            )));
        }
        Ok(())
    }

    /// Oscillatory θ-profile `2e^{iπ/4}u₀ band^{-1/4} sin(N I + π/4)`.
    pub fn oscillatory_profile(&self, theta: f64) -> Result<Complex64> {
        let (lo, hi) = self.oscillatory_domain();
        if !(theta > lo && theta < hi) {
            return Err(Error::FoldRegion { theta, lo, hi });
        }
        let i = action_i(&self.torus, theta)?;
        let n = self.qn.n as f64;
        let amp = 2.0 * self.u0 * self.torus.band(theta).powf(-0.25) * (n * i + FRAC_PI_4).sin();
        Ok(Complex64::from_polar(amp, FRAC_PI_4))
    }

    /// Single-fold Airy profile without the `e^{iπ/4}` factor. `delta_i` is the
    /// action from the fold on the band side and minus the evanescent action
    /// beyond it.
    fn airy_term(&self, fold: &FoldData, theta: f64, delta_i: f64) -> f64 {
        let t = &self.torus;
        let dist = (theta - t.end_theta(fold.end)).abs();
        let amp = if dist >= DELTA_A {
            amplitude_from_action(t, self.u0, theta, delta_i.abs())
        } else {
            let edge = fold.edge_amplitude[usize::from(delta_i < 0.0)];
            fold.limit + (edge - fold.limit) * dist / DELTA_A
        };
        let phi = delta_i.signum() * phi_from_action(delta_i.abs());
        let n = self.qn.n as f64;
        let sign = match fold.end {
            End::Max if self.qn.radial_number() % 2 != 0 => -1.0,
            _ => 1.0,
        };
        let ai = airy_ai(-n.powf(2.0 / 3.0) * phi).unwrap_or(f64::NAN);
        sign * PI.sqrt() * amp * n.powf(1.0 / 6.0) * ai
    }

    /// Uniform θ-profile: the Airy form of each fold, blended across the middle
    /// of the band by a quintic smoothstep in the action fraction `I / I_tot`.
    pub fn uniform_profile(&self, theta: f64) -> Result<Complex64> {
        if self.is_degenerate() {
            return self.oscillatory_profile(theta);
        }
        if !(theta > 0.0 && theta < PI) {
            return domain(format!("theta = {theta} outside (0, π)"));
        }
        let t = &self.torus;
        let (lo, hi) = (&self.folds[0], &self.folds[1]);
        let value = if theta <= t.theta_min {
            self.airy_term(lo, theta, -t.evanescent_action(End::Min, theta)?)
        } else if theta >= t.theta_max {
            self.airy_term(hi, theta, -t.evanescent_action(End::Max, theta)?)
        } else {
            let i = action_i(t, theta)?;
            let w = smoothstep(((i / t.action_total) - BLEND_LO) / (BLEND_HI - BLEND_LO));
            let mut v = 0.0;
            if w < 1.0 {
                v += (1.0 - w) * self.airy_term(lo, theta, i);
            }
            if w > 0.0 {
                v += w * self.airy_term(hi, theta, t.action_total - i);
            }
            v
        };
        Ok(Complex64::from_polar(value, FRAC_PI_4))
    }

    pub fn profile(&self, form: WkbForm, theta: f64) -> Result<Complex64> {
        match self.resolve(form) {
            WkbForm::Osc => self.oscillatory_profile(theta),
            _ => {
                self.require_folds()?;
                self.uniform_profile(theta)
            }
        }
    }

    /// The section over `L^N` with U1 index `k`. Points where `form` is not
    /// defined evaluate to NaN; restrict sampling to [`Self::domain_of`].
    pub fn section(&self, form: WkbForm) -> Result<Section> {
        let form = self.resolve(form);
        if form != WkbForm::Osc {
            self.require_folds()?;
        }
        let me = self.clone();
        Ok(Section::new(self.qn.n, self.qn.k, move |theta| {
            me.profile(form, theta)
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }))
    }
}

/// `U` in the trivialisation of `chart` (oscillatory form).
pub fn wkb_oscillatory(ws: &WkbSection, chart: Chart, theta: f64, phi: f64) -> Result<Complex64> {
    let m = ws.qn.fourier_index(chart) as f64;
    Ok(ws.oscillatory_profile(theta)? * Complex64::from_polar(1.0, m * phi))
}

/// `U` in the trivialisation of `chart` (uniform form; oscillatory on degenerate tori).
pub fn wkb_uniform(ws: &WkbSection, chart: Chart, theta: f64, phi: f64) -> Result<Complex64> {
    let m = ws.qn.fourier_index(chart) as f64;
    Ok(ws.uniform_profile(theta)? * Complex64::from_polar(1.0, m * phi))
}
