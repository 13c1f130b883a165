use serde::Serialize;

use crate::bundle::POLE_GUARD;
use crate::error::{domain, Error, Result};

use super::torus::{momenta, Branch, TorusParams};

/// Point of `T*S²` in the chart `(θ, φ, p_θ, p_φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub theta: f64,
    pub phi: f64,
    pub ptheta: f64,
    pub pphi: f64,
}

impl PhaseState {
    /// The point of `Λ` above `(θ, φ)` on the given sheet.
    pub fn on_torus(t: &TorusParams, theta: f64, phi: f64, branch: Branch) -> Result<Self> {
        let (ptheta, pphi) = momenta(t, theta, branch)?;
        Ok(PhaseState {
            theta,
            phi,
            ptheta,
            pphi,
        })
    }

    fn to_array(self) -> [f64; 4] {
        [self.theta, self.phi, self.ptheta, self.pphi]
    }

    fn from_array(y: [f64; 4]) -> Self {
        PhaseState {
            theta: y[0],
            phi: y[1],
            ptheta: y[2],
            pphi: y[3],
        }
    }

    /// `H = p_θ² + p_φ² / sin² θ`.
    pub fn hamiltonian(&self) -> f64 {
        let s = self.theta.sin();
        self.ptheta * self.ptheta + self.pphi * self.pphi / (s * s)
    }

    /// `p_φ - B cos θ`, conserved by the magnetic flow.
    pub fn angular_integral(&self, b: f64) -> f64 {
        self.pphi - b * self.theta.cos()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub state: PhaseState,
    pub i1: f64,
    pub i2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub b: f64,
    pub samples: Vec<FlowSample>,
    /// largest `|I1(t) - I1(0)|` along the run
    pub max_drift_i1: f64,
    /// largest `|I2(t) - I2(0)|` along the run
    pub max_drift_i2: f64,
}

impl Trajectory {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

// Hamilton's equations for H = p_θ² + p_φ²/sin²θ and the twisted form
// dp_θ∧dθ + dp_φ∧dφ + B sinθ dθ∧dφ.
fn rhs(b: f64, y: &[f64; 4]) -> [f64; 4] {
    let (s, c) = y[0].sin_cos();
    let (pt, pp) = (y[2], y[3]);
    [
        2.0 * pt,
        2.0 * pp / (s * s),
        2.0 * c / (s * s * s) * pp * pp + 2.0 * b * pp / s,
        -2.0 * b * s * pt,
    ]
}

/// Local error target as a fraction of `tol`. The invariant drift grows linearly
/// in this target and in the number of steps; at 0.01 a run of fifty time units
/// reaching `θ = 0.18` drifts by about `30 tol`.
const STEP_SAFETY: f64 = 0.01;

// Dormand–Prince 5(4) tableau; the system is autonomous, so the nodes are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step of signed size `h`: fifth-order solution and the
/// scaled error estimate.
fn dp_step(b: f64, y: &[f64; 4], h: f64, tol: f64) -> ([f64; 4], f64) {
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs(b, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..4 {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = rhs(b, &ys);
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for i in 0..4 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = STEP_SAFETY * tol * (1.0 + y[i].abs().max(y5[i].abs()));
        err = err.max((h * (d5 - d4)).abs() / scale);
    }
    (y5, err)
}

fn check_pole(y: &[f64; 4], t: f64) -> Result<()> {
    if !(y[0] > POLE_GUARD && y[0] < std::f64::consts::PI - POLE_GUARD) {
        return Err(Error::PoleProximity {
            theta: y[0],
            time: Some(t),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("flow state became non-finite at t = {t}")));
    }
    Ok(())
}

/// Adaptive integration driver; `visit` sees every accepted step and may stop the run.
fn drive<F>(start: PhaseState, b: f64, duration: f64, tol: f64, mut visit: F) -> Result<()>
where
    F: FnMut(f64, &[f64; 4], f64, &[f64; 4]) -> Result<bool>,
{
    if !(tol.is_finite() && tol > 0.0) {
        return domain(format!("integration tolerance {tol} must be positive"));
    }
    if !(duration.is_finite() && duration != 0.0) {
        return domain(format!("integration time {duration} must be finite and non-zero"));
    }
    let mut y = start.to_array();
    check_pole(&y, 0.0)?;
    let dir = duration.signum();
    let t_end = duration.abs();
    let mut t = 0.0;
    let mut h = (t_end / 100.0).min(1e-2);
    let h_min = 1e-14 * t_end.max(1.0);
    while t < t_end {
        let step = h.min(t_end - t);
        let (y_new, err) = dp_step(b, &y, dir * step, tol);
        if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
            let t_new = if step == t_end - t { t_end } else { t + step };
            check_pole(&y_new, dir * t_new)?;
            if !visit(dir * t, &y, dir * t_new, &y_new)? {
                return Ok(());
            }
            t = t_new;
            y = y_new;
        }
        let factor = if err == 0.0 || !err.is_finite() {
            if err.is_finite() { 5.0 } else { 0.2 }
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = step * factor;
        if h < h_min {
            return Err(Error::Numerical(format!(
                "step size collapsed to {h:e} at t = {}",
                dir * t
            )));
        }
    }
    Ok(())
}

/// Integrates the magnetic geodesic flow with field strength `b` for a signed time
/// `duration` (negative runs the flow backwards), recording every accepted step.
///
/// Trajectories that come within the pole guard of `θ = 0` or `θ = π` abort with
/// [`Error::PoleProximity`].
pub fn integrate_flow(start: PhaseState, b: f64, duration: f64, tol: f64) -> Result<Trajectory> {
    let i1_0 = start.hamiltonian();
    let i2_0 = start.angular_integral(b);
    let mut traj = Trajectory {
        b,
        samples: vec![FlowSample {
            t: 0.0,
            state: start,
            i1: i1_0,
            i2: i2_0,
        }],
        max_drift_i1: 0.0,
        max_drift_i2: 0.0,
    };
    drive(start, b, duration, tol, |_, _, t, y| {
        let state = PhaseState::from_array(*y);
        let (i1, i2) = (state.hamiltonian(), state.angular_integral(b));
        traj.max_drift_i1 = traj.max_drift_i1.max((i1 - i1_0).abs());
        traj.max_drift_i2 = traj.max_drift_i2.max((i2 - i2_0).abs());
        traj.samples.push(FlowSample { t, state, i1, i2 });
        Ok(true)
    })?;
    Ok(traj)
}

/// Time of the zero of `p_θ` inside the accepted step `[t0, t0 + h]`, located by
/// bisection on single steps from the left endpoint.
fn refine_crossing(b: f64, t0: f64, y0: &[f64; 4], h: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    let sign0 = y0[2].signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let (ym, _) = dp_step(b, y0, mid, tol);
        if ym[2].signum() == sign0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    t0 + 0.5 * (lo + hi)
}

/// Period of the `θ`-oscillation: the time between two successive `+ → -`
/// sign changes of `p_θ`.
pub fn theta_period(start: PhaseState, b: f64, max_time: f64, tol: f64) -> Result<f64> {
    let mut crossings: Vec<f64> = Vec::new();
    drive(start, b, max_time, tol, |t0, y0, t1, y1| {
        if y0[2] > 0.0 && y1[2] <= 0.0 {
            crossings.push(refine_crossing(b, t0, y0, t1 - t0, tol));
        }
        Ok(crossings.len() < 2)
    })?;
    match crossings.as_slice() {
        [first, second] => Ok(second - first),
        _ => Err(Error::Numerical(format!(
            "no full θ-oscillation within time {max_time}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::torus::make_torus;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn equator_great_circle_without_field() {
        // B = 0, p_φ = 1 on the equator: uniform rotation φ = 2t
        let start = PhaseState {
            theta: FRAC_PI_2,
            phi: 0.0,
            ptheta: 0.0,
            pphi: 1.0,
        };
        let tr = integrate_flow(start, 0.0, 3.0, 1e-12).unwrap();
        let end = tr.last().state;
        assert!((end.phi - 6.0).abs() < 1e-9);
        assert!((end.theta - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn invariants_and_reversal() {
        let t = make_torus(1.0, 0.2).unwrap();
        let start = PhaseState::on_torus(&t, t.theta_mid(), 0.3, Branch::Plus).unwrap();
        let fwd = integrate_flow(start, 0.5, 10.0, 1e-12).unwrap();
        assert!(fwd.max_drift_i1 < 1e-9 && fwd.max_drift_i2 < 1e-9);
        let back = integrate_flow(fwd.last().state, 0.5, -10.0, 1e-12).unwrap();
        let end = back.last().state;
        assert!((end.theta - start.theta).abs() < 1e-8);
        assert!((end.phi - start.phi).abs() < 1e-8);
        assert!((end.ptheta - start.ptheta).abs() < 1e-8);
        assert!((back.last().t + 10.0).abs() < 1e-12);
    }

    #[test]
    fn stays_on_torus() {
        let t = make_torus(2.0, -0.3).unwrap();
        let start = PhaseState::on_torus(&t, t.theta_mid(), 0.0, Branch::Minus).unwrap();
        let tr = integrate_flow(start, 0.5, 6.0, 1e-12).unwrap();
        assert!((tr.samples[0].i1 - 2.0).abs() < 1e-12);
        for s in &tr.samples {
            assert!(s.state.theta > t.theta_min - 1e-7 && s.state.theta < t.theta_max + 1e-7);
        }
    }

    #[test]
    fn period_matches_closed_form() {
        for (e, p) in [(1.0, 0.0), (3.0, 0.4), (0.5, -0.6)] {
            let t = make_torus(e, p).unwrap();
            let start = PhaseState::on_torus(&t, t.theta_mid(), 0.0, Branch::Plus).unwrap();
            let period = theta_period(start, 0.5, 50.0, 1e-12).unwrap();
            let expect = PI / (e + 0.25f64).sqrt();
            assert!((period - expect).abs() < 1e-8, "{e} {p}: {period} vs {expect}");
        }
    }

    #[test]
    fn pole_abort() {
        // meridian through the north pole
        let start = PhaseState {
            theta: 0.5,
            phi: 0.0,
            ptheta: -1.0,
            pphi: 0.0,
        };
        match integrate_flow(start, 0.0, 5.0, 1e-10) {
            Err(Error::PoleProximity { theta, time }) => {
                assert!(theta < POLE_GUARD);
                assert!(time.unwrap() > 0.0);
            }
            other => panic!("expected pole abort, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let start = PhaseState {
            theta: 1.0,
            phi: 0.0,
            ptheta: 0.0,
            pphi: 0.5,
        };
        assert!(integrate_flow(start, 0.5, 0.0, 1e-10).is_err());
        assert!(integrate_flow(start, 0.5, 1.0, 0.0).is_err());
        let polar = PhaseState { theta: 1e-4, ..start };
        assert!(matches!(
            integrate_flow(polar, 0.5, 1.0, 1e-10),
            Err(Error::PoleProximity { .. })
        ));
    }
}
