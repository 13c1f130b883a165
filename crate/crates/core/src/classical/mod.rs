//! Classical magnetic geodesic flow: invariant tori, actions, the invariant
//! measure, trajectories and the Maslov index.

mod flow;
mod maslov;
mod torus;

pub use flow::{integrate_flow, theta_period, FlowSample, PhaseState, Trajectory};
pub use maslov::{central_point, maslov_index_numeric, plus_sheet_index, MaslovEstimate};
pub use torus::{
    action_i, action_i_closed_form, invariant_density, invariant_measure_total, make_torus,
    momenta, printed_forms, Branch, End, EndKind, PrintedFormCheck, TorusParams,
    ARCSIN_CLAMP_TOL, B_WKB, POLE_CLASSIFY_TOL,
};
