//! Self-contained special functions and quadrature rules.

mod airy;
mod factorial;
mod gauss;
mod jacobi;
mod kronrod;

pub use airy::{airy_ai, airy_ai_with_derivative, AI_ZERO};
pub use factorial::log_factorial;
pub use gauss::{gauss_legendre, QuadratureRule, MAX_GAUSS_ORDER};
pub use jacobi::{common_powers, jacobi_sum, jacobi_sum_reduced, term_count};
pub use kronrod::{integrate_adaptive, Integral};

pub(crate) use jacobi::reduced_sum_halfangle;
