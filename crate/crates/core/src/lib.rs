//! Quasi-classical (canonical-operator) and exact eigensections of the magnetic
//! Laplacian of the Dirac monopole on the two-sphere.
//!
//! The sphere carries the line bundle `L^N` glued from two polar charts; its
//! magnetic Laplacian has eigenvalues `j(j+1) + (N/2)(2j+1)`. [`wkb`] builds
//! Bohr–Sommerfeld almost-eigensections from the invariant tori of [`classical`].
//! [`harness`] compares them with the monopole harmonics of [`exact`].

pub mod bundle;
pub mod classical;
pub mod error;
pub mod exact;
pub mod harness;
pub mod rational;
pub mod specfun;
pub mod wkb;

pub use bundle::{Chart, MonopoleBundle, Section};
pub use classical::{Branch, End, EndKind, PhaseState, TorusParams, Trajectory};
pub use error::{Error, Result};
pub use exact::{ExactHarmonic, HarmonicLabel};
pub use harness::{ComparisonReport, IndexRule, SweepPattern, SweepTable};
pub use wkb::{QuantizedParams, QuantumNumbers, WkbForm, WkbSection};
