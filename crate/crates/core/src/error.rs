use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The level set `H = E`, `I2 = P` is empty (`P^2 >= E + 1/4`).
    #[error("empty torus: P^2 = {p_sq} >= E + 1/4 = {bound}")]
    EmptyTorus { p_sq: f64, bound: f64 },

    /// A grid point or trajectory came within the pole guard band.
    #[error("pole proximity at theta = {theta} (t = {time:?})")]
    PoleProximity { theta: f64, time: Option<f64> },

    /// The oscillatory form was requested inside a fold collar.
    #[error("theta = {theta} lies inside the fold collar [{lo}, {hi}]")]
    FoldRegion { theta: f64, lo: f64, hi: f64 },

    /// A fold-only operation was applied to a pole-touching torus end.
    #[error("degenerate torus: {0}")]
    Degenerate(String),

    /// A printed closed form left its admissible range.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    /// The invariant density diverges at a fold end.
    #[error("density diverges at fold theta = {0}")]
    Divergence(f64),

    /// Phase unwrapping could not be resolved on the sampled path.
    #[error("phase resolution failure: {0}")]
    Resolution(String),

    /// Two sections live on different bundles.
    #[error("bundle mismatch: degree {left} vs {right}")]
    BundleMismatch { left: i64, right: i64 },

    /// A tolerance could not be met.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
