use thiserror::Error;

use crate::radius::EnclosingBall;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid space form: {0}")]
    InvalidSpaceForm(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point is off the ambient model (residual {residual:e})")]
    OffModel { residual: f64 },

    #[error("points are antipodal or outside a common open hemisphere")]
    Antipodal,

    #[error("tangent vector of length {length} reaches the cut locus (bound {bound})")]
    CutLocus { length: f64, bound: f64 },

    #[error("coincident points: the radial field is undefined at the pole")]
    CoincidentPoints,

    #[error("configuration violates the open-hemisphere restriction: {0}")]
    Hemisphere(String),

    #[error("degenerate immersion at parameter {u:?}: {reason}")]
    DegenerateImmersion { u: Vec<f64>, reason: String },

    #[error("at least {needed} points required, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("enclosing-ball iteration hit its cap after {} iterations (residual {:e})", .best.iterations, .best.residual)]
    NonConvergence { best: Box<EnclosingBall> },

    #[error("surface volume must be positive, got {0}")]
    ZeroVolume(f64),

    #[error("mean curvature norm vanishes: degenerate input")]
    VanishingMeanCurvature,

    #[error("point lies on or outside the unit ball boundary (|x| = {0})")]
    OutsideBall(f64),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("invalid surface family: {0}")]
    InvalidSpec(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
