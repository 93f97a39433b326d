use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants fall into two groups: input/precondition failures (see
/// [`FockError::is_validation`]) and numerical diagnostics that fire after a
/// computation has started.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value overflows f64 (log-magnitude {log_mag:.3}); use the log-domain routine")]
    Overflow { log_mag: f64 },

    #[error("search radius {radius} is below the concentration radius {required}")]
    RadiusTooSmall { radius: f64, required: f64 },

    #[error("operation not supported for the {0} representation")]
    UnsupportedRepresentation(&'static str),

    #[error("functions belong to different spaces (alpha {0} vs {1})")]
    AlphaMismatch(f64, f64),

    #[error("window radius {0} is negative")]
    EmptyWindow(f64),

    #[error("duplicate point at ({0}, {1})")]
    DuplicatePoint(f64, f64),

    #[error("point set has no lattice index")]
    MissingLatticeIndex,

    #[error("perturbed points {0} and {1} coincide; retry with another seed or a smaller shift")]
    CollisionAfterPerturbation(usize, usize),

    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),

    #[error("lattice index ({0}, {1}) is claimed by two points")]
    NotUniformlyClose(i64, i64),

    #[error("no translate of the {r}-square fits inside the window of radius {window}")]
    WindowTooSmall { r: f64, window: f64 },

    #[error("truncation index {m} too small: tail remainder {remainder:.3e} exceeds tolerance")]
    TruncationTooSmall { m: usize, remainder: f64 },

    #[error("quasi-period probes disagree (spread {0:.3e})")]
    InconsistentProbes(f64),

    #[error("point set lacks lattice index ({0}, {1})")]
    NodeIndexMissing(i64, i64),

    #[error("quadrature order too low: doubling moved a cell integral by {0:.3e} (relative)")]
    QuadratureOrderTooLow(f64),

    #[error("point ({0}, {1}) is not in the set")]
    PointNotInSet(f64, f64),

    #[error("lattice density beta = {beta} violates the required ordering against alpha = {alpha}")]
    DensityOrderViolated { alpha: f64, beta: f64 },

    #[error("missing sample at lattice index ({0}, {1})")]
    MissingSamples(i64, i64),

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl FockError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        FockError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by inputs violating a precondition, as opposed
    /// to numerical diagnostics raised mid-computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            FockError::Overflow { .. }
                | FockError::TruncationTooSmall { .. }
                | FockError::InconsistentProbes(_)
                | FockError::QuadratureOrderTooLow(_)
                | FockError::CollisionAfterPerturbation(..)
                | FockError::Io(_)
        )
    }

    /// Short stable identifier, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            FockError::InvalidParameter { .. } => "InvalidParameter",
            FockError::Overflow { .. } => "Overflow",
            FockError::RadiusTooSmall { .. } => "RadiusTooSmall",
            FockError::UnsupportedRepresentation(_) => "UnsupportedRepresentation",
            FockError::AlphaMismatch(..) => "AlphaMismatch",
            FockError::EmptyWindow(_) => "EmptyWindow",
            FockError::DuplicatePoint(..) => "DuplicatePoint",
            FockError::MissingLatticeIndex => "MissingLatticeIndex",
            FockError::CollisionAfterPerturbation(..) => "CollisionAfterPerturbation",
            FockError::TooFewPoints(_) => "TooFewPoints",
            FockError::NotUniformlyClose(..) => "NotUniformlyClose",
            FockError::WindowTooSmall { .. } => "WindowTooSmall",
            FockError::TruncationTooSmall { .. } => "TruncationTooSmall",
            FockError::InconsistentProbes(_) => "InconsistentProbes",
            FockError::NodeIndexMissing(..) => "NodeIndexMissing",
            FockError::QuadratureOrderTooLow(_) => "QuadratureOrderTooLow",
            FockError::PointNotInSet(..) => "PointNotInSet",
            FockError::DensityOrderViolated { .. } => "DensityOrderViolated",
            FockError::MissingSamples(..) => "MissingSamples",
            FockError::Io(_) => "Io",
            FockError::Format(_) => "Format",
        }
    }
}

impl From<std::io::Error> for FockError {
    fn from(e: std::io::Error) -> Self {
        FockError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for FockError {
    fn from(e: serde_json::Error) -> Self {
        FockError::Format(e.to_string())
    }
}

impl From<csv::Error> for FockError {
    fn from(e: csv::Error) -> Self {
        FockError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FockError>;
