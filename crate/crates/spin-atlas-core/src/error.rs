use alloc::string::String;

/// Errors produced by the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// Spin multiplicity outside {2, 3}.
    #[error("unsupported spin multiplicity {0}; only 2 and 3 are supported")]
    UnsupportedMultiplicity(usize),
    /// An axis whose norm differs from one.
    #[error("axis ({0}, {1}, {2}) is not a unit vector")]
    NonUnitAxis(f64, f64, f64),
    /// Site index outside the spec.
    #[error("site index {index} out of range for {len} sites")]
    SiteOutOfRange {
        /// Offending index.
        index: usize,
        /// Number of sites.
        len: usize,
    },
    /// Operator size does not match the slot it is embedded into.
    #[error("operator of dimension {op} does not fit slot of dimension {slot}")]
    DimensionMismatch {
        /// Operator dimension.
        op: usize,
        /// Slot dimension.
        slot: usize,
    },
    /// Composite space above the dense cap.
    #[error("composite dimension {dim} exceeds the cap of {cap}")]
    DimensionCap {
        /// Requested dimension.
        dim: usize,
        /// Allowed maximum.
        cap: usize,
    },
    /// Structurally invalid spin-system description.
    #[error("malformed spin system: {0}")]
    MalformedSpec(String),
    /// Matrix is not Hermitian within tolerance.
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    /// Eigensolver iteration limit reached.
    #[error("eigensolver failed to converge")]
    NoConvergence,
    /// Invalid field grid or range.
    #[error("invalid field range: {0}")]
    InvalidRange(String),
    /// Negative or otherwise invalid temperature.
    #[error("invalid temperature {0} K")]
    InvalidTemperature(f64),
    /// Non-physical model parameter (negative field, non-positive D, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Unknown catalog identifier.
    #[error("unknown system '{id}'; available: {available}")]
    UnknownSystem {
        /// Requested id.
        id: String,
        /// Comma separated list of known ids.
        available: String,
    },
    /// Spec document could not be parsed.
    #[error("spec parse error: {0}")]
    SpecParse(String),
    /// Trace fails validation.
    #[error("invalid trace: {0}")]
    InvalidTrace(crate::trace::TraceDefect),
    /// Least-squares normal matrix is singular.
    #[error("singular Jacobian in dip fit; try fewer dips")]
    SingularJacobian,
    /// Fit seeds are unusable.
    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),
}
