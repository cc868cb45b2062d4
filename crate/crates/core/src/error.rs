use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the calculus, the document layer and the reduction pipeline can report.
///
/// Variants that describe a non-invertible block carry the block name and the
/// smallest relative pivot seen by the LU factorization, so a near-singular
/// network can be diagnosed rather than just rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular block {block} (smallest relative pivot {smallest_pivot:e})")]
    Singular { block: String, smallest_pivot: f64 },

    #[error("not Stratonovich-representable: {block} is singular (smallest relative pivot {smallest_pivot:e})")]
    NotRepresentable { block: String, smallest_pivot: f64 },

    #[error("series composite has no Stratonovich form: {block} is singular (smallest relative pivot {smallest_pivot:e})")]
    SeriesNotRepresentable { block: String, smallest_pivot: f64 },

    #[error("network is ill-posed: {block} is singular (smallest relative pivot {smallest_pivot:e})")]
    IllPosed { block: String, smallest_pivot: f64 },

    #[error("Schur complement undefined: {block} is singular (smallest relative pivot {smallest_pivot:e})")]
    SchurUndefined { block: String, smallest_pivot: f64 },

    #[error("permutation {permutation} has an even cycle; I + eta is singular")]
    EvenCycle { permutation: String },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("label collision on {0:?}")]
    LabelCollision(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("malformed Belavkin-Holevo matrix: {0}")]
    MalformedV(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown port {0:?}")]
    UnknownPort(String),

    #[error("duplicate connection on {0:?}")]
    DuplicateConnection(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("route cross-check failed: discrepancy {discrepancy:e} exceeds {tolerance:e}")]
    CrossCheck { discrepancy: f64, tolerance: f64 },
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Singular { .. } => "Singular",
            Error::NotRepresentable { .. } => "NotRepresentable",
            Error::SeriesNotRepresentable { .. } => "SeriesNotRepresentable",
            Error::IllPosed { .. } => "IllPosed",
            Error::SchurUndefined { .. } => "SchurUndefined",
            Error::EvenCycle { .. } => "EvenCycle",
            Error::UnknownLabel(_) => "UnknownLabel",
            Error::LabelCollision(_) => "LabelCollision",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::SizeMismatch { .. } => "SizeMismatch",
            Error::MalformedV(_) => "MalformedV",
            Error::InvalidValue(_) => "InvalidValue",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownPort(_) => "UnknownPort",
            Error::DuplicateConnection(_) => "DuplicateConnection",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::CrossCheck { .. } => "CrossCheck",
        }
    }

    /// True for failures meaning "this reduction or conversion does not exist",
    /// as opposed to malformed input.
    pub fn is_undefined_reduction(&self) -> bool {
        matches!(
            self,
            Error::IllPosed { .. }
                | Error::SchurUndefined { .. }
                | Error::NotRepresentable { .. }
                | Error::SeriesNotRepresentable { .. }
                | Error::EvenCycle { .. }
        )
    }

    /// Name of the offending block, when the error is about one.
    pub fn block(&self) -> Option<&str> {
        match self {
            Error::Singular { block, .. }
            | Error::NotRepresentable { block, .. }
            | Error::SeriesNotRepresentable { block, .. }
            | Error::IllPosed { block, .. }
            | Error::SchurUndefined { block, .. } => Some(block),
            _ => None,
        }
    }

    pub fn smallest_pivot(&self) -> Option<f64> {
        match self {
            Error::Singular { smallest_pivot, .. }
            | Error::NotRepresentable { smallest_pivot, .. }
            | Error::SeriesNotRepresentable { smallest_pivot, .. }
            | Error::IllPosed { smallest_pivot, .. }
            | Error::SchurUndefined { smallest_pivot, .. } => Some(*smallest_pivot),
            _ => None,
        }
    }

    /// Re-tags a `Singular` error as another pivot failure kind on a named block.
    /// Other errors pass through unchanged.
    pub(crate) fn retag(self, block: &str, kind: PivotFailure) -> Error {
        match self {
            Error::Singular { smallest_pivot, .. } => {
                let block = block.to_string();
                match kind {
                    PivotFailure::Singular => Error::Singular { block, smallest_pivot },
                    PivotFailure::NotRepresentable => Error::NotRepresentable { block, smallest_pivot },
                    PivotFailure::SeriesNotRepresentable => {
                        Error::SeriesNotRepresentable { block, smallest_pivot }
                    }
                    PivotFailure::IllPosed => Error::IllPosed { block, smallest_pivot },
                    PivotFailure::SchurUndefined => Error::SchurUndefined { block, smallest_pivot },
                }
            }
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PivotFailure {
    Singular,
    NotRepresentable,
    SeriesNotRepresentable,
    IllPosed,
    SchurUndefined,
}
