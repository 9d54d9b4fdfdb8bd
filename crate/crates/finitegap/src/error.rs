//! Error type shared by the whole crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building a stack or evaluating it.
#[derive(Debug, Error)]
pub enum Error {
    /// A refractive index was zero or negative.
    #[error("refractive index must be positive, got {0}")]
    NonPositiveIndex(f64),

    /// A layer thickness was zero or negative.
    #[error("layer thickness must be positive, got {0}")]
    NonPositiveThickness(f64),

    /// A unit cell was built with no layers at all.
    #[error("a unit cell needs at least one layer")]
    EmptyCell,

    /// Transmission amplitude too small to invert into a transfer matrix.
    #[error("transmission amplitude is zero to working precision; transfer matrix is singular")]
    SingularMatrix,

    /// A quantity that must be nonzero for the formulas to apply was zero.
    #[error("{0}")]
    Domain(String),

    /// Cell index outside `1..=periods`.
    #[error("cell index {cell} outside stack of {periods} periods")]
    CellOutOfRange { cell: usize, periods: usize },

    /// Requested period count above the supported cap.
    #[error("period count {0} exceeds the supported maximum {1}")]
    TooManyPeriods(usize, usize),

    /// The supplied Bloch cosine disagrees with the matrix trace.
    #[error("Bloch cosine {x} inconsistent with matrix half-trace {half_trace}")]
    TraceMismatch { x: f64, half_trace: f64 },

    /// The Chebyshev recurrence left the representable range.
    #[error("recurrence overflow at order {order} (|x| = {x}); the stack is opaque at this depth")]
    RecurrenceOverflow { order: usize, x: f64 },

    /// The two solution basis functions were linearly dependent at the cell edges.
    #[error("degenerate field basis, edge determinant {0:e}")]
    DegenerateBasis(f64),

    /// A dipole was placed outside the stack or on an interface.
    #[error("invalid dipole placement: {0}")]
    DipolePlacement(String),

    /// A computed quantity came out NaN or infinite.
    #[error("non-finite {quantity} at omega_rel = {omega_rel} (route: {route})")]
    NonFinite {
        quantity: String,
        omega_rel: f64,
        route: String,
    },

    /// Configuration file contents failed validation.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the command-line tool maps this error to.
    ///
    /// Configuration and I/O problems exit with 2, numerical or validation
    /// failures with 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config { .. } | Error::Io(_) | Error::Json(_) => 2,
            _ => 1,
        }
    }
}
