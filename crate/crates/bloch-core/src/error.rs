//! Error taxonomy for the toolkit.
//!
//! Variants are grouped by the stage that raises them: input validation,
//! operator assembly, spectral computations, and alignment/certification.
//! The CLI maps these groups onto distinct process exit codes, so variants
//! should stay coarse enough to classify but specific enough to debug from
//! the message alone.

use thiserror::Error;

/// All failure modes surfaced by the crate.
#[derive(Debug, Error)]
pub enum SpectralError {
    /// Lattice generators are linearly dependent (or numerically so).
    #[error("lattice generators are singular: |det| = {determinant:.3e}")]
    DegenerateLattice { determinant: f64 },

    /// A structural problem with user-supplied data: wrong dimensions,
    /// empty coefficient tables, malformed paths, out-of-range indices.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The assembled matrix failed the Hermiticity gate. This signals an
    /// operator specification that is not formally self-adjoint, not a bug
    /// in the assembly itself.
    #[error("assembled matrix is not Hermitian: defect {defect:.3e} exceeds {tolerance:.3e}")]
    NonSelfAdjointSpec { defect: f64, tolerance: f64 },

    /// The truncation radius cannot represent the requested couplings.
    #[error("cutoff {cutoff} too small: requires at least {required}")]
    CutoffTooSmall { required: f64, cutoff: f64 },

    /// A shifted coefficient vector would leave the truncation ball.
    #[error("shift by a dual lattice vector of norm {shift_norm:.3} leaves the truncation: support must stay {required_margin:.3} below the cutoff")]
    UnsupportedShift { shift_norm: f64, required_margin: f64 },

    /// An iterative numerical routine failed to converge or a linear solve
    /// encountered a singular system.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The quadrature contour passes too close to an eigenvalue.
    #[error("contour passes within {distance:.3e} of an eigenvalue (minimum allowed {minimum:.3e})")]
    ContourCollision { distance: f64, minimum: f64 },

    /// Phase alignment is undefined because the reference overlap vanishes.
    #[error("phase alignment undefined: |overlap| = {overlap:.3e} is below {threshold:.3e}")]
    AlignmentUndefined { overlap: f64, threshold: f64 },

    /// A band that must stay simple along a scan touched its neighbours.
    #[error("band {band} is not simple at sample {sample}: neighbour gap {gap:.3e}")]
    SimplicityViolation { band: usize, sample: usize, gap: f64 },

    /// An interval that must contain a fixed number of eigenvalues does not.
    #[error("counting violation at sample {sample}: interval around cluster {cluster} holds {found} eigenvalues, expected {expected}")]
    CountingViolation {
        sample: usize,
        cluster: usize,
        expected: usize,
        found: usize,
    },

    /// Cluster-gap quantities are undefined for a single cluster.
    #[error("cluster gap undefined: the spectrum forms a single cluster")]
    UndefinedGap,

    /// The coercivity enumeration cap is below the proven crossover radius.
    #[error("enumeration cap {cap:.3} is below the required radius {required:.3}")]
    InsufficientEnumeration { required: f64, cap: f64 },

    /// The principal symbol vanishes somewhere on the unit sphere.
    #[error("degenerate principal symbol: minimum over the unit sphere is {minimum:.3e}")]
    DegenerateSymbol { minimum: f64 },

    /// A certified inequality failed on a concrete trial vector.
    #[error("inequality violated by {item}: left side {lhs:.6e} exceeds right side {rhs:.6e}")]
    InequalityViolation { item: String, lhs: f64, rhs: f64 },

    /// A problem-spec file could not be parsed as JSON.
    #[error("parse error: {0}")]
    ParseError(String),

    /// Filesystem trouble reading or writing run artifacts.
    #[error("i/o error: {0}")]
    Io(String),
}
