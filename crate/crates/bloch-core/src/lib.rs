//! Plane-wave spectral toolkit for periodic systems of differential operators.
//!
//! The crate assembles truncated Fourier (plane-wave) matrices for operators of
//! the form `L + P + B` acting on vector-valued functions that are quasiperiodic
//! with respect to a lattice: `L` is a constant-coefficient elliptic principal
//! part of order `2s`, `P` collects lower-order terms with periodic matrix
//! coefficients, and `B` is a bounded Hermitian Fourier multiplier.  On top of
//! the assembled matrices it provides:
//!
//! * band functions `t -> lambda_n(t)` over paths of quasimomenta ([`spectral`]),
//! * eigenvalue clustering, interval counting, and counting certificates along
//!   sequences `t_k -> t_0` ([`spectral`]),
//! * Riesz spectral projectors by contour quadrature and by eigenvector
//!   accumulation, plus phase-continuous Bloch vectors under reference and
//!   plane-wave alignment conventions ([`projector`]),
//! * the graph-subspace gap metric between Hermitian matrices and Lipschitz
//!   diagnostics for it along quasimomentum sequences ([`gapmetric`]),
//! * explicit coercivity and relative-bound constants for the assembled
//!   operators ([`constants`]).
//!
//! All enumeration orders are deterministic, so identical inputs produce
//! bit-identical outputs regardless of thread count.

pub mod constants;
pub mod error;
pub mod gapmetric;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod projector;
pub mod specfile;
pub mod spectral;

pub use error::SpectralError;

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, SpectralError>;
