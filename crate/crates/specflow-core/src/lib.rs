//! Spectral flow for paths and clutched loops of self-adjoint operators.
//!
//! The toolkit computes the spectral flow of operator paths via the
//! crossing-form formula, cross-checks it against an eigenvalue-tracking
//! count, evaluates the odd first Chern number of a self-adjoint loop as the
//! winding of the determinant of a Cayley-transformed window compression,
//! and uses nonvanishing spectral flow along parameter loops to certify,
//! localize and continue bifurcation points of parameterized families of
//! functionals.
//!
//! Everything acts on dense matrices over a Galerkin truncation; the sole
//! infinite-dimensional compromise is the spectral window carried by
//! [`paths::ClutchedLoop`].

pub mod bifurcation;
pub mod error;
pub mod ktheory;
pub mod linalg;
pub mod paths;
pub mod scenarios;
pub mod sflow;
pub mod tol;

pub use error::{Error, Result};
pub use tol::Tolerances;
