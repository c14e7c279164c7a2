//! Error type shared by the numerical modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// A monomial exponent vector is outside the degree simplex or has the
    /// wrong dimension.
    #[error("invalid monomial index: {0}")]
    InvalidIndex(String),

    /// A basis restriction produced no monomials at all.
    #[error("empty basis: {0}")]
    EmptyBasis(String),

    /// Vertex data does not describe a lattice polytope we accept.
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    /// A root solver could not certify the full zero set.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The input system is non-generic (shared component, identically zero
    /// resultant, identically zero section).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A configured degree cap was exceeded.
    #[error("degree cap exceeded: {0}")]
    DegreeCap(String),

    /// A Gaussian conditioning step was refused because the covariance is
    /// numerically singular.
    #[error("conditioning singularity: {0}")]
    Conditioning(String),

    /// A quadrature did not pass its grid-doubling resolution check.
    #[error("quadrature under-resolved: {0}")]
    Resolution(String),

    /// A logarithm or division produced a non-finite value.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Parameters outside the supported range of an operation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed serialized data.
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
