//! Monte Carlo laboratory for zeros of Gaussian random polynomials on
//! complex projective space.
//!
//! The crate samples rotation-invariant Gaussian ensembles of degree-`N`
//! polynomials in `m` complex variables (`m <= 3`), optionally conditioned on
//! a Newton polytope, computes their zero sets with certified residuals, and
//! estimates point-process statistics of those zeros: expected densities,
//! rescaled pair correlations, reproducing-kernel scaling limits and `L^p`
//! norm growth.
//!
//! Module map:
//!
//! * [`ensembles`] — monomial bases, Fubini-Study norms, sampling and
//!   evaluation of random sections.
//! * [`polytopes`] — exact lattice-polytope geometry, the moment map and the
//!   allowed/forbidden region classifier.
//! * [`kernel`] — full and polytope-conditional reproducing kernels, their
//!   rescaled limits and jet covariances.
//! * [`zeros`] — certified all-roots solvers (univariate on the projective
//!   line, bivariate via resultant elimination).
//! * [`statistics`] — pair-correlation estimators and the conditional
//!   Gaussian route to the universal two-point function.
//! * [`norms`] — `L^p` and sup norms of random sections and their growth.
//!
//! Numeric kernels (polynomial evaluation, dense linear algebra, compensated
//! summation) are generic over the scalar via [`numeric::Real`], so the same
//! code runs in `f64` and in double-double precision where an independent
//! high-precision route is wanted. The aliases below fix the default lane.

pub mod ensembles;
pub mod error;
pub mod kernel;
pub mod norms;
pub mod numeric;
pub mod polytopes;
pub mod rng;
pub mod statistics;
pub mod zeros;

pub use error::{CoreError, Result};

/// Default real scalar for the statistical layers.
pub type R64 = f64;
/// Default complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Complex number over the double-double scalar, for high-precision routes.
pub type CDd = num_complex::Complex<numeric::Dd>;
