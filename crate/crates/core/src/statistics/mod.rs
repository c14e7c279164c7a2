//! Point-process statistics of zero sets: empirical densities, rescaled
//! pair-correlation estimation, and the conditional-Gaussian route to the
//! universal two-point function.

mod compare;
mod density;
mod kacrice;
mod paircorr;

pub use compare::{compare_curves, CurveComparison};
pub use density::{empirical_density, CountingDomain, DensityMap, GridSpec, SolveStats};
pub use kacrice::{heisenberg_conditional_gradient_covariance, kappa_asymptote, kappa_kacrice, KappaEstimate};
pub use paircorr::{
    pair_correlation_empirical, pair_correlation_from_trials, poisson_selftest,
    rescaled_zero_configurations, EstimatorParams, NormalizationRecord,
    PairCorrelationCurve, RescaledMetric, TrialFailures,
};
