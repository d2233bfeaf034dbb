//! Special functions, probability bounds, quadrature rules and goodness-of-fit
//! statistics used by the density, sampler and experiment modules.

mod bounds;
mod gamma;
mod ks;
mod quadrature;

pub use bounds::{
    chi2_rate, chi2_ratio_tail_bound, coupling_tail_bound, normal_cdf, normal_tail_sandwich,
    CouplingBound, TailSandwich,
};
pub use gamma::{gamma_ratio_bounds, log_gamma, GammaRatioBounds, RatioBounds};
pub use ks::{ks_statistic, ks_statistic_unsorted, ks_two_sample, KsResult};
pub use quadrature::{
    adaptive_simpson, euler_maclaurin_double_sum, gauss_hermite_expectation, integrate_rectangle,
    DoubleSumApprox, GaussHermite,
};
