//! EPR steering of two-mode continuous-variable states.
//!
//! Covariance matrices are in vacuum units (vacuum = identity) with
//! quadratures ordered `(x_A, p_A, x_B, p_B)`. The central quantity is the
//! Schur complement `M_σ^B = B - Cᵀ A⁻¹ C`, whose determinant is the minimum
//! of Reid's product of inference variances over local Gaussian unitaries;
//! the steering measure is `G^{A→B} = max{0, -½ ln det M_σ^B}`.
//!
//! Modules:
//!
//! * [`gaussian`]: covariance matrices, physicality, local symplectics,
//!   standard form.
//! * [`steering`]: Schur complements, measures, criteria, key-rate bounds.
//! * [`optimizer`]: multi-start minimization of the Reid product.
//! * [`states`]: state constructors and Gaussian mixtures.
//! * [`sampler`]: seeded homodyne sampling and empirical estimators.
//! * [`sweep`]: squeezing sweep of a rotated two-mode squeezed vacuum.
//! * [`io`], [`report`], [`cli`]: files, number formatting, command line.

// `!(x > y)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod dd;
mod error;
mod linalg;

pub mod cli;
pub mod gaussian;
pub mod io;
pub mod optimizer;
pub mod report;
pub mod sampler;
pub mod states;
pub mod steering;
pub mod sweep;

pub use error::{Error, Result};
pub use gaussian::{
    apply_local, local_invariants, symplectic_from_params, to_standard_form, validate_bona_fide,
    CovMatrix, LocalInvariants, LocalSymplectic, StandardForm, SymplecticParams,
};
pub use optimizer::{estimate_steering_lower, minimize_reid, OptimizationResult};
pub use sampler::{
    empirical_min_variance, empirical_products, fit_linear_estimator, sample, Basis, SampleBatch,
};
pub use states::{
    mixture_cm, noisy_tmsv, random_cm, tmsv, vacuum, GaussianMixtureSpec, GaussianStateSpec,
    StateSpec,
};
pub use steering::{
    check_reid_criterion, check_wiseman, det_schur_complement_a, det_schur_complement_b,
    full_report, gaussian_steering_a_to_b, gaussian_steering_b_to_a, key_rate_bound,
    optimal_key_rate_bound, optimal_params, reid_product, schur_complement_b, SteeringReport,
};
