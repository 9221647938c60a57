//! Variational engine: minimal output entropy, conjugate function, convex
//! closure and χ-function, Holevo capacity and its certificates.

mod capacity;
mod closure;
mod config;
mod duality;
mod ensemble;
mod minent;
pub(crate) mod nelder_mead;
pub(crate) mod sphere;

pub use capacity::{
    check_capacity_inequality, check_optimal_average, holevo_capacity, omega_consistency, CapacityReport,
    ConstraintSet, OptimalAverageCheck, Slack, CAPACITY_TOL, OPTIMAL_AVERAGE_TOL,
};
pub(crate) use capacity::distance_operator;
pub use closure::{chi, chi_with_seeds, closure_with_seeds, convex_closure_entropy, ChiResult, ClosureResult};
pub use config::OptimizerConfig;
pub use duality::{closure_via_duality, DualResult};
pub use ensemble::{Ensemble, EnsembleMember};
pub use minent::{
    conjugate, eigenvector_residual_c, eigenvector_residual_e, min_output_entropy, min_output_entropy_seeded,
    ConjugateResult, MinEntropyReport,
};
