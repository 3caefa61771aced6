//! Correspondences between the whole-plane profile and the two disc
//! problems.
//!
//! A stochastic solution is the profile restricted to the ball where it stays
//! above the boundary constant `β_{τ,γ}` and rescaled to the unit disc. A
//! deterministic solution is the profile restricted to the ball `B_R` that
//! carries prescribed partial masses of both species.

mod deterministic;
mod functional;
mod record;
mod stochastic;

pub use deterministic::{
    deterministic_existence_scan, deterministic_existence_scan_with, existence_table, find_deterministic_solution,
    find_deterministic_solution_with,
    DetOutcome, DetSolution, ExistenceRow, NotFound, NotFoundReason, ScanOptions,
};
pub use functional::{
    functional_det, functional_standard, functional_stoch, pohozaev_residual, rescale_to_z,
    Rescaled,
};
pub use record::{SolutionKind, SolutionRecord};
pub use stochastic::{
    build_stochastic_solution, default_alpha_grid, lambda_curve, lambda_curve_with, lambda_of_alpha,
    lambda_point, sigma_of_alpha, stochastic_forward_map, CurveReport, LambdaCurvePoint,
};
