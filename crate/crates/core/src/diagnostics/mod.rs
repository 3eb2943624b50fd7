//! Run reports and the quantitative checks built on them: penalty and
//! divergence constants, oracle and cross-scheme distances, the twin-run
//! separation test, energy-shape fits and hyperbolicity scans.

mod checks;
mod fit;
mod report;
mod study;

pub use checks::{
    divergence_constant, energy_shape, hyperbolicity_scan, is_nonincreasing, oracle_compare,
    penalty_bound_check, relative_distance, scheme_distance, uniqueness_separation,
    weighted_separation, HyperbolicityReport, OracleDistances, Separation,
};
pub use fit::{convergence_rate, growth_fit, linear_fit, polyfit, slope_through_origin, GrowthFit, LineFit};
pub use report::{Failure, FailureKind, RunReport, Snapshot};
pub use study::{run_study, StudyReport, StudyRow};
