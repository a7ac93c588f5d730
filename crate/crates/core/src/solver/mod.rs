//! Dirichlet Monge-Ampere solver: damped Newton, continuity path in t,
//! the s-family driver, subsolutions and barrier diagnostics.

mod config;
mod continuation;
mod diagnostics;
mod newton;
mod subsolution;

pub use config::{SolveConfig, SolveReport};
pub use continuation::{
    continuity_path, s_family_limit, ContinuationState, HistoryRecord, SFamilyOptions, SFamilyResult, SRecord,
    MIN_T_STEP,
};
pub use diagnostics::{barrier_diagnostics, BarrierReport};
pub use newton::{dirichlet_lift, discrete_bowl, newton_solve, newton_solve_ref, Rhs};
pub use subsolution::{
    find_subsolution, find_subsolution_for_density, subsolution_candidate, verify_subsolution,
    verify_subsolution_ref, Subsolution, SubsolutionCheck,
};
