//! Capacities, relative extremal functions, the comparison principle and the
//! sublevel-set machinery behind the uniform C^0 bound.

mod bruteforce;
mod comparison;
mod convergence;
mod degiorgi;
mod envelope;
mod sublevel;

pub use bruteforce::BRUTEFORCE_CAP;
pub use comparison::{check_comparison, ComparisonReport};
pub use convergence::{capacity_convergence, CapacityTrend};
pub use degiorgi::{degiorgi_bound, degiorgi_bound_with_slack, DeGiorgiCertificate, Witness};
pub use envelope::{capacity, extremal_function, CapacityMethod, CapacityQuery, ExtremalResult, MAX_SWEEPS, SWEEP_TOL};
pub use sublevel::{
    c0_certificate, check_kolodziej_inequalities, sublevel_stats, C0Certificate, KolodziejCheck, KolodziejReport,
    LevelStat, SublevelStats,
};
