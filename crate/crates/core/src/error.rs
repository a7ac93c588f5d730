use thiserror::Error;

use crate::grid::GridFunction;
use crate::solver::SolveReport;

/// Errors raised by grid construction and the discrete calculus.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("empty interior: no node satisfies rho < {threshold}")]
    EmptyInterior { threshold: f64 },
    #[error("domain touches the box edge at node {node} (half-width too small)")]
    TouchesBoxEdge { node: usize },
    #[error("collar width {collar} too wide (must be in (0, {max}))")]
    CollarTooWide { collar: f64, max: f64 },
    #[error("node {node} is not an interior node")]
    NotInterior { node: usize },
    #[error("field/grid mismatch: {0}")]
    Mismatch(String),
    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
    #[error("matrix at node {node} is not positive definite (lambda_min = {lambda_min:e})")]
    NotPositiveDefinite { node: usize, lambda_min: f64 },
    #[error("form is not semipositive at node {node} (lambda_min = {lambda_min:e})")]
    NotSemipositive { node: usize, lambda_min: f64 },
    #[error("field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised by geometric input construction.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("density blows up at node {node}: s = 0 with vanishing w_F")]
    UnregularizedDensity { node: usize },
    #[error("density not positive at node {node} (value {value:e})")]
    NonPositiveDensity { node: usize, value: f64 },
    #[error("support condition violated at node {node}")]
    SupportMismatch { node: usize },
    #[error("expression error at column {column}: {message}")]
    Expr { column: usize, message: String },
}

/// Errors raised by the Monge-Ampere solvers.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("initial iterate violates the PSH safeguard (lambda_min = {lambda_min:e} at node {node})")]
    SafeguardUnreachable { node: usize, lambda_min: f64 },
    #[error("Newton did not converge: residual {:e} after {} iterations", .report.residual, .report.iterations)]
    NotConverged {
        best: Box<GridFunction>,
        report: SolveReport,
    },
    #[error("continuation stalled at t = {t} (step below {min_step})")]
    ContinuationStalled { t: f64, min_step: f64 },
    #[error("no admissible subsolution scale A <= {a_max}")]
    NoSubsolution { a_max: f64 },
}

/// Errors raised by the pluripotential toolkit.
#[derive(Debug, Error)]
pub enum PluriError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid capacity query: {0}")]
    InvalidQuery(String),
    #[error("envelope sweep did not converge in {sweeps} sweeps (last change {change:e})")]
    SweepNotConverged { sweeps: usize, change: f64 },
    #[error("brute-force capacity limited to {cap} interior nodes, grid has {actual}")]
    BruteforceTooLarge { cap: usize, actual: usize },
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
}

/// Errors raised by the log-pole pipeline.
#[derive(Debug, Error)]
pub enum SingularError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid pole specification: {0}")]
    InvalidPoles(String),
    #[error("pole {index} lies within {min_distance} of the boundary band")]
    PoleTooClose { index: usize, min_distance: f64 },
    #[error("annuli unresolvable: {0}")]
    Unresolvable(String),
}
