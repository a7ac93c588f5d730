use std::time::Instant;

use serde::Serialize;

use crate::error::SolverError;
use crate::geometry::{regularized_density, DensitySpec, ReferenceForms};
use crate::grid::{BoundaryData, DomainMask, GridFunction};

use super::config::{SolveConfig, SolveReport};
use super::newton::{newton_solve, Rhs};

/// Smallest t-step tried before the path is declared stalled.
pub const MIN_T_STEP: f64 = 1e-4;

/// One accepted solve along a path; serialized as a JSON-lines report record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistoryRecord {
    pub s: f64,
    pub t: f64,
    pub iterations: usize,
    pub residual: f64,
    pub sup_phi: f64,
    pub inf_phi: f64,
    pub lambda_min: f64,
    pub wall_ms: f64,
}

impl HistoryRecord {
    fn new(mask: &DomainMask, s: f64, t: f64, phi: &GridFunction, report: &SolveReport) -> Self {
        HistoryRecord {
            s,
            t,
            iterations: report.iterations,
            residual: report.residual,
            sup_phi: phi.sup_abs(mask),
            inf_phi: phi.min_interior(mask),
            lambda_min: report.lambda_min,
            wall_ms: report.wall_ms,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ContinuationState {
    pub s: f64,
    pub t: f64,
    pub phi: GridFunction,
    pub history: Vec<HistoryRecord>,
}

fn path_rhs(mask: &DomainMask, det_ts: &GridFunction, target: &GridFunction, t: f64) -> Result<Rhs, SolverError> {
    let mut g = GridFunction::zeros(*mask.spec());
    for &node in mask.interior() {
        g.set(node, (1.0 - t) * det_ts.get(node) + t * target.get(node));
    }
    Rhs::from_density(mask, &g)
}

fn validate_t_schedule(ts: &[f64]) -> Result<(), SolverError> {
    if ts.first() != Some(&0.0) {
        return Err(SolverError::InvalidInput("t schedule must start at 0".into()));
    }
    if ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(SolverError::InvalidInput("t schedule must increase within [0, 1]".into()));
    }
    Ok(())
}

/// Follows det(theta_s + H(phi)) = (1 - t) det(theta_s) + t target with zero
/// boundary data along `t_schedule`, warm-starting each solve and halving
/// failed t-steps down to `MIN_T_STEP`.
pub fn continuity_path(
    mask: &DomainMask,
    forms: &ReferenceForms,
    target: &GridFunction,
    t_schedule: &[f64],
    cfg: &SolveConfig,
) -> Result<ContinuationState, SolverError> {
    validate_t_schedule(t_schedule)?;
    if !(forms.s > 0.0) {
        return Err(SolverError::InvalidInput("continuity path needs s > 0".into()));
    }
    let det_ts = forms.det_theta_s(mask);
    let bc = BoundaryData::zeros(mask);
    let mut phi = GridFunction::zeros(*mask.spec());
    let clock = Instant::now();
    let (k, lam) = forms.theta_s().min_eigenvalue();
    let start = SolveReport {
        converged: true,
        residual: 0.0,
        iterations: 0,
        lambda_min: lam,
        wall_ms: if cfg.record_wall_time { clock.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        residual_history: vec![0.0],
    };
    if lam < cfg.psh_epsilon {
        return Err(SolverError::SafeguardUnreachable { node: mask.interior()[k], lambda_min: lam });
    }
    let mut history = vec![HistoryRecord::new(mask, forms.s, 0.0, &phi, &start)];
    let mut t = 0.0;
    for &t_target in &t_schedule[1..] {
        let mut step = t_target - t;
        while t < t_target {
            let t_try = if t + step >= t_target { t_target } else { t + step };
            let rhs = path_rhs(mask, &det_ts, target, t_try)?;
            match newton_solve(mask, forms, &rhs, &bc, &phi, cfg) {
                Ok((next, report)) => {
                    phi = next;
                    t = t_try;
                    history.push(HistoryRecord::new(mask, forms.s, t, &phi, &report));
                    step = t_target - t;
                }
                Err(SolverError::NotConverged { .. }) | Err(SolverError::SafeguardUnreachable { .. }) => {
                    step *= 0.5;
                    if step < MIN_T_STEP {
                        return Err(SolverError::ContinuationStalled { t, min_step: MIN_T_STEP });
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ContinuationState { s: forms.s, t, phi, history })
}

#[derive(Clone, Debug)]
pub struct SFamilyOptions {
    /// Restricts the Cauchy differences to nodes where the weight is at
    /// least the cutoff; all interior nodes when `None`.
    pub cauchy_weight: Option<(GridFunction, f64)>,
    /// Allowed relative variation (max - min) / max of sup |phi_s|.
    pub uniformity: f64,
}

impl Default for SFamilyOptions {
    fn default() -> Self {
        SFamilyOptions { cauchy_weight: None, uniformity: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SRecord {
    pub s: f64,
    pub sup_phi: f64,
    pub inf_phi: f64,
    /// sup |phi_s - phi_{s_prev}| on the monitored nodes.
    pub cauchy_diff: Option<f64>,
    /// Whether this s was reached by a direct warm-started solve.
    pub direct: bool,
}

#[derive(Clone, Debug)]
pub struct SFamilyResult {
    pub phi: GridFunction,
    pub state: ContinuationState,
    pub per_s: Vec<SRecord>,
    pub variation: f64,
    pub uniform: bool,
}

/// Solves the regularized family for each s in a decreasing schedule and
/// records the C^0 and Cauchy-rate monitors.
///
/// The first s goes through the continuity path; later values first try a
/// direct solve warm-started from the previous solution and fall back to
/// the path when that fails.
pub fn s_family_limit(
    mask: &DomainMask,
    forms: &ReferenceForms,
    spec: &DensitySpec,
    s_schedule: &[f64],
    t_schedule: &[f64],
    cfg: &SolveConfig,
    opts: &SFamilyOptions,
) -> Result<SFamilyResult, SolverError> {
    if s_schedule.is_empty() || s_schedule.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(SolverError::InvalidInput("s schedule must be nonempty within (0, 1]".into()));
    }
    if s_schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(SolverError::InvalidInput("s schedule must decrease".into()));
    }
    let monitored: Vec<usize> = match &opts.cauchy_weight {
        Some((w, cutoff)) => mask.interior().iter().copied().filter(|&i| w.get(i) >= *cutoff).collect(),
        None => mask.interior().to_vec(),
    };
    let bc = BoundaryData::zeros(mask);
    let mut history = Vec::new();
    let mut per_s: Vec<SRecord> = Vec::new();
    let mut prev: Option<GridFunction> = None;
    for &s in s_schedule {
        let forms_s = forms.with_s(s)?;
        let target = regularized_density(spec, s, mask)?;
        let mut direct = false;
        let mut solved = None;
        if let Some(p) = &prev {
            let rhs = Rhs::from_density(mask, &target)?;
            if let Ok((phi, report)) = newton_solve(mask, &forms_s, &rhs, &bc, p, cfg) {
                history.push(HistoryRecord::new(mask, s, 1.0, &phi, &report));
                direct = true;
                solved = Some(phi);
            }
        }
        let phi = match solved {
            Some(phi) => phi,
            None => {
                let st = continuity_path(mask, &forms_s, &target, t_schedule, cfg)?;
                history.extend(st.history);
                st.phi
            }
        };
        let cauchy_diff = prev.as_ref().map(|p| phi.max_diff_on(p, &monitored));
        per_s.push(SRecord {
            s,
            sup_phi: phi.sup_abs(mask),
            inf_phi: phi.min_interior(mask),
            cauchy_diff,
            direct,
        });
        prev = Some(phi);
    }
    let sups: Vec<f64> = per_s.iter().map(|r| r.sup_phi).collect();
    let max = sups.iter().copied().fold(0.0, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = if max > 0.0 { (max - min) / max } else { 0.0 };
    let phi = prev.unwrap();
    let t_end = *t_schedule.last().unwrap_or(&1.0);
    let state = ContinuationState { s: *s_schedule.last().unwrap(), t: t_end, phi: phi.clone(), history };
    Ok(SFamilyResult { phi, state, per_s, variation, uniform: variation <= opts.uniformity })
}
