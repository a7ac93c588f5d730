use std::time::Instant;

use rayon::prelude::*;

use crate::calculus::{HermitianField, HessianStencil};
use crate::error::SolverError;
use crate::geometry::ReferenceForms;
use crate::grid::{harmonic_extension, neg_laplacian_scaled, BoundaryData, DomainMask, GridFunction};
use crate::herm::Herm;
use crate::linalg;

use super::config::{SolveConfig, SolveReport};

/// Right-hand side `g = exp(log_base + lambda * phi)` of
/// det(H_ref + H(phi)) = g, stored per interior position.
#[derive(Clone, Debug, PartialEq)]
pub struct Rhs {
    pub log_base: Vec<f64>,
    pub lambda: f64,
}

impl Rhs {
    /// phi-independent right-hand side from a density positive on the interior.
    pub fn from_density(mask: &DomainMask, density: &GridFunction) -> Result<Self, SolverError> {
        density.check_layout(mask)?;
        let mut log_base = Vec::with_capacity(mask.interior_count());
        for &node in mask.interior() {
            let g = density.get(node);
            if !(g > 0.0) || !g.is_finite() {
                return Err(SolverError::InvalidInput(format!("density {g} at node {node} is not positive")));
            }
            log_base.push(g.ln());
        }
        Ok(Rhs { log_base, lambda: 0.0 })
    }

    /// `exp(log_density + lambda * phi)` from a log-density field.
    pub fn from_log_density(mask: &DomainMask, log_density: &GridFunction, lambda: f64) -> Result<Self, SolverError> {
        log_density.check_layout(mask)?;
        let log_base: Vec<f64> = mask.interior().iter().map(|&i| log_density.get(i)).collect();
        if let Some(v) = log_base.iter().find(|v| !v.is_finite()) {
            return Err(SolverError::InvalidInput(format!("non-finite log density {v}")));
        }
        Ok(Rhs { log_base, lambda })
    }

    /// The density g(node, phi) at interior position k.
    pub fn density(&self, k: usize, phi: f64) -> f64 {
        (self.log_base[k] + self.lambda * phi).exp()
    }
}

struct State {
    mats: Vec<Herm>,
    residual: Vec<f64>,
    sup: f64,
    lambda_min: (usize, f64),
}

fn evaluate(mask: &DomainMask, st: &HessianStencil, h_ref: &HermitianField, rhs: &Rhs, phi: &[f64]) -> State {
    let interior = mask.interior();
    let mats: Vec<Herm> = interior
        .par_iter()
        .enumerate()
        .map(|(k, &node)| *h_ref.get(k) + st.at(phi, node))
        .collect();
    let mut lambda_min = (0, f64::INFINITY);
    for (k, m) in mats.iter().enumerate() {
        let l = m.lambda_min();
        if !(l >= lambda_min.1) {
            lambda_min = (k, l);
        }
    }
    let residual: Vec<f64> = if lambda_min.1 > 0.0 {
        mats.par_iter()
            .enumerate()
            .map(|(k, m)| m.det().ln() - rhs.log_base[k] - rhs.lambda * phi[interior[k]])
            .collect()
    } else {
        vec![f64::INFINITY; mats.len()]
    };
    let sup = residual.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let sup = if sup.is_nan() { f64::INFINITY } else { sup };
    State { mats, residual, sup, lambda_min }
}

/// Newton solve of det(theta_s + H(phi)) = g with phi = bc on the band.
pub fn newton_solve(
    mask: &DomainMask,
    forms: &ReferenceForms,
    rhs: &Rhs,
    bc: &BoundaryData,
    init: &GridFunction,
    cfg: &SolveConfig,
) -> Result<(GridFunction, SolveReport), SolverError> {
    newton_solve_ref(mask, &forms.theta_s(), rhs, bc, init, cfg)
}

/// Newton solve of det(H_ref + H(phi)) = exp(log_base + lambda phi) with
/// phi = bc on the band.
///
/// The band values of `init` are replaced by `bc`; the resulting iterate
/// must satisfy lambda_min(H_ref + H(init)) >= psh_epsilon.
pub fn newton_solve_ref(
    mask: &DomainMask,
    h_ref: &HermitianField,
    rhs: &Rhs,
    bc: &BoundaryData,
    init: &GridFunction,
    cfg: &SolveConfig,
) -> Result<(GridFunction, SolveReport), SolverError> {
    cfg.validate()?;
    h_ref.check_len(mask)?;
    init.check_layout(mask)?;
    init.check_finite()?;
    if bc.len() != mask.boundary().len() {
        return Err(SolverError::InvalidInput("boundary data does not match mask".into()));
    }
    if rhs.log_base.len() != mask.interior_count() {
        return Err(SolverError::InvalidInput("right-hand side does not match mask".into()));
    }
    let clock = Instant::now();
    let spec = *mask.spec();
    let st = HessianStencil::new(&spec);
    let h = spec.spacing();
    let interior = mask.interior();
    let m = interior.len();

    let mut phi = init.clone();
    bc.impose(mask, &mut phi);
    let mut state = evaluate(mask, &st, h_ref, rhs, phi.values());
    if state.lambda_min.1 < cfg.psh_epsilon {
        return Err(SolverError::SafeguardUnreachable {
            node: interior[state.lambda_min.0],
            lambda_min: state.lambda_min.1,
        });
    }
    let mut history = vec![state.sup];
    let mut iterations = 0;
    let mut scratch = vec![0.0; spec.node_count()];
    let mut trial = phi.clone();

    while state.sup > cfg.residual_tol && iterations < cfg.max_iterations {
        let inv: Vec<Herm> = state.mats.iter().map(|m| m.inverse()).collect();
        let inv_diag: Vec<f64> = inv
            .iter()
            .map(|w| {
                let d = -w.trace() / (h * h) - rhs.lambda;
                1.0 / d
            })
            .collect();
        let b: Vec<f64> = state.residual.iter().map(|r| -r).collect();
        let mut delta = vec![0.0; m];
        let lambda = rhs.lambda;
        linalg::bicgstab(
            |x, out| {
                for (k, &node) in interior.iter().enumerate() {
                    scratch[node] = x[k];
                }
                let s = &scratch;
                out.par_iter_mut().enumerate().for_each(|(k, o)| {
                    *o = inv[k].trace_product(&st.at(s, interior[k])) - lambda * x[k];
                });
            },
            &b,
            &mut delta,
            &inv_diag,
            cfg.linear_tol,
            cfg.linear_max_iterations,
        );

        let mut step = 1.0;
        let mut accepted = None;
        while step >= cfg.min_step {
            {
                let tv = trial.values_mut();
                let pv = phi.values();
                for (k, &node) in interior.iter().enumerate() {
                    tv[node] = pv[node] + step * delta[k];
                }
            }
            let next = evaluate(mask, &st, h_ref, rhs, trial.values());
            if next.lambda_min.1 >= cfg.psh_epsilon && next.sup < state.sup {
                accepted = Some(next);
                break;
            }
            step *= cfg.backtrack_factor;
        }
        iterations += 1;
        match accepted {
            Some(next) => {
                std::mem::swap(&mut phi, &mut trial);
                trial.values_mut().copy_from_slice(phi.values());
                state = next;
                history.push(state.sup);
            }
            None => break,
        }
    }
    let converged = state.sup <= cfg.residual_tol;
    let report = SolveReport {
        converged,
        residual: state.sup,
        iterations,
        lambda_min: state.lambda_min.1,
        wall_ms: if cfg.record_wall_time { clock.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        residual_history: history,
    };
    if converged {
        Ok((phi, report))
    } else {
        Err(SolverError::NotConverged { best: Box::new(phi), report })
    }
}

/// Solution of (1/4) Laplacian(w) = n with w = 0 on the band, a discrete
/// analogue of |z|^2 - R^2 on a ball.
pub fn discrete_bowl(mask: &DomainMask) -> GridFunction {
    let spec = *mask.spec();
    let h = spec.spacing();
    let m = mask.interior_count();
    let d = spec.real_dim() as f64;
    let b = vec![-4.0 * spec.n as f64 * h * h; m];
    let mut x = vec![0.0; m];
    let mut scratch = vec![0.0; spec.node_count()];
    linalg::conjugate_gradient(
        |x, out| neg_laplacian_scaled(mask, x, out, &mut scratch),
        &b,
        &mut x,
        &vec![1.0 / (2.0 * d); m],
        1e-13,
        100_000,
    );
    let mut w = GridFunction::zeros(spec);
    for (k, &node) in mask.interior().iter().enumerate() {
        w.set(node, x[k]);
    }
    w
}

/// A starting iterate for Newton: the harmonic extension of `bc` plus the
/// smallest power-of-two multiple of the discrete bowl that passes the PSH
/// safeguard relative to `h_ref`.
pub fn dirichlet_lift(
    mask: &DomainMask,
    h_ref: &HermitianField,
    bc: &BoundaryData,
    psh_epsilon: f64,
) -> Result<GridFunction, SolverError> {
    h_ref.check_len(mask)?;
    let base = harmonic_extension(bc, mask);
    let st = HessianStencil::new(mask.spec());
    let ok = |f: &GridFunction| {
        mask.interior()
            .iter()
            .enumerate()
            .all(|(k, &node)| (*h_ref.get(k) + st.at(f.values(), node)).lambda_min() >= psh_epsilon)
    };
    if ok(&base) {
        return Ok(base);
    }
    let bowl = discrete_bowl(mask);
    let mut scale = 1.0;
    for _ in 0..60 {
        let cand = base.add_scaled(scale, &bowl);
        if ok(&cand) {
            return Ok(cand);
        }
        scale *= 2.0;
    }
    let (k, lam) = h_ref.min_eigenvalue();
    Err(SolverError::SafeguardUnreachable { node: mask.interior()[k], lambda_min: lam })
}
