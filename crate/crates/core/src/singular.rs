//! Solutions with prescribed logarithmic poles: the regularized ansatz
//! P_delta = sum_j s_j log(|z - p_j|^2 + delta), the bounded remainder solve
//! and the dyadic-annulus asymptotics check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{fubini_study_form, HermitianField};
use crate::error::{SingularError, SolverError};
use crate::grid::{BoundaryData, DomainMask, GridFunction};
use crate::herm::Herm;
use crate::solver::{dirichlet_lift, newton_solve_ref, Rhs, SolveConfig, SolveReport};

/// Poles must keep this many grid spacings from the boundary band.
pub const POLE_CLEARANCE: f64 = 5.0;
/// Annuli with outer radius below this many spacings are not resolved.
pub const MIN_ANNULUS_SPACINGS: f64 = 3.0;

/// Log-density f (including the volume factor) of the remainder equation.
#[derive(Clone, Debug)]
pub enum LogDensity {
    Fixed(GridFunction),
    /// One field per regularization parameter.
    PerDelta(Vec<GridFunction>),
}

#[derive(Clone, Debug)]
pub struct PoleSpec {
    pub poles: Vec<Vec<Complex64>>,
    pub weights: Vec<f64>,
    /// Strictly decreasing regularization parameters.
    pub deltas: Vec<f64>,
    pub lambda: f64,
    pub log_density: LogDensity,
    /// Boundary values psi of phi.
    pub boundary: BoundaryData,
}

impl PoleSpec {
    pub const DEFAULT_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

    pub fn validate(&self, mask: &DomainMask) -> Result<(), SingularError> {
        let spec = mask.spec();
        let n = spec.n;
        if self.poles.is_empty() || self.poles.len() != self.weights.len() {
            return Err(SingularError::InvalidPoles("need one weight per pole and at least one pole".into()));
        }
        if let Some(p) = self.poles.iter().find(|p| p.len() != n) {
            return Err(SingularError::InvalidPoles(format!("pole {p:?} is not a point of C^{n}")));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(SingularError::InvalidPoles("weights must be nonnegative".into()));
        }
        if self.deltas.is_empty()
            || self.deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite())
            || self.deltas.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(SingularError::InvalidPoles("deltas must be positive and decreasing".into()));
        }
        if self.lambda != 0.0 && self.lambda != 1.0 {
            return Err(SingularError::InvalidPoles(format!("lambda must be 0 or 1, got {}", self.lambda)));
        }
        if self.boundary.len() != mask.boundary().len() {
            return Err(SingularError::InvalidPoles("boundary data does not match mask".into()));
        }
        let fields: Vec<&GridFunction> = match &self.log_density {
            LogDensity::Fixed(f) => vec![f],
            LogDensity::PerDelta(fs) => {
                if fs.len() != self.deltas.len() {
                    return Err(SingularError::InvalidPoles("one log-density per delta required".into()));
                }
                fs.iter().collect()
            }
        };
        for f in fields {
            f.check_layout(mask)?;
            f.check_finite()?;
        }
        let h = spec.spacing();
        for (i, p) in self.poles.iter().enumerate() {
            let d = band_distance(mask, p);
            if d < POLE_CLEARANCE * h {
                return Err(SingularError::PoleTooClose { index: i, min_distance: POLE_CLEARANCE * h });
            }
            for q in &self.poles[..i] {
                if distance(p, q) < 1e-12 {
                    return Err(SingularError::InvalidPoles(format!("pole {i} repeats an earlier pole")));
                }
            }
        }
        if let Some(p) = self.admissible_p() {
            if p <= 1.0 {
                return Err(SingularError::InvalidPoles("density is not L^p for any p > 1".into()));
            }
        }
        Ok(())
    }

    /// Supremum of the admissible integrability exponents of the density
    /// near the poles, `None` when every p works. The density behaves like
    /// |z - p_j|^{2 lambda s_j}.
    pub fn admissible_p(&self) -> Option<f64> {
        let n = self.poles.first().map_or(1, |p| p.len()) as f64;
        self.weights
            .iter()
            .map(|s| self.lambda * s)
            .filter(|e| *e < 0.0)
            .map(|e| -n / e)
            .reduce(f64::min)
    }

    fn log_density(&self, k: usize) -> &GridFunction {
        match &self.log_density {
            LogDensity::Fixed(f) => f,
            LogDensity::PerDelta(fs) => &fs[k],
        }
    }
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn band_distance(mask: &DomainMask, p: &[Complex64]) -> f64 {
    let spec = mask.spec();
    mask.boundary()
        .iter()
        .map(|&i| distance(&spec.point(i)[..spec.n], p))
        .fold(f64::INFINITY, f64::min)
}

/// sum_j s_j log(|z - p_j|^2 + delta) on interior and band nodes.
pub fn pole_ansatz(mask: &DomainMask, poles: &[Vec<Complex64>], weights: &[f64], delta: f64) -> GridFunction {
    let spec = mask.spec();
    let mut out = GridFunction::zeros(*spec);
    for &i in mask.interior().iter().chain(mask.boundary()) {
        let z = spec.point(i);
        let v: f64 = poles
            .iter()
            .zip(weights)
            .map(|(p, s)| s * (distance(&z[..spec.n], p).powi(2) + delta).ln())
            .sum();
        out.set(i, v);
    }
    out
}

/// Analytic complex Hessian of the pole ansatz: each term contributes
/// (s / delta) times the Fubini-Study form at (z - p) / sqrt(delta).
pub fn pole_hessian(mask: &DomainMask, poles: &[Vec<Complex64>], weights: &[f64], delta: f64) -> HermitianField {
    let n = mask.spec().n;
    let root = delta.sqrt();
    HermitianField::from_fn(mask, |z| {
        let mut m = Herm::zero(n);
        for (p, &s) in poles.iter().zip(weights) {
            let w: Vec<Complex64> = z.iter().zip(p).map(|(a, b)| (a - b) / root).collect();
            m = m + (s / delta) * fubini_study_form(&w);
        }
        m
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Annulus {
    pub pole: usize,
    /// Dyadic level k: radii in [2^{-k-1} R0, 2^{-k} R0).
    pub level: usize,
    pub inner_r: f64,
    pub outer_r: f64,
    #[serde(skip)]
    pub nodes: Vec<usize>,
}

/// Resolvable dyadic annuli around every pole, outermost first per pole.
/// R0 is half the distance from the pole to the band, capped by half the
/// distance to the nearest other pole.
pub fn dyadic_annuli(mask: &DomainMask, poles: &[Vec<Complex64>]) -> Result<Vec<Annulus>, SingularError> {
    let spec = mask.spec();
    let h = spec.spacing();
    let mut out = Vec::new();
    for (j, p) in poles.iter().enumerate() {
        let mut r0 = 0.5 * band_distance(mask, p);
        for (i, q) in poles.iter().enumerate() {
            if i != j {
                r0 = r0.min(0.5 * distance(p, q));
            }
        }
        let mut level = 0;
        loop {
            let outer_r = r0 / 2f64.powi(level as i32);
            if outer_r < MIN_ANNULUS_SPACINGS * h {
                break;
            }
            let inner_r = 0.5 * outer_r;
            let nodes: Vec<usize> = mask
                .interior()
                .iter()
                .copied()
                .filter(|&i| {
                    let d = distance(&spec.point(i)[..spec.n], p);
                    d >= inner_r && d < outer_r
                })
                .collect();
            if !nodes.is_empty() {
                out.push(Annulus { pole: j, level, inner_r, outer_r, nodes });
            }
            level += 1;
        }
        if !out.iter().any(|a| a.pole == j) {
            return Err(SingularError::Unresolvable(format!(
                "no annulus around pole {j} has outer radius >= {MIN_ANNULUS_SPACINGS} h"
            )));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticsOptions {
    /// Allowed cross-delta oscillation per annulus.
    pub oscillation_bound: f64,
    /// Constant c in innermost <= 2 outermost + c.
    pub growth_constant: f64,
}

impl Default for AsymptoticsOptions {
    fn default() -> Self {
        AsymptoticsOptions { oscillation_bound: 0.05, growth_constant: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub deltas: Vec<f64>,
    pub annuli: Vec<Annulus>,
    /// sup over each annulus of |phi_delta - P_delta|, indexed [delta][annulus].
    pub sups: Vec<Vec<f64>>,
    /// max - min over delta of the annulus sups.
    pub oscillation: Vec<f64>,
    /// Per annulus, the largest nodewise spread over delta of phi_delta - P_delta.
    pub field_oscillation: Vec<f64>,
    pub max_oscillation: f64,
    /// Per delta: innermost <= 2 outermost + c for every pole.
    pub non_exploding: Vec<bool>,
    /// Fitted weight c in phi ~ c log(|z - p|^2 + delta) + d over the two
    /// innermost annuli, indexed [delta][pole]; `None` with fewer than two annuli.
    pub fitted_weights: Vec<Vec<Option<f64>>>,
    pub bounded: bool,
    pub options: AsymptoticsOptions,
}

impl AsymptoticsReport {
    /// Rows (delta, annulus index, inner radius, outer radius, sup deviation).
    pub fn profile_rows(&self) -> Vec<(f64, usize, f64, f64, f64)> {
        let mut rows = Vec::new();
        for (d, sups) in self.deltas.iter().zip(&self.sups) {
            for (k, (a, s)) in self.annuli.iter().zip(sups).enumerate() {
                rows.push((*d, k, a.inner_r, a.outer_r, *s));
            }
        }
        rows
    }
}

/// Least-squares weight c in phi ~ c L + q over `nodes`, where
/// L = log(|z - p|^2 + delta) and q is a quadratic polynomial in the real
/// coordinates of z - p standing in for the smooth remainder.
pub fn fit_pole_weight(mask: &DomainMask, phi: &GridFunction, pole: &[Complex64], delta: f64, nodes: &[usize]) -> Option<f64> {
    let spec = mask.spec();
    let d = spec.real_dim();
    let cols = 2 + d + d * (d + 1) / 2;
    if nodes.len() <= cols {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(nodes.len(), cols);
    let mut b = DVector::<f64>::zeros(nodes.len());
    for (row, &i) in nodes.iter().enumerate() {
        let z = spec.point(i);
        let w: Vec<f64> = z[..spec.n]
            .iter()
            .zip(pole)
            .flat_map(|(x, p)| {
                let v = x - p;
                [v.re, v.im]
            })
            .collect();
        let r2: f64 = w.iter().map(|x| x * x).sum();
        a[(row, 0)] = (r2 + delta).ln();
        a[(row, 1)] = 1.0;
        let mut c = 2;
        for j in 0..d {
            a[(row, c)] = w[j];
            c += 1;
        }
        for j in 0..d {
            for k in j..d {
                a[(row, c)] = w[j] * w[k];
                c += 1;
            }
        }
        b[row] = phi.get(i);
    }
    let x = a.svd(true, true).solve(&b, 1e-12).ok()?;
    Some(x[0])
}

/// Annulus profile of |phi_delta - P_delta| across the delta schedule.
pub fn verify_asymptotics(
    mask: &DomainMask,
    phis: &[GridFunction],
    spec: &PoleSpec,
    opts: &AsymptoticsOptions,
) -> Result<AsymptoticsReport, SingularError> {
    if phis.len() != spec.deltas.len() {
        return Err(SingularError::InvalidPoles("one field per delta required".into()));
    }
    if phis.len() < 2 {
        return Err(SingularError::InvalidPoles("at least two deltas are needed".into()));
    }
    for phi in phis {
        phi.check_layout(mask)?;
    }
    let annuli = dyadic_annuli(mask, &spec.poles)?;
    let mut sups = Vec::with_capacity(phis.len());
    let mut devs = Vec::with_capacity(phis.len());
    let mut non_exploding = Vec::with_capacity(phis.len());
    let mut fitted_weights = Vec::with_capacity(phis.len());
    for (phi, &delta) in phis.iter().zip(&spec.deltas) {
        let dev = phi.add_scaled(-1.0, &pole_ansatz(mask, &spec.poles, &spec.weights, delta));
        let row: Vec<f64> = annuli
            .iter()
            .map(|a| a.nodes.iter().map(|&i| dev.get(i).abs()).fold(0.0, f64::max))
            .collect();
        let mut ok = true;
        let mut weights = Vec::with_capacity(spec.poles.len());
        for (j, pole) in spec.poles.iter().enumerate() {
            let idx: Vec<usize> = (0..annuli.len()).filter(|&k| annuli[k].pole == j).collect();
            let outer = row[idx[0]];
            let inner = row[*idx.last().unwrap()];
            ok &= inner <= 2.0 * outer + opts.growth_constant;
            let fit = if idx.len() >= 2 {
                let nodes: Vec<usize> =
                    idx[idx.len() - 2..].iter().flat_map(|&k| annuli[k].nodes.iter().copied()).collect();
                fit_pole_weight(mask, phi, pole, delta, &nodes)
            } else {
                None
            };
            weights.push(fit);
        }
        sups.push(row);
        devs.push(dev);
        non_exploding.push(ok);
        fitted_weights.push(weights);
    }
    let oscillation: Vec<f64> = (0..annuli.len())
        .map(|k| {
            let col = sups.iter().map(|r| r[k]);
            col.clone().fold(f64::NEG_INFINITY, f64::max) - col.fold(f64::INFINITY, f64::min)
        })
        .collect();
    let field_oscillation: Vec<f64> = annuli
        .iter()
        .map(|a| {
            a.nodes
                .iter()
                .map(|&i| {
                    let vals = devs.iter().map(|d| d.get(i));
                    vals.clone().fold(f64::NEG_INFINITY, f64::max) - vals.fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let max_oscillation = oscillation.iter().copied().fold(0.0, f64::max);
    let all_finite = sups.iter().flatten().all(|v| v.is_finite());
    let bounded = all_finite && max_oscillation <= opts.oscillation_bound && non_exploding.iter().all(|&b| b);
    Ok(AsymptoticsReport {
        deltas: spec.deltas.clone(),
        annuli,
        sups,
        oscillation,
        field_oscillation,
        max_oscillation,
        non_exploding,
        fitted_weights,
        bounded,
        options: *opts,
    })
}

#[derive(Clone, Debug)]
pub struct LogPoleSolution {
    /// phi_delta = u_delta + P_delta per delta.
    pub phis: Vec<GridFunction>,
    pub remainders: Vec<GridFunction>,
    pub reports: Vec<SolveReport>,
    pub asymptotics: Option<AsymptoticsReport>,
}

/// Solves det(H(P_delta) + H(u)) = exp(f + lambda (u + P_delta)) with
/// u = psi - P_delta on the band for each delta, warm-starting from the
/// previous remainder when it passes the safeguard.
pub fn solve_log_pole(
    mask: &DomainMask,
    spec: &PoleSpec,
    cfg: &SolveConfig,
    opts: &AsymptoticsOptions,
) -> Result<LogPoleSolution, SingularError> {
    spec.validate(mask)?;
    let mut phis = Vec::with_capacity(spec.deltas.len());
    let mut remainders: Vec<GridFunction> = Vec::with_capacity(spec.deltas.len());
    let mut reports = Vec::with_capacity(spec.deltas.len());
    for (k, &delta) in spec.deltas.iter().enumerate() {
        let p = pole_ansatz(mask, &spec.poles, &spec.weights, delta);
        let h_ref = pole_hessian(mask, &spec.poles, &spec.weights, delta);
        let base = spec.log_density(k).add_scaled(spec.lambda, &p);
        let rhs = Rhs::from_log_density(mask, &base, spec.lambda)?;
        let bc_values: Vec<f64> =
            mask.boundary().iter().zip(spec.boundary.values()).map(|(&i, &psi)| psi - p.get(i)).collect();
        let bc = BoundaryData::new(mask, bc_values)?;
        let lifted = dirichlet_lift(mask, &h_ref, &bc, cfg.psh_epsilon)?;
        let attempt = match remainders.last() {
            Some(prev) => match newton_solve_ref(mask, &h_ref, &rhs, &bc, prev, cfg) {
                Ok(r) => Ok(r),
                Err(SolverError::SafeguardUnreachable { .. }) | Err(SolverError::NotConverged { .. }) => {
                    newton_solve_ref(mask, &h_ref, &rhs, &bc, &lifted, cfg)
                }
                Err(e) => Err(e),
            },
            None => newton_solve_ref(mask, &h_ref, &rhs, &bc, &lifted, cfg),
        };
        let (u, report) = attempt?;
        phis.push(u.add_scaled(1.0, &p));
        remainders.push(u);
        reports.push(report);
    }
    let asymptotics = if phis.len() >= 2 { Some(verify_asymptotics(mask, &phis, spec, opts)?) } else { None };
    Ok(LogPoleSolution { phis, remainders, reports, asymptotics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::complex_hessian;
    use crate::grid::{build_domain, GridSpec};

    fn ball(n: usize, nodes: usize) -> DomainMask {
        let spec = GridSpec::new(n, nodes, 1.1).unwrap();
        build_domain(spec, |z| z.iter().map(|c| c.norm_sqr()).sum(), 1.0).unwrap()
    }

    fn origin(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); n]
    }

    fn spec_for(mask: &DomainMask, weights: Vec<f64>) -> PoleSpec {
        PoleSpec {
            poles: vec![origin(mask.spec().n)],
            weights,
            deltas: PoleSpec::DEFAULT_DELTAS.to_vec(),
            lambda: 0.0,
            log_density: LogDensity::Fixed(GridFunction::zeros(*mask.spec())),
            boundary: BoundaryData::zeros(mask),
        }
    }

    #[test]
    fn pole_hessian_matches_finite_differences_for_large_delta() {
        let mask = ball(2, 17);
        let poles = vec![vec![Complex64::new(0.1, 0.0), Complex64::new(0.0, -0.1)]];
        let p = pole_ansatz(&mask, &poles, &[0.7], 1.0);
        let fd = complex_hessian(&p, &mask).unwrap();
        let an = pole_hessian(&mask, &poles, &[0.7], 1.0);
        let h = mask.spec().spacing();
        for (a, b) in an.mats().iter().zip(fd.mats()) {
            let d = *a - *b;
            assert!(d.a.abs() + d.d.abs() + d.b.norm() < 5.0 * h * h);
        }
    }

    #[test]
    fn validation() {
        let mask = ball(1, 33);
        let mut s = spec_for(&mask, vec![0.5]);
        assert!(s.validate(&mask).is_ok());
        s.poles = vec![vec![Complex64::new(0.9, 0.0)]];
        assert!(matches!(s.validate(&mask), Err(SingularError::PoleTooClose { .. })));
        let mut s = spec_for(&mask, vec![-0.5]);
        assert!(s.validate(&mask).is_err());
        s.weights = vec![0.5];
        s.deltas = vec![1e-3, 1e-2];
        assert!(s.validate(&mask).is_err());
        let mut s = spec_for(&mask, vec![0.5, 0.5]);
        assert!(s.validate(&mask).is_err());
        s.poles.push(origin(1));
        assert!(s.validate(&mask).is_err());
        assert_eq!(s.admissible_p(), None);
    }

    #[test]
    fn exact_ansatz_is_bounded() {
        let mask = ball(1, 65);
        let s = spec_for(&mask, vec![0.5]);
        let phis: Vec<GridFunction> =
            s.deltas.iter().map(|&d| pole_ansatz(&mask, &s.poles, &s.weights, d)).collect();
        let rep = verify_asymptotics(&mask, &phis, &s, &AsymptoticsOptions::default()).unwrap();
        assert!(rep.bounded);
        assert!(rep.sups.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(rep.profile_rows().len(), s.deltas.len() * rep.annuli.len());
    }

    #[test]
    fn bounded_remainder_sups() {
        let mask = ball(1, 65);
        let s = spec_for(&mask, vec![0.5]);
        let phis: Vec<GridFunction> = s
            .deltas
            .iter()
            .map(|&d| {
                let sq = GridFunction::from_fn(&mask, |z| z[0].norm_sqr()).unwrap();
                pole_ansatz(&mask, &s.poles, &s.weights, d).add_scaled(1.0, &sq)
            })
            .collect();
        let rep = verify_asymptotics(&mask, &phis, &s, &AsymptoticsOptions::default()).unwrap();
        assert!(rep.bounded);
        for (k, a) in rep.annuli.iter().enumerate() {
            let expect = a.nodes.iter().map(|&i| mask.spec().point(i)[0].norm_sqr()).fold(0.0, f64::max);
            assert!((rep.sups[0][k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn single_delta_is_rejected() {
        let mask = ball(1, 33);
        let mut s = spec_for(&mask, vec![0.5]);
        s.deltas = vec![1e-2];
        let phi = pole_ansatz(&mask, &s.poles, &s.weights, 1e-2);
        assert!(verify_asymptotics(&mask, &[phi], &s, &AsymptoticsOptions::default()).is_err());
    }
}
