use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{ma_mass, HermitianField};
use crate::error::PluriError;
use crate::grid::{DomainMask, GridFunction};

use super::bruteforce;

/// Sweep budget for the envelope iteration.
pub const MAX_SWEEPS: usize = 100_000;
/// Stop once a full sweep moves no node by more than this.
pub const SWEEP_TOL: f64 = 1e-9;
/// U* below this value counts as "off the contact set" for the support defect.
const CONTACT_LEVEL: f64 = -1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum CapacityMethod {
    Envelope,
    Bruteforce { starts: usize, seed: u64 },
}

impl CapacityMethod {
    /// Brute force with the standard 64 starts.
    pub fn bruteforce(seed: u64) -> Self {
        CapacityMethod::Bruteforce { starts: 64, seed }
    }
}

#[derive(Clone, Debug)]
pub struct CapacityQuery {
    /// Node indices of the compact set K.
    pub k: Vec<usize>,
    pub theta: HermitianField,
    pub method: CapacityMethod,
}

impl CapacityQuery {
    pub fn envelope(k: Vec<usize>, theta: HermitianField) -> Self {
        CapacityQuery { k, theta, method: CapacityMethod::Envelope }
    }

    /// K nonempty, duplicate-free, and at least one node away from the band;
    /// theta PSD. Returns the membership flags of K.
    pub(crate) fn validate(&self, mask: &DomainMask) -> Result<Vec<bool>, PluriError> {
        self.theta.check_len(mask)?;
        if self.k.is_empty() {
            return Err(PluriError::InvalidQuery("K is empty".into()));
        }
        let (k, lam) = self.theta.min_eigenvalue();
        if lam < -1e-12 {
            return Err(PluriError::InvalidQuery(format!(
                "theta not PSD at node {} (lambda_min {lam:e})",
                mask.interior()[k]
            )));
        }
        let mut in_k = vec![false; mask.spec().node_count()];
        for &node in &self.k {
            if node >= in_k.len() || !mask.is_deep_interior(node) {
                return Err(PluriError::InvalidQuery(format!(
                    "node {node} of K is not at least one node inside the interior"
                )));
            }
            if in_k[node] {
                return Err(PluriError::InvalidQuery(format!("node {node} repeated in K")));
            }
            in_k[node] = true;
        }
        Ok(in_k)
    }
}

#[derive(Clone, Debug)]
pub struct ExtremalResult {
    pub u_star: GridFunction,
    pub capacity: f64,
    /// MA mass of U* on interior nodes outside K with U* < -1e-6.
    pub support_defect: f64,
    pub sweeps: usize,
}

/// Complex directions v with the real offsets (v, iv) realizing the complex
/// line through a node on the grid.
pub(crate) fn line_directions(mask: &DomainMask) -> Vec<(isize, isize, [Complex64; 2])> {
    let spec = mask.spec();
    let s = spec.strides().map(|x| x as isize);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    if spec.n == 1 {
        return vec![(s[0], s[1], [one, zero])];
    }
    vec![
        (s[0], s[1], [one, zero]),
        (s[2], s[3], [zero, one]),
        (s[0] + s[2], s[1] + s[3], [one, one]),
        (s[0] - s[2], s[1] - s[3], [one, -one]),
        (s[0] + s[3], s[1] - s[2], [one, i]),
        (s[0] - s[3], s[1] + s[2], [one, -i]),
    ]
}

/// Discrete relative extremal function of K by monotone Gauss-Seidel
/// sweeping of the complex-line submean inequalities
/// u(x) <= mean of u over x +- h v, x +- h iv + h^2 v* theta v.
pub fn extremal_function(q: &CapacityQuery, mask: &DomainMask) -> Result<ExtremalResult, PluriError> {
    let in_k = q.validate(mask)?;
    let spec = mask.spec();
    let h2 = spec.spacing().powi(2);
    let dirs = line_directions(mask);
    let free: Vec<(usize, Vec<f64>)> = mask
        .interior()
        .iter()
        .enumerate()
        .filter(|(_, &node)| !in_k[node])
        .map(|(k, &node)| {
            let shifts = dirs.iter().map(|(_, _, v)| h2 * q.theta.get(k).quadratic_form(v)).collect();
            (node, shifts)
        })
        .collect();

    let mut u = GridFunction::zeros(*spec);
    for &node in &q.k {
        u.set(node, -1.0);
    }
    let vals = u.values_mut();
    let mut sweeps = 0;
    loop {
        let mut change: f64 = 0.0;
        for (node, shifts) in &free {
            let x = *node as isize;
            let mut best: f64 = 0.0;
            for ((d, e, _), shift) in dirs.iter().zip(shifts) {
                let mean = 0.25
                    * (vals[(x + d) as usize] + vals[(x - d) as usize] + vals[(x + e) as usize] + vals[(x - e) as usize]);
                best = best.min(mean + shift);
            }
            let next = best.max(-1.0);
            change = change.max((next - vals[*node]).abs());
            vals[*node] = next;
        }
        sweeps += 1;
        if change <= SWEEP_TOL {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(PluriError::SweepNotConverged { sweeps, change });
        }
    }

    let capacity = ma_mass(&q.theta, &u, mask, &q.k)?;
    let off: Vec<usize> = free.iter().map(|(n, _)| *n).filter(|&n| u.get(n) < CONTACT_LEVEL).collect();
    let support_defect = ma_mass(&q.theta, &u, mask, &off)?;
    Ok(ExtremalResult { u_star: u, capacity, support_defect, sweeps })
}

/// Capacity of K relative to the domain by the query's method.
pub fn capacity(q: &CapacityQuery, mask: &DomainMask) -> Result<f64, PluriError> {
    match q.method {
        CapacityMethod::Envelope => Ok(extremal_function(q, mask)?.capacity),
        CapacityMethod::Bruteforce { starts, seed } => bruteforce::bruteforce_capacity(q, mask, starts, seed),
    }
}
