use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{ma_mass, psh_check};
use crate::error::PluriError;
use crate::grid::{DomainMask, GridFunction};

use super::envelope::{line_directions, CapacityQuery};

/// Largest interior the brute-force maximizer accepts.
pub const BRUTEFORCE_CAP: usize = 30;

const MAX_ASCENT_SWEEPS: usize = 200;
const PROJECTION_TOL: f64 = 1e-13;

struct Problem<'a> {
    mask: &'a DomainMask,
    q: &'a CapacityQuery,
    dirs: Vec<(isize, isize)>,
    /// h^2 v* theta v per interior position and direction.
    shifts: Vec<Vec<f64>>,
}

impl Problem<'_> {
    /// Largest function below `target` satisfying every complex-line submean
    /// inequality, with zero band values and values in [-1, 0].
    fn project(&self, target: &[f64]) -> GridFunction {
        let mask = self.mask;
        let mut u = GridFunction::zeros(*mask.spec());
        for (k, &node) in mask.interior().iter().enumerate() {
            u.set(node, target[k]);
        }
        let vals = u.values_mut();
        loop {
            let mut change: f64 = 0.0;
            for (k, &node) in mask.interior().iter().enumerate() {
                let x = node as isize;
                let mut best = target[k];
                for ((d, e), shift) in self.dirs.iter().zip(&self.shifts[k]) {
                    let mean = 0.25
                        * (vals[(x + d) as usize]
                            + vals[(x - d) as usize]
                            + vals[(x + e) as usize]
                            + vals[(x - e) as usize]);
                    best = best.min(mean + shift);
                }
                let next = best.max(-1.0);
                change = change.max((next - vals[node]).abs());
                vals[node] = next;
            }
            if change <= PROJECTION_TOL {
                break;
            }
        }
        u
    }

    fn mass(&self, target: &[f64]) -> Result<f64, PluriError> {
        let u = self.project(target);
        Ok(ma_mass(&self.q.theta, &u, self.mask, &self.q.k)?)
    }
}

/// Maximizes the MA mass on K over grid theta-PSH functions with values in
/// [-1, 0] and zero band values.
///
/// Coordinate ascent runs on a target vector in [-1, 0]^interior; each
/// target is projected onto the admissible set before its mass is taken.
/// Every projected maximizer is re-checked against the full complex Hessian.
pub(crate) fn bruteforce_capacity(
    q: &CapacityQuery,
    mask: &DomainMask,
    starts: usize,
    seed: u64,
) -> Result<f64, PluriError> {
    if mask.interior_count() > BRUTEFORCE_CAP {
        return Err(PluriError::BruteforceTooLarge { cap: BRUTEFORCE_CAP, actual: mask.interior_count() });
    }
    if starts == 0 {
        return Err(PluriError::InvalidQuery("brute force needs at least one start".into()));
    }
    q.validate(mask)?;
    let h2 = mask.spec().spacing().powi(2);
    let lines = line_directions(mask);
    let shifts = (0..mask.interior_count())
        .map(|k| lines.iter().map(|(_, _, v)| h2 * q.theta.get(k).quadratic_form(v)).collect())
        .collect();
    let p = Problem { mask, q, dirs: lines.iter().map(|&(d, e, _)| (d, e)).collect(), shifts };
    let h = mask.spec().spacing();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = mask.interior_count();
    let mut order: Vec<usize> = (0..m).collect();
    let mut best = 0.0_f64;
    for _ in 0..starts {
        let mut target: Vec<f64> = (0..m).map(|_| -rng.gen::<f64>()).collect();
        let mut mass = p.mass(&target)?;
        for _ in 0..MAX_ASCENT_SWEEPS {
            let before = mass;
            order.shuffle(&mut rng);
            for &k in &order {
                let current = target[k];
                let mut best_t = current;
                for t in [0.0, -0.25, -0.5, -0.75, -1.0, -rng.gen::<f64>()] {
                    target[k] = t;
                    let trial = p.mass(&target)?;
                    // Ties go to the larger value.
                    if trial > mass * (1.0 + 1e-13) || (trial >= mass * (1.0 - 1e-13) && t > best_t) {
                        mass = mass.max(trial);
                        best_t = t;
                    }
                }
                target[k] = best_t;
            }
            if mass <= before * (1.0 + 1e-12) {
                break;
            }
        }
        let u = p.project(&target);
        let rep = psh_check(&q.theta, &u, mask, 1e-9 * (1.0 + 1.0 / (h * h)))?;
        if rep.is_psh() {
            best = best.max(mass);
        }
    }
    Ok(best)
}
