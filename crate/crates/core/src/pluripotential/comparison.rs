use serde::Serialize;

use crate::calculus::{ma_mass, psh_check, HermitianField};
use crate::error::PluriError;
use crate::grid::{DomainMask, GridFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Number of interior nodes with u < v.
    pub set_size: usize,
    /// Mass of theta + H(v) on {u < v}.
    pub lhs: f64,
    /// Mass of theta + H(u) on {u < v}.
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    /// Why the check was skipped, if a precondition failed.
    pub skipped: Option<String>,
}

/// Compares the MA masses of u and v on {u < v} for theta-PSH u, v with
/// u >= v on the band.
pub fn check_comparison(
    u: &GridFunction,
    v: &GridFunction,
    theta: &HermitianField,
    mask: &DomainMask,
) -> Result<ComparisonReport, PluriError> {
    u.check_layout(mask)?;
    v.check_layout(mask)?;
    theta.check_len(mask)?;
    let h = mask.spec().spacing();
    let skip = |why: String| ComparisonReport {
        set_size: 0,
        lhs: 0.0,
        rhs: 0.0,
        slack: 0.0,
        tol: 0.0,
        pass: false,
        skipped: Some(why),
    };
    for (name, f) in [("u", u), ("v", v)] {
        let rep = psh_check(theta, f, mask, 10.0 * h)?;
        if !rep.is_psh() {
            return Ok(skip(format!(
                "{name} is not theta-PSH: lambda_min {:e} at node {}",
                rep.worst_lambda, rep.worst_node
            )));
        }
    }
    if let Some(&node) = mask.boundary().iter().find(|&&i| u.get(i) < v.get(i) - 1e-12) {
        return Ok(skip(format!("boundary ordering u >= v fails at node {node}")));
    }
    let set: Vec<usize> = mask.interior().iter().copied().filter(|&i| u.get(i) < v.get(i)).collect();
    let lhs = ma_mass(theta, v, mask, &set)?;
    let rhs = ma_mass(theta, u, mask, &set)?;
    let tol = 50.0 * h * h * set.len() as f64 * mask.spec().cell_volume();
    let slack = rhs - lhs;
    Ok(ComparisonReport { set_size: set.len(), lhs, rhs, slack, tol, pass: slack >= -tol, skipped: None })
}
