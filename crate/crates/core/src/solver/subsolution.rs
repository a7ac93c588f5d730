use serde::Serialize;

use crate::calculus::{HermitianField, HessianStencil};
use crate::error::SolverError;
use crate::geometry::{regularized_density, DensitySpec, ReferenceForms};
use crate::grid::{BoundaryData, DomainMask, GridFunction};

/// Relative tolerance for the determinant comparison.
const DET_TOL: f64 = 1e-12;
/// Tolerance on the band ordering Phi <= bc.
const BAND_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsolutionCheck {
    pub ok: bool,
    /// min over interior nodes of det(H_ref + H(Phi)) - density.
    pub margin: f64,
    pub lambda_min: f64,
    /// max over band nodes of Phi - bc.
    pub band_excess: f64,
}

#[derive(Clone, Debug)]
pub struct Subsolution {
    pub scale: f64,
    pub phi: GridFunction,
    pub margin: f64,
}

/// Checks det(H_ref + H(Phi)) >= density, lambda_min >= 0 and Phi <= bc on
/// the band.
pub fn verify_subsolution_ref(
    mask: &DomainMask,
    h_ref: &HermitianField,
    phi: &GridFunction,
    density: &GridFunction,
    bc: &BoundaryData,
) -> Result<SubsolutionCheck, SolverError> {
    h_ref.check_len(mask)?;
    phi.check_layout(mask)?;
    density.check_layout(mask)?;
    let st = HessianStencil::new(mask.spec());
    let mut margin = f64::INFINITY;
    let mut lambda_min = f64::INFINITY;
    let mut det_ok = true;
    for (k, &node) in mask.interior().iter().enumerate() {
        let m = *h_ref.get(k) + st.at(phi.values(), node);
        let g = density.get(node);
        let excess = m.det() - g;
        margin = margin.min(excess);
        lambda_min = lambda_min.min(m.lambda_min());
        if excess < -DET_TOL * g.abs().max(1.0) {
            det_ok = false;
        }
    }
    let band_excess = mask
        .boundary()
        .iter()
        .zip(bc.values())
        .map(|(&node, &b)| phi.get(node) - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = det_ok && lambda_min >= -DET_TOL && band_excess <= BAND_TOL;
    Ok(SubsolutionCheck { ok, margin, lambda_min, band_excess })
}

/// `verify_subsolution_ref` with H_ref = theta_s and zero boundary data.
pub fn verify_subsolution(
    mask: &DomainMask,
    forms: &ReferenceForms,
    phi: &GridFunction,
    density: &GridFunction,
) -> Result<SubsolutionCheck, SolverError> {
    verify_subsolution_ref(mask, &forms.theta_s(), phi, density, &BoundaryData::zeros(mask))
}

/// The candidate A (rho - a_h), where a_h is the largest rho on the band, so
/// that the candidate is <= 0 on the band with equality at its outermost node.
pub fn subsolution_candidate(mask: &DomainMask, scale: f64) -> GridFunction {
    let rho = mask.rho();
    let a_h = mask.boundary().iter().map(|&i| rho[i]).fold(f64::NEG_INFINITY, f64::max);
    let mut phi = GridFunction::zeros(*mask.spec());
    for &node in mask.interior().iter().chain(mask.boundary()) {
        phi.set(node, scale * (rho[node] - a_h));
    }
    phi
}

/// Smallest A (doubling from 1, then bisection to relative width 1e-2)
/// for which A (rho - a_h) is a subsolution for `density`.
pub fn find_subsolution_for_density(
    mask: &DomainMask,
    h_ref: &HermitianField,
    density: &GridFunction,
    a_max: f64,
) -> Result<Subsolution, SolverError> {
    density.check_layout(mask)?;
    if let Some(&node) = mask.interior().iter().find(|&&i| !(density.get(i) > 0.0)) {
        return Err(SolverError::InvalidInput(format!(
            "density must be positive, got {} at node {node}",
            density.get(node)
        )));
    }
    let zero_bc = BoundaryData::zeros(mask);
    let check = |a: f64| -> Result<(bool, GridFunction, f64), SolverError> {
        let phi = subsolution_candidate(mask, a);
        let c = verify_subsolution_ref(mask, h_ref, &phi, density, &zero_bc)?;
        Ok((c.ok, phi, c.margin))
    };
    let (ok0, phi0, margin0) = check(0.0)?;
    if ok0 {
        return Ok(Subsolution { scale: 0.0, phi: phi0, margin: margin0 });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut best = loop {
        if hi > a_max {
            return Err(SolverError::NoSubsolution { a_max });
        }
        let (ok, phi, margin) = check(hi)?;
        if ok {
            break (phi, margin);
        }
        lo = hi;
        hi *= 2.0;
    };
    while hi - lo > 1e-2 * hi {
        let mid = 0.5 * (lo + hi);
        let (ok, phi, margin) = check(mid)?;
        if ok {
            hi = mid;
            best = (phi, margin);
        } else {
            lo = mid;
        }
    }
    Ok(Subsolution { scale: hi, phi: best.0, margin: best.1 })
}

/// Subsolution for the regularized density of `spec` at the forms' s.
pub fn find_subsolution(
    mask: &DomainMask,
    forms: &ReferenceForms,
    spec: &DensitySpec,
    a_max: f64,
) -> Result<Subsolution, SolverError> {
    if !(forms.s > 0.0) {
        return Err(SolverError::InvalidInput("subsolution search needs s > 0".into()));
    }
    let density = regularized_density(spec, forms.s, mask)?;
    find_subsolution_for_density(mask, &forms.theta_s(), &density, a_max)
}
