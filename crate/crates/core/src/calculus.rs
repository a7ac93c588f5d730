//! Discrete complex-Hessian calculus.
//!
//! Convention: d/dz = (d/dx - i d/dy)/2, so H_jk = d^2 phi / dz_j dzbar_k and
//! H(|z|^2) is the identity. Monge-Ampere densities are det(H) with respect
//! to Lebesgue measure on R^{2n}; any n! or 2^n factors belong to the
//! supplied right-hand sides.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::GridError;
use crate::grid::{DomainMask, GridFunction, GridSpec};
use crate::herm::Herm;

/// One Hermitian matrix per interior node, indexed like `DomainMask::interior`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianField {
    n: usize,
    mats: Vec<Herm>,
}

impl HermitianField {
    pub fn new(n: usize, mats: Vec<Herm>) -> Self {
        debug_assert!(mats.iter().all(|m| m.n == n));
        HermitianField { n, mats }
    }

    pub fn zeros(mask: &DomainMask) -> Self {
        let n = mask.spec().n;
        HermitianField { n, mats: vec![Herm::zero(n); mask.interior_count()] }
    }

    pub fn constant(mask: &DomainMask, m: Herm) -> Self {
        HermitianField { n: m.n, mats: vec![m; mask.interior_count()] }
    }

    /// Evaluates a matrix-valued function at every interior node.
    pub fn from_fn<F>(mask: &DomainMask, f: F) -> Self
    where
        F: Fn(&[Complex64]) -> Herm + Sync,
    {
        let spec = *mask.spec();
        let mats = mask
            .interior()
            .par_iter()
            .map(|&node| f(&spec.point(node)[..spec.n]))
            .collect();
        HermitianField { n: spec.n, mats }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[Herm] {
        &self.mats
    }

    pub fn get(&self, k: usize) -> &Herm {
        &self.mats[k]
    }

    pub fn add(&self, other: &HermitianField) -> HermitianField {
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| *a + *b).collect();
        HermitianField { n: self.n, mats }
    }

    pub fn scaled(&self, c: f64) -> HermitianField {
        HermitianField { n: self.n, mats: self.mats.iter().map(|m| c * *m).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &HermitianField) -> HermitianField {
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| *a + c * *b).collect();
        HermitianField { n: self.n, mats }
    }

    /// Smallest eigenvalue over all nodes with its interior position.
    pub fn min_eigenvalue(&self) -> (usize, f64) {
        self.mats
            .iter()
            .enumerate()
            .map(|(k, m)| (k, m.lambda_min()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    pub(crate) fn check_len(&self, mask: &DomainMask) -> Result<(), GridError> {
        if self.mats.len() != mask.interior_count() || self.n != mask.spec().n {
            return Err(GridError::Mismatch("Hermitian field does not match mask".into()));
        }
        Ok(())
    }
}

/// Precomputed finite-difference weights for the complex Hessian.
#[derive(Clone, Copy, Debug)]
pub struct HessianStencil {
    n: usize,
    strides: [usize; 4],
    inv_h2: f64,
}

impl HessianStencil {
    pub fn new(spec: &GridSpec) -> Self {
        let h = spec.spacing();
        HessianStencil { n: spec.n, strides: spec.strides(), inv_h2: 1.0 / (h * h) }
    }

    #[inline]
    fn pure(&self, v: &[f64], node: usize, a: usize) -> f64 {
        let s = self.strides[a];
        v[node + s] - 2.0 * v[node] + v[node - s]
    }

    // Mixed second difference times 4 (the 1/4 is folded in by the caller).
    #[inline]
    fn cross4(&self, v: &[f64], node: usize, a: usize, b: usize) -> f64 {
        let (sa, sb) = (self.strides[a], self.strides[b]);
        v[node + sa + sb] - v[node + sa - sb] - v[node - sa + sb] + v[node - sa - sb]
    }

    /// Complex Hessian of the dense values `v` at an interior `node`.
    #[inline]
    pub fn at(&self, v: &[f64], node: usize) -> Herm {
        let q = 0.25 * self.inv_h2;
        let a = q * (self.pure(v, node, 0) + self.pure(v, node, 1));
        if self.n == 1 {
            return Herm::one(a);
        }
        let d = q * (self.pure(v, node, 2) + self.pure(v, node, 3));
        // axes: 0 = x1, 1 = y1, 2 = x2, 3 = y2
        let q4 = 0.25 * q;
        let re = q4 * (self.cross4(v, node, 0, 2) + self.cross4(v, node, 1, 3));
        let im = q4 * (self.cross4(v, node, 0, 3) - self.cross4(v, node, 1, 2));
        Herm::two(a, Complex64::new(re, im), d)
    }
}

fn check_field(phi: &GridFunction, mask: &DomainMask) -> Result<(), GridError> {
    phi.check_layout(mask)?;
    mask.validate_stencils()
}

/// Centered-difference complex Hessian at every interior node.
pub fn complex_hessian(phi: &GridFunction, mask: &DomainMask) -> Result<HermitianField, GridError> {
    check_field(phi, mask)?;
    let st = HessianStencil::new(mask.spec());
    let v = phi.values();
    let mats = mask.interior().par_iter().map(|&node| st.at(v, node)).collect();
    Ok(HermitianField::new(mask.spec().n, mats))
}

/// det(H_ref + H(phi)) at interior nodes; band and exterior entries are 0.
pub fn ma_density(h_ref: &HermitianField, phi: &GridFunction, mask: &DomainMask) -> Result<GridFunction, GridError> {
    h_ref.check_len(mask)?;
    let h = complex_hessian(phi, mask)?;
    let mut out = GridFunction::zeros(*mask.spec());
    for (k, &node) in mask.interior().iter().enumerate() {
        out.set(node, (*h_ref.get(k) + *h.get(k)).det());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PshReport {
    /// (node, lambda_min) for every node below -tol.
    pub violations: Vec<(usize, f64)>,
    pub worst_node: usize,
    pub worst_lambda: f64,
}

impl PshReport {
    pub fn is_psh(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Nodes where lambda_min(H_ref + H(phi)) < -tol.
pub fn psh_check(
    h_ref: &HermitianField,
    phi: &GridFunction,
    mask: &DomainMask,
    tol: f64,
) -> Result<PshReport, GridError> {
    h_ref.check_len(mask)?;
    let h = complex_hessian(phi, mask)?;
    let total = h_ref.add(&h);
    let mut violations = Vec::new();
    let mut worst_node = mask.interior()[0];
    let mut worst_lambda = f64::INFINITY;
    for (k, m) in total.mats().iter().enumerate() {
        let lam = m.lambda_min();
        let node = mask.interior()[k];
        if lam < worst_lambda {
            worst_lambda = lam;
            worst_node = node;
        }
        if lam < -tol {
            violations.push((node, lam));
        }
    }
    Ok(PshReport { violations, worst_node, worst_lambda })
}

/// Sum over `region` of det of the PSD projection of H_ref + H(phi), times h^{2n}.
pub fn ma_mass(
    h_ref: &HermitianField,
    phi: &GridFunction,
    mask: &DomainMask,
    region: &[usize],
) -> Result<f64, GridError> {
    h_ref.check_len(mask)?;
    check_field(phi, mask)?;
    let st = HessianStencil::new(mask.spec());
    let v = phi.values();
    let mut sum = 0.0;
    for &node in region {
        let k = mask.interior_index(node).ok_or(GridError::NotInterior { node })?;
        sum += (*h_ref.get(k) + st.at(v, node)).psd_det();
    }
    Ok(sum * mask.spec().cell_volume())
}

/// tr(H_total^{-1} H(eta)) at interior nodes: the derivative of log det at
/// H_total in the direction eta.
pub fn linearized_apply(
    h_total: &HermitianField,
    eta: &GridFunction,
    mask: &DomainMask,
) -> Result<GridFunction, GridError> {
    h_total.check_len(mask)?;
    check_field(eta, mask)?;
    let st = HessianStencil::new(mask.spec());
    let v = eta.values();
    let mut out = GridFunction::zeros(*mask.spec());
    for (k, &node) in mask.interior().iter().enumerate() {
        let m = h_total.get(k);
        let lam = m.lambda_min();
        if !(lam > 0.0) {
            return Err(GridError::NotPositiveDefinite { node, lambda_min: lam });
        }
        out.set(node, m.inverse().trace_product(&st.at(v, node)));
    }
    Ok(out)
}

/// Analytic complex Hessian of log(1 + |z|^2): the Fubini-Study form.
pub fn fubini_study_form(z: &[Complex64]) -> Herm {
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let q = 1.0 + r2;
    let q2 = q * q;
    if z.len() == 1 {
        return Herm::one(1.0 / q2);
    }
    // (delta_jk (1+|z|^2) - conj(z_j) z_k) / (1+|z|^2)^2
    let a = (q - z[0].norm_sqr()) / q2;
    let d = (q - z[1].norm_sqr()) / q2;
    let b = -(z[0].conj() * z[1]) / q2;
    Herm::two(a, b, d)
}

/// Centered first differences, summed squares: |grad phi|^2 in R^{2n}.
pub fn gradient_norm_sq(phi: &GridFunction, mask: &DomainMask, node: usize) -> f64 {
    let spec = mask.spec();
    let s = spec.strides();
    let h = spec.spacing();
    let v = phi.values();
    (0..spec.real_dim())
        .map(|a| {
            let g = (v[node + s[a]] - v[node - s[a]]) / (2.0 * h);
            g * g
        })
        .sum()
}
