use serde::Serialize;

use crate::calculus::{gradient_norm_sq, HessianStencil};
use crate::error::SolverError;
use crate::geometry::{BarrierWeight, ReferenceForms};
use crate::grid::{DomainMask, GridFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierReport {
    /// sup of log tr_theta(omega') - B phi + B log w_D over nodes with w_D > 0.
    pub sup_h: f64,
    pub sup_h_node: Option<usize>,
    /// sup of |grad phi|^2 w_D^N.
    pub sup_gradient: f64,
}

/// Monitored quantities of the second-order and gradient estimates, with
/// omega' = theta_s + H(phi). Nothing is asserted.
pub fn barrier_diagnostics(
    mask: &DomainMask,
    forms: &ReferenceForms,
    phi: &GridFunction,
    weight: &BarrierWeight,
    b: f64,
    n_exp: u32,
) -> Result<BarrierReport, SolverError> {
    if !(b > 2.0) || n_exp < 1 {
        return Err(SolverError::InvalidInput(format!("need B > 2 and N >= 1, got B = {b}, N = {n_exp}")));
    }
    phi.check_layout(mask)?;
    weight.w_d.check_layout(mask)?;
    let ts = forms.theta_s();
    let st = HessianStencil::new(mask.spec());
    let mut sup_h = f64::NEG_INFINITY;
    let mut sup_h_node = None;
    let mut sup_gradient: f64 = 0.0;
    for (k, &node) in mask.interior().iter().enumerate() {
        let w = weight.w_d.get(node);
        let omega_p = *ts.get(k) + st.at(phi.values(), node);
        if w > 0.0 {
            let tr = forms.theta.get(k).inverse().trace_product(&omega_p);
            let h = tr.ln() - b * phi.get(node) + b * w.ln();
            if h > sup_h {
                sup_h = h;
                sup_h_node = Some(node);
            }
        }
        let g = gradient_norm_sq(phi, mask, node) * w.powi(n_exp as i32);
        sup_gradient = sup_gradient.max(g);
    }
    Ok(BarrierReport { sup_h, sup_h_node, sup_gradient })
}
