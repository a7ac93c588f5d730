//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use plurisolve_core::geometry::build_reference_forms;
use plurisolve_core::grid::{build_domain, DomainMask, GridFunction, GridSpec};
use plurisolve_core::ReferenceForms;

/// Euclidean unit ball in C^n on a box of half-width 1.1.
pub fn unit_ball(n: usize, nodes: usize) -> DomainMask {
    let rho = |z: &[Complex64]| z.iter().map(|c| c.norm_sqr()).sum::<f64>();
    build_domain(GridSpec::new(n, nodes, 1.1).expect("valid grid"), rho, 1.0).expect("nonempty ball")
}

/// Flat reference forms with zero boundary data.
pub fn flat_forms(mask: &DomainMask, s: f64) -> ReferenceForms {
    build_reference_forms(mask, 1.0, &GridFunction::zeros(*mask.spec()), s).expect("forms")
}

/// A smooth strictly psh test function.
pub fn bumpy(mask: &DomainMask) -> GridFunction {
    GridFunction::from_fn(mask, |z| {
        z.iter().map(|c| c.norm_sqr() + 0.1 * (2.0 * c.re).sin() * c.im).sum::<f64>()
    })
    .expect("finite")
}
