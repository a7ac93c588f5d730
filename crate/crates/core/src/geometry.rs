//! Geometric inputs: reference forms, regularized densities, divisor and
//! barrier weights, klt discrepancies and blow-up chart positivity.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::calculus::{complex_hessian, fubini_study_form, HermitianField};
use crate::error::{GeometryError, GridError};
use crate::grid::{DomainMask, GridFunction};
use crate::herm::Herm;

/// Tolerance for "semipositive" on computed forms.
pub const PSD_TOL: f64 = 1e-12;

/// Reference forms omega (semipositive) and theta (positive), with the
/// current regularization parameter s.
#[derive(Clone, Debug)]
pub struct ReferenceForms {
    pub omega: HermitianField,
    pub theta: HermitianField,
    pub scale: f64,
    pub psi1: Option<GridFunction>,
    pub s: f64,
}

fn check_psd(field: &HermitianField, mask: &DomainMask, tol: f64) -> Result<(), GridError> {
    let (k, lam) = field.min_eigenvalue();
    if lam < -tol || !lam.is_finite() {
        return Err(GridError::NotSemipositive { node: mask.interior()[k], lambda_min: lam });
    }
    Ok(())
}

/// Builds omega = A H(rho - a) + H(psi1) and the analytic Fubini-Study theta.
pub fn build_reference_forms(
    mask: &DomainMask,
    scale: f64,
    psi1: &GridFunction,
    s: f64,
) -> Result<ReferenceForms, GeometryError> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("scale A must be positive, got {scale}")));
    }
    check_s(s)?;
    psi1.check_layout(mask)?;
    psi1.check_finite()?;
    let rho = GridFunction::from_values(*mask.spec(), mask.rho().to_vec())?;
    let omega = complex_hessian(&rho, mask)?
        .scaled(scale)
        .add(&complex_hessian(psi1, mask)?);
    check_psd(&omega, mask, PSD_TOL)?;
    let theta = fubini_study_theta(mask);
    let (k, lam) = theta.min_eigenvalue();
    if !(lam > 0.0) {
        return Err(GridError::NotPositiveDefinite { node: mask.interior()[k], lambda_min: lam }.into());
    }
    Ok(ReferenceForms { omega, theta, scale, psi1: Some(psi1.clone()), s })
}

fn check_s(s: f64) -> Result<(), GeometryError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(GeometryError::InvalidParameter(format!("s must lie in [0, 1], got {s}")));
    }
    Ok(())
}

/// Analytic complex Hessian of log(1 + |z|^2) at interior nodes.
pub fn fubini_study_theta(mask: &DomainMask) -> HermitianField {
    HermitianField::from_fn(mask, fubini_study_form)
}

impl ReferenceForms {
    /// Forms supplied directly; both are only required to be semipositive,
    /// which admits degenerate model problems such as H_ref = 0.
    pub fn custom(mask: &DomainMask, omega: HermitianField, theta: HermitianField, s: f64) -> Result<Self, GeometryError> {
        check_s(s)?;
        omega.check_len(mask)?;
        theta.check_len(mask)?;
        check_psd(&omega, mask, PSD_TOL)?;
        check_psd(&theta, mask, PSD_TOL)?;
        Ok(ReferenceForms { omega, theta, scale: 0.0, psi1: None, s })
    }

    /// theta_s = omega + s theta.
    pub fn theta_s(&self) -> HermitianField {
        self.omega.add_scaled(self.s, &self.theta)
    }

    pub fn with_s(&self, s: f64) -> Result<Self, GeometryError> {
        check_s(s)?;
        let mut f = self.clone();
        f.s = s;
        Ok(f)
    }

    /// Nodewise det(theta_s) as a field (zero off the interior).
    pub fn det_theta_s(&self, mask: &DomainMask) -> GridFunction {
        let ts = self.theta_s();
        let mut g = GridFunction::zeros(*mask.spec());
        for (k, &node) in mask.interior().iter().enumerate() {
            g.set(node, ts.get(k).det());
        }
        g
    }
}

/// Right-hand-side data: e^f (w_E + s)/(w_F + s) Omega_Y.
#[derive(Clone, Debug)]
pub struct DensitySpec {
    pub omega_y: GridFunction,
    pub w_e: GridFunction,
    pub w_f: GridFunction,
    pub f: GridFunction,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub volume: GridFunction,
}

impl DensitySpec {
    /// Omega_Y = 1, no divisors, f = 0, unit volume density.
    pub fn uniform(mask: &DomainMask) -> Self {
        let one = GridFunction::constant(mask, 1.0);
        let zero = GridFunction::zeros(*mask.spec());
        DensitySpec {
            omega_y: one.clone(),
            w_e: zero.clone(),
            w_f: zero.clone(),
            f: zero,
            lambda: 0.0,
            p: 2.0,
            q: f64::MAX,
            volume: one,
        }
    }

    pub fn validate(&self, mask: &DomainMask) -> Result<(), GeometryError> {
        for (name, g) in [
            ("omega_y", &self.omega_y),
            ("w_e", &self.w_e),
            ("w_f", &self.w_f),
            ("f", &self.f),
            ("volume", &self.volume),
        ] {
            g.check_layout(mask)?;
            g.check_finite().map_err(|e| GeometryError::InvalidParameter(format!("{name}: {e}")))?;
        }
        for &node in mask.interior() {
            if !(self.omega_y.get(node) > 0.0) {
                return Err(GeometryError::NonPositiveDensity { node, value: self.omega_y.get(node) });
            }
            if !(self.volume.get(node) > 0.0) {
                return Err(GeometryError::NonPositiveDensity { node, value: self.volume.get(node) });
            }
            if self.w_e.get(node) < 0.0 || self.w_f.get(node) < 0.0 {
                return Err(GeometryError::InvalidParameter(format!("negative divisor weight at node {node}")));
            }
        }
        if self.lambda != 0.0 && self.lambda != 1.0 {
            return Err(GeometryError::InvalidParameter(format!("lambda must be 0 or 1, got {}", self.lambda)));
        }
        if !(self.p > 1.0) || !(self.q > 0.0) {
            return Err(GeometryError::InvalidParameter("need p > 1 and Q > 0".into()));
        }
        Ok(())
    }

    /// Sum of e^{p f} Omega_Y h^{2n} over the interior and whether it is <= Q.
    pub fn integrability(&self, mask: &DomainMask) -> (f64, bool) {
        let sum: f64 = mask
            .interior()
            .iter()
            .map(|&i| (self.p * self.f.get(i)).exp() * self.omega_y.get(i))
            .sum::<f64>()
            * mask.spec().cell_volume();
        (sum, sum <= self.q)
    }
}

/// Nodewise e^f (w_E + s)/(w_F + s) Omega_Y on the interior.
pub fn regularized_density(spec: &DensitySpec, s: f64, mask: &DomainMask) -> Result<GridFunction, GeometryError> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("s must be >= 0, got {s}")));
    }
    spec.validate(mask)?;
    let mut out = GridFunction::zeros(*mask.spec());
    for &node in mask.interior() {
        let den = spec.w_f.get(node) + s;
        if den == 0.0 {
            return Err(GeometryError::UnregularizedDensity { node });
        }
        let v = spec.f.get(node).exp() * (spec.w_e.get(node) + s) / den * spec.omega_y.get(node);
        if !(v > 0.0) || !v.is_finite() {
            return Err(GeometryError::NonPositiveDensity { node, value: v });
        }
        out.set(node, v);
    }
    Ok(out)
}

/// Sum of density^p h^{2n} over the interior.
pub fn lp_norm_check(density: &GridFunction, p: f64, mask: &DomainMask) -> Result<f64, GeometryError> {
    if !(p > 1.0) {
        return Err(GeometryError::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    density.check_layout(mask)?;
    let sum: f64 = mask.interior().iter().map(|&i| density.get(i).abs().powf(p)).sum();
    Ok(sum * mask.spec().cell_volume())
}

/// Barrier weight w_D with the Kodaira positivity data.
#[derive(Clone, Debug)]
pub struct BarrierWeight {
    pub w_d: GridFunction,
    pub beta: f64,
    pub log_hd_hessian: HermitianField,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierCheck {
    pub kodaira_lambda_min: f64,
    pub kodaira_holds: bool,
    pub support_holds: bool,
}

impl BarrierWeight {
    /// Trivial metric h_D: H(log h_D) = 0.
    pub fn new(mask: &DomainMask, w_d: GridFunction, beta: f64) -> Result<Self, GeometryError> {
        Self::with_hessian(mask, w_d, beta, HermitianField::zeros(mask))
    }

    pub fn with_hessian(
        mask: &DomainMask,
        w_d: GridFunction,
        beta: f64,
        log_hd_hessian: HermitianField,
    ) -> Result<Self, GeometryError> {
        w_d.check_layout(mask)?;
        log_hd_hessian.check_len(mask)?;
        if !(beta > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if let Some(&node) = mask.interior().iter().find(|&&i| !(w_d.get(i) >= 0.0)) {
            return Err(GeometryError::InvalidParameter(format!("w_D negative at node {node}")));
        }
        Ok(BarrierWeight { w_d, beta, log_hd_hessian })
    }

    /// Re-verifies omega + H(log h_D) - beta theta >= 0 and that w_D vanishes
    /// exactly where w_E w_F does.
    pub fn verify(&self, forms: &ReferenceForms, density: &DensitySpec, mask: &DomainMask) -> BarrierCheck {
        let k = forms
            .omega
            .add(&self.log_hd_hessian)
            .add_scaled(-self.beta, &forms.theta);
        let (_, lam) = k.min_eigenvalue();
        let support_holds = mask.interior().iter().all(|&i| {
            let d_zero = self.w_d.get(i) == 0.0;
            let ef_zero = density.w_e.get(i) * density.w_f.get(i) == 0.0;
            d_zero == ef_zero
        });
        BarrierCheck { kodaira_lambda_min: lam, kodaira_holds: lam >= -PSD_TOL, support_holds }
    }
}

/// Discrepancy data for the cone over a degree-m hypersurface in C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct KltData {
    pub n: i64,
    pub m: i64,
    pub a: Ratio<i64>,
    pub is_klt: bool,
    /// Nonnegative discrepancies a_i (components of E).
    pub a_list: Vec<Ratio<i64>>,
    /// Negated negative discrepancies b_j (components of F).
    pub b_list: Vec<Ratio<i64>>,
}

/// a = n - m - 1 from K = (a + 1) E restricted to the strict transform.
pub fn klt_discrepancy(n: i64, m: i64) -> Result<KltData, GeometryError> {
    if n < 2 || m < 2 {
        return Err(GeometryError::InvalidParameter(format!("need n >= 2 and m >= 2, got n = {n}, m = {m}")));
    }
    // The exceptional divisor restricted to the strict transform has
    // degree -1 and K of the blow-up restricts with degree m - n.
    let a = Ratio::from_integer(m - n) / Ratio::from_integer(-1) - Ratio::from_integer(1);
    let data = classify_discrepancies(&[a]);
    Ok(KltData { n, m, a, ..data })
}

/// Splits discrepancies into E (a_i >= 0) and F (b_j = -a_i > 0) parts and
/// decides klt (all a_i > -1).
pub fn classify_discrepancies(discrepancies: &[Ratio<i64>]) -> KltData {
    let zero = Ratio::from_integer(0);
    let minus_one = Ratio::from_integer(-1);
    let a_list = discrepancies.iter().copied().filter(|a| *a >= zero).collect();
    let b_list = discrepancies.iter().filter(|a| **a < zero).map(|a| -*a).collect();
    let is_klt = discrepancies.iter().all(|a| *a > minus_one);
    KltData {
        n: 0,
        m: 0,
        a: discrepancies.first().copied().unwrap_or(zero),
        is_klt,
        a_list,
        b_list,
    }
}

/// Positivity data of the pulled-back flat form on a blow-up chart.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupCheck {
    pub matrix: Vec<Vec<Complex64>>,
    pub lambda_min: f64,
    /// Determinant of the 2x2 block on span(e_0, conj(u)): (1/2)|z_i|^2.
    pub schur_value: f64,
    /// Determinant of the full matrix by elimination.
    pub det: f64,
    pub certified: bool,
}

/// Builds [[1/2 + |u|^2, Y], [Y^*, |z_i|^2 I]] with Y_j = u_j conj(z_i).
pub fn blowup_positivity(z_i: Complex64, u: &[Complex64]) -> BlowupCheck {
    let n = u.len() + 1;
    let uu: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    let zz = z_i.norm_sqr();
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    matrix[0][0] = Complex64::new(0.5 + uu, 0.0);
    for j in 1..n {
        let y = u[j - 1] * z_i.conj();
        matrix[0][j] = y;
        matrix[j][0] = y.conj();
        matrix[j][j] = Complex64::new(zz, 0.0);
    }
    // The orthogonal complement of conj(u) in the lower block is an
    // eigenspace for |z_i|^2; the rest reduces to a 2x2 block.
    let block = Herm::two(0.5 + uu, z_i.conj() * uu.sqrt(), zz);
    let mut lambda_min = block.lambda_min();
    if n >= 3 {
        lambda_min = lambda_min.min(zz);
    }
    let det = complex_det(&matrix);
    BlowupCheck {
        matrix,
        lambda_min,
        schur_value: 0.5 * zz,
        det,
        certified: lambda_min >= -PSD_TOL,
    }
}

/// Determinant by Gaussian elimination with partial pivoting; real part.
fn complex_det(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[p][c].norm() == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
        }
    }
    det.re
}
