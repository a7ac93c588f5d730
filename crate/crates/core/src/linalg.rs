//! Matrix-free Krylov and polynomial solvers over plain `f64` vectors.
//!
//! Operators are closures `apply(x, out)` writing `A x` into `out`. All
//! solvers here start from a caller-supplied initial guess and report the
//! achieved relative residual rather than failing hard; the caller decides
//! whether the result is acceptable.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for symmetric positive definite operators.
///
/// `inv_diag` is the Jacobi preconditioner (reciprocal diagonal).
pub fn conjugate_gradient<F>(
    mut apply: F,
    b: &[f64],
    x: &mut [f64],
    inv_diag: &[f64],
    tol: f64,
    max_iter: usize,
) -> LinearSolveStats
where
    F: FnMut(&[f64], &mut [f64]),
{
    let m = b.len();
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; m];
    apply(x, &mut r);
    for i in 0..m {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz = dot(&r, &z);
    let mut rel = norm(&r) / b_norm;
    if rel <= tol {
        return LinearSolveStats { iterations: 0, relative_residual: rel, converged: true };
    }
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return LinearSolveStats { iterations: it, relative_residual: rel, converged: false };
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= tol {
            return LinearSolveStats { iterations: it, relative_residual: rel, converged: true };
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    LinearSolveStats { iterations: max_iter, relative_residual: rel, converged: false }
}

/// Right-preconditioned BiCGSTAB for general (nonsymmetric) operators.
pub fn bicgstab<F>(
    mut apply: F,
    b: &[f64],
    x: &mut [f64],
    inv_diag: &[f64],
    tol: f64,
    max_iter: usize,
) -> LinearSolveStats
where
    F: FnMut(&[f64], &mut [f64]),
{
    let m = b.len();
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; m];
    apply(x, &mut r);
    for i in 0..m {
        r[i] = b[i] - r[i];
    }
    let mut rel = norm(&r) / b_norm;
    if rel <= tol {
        return LinearSolveStats { iterations: 0, relative_residual: rel, converged: true };
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; m];
    let mut p = vec![0.0; m];
    let mut p_hat = vec![0.0; m];
    let mut s = vec![0.0; m];
    let mut s_hat = vec![0.0; m];
    let mut t = vec![0.0; m];
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return LinearSolveStats { iterations: it, relative_residual: rel, converged: false };
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..m {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            p_hat[i] = p[i] * inv_diag[i];
        }
        apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            return LinearSolveStats { iterations: it, relative_residual: rel, converged: false };
        }
        alpha = rho / rv;
        for i in 0..m {
            s[i] = r[i] - alpha * v[i];
        }
        let s_rel = norm(&s) / b_norm;
        if s_rel <= tol {
            for i in 0..m {
                x[i] += alpha * p_hat[i];
            }
            return LinearSolveStats { iterations: it, relative_residual: s_rel, converged: true };
        }
        for i in 0..m {
            s_hat[i] = s[i] * inv_diag[i];
        }
        apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 || !tt.is_finite() {
            return LinearSolveStats { iterations: it, relative_residual: rel, converged: false };
        }
        omega = dot(&t, &s) / tt;
        for i in 0..m {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= tol {
            return LinearSolveStats { iterations: it, relative_residual: rel, converged: true };
        }
        if omega == 0.0 {
            return LinearSolveStats { iterations: it, relative_residual: rel, converged: false };
        }
    }
    LinearSolveStats { iterations: max_iter, relative_residual: rel, converged: false }
}

/// Chebyshev iteration with a fixed step count determined only by the
/// spectral bounds `[lo, hi]` and `tol`, starting from zero.
///
/// The result is a fixed polynomial in the operator applied to `b`, so the
/// map `b -> x` is linear up to rounding.
pub fn chebyshev<F>(mut apply: F, b: &[f64], lo: f64, hi: f64, tol: f64) -> Vec<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    assert!(lo > 0.0 && hi > lo, "invalid spectral bounds");
    let m = b.len();
    let kappa = hi / lo;
    let sigma = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);
    let steps = ((2.0 / tol).ln() / (1.0 / sigma).ln()).ceil().max(1.0) as usize;
    let d = 0.5 * (hi + lo);
    let c = 0.5 * (hi - lo);
    let mut x = vec![0.0; m];
    let mut r = b.to_vec();
    let mut p = vec![0.0; m];
    let mut ap = vec![0.0; m];
    let mut alpha = 0.0;
    for k in 0..steps {
        let beta = match k {
            0 => 0.0,
            1 => 0.5 * (c * alpha) * (c * alpha),
            _ => 0.25 * (c * alpha) * (c * alpha),
        };
        alpha = if k == 0 { 1.0 / d } else { 1.0 / (d - beta / alpha) };
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
        apply(&p, &mut ap);
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
    }
    x
}
