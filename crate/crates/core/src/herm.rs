//! 1x1 and 2x2 complex Hermitian matrices with closed-form spectra.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Hermitian matrix `[[a, b], [conj(b), d]]`; for `n = 1` only `a` is used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Herm {
    pub n: usize,
    pub a: f64,
    pub d: f64,
    pub b: Complex64,
}

impl Herm {
    pub fn zero(n: usize) -> Self {
        Herm { n, a: 0.0, d: 0.0, b: Complex64::new(0.0, 0.0) }
    }

    pub fn identity(n: usize) -> Self {
        Herm::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        Herm { n, a: c, d: if n == 2 { c } else { 0.0 }, b: Complex64::new(0.0, 0.0) }
    }

    pub fn one(a: f64) -> Self {
        Herm { n: 1, a, d: 0.0, b: Complex64::new(0.0, 0.0) }
    }

    pub fn two(a: f64, b: Complex64, d: f64) -> Self {
        Herm { n: 2, a, d, b }
    }

    /// Entry (j, k).
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        match (j, k) {
            (0, 0) => Complex64::new(self.a, 0.0),
            (1, 1) => Complex64::new(self.d, 0.0),
            (0, 1) => self.b,
            (1, 0) => self.b.conj(),
            _ => panic!("index ({j}, {k}) out of range"),
        }
    }

    pub fn trace(&self) -> f64 {
        if self.n == 1 {
            self.a
        } else {
            self.a + self.d
        }
    }

    pub fn det(&self) -> f64 {
        if self.n == 1 {
            self.a
        } else {
            self.a * self.d - self.b.norm_sqr()
        }
    }

    /// Eigenvalues in ascending order; for `n = 1` both entries equal `a`.
    ///
    /// The smaller eigenvalue of a 2x2 block is recovered as det / lambda_max
    /// when that avoids cancellation.
    pub fn eigenvalues(&self) -> (f64, f64) {
        if self.n == 1 {
            return (self.a, self.a);
        }
        let m = 0.5 * (self.a + self.d);
        let half = 0.5 * (self.a - self.d);
        let disc = half.hypot(self.b.norm());
        if m > 0.0 {
            let hi = m + disc;
            (self.det() / hi, hi)
        } else if m < 0.0 {
            let lo = m - disc;
            (lo, self.det() / lo)
        } else {
            (-disc, disc)
        }
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().1
    }

    /// Determinant of the PSD projection (negative eigenvalues clamped to 0).
    pub fn psd_det(&self) -> f64 {
        if self.n == 1 {
            return self.a.max(0.0);
        }
        let (lo, hi) = self.eigenvalues();
        lo.max(0.0) * hi.max(0.0)
    }

    /// Inverse; the caller guarantees nonsingularity.
    pub fn inverse(&self) -> Herm {
        if self.n == 1 {
            return Herm::one(1.0 / self.a);
        }
        let det = self.det();
        Herm { n: 2, a: self.d / det, d: self.a / det, b: -self.b / det }
    }

    /// tr(self * other) for Hermitian operands.
    pub fn trace_product(&self, other: &Herm) -> f64 {
        if self.n == 1 {
            self.a * other.a
        } else {
            self.a * other.a + self.d * other.d + 2.0 * (self.b * other.b.conj()).re
        }
    }

    /// v^* M v.
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        if self.n == 1 {
            return self.a * v[0].norm_sqr();
        }
        self.a * v[0].norm_sqr() + self.d * v[1].norm_sqr() + 2.0 * (v[0].conj() * self.b * v[1]).re
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.d.is_finite() && self.b.re.is_finite() && self.b.im.is_finite()
    }
}

impl Add for Herm {
    type Output = Herm;
    fn add(self, o: Herm) -> Herm {
        Herm { n: self.n, a: self.a + o.a, d: self.d + o.d, b: self.b + o.b }
    }
}

impl Sub for Herm {
    type Output = Herm;
    fn sub(self, o: Herm) -> Herm {
        Herm { n: self.n, a: self.a - o.a, d: self.d - o.d, b: self.b - o.b }
    }
}

impl Mul<Herm> for f64 {
    type Output = Herm;
    fn mul(self, m: Herm) -> Herm {
        Herm { n: m.n, a: self * m.a, d: self * m.d, b: m.b * self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_of_diagonal() {
        let m = Herm::two(3.0, Complex64::new(0.0, 0.0), -1.0);
        assert_eq!(m.eigenvalues(), (-1.0, 3.0));
        assert_eq!(m.det(), -3.0);
        assert_eq!(m.psd_det(), 0.0);
    }

    #[test]
    fn singular_has_zero_eigenvalue() {
        // [[1, 1], [1, 1]] has eigenvalues 0 and 2
        let m = Herm::two(1.0, Complex64::new(1.0, 0.0), 1.0);
        let (lo, hi) = m.eigenvalues();
        assert_eq!(lo, 0.0);
        assert!((hi - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_and_trace_product() {
        let m = Herm::two(2.0, Complex64::new(0.5, -0.3), 1.5);
        let inv = m.inverse();
        // tr(M^-1 M) = n
        assert!((inv.trace_product(&m) - 2.0).abs() < 1e-14);
        let v = [Complex64::new(1.0, 0.2), Complex64::new(-0.4, 0.7)];
        let (lo, hi) = m.eigenvalues();
        let q = m.quadratic_form(&v) / (v[0].norm_sqr() + v[1].norm_sqr());
        assert!(q >= lo - 1e-14 && q <= hi + 1e-14);
        assert!((lo * hi - m.det()).abs() < 1e-14);
        assert!((lo + hi - m.trace()).abs() < 1e-14);
    }
}
