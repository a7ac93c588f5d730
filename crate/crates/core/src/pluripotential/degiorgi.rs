use serde::Serialize;

use crate::error::PluriError;

/// A sampled pair (l, r) violating r F(l + r) <= A F(l)^{1 + alpha}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub l: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeGiorgiCertificate {
    pub a: f64,
    pub alpha: f64,
    /// Smallest sampled l with F(l)^alpha <= 1 / (2A).
    pub l0: Option<f64>,
    /// 2 + l0.
    pub s_bound: Option<f64>,
    pub hypothesis_verified: bool,
    pub witness: Option<Witness>,
    /// First sampled level where F vanishes.
    pub first_zero: Option<f64>,
    /// Whether F = 0 at every sampled l >= S.
    pub vanishes_beyond_s: bool,
}

impl DeGiorgiCertificate {
    /// Hypothesis verified and F vanishing beyond S.
    pub fn certified(&self) -> bool {
        self.hypothesis_verified && self.vanishes_beyond_s
    }
}

fn validate(samples: &[(f64, f64)], a: f64, alpha: f64) -> Result<(), PluriError> {
    if !(a > 0.0 && a.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PluriError::InvalidSamples(format!("A = {a}, alpha = {alpha} must be positive")));
    }
    if samples.is_empty() {
        return Err(PluriError::InvalidSamples("no samples".into()));
    }
    for &(l, f) in samples {
        if !l.is_finite() || !(f >= 0.0) || !f.is_finite() {
            return Err(PluriError::InvalidSamples(format!("bad sample ({l}, {f})")));
        }
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(PluriError::InvalidSamples("levels must increase".into()));
        }
        if w[1].1 > w[0].1 * (1.0 + 1e-9) + 1e-15 {
            return Err(PluriError::InvalidSamples(format!("F increases between l = {} and l = {}", w[0].0, w[1].0)));
        }
    }
    Ok(())
}

/// Checks the iteration hypothesis r F(l + r) <= A F(l)^{1 + alpha} on every
/// sampled pair with r in (0, 1] and derives the vanishing bound S = 2 + l0.
pub fn degiorgi_bound(samples: &[(f64, f64)], a: f64, alpha: f64) -> Result<DeGiorgiCertificate, PluriError> {
    degiorgi_bound_with_slack(samples, a, alpha, &vec![0.0; samples.len()])
}

/// As `degiorgi_bound`, allowing an absolute slack per base sample l.
pub fn degiorgi_bound_with_slack(
    samples: &[(f64, f64)],
    a: f64,
    alpha: f64,
    slack: &[f64],
) -> Result<DeGiorgiCertificate, PluriError> {
    validate(samples, a, alpha)?;
    if slack.len() != samples.len() {
        return Err(PluriError::InvalidSamples("slack length differs from samples".into()));
    }
    let mut witness = None;
    'scan: for (i, &(l, fl)) in samples.iter().enumerate() {
        let rhs = a * fl.powf(1.0 + alpha);
        for &(m, fm) in &samples[i + 1..] {
            let r = m - l;
            if r > 1.0 + 1e-12 {
                break;
            }
            let lhs = r * fm;
            if lhs > rhs * (1.0 + 1e-12) + slack[i] {
                witness = Some(Witness { l, r, lhs, rhs });
                break 'scan;
            }
        }
    }
    let threshold = 1.0 / (2.0 * a);
    let l0 = samples.iter().find(|(_, f)| f.powf(alpha) <= threshold).map(|&(l, _)| l);
    let s_bound = l0.map(|l| 2.0 + l);
    let first_zero = samples.iter().find(|(_, f)| *f == 0.0).map(|&(l, _)| l);
    let vanishes_beyond_s = match s_bound {
        Some(s) => samples.iter().filter(|(l, _)| *l >= s).all(|(_, f)| *f == 0.0),
        None => false,
    };
    Ok(DeGiorgiCertificate {
        a,
        alpha,
        l0,
        s_bound,
        hypothesis_verified: witness.is_none(),
        witness,
        first_zero,
        vanishes_beyond_s,
    })
}
