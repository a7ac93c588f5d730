use serde::Serialize;

use crate::calculus::{ma_mass, HermitianField};
use crate::error::PluriError;
use crate::grid::{DomainMask, GridFunction};

use super::degiorgi::{degiorgi_bound_with_slack, DeGiorgiCertificate};
use super::envelope::{extremal_function, CapacityQuery};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelStat {
    pub l: f64,
    /// Interior nodes with phi < -l.
    pub nodes: Vec<usize>,
    /// Capacity of the sublevel set.
    pub a: f64,
    /// MA mass of phi on the sublevel set.
    pub b: f64,
    /// a^{1/n}.
    pub f: f64,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelStats {
    pub n: usize,
    pub h: f64,
    pub levels: Vec<LevelStat>,
}

impl SublevelStats {
    /// 50 h^2 |U(l)| h^{2n} for a level.
    pub fn tolerance(&self, level: &LevelStat) -> f64 {
        50.0 * self.h.powi(2) * level.nodes.len() as f64 * self.h.powi(2 * self.n as i32)
    }

    /// (l, F(l)) over the levels that were not skipped.
    pub fn f_samples(&self) -> Vec<(f64, f64)> {
        self.levels.iter().filter(|s| s.skipped.is_none()).map(|s| (s.l, s.f)).collect()
    }
}

/// Capacity and MA mass of the sublevel sets {phi < -l}. Levels whose set
/// reaches the boundary band are reported as skipped.
pub fn sublevel_stats(
    phi: &GridFunction,
    theta_s: &HermitianField,
    levels: &[f64],
    mask: &DomainMask,
) -> Result<SublevelStats, PluriError> {
    phi.check_layout(mask)?;
    theta_s.check_len(mask)?;
    if levels.windows(2).any(|w| !(w[1] > w[0])) || levels.iter().any(|l| !l.is_finite()) {
        return Err(PluriError::InvalidSamples("levels must be finite and increasing".into()));
    }
    let n = mask.spec().n;
    let mut out = Vec::with_capacity(levels.len());
    for &l in levels {
        let nodes: Vec<usize> = mask.interior().iter().copied().filter(|&i| phi.get(i) < -l).collect();
        let mut stat = LevelStat { l, nodes, a: 0.0, b: 0.0, f: 0.0, skipped: None };
        if !stat.nodes.is_empty() {
            if let Some(&node) = stat.nodes.iter().find(|&&i| !mask.is_deep_interior(i)) {
                stat.skipped = Some(format!("level set touches the boundary band at node {node}"));
            } else {
                let q = CapacityQuery::envelope(stat.nodes.clone(), theta_s.clone());
                stat.a = extremal_function(&q, mask)?.capacity;
                stat.b = ma_mass(theta_s, phi, mask, &stat.nodes)?;
                stat.f = stat.a.powf(1.0 / n as f64);
            }
        }
        out.push(stat);
    }
    Ok(SublevelStats { n, h: mask.spec().spacing(), levels: out })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KolodziejCheck {
    pub l: f64,
    /// t^n a(l + t).
    pub lhs: f64,
    /// b(l).
    pub rhs: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KolodziejReport {
    pub t: f64,
    pub checks: Vec<KolodziejCheck>,
    pub all_pass: bool,
    /// Smallest C with b(l) <= C a(l)^2 over the levels with a(l) > 0.
    pub c_fit: f64,
    pub c_vol: f64,
    pub volume_bound_holds: bool,
    /// Least-squares slope of log a(l + 1) against log l.
    pub decay_exponent: Option<f64>,
    /// a nonincreasing over the unskipped levels.
    pub monotone_decay: bool,
}

impl KolodziejReport {
    /// The constant A in r F(l + r) <= A F(l)^2 implied by the fitted C.
    pub fn degiorgi_constant(&self, n: usize) -> f64 {
        self.c_fit.powf(1.0 / n as f64)
    }
}

fn find_level(levels: &[LevelStat], l: f64) -> Option<&LevelStat> {
    levels.iter().find(|s| (s.l - l).abs() <= 1e-9 * l.abs().max(1.0) && s.skipped.is_none())
}

/// Checks t^n a(l + t) <= b(l) + tol at every level where l + t is also
/// sampled, and fits the volume-capacity and decay constants.
pub fn check_kolodziej_inequalities(stats: &SublevelStats, t: f64, c_vol: f64) -> Result<KolodziejReport, PluriError> {
    if !(t > 0.0 && t < 1.0) {
        return Err(PluriError::InvalidSamples(format!("t = {t} must lie in (0, 1)")));
    }
    let tn = t.powi(stats.n as i32);
    let used: Vec<&LevelStat> = stats.levels.iter().filter(|s| s.skipped.is_none()).collect();
    let mut checks = Vec::new();
    for s in &used {
        if let Some(next) = find_level(&stats.levels, s.l + t) {
            let lhs = tn * next.a;
            let tol = stats.tolerance(s);
            checks.push(KolodziejCheck { l: s.l, lhs, rhs: s.b, tol, pass: lhs <= s.b + tol });
        }
    }
    let c_fit = used.iter().filter(|s| s.a > 0.0).map(|s| s.b / (s.a * s.a)).fold(0.0, f64::max);
    let mut pts = Vec::new();
    for s in &used {
        if s.l > 0.0 {
            if let Some(next) = find_level(&stats.levels, s.l + 1.0) {
                if next.a > 0.0 {
                    pts.push((s.l.ln(), next.a.ln()));
                }
            }
        }
    }
    let decay_exponent = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    let monotone_decay = used.windows(2).all(|w| w[1].a <= w[0].a * (1.0 + 1e-9) + 1e-15);
    Ok(KolodziejReport {
        t,
        all_pass: checks.iter().all(|c| c.pass),
        checks,
        c_fit,
        c_vol,
        volume_bound_holds: c_fit <= c_vol,
        decay_exponent,
        monotone_decay,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct C0Certificate {
    pub s_bound: Option<f64>,
    pub inf_phi: f64,
    pub bound_holds: bool,
    pub degiorgi: DeGiorgiCertificate,
    pub reason: Option<String>,
}

/// Runs the De Giorgi scan on the sampled F(l) of a solve and checks
/// inf phi >= -S - 10 h^2.
pub fn c0_certificate(
    stats: &SublevelStats,
    phi: &GridFunction,
    mask: &DomainMask,
    a_fit: f64,
    alpha: f64,
) -> Result<C0Certificate, PluriError> {
    phi.check_layout(mask)?;
    let used: Vec<&LevelStat> = stats.levels.iter().filter(|s| s.skipped.is_none()).collect();
    let samples: Vec<(f64, f64)> = used.iter().map(|s| (s.l, s.f)).collect();
    // The hypothesis inherits the comparison tolerance of the base level.
    let slack: Vec<f64> = used.iter().map(|s| stats.tolerance(s)).collect();
    // A vanishing fitted constant means F is identically zero; any A > 0 works.
    let a = if a_fit > 0.0 { a_fit } else { 1.0 };
    let degiorgi = degiorgi_bound_with_slack(&samples, a, alpha, &slack)?;
    let inf_phi = phi.min_interior(mask);
    let h = stats.h;
    let (bound_holds, reason) = if !degiorgi.hypothesis_verified {
        (false, Some("iteration hypothesis not verified".to_string()))
    } else if !degiorgi.vanishes_beyond_s {
        (false, Some("F does not vanish beyond S".to_string()))
    } else {
        let s = degiorgi.s_bound.expect("vanishing implies a bound");
        if inf_phi >= -s - 10.0 * h * h {
            (true, None)
        } else {
            (false, Some(format!("inf phi = {inf_phi} below -S = {}", -s)))
        }
    };
    Ok(C0Certificate { s_bound: degiorgi.s_bound, inf_phi, bound_holds, degiorgi, reason })
}
