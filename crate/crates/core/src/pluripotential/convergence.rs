use serde::Serialize;

use crate::calculus::HermitianField;
use crate::error::PluriError;
use crate::grid::DomainMask;

use super::envelope::{extremal_function, CapacityQuery};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityTrend {
    pub cap_omega: f64,
    /// (s, Cap_{omega + s theta}(K)) in schedule order.
    pub entries: Vec<(f64, f64)>,
    /// Capacities nonincreasing along the schedule.
    pub monotone: bool,
    /// |Cap at the last s - Cap_omega|.
    pub final_gap: f64,
    pub relative_gap: f64,
}

/// Capacities of K for omega + s theta along `s_schedule`, compared with
/// the capacity for omega alone.
pub fn capacity_convergence(
    k: &[usize],
    omega: &HermitianField,
    theta: &HermitianField,
    s_schedule: &[f64],
    mask: &DomainMask,
) -> Result<CapacityTrend, PluriError> {
    if s_schedule.is_empty() || s_schedule.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(PluriError::InvalidQuery("s schedule must be nonempty and nonnegative".into()));
    }
    let cap = |field: HermitianField| -> Result<f64, PluriError> {
        Ok(extremal_function(&CapacityQuery::envelope(k.to_vec(), field), mask)?.capacity)
    };
    let cap_omega = cap(omega.clone())?;
    let mut entries = Vec::with_capacity(s_schedule.len());
    for &s in s_schedule {
        let c = if s == 0.0 { cap_omega } else { cap(omega.add_scaled(s, theta))? };
        entries.push((s, c));
    }
    let monotone = entries.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9);
    let final_gap = (entries.last().unwrap().1 - cap_omega).abs();
    let relative_gap = if cap_omega > 0.0 { final_gap / cap_omega } else { final_gap };
    Ok(CapacityTrend { cap_omega, entries, monotone, final_gap, relative_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, GridSpec};
    use crate::herm::Herm;

    #[test]
    fn zero_schedule_and_zero_theta() {
        let mask = build_domain(GridSpec::new(1, 33, 1.5).unwrap(), |z| z[0].norm_sqr(), 1.0).unwrap();
        let k: Vec<usize> = mask.interior().iter().copied().filter(|&i| mask.spec().point(i)[0].norm() <= 0.4).collect();
        let omega = HermitianField::constant(&mask, Herm::one(0.5));
        let theta = HermitianField::constant(&mask, Herm::one(1.0));
        let t = capacity_convergence(&k, &omega, &theta, &[0.0], &mask).unwrap();
        assert_eq!(t.final_gap, 0.0);
        let z = capacity_convergence(&k, &omega, &theta.scaled(0.0), &[0.5, 0.1], &mask).unwrap();
        assert!(z.entries.iter().all(|e| (e.1 - z.cap_omega).abs() < 1e-12));
    }
}
