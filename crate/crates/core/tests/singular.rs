use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use plurisolve_core::grid::{build_domain, BoundaryData, DomainMask, GridFunction, GridSpec};
use plurisolve_core::singular::*;
use plurisolve_core::solver::{dirichlet_lift, newton_solve_ref, Rhs, SolveConfig};
use plurisolve_core::HermitianField;

fn ball(n: usize, nodes: usize, half_width: f64) -> DomainMask {
    let spec = GridSpec::new(n, nodes, half_width).unwrap();
    build_domain(spec, |z| z.iter().map(|c| c.norm_sqr()).sum(), 1.0).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Radial instance with exact solution s log(|z|^2 + delta) + |z|^2.
fn radial_spec(mask: &DomainMask, s: f64, deltas: &[f64]) -> PoleSpec {
    let n = mask.spec().n;
    let logd = deltas
        .iter()
        .map(|&d| {
            GridFunction::from_fn(mask, |z| {
                let q = z.iter().map(|c| c.norm_sqr()).sum::<f64>() + d;
                ((1.0 + s * d / (q * q)) * (1.0 + s / q).powi(n as i32 - 1)).ln()
            })
            .unwrap()
        })
        .collect();
    let psi = BoundaryData::from_fn(mask, |z| {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        s * r2.ln() + r2
    })
    .unwrap();
    PoleSpec {
        poles: vec![vec![c(0.0, 0.0); n]],
        weights: vec![s],
        deltas: deltas.to_vec(),
        lambda: 0.0,
        log_density: LogDensity::PerDelta(logd),
        boundary: psi,
    }
}

fn sq_norm(mask: &DomainMask) -> GridFunction {
    GridFunction::from_fn(mask, |z| z.iter().map(|c| c.norm_sqr()).sum()).unwrap()
}

#[test]
fn zero_weight_reduces_to_dirichlet_solve() {
    let mask = ball(1, 33, 1.5);
    let psi = BoundaryData::from_fn(&mask, |z| z[0].norm_sqr() + 0.3 * z[0].re).unwrap();
    let logd = GridFunction::from_fn(&mask, |z| (1.0 + 0.5 * z[0].im * z[0].im).ln()).unwrap();
    let spec = PoleSpec {
        poles: vec![vec![c(0.1, 0.0)]],
        weights: vec![0.0],
        deltas: vec![1e-2, 1e-3],
        lambda: 0.0,
        log_density: LogDensity::Fixed(logd.clone()),
        boundary: psi.clone(),
    };
    let cfg = SolveConfig::default();
    let sol = solve_log_pole(&mask, &spec, &cfg, &AsymptoticsOptions::default()).unwrap();
    let rhs = Rhs::from_log_density(&mask, &logd, 0.0).unwrap();
    let init = dirichlet_lift(&mask, &HermitianField::zeros(&mask), &psi, cfg.psh_epsilon).unwrap();
    let (direct, _) = newton_solve_ref(&mask, &HermitianField::zeros(&mask), &rhs, &psi, &init, &cfg).unwrap();
    for (phi, u) in sol.phis.iter().zip(&sol.remainders) {
        assert!(phi.max_diff_on(u, mask.interior()) < 1e-14);
        assert!(phi.max_diff_on(&direct, mask.interior()) < 1e-8);
    }
}

#[test]
fn n1_remainder_matches_dense_poisson_solve() {
    let mask = ball(1, 33, 1.5);
    let spec_grid = *mask.spec();
    let h = spec_grid.spacing();
    let pole = vec![c(0.1, -0.2)];
    let s = 0.7;
    let delta = 1e-2;
    let h_p = pole_hessian(&mask, &[pole.clone()], &[s], delta);
    // g = H(P) + 1 + x^2 / 2 stays positive.
    let g = GridFunction::from_fn(&mask, |z| 1.0 + 0.5 * z[0].re * z[0].re).unwrap();
    let mut g_full = GridFunction::zeros(spec_grid);
    for (k, &i) in mask.interior().iter().enumerate() {
        g_full.set(i, g.get(i) + h_p.get(k).a);
    }
    let logd = GridFunction::from_values(spec_grid, g_full.values().iter().map(|v| if *v > 0.0 { v.ln() } else { 0.0 }).collect())
        .unwrap();
    let psi = BoundaryData::from_fn(&mask, |z| 0.2 * z[0].re).unwrap();
    let spec = PoleSpec {
        poles: vec![pole.clone()],
        weights: vec![s],
        deltas: vec![delta],
        lambda: 0.0,
        log_density: LogDensity::Fixed(logd),
        boundary: psi.clone(),
    };
    let sol = solve_log_pole(&mask, &spec, &SolveConfig::default(), &AsymptoticsOptions::default()).unwrap();
    assert!(sol.asymptotics.is_none());

    // Oracle: (1/4) 5-point Laplacian of u = g_full - H(P) with u = psi - P on the band.
    let p = pole_ansatz(&mask, &[pole], &[s], delta);
    let m = mask.interior_count();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    let strides = spec_grid.strides();
    for (row, &i) in mask.interior().iter().enumerate() {
        a[(row, row)] = -1.0 / (h * h);
        b[row] = g.get(i);
        for off in [strides[0] as isize, -(strides[0] as isize), strides[1] as isize, -(strides[1] as isize)] {
            let nb = (i as isize + off) as usize;
            match mask.interior_index(nb) {
                Some(col) => a[(row, col)] += 0.25 / (h * h),
                None => {
                    let k = mask.boundary_index(nb).unwrap();
                    b[row] -= 0.25 / (h * h) * (psi.values()[k] - p.get(nb));
                }
            }
        }
    }
    let u = a.lu().solve(&b).unwrap();
    for (row, &i) in mask.interior().iter().enumerate() {
        assert!((sol.remainders[0].get(i) - u[row]).abs() <= 1e-6);
        assert!((sol.phis[0].get(i) - u[row] - p.get(i)).abs() <= 1e-6);
    }
}

#[test]
fn radial_n2_remainder_is_bounded() {
    let mask = ball(2, 17, 1.1);
    let spec = radial_spec(&mask, 0.5, &PoleSpec::DEFAULT_DELTAS);
    let sol = solve_log_pole(&mask, &spec, &SolveConfig::default(), &AsymptoticsOptions::default()).unwrap();
    let sq = sq_norm(&mask);
    for u in &sol.remainders {
        assert!(u.max_diff_on(&sq, mask.interior()) <= 0.1);
    }
    let rep = sol.asymptotics.unwrap();
    assert!(rep.bounded, "{rep:?}");
    assert!(rep.max_oscillation <= 0.1);
}

#[test]
fn radial_n1_weight_recovery_and_delta_stability() {
    let mask = ball(1, 257, 1.1);
    let s = 0.5;
    let spec = radial_spec(&mask, s, &PoleSpec::DEFAULT_DELTAS);
    let sol = solve_log_pole(&mask, &spec, &SolveConfig::default(), &AsymptoticsOptions::default()).unwrap();
    let rep = sol.asymptotics.unwrap();
    assert!(rep.bounded);
    assert!(rep.annuli.len() >= 3);
    for fits in &rep.fitted_weights {
        let w = fits[0].unwrap();
        assert!((w - s).abs() <= 0.05 * s, "fitted {w}");
    }
    // Annuli are listed outermost first.
    for w in rep.field_oscillation.windows(2) {
        assert!(w[0] <= w[1] + 1e-6, "{:?}", rep.field_oscillation);
    }
}

#[test]
fn wrong_weight_is_flagged() {
    let mask = ball(1, 257, 1.1);
    let spec = radial_spec(&mask, 0.5, &PoleSpec::DEFAULT_DELTAS);
    let phis: Vec<GridFunction> = spec
        .deltas
        .iter()
        .map(|&d| {
            let p = pole_ansatz(&mask, &spec.poles, &spec.weights, d);
            let wrong = pole_ansatz(&mask, &spec.poles, &[0.25], d);
            p.add_scaled(1.0, &wrong)
        })
        .collect();
    let rep = verify_asymptotics(&mask, &phis, &spec, &AsymptoticsOptions::default()).unwrap();
    assert!(!rep.bounded);
    // At the smallest delta the innermost sups grow by about log(4) / 4 per level.
    let last = rep.sups.last().unwrap();
    let step = 0.25 * 4f64.ln();
    let delta = *spec.deltas.last().unwrap();
    let mut checked = 0;
    for j in 1..last.len() {
        if rep.annuli[j].inner_r.powi(2) >= 20.0 * delta {
            let growth = last[j] - last[j - 1];
            assert!((growth - step).abs() <= 0.05 * step, "growth {growth} at level {j}");
            checked += 1;
        }
    }
    assert!(checked >= 2);
}

#[test]
fn separated_poles_superpose() {
    let mask = ball(1, 129, 1.1);
    let h = mask.spec().spacing();
    let delta = [1e-2, 1e-3];
    let poles = vec![vec![c(-0.4, 0.0)], vec![c(0.4, 0.1)]];
    let weights = [0.5, 0.3];
    let run = |poles: &[Vec<Complex64>], weights: &[f64]| {
        let logd = delta
            .iter()
            .map(|&d| {
                let hp = pole_hessian(&mask, poles, weights, d);
                let mut f = GridFunction::zeros(*mask.spec());
                for (k, &i) in mask.interior().iter().enumerate() {
                    f.set(i, (1.0 + hp.get(k).a).ln());
                }
                f
            })
            .collect();
        let psi = BoundaryData::from_fn(&mask, |z| z[0].norm_sqr()).unwrap();
        let p_band: Vec<f64> = {
            let p = pole_ansatz(&mask, poles, weights, delta[0]);
            mask.boundary().iter().zip(psi.values()).map(|(&i, v)| v + p.get(i)).collect()
        };
        let spec = PoleSpec {
            poles: poles.to_vec(),
            weights: weights.to_vec(),
            deltas: delta.to_vec(),
            lambda: 0.0,
            log_density: LogDensity::PerDelta(logd),
            boundary: BoundaryData::new(&mask, p_band).unwrap(),
        };
        solve_log_pole(&mask, &spec, &SolveConfig::default(), &AsymptoticsOptions::default()).unwrap()
    };
    let both = run(&poles, &weights);
    let single = run(&poles[..1], &weights[..1]);
    let near: Vec<usize> = mask
        .interior()
        .iter()
        .copied()
        .filter(|&i| (mask.spec().point(i)[0] - poles[0][0]).norm() < 0.2)
        .collect();
    let diff = both.remainders[0].max_diff_on(&single.remainders[0], &near);
    assert!(diff <= 10.0 * h * h, "{diff}");
}

#[test]
fn pole_too_close_is_rejected() {
    let mask = ball(1, 33, 1.1);
    let mut spec = radial_spec(&mask, 0.5, &[1e-2, 1e-3]);
    spec.poles = vec![vec![c(0.85, 0.0)]];
    let err = solve_log_pole(&mask, &spec, &SolveConfig::default(), &AsymptoticsOptions::default()).unwrap_err();
    assert!(matches!(err, plurisolve_core::SingularError::PoleTooClose { .. }));
}
