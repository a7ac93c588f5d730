//! One function per subcommand. Each returns a JSON report and a verdict;
//! artifacts go to the output directory when one is configured.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use num_rational::Ratio;
use plurisolve_core::calculus::{fubini_study_form, HermitianField};
use plurisolve_core::field_io::{load_field, save_field};
use plurisolve_core::geometry::{blowup_positivity, klt_discrepancy, regularized_density};
use plurisolve_core::grid::{DomainMask, GridFunction};
use plurisolve_core::pluripotential::{
    c0_certificate, capacity, capacity_convergence, check_comparison, check_kolodziej_inequalities, degiorgi_bound,
    extremal_function, sublevel_stats, CapacityMethod, CapacityQuery, KolodziejReport, SublevelStats,
};
use plurisolve_core::singular::{solve_log_pole, verify_asymptotics};
use plurisolve_core::solver::{continuity_path, newton_solve, s_family_limit, Rhs, SFamilyOptions, SFamilyResult};
use plurisolve_core::BoundaryData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CapacityConfig, MethodChoice, RunConfig, ThetaChoice};
use crate::error::CliError;
use crate::plot::{emit_plot_data, PlotData};

pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

/// Artifact sink; a no-op without an output directory.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Output { dir })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn json(&self, name: &str, value: &Value) -> Result<(), CliError> {
        if let Some(p) = self.path(name) {
            let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
            text.push('\n');
            std::fs::write(p, text)?;
        }
        Ok(())
    }

    pub fn jsonl<T: Serialize>(&self, name: &str, records: &[T]) -> Result<(), CliError> {
        if let Some(p) = self.path(name) {
            let mut text = String::new();
            for r in records {
                text.push_str(&serde_json::to_string(r).map_err(|e| CliError::Runtime(e.to_string()))?);
                text.push('\n');
            }
            std::fs::write(p, text)?;
        }
        Ok(())
    }

    pub fn field(&self, name: &str, f: &GridFunction, mask: &DomainMask) -> Result<(), CliError> {
        if let Some(p) = self.path(name) {
            save_field(&p, f, Some(mask))?;
        }
        Ok(())
    }

    pub fn csv(&self, name: &str, kind: &str, data: &PlotData) -> Result<(), CliError> {
        if let Some(p) = self.path(name) {
            emit_plot_data(&p, kind, data)?;
        }
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn theta_field(choice: ThetaChoice, scale: f64, mask: &DomainMask) -> HermitianField {
    match choice {
        ThetaChoice::Zero => HermitianField::zeros(mask),
        ThetaChoice::FubiniStudy => HermitianField::from_fn(mask, fubini_study_form).scaled(scale),
    }
}

pub fn solve(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let forms = cfg.forms(&mask)?;
    let spec = cfg.density(&mask)?;
    let target = regularized_density(&spec, forms.s, &mask)?;
    let rhs = Rhs::from_density(&mask, &target)?;
    let init = GridFunction::zeros(*mask.spec());
    let (phi, report) = newton_solve(&mask, &forms, &rhs, &BoundaryData::zeros(&mask), &init, &cfg.solver)?;
    out.field("phi.field", &phi, &mask)?;
    let value = json!({
        "command": "solve",
        "s": forms.s,
        "interior_nodes": mask.interior_count(),
        "sup_phi": phi.sup_abs(&mask),
        "inf_phi": phi.min_interior(&mask),
        "report": to_value(&report),
    });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: report.converged, report: value })
}

pub fn continuation(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let forms = cfg.forms(&mask)?;
    let spec = cfg.density(&mask)?;
    let target = regularized_density(&spec, forms.s, &mask)?;
    let st = continuity_path(&mask, &forms, &target, &cfg.forms.t, &cfg.solver)?;
    out.field("phi.field", &st.phi, &mask)?;
    out.jsonl("history.jsonl", &st.history)?;
    out.csv("sfamily.csv", "sfamily", &PlotData::SFamily(&st.history))?;
    let value = json!({
        "command": "continuation",
        "s": st.s,
        "t": st.t,
        "steps": st.history.len(),
        "sup_phi": st.phi.sup_abs(&mask),
        "inf_phi": st.phi.min_interior(&mask),
    });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: true, report: value })
}

fn run_sfamily(cfg: &RunConfig, mask: &DomainMask) -> Result<(SFamilyResult, f64), CliError> {
    let forms = cfg.forms(mask)?;
    let spec = cfg.density(mask)?;
    let opts = SFamilyOptions { uniformity: cfg.forms.uniformity, ..SFamilyOptions::default() };
    let res = s_family_limit(mask, &forms, &spec, &cfg.forms.s, &cfg.forms.t, &cfg.solver, &opts)?;
    Ok((res, *cfg.forms.s.last().unwrap()))
}

pub fn sfamily(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let (res, _) = run_sfamily(cfg, &mask)?;
    out.field("phi.field", &res.phi, &mask)?;
    out.jsonl("history.jsonl", &res.state.history)?;
    out.jsonl("per_s.jsonl", &res.per_s)?;
    out.csv("sfamily.csv", "sfamily", &PlotData::SFamily(&res.state.history))?;
    let value = json!({
        "command": "sfamily",
        "per_s": to_value(&res.per_s),
        "variation": res.variation,
        "uniform": res.uniform,
    });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: res.uniform, report: value })
}

fn capacity_config(cfg: &RunConfig) -> Result<&CapacityConfig, CliError> {
    cfg.capacity.as_ref().ok_or_else(|| CliError::config("capacity", "missing [capacity] table"))
}

fn capacity_query(cfg: &RunConfig, mask: &DomainMask) -> Result<CapacityQuery, CliError> {
    let c = capacity_config(cfg)?;
    let k = cfg.node_set("capacity.k", &c.k, c.k_below, mask)?;
    let theta = theta_field(c.theta, c.theta_scale, mask);
    let method = match c.method {
        MethodChoice::Envelope => CapacityMethod::Envelope,
        MethodChoice::Bruteforce => CapacityMethod::Bruteforce { starts: c.starts, seed: cfg.seed },
    };
    Ok(CapacityQuery { k, theta, method })
}

pub fn capacity_cmd(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let c = capacity_config(cfg)?;
    let q = capacity_query(cfg, &mask)?;
    let cap = capacity(&q, &mask)?;
    let mut value = json!({
        "command": "capacity",
        "k_nodes": q.k.len(),
        "method": to_value(&q.method),
        "seed": cfg.seed,
        "capacity": cap,
    });
    let mut passed = true;
    if !c.trend_s.is_empty() {
        let forms = cfg.forms(&mask)?;
        let fs = HermitianField::from_fn(&mask, fubini_study_form).scaled(c.theta_scale);
        let trend = capacity_convergence(&q.k, &forms.omega, &fs, &c.trend_s, &mask)?;
        out.csv("capacity.csv", "capacity", &PlotData::Capacity(&trend))?;
        passed = trend.monotone;
        value["trend"] = to_value(&trend);
    }
    out.json("report.json", &value)?;
    Ok(Outcome { passed, report: value })
}

pub fn extremal(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let q = capacity_query(cfg, &mask)?;
    let q = CapacityQuery { method: CapacityMethod::Envelope, ..q };
    let res = extremal_function(&q, &mask)?;
    let h = mask.spec().spacing();
    let defect_bound = 20.0 * h * res.capacity;
    out.field("u_star.field", &res.u_star, &mask)?;
    let value = json!({
        "command": "extremal",
        "k_nodes": q.k.len(),
        "capacity": res.capacity,
        "support_defect": res.support_defect,
        "support_defect_bound": defect_bound,
        "sweeps": res.sweeps,
    });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: res.support_defect <= defect_bound, report: value })
}

pub fn compare(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let c = cfg.compare.as_ref().ok_or_else(|| CliError::config("compare", "missing [compare] table"))?;
    let u = cfg.expr_field("compare.u", &c.u, &mask)?;
    let v = cfg.expr_field("compare.v", &c.v, &mask)?;
    let theta = theta_field(c.theta, c.theta_scale, &mask);
    let rep = check_comparison(&u, &v, &theta, &mask)?;
    let value = json!({ "command": "compare", "report": to_value(&rep) });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: rep.pass, report: value })
}

/// The solution to analyse: a field file when given, else the s-family solve.
fn stats_input(cfg: &RunConfig, mask: &DomainMask, field: Option<&Path>) -> Result<(GridFunction, f64), CliError> {
    match field {
        Some(p) => {
            let f = load_field(p)?;
            f.field.check_layout(mask).map_err(|e| CliError::config("field", e.to_string()))?;
            Ok((f.field, *cfg.forms.s.last().ok_or_else(|| CliError::config("forms.s", "empty s schedule"))?))
        }
        None => {
            let (res, s) = run_sfamily(cfg, mask)?;
            Ok((res.phi, s))
        }
    }
}

fn stats_and_kolodziej(
    cfg: &RunConfig,
    mask: &DomainMask,
    phi: &GridFunction,
    s: f64,
) -> Result<(SublevelStats, KolodziejReport), CliError> {
    let forms = cfg.forms(mask)?.with_s(s)?;
    let stats = sublevel_stats(phi, &forms.theta_s(), &cfg.stats.level_list()?, mask)?;
    let kol = check_kolodziej_inequalities(&stats, cfg.stats.t, cfg.stats.c_vol.unwrap_or(f64::INFINITY))?;
    Ok((stats, kol))
}

pub fn stats(cfg: &RunConfig, out: &Output, field: Option<&Path>) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let (phi, s) = stats_input(cfg, &mask, field)?;
    let (stats, kol) = stats_and_kolodziej(cfg, &mask, &phi, s)?;
    out.csv("sublevel.csv", "sublevel", &PlotData::Sublevel(&stats))?;
    let passed = kol.all_pass && (cfg.stats.c_vol.is_none() || kol.volume_bound_holds);
    let value = json!({ "command": "stats", "s": s, "levels": to_value(&stats.levels), "kolodziej": to_value(&kol) });
    out.json("report.json", &value)?;
    Ok(Outcome { passed, report: value })
}

pub fn c0cert(cfg: &RunConfig, out: &Output, field: Option<&Path>) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let (phi, s) = stats_input(cfg, &mask, field)?;
    let (stats, kol) = stats_and_kolodziej(cfg, &mask, &phi, s)?;
    let a = kol.degiorgi_constant(mask.spec().n);
    let cert = c0_certificate(&stats, &phi, &mask, a, cfg.stats.alpha)?;
    out.csv("sublevel.csv", "sublevel", &PlotData::Sublevel(&stats))?;
    let value = json!({
        "command": "c0cert",
        "s": s,
        "degiorgi_constant": a,
        "kolodziej_all_pass": kol.all_pass,
        "certificate": to_value(&cert),
    });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: cert.bound_holds && kol.all_pass, report: value })
}

/// Reads (l, F) pairs from a two-column CSV; a header line is skipped.
pub fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("degiorgi.samples", format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cols.as_slice() {
            [l, f] => l.parse::<f64>().ok().zip(f.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(p) => out.push(p),
            None if i == 0 => continue,
            None => {
                return Err(CliError::config("degiorgi.samples", format!("line {}: expected `l,F`", i + 1)));
            }
        }
    }
    Ok(out)
}

/// F(l) = max(0, 1 - l) sampled at l = 0, 0.05, ..., 3.
pub fn ramp_fixture() -> Vec<(f64, f64)> {
    (0..=60).map(|i| i as f64 / 20.0).map(|l| (l, (1.0 - l).max(0.0))).collect()
}

pub fn degiorgi(samples: &[(f64, f64)], a: f64, alpha: f64, out: &Output) -> Result<Outcome, CliError> {
    let cert = degiorgi_bound(samples, a, alpha)?;
    let value = json!({ "command": "degiorgi", "samples": samples.len(), "certificate": to_value(&cert) });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: cert.certified(), report: value })
}

pub fn poles(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let spec = cfg.pole_spec(&mask)?;
    let opts = cfg.asymptotics_options()?;
    let sol = solve_log_pole(&mask, &spec, &cfg.solver, &opts)?;
    for (k, (phi, u)) in sol.phis.iter().zip(&sol.remainders).enumerate() {
        out.field(&format!("phi_{k}.field"), phi, &mask)?;
        out.field(&format!("remainder_{k}.field"), u, &mask)?;
    }
    let remainder_sups: Vec<f64> = sol.remainders.iter().map(|u| u.sup_abs(&mask)).collect();
    let mut value = json!({
        "command": "poles",
        "deltas": spec.deltas,
        "admissible_p": spec.admissible_p(),
        "reports": to_value(&sol.reports),
        "remainder_sup": remainder_sups,
    });
    let mut passed = sol.reports.iter().all(|r| r.converged);
    if let Some(rep) = &sol.asymptotics {
        out.csv("annulus.csv", "annulus", &PlotData::Annulus(rep))?;
        passed &= rep.bounded;
        value["asymptotics"] = to_value(rep);
    }
    out.json("report.json", &value)?;
    Ok(Outcome { passed, report: value })
}

pub fn asymptotics(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let mask = cfg.mask()?;
    let spec = cfg.pole_spec(&mask)?;
    let p = cfg.poles_config()?;
    if p.fields.len() != spec.deltas.len() {
        return Err(CliError::config(
            "poles.fields",
            format!("need one field file per delta ({}), got {}", spec.deltas.len(), p.fields.len()),
        ));
    }
    let phis = p
        .fields
        .iter()
        .map(|f| {
            let file = load_field(f)?;
            file.field.check_layout(&mask)?;
            Ok(file.field)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let rep = verify_asymptotics(&mask, &phis, &spec, &cfg.asymptotics_options()?)?;
    out.csv("annulus.csv", "annulus", &PlotData::Annulus(&rep))?;
    let value = json!({ "command": "asymptotics", "asymptotics": to_value(&rep) });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: rep.bounded, report: value })
}

fn ratio_json(r: Ratio<i64>) -> Value {
    if *r.denom() == 1 {
        json!(r.numer())
    } else {
        json!(r.to_string())
    }
}

pub fn klt(n: i64, m: i64, out: &Output) -> Result<Outcome, CliError> {
    let d = klt_discrepancy(n, m).map_err(|e| CliError::config("klt", e.to_string()))?;
    let value = json!({
        "n": n,
        "m": m,
        "a": ratio_json(d.a),
        "klt": d.is_klt,
        "a_list": d.a_list.iter().map(|r| ratio_json(*r)).collect::<Vec<_>>(),
        "b_list": d.b_list.iter().map(|r| ratio_json(*r)).collect::<Vec<_>>(),
    });
    out.json("report.json", &value)?;
    Ok(Outcome { passed: true, report: value })
}

pub fn blowup_check(samples: usize, seed: u64, out: &Output) -> Result<Outcome, CliError> {
    if samples == 0 {
        return Err(CliError::config("samples", "need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_lambda = f64::INFINITY;
    let mut worst_schur: f64 = 0.0;
    let mut failures = 0usize;
    for i in 0..samples {
        let n = 2 + i % 3;
        let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let z = c();
        let u: Vec<Complex64> = (0..n - 1).map(|_| c()).collect();
        let chk = blowup_positivity(z, &u);
        min_lambda = min_lambda.min(chk.lambda_min);
        if !chk.certified {
            failures += 1;
        }
        if n == 2 && z.norm_sqr() > 0.0 {
            let expect = 0.5 * z.norm_sqr();
            worst_schur = worst_schur.max((chk.det - expect).abs() / expect);
        }
    }
    let passed = failures == 0 && min_lambda >= -1e-12 && worst_schur <= 1e-12;
    let value = json!({
        "command": "blowup-check",
        "samples": samples,
        "seed": seed,
        "min_lambda": min_lambda,
        "max_schur_relative_error": worst_schur,
        "uncertified": failures,
    });
    out.json("report.json", &value)?;
    Ok(Outcome { passed, report: value })
}
