//! Run configuration: a TOML file with one table per concern.
//!
//! Every table and key is optional except where a command needs it; unknown
//! keys are rejected. Expressions use the grammar of
//! `plurisolve_core::expr` with coordinates `z1`, `z2`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use plurisolve_core::expr::Expr;
use plurisolve_core::geometry::{build_reference_forms, DensitySpec, ReferenceForms};
use plurisolve_core::grid::{build_domain, extend_boundary_data, BoundaryData, DomainMask, GridFunction, GridSpec};
use plurisolve_core::singular::{AsymptoticsOptions, LogDensity, PoleSpec};
use plurisolve_core::SolveConfig;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, must name the subcommand being run.
    pub command: Option<String>,
    /// Seed of the single generator behind every random choice.
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub domain: Option<DomainConfig>,
    pub forms: FormsConfig,
    pub boundary: BoundaryConfig,
    pub density: DensityConfig,
    pub solver: SolveConfig,
    pub capacity: Option<CapacityConfig>,
    pub compare: Option<CompareConfig>,
    pub stats: StatsConfig,
    pub degiorgi: DeGiorgiConfig,
    pub poles: Option<PolesConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub n: usize,
    /// Nodes per real axis (odd).
    pub nodes: usize,
    pub half_width: f64,
    /// Defining function; the Fubini-Study potential when omitted.
    #[serde(default)]
    pub rho: Option<String>,
    /// Sublevel threshold a.
    pub a: f64,
    /// Collar width of the boundary-data extension.
    #[serde(default = "default_collar")]
    pub collar: f64,
}

fn default_collar() -> f64 {
    0.3
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormsConfig {
    pub scale: f64,
    /// Decreasing s schedule; the first entry is the s of single solves.
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// Allowed relative variation of sup |phi_s| across the schedule.
    pub uniformity: f64,
}

impl Default for FormsConfig {
    fn default() -> Self {
        FormsConfig { scale: 1.0, s: vec![0.1], t: vec![0.0, 0.25, 0.5, 0.75, 1.0], uniformity: 0.1 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub psi: String,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig { psi: "0".into() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    pub omega_y: String,
    pub w_e: String,
    pub w_f: String,
    pub f: String,
    pub volume: String,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            omega_y: "1".into(),
            w_e: "0".into(),
            w_f: "0".into(),
            f: "0".into(),
            volume: "1".into(),
            lambda: 0.0,
            p: 2.0,
            q: f64::MAX,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaChoice {
    Zero,
    FubiniStudy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Envelope,
    Bruteforce,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    /// K = deep-interior nodes where this expression is below `k_below`.
    pub k: String,
    pub k_below: f64,
    #[serde(default = "default_theta")]
    pub theta: ThetaChoice,
    #[serde(default = "one")]
    pub theta_scale: f64,
    #[serde(default = "default_method")]
    pub method: MethodChoice,
    #[serde(default = "default_starts")]
    pub starts: usize,
    /// s values of the capacity trend towards omega (theta_s = omega + s theta).
    #[serde(default)]
    pub trend_s: Vec<f64>,
}

fn default_theta() -> ThetaChoice {
    ThetaChoice::Zero
}
fn default_method() -> MethodChoice {
    MethodChoice::Envelope
}
fn default_starts() -> usize {
    64
}
fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub u: String,
    pub v: String,
    #[serde(default = "default_theta")]
    pub theta: ThetaChoice,
    #[serde(default = "one")]
    pub theta_scale: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    /// Explicit levels; when empty, `count` levels `step, 2 step, ...`.
    pub levels: Vec<f64>,
    pub step: f64,
    pub count: usize,
    /// Kolodziej shift t in (0, 1).
    pub t: f64,
    /// Volume-capacity constant; unchecked when omitted.
    pub c_vol: Option<f64>,
    pub alpha: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig { levels: Vec::new(), step: 0.05, count: 80, t: 0.5, c_vol: None, alpha: 1.0 }
    }
}

impl StatsConfig {
    pub fn level_list(&self) -> Result<Vec<f64>, CliError> {
        if !self.levels.is_empty() {
            return Ok(self.levels.clone());
        }
        if !(self.step > 0.0) || self.count == 0 {
            return Err(CliError::config("stats.step", "need step > 0 and count > 0"));
        }
        Ok((1..=self.count).map(|i| i as f64 * self.step).collect())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeGiorgiConfig {
    /// CSV file with columns l, F; the built-in ramp F(l) = max(0, 1 - l) when omitted.
    pub samples: Option<PathBuf>,
    pub a: f64,
    pub alpha: f64,
}

impl Default for DeGiorgiConfig {
    fn default() -> Self {
        DeGiorgiConfig { samples: None, a: 1.0, alpha: 1.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolesConfig {
    /// Real coordinates (x1, y1, ..., xn, yn) of each pole.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub lambda: f64,
    /// Log-density of the remainder equation; `{delta}` is replaced by each delta.
    #[serde(default = "zero_expr")]
    pub log_density: String,
    /// Pole-solution field files, one per delta, for `asymptotics`.
    #[serde(default)]
    pub fields: Vec<PathBuf>,
    #[serde(default = "default_osc")]
    pub oscillation_bound: f64,
    #[serde(default = "default_growth")]
    pub growth_constant: f64,
}

fn default_deltas() -> Vec<f64> {
    PoleSpec::DEFAULT_DELTAS.to_vec()
}
fn zero_expr() -> String {
    "0".into()
}
fn default_osc() -> f64 {
    AsymptoticsOptions::default().oscillation_bound
}
fn default_growth() -> f64 {
    AsymptoticsOptions::default().growth_constant
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e: toml::de::Error| {
        let location = e.span().map(|s| {
            let line = text[..s.start].matches('\n').count() + 1;
            let col = s.start - text[..s.start].rfind('\n').map_or(0, |p| p + 1) + 1;
            (line, col)
        });
        CliError::Config { field: "config".into(), message: e.message().to_string(), location }
    })
}

fn expr(field: &str, src: &str, n: usize) -> Result<Expr, CliError> {
    Expr::parse_for_dim(src, n).map_err(|e| CliError::config(field, e.to_string()))
}

fn field_of(field: &str, src: &str, mask: &DomainMask) -> Result<GridFunction, CliError> {
    expr(field, src, mask.spec().n)?.to_field(mask).map_err(|e| CliError::config(field, e.to_string()))
}

impl RunConfig {
    pub fn check_command(&self, invoked: &str) -> Result<(), CliError> {
        match &self.command {
            Some(c) if c != invoked => {
                Err(CliError::config("command", format!("config is for `{c}`, invoked `{invoked}`")))
            }
            _ => Ok(()),
        }
    }

    pub fn validate_solver(&self) -> Result<(), CliError> {
        self.solver.validate().map_err(|e| CliError::config("solver", e.to_string()))
    }

    pub fn mask(&self) -> Result<DomainMask, CliError> {
        let d = self.domain.as_ref().ok_or_else(|| CliError::config("domain", "missing [domain] table"))?;
        let spec = GridSpec::new(d.n, d.nodes, d.half_width).map_err(|e| CliError::config("domain", e.to_string()))?;
        let built = match &d.rho {
            Some(src) => {
                let e = expr("domain.rho", src, d.n)?;
                build_domain(spec, |z| e.eval(z), d.a)
            }
            None => build_domain(spec, plurisolve_core::grid::fubini_study_rho, d.a),
        };
        built.map_err(|e| CliError::config("domain", e.to_string()))
    }

    pub fn boundary(&self, mask: &DomainMask) -> Result<BoundaryData, CliError> {
        let e = expr("boundary.psi", &self.boundary.psi, mask.spec().n)?;
        BoundaryData::from_fn(mask, |z| e.eval(z)).map_err(|e| CliError::config("boundary.psi", e.to_string()))
    }

    /// Reference forms at the first s of the schedule; nonzero boundary data
    /// enter through the extension psi1.
    pub fn forms(&self, mask: &DomainMask) -> Result<ReferenceForms, CliError> {
        let s = self.first_s()?;
        let psi = self.boundary(mask)?;
        let psi1 = if psi.sup_abs() == 0.0 {
            GridFunction::zeros(*mask.spec())
        } else {
            let collar = self.domain.as_ref().map_or(default_collar(), |d| d.collar);
            extend_boundary_data(&psi, mask, collar).map_err(|e| CliError::config("domain.collar", e.to_string()))?
        };
        build_reference_forms(mask, self.forms.scale, &psi1, s).map_err(|e| CliError::config("forms", e.to_string()))
    }

    pub fn first_s(&self) -> Result<f64, CliError> {
        self.forms.s.first().copied().ok_or_else(|| CliError::config("forms.s", "empty s schedule"))
    }

    pub fn density(&self, mask: &DomainMask) -> Result<DensitySpec, CliError> {
        let d = &self.density;
        let spec = DensitySpec {
            omega_y: field_of("density.omega_y", &d.omega_y, mask)?,
            w_e: field_of("density.w_e", &d.w_e, mask)?,
            w_f: field_of("density.w_f", &d.w_f, mask)?,
            f: field_of("density.f", &d.f, mask)?,
            volume: field_of("density.volume", &d.volume, mask)?,
            lambda: d.lambda,
            p: d.p,
            q: d.q,
        };
        spec.validate(mask).map_err(|e| CliError::config("density", e.to_string()))?;
        Ok(spec)
    }

    pub fn poles_config(&self) -> Result<&PolesConfig, CliError> {
        self.poles.as_ref().ok_or_else(|| CliError::config("poles", "missing [poles] table"))
    }

    pub fn pole_spec(&self, mask: &DomainMask) -> Result<PoleSpec, CliError> {
        let p = self.poles_config()?;
        let n = mask.spec().n;
        let mut poles = Vec::with_capacity(p.points.len());
        for (j, pt) in p.points.iter().enumerate() {
            if pt.len() != 2 * n {
                return Err(CliError::config(
                    &format!("poles.points[{j}]"),
                    format!("expected {} real coordinates, got {}", 2 * n, pt.len()),
                ));
            }
            poles.push((0..n).map(|k| Complex64::new(pt[2 * k], pt[2 * k + 1])).collect());
        }
        let log_density = if p.log_density.contains("{delta}") {
            let fields = p
                .deltas
                .iter()
                .map(|d| field_of("poles.log_density", &p.log_density.replace("{delta}", &format!("({d:e})")), mask))
                .collect::<Result<Vec<_>, _>>()?;
            LogDensity::PerDelta(fields)
        } else {
            LogDensity::Fixed(field_of("poles.log_density", &p.log_density, mask)?)
        };
        let spec = PoleSpec {
            poles,
            weights: p.weights.clone(),
            deltas: p.deltas.clone(),
            lambda: p.lambda,
            log_density,
            boundary: self.boundary(mask)?,
        };
        spec.validate(mask).map_err(|e| CliError::config("poles", e.to_string()))?;
        Ok(spec)
    }

    pub fn asymptotics_options(&self) -> Result<AsymptoticsOptions, CliError> {
        let p = self.poles_config()?;
        Ok(AsymptoticsOptions { oscillation_bound: p.oscillation_bound, growth_constant: p.growth_constant })
    }

    /// Expression field restricted to the deep interior: nodes below `level`.
    pub fn node_set(&self, field: &str, src: &str, level: f64, mask: &DomainMask) -> Result<Vec<usize>, CliError> {
        let e = expr(field, src, mask.spec().n)?;
        Ok(mask
            .interior()
            .iter()
            .copied()
            .filter(|&i| mask.is_deep_interior(i) && e.eval(&mask.spec().point(i)) < level)
            .collect())
    }

    pub fn expr_field(&self, field: &str, src: &str, mask: &DomainMask) -> Result<GridFunction, CliError> {
        field_of(field, src, mask)
    }
}
