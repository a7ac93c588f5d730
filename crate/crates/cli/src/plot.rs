//! Deterministic CSV plot data: fixed column order, 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use plurisolve_core::pluripotential::{CapacityTrend, SublevelStats};
use plurisolve_core::singular::AsymptoticsReport;
use plurisolve_core::solver::HistoryRecord;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    SFamily,
    Sublevel,
    Annulus,
    Capacity,
}

impl FromStr for PlotKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "sfamily" => Ok(PlotKind::SFamily),
            "sublevel" => Ok(PlotKind::Sublevel),
            "annulus" => Ok(PlotKind::Annulus),
            "capacity" => Ok(PlotKind::Capacity),
            other => Err(CliError::config("plot kind", format!("unknown plot kind `{other}`"))),
        }
    }
}

impl PlotKind {
    pub fn header(self) -> &'static str {
        match self {
            PlotKind::SFamily => "s,t,sup_phi,inf_phi,residual,iters",
            PlotKind::Sublevel => "l,nodes,a,b,f,skipped",
            PlotKind::Annulus => "delta,annulus_index,inner_r,outer_r,sup_dev",
            PlotKind::Capacity => "s,capacity",
        }
    }
}

/// A report that can be rendered as plot data.
pub enum PlotData<'a> {
    SFamily(&'a [HistoryRecord]),
    Sublevel(&'a SublevelStats),
    Annulus(&'a AsymptoticsReport),
    Capacity(&'a CapacityTrend),
}

impl PlotData<'_> {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotData::SFamily(_) => PlotKind::SFamily,
            PlotData::Sublevel(_) => PlotKind::Sublevel,
            PlotData::Annulus(_) => PlotKind::Annulus,
            PlotData::Capacity(_) => PlotKind::Capacity,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders `data` as CSV text; an empty report gives the header line only.
pub fn render(data: &PlotData) -> String {
    let mut out = String::new();
    out.push_str(data.kind().header());
    out.push('\n');
    match data {
        PlotData::SFamily(history) => {
            for r in *history {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(r.s),
                    num(r.t),
                    num(r.sup_phi),
                    num(r.inf_phi),
                    num(r.residual),
                    r.iterations
                );
            }
        }
        PlotData::Sublevel(stats) => {
            for l in &stats.levels {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(l.l),
                    l.nodes.len(),
                    num(l.a),
                    num(l.b),
                    num(l.f),
                    u8::from(l.skipped.is_some())
                );
            }
        }
        PlotData::Annulus(rep) => {
            for (delta, k, inner, outer, sup) in rep.profile_rows() {
                let _ = writeln!(out, "{},{},{},{},{}", num(delta), k, num(inner), num(outer), num(sup));
            }
        }
        PlotData::Capacity(trend) => {
            for (s, cap) in &trend.entries {
                let _ = writeln!(out, "{},{}", num(*s), num(*cap));
            }
        }
    }
    out
}

/// Writes the CSV for `data` to `path`, checking it against the requested kind.
pub fn emit_plot_data(path: &Path, kind: &str, data: &PlotData) -> Result<(), CliError> {
    let kind: PlotKind = kind.parse()?;
    if kind != data.kind() {
        return Err(CliError::config("plot kind", format!("report is not of kind {kind:?}")));
    }
    std::fs::write(path, render(data))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(s: f64, t: f64) -> HistoryRecord {
        HistoryRecord {
            s,
            t,
            iterations: 3,
            residual: 1e-9,
            sup_phi: 0.25,
            inf_phi: -0.25,
            lambda_min: 0.1,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn empty_history_is_header_only() {
        assert_eq!(render(&PlotData::SFamily(&[])), "s,t,sup_phi,inf_phi,residual,iters\n");
    }

    #[test]
    fn sfamily_rows() {
        let h = [record(0.1, 0.0), record(0.1, 1.0), record(0.01, 1.0)];
        let csv = render(&PlotData::SFamily(&h));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "1.0000000000000001e-1,0.0000000000000000e0,2.5000000000000000e-1,-2.5000000000000000e-1,1.0000000000000001e-9,3");
        // 17 significant digits round-trip exactly.
        let back: f64 = lines[3].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.01);
    }

    #[test]
    fn unknown_kind_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_plot_data(&dir.path().join("x.csv"), "histogram", &PlotData::SFamily(&[])).unwrap_err();
        assert!(matches!(err, CliError::Config { .. }));
        assert!(emit_plot_data(&dir.path().join("x.csv"), "annulus", &PlotData::SFamily(&[])).is_err());
    }
}
