//! Sweep orchestration and report emission.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{Map, Number, Value};

use super::config::{ExperimentConfig, OutputFormat};
use super::families::build_family;
use crate::error::Result;
use crate::immersion::sample;
use crate::pinch::{PinchReport, ReportOptions};
use crate::radius::{min_enclosing_ball, DEFAULT_TOL};
use crate::spheremap::ProjectionMap;

/// Tolerance for the nonnegativity invariants of a report.
pub const NONNEG_TOL: f64 = 1e-8;
/// Relative tolerance for the Minkowski residual.
pub const MINKOWSKI_TOL: f64 = 1e-6;

/// Column order of the CSV header and of the JSON object keys.
pub const COLUMNS: [&str; 24] = [
    "family",
    "param",
    "delta",
    "n",
    "volume",
    "R",
    "H_inf",
    "p",
    "H_2p",
    "B_inf",
    "gap_inf",
    "gap_2p",
    "alpha",
    "minkowski_residual",
    "lemma21ii_slack",
    "phi_l2",
    "phi_inf",
    "psi_l2",
    "psi_inf",
    "phi_slack",
    "psi_slack",
    "hausdorff",
    "distortion",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub family: String,
    /// Value of the swept parameter; `None` for a single verification.
    pub param: Option<f64>,
    pub report: Option<PinchReport>,
    /// `ok`, `violation: ...` or `error: ...`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn opt(v: Option<f64>) -> Self {
        v.map_or(Self::Empty, Self::Float)
    }

    fn csv(&self) -> String {
        match self {
            Self::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Self::Float(_) | Self::Empty => String::new(),
            Self::Int(i) => i.to_string(),
            Self::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Self::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Self::Int(i) => Value::from(*i),
            Self::Text(s) => Value::from(s.as_str()),
            Self::Empty => Value::Null,
        }
    }
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = vec![Cell::Text(self.family.clone()), Cell::opt(self.param)];
        match &self.report {
            Some(r) => cells.extend([
                Cell::Float(r.delta),
                Cell::Int(r.n),
                Cell::Float(r.volume),
                Cell::Float(r.radius),
                Cell::Float(r.h_inf),
                Cell::Float(r.p),
                Cell::Float(r.h_2p),
                Cell::Float(r.b_inf),
                Cell::Float(r.gap_inf),
                Cell::opt(r.gap_2p),
                Cell::opt(r.alpha),
                Cell::Float(r.minkowski_residual),
                Cell::Float(r.lemma21ii_slack),
                Cell::Float(r.phi_l2),
                Cell::Float(r.phi_inf),
                Cell::Float(r.psi_l2),
                Cell::Float(r.psi_inf),
                Cell::opt(r.phi_slack),
                Cell::opt(r.psi_slack),
                Cell::opt(r.hausdorff),
                Cell::opt(r.distortion),
            ]),
            None => cells.extend(std::iter::repeat_n(Cell::Empty, COLUMNS.len() - 3)),
        }
        cells.push(Cell::Text(self.status.clone()));
        cells
    }

    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = COLUMNS.iter().zip(self.cells()).map(|(k, c)| (k.to_string(), c.json())).collect();
        Value::Object(map)
    }
}

/// Invariant violations of a report, empty when all hold.
pub fn violations(r: &PinchReport) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |name: &str, value: Option<f64>, floor: f64| {
        if let Some(v) = value {
            if !(v >= floor) {
                out.push(format!("{name}={v:e}"));
            }
        }
    };
    check("gap_inf", Some(r.gap_inf), -NONNEG_TOL);
    check("gap_2p", r.gap_2p, -NONNEG_TOL);
    check("lemma21ii_slack", Some(r.lemma21ii_slack), -NONNEG_TOL * r.volume);
    check("phi_slack", r.phi_slack, -NONNEG_TOL);
    check("psi_slack", r.psi_slack, -NONNEG_TOL);
    check("minkowski_residual", Some(-r.minkowski_residual.abs()), -MINKOWSKI_TOL * r.volume);
    out
}

/// Sample, bound, and report one configuration.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<PinchReport> {
    let (sf, imm) = build_family(&cfg.family)?;
    let s = sample(imm, &sf, cfg.resolution)?;
    let ball = min_enclosing_ball(&sf, &s.points(), DEFAULT_TOL)?;
    let opts = ReportOptions {
        p: cfg.p,
        sphere_resolution: (cfg.sphere_resolution > 0).then_some(cfg.sphere_resolution),
        normalize: cfg.normalize,
    };
    let mut report = PinchReport::compute(&s, &ball, &opts)?;
    report.distortion = Some(ProjectionMap::new(sf, ball).distortion(&s)?);
    Ok(report)
}

fn row(cfg: &ExperimentConfig, param: Option<f64>) -> ReportRow {
    let family = cfg.family.kind.name().to_string();
    match evaluate(cfg) {
        Ok(report) => {
            let bad = violations(&report);
            let status = if bad.is_empty() {
                "ok".to_string()
            } else {
                format!("violation: {}", bad.join("; "))
            };
            ReportRow {
                family,
                param,
                report: Some(report),
                status,
            }
        }
        Err(e) => ReportRow {
            family,
            param,
            report: None,
            status: format!("error: {e}"),
        },
    }
}

/// One row for the configured family.
pub fn run_verify(cfg: &ExperimentConfig) -> Vec<ReportRow> {
    vec![row(cfg, None)]
}

/// One row per sweep value, sorted by parameter. Without a sweep this is
/// [`run_verify`].
pub fn run_sweep(cfg: &ExperimentConfig) -> Vec<ReportRow> {
    let Some(sweep) = &cfg.sweep else {
        return run_verify(cfg);
    };
    let mut rows: Vec<ReportRow> = sweep
        .values
        .par_iter()
        .map(|&v| match cfg.with_param(&sweep.param, v) {
            Ok(c) => row(&c, Some(v)),
            Err(e) => ReportRow {
                family: cfg.family.kind.name().to_string(),
                param: Some(v),
                report: None,
                status: format!("error: {e}"),
            },
        })
        .collect();
    rows.sort_by(|a, b| {
        a.family
            .cmp(&b.family)
            .then(a.param.unwrap_or(f64::NEG_INFINITY).total_cmp(&b.param.unwrap_or(f64::NEG_INFINITY)))
    });
    rows
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.cells().iter().map(Cell::csv).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn to_json(rows: &[ReportRow]) -> String {
    let values: Vec<Value> = rows.iter().map(ReportRow::to_json).collect();
    let mut s = serde_json::to_string_pretty(&values).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn render(rows: &[ReportRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows),
    }
}
