//! `extrinsic-lab` command-line interface.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;

use extrinsic_lab::lab::{render, run_sweep, run_verify, ExperimentConfig, OutputFormat, ReportRow, Sweep};
use extrinsic_lab::radius::{min_enclosing_ball, DEFAULT_TOL};
use extrinsic_lab::{LabError, SpaceForm};

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
/// Smallest manifold dimension the space-form kernel accepts.
const MIN_DIM: usize = 3;

#[derive(Parser)]
#[command(name = "extrinsic-lab", version, about = "Extrinsic radius and mean curvature diagnostics for hypersurfaces of space forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report on the configured surface.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Report on one surface per parameter value.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Minimal enclosing ball of a point file (one point per line, ambient
    /// coordinates separated by whitespace, `#` starts a comment).
    Radius {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { config, out, format } => {
            load(&config).and_then(|cfg| emit(&cfg, &run_verify(&cfg), out, format))
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
            format,
        } => load(&config).and_then(|mut cfg| {
            cfg.sweep = Some(Sweep { param, values });
            cfg.validate().map_err(config_error)?;
            emit(&cfg, &run_sweep(&cfg), out, format)
        }),
        Command::Radius { points, delta, tol } => radius(&points, delta, tol),
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type CliResult = Result<ExitCode, (u8, String)>;

fn config_error(e: LabError) -> (u8, String) {
    (EXIT_CONFIG, e.to_string())
}

fn load(path: &Path) -> Result<ExperimentConfig, (u8, String)> {
    ExperimentConfig::load(path).map_err(config_error)
}

fn emit(cfg: &ExperimentConfig, rows: &[ReportRow], out: Option<PathBuf>, format: Option<OutputFormat>) -> CliResult {
    let format = format.unwrap_or(cfg.output.format);
    let text = render(rows, format);
    match out.or_else(|| cfg.output.path.clone()) {
        Some(path) => std::fs::write(&path, text).map_err(|e| (EXIT_CONFIG, format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    for r in rows.iter().filter(|r| !r.is_ok()) {
        eprintln!("{} {:?}: {}", r.family, r.param, r.status);
    }
    Ok(if rows.iter().all(ReportRow::is_ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    })
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let coords = body
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if let Some(first) = points.first().map(Vec::len) {
            if coords.len() != first {
                return Err(format!("line {}: expected {first} coordinates, got {}", lineno + 1, coords.len()));
            }
        }
        points.push(coords);
    }
    if points.is_empty() {
        return Err("no points".into());
    }
    Ok(points)
}

fn radius(path: &Path, delta: f64, tol: f64) -> CliResult {
    let raw = read_points(path).map_err(|m| (EXIT_CONFIG, m))?;
    let len = raw[0].len();
    let curved = delta != 0.0;
    let dim = if curved { len.saturating_sub(1) } else { len };
    if dim == 0 {
        return Err((EXIT_CONFIG, format!("{len} coordinates per point is too few")));
    }
    // low-dimensional inputs are embedded in a totally geodesic copy; the
    // extra coordinates go in front of the hyperboloid's time coordinate
    let pad = MIN_DIM.saturating_sub(dim);
    let at = if curved && delta < 0.0 { len - 1 } else { len };
    let sf = SpaceForm::new(delta, dim + pad).map_err(config_error)?;
    let mut pts = Vec::with_capacity(raw.len());
    for (i, mut c) in raw.into_iter().enumerate() {
        c.splice(at..at, std::iter::repeat_n(0.0, pad));
        let p = DVector::from_vec(c);
        sf.check_point(&p).map_err(|e| (EXIT_CONFIG, format!("point {}: {e}", i + 1)))?;
        pts.push(p);
    }
    let strip = |c: &DVector<f64>| -> Vec<f64> {
        let mut v: Vec<f64> = c.iter().cloned().collect();
        v.drain(at..at + pad);
        v
    };
    let ball = match min_enclosing_ball(&sf, &pts, tol) {
        Ok(b) => b,
        Err(LabError::NonConvergence { best }) => {
            eprintln!("warning: certificate residual {:e} above tolerance", best.residual);
            print_ball(&strip(&best.center), best.radius);
            return Ok(ExitCode::from(EXIT_VIOLATION));
        }
        Err(e @ (LabError::Antipodal | LabError::Hemisphere(_) | LabError::TooFewPoints { .. })) => {
            return Err(config_error(e));
        }
        Err(e) => return Err((EXIT_VIOLATION, e.to_string())),
    };
    print_ball(&strip(&ball.center), ball.radius);
    Ok(ExitCode::SUCCESS)
}

fn print_ball(center: &[f64], radius: f64) {
    let coords: Vec<String> = center.iter().map(|x| format!("{x:.16e}")).collect();
    println!("center {}", coords.join(" "));
    println!("R {radius:.16e}");
}
