//! Experiment runner: surface families, configuration, sweeps, reports.

pub mod config;
pub mod families;
pub mod runner;

pub use config::{ExperimentConfig, OutputFormat, OutputSpec, Sweep};
pub use families::{build_family, FamilyKind, Perturbation, SurfaceFamilySpec};
pub use runner::{evaluate, render, run_sweep, run_verify, to_csv, to_json, violations, ReportRow, COLUMNS};
