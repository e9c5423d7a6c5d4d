//! Experiment configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::families::{Perturbation, SurfaceFamilySpec};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(LabError::Config(format!("unknown output format {other:?} (csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    /// Destination file; standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// A named parameter and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: SurfaceFamilySpec,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Gauss-Legendre nodes per polar angle.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Exponent for `||H||_{2p}`.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub normalize: bool,
    /// Grid resolution on the geodesic sphere for the Hausdorff estimate;
    /// 0 skips it.
    #[serde(default = "default_sphere_resolution")]
    pub sphere_resolution: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_resolution() -> usize {
    64
}

fn default_p() -> f64 {
    1.0
}

fn default_sphere_resolution() -> usize {
    32
}

pub const MIN_RESOLUTION: usize = 16;

impl ExperimentConfig {
    pub fn new(family: SurfaceFamilySpec) -> Self {
        Self {
            family,
            sweep: None,
            resolution: default_resolution(),
            p: default_p(),
            normalize: false,
            sphere_resolution: default_sphere_resolution(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the runner invariants and the base family. Swept values are
    /// checked per row.
    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(LabError::Config(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(LabError::Config(format!("p must be at least 1, got {}", self.p)));
        }
        if self.sphere_resolution != 0 && self.sphere_resolution < 4 {
            return Err(LabError::Config(format!(
                "sphere_resolution must be 0 or at least 4, got {}",
                self.sphere_resolution
            )));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(LabError::Config("sweep needs at least one value".into()));
            }
            if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
                return Err(LabError::Config(format!("sweep value {v} is not finite")));
            }
            // catches unknown names and malformed indices up front
            self.with_param(&sweep.param, sweep.values[0])?;
        }
        self.family.validate().map_err(|e| LabError::Config(e.to_string()))
    }

    /// Copy with one parameter replaced. Names: `amplitude`, `base_radius`,
    /// `offset`, `delta`, `width` (bump perturbation), `axes.<i>`, `p`.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        let fam = &mut cfg.family;
        match name {
            "amplitude" => fam.amplitude = value,
            "base_radius" => fam.base_radius = value,
            "offset" => fam.offset = value,
            "delta" => fam.delta = value,
            "p" => cfg.p = value,
            "width" => match &mut fam.perturbation {
                Perturbation::Bump { width } => *width = value,
                _ => return Err(LabError::Config("width applies to bump perturbations only".into())),
            },
            other => {
                let Some(index) = other.strip_prefix("axes.") else {
                    return Err(LabError::Config(format!("unknown sweep parameter {other:?}")));
                };
                let i: usize = index
                    .parse()
                    .map_err(|_| LabError::Config(format!("bad axis index in {other:?}")))?;
                let axes = fam
                    .axes
                    .as_mut()
                    .ok_or_else(|| LabError::Config(format!("{other} needs an ellipsoid with axes")))?;
                let len = axes.len();
                let slot = axes
                    .get_mut(i)
                    .ok_or_else(|| LabError::Config(format!("axis index {i} out of range (len {len})")))?;
                *slot = value;
            }
        }
        Ok(cfg)
    }
}
