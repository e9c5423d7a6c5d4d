//! Built-in surface families with exact jets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::immersion::{unit_sphere_point, Immersion, ParamMap};
use crate::numeric::Real;
use crate::spaceform::{c_delta, s_delta, AmbientPoint, SpaceForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    GeodesicSphere,
    RadialGraph,
    Ellipsoid,
    OffsetSphere,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GeodesicSphere => "geodesic_sphere",
            Self::RadialGraph => "radial_graph",
            Self::Ellipsoid => "ellipsoid",
            Self::OffsetSphere => "offset_sphere",
        }
    }
}

/// Radial profile `f` with range exactly `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    /// `m = 0`: `(1 + cos(l theta)) / 2`; `m > 0`:
    /// `(1 + sin^m(theta) cos(m phi)) / 2`.
    Harmonic { l: u32, m: u32 },
    /// Gaussian cap around `theta = 0` in the chordal distance
    /// `d^2 = 2 (1 - cos theta)`, shifted and scaled so that `f(pi) = 0`.
    Bump { width: f64 },
}

impl Default for Perturbation {
    fn default() -> Self {
        Self::Harmonic { l: 1, m: 0 }
    }
}

impl Perturbation {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Harmonic { l: 0, m: 0 } => Err(LabError::InvalidSpec(
                "harmonic perturbation needs l > 0 or m > 0 (constant profile)".into(),
            )),
            Self::Bump { width } if !(width > 0.0 && width.is_finite()) => {
                Err(LabError::InvalidSpec(format!("bump width must be positive, got {width}")))
            }
            _ => Ok(()),
        }
    }

    /// `f(u)` with `u = (theta_1, ..., phi)`.
    pub fn eval<T: Real>(&self, u: &[T]) -> T {
        let theta = u[0];
        let phi = u[u.len() - 1];
        match *self {
            Self::Harmonic { l, m: 0 } => (T::cst(1.0) + theta.scale(l as f64).cos()).scale(0.5),
            Self::Harmonic { m, .. } => {
                let y = theta.sin().powi(m) * phi.scale(m as f64).cos();
                (T::cst(1.0) + y).scale(0.5)
            }
            Self::Bump { width } => {
                let w2 = width * width;
                let d2 = (T::cst(1.0) - theta.cos()).scale(2.0);
                let floor = (-4.0 / w2).exp();
                (d2.scale(-1.0 / w2).exp() - T::cst(floor)).scale(1.0 / (1.0 - floor))
            }
        }
    }
}

fn default_radius() -> f64 {
    1.0
}

fn default_n() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFamilySpec {
    pub kind: FamilyKind,
    #[serde(default)]
    pub delta: f64,
    /// Hypersurface dimension.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_radius")]
    pub base_radius: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<f64>>,
    #[serde(default)]
    pub offset: f64,
}

impl SurfaceFamilySpec {
    pub fn new(kind: FamilyKind, delta: f64, base_radius: f64) -> Self {
        Self {
            kind,
            delta,
            n: 2,
            base_radius,
            amplitude: 0.0,
            perturbation: Perturbation::default(),
            axes: None,
            offset: 0.0,
        }
    }

    pub fn geodesic_sphere(delta: f64, rho: f64) -> Self {
        Self::new(FamilyKind::GeodesicSphere, delta, rho)
    }

    pub fn radial_graph(delta: f64, rho: f64, amplitude: f64, perturbation: Perturbation) -> Self {
        Self {
            amplitude,
            perturbation,
            ..Self::new(FamilyKind::RadialGraph, delta, rho)
        }
    }

    pub fn ellipsoid(axes: &[f64]) -> Self {
        Self {
            n: axes.len().saturating_sub(1),
            axes: Some(axes.to_vec()),
            ..Self::new(FamilyKind::Ellipsoid, 0.0, 1.0)
        }
    }

    pub fn offset_sphere(delta: f64, rho: f64, offset: f64) -> Self {
        Self {
            offset,
            ..Self::new(FamilyKind::OffsetSphere, delta, rho)
        }
    }

    pub fn space_form(&self) -> Result<SpaceForm> {
        SpaceForm::new(self.delta, self.n + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidSpec(msg));
        if self.n < 2 {
            return bad("hypersurface dimension n must be at least 2".into());
        }
        if !self.delta.is_finite() {
            return bad(format!("delta must be finite, got {}", self.delta));
        }
        if self.kind == FamilyKind::Ellipsoid {
            if self.delta != 0.0 {
                return bad(format!("ellipsoids require delta = 0, got {}", self.delta));
            }
            let Some(axes) = &self.axes else {
                return bad("ellipsoid needs axes".into());
            };
            if axes.len() != self.n + 1 {
                return bad(format!("ellipsoid needs {} axes, got {}", self.n + 1, axes.len()));
            }
            if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return bad(format!("ellipsoid axes must be positive, got {axes:?}"));
            }
            return Ok(());
        }
        if !(self.base_radius > 0.0 && self.base_radius.is_finite()) {
            return bad(format!("base_radius must be positive, got {}", self.base_radius));
        }
        if !(self.amplitude >= 0.0) || !(self.offset >= 0.0) {
            return bad(format!(
                "amplitude and offset must be nonnegative, got {} and {}",
                self.amplitude, self.offset
            ));
        }
        if self.kind == FamilyKind::RadialGraph {
            if self.amplitude >= self.base_radius {
                return bad(format!(
                    "radial graph amplitude {} must be below base_radius {} (r > 0)",
                    self.amplitude, self.base_radius
                ));
            }
            self.perturbation.validate()?;
        }
        if self.delta > 0.0 {
            let limit = std::f64::consts::FRAC_PI_2 / self.delta.sqrt() - 1e-6;
            let reach = self.base_radius + self.amplitude + self.offset;
            if reach >= limit {
                return bad(format!(
                    "base_radius + amplitude + offset = {reach} must stay below pi/(2 sqrt(delta)) - 1e-6 = {limit} (open hemisphere)"
                ));
            }
        }
        Ok(())
    }

    /// The center of the construction: the model origin moved by `offset`
    /// along the first axis.
    pub fn reference_center(&self) -> Result<AmbientPoint> {
        let sf = self.space_form()?;
        let mut dir = vec![0.0; sf.n_ambient()];
        dir[0] = 1.0;
        Ok(sf.point_from_origin(&dir, self.offset))
    }
}

/// `exp_{p0}((rho - eps f(u)) iota(u))` about the model origin, followed by
/// the isometry moving the origin a distance `offset` along the first axis.
#[derive(Debug, Clone)]
pub struct RadialSurface {
    pub sf: SpaceForm,
    pub rho: f64,
    pub amplitude: f64,
    pub perturbation: Perturbation,
    pub offset: f64,
}

impl ParamMap for RadialSurface {
    fn domain_dim(&self) -> usize {
        self.sf.hypersurface_dim()
    }

    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        let d = self.sf.delta();
        let r = if self.amplitude == 0.0 {
            T::cst(self.rho)
        } else {
            T::cst(self.rho) - self.perturbation.eval(u).scale(self.amplitude)
        };
        let s = s_delta(d, r);
        let mut x: Vec<T> = unit_sphere_point(u).into_iter().map(|v| v * s).collect();
        if d != 0.0 {
            x.push(c_delta(d, r).scale(1.0 / self.sf.k()));
        }
        if self.offset != 0.0 {
            let last = x.len() - 1;
            let a = if d == 0.0 { self.offset } else { self.offset * self.sf.k() };
            if d == 0.0 {
                x[0] = x[0] + T::cst(a);
            } else if d > 0.0 {
                let (c, s) = (a.cos(), a.sin());
                let (x0, xl) = (x[0], x[last]);
                x[0] = x0.scale(c) + xl.scale(s);
                x[last] = xl.scale(c) - x0.scale(s);
            } else {
                let (c, s) = (a.cosh(), a.sinh());
                let (x0, xl) = (x[0], x[last]);
                x[0] = x0.scale(c) + xl.scale(s);
                x[last] = xl.scale(c) + x0.scale(s);
            }
        }
        x
    }
}

/// Flat ellipsoid `(a_0 iota_0, ..., a_n iota_n)`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub axes: Vec<f64>,
}

impl ParamMap for Ellipsoid {
    fn domain_dim(&self) -> usize {
        self.axes.len() - 1
    }

    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        unit_sphere_point(u)
            .into_iter()
            .zip(&self.axes)
            .map(|(v, a)| v.scale(*a))
            .collect()
    }
}

pub fn build_family(spec: &SurfaceFamilySpec) -> Result<(SpaceForm, Arc<dyn Immersion>)> {
    spec.validate()?;
    let sf = spec.space_form()?;
    let imm: Arc<dyn Immersion> = match spec.kind {
        FamilyKind::Ellipsoid => Arc::new(Ellipsoid {
            axes: spec.axes.clone().unwrap_or_default(),
        }),
        kind => Arc::new(RadialSurface {
            sf,
            rho: spec.base_radius,
            amplitude: if kind == FamilyKind::RadialGraph { spec.amplitude } else { 0.0 },
            perturbation: spec.perturbation,
            offset: if kind == FamilyKind::GeodesicSphere { 0.0 } else { spec.offset },
        }),
    };
    Ok((sf, imm))
}
