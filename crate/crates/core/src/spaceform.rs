//! Ambient geometry of the model space form `M^{n+1}(delta)`.
//!
//! Points live in concrete coordinate models:
//! * `delta = 0`: flat coordinates in `R^{n+1}`;
//! * `delta > 0`: the round sphere of radius `1/sqrt(delta)` in `R^{n+2}`;
//! * `delta < 0`: the upper sheet of `<x, x> = 1/delta` in Minkowski space
//!   `R^{n+1,1}` with signature `(+, ..., +, -)` (time coordinate last).
//!
//! In all three models the geodesic through `p` with unit velocity `u` is
//! `c_delta(t) p + s_delta(t) u`, so exp/log and distances share one code
//! path written in terms of the generalized trigonometric functions.

use nalgebra::DVector;

use crate::error::{LabError, Result};
use crate::numeric::Real;

pub type AmbientPoint = DVector<f64>;
pub type TangentVector = DVector<f64>;

/// Constraint residual accepted for points handed in from outside.
pub const MODEL_TOL: f64 = 1e-10;

pub fn s_delta<T: Real>(delta: f64, t: T) -> T {
    if delta > 0.0 {
        let k = delta.sqrt();
        t.scale(k).sin().scale(1.0 / k)
    } else if delta < 0.0 {
        let k = (-delta).sqrt();
        t.scale(k).sinh().scale(1.0 / k)
    } else {
        t
    }
}

pub fn c_delta<T: Real>(delta: f64, t: T) -> T {
    if delta > 0.0 {
        t.scale(delta.sqrt()).cos()
    } else if delta < 0.0 {
        t.scale((-delta).sqrt()).cosh()
    } else {
        T::cst(1.0)
    }
}

/// Generalized sine `s_delta(t)`.
pub fn sdelta(delta: f64, t: f64) -> f64 {
    s_delta(delta, t)
}

/// Generalized cosine `c_delta(t)`.
pub fn cdelta(delta: f64, t: f64) -> f64 {
    c_delta(delta, t)
}

/// Generalized tangent `t_delta = s_delta / c_delta`. For `delta > 0` the
/// argument must stay below the first pole `pi / (2 sqrt(delta))`.
pub fn tdelta(delta: f64, t: f64) -> Result<f64> {
    if delta > 0.0 {
        let k = delta.sqrt();
        if (k * t).abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(LabError::Domain(format!(
                "t_delta({t}) with delta = {delta} is at or beyond the pole of c_delta"
            )));
        }
        Ok((k * t).tan() / k)
    } else if delta < 0.0 {
        let k = (-delta).sqrt();
        Ok((k * t).tanh() / k)
    } else {
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    delta: f64,
    n_ambient: usize,
}

/// Distance to a pole `p0` and the unit gradient of that distance.
#[derive(Debug, Clone)]
pub struct RadialData {
    pub r: f64,
    pub grad_r: TangentVector,
}

impl SpaceForm {
    /// `n_ambient` is the dimension `n + 1` of the space form itself.
    pub fn new(delta: f64, n_ambient: usize) -> Result<Self> {
        if !delta.is_finite() {
            return Err(LabError::InvalidSpaceForm(format!("delta = {delta}")));
        }
        if n_ambient < 3 {
            return Err(LabError::InvalidSpaceForm(format!(
                "ambient dimension {n_ambient} < 3 (hypersurfaces need n >= 2)"
            )));
        }
        Ok(Self { delta, n_ambient })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_ambient(&self) -> usize {
        self.n_ambient
    }

    pub fn hypersurface_dim(&self) -> usize {
        self.n_ambient - 1
    }

    /// Number of coordinates of a model point.
    pub fn coord_len(&self) -> usize {
        if self.delta == 0.0 {
            self.n_ambient
        } else {
            self.n_ambient + 1
        }
    }

    /// `sqrt(|delta|)`.
    pub fn k(&self) -> f64 {
        self.delta.abs().sqrt()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.delta < 0.0
    }

    /// Radius of an open hemisphere (`+inf` unless `delta > 0`).
    pub fn hemisphere_radius(&self) -> f64 {
        if self.delta > 0.0 {
            std::f64::consts::FRAC_PI_2 / self.k()
        } else {
            f64::INFINITY
        }
    }

    /// Ambient bilinear form: Euclidean, or Minkowski with time last.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let mut s = a.dot(b);
        if self.delta < 0.0 {
            let last = a.len() - 1;
            s -= 2.0 * a[last] * b[last];
        }
        s
    }

    /// Generic version of [`SpaceForm::inner`] over slices.
    pub fn inner_generic<T: Real>(&self, a: &[T], b: &[T]) -> T {
        let mut s = T::cst(0.0);
        let last = a.len() - 1;
        for i in 0..a.len() {
            let term = a[i] * b[i];
            s = if self.delta < 0.0 && i == last { s - term } else { s + term };
        }
        s
    }

    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// The model's reference pole: the origin, or the "north pole"
    /// `(0, ..., 0, 1/sqrt|delta|)`.
    pub fn origin(&self) -> AmbientPoint {
        let mut p = DVector::zeros(self.coord_len());
        if self.delta != 0.0 {
            p[self.n_ambient] = 1.0 / self.k();
        }
        p
    }

    /// Point at geodesic distance `t` from the origin in the unit tangent
    /// direction `dir` (given by its `n_ambient` flat components).
    pub fn point_from_origin(&self, dir: &[f64], t: f64) -> AmbientPoint {
        let mut p = DVector::zeros(self.coord_len());
        let s = sdelta(self.delta, t);
        for (i, d) in dir.iter().enumerate() {
            p[i] = s * d;
        }
        if self.delta != 0.0 {
            p[self.n_ambient] = cdelta(self.delta, t) / self.k();
        }
        p
    }

    pub fn constraint_residual(&self, p: &AmbientPoint) -> f64 {
        if self.delta == 0.0 {
            0.0
        } else {
            (self.inner(p, p) - 1.0 / self.delta).abs()
        }
    }

    pub fn check_point(&self, p: &AmbientPoint) -> Result<()> {
        if p.len() != self.coord_len() {
            return Err(LabError::Domain(format!(
                "point has {} coordinates, model needs {}",
                p.len(),
                self.coord_len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Domain("non-finite coordinate".into()));
        }
        let residual = self.constraint_residual(p) * self.delta.abs();
        if residual > MODEL_TOL || (self.delta < 0.0 && p[p.len() - 1] <= 0.0) {
            return Err(LabError::OffModel { residual });
        }
        Ok(())
    }

    /// Pulls a point back onto the model after round-off drift.
    pub fn project_point(&self, p: &AmbientPoint) -> AmbientPoint {
        if self.delta > 0.0 {
            p / (self.k() * p.norm())
        } else if self.delta < 0.0 {
            let m = (-self.inner(p, p)).max(f64::MIN_POSITIVE);
            let mut q = p / (self.k() * m.sqrt());
            let last = q.len() - 1;
            if q[last] < 0.0 {
                q = -q;
            }
            q
        } else {
            p.clone()
        }
    }

    /// Orthogonal projection onto `T_p M^{n+1}(delta)`.
    pub fn project_tangent(&self, p: &AmbientPoint, v: &DVector<f64>) -> TangentVector {
        if self.delta == 0.0 {
            v.clone()
        } else {
            v - p * (self.delta * self.inner(v, p))
        }
    }

    /// Tangential part of `q` at `p` (unscaled log direction) and the
    /// geodesic distance between them.
    fn split(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<(TangentVector, f64)> {
        if self.delta == 0.0 {
            let u = q - p;
            let d = u.norm();
            return Ok((u, d));
        }
        let k = self.k();
        let cos_like = self.delta * self.inner(p, q);
        let u = q - p * cos_like;
        let un = self.norm(&u);
        let d = if self.delta > 0.0 {
            let a = (k * un).atan2(cos_like);
            if a > std::f64::consts::PI - 1e-9 {
                return Err(LabError::Antipodal);
            }
            a / k
        } else {
            (k * un).asinh() / k
        };
        Ok((u, d))
    }

    pub fn distance(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<f64> {
        self.split(p, q).map(|(_, d)| d)
    }

    /// Monotone stand-in for closeness: larger means nearer. Cheaper than
    /// [`SpaceForm::distance`] for nearest-neighbour scans.
    pub fn closeness(&self, p: &AmbientPoint, q: &AmbientPoint) -> f64 {
        if self.delta == 0.0 {
            -(p - q).norm_squared()
        } else {
            self.delta.abs() * self.inner(p, q)
        }
    }

    pub fn exp(&self, p: &AmbientPoint, v: &TangentVector) -> Result<AmbientPoint> {
        let len = self.norm(v);
        if len == 0.0 {
            return Ok(p.clone());
        }
        if self.delta > 0.0 && self.k() * len >= std::f64::consts::PI {
            return Err(LabError::CutLocus {
                length: len,
                bound: std::f64::consts::PI / self.k(),
            });
        }
        let q = p * cdelta(self.delta, len) + v * (sdelta(self.delta, len) / len);
        Ok(self.project_point(&q))
    }

    pub fn log(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<TangentVector> {
        let (u, d) = self.split(p, q)?;
        let un = self.norm(&u);
        if un == 0.0 || d == 0.0 {
            return Ok(DVector::zeros(p.len()));
        }
        Ok(self.project_tangent(p, &(u * (d / un))))
    }

    /// `r = d(p0, x)` and the unit field `grad r` at `x` (the velocity at
    /// `x` of the unit-speed geodesic leaving `p0`).
    pub fn radial_field(&self, p0: &AmbientPoint, x: &AmbientPoint) -> Result<RadialData> {
        let back = self.log(x, p0)?;
        let r = self.norm(&back);
        if r <= 1e-14 {
            return Err(LabError::CoincidentPoints);
        }
        if r >= self.hemisphere_radius() {
            return Err(LabError::Hemisphere(format!(
                "r = {r} exceeds pi/(2 sqrt(delta)) = {}",
                self.hemisphere_radius()
            )));
        }
        Ok(RadialData {
            r,
            grad_r: back / -r,
        })
    }

    /// Orthonormal basis of `T_p` obtained by Gram-Schmidt on the projected
    /// coordinate axes.
    pub fn tangent_basis(&self, p: &AmbientPoint) -> Vec<TangentVector> {
        let mut basis: Vec<TangentVector> = Vec::with_capacity(self.n_ambient);
        for axis in 0..self.coord_len() {
            if basis.len() == self.n_ambient {
                break;
            }
            let mut v = self.project_tangent(p, &DVector::from_fn(self.coord_len(), |i, _| {
                if i == axis {
                    1.0
                } else {
                    0.0
                }
            }));
            for _ in 0..2 {
                for b in &basis {
                    v -= b * self.inner(&v, b);
                }
            }
            let nv = self.norm(&v);
            if nv > 1e-6 {
                basis.push(v / nv);
            }
        }
        basis
    }

    /// The model isometry exchanging `a` and `b`: a reflection across their
    /// perpendicular bisector (a Minkowski reflection in a spacelike vector
    /// for `delta < 0`).
    pub fn swap_reflection(&self, a: &AmbientPoint, b: &AmbientPoint) -> Reflection {
        let w = a - b;
        let ww = self.inner(&w, &w);
        let offset = if self.delta == 0.0 {
            (a + b) * 0.5
        } else {
            DVector::zeros(a.len())
        };
        Reflection {
            sf: *self,
            normal: if ww > 0.0 { Some(w / ww.sqrt()) } else { None },
            offset,
        }
    }
}

/// Reflection `x -> x - 2 <x - m, w> w` for a unit spacelike `w`.
#[derive(Debug, Clone)]
pub struct Reflection {
    sf: SpaceForm,
    normal: Option<DVector<f64>>,
    offset: DVector<f64>,
}

impl Reflection {
    pub fn apply(&self, x: &AmbientPoint) -> AmbientPoint {
        match &self.normal {
            None => x.clone(),
            Some(w) => x - w * (2.0 * self.sf.inner(&(x - &self.offset), w)),
        }
    }

    /// Differential of the reflection (it is linear up to translation).
    pub fn apply_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.normal {
            None => v.clone(),
            Some(w) => v - w * (2.0 * self.sf.inner(v, w)),
        }
    }

    pub fn apply_generic<T: Real>(&self, x: &[T]) -> Vec<T> {
        match &self.normal {
            None => x.to_vec(),
            Some(w) => {
                let shifted: Vec<T> = x
                    .iter()
                    .zip(self.offset.iter())
                    .map(|(xi, mi)| *xi - T::cst(*mi))
                    .collect();
                let wt: Vec<T> = w.iter().map(|v| T::cst(*v)).collect();
                let c = self.sf.inner_generic(&shifted, &wt).scale(2.0);
                x.iter().zip(w.iter()).map(|(xi, wi)| *xi - c.scale(*wi)).collect()
            }
        }
    }
}
