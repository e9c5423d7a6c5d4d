//! Parametric hypersurfaces `phi: S^n -> M^{n+1}(delta)` and their
//! discretization into quadrature samples carrying the first and second
//! fundamental forms, the unit normal and the mean curvature.
//!
//! The parameter domain is the unit `n`-sphere in hyperspherical angles
//! `u = (theta_1, ..., theta_{n-1}, phi)` with `theta_i in (0, pi)` and
//! `phi in [0, 2 pi)`. Quadrature is Gauss-Legendre in every polar angle
//! (nodes never hit the coordinate poles) times the periodic trapezoid rule
//! in `phi`, weighted by `sqrt(det g)`.
//!
//! Sign convention: the mean curvature *vector*
//! `H_vec = (1/n) g^{ij} (D_i D_j x)^normal` is primary. The unit normal
//! `nu` is oriented outward, and the signed mean curvature is
//! `H = <H_vec, nu>`, so round spheres have `H < 0` and the integrand of the
//! Minkowski formula is `c_delta(r) + <Z, H_vec>`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::numeric::{fd_step, gauss_legendre, neumaier_sum, HyperDual, Real};
use crate::spaceform::{sdelta, AmbientPoint, SpaceForm, TangentVector};

/// Value plus first and second parameter derivatives of an immersion.
#[derive(Debug, Clone)]
pub struct Jet {
    pub x: DVector<f64>,
    pub d1: Vec<DVector<f64>>,
    /// Symmetric: `d2[i][j] == d2[j][i]`.
    pub d2: Vec<Vec<DVector<f64>>>,
}

pub trait Immersion: Send + Sync {
    /// Dimension `n` of the hypersurface.
    fn domain_dim(&self) -> usize;

    fn eval(&self, u: &[f64]) -> Vec<f64>;

    /// Analytic derivatives, when available. Sampling falls back to
    /// [`fd_jet`] otherwise.
    fn jet(&self, _u: &[f64]) -> Option<Jet> {
        None
    }
}

/// An immersion written once over a generic scalar. Implementors get exact
/// jets through hyper-dual evaluation.
pub trait ParamMap: Send + Sync {
    fn domain_dim(&self) -> usize;
    fn map<T: Real>(&self, u: &[T]) -> Vec<T>;
}

impl<P: ParamMap> Immersion for P {
    fn domain_dim(&self) -> usize {
        ParamMap::domain_dim(self)
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.map(u)
    }

    fn jet(&self, u: &[f64]) -> Option<Jet> {
        let n = u.len();
        let mut x = None;
        let mut d1 = vec![DVector::zeros(0); n];
        let mut d2 = vec![vec![DVector::zeros(0); n]; n];
        for i in 0..n {
            for j in i..n {
                let seeded: Vec<HyperDual> = u
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        HyperDual::new(
                            v,
                            if k == i { 1.0 } else { 0.0 },
                            if k == j { 1.0 } else { 0.0 },
                            0.0,
                        )
                    })
                    .collect();
                let out = self.map(&seeded);
                if x.is_none() {
                    x = Some(DVector::from_iterator(out.len(), out.iter().map(|h| h.re)));
                }
                if i == j {
                    d1[i] = DVector::from_iterator(out.len(), out.iter().map(|h| h.e1));
                } else if j == i + 1 && d1[j].is_empty() {
                    d1[j] = DVector::from_iterator(out.len(), out.iter().map(|h| h.e2));
                }
                let second = DVector::from_iterator(out.len(), out.iter().map(|h| h.e12));
                d2[j][i] = second.clone();
                d2[i][j] = second;
            }
        }
        Some(Jet { x: x?, d1, d2 })
    }
}

/// Immersion given only by point evaluations; derivatives come from
/// central finite differences.
pub struct FnImmersion<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Send + Sync> FnImmersion<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Send + Sync> Immersion for FnImmersion<F> {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        (self.f)(u)
    }
}

/// Step for finite-difference second derivatives. Larger than the
/// first-derivative step: the round-off of a second difference grows like
/// `eps / h^2`.
pub const FD_SECOND_STEP: f64 = 1e-4;

/// Central finite-difference jet: first derivatives with step
/// `1e-5 max(1, |u_i|)`, second derivatives with [`FD_SECOND_STEP`].
pub fn fd_jet(imm: &dyn Immersion, u: &[f64]) -> Jet {
    let n = u.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut v = u.to_vec();
        for &(i, s) in shifts {
            v[i] += s;
        }
        DVector::from_vec(imm.eval(&v))
    };
    let x = at(&[]);
    let d1 = (0..n)
        .map(|i| {
            let h = fd_step(u[i]);
            (at(&[(i, h)]) - at(&[(i, -h)])) / (2.0 * h)
        })
        .collect();
    let h = FD_SECOND_STEP;
    let mut d2 = vec![vec![DVector::zeros(x.len()); n]; n];
    for i in 0..n {
        d2[i][i] = (at(&[(i, h)]) - &x * 2.0 + at(&[(i, -h)])) / (h * h);
        for j in i + 1..n {
            let m = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            d2[i][j] = m.clone();
            d2[j][i] = m;
        }
    }
    Jet { x, d1, d2 }
}

/// Hyperspherical parametrization of the unit `n`-sphere in `R^{n+1}`:
/// `(sin theta_1 * iota'(theta_2, ..., phi), cos theta_1)`, ending with
/// `(cos phi, sin phi)`. For `n = 2` this is
/// `(sin t cos p, sin t sin p, cos t)`.
pub fn unit_sphere_point<T: Real>(u: &[T]) -> Vec<T> {
    let n = u.len();
    if n == 1 {
        return vec![u[0].cos(), u[0].sin()];
    }
    let inner = unit_sphere_point(&u[1..]);
    let s = u[0].sin();
    let mut out: Vec<T> = inner.into_iter().map(|v| v * s).collect();
    out.push(u[0].cos());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    /// Gauss-Legendre nodes per polar angle; the azimuth gets twice as many
    /// uniform nodes.
    pub resolution: usize,
}

impl Quadrature {
    /// Product grid of parameter points with their coordinate weights.
    pub fn grid(&self, n: usize) -> Vec<(Vec<f64>, f64)> {
        let m = self.resolution;
        let (theta, w_theta) = gauss_legendre(m, 0.0, std::f64::consts::PI);
        let n_phi = 2 * m;
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut grid: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for _ in 0..n - 1 {
            grid = grid
                .into_iter()
                .flat_map(|(u, w)| {
                    theta.iter().zip(&w_theta).map(move |(t, wt)| {
                        let mut v = u.clone();
                        v.push(*t);
                        (v, w * wt)
                    })
                })
                .collect();
        }
        grid.into_iter()
            .flat_map(|(u, w)| {
                (0..n_phi).map(move |j| {
                    let mut v = u.clone();
                    v.push((j as f64 + 0.5) * dphi);
                    (v, w * dphi)
                })
            })
            .collect()
    }
}

/// One quadrature node with its extrinsic geometry.
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub u: Vec<f64>,
    pub x: AmbientPoint,
    /// Coordinate tangent vectors `d_i x`.
    pub tangent_basis: Vec<TangentVector>,
    /// First fundamental form in `tangent_basis`.
    pub metric: DMatrix<f64>,
    pub nu: TangentVector,
    /// Second fundamental form `<D_i D_j x, nu>` in `tangent_basis`.
    pub b: DMatrix<f64>,
    /// Principal curvatures (eigenvalues of the shape operator), ascending.
    pub principal: Vec<f64>,
    pub h_vec: TangentVector,
    /// Signed mean curvature `<H_vec, nu>`.
    pub h: f64,
    /// Area element times quadrature weight.
    pub weight: f64,
}

impl SurfaceSample {
    /// Frobenius norm of the shape operator, the `|B|` convention used for
    /// `||B||_inf`.
    pub fn b_frobenius(&self) -> f64 {
        self.principal.iter().map(|k| k * k).sum::<f64>().sqrt()
    }

    /// Largest absolute principal curvature.
    pub fn b_operator_norm(&self) -> f64 {
        self.principal.iter().fold(0.0, |m, k| m.max(k.abs()))
    }

    fn flip_orientation(&mut self) {
        self.nu = -&self.nu;
        self.b = -&self.b;
        self.h = -self.h;
        for k in &mut self.principal {
            *k = -*k;
        }
        self.principal.reverse();
    }
}

#[derive(Clone)]
pub struct SurfaceSampling {
    pub immersion: Arc<dyn Immersion>,
    pub space_form: SpaceForm,
    pub quadrature: Quadrature,
    pub samples: Vec<SurfaceSample>,
    pub total_volume: f64,
}

impl std::fmt::Debug for SurfaceSampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceSampling")
            .field("space_form", &self.space_form)
            .field("quadrature", &self.quadrature)
            .field("samples", &self.samples.len())
            .field("total_volume", &self.total_volume)
            .finish()
    }
}

/// Per-sample mean curvature data.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub h: f64,
    pub h_vec: TangentVector,
    pub b: DMatrix<f64>,
    pub b_op: f64,
    pub b_frobenius: f64,
}

/// Geometry of one parameter point.
pub fn sample_at(
    imm: &dyn Immersion,
    sf: &SpaceForm,
    u: &[f64],
    coord_weight: f64,
) -> Result<SurfaceSample> {
    let n = imm.domain_dim();
    let jet = imm.jet(u).unwrap_or_else(|| fd_jet(imm, u));
    let degenerate = |reason: String| LabError::DegenerateImmersion {
        u: u.to_vec(),
        reason,
    };
    if jet.x.len() != sf.coord_len() {
        return Err(degenerate(format!(
            "immersion returns {} coordinates, model needs {}",
            jet.x.len(),
            sf.coord_len()
        )));
    }
    let residual = sf.constraint_residual(&jet.x) * sf.delta().abs().max(1.0);
    if residual > 1e-10 || (sf.is_hyperbolic() && jet.x[jet.x.len() - 1] <= 0.0) {
        return Err(LabError::OffModel { residual });
    }
    let x = jet.x;
    let tangents = jet.d1;
    let metric = DMatrix::from_fn(n, n, |i, j| sf.inner(&tangents[i], &tangents[j]));
    let sym = metric.clone().symmetric_eigen();
    let min_eig = sym.eigenvalues.min();
    if !(min_eig > 1e-10) {
        return Err(degenerate(format!("first fundamental form min eigenvalue {min_eig:e}")));
    }

    let nu = unit_normal(sf, &x, &tangents).ok_or_else(|| degenerate("no unit normal".into()))?;
    let b = DMatrix::from_fn(n, n, |i, j| {
        0.5 * (sf.inner(&jet.d2[i][j], &nu) + sf.inner(&jet.d2[j][i], &nu))
    });

    // Shape operator eigenvalues via the symmetric form L^-1 B L^-T.
    let chol = metric
        .clone()
        .cholesky()
        .ok_or_else(|| degenerate("metric not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| degenerate("metric not invertible".into()))?;
    let sym_shape = &l_inv * &b * l_inv.transpose();
    let sym_shape = (&sym_shape + sym_shape.transpose()) * 0.5;
    let mut principal: Vec<f64> = sym_shape.symmetric_eigen().eigenvalues.iter().copied().collect();
    principal.sort_by(|a, b| a.total_cmp(b));
    let h = principal.iter().sum::<f64>() / n as f64;

    Ok(SurfaceSample {
        u: u.to_vec(),
        h_vec: &nu * h,
        x,
        tangent_basis: tangents,
        weight: metric.determinant().sqrt() * coord_weight,
        metric,
        nu,
        b,
        principal,
        h,
    })
}

/// Unit normal to the hypersurface inside the model: orthogonal (in the
/// ambient form) to the tangent vectors and, for `delta != 0`, to the
/// position vector. Computed as a generalized cross product so its
/// orientation varies continuously with the parameters.
pub fn unit_normal(sf: &SpaceForm, x: &DVector<f64>, tangents: &[DVector<f64>]) -> Option<TangentVector> {
    let dim = x.len();
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(dim - 1);
    if sf.delta() != 0.0 {
        rows.push(x.clone());
    }
    rows.extend(tangents.iter().cloned());
    if rows.len() != dim - 1 {
        return None;
    }
    // metric-lowered rows so that the cofactor vector w has <row, w> = 0
    let lowered = DMatrix::from_fn(dim - 1, dim, |i, j| {
        let v = rows[i][j];
        if sf.is_hyperbolic() && j == dim - 1 {
            -v
        } else {
            v
        }
    });
    let mut w = DVector::zeros(dim);
    for k in 0..dim {
        let minor = lowered.clone().remove_column(k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        w[k] = sign * minor.determinant();
    }
    let nw = sf.inner(&w, &w);
    if !(nw > 0.0) {
        return None;
    }
    Some(w / nw.sqrt())
}

/// Samples `imm` on the product Gauss-Legendre x trapezoid grid and orients
/// the normal outward.
pub fn sample(imm: Arc<dyn Immersion>, sf: &SpaceForm, resolution: usize) -> Result<SurfaceSampling> {
    if resolution < 8 {
        return Err(LabError::Domain(format!("resolution {resolution} < 8")));
    }
    let n = imm.domain_dim();
    if n != sf.hypersurface_dim() {
        return Err(LabError::Domain(format!(
            "immersion dimension {n} does not match the space form (needs {})",
            sf.hypersurface_dim()
        )));
    }
    let quadrature = Quadrature { resolution };
    let grid = quadrature.grid(n);
    let mut samples: Vec<SurfaceSample> = grid
        .par_iter()
        .map(|(u, w)| sample_at(imm.as_ref(), sf, u, *w))
        .collect::<Result<_>>()?;

    if outward_flux(sf, &samples) < 0.0 {
        samples.iter_mut().for_each(SurfaceSample::flip_orientation);
    }
    let total_volume = neumaier_sum(samples.iter().map(|s| s.weight));
    Ok(SurfaceSampling {
        immersion: imm,
        space_form: *sf,
        quadrature,
        samples,
        total_volume,
    })
}

/// `int <Z_q, nu>`, which equals `(n+1) int_Omega c_delta(r_q)` for the
/// outward normal of an embedded surface bounding `Omega`, hence positive.
fn outward_flux(sf: &SpaceForm, samples: &[SurfaceSample]) -> f64 {
    let mut mean = DVector::zeros(sf.coord_len());
    for s in samples {
        mean += &s.x * s.weight;
    }
    let q = sf.project_point(&mean);
    neumaier_sum(samples.iter().map(|s| match sf.radial_field(&q, &s.x) {
        Ok(rd) => s.weight * sdelta(sf.delta(), rd.r) * sf.inner(&rd.grad_r, &s.nu),
        Err(_) => 0.0,
    }))
}

impl SurfaceSampling {
    pub fn points(&self) -> Vec<AmbientPoint> {
        self.samples.iter().map(|s| s.x.clone()).collect()
    }

    /// `int f dv` with compensated summation in sample order.
    pub fn integrate<F: Fn(&SurfaceSample) -> f64>(&self, f: F) -> f64 {
        neumaier_sum(self.samples.iter().map(|s| s.weight * f(s)))
    }

    pub fn mean_curvature_field(&self) -> Vec<CurvatureData> {
        mean_curvature_field(self)
    }
}

pub fn mean_curvature_field(s: &SurfaceSampling) -> Vec<CurvatureData> {
    s.samples
        .iter()
        .map(|smp| CurvatureData {
            h: smp.h,
            h_vec: smp.h_vec.clone(),
            b: smp.b.clone(),
            b_op: smp.b_operator_norm(),
            b_frobenius: smp.b_frobenius(),
        })
        .collect()
}

/// `(int |f|^p dv)^{1/p}`; `p = f64::INFINITY` gives the sample maximum.
pub fn lp_norm(s: &SurfaceSampling, field: &[f64], p: f64) -> Result<f64> {
    lp_norm_weighted(s.samples.iter().map(|x| x.weight), field, p)
}

pub(crate) fn lp_norm_weighted<I: IntoIterator<Item = f64>>(
    weights: I,
    field: &[f64],
    p: f64,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(LabError::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(field.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let total = neumaier_sum(weights.into_iter().zip(field).map(|(w, f)| w * f.abs().powf(p)));
    Ok(total.powf(1.0 / p))
}

/// Scalars of the unit-volume rescaled immersion `g' = V^{-2/n} g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homothety {
    /// Length factor `V^{-1/n}`.
    pub scale: f64,
    pub n: usize,
    pub delta: f64,
    pub radius: f64,
}

impl Homothety {
    pub fn new(n: usize, delta: f64, volume: f64, radius: f64) -> Result<Self> {
        if !(volume > 0.0) {
            return Err(LabError::ZeroVolume(volume));
        }
        let scale = volume.powf(-1.0 / n as f64);
        Ok(Self {
            scale,
            n,
            delta: delta / (scale * scale),
            radius: radius * scale,
        })
    }

    /// Transforms `||H||_p` (any `p`, including infinity): curvature scales
    /// by `1/scale` and the volume element by `scale^n`.
    pub fn h_norm(&self, norm: f64, p: f64) -> f64 {
        let exponent = if p.is_infinite() { 0.0 } else { self.n as f64 / p };
        norm * self.scale.powf(exponent - 1.0)
    }
}

/// Unit-volume normalization: returns `(delta', R', ||H'||_inf)` with
/// `delta' = V^{2/n} delta`, `R' = V^{-1/n} R`, `||H'||_inf = V^{1/n} ||H||_inf`.
pub fn normalize_unit_volume(
    sf: &SpaceForm,
    volume: f64,
    radius: f64,
    h_inf: f64,
) -> Result<(f64, f64, f64)> {
    let hom = Homothety::new(sf.hypersurface_dim(), sf.delta(), volume, radius)?;
    Ok((hom.delta, hom.radius, hom.h_norm(h_inf, f64::INFINITY)))
}
