//! Radial projection onto the enclosing sphere and the hyperbolic
//! conformal-ball machinery.
//!
//! `F(x)` is the point at distance `R` from `p0` on the geodesic through
//! `x`. Its differential on a unit tangent vector `u` of the surface
//! satisfies `|dF(u)|^2 = |v|^2 s_delta(R)^2 / s_delta(r)^2`, where `v` is
//! the part of `u` orthogonal to the radial direction.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::immersion::{fd_jet, sample, sample_at, Immersion, Jet, SurfaceSample, SurfaceSampling};
use crate::numeric::fd_step;
use crate::radius::EnclosingBall;
use crate::spaceform::{sdelta, AmbientPoint, Reflection, SpaceForm, TangentVector};

#[derive(Debug, Clone)]
pub struct ProjectionMap {
    pub ball: EnclosingBall,
    pub sf: SpaceForm,
}

impl ProjectionMap {
    pub fn new(sf: SpaceForm, ball: EnclosingBall) -> Self {
        Self { ball, sf }
    }

    pub fn project(&self, x: &AmbientPoint) -> Result<AmbientPoint> {
        let v = self.sf.log(&self.ball.center, x)?;
        let r = self.sf.norm(&v);
        if r <= 1e-14 {
            return Err(LabError::CoincidentPoints);
        }
        if r >= self.sf.hemisphere_radius() {
            return Err(LabError::Hemisphere(format!("r = {r} outside the open hemisphere")));
        }
        self.sf.exp(&self.ball.center, &(v * (self.ball.radius / r)))
    }

    /// `|dF(u)|^2` for a unit tangent vector `u` of the surface at `sample`.
    pub fn df_norm_sq(&self, sample: &SurfaceSample, u: &TangentVector) -> Result<f64> {
        let rd = self.sf.radial_field(&self.ball.center, &sample.x)?;
        let along = self.sf.inner(u, &rd.grad_r);
        let v = u - &rd.grad_r * along;
        let ratio = sdelta(self.sf.delta(), self.ball.radius) / sdelta(self.sf.delta(), rd.r);
        Ok(self.sf.inner(&v, &v) * ratio * ratio)
    }

    /// Finite-difference `|dF(w)|^2 / |w|^2` for `w = dx(a)`, by central
    /// differences of `t -> F(x(u0 + t a))`.
    pub fn df_norm_sq_fd(&self, imm: &dyn Immersion, u0: &[f64], a: &[f64]) -> Result<f64> {
        let h = fd_step(u0.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let at = |t: f64| -> Result<AmbientPoint> {
            let u: Vec<f64> = u0.iter().zip(a).map(|(x, d)| x + t * d).collect();
            self.project(&DVector::from_vec(imm.eval(&u)))
        };
        let d_f = (at(h)? - at(-h)?) / (2.0 * h);
        let jet = imm.jet(u0).unwrap_or_else(|| fd_jet(imm, u0));
        let mut w = DVector::zeros(jet.x.len());
        for (c, t) in a.iter().zip(&jet.d1) {
            w.axpy(*c, t, 1.0);
        }
        Ok(self.sf.inner(&d_f, &d_f) / self.sf.inner(&w, &w))
    }

    /// Analytic and finite-difference `|dF(u)|^2` for `u` the unit vector
    /// along `dx(a)` at parameter `u0`.
    pub fn differential_pair(&self, imm: &dyn Immersion, u0: &[f64], a: &[f64]) -> Result<(f64, f64)> {
        let smp = sample_at(imm, &self.sf, u0, 1.0)?;
        let mut w = DVector::zeros(smp.x.len());
        for (c, t) in a.iter().zip(&smp.tangent_basis) {
            w.axpy(*c, t, 1.0);
        }
        let u = &w / self.sf.norm(&w);
        Ok((self.df_norm_sq(&smp, &u)?, self.df_norm_sq_fd(imm, u0, a)?))
    }

    /// `sup_u ||dF(u)|^2 - 1|` at one sample. The extremes over the unit
    /// tangent sphere sit at `u` parallel and orthogonal to the tangential
    /// part of `grad r`.
    pub fn sample_distortion(&self, sample: &SurfaceSample) -> Result<f64> {
        let rd = self.sf.radial_field(&self.ball.center, &sample.x)?;
        let q2 = {
            let along = self.sf.inner(&rd.grad_r, &sample.nu);
            (1.0 - along * along).clamp(0.0, 1.0)
        };
        let ratio = (sdelta(self.sf.delta(), self.ball.radius) / sdelta(self.sf.delta(), rd.r)).powi(2);
        Ok((ratio - 1.0).abs().max(((1.0 - q2) * ratio - 1.0).abs()))
    }

    pub fn distortion(&self, s: &SurfaceSampling) -> Result<f64> {
        s.samples
            .par_iter()
            .map(|smp| self.sample_distortion(smp))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }
}

pub fn project_f(map: &ProjectionMap, x: &AmbientPoint) -> Result<AmbientPoint> {
    map.project(x)
}

pub fn df_norm_analytic(map: &ProjectionMap, sample: &SurfaceSample, u: &TangentVector) -> Result<f64> {
    map.df_norm_sq(sample, u)
}

pub fn distortion(map: &ProjectionMap, s: &SurfaceSampling) -> Result<f64> {
    map.distortion(s)
}

/// `h(r) = 2 / (1 - r^2)`, so the hyperbolic metric is `h^2` times the
/// Euclidean one.
pub fn conformal_factor(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(LabError::OutsideBall(r.abs()));
    }
    Ok(2.0 / (1.0 - r * r))
}

/// Hyperbolic mean curvature of a hypersurface in the Poincare ball from
/// its Euclidean mean curvature `h_tilde` (positive on round spheres with
/// the outward normal), its Euclidean distance `r` to the center, and the
/// radial component of its Euclidean unit normal.
pub fn conformal_mean_curvature(h_tilde: f64, r: f64, nu_radial: f64) -> Result<f64> {
    let h = conformal_factor(r)?;
    let grad_h_nu = 4.0 * r * nu_radial / (1.0 - r * r).powi(2);
    Ok((h_tilde + grad_h_nu / h) / h)
}

/// The Poincare ball model of `H^{n+1}(-1)` centered at `p0`.
#[derive(Debug, Clone)]
pub struct PoincareBall {
    sf: SpaceForm,
    to_pole: Reflection,
}

impl PoincareBall {
    pub fn new(sf: SpaceForm, p0: &AmbientPoint) -> Result<Self> {
        if sf.delta() != -1.0 {
            return Err(LabError::InvalidSpaceForm(format!(
                "the Poincare ball model is implemented for delta = -1, got {}",
                sf.delta()
            )));
        }
        sf.check_point(p0)?;
        Ok(Self {
            to_pole: sf.swap_reflection(p0, &sf.origin()),
            sf,
        })
    }

    pub fn space_form(&self) -> SpaceForm {
        self.sf
    }

    pub fn to_ball(&self, x: &AmbientPoint) -> Result<DVector<f64>> {
        self.sf.check_point(x)?;
        let z = self.to_pole.apply(x);
        let m = z.len() - 1;
        Ok(z.rows(0, m) / (1.0 + z[m]))
    }

    pub fn from_ball(&self, y: &DVector<f64>) -> Result<AmbientPoint> {
        let r2 = y.norm_squared();
        if !(r2 < 1.0) {
            return Err(LabError::OutsideBall(r2.sqrt()));
        }
        let mut z = DVector::zeros(y.len() + 1);
        z.rows_mut(0, y.len()).copy_from(&(y * (2.0 / (1.0 - r2))));
        z[y.len()] = (1.0 + r2) / (1.0 - r2);
        Ok(self.sf.project_point(&self.to_pole.apply(&z)))
    }

    /// Value and first two derivatives of `to_ball` composed with a
    /// hyperboloid jet.
    fn ball_jet(&self, jet: &Jet) -> Jet {
        let z = self.to_pole.apply(&jet.x);
        let dz: Vec<DVector<f64>> = jet.d1.iter().map(|v| self.to_pole.apply_vector(v)).collect();
        let m = z.len() - 1;
        let den = 1.0 + z[m];
        let space = |v: &DVector<f64>| v.rows(0, m).into_owned();
        let zs = space(&z);
        let first = |v: &DVector<f64>| (space(v) - &zs * (v[m] / den)) / den;
        let n = jet.d1.len();
        let d1: Vec<DVector<f64>> = dz.iter().map(first).collect();
        let mut d2 = vec![vec![DVector::zeros(m); n]; n];
        for i in 0..n {
            for j in 0..n {
                let ddz = self.to_pole.apply_vector(&jet.d2[i][j]);
                let (a, b) = (&dz[i], &dz[j]);
                let second = (space(a) * b[m] + space(b) * a[m]) * (-1.0 / (den * den))
                    + &zs * (2.0 * a[m] * b[m] / den.powi(3));
                d2[i][j] = first(&ddz) + second;
            }
        }
        Jet {
            x: zs / den,
            d1,
            d2,
        }
    }
}

/// A hyperboloid immersion viewed in the Poincare ball, as a Euclidean
/// hypersurface.
pub struct PoincareImage {
    inner: Arc<dyn Immersion>,
    ball: PoincareBall,
}

impl PoincareImage {
    pub fn new(inner: Arc<dyn Immersion>, ball: PoincareBall) -> Self {
        Self { inner, ball }
    }
}

impl Immersion for PoincareImage {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim()
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        let x = DVector::from_vec(self.inner.eval(u));
        let z = self.ball.to_pole.apply(&x);
        let m = z.len() - 1;
        (z.rows(0, m) / (1.0 + z[m])).iter().copied().collect()
    }

    fn jet(&self, u: &[f64]) -> Option<Jet> {
        let jet = self
            .inner
            .jet(u)
            .unwrap_or_else(|| fd_jet(self.inner.as_ref(), u));
        Some(self.ball.ball_jet(&jet))
    }
}

/// Per-sample mean curvature of a hyperbolic sampling computed twice: in
/// the hyperboloid model, and through the Euclidean geometry of its
/// Poincare image plus the conformal formula. Both use the convention
/// positive on spheres with the outward normal.
pub fn conformal_cross_check(s: &SurfaceSampling, p0: &AmbientPoint) -> Result<Vec<(f64, f64)>> {
    let ball = PoincareBall::new(s.space_form, p0)?;
    let image = PoincareImage::new(s.immersion.clone(), ball);
    let flat = SpaceForm::new(0.0, s.space_form.n_ambient())?;
    let euclid = sample(Arc::new(image), &flat, s.quadrature.resolution)?;
    s.samples
        .iter()
        .zip(&euclid.samples)
        .map(|(hyp, euc)| {
            let r = euc.x.norm();
            let nu_radial = if r > 0.0 { euc.nu.dot(&euc.x) / r } else { 0.0 };
            Ok((-hyp.h, conformal_mean_curvature(-euc.h, r, nu_radial)?))
        })
        .collect()
}

/// Constants of the curvature-concentration step in the hyperbolic ball
/// (`delta = -1`), with `a(t) = tanh(t / 2)` the ball radius of a geodesic
/// sphere of radius `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma43Geometry {
    pub n: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub eta: f64,
    /// `a(R)`.
    pub a_r: f64,
    /// Solves `a(R + rho) - a(R) = 4 (2n - 1) eta`.
    pub rho: f64,
    /// `(a(R + rho) - a(R - rho)) / 2`.
    pub rho_prime: f64,
    /// `a(R + rho) - a(R)`.
    pub rho_double_prime: f64,
    /// `(1 - a(R)^2) / 2`.
    pub e: f64,
    /// `E^3 / (2n)`: the largest `eta` with `1 / (4E^2) <= E / (8 n eta)`.
    pub d: f64,
    /// `E / (8 n eta)`.
    pub threshold: f64,
}

fn ball_radius(t: f64) -> f64 {
    (0.5 * t).tanh()
}

pub fn lemma43_constants(n: usize, radius: f64, eta: f64) -> Result<Lemma43Geometry> {
    if n < 1 || !(radius > 0.0) {
        return Err(LabError::Domain(format!("need n >= 1 and R > 0, got n = {n}, R = {radius}")));
    }
    let a_r = ball_radius(radius);
    let target = 4.0 * (2 * n - 1) as f64 * eta;
    if !(eta > 0.0) || target >= 1.0 - a_r {
        return Err(LabError::NoSolution(format!(
            "a(R + rho) - a(R) = {target} has no solution for eta = {eta}: the left side ranges over (0, {})",
            1.0 - a_r
        )));
    }
    let f = |rho: f64| ball_radius(radius + rho) - a_r - target;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let e = 0.5 * (1.0 - a_r * a_r);
    Ok(Lemma43Geometry {
        n,
        radius,
        eta,
        a_r,
        rho,
        rho_prime: 0.5 * (ball_radius(radius + rho) - ball_radius(radius - rho)),
        rho_double_prime: ball_radius(radius + rho) - a_r,
        e,
        d: e.powi(3) / (2.0 * n as f64),
        threshold: e / (8.0 * n as f64 * eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hyp() -> SpaceForm {
        SpaceForm::new(-1.0, 3).unwrap()
    }

    #[test]
    fn projection_examples() {
        let flat = SpaceForm::new(0.0, 3).unwrap();
        let p0 = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let map = ProjectionMap::new(flat, EnclosingBall { center: p0.clone(), radius: 2.0, iterations: 0, residual: 0.0 });
        let x = DVector::from_vec(vec![1.3, -0.2, 0.1]);
        let expect = &p0 + (&x - &p0) * (2.0 / (&x - &p0).norm());
        assert!((map.project(&x).unwrap() - expect).amax() < 1e-14);
        assert!(matches!(map.project(&p0), Err(LabError::CoincidentPoints)));

        let sf = hyp();
        let o = sf.origin();
        let u = DVector::from_vec(vec![0.0, 0.6, 0.8, 0.0]);
        let map = ProjectionMap::new(sf, EnclosingBall { center: o.clone(), radius: 1.0, iterations: 0, residual: 0.0 });
        let x = sf.exp(&o, &(&u * 0.5)).unwrap();
        let fx = map.project(&x).unwrap();
        assert!((&fx - sf.exp(&o, &u).unwrap()).amax() < 1e-12);
        // fixed points and idempotence
        assert!((map.project(&fx).unwrap() - &fx).amax() < 1e-12);
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(conformal_factor(0.0).unwrap(), 2.0);
        assert!(conformal_factor(1.0).is_err());
        let sf = hyp();
        let ball = PoincareBall::new(sf, &sf.origin()).unwrap();
        assert!(ball.to_ball(&sf.origin()).unwrap().norm() < 1e-15);
        let x = sf.point_from_origin(&[1.0, 0.0, 0.0], 1.0);
        assert_relative_eq!(ball.to_ball(&x).unwrap().norm(), 0.462_117_157_260_009_7, epsilon = 1e-15);
        assert!(ball.from_ball(&DVector::from_vec(vec![0.6, 0.8, 0.0])).is_err());
        assert!(PoincareBall::new(SpaceForm::new(-2.0, 3).unwrap(), &SpaceForm::new(-2.0, 3).unwrap().origin()).is_err());
    }

    #[test]
    fn poincare_round_trip_about_arbitrary_center() {
        let sf = hyp();
        let p0 = sf.point_from_origin(&[0.0, 0.6, 0.8], 0.7);
        let ball = PoincareBall::new(sf, &p0).unwrap();
        assert!(ball.to_ball(&p0).unwrap().norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nd = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            let d: Vec<f64> = d.iter().map(|v| v / nd).collect();
            let x = sf.point_from_origin(&d, rng.random_range(0.0..2.0));
            let y = ball.to_ball(&x).unwrap();
            // distance from p0 becomes Euclidean radius tanh(rho / 2)
            assert_relative_eq!(y.norm(), (0.5 * sf.distance(&p0, &x).unwrap()).tanh(), epsilon = 1e-12);
            let back = ball.from_ball(&y).unwrap();
            assert!((&back - &x).amax() < 1e-12 * (1.0 + x.amax()));
        }
    }

    #[test]
    fn conformal_mean_curvature_examples() {
        let a = 0.5f64.tanh();
        let h = conformal_mean_curvature(1.0 / a, a, 1.0).unwrap();
        assert_relative_eq!(h, 1.0 / 1f64.tanh(), epsilon = 1e-14);
        assert_relative_eq!(h, 1.313_035_285_499_331_3, epsilon = 1e-14);
        assert_eq!(conformal_mean_curvature(3.0, 0.0, 0.7).unwrap(), 1.5);
        assert_relative_eq!(conformal_mean_curvature(2.0, 0.5, 0.0).unwrap(), 0.75, epsilon = 1e-15);
        assert!(conformal_mean_curvature(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn lemma43_values() {
        let g = lemma43_constants(2, 1.0, 0.01).unwrap();
        assert_relative_eq!(g.a_r, 0.462_117_157_260_009_7, epsilon = 1e-15);
        assert_relative_eq!(g.e, 0.393_223_866_482_963_7, epsilon = 1e-15);
        assert_relative_eq!(g.threshold, 2.457_649_165_518_523, epsilon = 1e-13);
        let residual = (0.5 * (1.0 + g.rho)).tanh() - g.a_r - 0.12;
        assert!(residual.abs() <= 1e-12);
        assert_eq!(g.d, g.e.powi(3) / 4.0);
        assert_relative_eq!(1.0 / (4.0 * g.e * g.e), g.e / (8.0 * 2.0 * g.d), max_relative = 1e-15);
        assert_relative_eq!(g.rho_double_prime, 0.12, epsilon = 1e-12);
        // a is concave, so the half-width of [a(R - rho), a(R + rho)] dominates
        assert!(g.rho_prime >= g.rho_double_prime);

        let mut last = g.rho;
        for eta in [0.005, 0.001, 1e-4, 1e-6] {
            let r = lemma43_constants(2, 1.0, eta).unwrap().rho;
            assert!(r < last);
            last = r;
        }
        assert!(last < 1e-4);
        assert!(matches!(lemma43_constants(2, 1.0, 0.0), Err(LabError::NoSolution(_))));
        assert!(matches!(lemma43_constants(2, 1.0, 0.05), Err(LabError::NoSolution(_))));
    }

    #[test]
    fn differential_matches_finite_differences() {
        use crate::lab::{build_family, Perturbation, SurfaceFamilySpec};
        use crate::radius::{min_enclosing_ball, DEFAULT_TOL};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for delta in [-1.0, 0.0, 1.0] {
            let spec = SurfaceFamilySpec::radial_graph(delta, 0.9, 0.1, Perturbation::Harmonic { l: 2, m: 1 });
            let (sf, imm) = build_family(&spec).unwrap();
            let s = sample(imm.clone(), &sf, 24).unwrap();
            let ball = min_enclosing_ball(&sf, &s.points(), DEFAULT_TOL).unwrap();
            let map = ProjectionMap::new(sf, ball);
            for _ in 0..50 {
                let u0 = [rng.random_range(0.2..2.9), rng.random_range(0.0..std::f64::consts::TAU)];
                let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let (exact, fd) = map.differential_pair(imm.as_ref(), &u0, &a).unwrap();
                assert!((exact - fd).abs() <= 1e-4 * exact, "{delta} {u0:?}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn geodesic_spheres_have_no_distortion() {
        use crate::lab::{build_family, SurfaceFamilySpec};
        for delta in [-1.0, 0.0, 1.0] {
            let spec = SurfaceFamilySpec::geodesic_sphere(delta, 0.8);
            let (sf, imm) = build_family(&spec).unwrap();
            let s = sample(imm, &sf, 24).unwrap();
            let ball = EnclosingBall { center: sf.origin(), radius: 0.8, iterations: 0, residual: 0.0 };
            assert!(ProjectionMap::new(sf, ball).distortion(&s).unwrap() <= 1e-8);
        }
    }
}
