//! Pinching diagnostics relative to an enclosing ball `B(p0, R)`.
//!
//! Everything here is built from the radial field of the ball center:
//! `r = d(p0, x)`, `Z = s_delta(r) grad r`, its tangential part `Z^T` and
//! its normal component `<Z, nu>`. From these we get the integral
//! Minkowski identity, the radius gaps `t_delta(R) - 1/||H||`, the radial
//! deviation functions `phi` and `psi`, the explicit `L^2` bound chains for
//! them, and the Hausdorff distance between the surface and `S(p0, R)`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::immersion::{fd_jet, lp_norm_weighted, unit_sphere_point, Homothety, Quadrature, SurfaceSampling};
use crate::numeric::neumaier_sum;
use crate::radius::EnclosingBall;
use crate::spaceform::{cdelta, sdelta, tdelta, AmbientPoint, SpaceForm, TangentVector};

/// `Z` at one sample.
#[derive(Debug, Clone)]
pub struct ZField {
    pub z: TangentVector,
    pub z_tan: TangentVector,
    pub z_nu: f64,
}

/// Scalar radial data of one sample; enough for every integral diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub r: f64,
    /// `|Z^T|`.
    pub z_tan: f64,
    /// `<Z, nu>`.
    pub z_nu: f64,
    /// Signed mean curvature.
    pub h: f64,
    pub weight: f64,
}

/// The radial data of a whole sampling, optionally rescaled.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub n: usize,
    pub delta: f64,
    pub radius: f64,
    pub samples: Vec<RadialSample>,
}

fn z_at(sf: &SpaceForm, p0: &AmbientPoint, x: &AmbientPoint, nu: &TangentVector) -> Result<(f64, ZField)> {
    match sf.radial_field(p0, x) {
        Ok(rd) => {
            let z = rd.grad_r * sdelta(sf.delta(), rd.r);
            let z_nu = sf.inner(&z, nu);
            let z_tan = &z - nu * z_nu;
            Ok((rd.r, ZField { z, z_tan, z_nu }))
        }
        Err(LabError::CoincidentPoints) => {
            let zero = DVector::zeros(x.len());
            Ok((0.0, ZField { z: zero.clone(), z_tan: zero, z_nu: 0.0 }))
        }
        Err(e) => Err(e),
    }
}

/// `Z`, `Z^T` and `<Z, nu>` at every sample.
pub fn z_field(s: &SurfaceSampling, ball: &EnclosingBall) -> Result<Vec<ZField>> {
    s.samples
        .iter()
        .map(|smp| z_at(&s.space_form, &ball.center, &smp.x, &smp.nu).map(|(_, z)| z))
        .collect()
}

impl RadialProfile {
    pub fn new(s: &SurfaceSampling, ball: &EnclosingBall) -> Result<Self> {
        let sf = &s.space_form;
        let samples = s
            .samples
            .iter()
            .map(|smp| {
                let (r, z) = z_at(sf, &ball.center, &smp.x, &smp.nu)?;
                Ok(RadialSample {
                    r,
                    z_tan: sf.norm(&z.z_tan),
                    z_nu: z.z_nu,
                    h: smp.h,
                    weight: smp.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: sf.hypersurface_dim(),
            delta: sf.delta(),
            radius: ball.radius,
            samples,
        })
    }

    pub fn volume(&self) -> f64 {
        neumaier_sum(self.samples.iter().map(|s| s.weight))
    }

    pub fn integrate<F: Fn(&RadialSample) -> f64>(&self, f: F) -> f64 {
        neumaier_sum(self.samples.iter().map(|s| s.weight * f(s)))
    }

    /// Image under the homothety that multiplies lengths by `lambda`: the
    /// ambient curvature becomes `delta / lambda^2`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        let w = lambda.powi(self.n as i32);
        Self {
            n: self.n,
            delta: self.delta / (lambda * lambda),
            radius: self.radius * lambda,
            samples: self
                .samples
                .iter()
                .map(|s| RadialSample {
                    r: s.r * lambda,
                    z_tan: s.z_tan * lambda,
                    z_nu: s.z_nu * lambda,
                    h: s.h / lambda,
                    weight: s.weight * w,
                })
                .collect(),
        }
    }

    /// Rescaled copy with volume 1.
    pub fn unit_volume(&self) -> Result<Self> {
        let hom = Homothety::new(self.n, self.delta, self.volume(), self.radius)?;
        Ok(self.rescaled(hom.scale))
    }

    pub fn h_norm(&self, p: f64) -> Result<f64> {
        let h: Vec<f64> = self.samples.iter().map(|s| s.h).collect();
        let norm = lp_norm_weighted(self.samples.iter().map(|s| s.weight), &h, p)?;
        if !(norm > 0.0) {
            return Err(LabError::VanishingMeanCurvature);
        }
        Ok(norm)
    }

    pub fn minkowski_residual(&self) -> f64 {
        let d = self.delta;
        self.integrate(|s| cdelta(d, s.r) + s.h * s.z_nu)
    }

    pub fn lemma21ii_slack(&self) -> f64 {
        let d = self.delta;
        let lhs = d * self.integrate(|s| s.z_tan * s.z_tan);
        let rhs = self.n as f64
            * self.integrate(|s| {
                let c = cdelta(d, s.r);
                c * c - s.h.abs() * c * sdelta(d, s.r)
            });
        lhs - rhs
    }

    pub fn gaps(&self, p: f64) -> Result<RadiusGaps> {
        let t_r = tdelta(self.delta, self.radius)?;
        let h_inf = self.h_norm(f64::INFINITY)?;
        let gap_2p = if self.delta >= 0.0 {
            let q = 2.0 * p;
            let h_2p = self.h_norm(q)?;
            Some(t_r - self.volume().powf(1.0 / q) / h_2p)
        } else {
            None
        };
        let alpha = (self.delta < 0.0).then(|| 0.5 * (1.0 / (-self.delta).sqrt() - 1.0 / h_inf));
        Ok(RadiusGaps {
            gap_inf: t_r - 1.0 / h_inf,
            gap_2p,
            alpha,
        })
    }

    pub fn phi(&self) -> Vec<f64> {
        let (d, big_r) = (self.delta, self.radius);
        self.samples
            .iter()
            .map(|s| {
                if d < 0.0 {
                    let (a, b) = (tdelta(d, big_r).unwrap_or(f64::NAN), tdelta(d, s.r).unwrap_or(f64::NAN));
                    a * a - b * b
                } else {
                    sdelta(d, big_r).powi(2) - sdelta(d, s.r).powi(2)
                }
            })
            .collect()
    }

    pub fn psi(&self) -> Vec<f64> {
        self.samples.iter().map(|s| cdelta(self.delta, s.r) * s.z_tan).collect()
    }

    pub fn phi_psi(&self) -> Result<PhiPsi> {
        let phi = self.phi();
        let psi = self.psi();
        let w = || self.samples.iter().map(|s| s.weight);
        Ok(PhiPsi {
            phi_l2: lp_norm_weighted(w(), &phi, 2.0)?,
            phi_inf: lp_norm_weighted(w(), &phi, f64::INFINITY)?,
            psi_l2: lp_norm_weighted(w(), &psi, 2.0)?,
            psi_inf: lp_norm_weighted(w(), &psi, f64::INFINITY)?,
            phi,
            psi,
        })
    }

    /// The explicit bound chains for `||phi||_2^2` and `||psi||_2^2`,
    /// evaluated on the unit-volume rescaling.
    pub fn l2_bounds(&self, p: f64) -> Result<L2Bounds> {
        let unit = self.unit_volume()?;
        let d = unit.delta;
        let big_r = unit.radius;
        let pp = unit.phi_psi()?;
        let (phi_lhs, psi_lhs) = (pp.phi_l2 * pp.phi_l2, pp.psi_l2 * pp.psi_l2);
        let s_r = sdelta(d, big_r);
        let c_r = cdelta(d, big_r);
        let t_r = tdelta(d, big_r)?;
        let int_c = unit.integrate(|s| cdelta(d, s.r));
        let gaps = unit.gaps(p)?;
        let (pinch, phi_rhs, psi_rhs, applicable) = if d < 0.0 {
            let h_inf = unit.h_norm(f64::INFINITY)?;
            let c = gaps.gap_inf;
            let alpha = gaps.alpha.unwrap_or(f64::NAN);
            (
                c,
                s_r * s_r * (c * c + 2.0 * c / h_inf),
                c_r * c_r * (s_r * s_r - int_c * int_c / (h_inf * h_inf)),
                c <= alpha,
            )
        } else {
            let h_2p = unit.h_norm(2.0 * p)?;
            let c = t_r - 1.0 / h_2p;
            let core = t_r * t_r - 1.0 / (h_2p * h_2p);
            (
                c,
                s_r * s_r * int_c * int_c * core,
                c_r * c_r * core * int_c * int_c,
                c < 1.0,
            )
        };
        let check = |lhs: f64, rhs: f64| BoundCheck {
            lhs,
            rhs,
            slack: applicable.then_some(rhs - lhs),
        };
        Ok(L2Bounds {
            pinching_constant: pinch,
            phi: check(phi_lhs, phi_rhs),
            psi: check(psi_lhs, psi_rhs),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusGaps {
    pub gap_inf: f64,
    /// `delta >= 0` only.
    pub gap_2p: Option<f64>,
    /// `delta < 0` only.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PhiPsi {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi_l2: f64,
    pub phi_inf: f64,
    pub psi_l2: f64,
    pub psi_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; `None` when the pinching hypothesis fails and the
    /// bound does not apply.
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Bounds {
    /// Measured pinching constant `C` at unit volume.
    pub pinching_constant: f64,
    pub phi: BoundCheck,
    pub psi: BoundCheck,
}

/// `int (c_delta(r) + <Z, H_vec>) dv`, zero for closed hypersurfaces.
pub fn minkowski_residual(s: &SurfaceSampling, ball: &EnclosingBall) -> Result<f64> {
    Ok(RadialProfile::new(s, ball)?.minkowski_residual())
}

/// `delta int |Z^T|^2 - n int (c^2 - |H| c s)`, nonnegative.
pub fn lemma21ii_slack(s: &SurfaceSampling, ball: &EnclosingBall) -> Result<f64> {
    Ok(RadialProfile::new(s, ball)?.lemma21ii_slack())
}

pub fn radius_gaps(s: &SurfaceSampling, ball: &EnclosingBall, p: f64) -> Result<RadiusGaps> {
    RadialProfile::new(s, ball)?.gaps(p)
}

pub fn phi_psi(s: &SurfaceSampling, ball: &EnclosingBall) -> Result<PhiPsi> {
    RadialProfile::new(s, ball)?.phi_psi()
}

pub fn l2_bound_checks(s: &SurfaceSampling, ball: &EnclosingBall, p: f64) -> Result<L2Bounds> {
    RadialProfile::new(s, ball)?.l2_bounds(p)
}

/// Geodesic distance from a squared chord `<y - x, y - x>` in the ambient
/// form.
fn chord_to_distance(sf: &SpaceForm, chord2: f64) -> f64 {
    let c = chord2.max(0.0).sqrt();
    let k = sf.k();
    if sf.delta() == 0.0 {
        c
    } else if sf.delta() > 0.0 {
        2.0 / k * (0.5 * k * c).min(1.0).asin()
    } else {
        2.0 / k * (0.5 * k * c).asinh()
    }
}

/// Parameter seeds for nearest-point searches: a fixed coarse grid, so the
/// brute-force stage does not grow with the sampling resolution.
struct Seeds {
    u: Vec<Vec<f64>>,
    x: Vec<AmbientPoint>,
}

const SEED_RESOLUTION: usize = 32;

impl Seeds {
    fn new(s: &SurfaceSampling) -> Self {
        let n = s.space_form.hypersurface_dim();
        let grid = Quadrature {
            resolution: SEED_RESOLUTION.min(s.quadrature.resolution),
        }
        .grid(n);
        let u: Vec<Vec<f64>> = grid.into_iter().map(|(u, _)| u).collect();
        let x = u.iter().map(|u| DVector::from_vec(s.immersion.eval(u))).collect();
        Self { u, x }
    }
}

/// Distance from `y` to the immersed surface: nearest seed, then a
/// damped Gauss-Newton refinement of the squared chord over the parameter.
fn distance_to_surface(s: &SurfaceSampling, seeds: &Seeds, y: &AmbientPoint) -> f64 {
    let sf = &s.space_form;
    let mut best = 0;
    let mut key = f64::NEG_INFINITY;
    for (i, x) in seeds.x.iter().enumerate() {
        let c = sf.closeness(y, x);
        if c > key {
            key = c;
            best = i;
        }
    }
    let chord = |x: &DVector<f64>| {
        let e = x - y;
        sf.inner(&e, &e)
    };
    let imm = s.immersion.as_ref();
    let mut u = seeds.u[best].clone();
    let mut f = chord(&seeds.x[best]);
    let mut mu = 1e-3;
    for _ in 0..30 {
        let jet = imm.jet(&u).unwrap_or_else(|| fd_jet(imm, &u));
        let e = &jet.x - y;
        let n = u.len();
        let g = nalgebra::DMatrix::from_fn(n, n, |i, j| sf.inner(&jet.d1[i], &jet.d1[j]));
        let grad = DVector::from_fn(n, |i, _| sf.inner(&jet.d1[i], &e));
        if grad.norm() < 1e-15 {
            break;
        }
        let mut improved = false;
        for _ in 0..10 {
            let mut a = g.clone();
            for i in 0..n {
                a[(i, i)] += mu * (1.0 + g[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else { break };
            let cand: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let fx = chord(&DVector::from_vec(imm.eval(&cand)));
            if fx < f {
                let gain = f - fx;
                u = cand;
                f = fx;
                mu = (mu * 0.3).max(1e-12);
                improved = gain > 1e-18;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    chord_to_distance(sf, f)
}

/// Points of `S(p0, R)` on the product grid of the given resolution.
pub fn sphere_grid(sf: &SpaceForm, ball: &EnclosingBall, resolution: usize) -> Result<Vec<AmbientPoint>> {
    let basis = sf.tangent_basis(&ball.center);
    let n = sf.hypersurface_dim();
    Quadrature { resolution }
        .grid(n)
        .into_iter()
        .map(|(u, _)| {
            let dir = unit_sphere_point(&u);
            let mut v = DVector::zeros(sf.coord_len());
            for (c, b) in dir.iter().zip(&basis) {
                v.axpy(*c, b, 1.0);
            }
            sf.exp(&ball.center, &(v * ball.radius))
        })
        .collect()
}

/// Upper estimate of `d_H(phi(M), S(p0, R))`. The sphere-to-surface half is
/// sampled on a grid that is doubled until it changes by less than `1e-4`
/// (at most twice).
pub fn hausdorff_to_sphere(s: &SurfaceSampling, ball: &EnclosingBall, sphere_resolution: usize) -> Result<f64> {
    let profile = RadialProfile::new(s, ball)?;
    let inner = profile
        .samples
        .iter()
        .fold(0.0f64, |m, smp| m.max((ball.radius - smp.r).abs()));
    let sf = &s.space_form;
    let seeds = Seeds::new(s);
    let outer_at = |res: usize| -> Result<f64> {
        let grid = sphere_grid(sf, ball, res)?;
        Ok(grid
            .par_iter()
            .map(|y| distance_to_surface(s, &seeds, y))
            .reduce(|| 0.0, f64::max))
    };
    let mut res = sphere_resolution.max(2);
    let mut outer = outer_at(res)?;
    for _ in 0..2 {
        res *= 2;
        let next = outer_at(res)?;
        let change = (next - outer).abs();
        outer = outer.max(next);
        if change < 1e-4 {
            break;
        }
    }
    Ok(inner.max(outer))
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_point_sets(sf: &SpaceForm, a: &[AmbientPoint], b: &[AmbientPoint]) -> Result<f64> {
    let one_sided = |from: &[AmbientPoint], to: &[AmbientPoint]| -> Result<f64> {
        from.par_iter()
            .map(|x| {
                let nearest = to
                    .iter()
                    .max_by(|p, q| sf.closeness(x, p).total_cmp(&sf.closeness(x, q)))
                    .ok_or(LabError::TooFewPoints { needed: 1, got: 0 })?;
                sf.distance(x, nearest)
            })
            .try_reduce(|| 0.0, |m, d| Ok(m.max(d)))
    };
    Ok(one_sided(a, b)?.max(one_sided(b, a)?))
}

/// One row of diagnostics for a sampled surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchReport {
    pub delta: f64,
    pub n: usize,
    pub volume: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "H_inf")]
    pub h_inf: f64,
    pub p: f64,
    #[serde(rename = "H_2p")]
    pub h_2p: f64,
    #[serde(rename = "B_inf")]
    pub b_inf: f64,
    pub gap_inf: f64,
    pub gap_2p: Option<f64>,
    pub alpha: Option<f64>,
    pub minkowski_residual: f64,
    pub lemma21ii_slack: f64,
    pub phi_l2: f64,
    pub phi_inf: f64,
    pub psi_l2: f64,
    pub psi_inf: f64,
    pub phi_slack: Option<f64>,
    pub psi_slack: Option<f64>,
    pub hausdorff: Option<f64>,
    pub distortion: Option<f64>,
}

/// Options for [`PinchReport::compute`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Exponent for `||H||_{2p}`.
    pub p: f64,
    /// Resolution of the geodesic-sphere grid for the Hausdorff estimate;
    /// `None` skips it.
    pub sphere_resolution: Option<usize>,
    /// Report the unit-volume rescaling instead of the raw surface.
    pub normalize: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            p: 1.0,
            sphere_resolution: Some(32),
            normalize: false,
        }
    }
}

impl PinchReport {
    /// All diagnostics except the projection distortion, which is scale
    /// invariant and filled in by the caller.
    pub fn compute(s: &SurfaceSampling, ball: &EnclosingBall, opts: &ReportOptions) -> Result<Self> {
        let raw = RadialProfile::new(s, ball)?;
        let (profile, lambda) = if opts.normalize {
            let hom = Homothety::new(raw.n, raw.delta, raw.volume(), raw.radius)?;
            (raw.rescaled(hom.scale), hom.scale)
        } else {
            (raw, 1.0)
        };
        let p = opts.p;
        let gaps = profile.gaps(p)?;
        let pp = profile.phi_psi()?;
        let bounds = profile.l2_bounds(p)?;
        let hausdorff = opts
            .sphere_resolution
            .map(|res| hausdorff_to_sphere(s, ball, res).map(|d| d * lambda))
            .transpose()?;
        let b_inf = s.samples.iter().fold(0.0f64, |m, x| m.max(x.b_frobenius())) / lambda;
        Ok(Self {
            delta: profile.delta,
            n: profile.n,
            volume: profile.volume(),
            radius: profile.radius,
            h_inf: profile.h_norm(f64::INFINITY)?,
            p,
            h_2p: profile.h_norm(2.0 * p)?,
            b_inf,
            gap_inf: gaps.gap_inf,
            gap_2p: gaps.gap_2p,
            alpha: gaps.alpha,
            minkowski_residual: profile.minkowski_residual(),
            lemma21ii_slack: profile.lemma21ii_slack(),
            phi_l2: pp.phi_l2,
            phi_inf: pp.phi_inf,
            psi_l2: pp.psi_l2,
            psi_inf: pp.psi_inf,
            phi_slack: bounds.phi.slack,
            psi_slack: bounds.psi.slack,
            hausdorff,
            distortion: None,
        })
    }
}
