//! Extrinsic radius: the smallest closed geodesic ball containing a finite
//! set of model points.
//!
//! [`min_enclosing_ball`] is the production solver (interior point, with a
//! dual certificate). [`farthest_point_iteration`] is the classical
//! Riemannian farthest-point scheme, and [`enclosing_ball_oracle`] an
//! independent compass-search reference used in tests.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::spaceform::{AmbientPoint, SpaceForm, TangentVector};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;
/// Largest cloud accepted by [`enclosing_ball_oracle`].
pub const ORACLE_MAX_POINTS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnclosingBall {
    #[serde(serialize_with = "ser_point")]
    pub center: AmbientPoint,
    pub radius: f64,
    pub iterations: usize,
    /// Radius gap certified at exit (barrier solver), or the last center
    /// movement (farthest-point iteration).
    pub residual: f64,
}

fn ser_point<S: serde::Serializer>(p: &AmbientPoint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.iter())
}

impl EnclosingBall {
    /// Largest distance from the center to any of `points`.
    pub fn cover_radius(&self, sf: &SpaceForm, points: &[AmbientPoint]) -> Result<f64> {
        max_distance(sf, &self.center, points).map(|(r, _)| r)
    }
}

fn max_distance(sf: &SpaceForm, c: &AmbientPoint, points: &[AmbientPoint]) -> Result<(f64, usize)> {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let d = sf.distance(c, p)?;
        if d.is_nan() {
            return Ok((f64::INFINITY, i));
        }
        if d > best.0 {
            best = (d, i);
        }
    }
    Ok(best)
}

/// Index of the point farthest from `c`; ties go to the lowest index.
fn farthest(sf: &SpaceForm, c: &AmbientPoint, points: &[AmbientPoint]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let key = sf.closeness(c, p);
        if key < best.0 {
            best = (key, i);
        }
    }
    best.1
}

fn validate(sf: &SpaceForm, points: &[AmbientPoint]) -> Result<()> {
    if points.len() < 2 {
        return Err(LabError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    points.iter().try_for_each(|p| sf.check_point(p))
}

fn hemisphere_error(sf: &SpaceForm, radius: f64) -> LabError {
    LabError::Hemisphere(format!(
        "points do not fit in an open hemisphere (radius {radius} vs {})",
        sf.hemisphere_radius()
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Model {
    Flat,
    Sphere,
    Hyperbolic,
}

/// Log-barrier formulation of the 1-center problem in the unit model,
/// over `z = (c, t)`:
///
/// * flat: `|c - q_i|^2 <= t`;
/// * sphere: `-c.q_i <= t`, `|c|^2 <= 1` (`t = -cos(kR)` at the optimum);
/// * hyperbolic: `-<c, q_i> <= t`, `sqrt(1 + |c_s|^2) <= c_t`
///   (`t = cosh(kR)`).
///
/// All three are convex programs minimizing `t`.
struct Barrier<'a> {
    model: Model,
    q: &'a [DVector<f64>],
    /// `G q_i`: the ambient form applied to each point.
    gq: Vec<DVector<f64>>,
    dim: usize,
}

impl Barrier<'_> {
    fn point_constraint(&self, z: &DVector<f64>, i: usize) -> f64 {
        let t = z[self.dim];
        match self.model {
            Model::Flat => {
                let mut s = 0.0;
                for a in 0..self.dim {
                    let d = z[a] - self.q[i][a];
                    s += d * d;
                }
                s - t
            }
            _ => {
                let mut s = 0.0;
                for a in 0..self.dim {
                    s += z[a] * self.gq[i][a];
                }
                -s - t
            }
        }
    }

    fn extra_constraint(&self, z: &DVector<f64>) -> Option<f64> {
        let c = z.rows(0, self.dim);
        match self.model {
            Model::Flat => None,
            Model::Sphere => Some(c.norm_squared() - 1.0),
            Model::Hyperbolic => {
                let cs = c.rows(0, self.dim - 1);
                Some((1.0 + cs.norm_squared()).sqrt() - c[self.dim - 1])
            }
        }
    }

    fn feasible(&self, z: &DVector<f64>) -> bool {
        (0..self.q.len()).all(|i| self.point_constraint(z, i) < 0.0)
            && self.extra_constraint(z).is_none_or(|g| g < 0.0)
    }

    fn value(&self, z: &DVector<f64>, tau: f64) -> f64 {
        let mut f = tau * z[self.dim];
        for i in 0..self.q.len() {
            f -= (-self.point_constraint(z, i)).ln();
        }
        if let Some(g) = self.extra_constraint(z) {
            f -= (-g).ln();
        }
        f
    }

    /// Gradient and Hessian of `tau t - sum log(-g_i)`.
    fn newton_system(&self, z: &DVector<f64>, tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let m = self.dim + 1;
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);
        grad[self.dim] = tau;
        let mut gg = DVector::zeros(m);
        for i in 0..self.q.len() {
            let slack = -self.point_constraint(z, i);
            match self.model {
                Model::Flat => {
                    for a in 0..self.dim {
                        gg[a] = 2.0 * (z[a] - self.q[i][a]);
                    }
                    for a in 0..self.dim {
                        hess[(a, a)] += 2.0 / slack;
                    }
                }
                _ => {
                    for a in 0..self.dim {
                        gg[a] = -self.gq[i][a];
                    }
                }
            }
            gg[self.dim] = -1.0;
            grad.axpy(1.0 / slack, &gg, 1.0);
            hess.ger(1.0 / (slack * slack), &gg, &gg, 1.0);
        }
        if let Some(g) = self.extra_constraint(z) {
            let slack = -g;
            gg.fill(0.0);
            match self.model {
                Model::Sphere => {
                    for a in 0..self.dim {
                        gg[a] = 2.0 * z[a];
                        hess[(a, a)] += 2.0 / slack;
                    }
                }
                Model::Hyperbolic => {
                    let s = self.dim - 1;
                    let cs = z.rows(0, s).into_owned();
                    let rho = (1.0 + cs.norm_squared()).sqrt();
                    for a in 0..s {
                        gg[a] = cs[a] / rho;
                        for b in 0..s {
                            let id = if a == b { 1.0 } else { 0.0 };
                            hess[(a, b)] += (id - cs[a] * cs[b] / (rho * rho)) / rho / slack;
                        }
                    }
                    gg[s] = -1.0;
                }
                Model::Flat => unreachable!(),
            }
            grad.axpy(1.0 / slack, &gg, 1.0);
            hess.ger(1.0 / (slack * slack), &gg, &gg, 1.0);
        }
        (grad, hess)
    }

    /// Lower bound from the exact equidistance weights of `support`;
    /// weights are clipped to the simplex, so the bound stays valid when
    /// the support is wrong.
    fn polished_dual(&self, support: &[usize]) -> f64 {
        let k = support.len();
        let weights: Vec<f64> = match self.model {
            Model::Flat => {
                let q0 = &self.q[support[0]];
                let d: Vec<DVector<f64>> = support[1..].iter().map(|&i| &self.q[i] - q0).collect();
                let g = DMatrix::from_fn(k - 1, k - 1, |a, b| d[a].dot(&d[b]));
                let rhs = DVector::from_fn(k - 1, |a, _| 0.5 * d[a].norm_squared());
                let Ok(mu) = g.svd(true, true).solve(&rhs, 1e-13) else {
                    return 0.0;
                };
                std::iter::once(1.0 - mu.sum()).chain(mu.iter().cloned()).collect()
            }
            _ => {
                let sign = if self.model == Model::Hyperbolic { -1.0 } else { 1.0 };
                let g = DMatrix::from_fn(k, k, |a, b| sign * self.q[support[a]].dot(&self.gq[support[b]]));
                let Ok(mu) = g.svd(true, true).solve(&DVector::from_element(k, 1.0), 1e-13) else {
                    return 0.0;
                };
                mu.iter().cloned().collect()
            }
        };
        let clipped: Vec<(usize, f64)> = support.iter().zip(&weights).map(|(&i, &w)| (i, w.max(0.0))).collect();
        if !clipped.iter().any(|l| l.1 > 0.0) {
            return 0.0;
        }
        self.dual_radius(&clipped)
    }

    /// Radius (unit model) of the ball about the center in `z` covering
    /// the working set.
    fn cover_radius(&self, z: &DVector<f64>) -> f64 {
        let c = z.rows(0, self.dim).into_owned();
        let c = match self.model {
            Model::Flat => c,
            Model::Sphere => &c / c.norm(),
            Model::Hyperbolic => {
                let last = self.dim - 1;
                let m = (c[last] * c[last] - c.rows(0, last).norm_squared()).max(f64::MIN_POSITIVE);
                &c / m.sqrt()
            }
        };
        let mut worst = 0.0f64;
        for (q, gq) in self.q.iter().zip(&self.gq) {
            let d = match self.model {
                Model::Flat => (&c - q).norm(),
                Model::Sphere => c.dot(q).clamp(-1.0, 1.0).acos(),
                Model::Hyperbolic => (-c.dot(gq)).max(1.0).acosh(),
            };
            worst = worst.max(d);
        }
        worst
    }

    /// Radius lower bound (unit model) from any point of the simplex,
    /// by weak duality.
    fn dual_radius(&self, lambda: &[(usize, f64)]) -> f64 {
        let total: f64 = lambda.iter().map(|(_, l)| l).sum();
        let mut y = DVector::zeros(self.dim);
        let mut a = 0.0;
        for &(i, l) in lambda {
            y.axpy(l / total, &self.q[i], 1.0);
            a += l / total * self.q[i].norm_squared();
        }
        match self.model {
            Model::Flat => (a - y.norm_squared()).max(0.0).sqrt(),
            Model::Sphere => y.norm().min(1.0).acos(),
            Model::Hyperbolic => {
                let last = self.dim - 1;
                let m = y[last] * y[last] - y.rows(0, last).norm_squared();
                m.max(1.0).sqrt().acosh()
            }
        }
    }
}

/// Points added to the working set per round.
const WORKING_SET_BATCH: usize = 8;
const MAX_ROUNDS: usize = 1000;

/// Minimal enclosing geodesic ball, certified to `tol` in radius
/// (relative to `max(1, R)`).
///
/// A working-set scheme: the ball of a small subset `W` is solved as a
/// convex program by a log-barrier method with damped Newton steps; then
/// the farthest points outside it join `W`. The multipliers `1 / slack_i`
/// of the barrier give a lower bound for the radius of `W` (hence of the
/// full set) by weak duality, and the true cover radius of the current
/// center an upper bound; the loop stops once they agree to `tol`. Neither
/// the Newton step count nor the working-set size degrades when many
/// points are nearly equidistant from the center, as happens for dense
/// samples of near-spherical surfaces.
pub fn min_enclosing_ball(sf: &SpaceForm, points: &[AmbientPoint], tol: f64) -> Result<EnclosingBall> {
    validate(sf, points)?;
    let delta = sf.delta();
    let model = if delta == 0.0 {
        Model::Flat
    } else if delta > 0.0 {
        Model::Sphere
    } else {
        Model::Hyperbolic
    };
    let dim = sf.coord_len();
    let ia = farthest(sf, &points[0], points);
    let ib = farthest(sf, &points[ia], points);
    let mid = sf.exp(&points[ia], &(sf.log(&points[ia], &points[ib])? * 0.5))?;
    // flat points are centered on the farthest-pair midpoint and scaled by
    // its radius, curved ones scaled to the unit model
    let (shift, scale) = match model {
        Model::Flat => {
            let r0 = max_distance(sf, &mid, points)?.0.max(f64::MIN_POSITIVE);
            (mid.clone(), r0)
        }
        _ => (DVector::zeros(dim), 1.0 / sf.k()),
    };
    let q: Vec<DVector<f64>> = points.iter().map(|p| (p - &shift) / scale).collect();
    let r_scale = match model {
        Model::Flat => scale,
        _ => 1.0 / sf.k(),
    };
    let to_center = |c: &DVector<f64>| -> Result<AmbientPoint> {
        match model {
            Model::Flat => Ok(c * scale + &shift),
            Model::Sphere if c.norm() < 1e-12 => Err(LabError::Antipodal),
            _ => Ok(sf.project_point(&(c * scale))),
        }
    };

    let mut working: Vec<usize> = if ia == ib { vec![ia] } else { vec![ia.min(ib), ia.max(ib)] };
    let mut c = match model {
        Model::Flat => DVector::zeros(dim),
        _ => &mid / scale,
    };
    let mut iterations = 0;
    let mut best: Option<EnclosingBall> = None;
    let mut best_lower = 0.0f64;
    for _round in 0..MAX_ROUNDS {
        let wq: Vec<DVector<f64>> = working.iter().map(|&i| q[i].clone()).collect();
        let (cw, lower, steps) = solve_barrier(model, &wq, &c, tol)?;
        iterations += steps;
        c = cw;
        let center = to_center(&c)?;
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            dist.push((sf.distance(&center, p)?, i));
        }
        let radius = dist.iter().fold(0.0f64, |m, d| m.max(d.0));
        best_lower = best_lower.max(lower * r_scale);
        let residual = (radius - best_lower).max(0.0);
        if let Some(b) = best.as_mut() {
            b.residual = (b.radius - best_lower).max(0.0);
        }
        if best.as_ref().is_none_or(|b| radius < b.radius) {
            best = Some(EnclosingBall {
                center,
                radius,
                iterations,
                residual,
            });
        }
        if best.as_ref().is_some_and(|b| b.residual <= tol * b.radius.max(1.0)) {
            break;
        }
        // farthest points outside the working set; ties by index
        dist.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let before = working.len();
        for &(_, i) in dist.iter() {
            if working.len() - before >= WORKING_SET_BATCH {
                break;
            }
            if !working.contains(&i) {
                working.push(i);
            }
        }
        if working.len() == before {
            break;
        }
        working.sort_unstable();
    }
    let mut ball = best.expect("at least one round");
    ball.iterations = iterations;
    if ball.radius >= sf.hemisphere_radius() * (1.0 - 1e-12) {
        return Err(hemisphere_error(sf, ball.radius));
    }
    if ball.residual > tol * ball.radius.max(1.0) {
        return Err(LabError::NonConvergence { best: Box::new(ball) });
    }
    Ok(ball)
}

/// Barrier path-following on one working set, started from center `c0`.
/// Returns the final center (unit-model coordinates), the best dual lower
/// bound on the radius (unit model), and the number of Newton steps.
fn solve_barrier(model: Model, q: &[DVector<f64>], c0: &DVector<f64>, tol: f64) -> Result<(DVector<f64>, f64, usize)> {
    let dim = c0.len();
    let gq = q
        .iter()
        .map(|v| {
            let mut w = v.clone();
            if model == Model::Hyperbolic {
                w[dim - 1] = -w[dim - 1];
            }
            w
        })
        .collect();
    let bar = Barrier { model, q, gq, dim };
    let mut z = DVector::zeros(dim + 1);
    let start = match model {
        Model::Flat => c0.clone(),
        Model::Sphere => c0 * (0.99 / c0.norm().max(1e-300)),
        Model::Hyperbolic => {
            let last = dim - 1;
            let mut c = c0.clone();
            c[last] = (1.0 + c.rows(0, last).norm_squared()).sqrt() * 1.01;
            c
        }
    };
    z.rows_mut(0, dim).copy_from(&start);
    let worst = (0..q.len()).map(|i| bar.point_constraint(&z, i)).fold(f64::NEG_INFINITY, f64::max);
    z[dim] = worst + 0.5 * (1.0 + worst.abs());

    let mut tau = 1.0;
    let mut steps = 0;
    let mut lower = 0.0f64;
    for _stage in 0..60 {
        for _ in 0..100 {
            let (grad, hess) = bar.newton_system(&z, tau);
            let step = match hess.clone().cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => match hess.lu().solve(&grad) {
                    Some(s) => -s,
                    None => break,
                },
            };
            let decrement = -grad.dot(&step);
            if !(decrement > 1e-14) {
                break;
            }
            steps += 1;
            let f0 = bar.value(&z, tau);
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-14 {
                let cand = &z + &step * s;
                if bar.feasible(&cand) && bar.value(&cand, tau) <= f0 - 0.25 * s * decrement {
                    z = cand;
                    moved = true;
                    break;
                }
                s *= 0.5;
            }
            if !moved || decrement < 1e-10 || decrement < 1e-14 * f0.abs() {
                break;
            }
        }
        let slacks: Vec<f64> = (0..q.len()).map(|i| -bar.point_constraint(&z, i)).collect();
        let lambda: Vec<(usize, f64)> = slacks.iter().enumerate().map(|(i, s)| (i, 1.0 / s)).collect();
        lower = lower.max(bar.dual_radius(&lambda));
        let mut order: Vec<usize> = (0..q.len()).collect();
        order.sort_by(|&a, &b| slacks[a].total_cmp(&slacks[b]));
        for k in 2..=order.len().min(dim + 3) {
            lower = lower.max(bar.polished_dual(&order[..k]));
        }
        let upper = bar.cover_radius(&z);
        let smallest = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
        if upper - lower <= 0.1 * tol * upper.max(1.0) || smallest < 1e-14 {
            break;
        }
        tau *= 8.0;
    }
    Ok((z.rows(0, dim).into_owned(), lower, steps))
}

/// Riemannian farthest-point iteration
/// `p_{k+1} = exp_{p_k}(log_{p_k}(far) / (k + 2))`, stopping when the
/// center moves less than `tol`. Simple but sublinear: the step is the
/// movement, so `tol` is reached after about `R / tol` iterations.
pub fn farthest_point_iteration(
    sf: &SpaceForm,
    points: &[AmbientPoint],
    tol: f64,
    max_iter: usize,
) -> Result<EnclosingBall> {
    validate(sf, points)?;
    let ia = farthest(sf, &points[0], points);
    let ib = farthest(sf, &points[ia], points);
    let mut c = sf.exp(&points[ia], &(sf.log(&points[ia], &points[ib])? * 0.5))?;
    let mut best = (max_distance(sf, &c, points)?.0, c.clone());
    let mut movement = f64::INFINITY;
    let mut it = 0;
    while it < max_iter {
        let f = farthest(sf, &c, points);
        let step = sf.log(&c, &points[f])? / (it as f64 + 2.0);
        movement = sf.norm(&step);
        c = sf.exp(&c, &step)?;
        it += 1;
        let r = max_distance(sf, &c, points)?.0;
        if r < best.0 {
            best = (r, c.clone());
        }
        if movement < tol {
            break;
        }
    }
    let ball = EnclosingBall {
        center: best.1,
        radius: best.0,
        iterations: it,
        residual: movement,
    };
    if ball.radius >= sf.hemisphere_radius() {
        return Err(hemisphere_error(sf, ball.radius));
    }
    if movement >= tol {
        return Err(LabError::NonConvergence { best: Box::new(ball) });
    }
    Ok(ball)
}

/// Independent reference solver for tests: geodesic midpoint of the
/// farthest pair, refined by compass search in the tangent space of the
/// current center (axis, diagonal and seeded random directions) with step
/// halving.
pub fn enclosing_ball_oracle(sf: &SpaceForm, points: &[AmbientPoint]) -> Result<EnclosingBall> {
    validate(sf, points)?;
    if points.len() > ORACLE_MAX_POINTS {
        return Err(LabError::Domain(format!(
            "oracle takes at most {ORACLE_MAX_POINTS} points, got {}",
            points.len()
        )));
    }
    let ia = farthest(sf, &points[0], points);
    let ib = farthest(sf, &points[ia], points);
    let mut c = sf.exp(&points[ia], &(sf.log(&points[ia], &points[ib])? * 0.5))?;
    let mut r = max_distance(sf, &c, points)?.0;
    let mut step = r.max(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bad_cafe);
    let mut iterations = 0;
    let m = sf.n_ambient();
    let mut pattern: Vec<Vec<f64>> = Vec::new();
    if m <= 4 {
        let total = 3usize.pow(m as u32);
        for code in 0..total {
            let mut v = Vec::with_capacity(m);
            let mut c = code;
            for _ in 0..m {
                v.push((c % 3) as f64 - 1.0);
                c /= 3;
            }
            if v.iter().any(|x| *x != 0.0) {
                pattern.push(v);
            }
        }
    } else {
        for i in 0..m {
            for s in [-1.0, 1.0] {
                let mut v = vec![0.0; m];
                v[i] = s;
                pattern.push(v);
            }
        }
    }
    while step > 1e-12 * r.max(1.0) {
        iterations += 1;
        let basis = sf.tangent_basis(&c);
        let mut dirs: Vec<TangentVector> = pattern
            .iter()
            .chain(&(0..24).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect::<Vec<Vec<f64>>>())
            .map(|d| {
                let mut v = DVector::zeros(sf.coord_len());
                for (coef, b) in d.iter().zip(&basis) {
                    v.axpy(*coef, b, 1.0);
                }
                v
            })
            .collect();
        // Sums of unit directions toward nearly active points: these follow
        // the ridges where a fixed pattern stalls.
        let mut near: Vec<(f64, TangentVector)> = Vec::new();
        for p in points {
            let d = sf.distance(&c, p)?;
            if d >= r - 2.0 * step && d > 0.0 {
                near.push((d, sf.log(&c, p)? / d));
            }
        }
        near.sort_by(|a, b| b.0.total_cmp(&a.0));
        near.truncate(8);
        for i in 0..near.len() {
            dirs.push(near[i].1.clone());
            for j in i + 1..near.len() {
                dirs.push(&near[i].1 + &near[j].1);
                for l in j + 1..near.len() {
                    dirs.push(&near[i].1 + &near[j].1 + &near[l].1);
                }
            }
        }
        let units: Vec<TangentVector> = near.iter().map(|(_, u)| u.clone()).collect();
        if let Some(w) = min_norm_hull_point(sf, &units) {
            dirs.push(w);
        }
        let mut best: Option<(f64, AmbientPoint)> = None;
        for v in dirs {
            // near-zero directions carry round-off off the tangent space
            let v = sf.project_tangent(&c, &v);
            let nv = sf.norm(&v);
            if !(nv > 0.0 && nv.is_finite()) {
                continue;
            }
            let cand = sf.exp(&c, &(v * (step / nv)))?;
            if !cand.iter().all(|x| x.is_finite()) {
                continue;
            }
            let rc = max_distance(sf, &cand, points)?.0;
            if rc < best.as_ref().map_or(r, |b| b.0) {
                best = Some((rc, cand));
            }
        }
        match best {
            Some((rc, cand)) if r - rc > 1e-15 * r.max(1.0) => {
                r = rc;
                c = cand;
            }
            _ => step *= 0.5,
        }
    }
    if r >= sf.hemisphere_radius() {
        return Err(hemisphere_error(sf, r));
    }
    Ok(EnclosingBall {
        center: c,
        radius: r,
        iterations,
        residual: step,
    })
}

/// Minimum-norm point of the convex hull of `vs`, by enumerating affine
/// subsets of up to four vectors.
fn min_norm_hull_point(sf: &SpaceForm, vs: &[TangentVector]) -> Option<TangentVector> {
    let n = vs.len();
    let mut best: Option<(f64, TangentVector)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if idx.len() > 4 {
            continue;
        }
        let m = idx.len();
        let mut sys = nalgebra::DMatrix::zeros(m + 1, m + 1);
        let mut rhs = DVector::zeros(m + 1);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sys[(a, b)] = sf.inner(&vs[i], &vs[j]);
            }
            sys[(a, m)] = 1.0;
            sys[(m, a)] = 1.0;
        }
        rhs[m] = 1.0;
        let Some(sol) = sys.lu().solve(&rhs) else { continue };
        if (0..m).any(|a| !(sol[a] >= -1e-12)) {
            continue;
        }
        let mut w = DVector::zeros(vs[0].len());
        for (a, &i) in idx.iter().enumerate() {
            w.axpy(sol[a], &vs[i], 1.0);
        }
        let nw = sf.inner(&w, &w);
        if best.as_ref().is_none_or(|b| nw < b.0) {
            best = Some((nw, w));
        }
    }
    best.map(|b| b.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat(coords: &[[f64; 3]]) -> Vec<AmbientPoint> {
        coords.iter().map(|c| DVector::from_row_slice(c)).collect()
    }

    fn random_cloud(sf: &SpaceForm, n: usize, spread: f64, seed: u64) -> Vec<AmbientPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = sf.n_ambient();
        (0..n)
            .map(|_| {
                let dir: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let nd = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let dir: Vec<f64> = dir.iter().map(|v| v / nd).collect();
                sf.point_from_origin(&dir, spread * rng.random_range(0.0f64..1.0).cbrt())
            })
            .collect()
    }

    #[test]
    fn two_points_give_midpoint() {
        let sf = SpaceForm::new(0.0, 3).unwrap();
        let pts = flat(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
        for ball in [min_enclosing_ball(&sf, &pts, DEFAULT_TOL).unwrap(), enclosing_ball_oracle(&sf, &pts).unwrap()] {
            assert_relative_eq!(ball.radius, 1.0, epsilon = 1e-9);
            assert!(ball.center.norm() < 1e-9);
        }
    }

    #[test]
    fn equilateral_triangle_and_tetrahedron() {
        let sf = SpaceForm::new(0.0, 3).unwrap();
        let h = 3f64.sqrt() / 2.0;
        let tri = flat(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]]);
        let expect = 1.0 / 3f64.sqrt();
        assert_relative_eq!(min_enclosing_ball(&sf, &tri, DEFAULT_TOL).unwrap().radius, expect, epsilon = 1e-9);
        assert_relative_eq!(enclosing_ball_oracle(&sf, &tri).unwrap().radius, 0.577_350_3, epsilon = 1e-7);

        let s = 1.0 / 8f64.sqrt();
        let tet = flat(&[[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]);
        let ball = min_enclosing_ball(&sf, &tet, DEFAULT_TOL).unwrap();
        assert_relative_eq!(ball.radius, (3.0f64 / 8.0).sqrt(), epsilon = 1e-9);
        assert_relative_eq!(enclosing_ball_oracle(&sf, &tet).unwrap().radius, 0.612_372_4, epsilon = 1e-7);
    }

    #[test]
    fn hyperbolic_geodesic_sphere_about_offset_center() {
        let sf = SpaceForm::new(-1.0, 3).unwrap();
        let q = sf.point_from_origin(&[0.6, 0.0, 0.8], 0.9);
        let basis = sf.tangent_basis(&q);
        let mut pts = Vec::new();
        for i in 0..12 {
            for j in 0..24 {
                let t = std::f64::consts::PI * (i as f64 + 0.5) / 12.0;
                let p = std::f64::consts::PI * j as f64 / 12.0;
                let v = &basis[0] * (t.sin() * p.cos()) + &basis[1] * (t.sin() * p.sin()) + &basis[2] * t.cos();
                pts.push(sf.exp(&q, &(v * 0.8)).unwrap());
            }
        }
        let ball = min_enclosing_ball(&sf, &pts, DEFAULT_TOL).unwrap();
        assert_relative_eq!(ball.radius, 0.8, epsilon = 1e-6);
        assert!(sf.distance(&ball.center, &q).unwrap() < 1e-6);
    }

    #[test]
    fn random_clouds_match_oracle() {
        for (delta, spread) in [(0.0, 1.0), (-1.0, 1.5), (1.0, 0.9), (0.0, 5.0), (-0.3, 2.0)] {
            let sf = SpaceForm::new(delta, 3).unwrap();
            let pts = random_cloud(&sf, 200, spread, 7 + delta.to_bits() % 97);
            let ball = min_enclosing_ball(&sf, &pts, DEFAULT_TOL).unwrap();
            let oracle = enclosing_ball_oracle(&sf, &pts).unwrap();
            assert_relative_eq!(ball.radius, oracle.radius, max_relative = 1e-6);
            assert!(ball.radius <= oracle.radius + 1e-9, "solver {} oracle {}", ball.radius, oracle.radius);
            let (far, _) = max_distance(&sf, &ball.center, &pts).unwrap();
            assert!(far <= ball.radius + 1e-8);
            assert!(far >= ball.radius - 1e-6);
        }
    }

    #[test]
    fn farthest_point_iteration_approaches_the_center() {
        let sf = SpaceForm::new(0.0, 3).unwrap();
        let pts = random_cloud(&sf, 50, 1.0, 3);
        let exact = min_enclosing_ball(&sf, &pts, DEFAULT_TOL).unwrap();
        match farthest_point_iteration(&sf, &pts, 1e-4, 20_000) {
            Ok(b) => assert!(b.radius - exact.radius < 1e-3),
            Err(LabError::NonConvergence { best }) => assert!(best.radius - exact.radius < 1e-3),
            Err(e) => panic!("{e}"),
        }
        let capped = farthest_point_iteration(&sf, &pts, 1e-14, 10);
        assert!(matches!(capped, Err(LabError::NonConvergence { .. })));
    }

    #[test]
    fn errors() {
        let sf = SpaceForm::new(1.0, 3).unwrap();
        let one = vec![sf.origin()];
        assert!(matches!(min_enclosing_ball(&sf, &one, DEFAULT_TOL), Err(LabError::TooFewPoints { .. })));
        // equator plus pole: no open hemisphere holds a full great circle
        let mut pts: Vec<AmbientPoint> = (0..16)
            .map(|i| {
                let a = i as f64 * std::f64::consts::PI / 8.0;
                DVector::from_vec(vec![a.cos(), a.sin(), 0.0, 0.0])
            })
            .collect();
        pts.push(sf.origin());
        assert!(min_enclosing_ball(&sf, &pts, DEFAULT_TOL).is_err());
        let off = vec![sf.origin(), DVector::from_vec(vec![2.0, 0.0, 0.0, 0.0])];
        assert!(matches!(min_enclosing_ball(&sf, &off, DEFAULT_TOL), Err(LabError::OffModel { .. })));
    }
}
