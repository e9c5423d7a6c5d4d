use proptest::prelude::*;

use extrinsic_lab::immersion::sample;
use extrinsic_lab::lab::{build_family, Perturbation, SurfaceFamilySpec};
use extrinsic_lab::pinch::RadialProfile;
use extrinsic_lab::radius::{min_enclosing_ball, DEFAULT_TOL};
use extrinsic_lab::spaceform::{cdelta, sdelta, tdelta};
use extrinsic_lab::spheremap::lemma43_constants;
use extrinsic_lab::{AmbientPoint, SpaceForm};

fn direction(raw: &[f64]) -> Vec<f64> {
    let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
    raw.iter().map(|v| v / n).collect()
}

fn point(sf: &SpaceForm, raw: &[f64], t: f64) -> AmbientPoint {
    sf.point_from_origin(&direction(raw), t)
}

fn delta_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -2.0..-0.1f64, 0.1..2.0f64]
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn trig_identity(delta in -3.0..3.0f64, t in 0.0..1.0f64) {
        let s = sdelta(delta, t);
        let c = cdelta(delta, t);
        prop_assert!((c * c + delta * s * s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn exp_inverts_log(delta in delta_strategy(), a in prop::collection::vec(-1.0..1.0f64, 3),
                       b in prop::collection::vec(-1.0..1.0f64, 3), ta in 0.0..0.6f64, tb in 0.0..0.6f64) {
        let sf = SpaceForm::new(delta, 3).unwrap();
        let scale = 1.0 / delta.abs().sqrt().max(1.0);
        let p = point(&sf, &a, ta * scale);
        let q = point(&sf, &b, tb * scale);
        let v = sf.log(&p, &q).unwrap();
        let back = sf.exp(&p, &v).unwrap();
        prop_assert!((&back - &q).amax() <= 1e-10);
        let d = sf.distance(&p, &q).unwrap();
        prop_assert!((sf.norm(&v) - d).abs() <= 1e-10);
        prop_assert!((d - sf.distance(&q, &p).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn triangle_inequality(delta in delta_strategy(), a in prop::collection::vec(-1.0..1.0f64, 3),
                           b in prop::collection::vec(-1.0..1.0f64, 3), c in prop::collection::vec(-1.0..1.0f64, 3),
                           t in prop::collection::vec(0.0..0.7f64, 3)) {
        let sf = SpaceForm::new(delta, 3).unwrap();
        let scale = 1.0 / delta.abs().sqrt().max(1.0);
        let (p, q, r) = (point(&sf, &a, t[0] * scale), point(&sf, &b, t[1] * scale), point(&sf, &c, t[2] * scale));
        let d = |x: &AmbientPoint, y: &AmbientPoint| sf.distance(x, y).unwrap();
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
    }

    #[test]
    fn enclosing_ball_covers_and_touches(delta in delta_strategy(),
                                         raw in prop::collection::vec((prop::collection::vec(-1.0..1.0f64, 3), 0.0..1.0f64), 2..40)) {
        let sf = SpaceForm::new(delta, 3).unwrap();
        let scale = 1.0 / delta.abs().sqrt().max(1.0);
        let pts: Vec<AmbientPoint> = raw.iter().map(|(d, t)| point(&sf, d, t * scale)).collect();
        let ball = min_enclosing_ball(&sf, &pts, DEFAULT_TOL).unwrap();
        let dists: Vec<f64> = pts.iter().map(|p| sf.distance(&ball.center, p).unwrap()).collect();
        let far = dists.iter().cloned().fold(0.0f64, f64::max);
        prop_assert!(far <= ball.radius + 1e-9);
        prop_assert!(far >= ball.radius - 1e-9);
        let mut diameter = 0.0f64;
        for p in &pts {
            for q in &pts {
                diameter = diameter.max(sf.distance(p, q).unwrap());
            }
        }
        prop_assert!(ball.radius >= 0.5 * diameter - 1e-9);
        prop_assert!(ball.radius <= diameter + 1e-9);
    }

    #[test]
    fn geodesic_spheres_attain_the_bound(delta in delta_strategy(), rho in 0.1..1.0f64) {
        let rho = rho * std::f64::consts::FRAC_PI_2 / delta.max(1.0).sqrt();
        let (sf, imm) = build_family(&SurfaceFamilySpec::geodesic_sphere(delta, rho)).unwrap();
        let s = sample(imm, &sf, 12).unwrap();
        let ball = min_enclosing_ball(&sf, &s.points(), DEFAULT_TOL).unwrap();
        let profile = RadialProfile::new(&s, &ball).unwrap();
        let gaps = profile.gaps(1.0).unwrap();
        prop_assert!(gaps.gap_inf.abs() <= 1e-8 * (1.0 + tdelta(delta, rho).unwrap()));
        prop_assert!(profile.minkowski_residual().abs() <= 1e-10 * profile.volume());
    }

    #[test]
    fn unit_volume_keeps_the_scale_free_product(delta in delta_strategy(), eps in 0.0..0.3f64, l in 1u32..4) {
        let rho = 0.9 / delta.max(1.0).sqrt();
        let spec = SurfaceFamilySpec::radial_graph(delta, rho, eps * rho, Perturbation::Harmonic { l, m: 0 });
        let (sf, imm) = build_family(&spec).unwrap();
        let s = sample(imm, &sf, 12).unwrap();
        let ball = min_enclosing_ball(&sf, &s.points(), DEFAULT_TOL).unwrap();
        let raw = RadialProfile::new(&s, &ball).unwrap();
        let unit = raw.unit_volume().unwrap();
        prop_assert!((unit.volume() - 1.0).abs() <= 1e-12);
        let product = |p: &RadialProfile| tdelta(p.delta, p.radius).unwrap() * p.h_norm(f64::INFINITY).unwrap();
        prop_assert!((product(&raw) - product(&unit)).abs() <= 1e-10);
        prop_assert!(raw.gaps(1.0).unwrap().gap_inf >= -1e-8);
        prop_assert!(raw.lemma21ii_slack() >= -1e-8 * raw.volume());
    }

    #[test]
    fn lemma43_rho_solves_its_equation(eta in 1e-6..0.02f64, radius in 0.2..2.0f64, n in 2usize..5) {
        if let Ok(g) = lemma43_constants(n, radius, eta) {
            let a = |t: f64| (0.5 * t).tanh();
            let target = 4.0 * (2 * n - 1) as f64 * eta;
            prop_assert!((a(radius + g.rho) - a(radius) - target).abs() <= 1e-12);
            prop_assert!(g.rho > 0.0);
            prop_assert!(g.rho_prime >= g.rho_double_prime);
            prop_assert_eq!(g.d, g.e.powi(3) / (2.0 * n as f64));
        }
    }
}
