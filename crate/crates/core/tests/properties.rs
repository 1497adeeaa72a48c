use std::f64::consts::PI;

use berglab::geometry::quasi_distance;
use berglab::harness::{Cell, Table};
use berglab::kernels::{KernelEvaluator, KernelMode};
use berglab::operators::{Projector, TestFunction};
use berglab::quadrature::{integrate, QuadratureSpec};
use berglab::rng::{pairwise_sum, par_generate};
use berglab::weights::{ball_product, dual_weight, Regularizer, Weight};
use berglab::{CPoint, Complex64, Domain, QuasiBall};
use proptest::prelude::*;
use rand::Rng;

fn disk_point(max_r: f64) -> impl Strategy<Value = CPoint> {
    (0.0..max_r, 0.0..2.0 * PI).prop_map(|(r, t)| CPoint::new(&[Complex64::from_polar(r, t)]))
}

fn ball2_point(max_r: f64) -> impl Strategy<Value = CPoint> {
    (0.0..max_r, 0.0..1.0f64, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(r, s, a, b)| {
        let (c, d) = (s.sqrt(), (1.0 - s).sqrt());
        CPoint::new(&[Complex64::from_polar(r * c, a), Complex64::from_polar(r * d, b)])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disk_metric_is_a_symmetric_metric(x in disk_point(0.999), y in disk_point(0.999), z in disk_point(0.999)) {
        let d = Domain::disk();
        let (xy, yz, xz) = (quasi_distance(&d, &x, &y), quasi_distance(&d, &y, &z), quasi_distance(&d, &x, &z));
        prop_assert!((xy - quasi_distance(&d, &y, &x)).abs() <= 1e-15);
        prop_assert_eq!(quasi_distance(&d, &x, &x), 0.0);
        prop_assert!(xz <= xy + yz + 1e-12);
    }

    #[test]
    fn kernel_is_hermitian_and_positive_on_the_diagonal(z in ball2_point(0.99), w in ball2_point(0.99)) {
        let ev = KernelEvaluator::for_domain(&Domain::ball(2)).unwrap();
        let a = ev.eval(&z, &w).unwrap();
        let b = ev.eval(&w, &z).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        prop_assert!(ev.eval(&z, &z).unwrap().re > 0.0);
    }

    #[test]
    fn truncated_egg_kernel_matches_ball_closed_form(z in ball2_point(0.6), w in ball2_point(0.6)) {
        let closed = KernelEvaluator::new(&Domain::ball(2), KernelMode::ClosedForm).unwrap();
        let trunc = KernelEvaluator::new(&Domain::egg(1), KernelMode::TruncatedBasis { max_degree: 60 }).unwrap();
        let (a, b) = (closed.eval(&z, &w).unwrap(), trunc.eval(&z, &w).unwrap());
        prop_assert!((a - b).norm() <= 1e-8 * a.norm());
    }

    #[test]
    fn projection_reproduces_monomials(z in disk_point(0.95), k in 0u32..5) {
        let proj = Projector::new(KernelEvaluator::for_domain(&Domain::disk()).unwrap(), QuadratureSpec::polar(64, 64)).unwrap();
        let f = TestFunction::monomial(vec![k]);
        let p = proj.project(&f, &z).unwrap().value;
        prop_assert!((p - f.eval(&z)).norm() <= 1e-7, "{} vs {}", p, f.eval(&z));
    }

    #[test]
    fn projection_is_linear(z in disk_point(0.9), c in -3.0..3.0f64, seed in 0u64..1000) {
        let d = Domain::disk();
        let proj = Projector::new(KernelEvaluator::for_domain(&d).unwrap(), QuadratureSpec::polar(32, 64)).unwrap();
        let f = TestFunction::random_bump(&d, seed);
        let a = proj.project(&f, &z).unwrap().value * c;
        let b = proj.project(&f.scaled(c), &z).unwrap().value;
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-12));
    }

    #[test]
    fn bp_product_is_scale_invariant(c in 0.01..100.0f64, t in -0.9..0.9f64, depth in 0.01..0.3f64) {
        let d = Domain::disk();
        let sigma = Weight::power(&d, t, 2.0).unwrap();
        let ball = QuasiBall::new(&d, CPoint::c1(1.0 - depth, 0.0), 2.0 * depth).unwrap();
        let spec = QuadratureSpec::polar(32, 32);
        let a = ball_product(&d, &sigma, &ball, 1e-3, &spec).unwrap().value;
        let b = ball_product(&d, &sigma.scaled(c), &ball, 1e-3, &spec).unwrap().value;
        prop_assert!((a / b - 1.0).abs() <= 1e-12);
        prop_assert!(a >= 1.0 - 1e-12, "Jensen gives a product of at least one, got {}", a);
    }

    #[test]
    fn dual_of_dual_is_the_weight(t in -0.9..0.9f64, p in 1.2..4.0f64, z in disk_point(0.999)) {
        let d = Domain::disk();
        let sigma = Weight::power(&d, t, p).unwrap();
        let back = dual_weight(&dual_weight(&sigma).unwrap()).unwrap();
        prop_assert!((back.eval(&z) / sigma.eval(&z) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn regularizer_balls_are_contained(k in 0.01..0.45f64, depth in 1e-4..0.5f64, theta in 0.0..2.0 * PI, i in 0usize..64) {
        let d = Domain::disk();
        let reg = Regularizer::new(k, 1.0).unwrap();
        let kp = Regularizer { k: reg.k_prime(), c_d: reg.c_d };
        let z = CPoint::new(&[Complex64::from_polar(1.0 - depth, theta)]);
        let ball = reg.ball(&d, &z).unwrap();
        // a point on the far side of B_k(z) in the radial direction
        let s = (i as f64 + 0.5) / 64.0;
        let zp = CPoint::new(&[Complex64::from_polar(1.0 - depth * (1.0 + (2.0 * s - 1.0) * k * 0.999), theta)]);
        prop_assert!(ball.contains(&d, &zp));
        prop_assert!(kp.ball(&d, &zp).unwrap().contains(&d, &z));
    }

    #[test]
    fn pairwise_sum_matches_naive_sum(xs in prop::collection::vec(-1e6..1e6f64, 0..500)) {
        let naive: f64 = xs.iter().sum();
        let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&xs) - naive).abs() <= 1e-12 * scale);
    }

    #[test]
    fn seeded_streams_are_reproducible(seed in any::<u64>(), n in 1usize..200) {
        let a = par_generate(seed, n, |rng, _| rng.random::<u64>());
        let b = par_generate(seed, n, |rng, _| rng.random::<u64>());
        prop_assert_eq!(&a, &b);
        let c = par_generate(seed, n + 5, |rng, _| rng.random::<u64>());
        prop_assert_eq!(&a[..], &c[..n]);
    }

    #[test]
    fn table_csv_round_trip(rows in prop::collection::vec((any::<f64>(), "[a-z ,\"]{0,8}", any::<bool>()), 0..20)) {
        let mut t = Table::new("t", &["x", "label", "flag"]);
        for (x, s, b) in &rows {
            t.push(vec![(*x).into(), format!("_{s}").into(), (*b).into()]);
        }
        let back = Table::from_csv("t", &t.to_csv().unwrap()).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert!(t.rows.iter().all(|r| !matches!(r[0], Cell::Num(Some(x)) if !x.is_finite())));
    }
}

#[test]
fn polar_rule_integrates_radial_monomials() {
    let d = Domain::disk();
    for k in 0..8 {
        let v = integrate(&d, |z| z.norm_sqr().powi(k), &QuadratureSpec::polar(32, 32)).unwrap().value;
        assert!((v - PI / (k as f64 + 1.0)).abs() < 1e-12, "k={k}: {v}");
    }
}
