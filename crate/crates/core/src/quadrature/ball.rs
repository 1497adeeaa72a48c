//! Integration over quasi-balls.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::points::{block_of, IntegralEstimate, PointSet};
use super::polar::{DiskRegion, Focus};
use super::sample::node_doubling;
use super::spec::{QuadratureSpec, Strategy};
use crate::error::{Error, Result};
use crate::geometry::metric::{bounding_box, LocalBox, MetricKind};
use crate::geometry::{CPoint, Domain, DomainKind, QuasiBall};
use crate::rng::{derive_seed, par_generate};

/// Minimum fraction of box draws that must land in the ball.
pub const MIN_HIT_RATE: f64 = 1e-4;

/// Extra controls for ball integrals.
#[derive(Clone, Debug, Default)]
pub struct BallOptions {
    /// Points with gauge depth below this are excluded from the region.
    pub floor: f64,
    /// A point where the integrand is sharply peaked (disk polar rules only).
    pub focus: Option<CPoint>,
}

impl BallOptions {
    pub fn floor(floor: f64) -> Self {
        BallOptions { floor, focus: None }
    }
}

/// Polar description of a ball-metric quasi-ball on the disk.
pub fn disk_ball_region(ball: &QuasiBall) -> DiskRegion<'static> {
    debug_assert_eq!(ball.metric, MetricKind::Ball);
    let c = ball.center.0[0];
    let a = c.norm();
    let r = ball.radius;
    if a == 0.0 {
        let rmax = (r - 1.0).clamp(0.0, 1.0);
        return DiskRegion { theta0: 0.0, half_width: PI, kinks: vec![], bounds: Box::new(move |_| (0.0, rmax)) };
    }
    let half_width = if r >= 2.0 { PI } else { 2.0 * (r / 2.0).asin() };
    let offset_at = |v: f64| -> Option<f64> {
        let x = r - v;
        (v > 0.0 && x > 0.0 && x < 2.0).then(|| 2.0 * (x / 2.0).asin())
    };
    let kinks = [a, 1.0 - a].into_iter().filter_map(offset_at).collect();
    DiskRegion {
        theta0: c.arg(),
        half_width,
        kinks,
        bounds: Box::new(move |t| {
            let rem = r - 2.0 * (0.5 * t.abs()).sin();
            ((a - rem).max(0.0), (a + rem).min(1.0))
        }),
    }
}

/// Point set covering `ball` (intersected with `{depth >= floor}`).
/// Monte Carlo sets only contain the accepted draws; their weights account for
/// the rejected ones.
pub fn sample_ball(domain: &Domain, ball: &QuasiBall, opts: &BallOptions, spec: &QuadratureSpec) -> Result<PointSet> {
    spec.validate()?;
    match spec.strategy {
        Strategy::PolarGauss { .. } => polar_ball(domain, ball, opts, spec.panel_order()),
        Strategy::UniformRejection => box_rejection(domain, ball, opts, spec, 1),
        Strategy::BoundaryStratified { layers } => box_rejection(domain, ball, opts, spec, layers),
    }
}

fn polar_ball(domain: &Domain, ball: &QuasiBall, opts: &BallOptions, order: usize) -> Result<PointSet> {
    if domain.kind() != DomainKind::UnitDisk {
        return Err(Error::Unsupported(format!("polar ball rule on {:?}", domain.kind())));
    }
    let region = disk_ball_region(ball);
    let focus = opts.focus.as_ref().and_then(|z| Focus::at(z.0[0]));
    let mut region = region;
    if opts.floor > 0.0 {
        let a = ball.center.0[0].norm();
        let x = ball.radius - (1.0 - opts.floor - a);
        if a > 0.0 && x > 0.0 && x < 2.0 {
            region.kinks.push(2.0 * (x / 2.0).asin());
        }
    }
    Ok(region.rule(order, opts.floor, focus))
}

fn box_rejection(
    domain: &Domain,
    ball: &QuasiBall,
    opts: &BallOptions,
    spec: &QuadratureSpec,
    layers: usize,
) -> Result<PointSet> {
    let bx = bounding_box(domain, ball);
    let r0 = bx.radii[0];
    // strips of the real part of the first box coordinate; for ball-like
    // domains nothing beyond the exit distance along the normal is inside
    let top = if domain.is_ball_like() && ball.metric == MetricKind::Ball && bx.center.norm() > 0.0 {
        r0.min(1.0 - bx.center.norm())
    } else {
        r0
    };
    let strips = strip_bounds(-r0, top, layers);
    let per = (spec.n_samples / strips.len()).max(super::points::JACKKNIFE_BLOCKS);
    let other: f64 = bx.radii[1..].iter().map(|r| PI * r * r).product();
    let mut set = PointSet { n_strata: strips.len(), ..Default::default() };
    let mut hits = 0usize;
    for (j, (x0, x1)) in strips.iter().enumerate() {
        let vol = (x1 - x0) * 2.0 * r0 * other;
        let w = vol / per as f64;
        let draws = par_generate(derive_seed(spec.seed, j as u64 + 101), per, |rng, _| {
            let p = box_point(rng, &bx, *x0, *x1);
            p.filter(|p| ball.contains(domain, p) && (opts.floor <= 0.0 || domain.depth(p) >= opts.floor))
        });
        for (i, d) in draws.into_iter().enumerate() {
            if let Some(p) = d {
                hits += 1;
                set.points.push(p);
                set.weights.push(w);
                set.strata.push(j as u32);
                set.blocks.push(block_of(i, per));
            }
        }
        set.n_attempts += per;
    }
    let rate = hits as f64 / set.n_attempts as f64;
    if rate < MIN_HIT_RATE {
        return Err(Error::Sampling(format!(
            "ball hit rate {rate:.2e} below {MIN_HIT_RATE:.0e}; radius {} too small for {} draws",
            ball.radius, set.n_attempts
        )));
    }
    Ok(set)
}

/// Strips `[x0, x1]` of `[lo, hi]` halving in width towards `hi`.
fn strip_bounds(lo: f64, hi: f64, layers: usize) -> Vec<(f64, f64)> {
    let width = hi - lo;
    let mut out = Vec::with_capacity(layers);
    let mut a = lo;
    for j in 0..layers {
        let b = if j + 1 == layers { hi } else { hi - width * 0.5f64.powi(j as i32 + 1) };
        out.push((a, b));
        a = b;
    }
    out
}

fn box_point<R: Rng + ?Sized>(rng: &mut R, bx: &LocalBox, x0: f64, x1: f64) -> Option<CPoint> {
    let r0 = bx.radii[0];
    let x = x0 + (x1 - x0) * rng.random::<f64>();
    let y = r0 * (2.0 * rng.random::<f64>() - 1.0);
    if x * x + y * y >= r0 * r0 {
        return None;
    }
    let mut coords = vec![Complex64::new(x, y)];
    for r in &bx.radii[1..] {
        coords.push(crate::geometry::domain::uniform_unit_disk(rng) * r);
    }
    Some(bx.point(&coords))
}

pub fn integrate_ball<F>(domain: &Domain, ball: &QuasiBall, f: F, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    F: Fn(&CPoint) -> f64 + Sync,
{
    integrate_ball_with(domain, ball, &BallOptions::default(), f, spec)
}

pub fn integrate_ball_with<F>(
    domain: &Domain,
    ball: &QuasiBall,
    opts: &BallOptions,
    f: F,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate>
where
    F: Fn(&CPoint) -> f64 + Sync,
{
    let set = sample_ball(domain, ball, opts, spec)?;
    let mut est = set.integrate(&f, spec.rel_tolerance);
    if spec.is_deterministic() {
        let fine = sample_ball(domain, ball, opts, &spec.refined())?.integrate(&f, spec.rel_tolerance);
        est = node_doubling(est, fine.value, spec.rel_tolerance);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sample::integrate;

    fn disk_ball(c: f64, r: f64) -> (Domain, QuasiBall) {
        let d = Domain::disk();
        let b = QuasiBall::new(&d, CPoint::c1(c, 0.0), r).unwrap();
        (d, b)
    }

    #[test]
    fn polar_and_monte_carlo_measures_agree() {
        for (c, r) in [(0.9, 0.05), (0.9, 0.2), (0.5, 0.3), (0.99, 0.5)] {
            let (d, b) = disk_ball(c, r);
            let exact = integrate_ball(&d, &b, |_| 1.0, &QuadratureSpec::polar(64, 64)).unwrap();
            assert!(exact.relative_error() < 1e-8, "{exact:?}");
            let mc = integrate_ball(&d, &b, |_| 1.0, &QuadratureSpec::stratified(6, 200_000, 1)).unwrap();
            assert!((mc.value - exact.value).abs() < 4.0 * mc.std_error, "c={c} r={r}: {mc:?} vs {exact:?}");
        }
    }

    #[test]
    fn ball_covering_domain_matches_domain_integral() {
        let d = Domain::disk();
        let b = QuasiBall::new(&d, CPoint::c1(0.1, 0.0), 5.0).unwrap();
        let v = integrate_ball(&d, &b, |z| z.norm_sqr(), &QuadratureSpec::polar(64, 64)).unwrap().value;
        let w = integrate(&d, |z| z.norm_sqr(), &QuadratureSpec::polar(64, 64)).unwrap().value;
        assert!((v - w).abs() < 1e-10);
    }

    #[test]
    fn boundary_touching_weight_integral_is_strategy_independent() {
        let (d, b) = disk_ball(0.95, 0.1);
        let f = |z: &CPoint| (1.0 - z.norm_sqr()).sqrt();
        let a = integrate_ball(&d, &b, f, &QuadratureSpec::stratified(6, 200_000, 9)).unwrap();
        let u = integrate_ball(&d, &b, f, &QuadratureSpec::uniform(200_000, 9)).unwrap();
        let combined = (a.std_error.powi(2) + u.std_error.powi(2)).sqrt();
        assert!((a.value - u.value).abs() < 3.0 * combined, "{a:?} {u:?}");
    }

    #[test]
    fn tiny_ball_is_rejected_by_hit_rate() {
        let d = Domain::ball(2);
        let b = QuasiBall::new(&d, CPoint::real(&[0.0, 0.0]), 1e-9).unwrap();
        assert!(matches!(
            integrate_ball(&d, &b, |_| 1.0, &QuadratureSpec::uniform(10_000, 1)),
            Err(Error::Sampling(_))
        ));
    }

    #[test]
    fn floor_removes_boundary_layer() {
        let (d, b) = disk_ball(0.95, 0.2);
        let spec = QuadratureSpec::polar(64, 64);
        let full = integrate_ball(&d, &b, |_| 1.0, &spec).unwrap().value;
        let cut = integrate_ball_with(&d, &b, &BallOptions::floor(0.01), |_| 1.0, &spec).unwrap().value;
        let mc = integrate_ball_with(&d, &b, &BallOptions::floor(0.01), |_| 1.0, &QuadratureSpec::uniform(400_000, 4))
            .unwrap();
        assert!(cut < full);
        assert!((mc.value - cut).abs() < 4.0 * mc.std_error);
    }
}
