//! Whole-domain point sets.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::gauss::Rule1d;
use super::points::{block_of, IntegralEstimate, PointSet};
use super::spec::{QuadratureSpec, Strategy};
use crate::error::{Error, Result};
use crate::geometry::domain::uniform_unit_disk;
use crate::geometry::{CPoint, Domain, DomainKind};
use crate::rng::{derive_seed, par_generate};

/// Minimum acceptance rate of a rejection sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

pub fn sample_domain(domain: &Domain, spec: &QuadratureSpec) -> Result<PointSet> {
    spec.validate()?;
    match spec.strategy {
        Strategy::UniformRejection => uniform_rejection(domain, spec.n_samples, spec.seed),
        Strategy::BoundaryStratified { layers } => boundary_stratified(domain, layers, spec.n_samples, spec.seed),
        Strategy::PolarGauss { radial, angular } => polar_gauss(domain, radial, angular),
    }
}

fn uniform_rejection(domain: &Domain, n: usize, seed: u64) -> Result<PointSet> {
    let dim = domain.dim();
    let draws = par_generate(seed, n, |rng, _| {
        let p = CPoint((0..dim).map(|_| uniform_unit_disk(rng)).collect());
        domain.contains(&p).then_some(p)
    });
    let w = PI.powi(dim as i32) / n as f64;
    let mut set = PointSet { n_strata: 1, n_attempts: n, ..Default::default() };
    for (i, d) in draws.into_iter().enumerate() {
        if let Some(p) = d {
            set.points.push(p);
            set.weights.push(w);
            set.strata.push(0);
            set.blocks.push(block_of(i, n));
        }
    }
    check_acceptance(set.len(), n)?;
    Ok(set)
}

pub(crate) fn check_acceptance(accepted: usize, attempts: usize) -> Result<()> {
    let rate = accepted as f64 / attempts.max(1) as f64;
    if rate < MIN_ACCEPTANCE {
        return Err(Error::Sampling(format!(
            "acceptance rate {rate:.2e} below {MIN_ACCEPTANCE:.0e} ({accepted} of {attempts})"
        )));
    }
    Ok(())
}

/// Gauge-depth interval `(lo, hi]` of layer `j` out of `layers`.
pub fn layer_depths(j: usize, layers: usize) -> (f64, f64) {
    let hi = 0.5f64.powi(j as i32);
    let lo = if j + 1 == layers { 0.0 } else { 0.5 * hi };
    (lo, hi)
}

fn boundary_stratified(domain: &Domain, layers: usize, n: usize, seed: u64) -> Result<PointSet> {
    let per = (n / layers).max(super::points::JACKKNIFE_BLOCKS);
    let two_n = 2 * domain.dim() as i32;
    let vol = domain.volume();
    let mut set = PointSet { n_strata: layers, boundary_layers: true, ..Default::default() };
    for j in 0..layers {
        let (d_lo, d_hi) = layer_depths(j, layers);
        let (g_lo, g_hi) = (1.0 - d_hi, 1.0 - d_lo);
        let (a, b) = (g_lo.powi(two_n), g_hi.powi(two_n));
        let w = vol * (b - a) / per as f64;
        let pts = par_generate(derive_seed(seed, j as u64 + 1), per, |rng, _| shell_point(domain, rng, a, b, two_n));
        for (i, p) in pts.into_iter().enumerate() {
            let p = p.ok_or_else(|| Error::Sampling("domain rejection sampler exhausted".into()))?;
            set.points.push(p);
            set.weights.push(w);
            set.strata.push(j as u32);
            set.blocks.push(block_of(i, per));
        }
    }
    set.n_attempts = set.len();
    Ok(set)
}

/// Uniform point of `{ a^(1/2n) <= gauge < b^(1/2n) }`, where the bounds are
/// given as powers `gauge^(2n)`.
fn shell_point<R: Rng + ?Sized>(domain: &Domain, rng: &mut R, a: f64, b: f64, two_n: i32) -> Option<CPoint> {
    loop {
        let x = domain.sample_uniform(rng, 100_000)?;
        let g = domain.gauge(&x);
        if g <= 1e-12 {
            continue;
        }
        let u: f64 = rng.random();
        let s = (a + u * (b - a)).powf(1.0 / two_n as f64);
        let p = x.scale(s / g);
        if domain.contains(&p) {
            return Some(p);
        }
    }
}

fn polar_gauss(domain: &Domain, radial: usize, angular: usize) -> Result<PointSet> {
    let n = match domain.kind() {
        DomainKind::UnitDisk => 1,
        DomainKind::UnitBall { n } => n,
        k => return Err(Error::Unsupported(format!("polar Gauss rule on {k:?}"))),
    };
    let theta = Rule1d::periodic(0.0, angular);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    nested_polar(n, 1.0, radial, &theta, &mut prefix, 1.0, &mut points, &mut weights);
    Ok(PointSet::deterministic(points, weights))
}

/// Ball coordinates `z_k = r_k e^{i theta_k}` with `r_k` in
/// `[0, sqrt(1 - r_1^2 - ... - r_{k-1}^2)]`.
#[allow(clippy::too_many_arguments)]
fn nested_polar(
    n: usize,
    remaining: f64,
    radial: usize,
    theta: &Rule1d,
    prefix: &mut Vec<Complex64>,
    weight: f64,
    points: &mut Vec<CPoint>,
    weights: &mut Vec<f64>,
) {
    if prefix.len() == n {
        points.push(CPoint::new(prefix));
        weights.push(weight);
        return;
    }
    let rmax = remaining.max(0.0).sqrt();
    let r = Rule1d::interval(0.0, rmax, radial);
    for (ri, wi) in r.nodes.iter().zip(&r.weights) {
        for (ti, wt) in theta.nodes.iter().zip(&theta.weights) {
            prefix.push(Complex64::from_polar(*ri, *ti));
            nested_polar(n, remaining - ri * ri, radial, theta, prefix, weight * wi * ri * wt, points, weights);
            prefix.pop();
        }
    }
}

pub fn integrate<F>(domain: &Domain, f: F, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    F: Fn(&CPoint) -> f64 + Sync,
{
    let set = sample_domain(domain, spec)?;
    let mut est = set.integrate(&f, spec.rel_tolerance);
    if spec.is_deterministic() {
        let fine = sample_domain(domain, &spec.refined())?.integrate(&f, spec.rel_tolerance);
        est = node_doubling(est, fine.value, spec.rel_tolerance);
    }
    Ok(est)
}

pub fn integrate_complex<F>(domain: &Domain, f: F, spec: &QuadratureSpec) -> Result<IntegralEstimate<Complex64>>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    let set = sample_domain(domain, spec)?;
    let mut est = set.integrate_complex(&f, spec.rel_tolerance);
    if spec.is_deterministic() {
        let fine = sample_domain(domain, &spec.refined())?.integrate_complex(&f, spec.rel_tolerance);
        est.std_error = (est.value - fine.value).norm();
        est.flagged |= est.std_error > spec.rel_tolerance * est.value.norm().max(super::points::ABS_FLOOR);
    }
    Ok(est)
}

/// Uses the difference to a rule with doubled nodes as the error of a
/// deterministic estimate.
pub(crate) fn node_doubling(mut est: IntegralEstimate, fine: f64, rel_tol: f64) -> IntegralEstimate {
    est.std_error = (est.value - fine).abs();
    est.flagged |= est.std_error > rel_tol * est.value.abs().max(super::points::ABS_FLOOR);
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_gauss_area_of_disk() {
        let est = integrate(&Domain::disk(), |_| 1.0, &QuadratureSpec::polar(64, 64)).unwrap();
        assert!((est.value - PI).abs() < 1e-10);
        assert!(!est.flagged);
    }

    #[test]
    fn polar_gauss_ball_moments() {
        let ball = Domain::ball(2);
        let spec = QuadratureSpec::polar(12, 8);
        let v = integrate(&ball, |_| 1.0, &spec).unwrap().value;
        assert!((v - PI * PI / 2.0).abs() < 1e-12);
        let m = integrate(&ball, |z| z.0[0].norm_sqr() * z.0[1].norm_sqr(), &spec).unwrap().value;
        // pi^2 * 1! * 1! / 4!
        assert!((m - PI * PI / 24.0).abs() < 1e-12);
    }

    #[test]
    fn second_moment_of_disk() {
        let spec = QuadratureSpec::stratified(8, 80_000, 3);
        let est = integrate(&Domain::disk(), |z| z.norm_sqr(), &spec).unwrap();
        assert!((est.value - PI / 2.0).abs() < 4.0 * est.std_error + 1e-3, "{est:?}");
    }

    #[test]
    fn uniform_rejection_is_reproducible() {
        let spec = QuadratureSpec::uniform(10_000, 11);
        let a = sample_domain(&Domain::egg(2), &spec).unwrap();
        let b = sample_domain(&Domain::egg(2), &spec).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn stratified_volume_is_exact() {
        for d in [Domain::disk(), Domain::ball(2), Domain::egg(3), Domain::product_disk(2)] {
            let set = sample_domain(&d, &QuadratureSpec::stratified(6, 6_000, 5)).unwrap();
            assert!((set.total_weight() / d.volume() - 1.0).abs() < 1e-12);
            assert!(set.points.iter().all(|p| d.contains(p)));
        }
    }

    #[test]
    fn divergent_integral_is_flagged() {
        let spec = QuadratureSpec::stratified(12, 120_000, 2);
        let est = integrate(&Domain::disk(), |z| (1.0 - z.norm_sqr()).powf(-1.5), &spec).unwrap();
        assert!(est.divergent && est.flagged);
        let est = integrate(&Domain::disk(), |z| (1.0 - z.norm_sqr()).powf(-0.5), &spec).unwrap();
        assert!(!est.divergent);
        assert!((est.value - 2.0 * PI).abs() < 4.0 * est.std_error + 1e-2, "{est:?}");
    }

    #[test]
    fn polar_rule_rejects_other_domains() {
        assert!(matches!(sample_domain(&Domain::egg(2), &QuadratureSpec::polar(8, 8)), Err(Error::Unsupported(_))));
    }
}
