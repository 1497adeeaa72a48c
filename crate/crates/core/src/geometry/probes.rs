//! Probes that calibrate the constants of the space of homogeneous type.

use rand::Rng;
use serde::Serialize;

use super::domain::{uniform_unit_disk, CPoint, Domain};
use super::frame::{frame_unchecked, polydisc_frame};
use super::metric::{boundary_distance, quasi_distance, QuasiBall};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_ball, integrate_ball_with, BallOptions, IntegralEstimate, QuadratureSpec};
use crate::rng::par_generate;

/// Constants of the quasi-metric measure space, as measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometryCalibration {
    pub triangle_constant: f64,
    pub homogeneity_c0: f64,
    pub homogeneity_m: f64,
    pub engulfing_c: f64,
    pub engulfing_d: f64,
}

impl GeometryCalibration {
    pub fn new(triangle_constant: f64, c0: f64, m: f64, engulfing_c: f64, engulfing_d: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x >= 1.0;
        if !(ok(triangle_constant) && ok(c0) && ok(engulfing_c) && ok(engulfing_d) && m.is_finite() && m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "calibration out of range: c={triangle_constant} c0={c0} m={m} C={engulfing_c} D={engulfing_d}"
            )));
        }
        Ok(GeometryCalibration {
            triangle_constant,
            homogeneity_c0: c0,
            homogeneity_m: m,
            engulfing_c,
            engulfing_d,
        })
    }
}

/// Point at gauge depth log-uniform in `[lo, hi]` in a random direction.
pub fn near_boundary_point<R: Rng + ?Sized>(domain: &Domain, rng: &mut R, lo: f64, hi: f64) -> CPoint {
    let u = domain.random_boundary_point(rng);
    let depth = (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp();
    domain.at_depth(&u, depth)
}

/// `mu(B)` by membership-restricted integration.
pub fn quasi_ball_measure(domain: &Domain, ball: &QuasiBall, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    integrate_ball(domain, ball, |_| 1.0, spec)
}

/// Draws an interior point: half uniform, half near the boundary.
fn mixed_point<R: Rng + ?Sized>(domain: &Domain, rng: &mut R) -> CPoint {
    if rng.random::<bool>() {
        domain.sample_uniform(rng, 1_000_000).expect("model domains have large acceptance")
    } else {
        near_boundary_point(domain, rng, 1e-4, 1e-1)
    }
}

/// Interior point within Euclidean distance `scale` of `z`.
fn perturb<R: Rng + ?Sized>(domain: &Domain, rng: &mut R, z: &CPoint, scale: f64) -> CPoint {
    loop {
        let d = CPoint((0..domain.dim()).map(|_| uniform_unit_disk(rng) * scale).collect());
        let w = z.add(&d);
        if domain.contains(&w) {
            return w;
        }
    }
}

fn random_triple<R: Rng + ?Sized>(domain: &Domain, rng: &mut R) -> (CPoint, CPoint, CPoint) {
    let z = mixed_point(domain, rng);
    if rng.random::<bool>() {
        (z, mixed_point(domain, rng), mixed_point(domain, rng))
    } else {
        let s = 10f64.powf(rng.random_range(-4.0..-1.0));
        let u = perturb(domain, rng, &z, s);
        let s2 = s * rng.random_range(0.1..3.0);
        let w = perturb(domain, rng, &z, s2);
        (z, u, w)
    }
}

/// Largest sampled `d(z,w) / (d(z,u) + d(u,w))`.
pub fn triangle_constant_probe(domain: &Domain, n_triples: usize, seed: u64) -> Result<f64> {
    if n_triples < 1 {
        return Err(Error::InvalidArgument("n_triples must be at least 1".into()));
    }
    let ratios = par_generate(seed, n_triples, |rng, _| {
        let (z, u, w) = random_triple(domain, rng);
        let den = quasi_distance(domain, &z, &u) + quasi_distance(domain, &u, &w);
        if den == 0.0 {
            return 1.0;
        }
        quasi_distance(domain, &z, &w) / den
    });
    Ok(ratios.into_iter().filter(|r| r.is_finite()).fold(0.0, f64::max))
}

/// Largest sampled `d(z,bΩ) / (d(z',bΩ) + d(z,z'))`.
pub fn boundary_subadditivity_probe(domain: &Domain, n_pairs: usize, seed: u64) -> Result<f64> {
    let ratios = par_generate(seed, n_pairs, |rng, _| {
        let (z, u, _) = random_triple(domain, rng);
        let a = boundary_distance(domain, &z).ok()?;
        let b = boundary_distance(domain, &u).ok()?;
        Some(a / (b + quasi_distance(domain, &z, &u)))
    });
    Ok(ratios.into_iter().flatten().filter(|r| r.is_finite()).fold(0.0, f64::max))
}

/// Range `(min, max)` of `d(z,bΩ) / dist(z,bΩ)` over near-boundary points.
pub fn comparability_probe(domain: &Domain, n_points: usize, seed: u64) -> Result<(f64, f64)> {
    let ratios = par_generate(seed, n_points, |rng, _| {
        let z = near_boundary_point(domain, rng, 1e-4, 1e-1);
        boundary_distance(domain, &z).map(|d| d / domain.euclidean_boundary_distance(&z))
    });
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for r in ratios {
        let r = r?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// Largest `|rho(z) - rho(q)| / delta` over points `z` of `P(q, delta)` inside
/// the domain.
pub fn frame_control_probe(domain: &Domain, n_frames: usize, points_per_frame: usize, seed: u64) -> Result<f64> {
    let worst = par_generate(seed, n_frames, |rng, _| -> Result<f64> {
        let q = near_boundary_point(domain, rng, 1e-4, 1e-1);
        let delta = 10f64.powf(rng.random_range(-4.0..-1.5));
        let f = polydisc_frame(domain, &q, delta)?;
        let rq = domain.rho(&q);
        let mut worst: f64 = 0.0;
        for _ in 0..points_per_frame {
            let c: Vec<_> = f.tau.iter().map(|t| uniform_unit_disk(rng) * *t).collect();
            let z = f.basis.point(&c);
            if domain.contains(&z) {
                worst = worst.max((domain.rho(&z) - rq).abs() / delta);
            }
        }
        Ok(worst)
    });
    worst.into_iter().try_fold(0.0, |acc: f64, r| r.map(|r| acc.max(r)))
}

/// Strong homogeneity fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityFit {
    pub c0: f64,
    pub m: f64,
    pub n_pairs: usize,
    pub n_flagged: usize,
}

/// Fits `log mu(B(z, lambda r)) - log mu(B(z, r))` against `log lambda`.
pub fn homogeneity_fit(
    domain: &Domain,
    family: &[QuasiBall],
    lambdas: &[f64],
    spec: &QuadratureSpec,
) -> Result<HomogeneityFit> {
    let mut distinct: Vec<f64> = lambdas.iter().copied().filter(|l| *l > 1.0).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidArgument("homogeneity fit needs at least two distinct lambda > 1".into()));
    }
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty ball family".into()));
    }
    if lambdas.iter().any(|l| *l < 1.0) {
        return Err(Error::InvalidArgument("lambdas must be at least 1".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut n_flagged = 0;
    for ball in family {
        let base = quasi_ball_measure(domain, ball, spec)?;
        n_flagged += base.flagged as usize;
        for l in &distinct {
            let big = quasi_ball_measure(domain, &ball.dilate(*l), spec)?;
            n_flagged += big.flagged as usize;
            xs.push(l.ln());
            ys.push((big.value / base.value).ln());
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let m = sxy / sxx;
    let c0 = xs.iter().zip(&ys).map(|(x, y)| (y - m * x).exp()).fold(1.0, f64::max);
    Ok(HomogeneityFit { c0, m, n_pairs: xs.len(), n_flagged })
}

/// Result of the engulfing probe. `c` is `None` when the two polydiscs were
/// not seen to intersect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Engulfing {
    pub c: Option<f64>,
    pub d: f64,
}

/// Smallest sampled dilations with `P(q1, 2 delta) ⊂ D P(q1, delta)` and
/// `P(q1, delta) ⊂ C P(q2, delta)`.
pub fn engulfing_probe(
    domain: &Domain,
    q1: &CPoint,
    q2: &CPoint,
    delta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Engulfing> {
    let p1 = polydisc_frame(domain, q1, delta)?;
    let p1_double = frame_unchecked(domain, q1, 2.0 * delta)?;
    let p2 = polydisc_frame(domain, q2, delta)?;
    let draws = par_generate(seed, n_samples, |rng, _| {
        let sample = |f: &super::frame::PolydiscFrame, rng: &mut rand_chacha::ChaCha8Rng| {
            let c: Vec<_> = f.tau.iter().map(|t| uniform_unit_disk(rng) * *t).collect();
            f.basis.point(&c)
        };
        let a = sample(&p1_double, rng);
        let b = sample(&p1, rng);
        (p1.dilation_of(&a), p2.dilation_of(&b))
    });
    let d = draws.iter().map(|x| x.0).fold(1.0, f64::max);
    let meets = draws.iter().any(|x| x.1 < 1.0);
    let c = meets.then(|| draws.iter().map(|x| x.1).fold(1.0, f64::max));
    Ok(Engulfing { c, d })
}

/// `mu({z in B0 : d(z,bΩ) <= s R0}) / mu(B0)` for a boundary-touching `B0`.
pub fn boundary_slab_measure(domain: &Domain, b0: &QuasiBall, s: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("slab fraction {s} outside (0, 1)")));
    }
    if !b0.touches_boundary(domain)? {
        return Err(Error::HypothesisUnmet("slab probe needs a boundary-touching ball".into()));
    }
    let level = s * b0.radius;
    let total = quasi_ball_measure(domain, b0, spec)?;
    if domain.is_ball_like() {
        // the boundary distance is the gauge depth, so the slab complement is
        // a depth-floored ball
        let inner = integrate_ball_with(domain, b0, &BallOptions::floor(level), |_| 1.0, spec)?;
        let slab = IntegralEstimate {
            value: total.value - inner.value,
            std_error: (total.std_error.powi(2) + inner.std_error.powi(2)).sqrt(),
            ..total
        };
        return Ok(slab.ratio(&total));
    }
    let slab = integrate_ball(
        domain,
        b0,
        |z| match boundary_distance(domain, z) {
            Ok(d) if d <= level => 1.0,
            _ => 0.0,
        },
        spec,
    )?;
    Ok(slab.ratio(&total))
}
