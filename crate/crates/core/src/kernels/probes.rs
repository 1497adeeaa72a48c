//! Statistical checks of the kernel size, smoothness and lower bounds.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::KernelEvaluator;
use crate::error::{Error, Result};
use crate::geometry::domain::complex_gaussian;
use crate::geometry::frame::{frame_unchecked, polydisc_distance, LocalBasis};
use crate::geometry::{boundary_distance, quasi_distance, CPoint, Domain, QuasiBall};
use crate::geometry::probes::quasi_ball_measure;
use crate::quadrature::QuadratureSpec;
use crate::rng::par_generate;

/// A fitted constant (and exponent, where one is fitted) of a kernel bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateFit {
    pub constant: f64,
    pub exponent: f64,
    pub n_samples: usize,
    /// Ratio of the extreme statistic to the median one.
    pub max_violation_ratio: f64,
    /// Pairs dropped because a precondition failed or an estimate was flagged.
    pub n_excluded: usize,
}

/// Near-boundary pairs: both points at depth log-uniform in `depth_range`,
/// with the second direction a Gaussian perturbation of the first of
/// log-uniform size in `spread_range`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub depth_range: (f64, f64),
    pub spread_range: (f64, f64),
}

impl Default for PairSampler {
    fn default() -> Self {
        PairSampler { depth_range: (1e-3, 1e-1), spread_range: (1e-3, 1.0) }
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

impl PairSampler {
    pub fn sample(&self, domain: &Domain, n: usize, seed: u64) -> Vec<(CPoint, CPoint)> {
        par_generate(seed, n, |rng, _| {
            let u = domain.random_boundary_point(rng);
            let z = domain.at_depth(&u, log_uniform(rng, self.depth_range));
            let spread = log_uniform(rng, self.spread_range);
            let v = u.add(&complex_gaussian(rng, domain.dim()).scale(spread));
            let v = v.scale(1.0 / domain.gauge(&v));
            let w = domain.at_depth(&v, log_uniform(rng, self.depth_range));
            (z, w)
        })
    }
}

struct Stat {
    value: f64,
    x: f64,
}

fn summarize(stats: Vec<Option<Stat>>, use_max: bool) -> Result<EstimateFit> {
    let n_excluded = stats.iter().filter(|s| s.is_none()).count();
    let mut vals: Vec<f64> = stats.iter().flatten().map(|s| s.value).filter(|v| v.is_finite() && *v > 0.0).collect();
    let n_excluded = n_excluded + stats.iter().flatten().count() - vals.len();
    if vals.is_empty() {
        return Err(Error::HypothesisUnmet("no admissible samples".into()));
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = vals[vals.len() / 2];
    let constant = if use_max { *vals.last().unwrap() } else { vals[0] };
    Ok(EstimateFit {
        constant,
        exponent: f64::NAN,
        n_samples: vals.len(),
        max_violation_ratio: if use_max { constant / median } else { median / constant },
        n_excluded,
    })
}

fn measure(domain: &Domain, center: &CPoint, radius: f64, spec: &QuadratureSpec) -> Option<f64> {
    let ball = QuasiBall::new(domain, center.clone(), radius).ok()?;
    let est = quasi_ball_measure(domain, &ball, spec).ok()?;
    (!est.flagged && est.value > 0.0).then_some(est.value)
}

/// Sup of `|K(z,w)| mu(B(z, d(z,w)))`.
pub fn size_probe(ev: &KernelEvaluator, pairs: &[(CPoint, CPoint)], spec: &QuadratureSpec) -> Result<EstimateFit> {
    let d = ev.domain();
    let stats = pairs
        .par_iter()
        .map(|(z, w)| {
            let r = quasi_distance(d, z, w);
            if r == 0.0 {
                return None;
            }
            let k = ev.eval(z, w).ok()?.norm();
            Some(Stat { value: k * measure(d, z, r, spec)?, x: 0.0 })
        })
        .collect();
    summarize(stats, true)
}

/// Sup of `|K(z,w)| max(mu(B(z, d(z,bΩ))), mu(B(w, d(w,bΩ))))`.
pub fn boundary_size_probe(
    ev: &KernelEvaluator,
    pairs: &[(CPoint, CPoint)],
    spec: &QuadratureSpec,
) -> Result<EstimateFit> {
    let d = ev.domain();
    let stats = pairs
        .par_iter()
        .map(|(z, w)| {
            let k = ev.eval(z, w).ok()?.norm();
            let mz = measure(d, z, boundary_distance(d, z).ok()?, spec)?;
            let mw = measure(d, w, boundary_distance(d, w).ok()?, spec)?;
            Some(Stat { value: k * mz.max(mw), x: 0.0 })
        })
        .collect();
    summarize(stats, true)
}

/// Fits `nu` in `|K(z,w) - K(z',w)| mu(B(z,d(z,w))) <= C (d(z,z')/d(z,w))^nu`
/// over triples with `d(z,w) >= c2 d(z,z')`.
pub fn smoothness_probe(
    ev: &KernelEvaluator,
    pairs: &[(CPoint, CPoint)],
    c2: f64,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<EstimateFit> {
    let d = ev.domain();
    let perturb = par_generate(seed, pairs.len(), |rng, _| {
        (complex_gaussian(rng, d.dim()), log_uniform(rng, (1e-4, 1.0)))
    });
    let stats: Vec<Option<Stat>> = pairs
        .par_iter()
        .zip(perturb.par_iter())
        .map(|((z, w), (dir, t))| {
            let r = quasi_distance(d, z, w);
            if r == 0.0 {
                return None;
            }
            // a Euclidean step of t r / c2 moves about that far in the metric
            let zp = z.add(&dir.scale(t * r / c2 / dir.norm()));
            if !d.contains(&zp) {
                return None;
            }
            let rp = quasi_distance(d, z, &zp);
            if rp == 0.0 || r < c2 * rp {
                return None;
            }
            let dk = (ev.eval(z, w).ok()? - ev.eval(&zp, w).ok()?).norm();
            Some(Stat { value: dk * measure(d, z, r, spec)?, x: (rp / r).ln() })
        })
        .collect();
    let pts: Vec<(f64, f64)> =
        stats.iter().flatten().filter(|s| s.value > 0.0 && s.value.is_finite()).map(|s| (s.x, s.value.ln())).collect();
    if pts.len() < 10 {
        return Err(Error::HypothesisUnmet(format!("only {} admissible triples", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let nu = sxy / sxx;
    let resid: Vec<f64> = pts.iter().map(|p| (p.1 - nu * p.0).exp()).collect();
    let constant = resid.iter().copied().fold(0.0, f64::max);
    let mut sorted = resid.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(EstimateFit {
        constant,
        exponent: nu,
        n_samples: pts.len(),
        max_violation_ratio: constant / sorted[sorted.len() / 2],
        n_excluded: pairs.len() - pts.len(),
    })
}

/// First-derivative bounds in frame coordinates at `z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeReport {
    /// `|K| delta^2 prod tau_k^2`.
    pub order_zero: EstimateFit,
    /// `|d/dz_k K| delta^{2 + [k=0]} prod tau_j^{2 + [j=k]}`, per frame axis.
    pub z_derivatives: Vec<EstimateFit>,
    /// The same for `d/d conj(w)_k`.
    pub w_derivatives: Vec<EstimateFit>,
}

/// Relative finite-difference step in units of `delta`.
pub const FD_STEP: f64 = 1e-2;

pub fn derivative_probe(ev: &KernelEvaluator, pairs: &[(CPoint, CPoint)]) -> Result<DerivativeReport> {
    let d = ev.domain();
    let n = d.dim();
    let rows: Vec<Option<(f64, Vec<f64>, Vec<f64>)>> = pairs
        .par_iter()
        .map(|(z, w)| {
            let m = polydisc_distance(d, z, w).ok()?;
            let delta = d.rho(z).abs() + d.rho(w).abs() + m.value;
            let frame = frame_unchecked(d, z, delta).ok()?;
            let basis = LocalBasis::at(d, z).ok()?;
            let scale: f64 = frame.tau.iter().map(|t| t * t).product();
            let h = FD_STEP * delta;
            let k0 = ev.eval(z, w).ok()?.norm();
            let mut dz = Vec::with_capacity(n);
            let mut dw = Vec::with_capacity(n);
            for (k, axis) in basis.axes.iter().enumerate() {
                let step = Complex64::new(h, 0.0);
                let zp = z.axpy(step, axis);
                let zm = z.axpy(-step, axis);
                let wp = w.axpy(step, axis);
                let wm = w.axpy(-step, axis);
                if ![&zp, &zm, &wp, &wm].iter().all(|p| d.contains(p)) {
                    return None;
                }
                let gz = (ev.eval(&zp, w).ok()? - ev.eval(&zm, w).ok()?) / (2.0 * h);
                let gw = (ev.eval(z, &wp).ok()? - ev.eval(z, &wm).ok()?) / (2.0 * h);
                dz.push(gz.norm() * scale * frame.tau[k]);
                dw.push(gw.norm() * scale * frame.tau[k]);
            }
            Some((k0 * scale, dz, dw))
        })
        .collect();
    let col = |f: &dyn Fn(&(f64, Vec<f64>, Vec<f64>)) -> f64| {
        summarize(rows.iter().map(|r| r.as_ref().map(|r| Stat { value: f(r), x: 0.0 })).collect(), true)
    };
    Ok(DerivativeReport {
        order_zero: col(&|r| r.0)?,
        z_derivatives: (0..n).map(|k| col(&|r| r.1[k])).collect::<Result<_>>()?,
        w_derivatives: (0..n).map(|k| col(&|r| r.2[k])).collect::<Result<_>>()?,
    })
}

/// Inf of `|K(z,w)| mu(B(w, d(z,w)))` over pairs with
/// `max(d(z,bΩ), d(w,bΩ)) <= kappa d(z,w)` and `d(z,w) <= eps0`.
pub fn lower_bound_probe(
    ev: &KernelEvaluator,
    kappa: f64,
    eps0: f64,
    pairs: &[(CPoint, CPoint)],
    spec: &QuadratureSpec,
) -> Result<EstimateFit> {
    let d = ev.domain();
    let stats = pairs
        .par_iter()
        .map(|(z, w)| {
            let r = quasi_distance(d, z, w);
            let bz = boundary_distance(d, z).ok()?;
            let bw = boundary_distance(d, w).ok()?;
            if r == 0.0 || r > eps0 || bz.max(bw) > kappa * r {
                return None;
            }
            let k = ev.eval(z, w).ok()?.norm();
            Some(Stat { value: k * measure(d, w, r, spec)?, x: 0.0 })
        })
        .collect();
    summarize(stats, false).map_err(|_| Error::HypothesisUnmet("no pair satisfies the separation hypothesis".into()))
}

/// Pairs separated by about `r` for each `r` in `radii`, with both boundary
/// distances below `kappa r`.
pub fn separated_pairs(domain: &Domain, radii: &[f64], kappa: f64, per_radius: usize, seed: u64) -> Vec<(CPoint, CPoint)> {
    let total = radii.len() * per_radius;
    par_generate(seed, total, |rng, i| {
        let r = radii[i / per_radius];
        let u = domain.random_boundary_point(rng);
        let z = domain.at_depth(&u, log_uniform(rng, (kappa * r * 1e-2, kappa * r * 0.5)));
        let dir = complex_gaussian(rng, domain.dim());
        let v = u.add(&dir.scale(r * rng.random_range(0.5..1.0) / dir.norm()));
        let v = v.scale(1.0 / domain.gauge(&v));
        let w = domain.at_depth(&v, log_uniform(rng, (kappa * r * 1e-2, kappa * r * 0.5)));
        (z, w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> (Domain, KernelEvaluator) {
        let d = Domain::disk();
        let ev = KernelEvaluator::for_domain(&d).unwrap();
        (d, ev)
    }

    #[test]
    fn identical_points_are_skipped() {
        let (_, ev) = disk();
        let z = CPoint::c1(0.9, 0.0);
        let pairs = vec![(z.clone(), z.clone()), (z.clone(), CPoint::c1(0.0, 0.95))];
        let fit = size_probe(&ev, &pairs, &QuadratureSpec::polar(32, 32)).unwrap();
        assert_eq!(fit.n_samples, 1);
        assert_eq!(fit.n_excluded, 1);
    }

    #[test]
    fn disk_boundary_size_bound() {
        let (d, ev) = disk();
        let pairs = PairSampler::default().sample(&d, 200, 3);
        let fit = boundary_size_probe(&ev, &pairs, &QuadratureSpec::polar(32, 32)).unwrap();
        assert!(fit.constant.is_finite() && fit.constant < 10.0);
        for (z, w) in &pairs {
            let k = ev.eval(z, w).unwrap().norm();
            assert!(k * (1.0 - z.norm()).powi(2) < 1.0);
        }
    }

    #[test]
    fn disk_smoothness_exponent() {
        let (d, ev) = disk();
        let pairs = PairSampler::default().sample(&d, 300, 4);
        let fit = smoothness_probe(&ev, &pairs, 4.0, 9, &QuadratureSpec::polar(32, 32)).unwrap();
        assert!(fit.exponent >= 0.5, "{fit:?}");
    }

    #[test]
    fn disk_lower_bound() {
        let (d, ev) = disk();
        let radii: Vec<f64> = (3..=7).map(|k| 0.5f64.powi(k)).collect();
        let pairs = separated_pairs(&d, &radii, 0.2, 40, 1);
        let fit = lower_bound_probe(&ev, 0.2, 0.5, &pairs, &QuadratureSpec::polar(32, 32)).unwrap();
        assert!(fit.constant >= 0.01, "{fit:?}");
    }

    #[test]
    fn derivative_probe_on_disk() {
        let (d, ev) = disk();
        let pairs = PairSampler::default().sample(&d, 200, 5);
        let rep = derivative_probe(&ev, &pairs).unwrap();
        assert!(rep.order_zero.constant.is_finite());
        assert_eq!(rep.z_derivatives.len(), 1);
        assert!(rep.z_derivatives[0].constant.is_finite());
    }
}
