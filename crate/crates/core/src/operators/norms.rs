//! Weighted `L^p` norm ratios of the operators on test-function bundles.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::maximal::{maximal_many, DictionarySpec, MaximalDictionary};
use super::projection::{graded_edges, Projector};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::{CPoint, Domain, DomainKind};
use crate::kernels::KernelEvaluator;
use crate::quadrature::{sample_domain, PointSet, QuadratureSpec, Rule1d};
use crate::rng::{derive_seed, pairwise_sum, stream};
use crate::weights::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorTag {
    #[serde(rename = "P")]
    P,
    #[serde(rename = "P+")]
    PPlus,
    #[serde(rename = "M")]
    M,
}

impl std::fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OperatorTag::P => "P",
            OperatorTag::PPlus => "P+",
            OperatorTag::M => "M",
        })
    }
}

/// Rules behind a norm-ratio estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    /// Rule for the operator integrals at each probe point.
    pub projection: QuadratureSpec,
    /// Probe-grid refinement level; each level doubles the grid resolution.
    pub grid_level: usize,
    /// Probe grid on domains without a deterministic grid.
    pub grid_samples: usize,
    pub seed: u64,
    pub dictionary: DictionarySpec,
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec {
            projection: QuadratureSpec::polar(32, 64),
            grid_level: 0,
            grid_samples: 2048,
            seed: 0,
            dictionary: DictionarySpec::default(),
        }
    }
}

/// Probe grid for the norm integrals. On the disk: composite Gauss in the
/// radius graded towards the boundary times the periodic trapezoid rule in
/// the angle. Elsewhere: a boundary-stratified sample.
pub fn probe_grid(domain: &Domain, level: usize, samples: usize, seed: u64) -> Result<PointSet> {
    if domain.kind() != DomainKind::UnitDisk {
        let spec = QuadratureSpec::stratified(6, samples << level, derive_seed(seed, 0x9e1d));
        return sample_domain(domain, &spec);
    }
    let s = 0.5f64.powi(level as i32);
    let mut rad = Rule1d::default();
    for w in graded_edges(1.0, s / 64.0, s / 4.0).windows(2) {
        rad.push_interval(1.0 - w[1], 1.0 - w[0], 4);
    }
    let ang = Rule1d::periodic(0.0, 32 << level);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (t, wt) in ang.nodes.iter().zip(&ang.weights) {
        for (r, wr) in rad.nodes.iter().zip(&rad.weights) {
            points.push(CPoint::new(&[Complex64::from_polar(*r, *t)]));
            weights.push(wt * wr * r);
        }
    }
    Ok(PointSet::deterministic(points, weights))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRatioReport {
    pub op: OperatorTag,
    /// Max over the bundle of `||T f|| / ||f||`.
    pub sup_ratio: f64,
    /// Per function; `None` for excluded zero-norm inputs.
    pub ratios: Vec<Option<f64>>,
    pub n_excluded: usize,
    pub n_probe_points: usize,
}

/// `(sum_i w_i sigma_i |g_i|^p)^(1/p)`.
fn weighted_norm(grid: &PointSet, sigma: &[f64], vals: &[f64], p: f64) -> f64 {
    let terms: Vec<f64> =
        grid.weights.iter().zip(sigma).zip(vals).map(|((w, s), v)| w * s * v.abs().powf(p)).collect();
    pairwise_sum(&terms).powf(1.0 / p)
}

/// Norm ratios of several operators on a shared bundle and probe grid.
pub fn norm_ratios(
    ops: &[OperatorTag],
    ev: &KernelEvaluator,
    sigma: &Weight,
    bundle: &[TestFunction],
    spec: &NormSpec,
) -> Result<Vec<NormRatioReport>> {
    if bundle.is_empty() {
        return Err(Error::InvalidArgument("empty test-function bundle".into()));
    }
    let domain = ev.domain();
    let p = sigma.p;
    let grid = probe_grid(domain, spec.grid_level, spec.grid_samples, spec.seed)?;
    let sig: Vec<f64> = grid.evaluate(|z| sigma.eval(z));
    let f_norms: Vec<f64> = bundle
        .iter()
        .map(|f| weighted_norm(&grid, &sig, &grid.evaluate(|z| f.eval(z).norm()), p))
        .collect();
    let keep: Vec<bool> = f_norms.iter().map(|n| *n > 1e-300 && n.is_finite()).collect();
    let kept: Vec<TestFunction> = bundle.iter().zip(&keep).filter(|(_, k)| **k).map(|(f, _)| f.clone()).collect();

    let needs_projection = ops.iter().any(|o| *o != OperatorTag::M);
    let (p_vals, pp_vals) = if needs_projection && !kept.is_empty() {
        let proj = Projector::new(ev.clone(), spec.projection)?;
        let rows = grid.points.par_iter().map(|z| proj.bundle(&kept, z)).collect::<Result<Vec<_>>>()?;
        let p_vals: Vec<Vec<f64>> =
            (0..kept.len()).map(|i| rows.iter().map(|r| r.p[i].norm()).collect()).collect();
        let pp_vals: Vec<Vec<f64>> = (0..kept.len()).map(|i| rows.iter().map(|r| r.positive[i]).collect()).collect();
        (p_vals, pp_vals)
    } else {
        (vec![], vec![])
    };
    let m_vals: Vec<Vec<f64>> = if ops.contains(&OperatorTag::M) {
        let dict = MaximalDictionary::new(domain, &spec.dictionary)?;
        let abs: Vec<_> = kept.iter().map(|f| move |w: &CPoint| f.eval(w).norm()).collect();
        maximal_many(&dict, &abs, &grid.points)?
    } else {
        vec![]
    };

    let kept_norms: Vec<f64> = f_norms.iter().zip(&keep).filter(|(_, k)| **k).map(|(n, _)| *n).collect();
    let n_excluded = keep.iter().filter(|k| !**k).count();
    Ok(ops
        .iter()
        .map(|op| {
            let vals = match op {
                OperatorTag::P => &p_vals,
                OperatorTag::PPlus => &pp_vals,
                OperatorTag::M => &m_vals,
            };
            let mut it = vals.iter().zip(&kept_norms).map(|(v, n)| weighted_norm(&grid, &sig, v, p) / n);
            let ratios: Vec<Option<f64>> = keep.iter().map(|k| if *k { it.next() } else { None }).collect();
            let sup_ratio = ratios.iter().flatten().fold(f64::NAN, |a, b| if a.is_nan() || *b > a { *b } else { a });
            NormRatioReport { op: *op, sup_ratio, ratios, n_excluded, n_probe_points: grid.len() }
        })
        .collect())
}

pub fn weighted_norm_ratio(
    op: OperatorTag,
    ev: &KernelEvaluator,
    sigma: &Weight,
    bundle: &[TestFunction],
    spec: &NormSpec,
) -> Result<NormRatioReport> {
    Ok(norm_ratios(&[op], ev, sigma, bundle, spec)?.remove(0))
}

/// Random bundle mixing holomorphic polynomials of degree at most 4,
/// anti-holomorphic monomials and near-boundary bumps.
pub fn random_bundle(domain: &Domain, n: usize, seed: u64) -> Vec<TestFunction> {
    let dim = domain.dim();
    (0..n)
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            match i % 4 {
                0 => {
                    let terms = (0..3)
                        .map(|_| {
                            let mut alpha = vec![0u32; dim];
                            let deg = rng.random_range(0..=4u32);
                            for _ in 0..deg {
                                alpha[rng.random_range(0..dim)] += 1;
                            }
                            (alpha, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                        })
                        .collect();
                    TestFunction::HoloPoly(terms)
                }
                1 => {
                    let mut alpha = vec![0u32; dim];
                    alpha[rng.random_range(0..dim)] = rng.random_range(1..=3);
                    TestFunction::AntiHolo(alpha)
                }
                _ => TestFunction::random_bump(domain, derive_seed(seed, i as u64)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_integrates_area() {
        for l in 0..3 {
            let g = probe_grid(&Domain::disk(), l, 0, 0).unwrap();
            assert!((g.total_weight() - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn holomorphic_ratio_is_one_and_constant_maximal_is_exact() {
        let d = Domain::disk();
        let ev = KernelEvaluator::for_domain(&d).unwrap();
        let sigma = Weight::power(&d, 0.5, 2.0).unwrap();
        let bundle = vec![TestFunction::monomial(vec![3]), TestFunction::constant(1, 1.0), TestFunction::zero()];
        let spec = NormSpec { dictionary: DictionarySpec { levels: 5, ..Default::default() }, ..Default::default() };
        let r = norm_ratios(&[OperatorTag::P, OperatorTag::M], &ev, &sigma, &bundle, &spec).unwrap();
        assert_eq!(r[0].n_excluded, 1);
        assert!(r[0].ratios[2].is_none());
        assert!((r[0].ratios[0].unwrap() - 1.0).abs() < 1e-3);
        assert!((r[0].ratios[1].unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(r[1].ratios[1], Some(1.0));
    }
}
