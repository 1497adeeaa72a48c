//! The two-ball kernel lower bound and the necessity table.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::projection::{disk_rule, Projector};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::{quasi_distance, CPoint, Domain, DomainKind, QuasiBall};
use crate::kernels::KernelEvaluator;
use crate::quadrature::{sample_ball, sample_domain, BallOptions, PointSet, QuadratureSpec};
use crate::rng::pairwise_sum;
use crate::weights::characteristic::{ball_product, DEFAULT_FLOOR_FRACTION};
use crate::weights::{dual_weight, Weight};

/// How `B2` is chosen among the admissible candidates of the search annulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Center distance closest to the nominal `C R`.
    Nominal,
    /// Largest separation margin.
    MaxMargin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBallSpec {
    /// Separation constant `C2`.
    pub c2: f64,
    pub selection: Selection,
    /// Candidate centers scanned along the boundary direction.
    pub candidates: usize,
    /// Rule for `P chi_B` at each grid point.
    pub projection: QuadratureSpec,
    /// Rule whose nodes form the evaluation grid inside a ball.
    pub grid: QuadratureSpec,
}

impl Default for TwoBallSpec {
    fn default() -> Self {
        TwoBallSpec {
            c2: 4.0,
            selection: Selection::Nominal,
            candidates: 2048,
            projection: QuadratureSpec::polar(32, 32),
            grid: QuadratureSpec::polar(32, 32),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoBallReport {
    pub radius: f64,
    pub b1: QuasiBall,
    pub b2: QuasiBall,
    /// `d(c1, c2)`.
    pub center_distance: f64,
    /// `inf_{z in B2} d(c1, z) - C2 R`.
    pub separation_margin: f64,
    /// `inf_{z in B2} |P chi_B1 (z)| / <chi_B1>_B1`.
    pub inf_constant: f64,
    /// The same with the roles of the balls exchanged.
    pub swapped_constant: f64,
    /// `mu(B1)`.
    pub measure_b1: f64,
    pub grid_points: usize,
}

/// Boundary point in the direction of the first coordinate axis, rotated by
/// `phi` in that coordinate. All model domains are circular in `z_1`.
fn boundary_center(domain: &Domain, phi: f64, depth: f64) -> CPoint {
    let mut u = CPoint::zeros(domain.dim());
    u.0[0] = Complex64::from_polar(1.0, phi);
    domain.at_depth(&u, depth)
}

fn grid_points(domain: &Domain, ball: &QuasiBall, spec: &QuadratureSpec) -> Result<PointSet> {
    let floor = if spec.is_deterministic() { 1e-3 * ball.radius } else { 0.0 };
    sample_ball(domain, ball, &BallOptions::floor(floor), spec)
}

/// `inf_{z in grid} |P chi_from (z)|` (the average of `chi_from` over `from` is 1).
fn inf_projection(proj: &Projector, from: &QuasiBall, grid: &PointSet) -> Result<f64> {
    let f = TestFunction::indicator(proj.domain(), from.clone());
    let vals = grid.points.par_iter().map(|z| Ok(proj.project(&f, z)?.value.norm())).collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// The pair `(B1, B2)` at radius `r` without the kernel evaluation.
pub fn ball_pair(domain: &Domain, r: f64, spec: &TwoBallSpec) -> Result<(QuasiBall, QuasiBall, f64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("radius {r} outside the small-ball regime")));
    }
    let b1 = QuasiBall::new(domain, boundary_center(domain, 0.0, r / 2.0), r)?;
    let target = (spec.c2 + 1.0) * r;
    let (lo, hi) = (0.5 * target, 1.5 * target);
    let n = spec.candidates.max(2);
    let mut best: Option<(f64, QuasiBall, f64)> = None;
    for i in 1..=n {
        let phi = PI * i as f64 / n as f64;
        let c = boundary_center(domain, phi, r / 2.0);
        let d = quasi_distance(domain, &b1.center, &c);
        if d < lo || d > hi {
            continue;
        }
        let b2 = QuasiBall::new(domain, c, r)?;
        let grid = grid_points(domain, &b2, &spec.grid)?;
        let inf_d = grid.points.iter().map(|z| quasi_distance(domain, &b1.center, z)).fold(f64::INFINITY, f64::min);
        let margin = inf_d - spec.c2 * r;
        if margin < 0.0 {
            continue;
        }
        let score = match spec.selection {
            Selection::Nominal => -(d - target).abs(),
            Selection::MaxMargin => margin,
        };
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, b2, margin));
        }
    }
    let (_, b2, margin) = best.ok_or_else(|| {
        Error::HypothesisUnmet(format!("no admissible B2 at center distance in [{lo:.3e}, {hi:.3e}] for R={r:.3e}"))
    })?;
    Ok((b1, b2, margin))
}

pub fn two_ball_lower_bound(ev: &KernelEvaluator, r: f64, spec: &TwoBallSpec) -> Result<TwoBallReport> {
    let domain = ev.domain();
    let (b1, b2, separation_margin) = ball_pair(domain, r, spec)?;
    let proj = Projector::new(ev.clone(), spec.projection)?;
    let g2 = grid_points(domain, &b2, &spec.grid)?;
    let g1 = grid_points(domain, &b1, &spec.grid)?;
    let inf_constant = inf_projection(&proj, &b1, &g2)?;
    let swapped_constant = inf_projection(&proj, &b2, &g1)?;
    let measure_b1 = sample_ball(domain, &b1, &BallOptions::default(), &spec.projection)?.total_weight();
    Ok(TwoBallReport {
        radius: r,
        center_distance: quasi_distance(domain, &b1.center, &b2.center),
        b1,
        b2,
        separation_margin,
        inf_constant,
        swapped_constant,
        measure_b1,
        grid_points: g2.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessitySpec {
    pub two_ball: TwoBallSpec,
    /// Depth floor of `B1` relative to the radius, for the product and for
    /// `sigma' chi_B1`.
    pub floor_fraction: f64,
    /// Rule for the ball averages of the product column.
    pub product: QuadratureSpec,
    /// Node counts of the probe grid for `||P f||`; graded around `B1`.
    pub grid_radial: usize,
    pub grid_angular: usize,
    /// Probe-grid sample size on domains other than the disk.
    pub grid_samples: usize,
}

impl Default for NecessitySpec {
    fn default() -> Self {
        NecessitySpec {
            two_ball: TwoBallSpec::default(),
            floor_fraction: DEFAULT_FLOOR_FRACTION,
            product: QuadratureSpec::polar(64, 64),
            grid_radial: 64,
            grid_angular: 128,
            grid_samples: 8192,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NecessityRow {
    pub radius: f64,
    pub floor: f64,
    /// `<sigma>_B1 <sigma'>_B1^{p-1}` on `B1 ∩ {depth >= floor}`.
    pub product: f64,
    pub product_se: f64,
    /// `||P chi_B2|| / ||chi_B2||` in `L^p_sigma`.
    pub ratio_chi_b2: f64,
    /// `||P (sigma' chi_B1)|| / ||sigma' chi_B1||`.
    pub ratio_dual_b1: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NecessityReport {
    pub weight: String,
    pub p: f64,
    pub rows: Vec<NecessityRow>,
}

impl NecessityReport {
    /// Smallest ratio between consecutive rows of a column.
    pub fn min_growth(&self, column: impl Fn(&NecessityRow) -> f64) -> f64 {
        self.rows.windows(2).map(|w| column(&w[1]) / column(&w[0])).fold(f64::INFINITY, f64::min)
    }

    /// Largest value of a column.
    pub fn max_of(&self, column: impl Fn(&NecessityRow) -> f64) -> f64 {
        self.rows.iter().map(column).fold(0.0, f64::max)
    }
}

/// `||P f||_{L^p_sigma} / ||f||_{L^p_sigma}`; `||f||` is integrated on the
/// support ball, `||P f||` on the probe grid.
fn norm_ratio(proj: &Projector, f: &TestFunction, sigma: &Weight, grid: &PointSet, spec: &QuadratureSpec) -> Result<f64> {
    let domain = proj.domain();
    let p = sigma.p;
    let ball = f.support().expect("necessity test functions are supported in a ball");
    let set = sample_ball(domain, ball, &BallOptions::floor(f.floor()), spec)?;
    let terms: Vec<f64> = set.points.iter().zip(&set.weights).map(|(z, w)| w * sigma.eval(z) * f.eval(z).norm().powf(p)).collect();
    let f_norm = pairwise_sum(&terms).powf(1.0 / p);
    let single = std::slice::from_ref(f);
    let pf = grid.points.par_iter().map(|z| Ok(proj.bundle(single, z)?.p[0].norm())).collect::<Result<Vec<_>>>()?;
    let terms: Vec<f64> = grid.points.iter().zip(&grid.weights).zip(&pf).map(|((z, w), v)| w * sigma.eval(z) * v.powf(p)).collect();
    Ok(pairwise_sum(&terms).powf(1.0 / p) / f_norm)
}

pub fn necessity_probe(
    ev: &KernelEvaluator,
    sigma: &Weight,
    radii: &[f64],
    spec: &NecessitySpec,
) -> Result<NecessityReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must be a nonempty decreasing list".into()));
    }
    let domain = ev.domain();
    let dual = dual_weight(sigma)?;
    let proj = Projector::new(ev.clone(), spec.two_ball.projection)?;
    let mut rows = Vec::with_capacity(radii.len());
    for r in radii {
        let (b1, b2, _) = ball_pair(domain, *r, &spec.two_ball)?;
        let floor = spec.floor_fraction * r;
        let prod = ball_product(domain, sigma, &b1, floor, &spec.product)?;
        let grid = if domain.kind() == DomainKind::UnitDisk {
            disk_rule(b1.center.0[0], 4, spec.grid_radial, spec.grid_angular)
        } else {
            sample_domain(domain, &QuadratureSpec::stratified(8, spec.grid_samples, 0))?
        };
        let chi = TestFunction::indicator(domain, b2);
        let weighted = TestFunction::WeightedIndicator { weight: dual.clone(), ball: b1, floor };
        let ratio_chi_b2 = norm_ratio(&proj, &chi, sigma, &grid, &spec.product)?;
        let ratio_dual_b1 = norm_ratio(&proj, &weighted, sigma, &grid, &spec.product)?;
        rows.push(NecessityRow {
            radius: *r,
            floor,
            product: prod.value,
            product_se: prod.std_error,
            ratio_chi_b2,
            ratio_dual_b1,
            max_ratio: ratio_chi_b2.max(ratio_dual_b1),
        });
    }
    Ok(NecessityReport { weight: sigma.label(), p: sigma.p, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_is_separated_and_touching() {
        let d = Domain::disk();
        let spec = TwoBallSpec::default();
        let (b1, b2, margin) = ball_pair(&d, 1.0 / 32.0, &spec).unwrap();
        assert!(margin >= 0.0);
        assert!(b1.touches_boundary(&d).unwrap() && b2.touches_boundary(&d).unwrap());
        let dist = quasi_distance(&d, &b1.center, &b2.center);
        assert!(dist >= 2.5 / 32.0 && dist <= 7.5 / 32.0);
        let far = ball_pair(&d, 1.0 / 32.0, &TwoBallSpec { selection: Selection::MaxMargin, ..spec }).unwrap();
        assert!(quasi_distance(&d, &b1.center, &far.1.center) >= dist);
    }

    #[test]
    fn constant_weight_product_is_one() {
        let d = Domain::disk();
        let ev = KernelEvaluator::for_domain(&d).unwrap();
        let sigma = Weight::constant(&d, 1.0, 2.0).unwrap();
        let spec = NecessitySpec { grid_radial: 32, grid_angular: 64, ..Default::default() };
        let r = necessity_probe(&ev, &sigma, &[0.25, 0.125], &spec).unwrap();
        for row in &r.rows {
            assert!((row.product - 1.0).abs() < 1e-12);
            assert!(row.max_ratio.is_finite() && row.max_ratio > 0.0 && row.max_ratio <= 1.0 + 1e-3, "{row:?}");
        }
        assert!(necessity_probe(&ev, &sigma, &[0.1, 0.2], &spec).is_err());
    }
}
