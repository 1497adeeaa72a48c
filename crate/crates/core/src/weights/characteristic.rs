//! Békollè–Bonami and Muckenhoupt characteristics over ball families.

use serde::Serialize;

use super::family::min_radius;
use super::weight::{dual_weight, Weight};
use crate::error::{Error, Result};
use crate::geometry::{CPoint, Domain, QuasiBall};
use crate::quadrature::points::ABS_FLOOR;
use crate::quadrature::{integrate_ball, sample_ball, BallOptions, IntegralEstimate, PointSet, QuadratureSpec};

/// Depth floor relative to the smallest radius of the family.
pub const DEFAULT_FLOOR_FRACTION: f64 = 0.125;

/// Ratio between the argmax product at the floor and at a quarter of it above
/// which the estimate is reported as divergent.
pub const DIVERGENCE_RATIO: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BpOptions {
    pub spec: QuadratureSpec,
    /// Averages are taken over `B ∩ {depth >= floor}` with
    /// `floor = floor_fraction * min radius`, unless `floor` is set.
    pub floor_fraction: f64,
    pub floor: Option<f64>,
    pub check_divergence: bool,
}

impl BpOptions {
    pub fn new(spec: QuadratureSpec) -> Self {
        BpOptions { spec, floor_fraction: DEFAULT_FLOOR_FRACTION, floor: None, check_divergence: true }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = Some(floor);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerBall {
    pub value: f64,
    pub std_error: f64,
    pub avg_sigma: f64,
    pub avg_dual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BpEstimate {
    pub value: f64,
    pub std_error: f64,
    pub p: f64,
    pub n_balls: usize,
    pub argmax_ball: QuasiBall,
    pub min_radius: f64,
    pub floor: f64,
    pub per_ball: Vec<PerBall>,
    pub divergent: bool,
    /// Argmax product recomputed at a quarter of the floor.
    pub refined_value: Option<f64>,
}

/// Averages of `sigma` and `sigma'` over one point set and their product.
fn product_on(set: &PointSet, sigma: &Weight, dual: &Weight) -> PerBall {
    let ones = vec![1.0; set.len()];
    let s: Vec<f64> = set.evaluate(|z| sigma.eval(z));
    let d: Vec<f64> = set.evaluate(|z| dual.eval(z));
    let pm1 = sigma.p - 1.0;
    let g = |t: &[f64]| (t[1] / t[0]) * (t[2] / t[0]).powf(pm1);
    let (value, std_error) = set.jackknife(&[&ones, &s, &d], g);
    let (avg_sigma, _) = set.jackknife(&[&ones, &s], |t| t[1] / t[0]);
    let (avg_dual, _) = set.jackknife(&[&ones, &d], |t| t[1] / t[0]);
    PerBall { value, std_error, avg_sigma, avg_dual }
}

/// `<sigma>_B <sigma'>_B^{p-1}` on `B ∩ {depth >= floor}`.
pub fn ball_product(
    domain: &Domain,
    sigma: &Weight,
    ball: &QuasiBall,
    floor: f64,
    spec: &QuadratureSpec,
) -> Result<PerBall> {
    let dual = dual_weight(sigma)?;
    let opts = BallOptions::floor(floor);
    let set = sample_ball(domain, ball, &opts, spec)?;
    if set.is_empty() || set.total_weight() <= 0.0 {
        return Err(Error::Sampling("ball has no nodes above the depth floor".into()));
    }
    let mut out = product_on(&set, sigma, &dual);
    if spec.is_deterministic() {
        let fine = product_on(&sample_ball(domain, ball, &opts, &spec.refined())?, sigma, &dual);
        out.std_error = (fine.value - out.value).abs();
    }
    Ok(out)
}

fn characteristic(domain: &Domain, sigma: &Weight, family: &[QuasiBall], opts: &BpOptions) -> Result<BpEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty ball family".into()));
    }
    let rmin = min_radius(family);
    let floor = opts.floor.unwrap_or(opts.floor_fraction * rmin);
    let per_ball = family
        .iter()
        .map(|b| ball_product(domain, sigma, b, floor, &opts.spec))
        .collect::<Result<Vec<_>>>()?;
    let (i, best) = per_ball
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap())
        .map(|(i, b)| (i, *b))
        .unwrap();
    let mut refined_value = None;
    let mut divergent = false;
    if opts.check_divergence && !sigma.is_constant() {
        let fine = ball_product(domain, sigma, &family[i], floor / 4.0, &opts.spec)?;
        divergent = fine.value > DIVERGENCE_RATIO * best.value;
        refined_value = Some(fine.value);
    }
    Ok(BpEstimate {
        value: best.value,
        std_error: best.std_error,
        p: sigma.p,
        n_balls: family.len(),
        argmax_ball: family[i].clone(),
        min_radius: rmin,
        floor,
        per_ball,
        divergent,
        refined_value,
    })
}

/// `sup_B <sigma>_B <sigma'>_B^{p-1}` over boundary-touching balls.
pub fn bp_characteristic(
    domain: &Domain,
    sigma: &Weight,
    family: &[QuasiBall],
    opts: &BpOptions,
) -> Result<BpEstimate> {
    for b in family {
        if !b.touches_boundary(domain)? {
            return Err(Error::HypothesisUnmet(format!(
                "ball at {:?} with radius {} does not touch the boundary",
                b.center, b.radius
            )));
        }
    }
    characteristic(domain, sigma, family, opts)
}

/// The same supremum over an unconstrained family.
pub fn ap_characteristic(
    domain: &Domain,
    sigma: &Weight,
    family: &[QuasiBall],
    opts: &BpOptions,
) -> Result<BpEstimate> {
    characteristic(domain, sigma, family, opts)
}

/// `sigma(lambda' B) / sigma(B)` for a ball with `lambda B` touching the boundary.
pub fn weight_doubling_probe(
    domain: &Domain,
    sigma: &Weight,
    ball: &QuasiBall,
    lambda: f64,
    lambda_prime: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    if !(lambda > 1.0 && lambda_prime >= 1.0) {
        return Err(Error::InvalidArgument("dilations must be at least one".into()));
    }
    if !ball.dilate(lambda).touches_boundary(domain)? {
        return Err(Error::HypothesisUnmet(format!("{lambda} B does not touch the boundary")));
    }
    let f = |z: &CPoint| sigma.eval(z);
    let small = integrate_ball(domain, ball, f, spec)?;
    if lambda_prime == 1.0 {
        return Ok(IntegralEstimate { value: 1.0, std_error: 0.0, ..small });
    }
    let big = integrate_ball(domain, &ball.dilate(lambda_prime), f, spec)?;
    Ok(big.ratio(&small))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub max_abs_deviation: f64,
    /// Largest deviation in units of the per-ball standard error.
    pub max_deviation_in_se: f64,
}

/// Per ball, the `B_q` product of `sigma'` minus the `(q-1)`-th power of the
/// `B_p` product of `sigma`.
pub fn duality_identity_check(
    domain: &Domain,
    sigma: &Weight,
    family: &[QuasiBall],
    floor: f64,
    spec: &QuadratureSpec,
) -> Result<DualityReport> {
    let dual = dual_weight(sigma)?;
    let dual2 = dual_weight(&dual)?;
    let q = sigma.q();
    let mut max_abs: f64 = 0.0;
    let mut max_se: f64 = 0.0;
    for b in family {
        let set = sample_ball(domain, b, &BallOptions::floor(floor), spec)?;
        let ones = vec![1.0; set.len()];
        let s = set.evaluate(|z| sigma.eval(z));
        let d = set.evaluate(|z| dual.eval(z));
        let dd = set.evaluate(|z| dual2.eval(z));
        let bp = |t: &[f64]| (t[1] / t[0]) * (t[2] / t[0]).powf(sigma.p - 1.0);
        let bq = |t: &[f64]| (t[2] / t[0]) * (t[3] / t[0]).powf(q - 1.0);
        let (p_val, p_se) = set.jackknife(&[&ones, &s, &d, &dd], bp);
        let (q_val, _) = set.jackknife(&[&ones, &s, &d, &dd], bq);
        let dev = (q_val - p_val.powf(q - 1.0)).abs();
        max_abs = max_abs.max(dev);
        let se = (q - 1.0) * p_val.powf(q - 2.0) * p_se;
        max_se = max_se.max(if dev == 0.0 { 0.0 } else { dev / se.max(ABS_FLOOR * p_val) });
    }
    Ok(DualityReport { max_abs_deviation: max_abs, max_deviation_in_se: max_se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::family::{ball_family, FamilySpec};

    fn disk_family(hi: i32) -> (Domain, Vec<QuasiBall>) {
        let d = Domain::disk();
        let fam = ball_family(&d, &FamilySpec::touching(4, FamilySpec::dyadic(2, hi), 1)).unwrap();
        (d, fam)
    }

    #[test]
    fn constant_weight_has_unit_characteristic() {
        let (d, fam) = disk_family(5);
        for spec in [QuadratureSpec::polar(32, 32), QuadratureSpec::uniform(20_000, 3)] {
            let est = bp_characteristic(&d, &Weight::constant(&d, 1.0, 2.0).unwrap(), &fam, &BpOptions::new(spec))
                .unwrap();
            assert_eq!(est.value, 1.0);
            assert!(est.per_ball.iter().all(|b| b.value == 1.0));
        }
    }

    #[test]
    fn per_ball_products_respect_holder() {
        let (d, fam) = disk_family(5);
        let est = bp_characteristic(
            &d,
            &Weight::power(&d, 0.5, 2.0).unwrap(),
            &fam,
            &BpOptions::new(QuadratureSpec::stratified(4, 20_000, 2)),
        )
        .unwrap();
        assert!(est.per_ball.iter().all(|b| b.value >= 1.0 - 3.0 * b.std_error));
        assert!(!est.divergent);
    }

    #[test]
    fn adding_balls_never_decreases_estimate() {
        let (d, fam) = disk_family(5);
        let w = Weight::power(&d, 0.8, 2.0).unwrap();
        let opts = BpOptions::new(QuadratureSpec::polar(32, 32)).with_floor(1e-3);
        let a = bp_characteristic(&d, &w, &fam[..10], &opts).unwrap().value;
        let b = bp_characteristic(&d, &w, &fam, &opts).unwrap().value;
        assert!(b >= a);
    }

    #[test]
    fn non_touching_ball_is_rejected() {
        let d = Domain::disk();
        let b = QuasiBall::new(&d, CPoint::c1(0.2, 0.0), 0.1).unwrap();
        let w = Weight::constant(&d, 1.0, 2.0).unwrap();
        assert!(bp_characteristic(&d, &w, &[b.clone()], &BpOptions::new(QuadratureSpec::polar(16, 16))).is_err());
        assert!(ap_characteristic(&d, &w, &[b], &BpOptions::new(QuadratureSpec::polar(16, 16))).is_ok());
    }

    #[test]
    fn duality_identity_holds() {
        let (d, fam) = disk_family(4);
        for p in [2.0, 3.0] {
            let w = Weight::power(&d, 0.5, p).unwrap();
            let r = duality_identity_check(&d, &w, &fam, 1e-3, &QuadratureSpec::uniform(20_000, 4)).unwrap();
            assert!(r.max_deviation_in_se <= 3.0, "{r:?}");
        }
    }

    #[test]
    fn doubling_of_constant_weight_is_measure_ratio() {
        let d = Domain::disk();
        let b = QuasiBall::new(&d, CPoint::c1(0.9, 0.0), 0.05).unwrap();
        let one = Weight::constant(&d, 1.0, 2.0).unwrap();
        let spec = QuadratureSpec::polar(32, 32);
        assert_eq!(weight_doubling_probe(&d, &one, &b, 3.0, 1.0, &spec).unwrap().value, 1.0);
        let r = weight_doubling_probe(&d, &one, &b, 3.0, 2.0, &spec).unwrap().value;
        assert!((2.0..=5.0).contains(&r), "{r}");
    }
}
