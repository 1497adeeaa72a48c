//! The Bergman projection `P` and the positive operator `P+`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::test_function::TestFunction;
use crate::error::Result;
use crate::geometry::{CPoint, Domain, DomainKind, QuasiBall};
use crate::kernels::KernelEvaluator;
use crate::quadrature::points::ABS_FLOOR;
use crate::rng::BATCH;
use crate::quadrature::{
    sample_ball, sample_domain, BallOptions, Focus, IntegralEstimate, PointSet, QuadratureSpec, Rule1d, Strategy,
};

/// Integrates `K(z, .) f` and `|K(z, .)| f` for a fixed kernel and rule.
#[derive(Clone, Debug)]
pub struct Projector {
    ev: KernelEvaluator,
    spec: QuadratureSpec,
}

/// `P f_i(z)` and `P+ |f_i|(z)` for a bundle of functions at one point.
#[derive(Clone, Debug, Default)]
pub struct BundleValues {
    pub p: Vec<Complex64>,
    pub positive: Vec<f64>,
}

impl Projector {
    pub fn new(ev: KernelEvaluator, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Projector { ev, spec })
    }

    pub fn evaluator(&self) -> &KernelEvaluator {
        &self.ev
    }

    pub fn domain(&self) -> &Domain {
        self.ev.domain()
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Nodes for integrals against `K(z, .)` of a function supported in
    /// `support` (cut to `{depth >= floor}`).
    pub fn nodes(&self, support: Option<(&QuasiBall, f64)>, z: &CPoint, spec: &QuadratureSpec) -> Result<PointSet> {
        let domain = self.domain();
        let disk = domain.kind() == DomainKind::UnitDisk;
        match (support, spec.strategy) {
            (Some((ball, floor)), Strategy::PolarGauss { .. }) if disk => {
                sample_ball(domain, ball, &BallOptions { floor, focus: Some(z.clone()) }, spec)
            }
            (None, Strategy::PolarGauss { radial, angular }) if disk => {
                Ok(disk_rule(z.0[0], spec.panel_order(), radial, angular))
            }
            (Some((ball, floor)), s) if !matches!(s, Strategy::PolarGauss { .. }) => {
                sample_ball(domain, ball, &BallOptions::floor(floor), spec)
            }
            _ => sample_domain(domain, spec),
        }
    }

    fn kernel_row(&self, z: &CPoint, set: &PointSet) -> Vec<Complex64> {
        set.evaluate(|w| self.ev.eval(z, w).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
    }

    fn support_of(f: &TestFunction) -> Option<(&QuasiBall, f64)> {
        f.support().map(|b| (b, f.floor()))
    }

    fn project_once(&self, f: &TestFunction, z: &CPoint, spec: &QuadratureSpec) -> Result<(PointSet, Vec<Complex64>)> {
        let set = self.nodes(Self::support_of(f), z, spec)?;
        let k = self.kernel_row(z, &set);
        let vals = set.points.par_iter().zip(&k).map(|(w, k)| k * f.eval(w)).collect();
        Ok((set, vals))
    }

    /// `P f(z) = ∫ K(z,w) f(w) dmu(w)`. Deterministic rules estimate their
    /// error by node doubling.
    pub fn project(&self, f: &TestFunction, z: &CPoint) -> Result<IntegralEstimate<Complex64>> {
        self.domain().check_interior(z)?;
        let (set, vals) = self.project_once(f, z, &self.spec)?;
        let mut est = set.estimate_complex(&vals, self.spec.rel_tolerance);
        if self.spec.is_deterministic() {
            let (fine, fv) = self.project_once(f, z, &self.spec.refined())?;
            let fine = fine.estimate_complex(&fv, self.spec.rel_tolerance);
            est.std_error = (est.value - fine.value).norm();
            est.flagged |= est.std_error > self.spec.rel_tolerance * est.value.norm().max(ABS_FLOOR);
        }
        Ok(est)
    }

    fn positive_once(&self, f: &TestFunction, z: &CPoint, spec: &QuadratureSpec) -> Result<(PointSet, Vec<f64>)> {
        let set = self.nodes(Self::support_of(f), z, spec)?;
        let k = self.kernel_row(z, &set);
        let vals = set.points.par_iter().zip(&k).map(|(w, k)| k.norm() * f.eval(w).norm()).collect();
        Ok((set, vals))
    }

    /// `P+ |f| (z) = ∫ |K(z,w)| |f(w)| dmu(w)`; equal to `P+ f` for `f >= 0`.
    pub fn positive(&self, f: &TestFunction, z: &CPoint) -> Result<IntegralEstimate> {
        self.domain().check_interior(z)?;
        let (set, vals) = self.positive_once(f, z, &self.spec)?;
        let mut est = set.estimate(&vals, self.spec.rel_tolerance);
        if self.spec.is_deterministic() {
            let (fine, fv) = self.positive_once(f, z, &self.spec.refined())?;
            let fine = fine.estimate(&fv, self.spec.rel_tolerance).value;
            est.std_error = (est.value - fine).abs();
            est.flagged |= est.std_error > self.spec.rel_tolerance * est.value.abs().max(ABS_FLOOR);
        }
        Ok(est)
    }

    /// `P` and `P+` of every function of a bundle at `z` on a single rule
    /// without error estimates. Functions without a support ball share nodes.
    pub fn bundle(&self, fs: &[TestFunction], z: &CPoint) -> Result<BundleValues> {
        let mut out = BundleValues { p: vec![Complex64::new(0.0, 0.0); fs.len()], positive: vec![0.0; fs.len()] };
        let (global, local): (Vec<usize>, Vec<usize>) = (0..fs.len()).partition(|i| fs[*i].support().is_none());
        if !global.is_empty() {
            let set = self.nodes(None, z, &self.spec)?;
            let k = self.kernel_row(z, &set);
            let idx: Vec<usize> = (0..set.len()).collect();
            // fixed chunks keep the summation order independent of the pool
            let sums: Vec<Vec<(Complex64, f64)>> = idx
                .par_chunks(BATCH)
                .map(|chunk| {
                    let mut acc = vec![(Complex64::new(0.0, 0.0), 0.0); global.len()];
                    for &j in chunk {
                        let (w, k, wt) = (&set.points[j], k[j], set.weights[j]);
                        for (a, i) in acc.iter_mut().zip(&global) {
                            let v = fs[*i].eval(w);
                            a.0 += k * v * wt;
                            a.1 += k.norm() * v.norm() * wt;
                        }
                    }
                    acc
                })
                .collect();
            for chunk in sums {
                for (a, i) in chunk.iter().zip(&global) {
                    out.p[*i] += a.0;
                    out.positive[*i] += a.1;
                }
            }
        }
        for i in local {
            let (set, vals) = self.project_once(&fs[i], z, &self.spec)?;
            out.p[i] = set.estimate_complex(&vals, self.spec.rel_tolerance).value;
            let (set, vals) = self.positive_once(&fs[i], z, &self.spec)?;
            out.positive[i] = set.estimate(&vals, self.spec.rel_tolerance).value;
        }
        Ok(out)
    }
}

pub fn bergman_project(
    ev: &KernelEvaluator,
    f: &TestFunction,
    z: &CPoint,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate<Complex64>> {
    Projector::new(ev.clone(), *spec)?.project(f, z)
}

pub fn positive_project(
    ev: &KernelEvaluator,
    f: &TestFunction,
    z: &CPoint,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    Projector::new(ev.clone(), *spec)?.positive(f, z)
}

/// Offsets `0 = e_0 < e_1 < ... = len` whose steps start at `h0` and double up
/// to `hmax`.
pub(crate) fn graded_edges(len: f64, h0: f64, hmax: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut h = h0.min(hmax);
    let mut x = 0.0;
    while x < len {
        let next = if len - (x + h) < 0.5 * h { len } else { x + h };
        edges.push(next);
        x = next;
        h = (2.0 * h).min(hmax);
    }
    edges
}

/// Whole-disk rule graded radially and angularly around `z` when `z` is
/// close to the boundary; panels never exceed the size implied by the
/// `(radial, angular)` node counts. Away from the boundary the angular rule is
/// the periodic trapezoid rule.
pub(crate) fn disk_rule(z: Complex64, order: usize, radial: usize, angular: usize) -> PointSet {
    let hmax_r = (order as f64 / radial as f64).min(0.5);
    let hmax_t = (2.0 * PI * order as f64 / angular as f64).min(PI / 2.0);
    let depth = 1.0 - z.norm();
    let (theta0, scale) = match Focus::at(z) {
        Some(f) => (f.angle, f.scale),
        None => (0.0, f64::INFINITY),
    };
    let mut rad = Rule1d::default();
    let e = graded_edges(1.0, (0.5 * depth).min(hmax_r), hmax_r);
    for w in e.windows(2) {
        rad.push_interval(1.0 - w[1], 1.0 - w[0], order);
    }
    let ang = if scale.is_finite() {
        let mut ang = Rule1d::default();
        for w in graded_edges(PI, scale.min(hmax_t), hmax_t).windows(2) {
            ang.push_interval(w[0], w[1], order);
            ang.push_interval(-w[1], -w[0], order);
        }
        ang
    } else {
        Rule1d::periodic(0.0, angular)
    };
    let mut points = Vec::with_capacity(rad.len() * ang.len());
    let mut weights = Vec::with_capacity(rad.len() * ang.len());
    for (t, wt) in ang.nodes.iter().zip(&ang.weights) {
        let phase = Complex64::from_polar(1.0, theta0 + t);
        for (r, wr) in rad.nodes.iter().zip(&rad.weights) {
            points.push(CPoint::new(&[phase * r]));
            weights.push(wt * wr * r);
        }
    }
    PointSet::deterministic(points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_projector() -> Projector {
        let d = Domain::disk();
        Projector::new(KernelEvaluator::for_domain(&d).unwrap(), QuadratureSpec::polar(64, 64)).unwrap()
    }

    #[test]
    fn disk_rule_area() {
        for z in [0.0, 0.5, 0.99, 0.999_999] {
            let set = disk_rule(Complex64::new(z, 0.0), 8, 64, 64);
            assert!((set.total_weight() - PI).abs() < 1e-12, "{z}");
        }
    }

    #[test]
    fn reproduces_and_annihilates() {
        let p = disk_projector();
        let z = CPoint::c1(0.3, 0.0);
        let v = p.project(&TestFunction::monomial(vec![2]), &z).unwrap();
        assert!((v.value - Complex64::new(0.09, 0.0)).norm() < 1e-10);
        let v = p.project(&TestFunction::AntiHolo(vec![1]), &CPoint::c1(0.2, 0.7)).unwrap();
        assert!(v.value.norm() < 1e-7, "{v:?}");
        let zb = CPoint::c1(0.0, -0.9995);
        let v = p.project(&TestFunction::monomial(vec![3]), &zb).unwrap();
        assert!((v.value - zb.0[0].powu(3)).norm() < 1e-8, "{v:?}");
    }

    #[test]
    fn positive_of_one_at_origin() {
        let p = disk_projector();
        let v = p.positive(&TestFunction::constant(1, 1.0), &CPoint::c1(0.0, 0.0)).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        assert_eq!(p.positive(&TestFunction::zero(), &CPoint::c1(0.5, 0.1)).unwrap().value, 0.0);
    }

    #[test]
    fn bundle_matches_single_evaluations() {
        let p = disk_projector();
        let d = Domain::disk();
        let ball = QuasiBall::new(&d, CPoint::c1(0.9, 0.0), 0.1).unwrap();
        let fs = vec![
            TestFunction::random_bump(&d, 3),
            TestFunction::indicator(&d, ball),
            TestFunction::monomial(vec![1]),
        ];
        let z = CPoint::c1(0.7, 0.5);
        let b = p.bundle(&fs, &z).unwrap();
        for (i, f) in fs.iter().enumerate() {
            let single = p.project(f, &z).unwrap();
            assert!((b.p[i] - single.value).norm() < 1e-5 * (1.0 + single.value.norm()), "{i}");
            assert!(b.positive[i] + 1e-9 >= b.p[i].norm());
        }
    }
}
