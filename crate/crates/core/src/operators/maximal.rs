//! The boundary-touching maximal function over a seeded ball dictionary.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::probes::near_boundary_point;
use crate::geometry::{bounding_box, CPoint, Domain, DomainKind, QuasiBall};
use crate::quadrature::{sample_ball, BallOptions, PointSet, QuadratureSpec};
use crate::rng::{pairwise_sum, stream};

/// Layout of the ball dictionary. Level `j` has centers at depth `2^-j`
/// spaced `spacing * 2^-j` apart along the boundary, each carrying balls of
/// radius `factor * 2^-j` for every factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub levels: usize,
    pub spacing: f64,
    pub radius_factors: Vec<f64>,
    pub max_centers_per_level: usize,
    /// Adds one ball containing the whole domain.
    pub include_global: bool,
    pub seed: u64,
    /// Rule for the ball averages.
    pub quadrature: QuadratureSpec,
}

impl Default for DictionarySpec {
    fn default() -> Self {
        DictionarySpec {
            levels: 9,
            spacing: 1.0,
            radius_factors: vec![1.25, 2.0, 4.0, 8.0],
            max_centers_per_level: 4096,
            include_global: true,
            seed: 0,
            quadrature: QuadratureSpec::polar(32, 32),
        }
    }
}

/// Depth floor of the ball averages relative to the radius.
const AVERAGE_FLOOR: f64 = 1e-2;

#[derive(Clone, Debug)]
pub struct MaximalDictionary {
    domain: Domain,
    balls: Vec<QuasiBall>,
    /// Center and radius of a Euclidean ball containing each quasi-ball.
    reach: Vec<(CPoint, f64)>,
    quadrature: QuadratureSpec,
}

impl MaximalDictionary {
    pub fn new(domain: &Domain, spec: &DictionarySpec) -> Result<Self> {
        spec.quadrature.validate()?;
        if spec.levels == 0 || spec.radius_factors.is_empty() || !(spec.spacing > 0.0) {
            return Err(Error::InvalidArgument("dictionary needs levels, radius factors and positive spacing".into()));
        }
        if spec.radius_factors.iter().any(|f| !(*f > 1.0)) {
            return Err(Error::InvalidArgument("radius factors must exceed 1 so that balls touch the boundary".into()));
        }
        let mut balls = Vec::new();
        for j in 1..=spec.levels {
            let depth = 0.5f64.powi(j as i32);
            let n = ((2.0 * PI / (spec.spacing * depth)).ceil() as usize).clamp(1, spec.max_centers_per_level);
            let centers: Vec<CPoint> = if domain.kind() == DomainKind::UnitDisk {
                (0..n).map(|i| CPoint::new(&[Complex64::from_polar(1.0 - depth, 2.0 * PI * i as f64 / n as f64)])).collect()
            } else {
                let mut rng = stream(spec.seed, j as u64);
                (0..n).map(|_| near_boundary_point(domain, &mut rng, depth, depth)).collect()
            };
            for c in centers {
                for f in &spec.radius_factors {
                    let b = QuasiBall::new(domain, c.clone(), f * crate::geometry::boundary_distance(domain, &c)?)?;
                    balls.push(b);
                }
            }
        }
        if spec.include_global {
            balls.push(QuasiBall::new(domain, CPoint::zeros(domain.dim()), 4.0)?);
        }
        let reach = balls
            .iter()
            .map(|b| {
                let bx = bounding_box(domain, b);
                let r = bx.euclidean_radius();
                (bx.center, r)
            })
            .collect();
        Ok(MaximalDictionary { domain: domain.clone(), balls, reach, quadrature: spec.quadrature })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn balls(&self) -> &[QuasiBall] {
        &self.balls
    }

    /// Indices of the balls containing `z`.
    pub fn containing<'a>(&'a self, z: &'a CPoint) -> impl Iterator<Item = usize> + 'a {
        (0..self.balls.len())
            .filter(move |i| z.dist(&self.reach[*i].0) <= self.reach[*i].1 && self.balls[*i].contains(&self.domain, z))
    }

    /// Nodes of ball `i`.
    pub fn nodes(&self, i: usize) -> Result<PointSet> {
        let ball = &self.balls[i];
        let floor = if self.quadrature.is_deterministic() { AVERAGE_FLOOR * ball.radius.min(1.0) } else { 0.0 };
        sample_ball(&self.domain, ball, &BallOptions::floor(floor), &self.quadrature)
    }
}

/// `Mf` for one function, caching ball averages of `|f|` as they are needed.
pub struct MaximalFunction<'a, F> {
    dict: &'a MaximalDictionary,
    f: F,
    cache: Vec<OnceLock<f64>>,
}

impl<'a, F> MaximalFunction<'a, F>
where
    F: Fn(&CPoint) -> f64 + Sync,
{
    pub fn new(dict: &'a MaximalDictionary, f: F) -> Self {
        MaximalFunction { dict, f, cache: (0..dict.len()).map(|_| OnceLock::new()).collect() }
    }

    /// Average of `|f|` over ball `i`.
    pub fn average(&self, i: usize) -> Result<f64> {
        if let Some(v) = self.cache[i].get() {
            return Ok(*v);
        }
        let set = self.dict.nodes(i)?;
        let num: Vec<f64> = set.points.iter().zip(&set.weights).map(|(p, w)| (self.f)(p).abs() * w).collect();
        let den = pairwise_sum(&set.weights);
        if !(den > 0.0) {
            return Err(Error::Sampling(format!("dictionary ball {i} resolved as empty")));
        }
        Ok(*self.cache[i].get_or_init(|| pairwise_sum(&num) / den))
    }

    /// Ball averages at `z`, largest first.
    pub fn ranked(&self, z: &CPoint) -> Result<Vec<(usize, f64)>> {
        let idx: Vec<usize> = self.dict.containing(z).collect();
        if idx.is_empty() {
            return Err(Error::InvalidArgument(format!("no dictionary ball contains {z:?}")));
        }
        let mut out = idx.into_iter().map(|i| Ok((i, self.average(i)?))).collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(out)
    }

    pub fn eval(&self, z: &CPoint) -> Result<f64> {
        Ok(self.ranked(z)?[0].1)
    }

    pub fn eval_many(&self, zs: &[CPoint]) -> Result<Vec<f64>> {
        zs.par_iter().map(|z| self.eval(z)).collect()
    }
}

/// `M f_i(z_j)` for several functions at once, as `out[i][j]`. Each needed
/// ball's rule is built once and shared by all functions.
pub fn maximal_many<F>(dict: &MaximalDictionary, fs: &[F], zs: &[CPoint]) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&CPoint) -> f64 + Sync,
{
    let lists: Vec<Vec<usize>> = zs.par_iter().map(|z| dict.containing(z).collect()).collect();
    if let Some(j) = lists.iter().position(|l| l.is_empty()) {
        return Err(Error::InvalidArgument(format!("no dictionary ball contains {:?}", zs[j])));
    }
    let mut needed: Vec<usize> = lists.iter().flatten().copied().collect();
    needed.sort_unstable();
    needed.dedup();
    let averages: Vec<Vec<f64>> = needed
        .par_iter()
        .map(|i| {
            let set = dict.nodes(*i)?;
            let den = pairwise_sum(&set.weights);
            if !(den > 0.0) {
                return Err(Error::Sampling(format!("dictionary ball {i} resolved as empty")));
            }
            Ok(fs
                .iter()
                .map(|f| {
                    let num: Vec<f64> = set.points.iter().zip(&set.weights).map(|(p, w)| f(p).abs() * w).collect();
                    pairwise_sum(&num) / den
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let slot = |i: usize| needed.binary_search(&i).expect("ball was collected");
    Ok((0..fs.len())
        .map(|k| lists.iter().map(|l| l.iter().map(|i| averages[slot(*i)][k]).fold(f64::NEG_INFINITY, f64::max)).collect())
        .collect())
}

/// `Mf(z)` as a lower bound for the supremum over all boundary-touching balls.
pub fn maximal_function(domain: &Domain, f: &TestFunction, z: &CPoint, spec: &DictionarySpec) -> Result<f64> {
    domain.check_interior(z)?;
    let dict = MaximalDictionary::new(domain, spec)?;
    MaximalFunction::new(&dict, |w: &CPoint| f.eval(w).norm()).eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_ball;

    fn small() -> DictionarySpec {
        DictionarySpec { levels: 5, ..Default::default() }
    }

    #[test]
    fn constant_and_homogeneity() {
        let d = Domain::disk();
        let dict = MaximalDictionary::new(&d, &small()).unwrap();
        let one = MaximalFunction::new(&dict, |_: &CPoint| 1.0);
        let zs = [CPoint::c1(0.0, 0.0), CPoint::c1(0.5, -0.2), CPoint::c1(0.0, 0.97)];
        for z in &zs {
            assert_eq!(one.eval(z).unwrap(), 1.0);
        }
        let f = TestFunction::random_bump(&d, 5);
        let g = |w: &CPoint| f.eval(w).norm();
        let many = maximal_many(&dict, &[&g as &(dyn Fn(&CPoint) -> f64 + Sync), &|_: &CPoint| 1.0], &zs).unwrap();
        let single = MaximalFunction::new(&dict, g).eval_many(&zs).unwrap();
        assert_eq!(many[0], single);
        assert_eq!(many[1], vec![1.0; 3]);
        let f = TestFunction::random_bump(&d, 1);
        let z = CPoint::c1(0.3, 0.8);
        let a = maximal_function(&d, &f, &z, &small()).unwrap();
        let b = maximal_function(&d, &f.scaled(2.0), &z, &small()).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * a);
    }

    #[test]
    fn dominates_single_ball_average() {
        let d = Domain::disk();
        let b0 = QuasiBall::new(&d, CPoint::c1(0.9, 0.0), 0.1).unwrap();
        let f = TestFunction::indicator(&d, b0.clone());
        let dict = MaximalDictionary::new(&d, &small()).unwrap();
        let m = MaximalFunction::new(&dict, |w: &CPoint| f.eval(w).norm());
        let z = CPoint::c1(0.92, 0.01);
        let ranked = m.ranked(&z).unwrap();
        let spec = QuadratureSpec::uniform(200_000, 4);
        // smallest dictionary ball containing z, by direct Monte Carlo
        let i = *dict.containing(&z).collect::<Vec<_>>().iter().min_by(|a, b| {
            dict.balls()[**a].radius.total_cmp(&dict.balls()[**b].radius)
        }).unwrap();
        let bi = &dict.balls()[i];
        let inter = integrate_ball(&d, bi, |w| if b0.contains(&d, w) { 1.0 } else { 0.0 }, &spec).unwrap();
        let vol = integrate_ball(&d, bi, |_| 1.0, &spec).unwrap();
        let direct = inter.value / vol.value;
        assert!(ranked[0].1 >= direct - 3.0 * inter.std_error / vol.value - 0.02, "{} vs {direct}", ranked[0].1);
    }

    #[test]
    fn too_coarse_dictionary_is_an_error() {
        let d = Domain::disk();
        let spec = DictionarySpec { levels: 2, radius_factors: vec![1.25], include_global: false, ..Default::default() };
        let f = TestFunction::constant(1, 1.0);
        assert!(maximal_function(&d, &f, &CPoint::c1(0.0, 0.0), &spec).is_err());
    }
}
