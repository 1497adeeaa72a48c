//! Numerical checks of the regularizer lemmas: maximal-function comparison,
//! the duality-type integral inequality, stability of `Mg` under `R_k`, and
//! the two ball containments.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::maximal::{DictionarySpec, MaximalDictionary, MaximalFunction};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::metric::distance;
use crate::geometry::probes::near_boundary_point;
use crate::geometry::{CPoint, Domain, QuasiBall};
use crate::quadrature::{sample_ball, sample_domain, BallOptions, QuadratureSpec};
use crate::rng::{derive_seed, pairwise_sum, stream};
use crate::weights::Regularizer;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSpec {
    /// Quasi-triangle constant; `C_d = max(c, 1)`.
    pub triangle_constant: f64,
    /// Rule for averages over `B_k` balls and dictionary balls.
    pub inner: QuadratureSpec,
    /// Rule for whole-domain integrals.
    pub outer: QuadratureSpec,
    pub dictionary: DictionarySpec,
    /// Dictionary balls used on the right-hand side of the maximal comparison.
    pub top_balls: usize,
    /// Points of a ball probed for the dilation containment.
    pub dilation_points: usize,
}

impl Default for LemmaSpec {
    fn default() -> Self {
        LemmaSpec {
            triangle_constant: 1.0,
            inner: QuadratureSpec::polar(32, 32),
            outer: QuadratureSpec::polar(48, 96),
            dictionary: DictionarySpec::default(),
            top_balls: 5,
            dilation_points: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSuiteReport {
    pub k: f64,
    pub k_prime: f64,
    pub c_d: f64,
    pub n_instances: usize,
    /// Max of `Mf(z0) / M(R_k f)(z0)`.
    pub maximal_max_ratio: f64,
    /// Max of `∫ f R_k(g) / ∫ R_k'(f) g`.
    pub duality_max_ratio: f64,
    /// Max of `|log(R_k(Mg)(z) / Mg(z))|`.
    pub stability_max_log_ratio: f64,
    /// Instances whose ratio came out NaN or infinite.
    pub n_nonfinite: usize,
    pub containment_pairs: usize,
    pub containment_holds: usize,
    /// Largest `d(u, c) / r` over `u in B_k(w)`, `w in B(c, r)`.
    pub dilation_needed: f64,
}

impl LemmaSuiteReport {
    pub fn containment_fraction(&self) -> f64 {
        self.containment_holds as f64 / self.containment_pairs.max(1) as f64
    }
}

/// Shared state for the checks at one `k`.
pub struct LemmaContext {
    domain: Domain,
    reg: Regularizer,
    reg_prime: Regularizer,
    spec: LemmaSpec,
    dict: MaximalDictionary,
}

impl LemmaContext {
    pub fn new(domain: &Domain, k: f64, spec: &LemmaSpec) -> Result<Self> {
        let reg = Regularizer::new(k, spec.triangle_constant)?;
        // k' may leave the admissible range of R_k; it is only used as a radius
        let reg_prime = Regularizer { k: reg.k_prime(), c_d: reg.c_d };
        let dict = MaximalDictionary::new(domain, &spec.dictionary)?;
        Ok(LemmaContext { domain: domain.clone(), reg, reg_prime, spec: spec.clone(), dict })
    }

    fn ball_nodes(&self, ball: &QuasiBall) -> Result<crate::quadrature::PointSet> {
        sample_ball(&self.domain, ball, &BallOptions::default(), &self.spec.inner)
    }

    /// `R(f)(z)`, the average of `|f|` over `B(z, k d(z, bΩ))`.
    fn average<F: Fn(&CPoint) -> f64 + Sync>(&self, reg: &Regularizer, f: &F, z: &CPoint) -> Result<f64> {
        let set = self.ball_nodes(&reg.ball(&self.domain, z)?)?;
        let num: Vec<f64> = set.points.iter().zip(&set.weights).map(|(p, w)| f(p).abs() * w).collect();
        Ok(pairwise_sum(&num) / pairwise_sum(&set.weights))
    }

    /// `Mf(z0) / M(R_k f)(z0)`, with the right side restricted to the
    /// dictionary balls achieving the largest averages of `f` at `z0`, which
    /// can only make the ratio larger.
    pub fn maximal_ratio<F: Fn(&CPoint) -> f64 + Sync>(&self, f: &F, z0: &CPoint) -> Result<f64> {
        let m = MaximalFunction::new(&self.dict, f);
        let ranked = m.ranked(z0)?;
        let lhs = ranked[0].1;
        let mut rhs = 0.0f64;
        for (i, _) in ranked.iter().take(self.spec.top_balls.max(1)) {
            let set = self.dict.nodes(*i)?;
            let vals = set.points.par_iter().map(|p| self.average(&self.reg, f, p)).collect::<Result<Vec<_>>>()?;
            let num: Vec<f64> = vals.iter().zip(&set.weights).map(|(v, w)| v * w).collect();
            rhs = rhs.max(pairwise_sum(&num) / pairwise_sum(&set.weights));
        }
        Ok(lhs / rhs)
    }

    /// `∫ f R_k(g) dmu / ∫ R_k'(f) g dmu` for `f, g >= 0`.
    pub fn duality_ratio<F, G>(&self, f: &F, g: &G) -> Result<f64>
    where
        F: Fn(&CPoint) -> f64 + Sync,
        G: Fn(&CPoint) -> f64 + Sync,
    {
        let set = sample_domain(&self.domain, &self.spec.outer)?;
        let terms = set
            .points
            .par_iter()
            .map(|z| {
                let (fz, gz) = (f(z).abs(), g(z).abs());
                let l = if fz > 0.0 { fz * self.average(&self.reg, g, z)? } else { 0.0 };
                let r = if gz > 0.0 { gz * self.average(&self.reg_prime, f, z)? } else { 0.0 };
                Ok((l, r))
            })
            .collect::<Result<Vec<_>>>()?;
        let lhs: Vec<f64> = terms.iter().zip(&set.weights).map(|(t, w)| t.0 * w).collect();
        let rhs: Vec<f64> = terms.iter().zip(&set.weights).map(|(t, w)| t.1 * w).collect();
        Ok(pairwise_sum(&lhs) / pairwise_sum(&rhs))
    }

    /// `|log(R_k(Mg)(z) / Mg(z))|`.
    pub fn stability_log_ratio<G: Fn(&CPoint) -> f64 + Sync>(&self, g: &G, z: &CPoint) -> Result<f64> {
        let m = MaximalFunction::new(&self.dict, g);
        let at = m.eval(z)?;
        let set = self.ball_nodes(&self.reg.ball(&self.domain, z)?)?;
        let vals = m.eval_many(&set.points)?;
        let num: Vec<f64> = vals.iter().zip(&set.weights).map(|(v, w)| v * w).collect();
        let reg = pairwise_sum(&num) / pairwise_sum(&set.weights);
        Ok((reg / at).ln().abs())
    }

    /// `(pairs, holding)`: `z in B_k'(z')` for nodes `z'` of `B_k(z)`.
    pub fn containment(&self, z: &CPoint) -> Result<(usize, usize)> {
        let set = self.ball_nodes(&self.reg.ball(&self.domain, z)?)?;
        let mut hold = 0;
        for zp in &set.points {
            if self.reg_prime.ball(&self.domain, zp)?.contains(&self.domain, z) {
                hold += 1;
            }
        }
        Ok((set.len(), hold))
    }

    /// Largest `d(u, c) / r` over nodes `u` of `B_k(w)` for sampled `w` in `ball`.
    pub fn dilation_needed(&self, ball: &QuasiBall) -> Result<f64> {
        let set = sample_ball(&self.domain, ball, &BallOptions::floor(1e-3 * ball.radius.min(1.0)), &self.spec.inner)?;
        if set.is_empty() {
            return Err(Error::Sampling("dilation probe ball has no nodes".into()));
        }
        let step = (set.len() / self.spec.dilation_points.max(1)).max(1);
        let mut alpha = 0.0f64;
        for w in set.points.iter().step_by(step) {
            for u in self.ball_nodes(&self.reg.ball(&self.domain, w)?)?.points.iter().chain(std::iter::once(w)) {
                alpha = alpha.max(distance(&self.domain, ball.metric, u, &ball.center) / ball.radius);
            }
        }
        Ok(alpha)
    }
}

/// Runs every check on `n_instances` random draws of `(f, g, z0)`.
pub fn regularizer_lemma_suite(
    domain: &Domain,
    k: f64,
    n_instances: usize,
    seed: u64,
    spec: &LemmaSpec,
) -> Result<LemmaSuiteReport> {
    if n_instances == 0 {
        return Err(Error::InvalidArgument("lemma suite needs at least one instance".into()));
    }
    let ctx = LemmaContext::new(domain, k, spec)?;
    let rows = (0..n_instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let z0 = near_boundary_point(domain, &mut rng, 1e-3, 0.5);
            let f = TestFunction::random_positive_bump(domain, derive_seed(seed, 2 * i as u64));
            let g = TestFunction::random_positive_bump(domain, derive_seed(seed, 2 * i as u64 + 1));
            let (fa, ga) = (|w: &CPoint| f.eval(w).norm(), |w: &CPoint| g.eval(w).norm());
            let c = near_boundary_point(domain, &mut rng, 1e-3, 0.25);
            let r = rng.random_range(1.25..4.0) * crate::geometry::boundary_distance(domain, &c)?;
            let ball = QuasiBall::new(domain, c, r)?;
            Ok((
                ctx.maximal_ratio(&fa, &z0)?,
                ctx.duality_ratio(&fa, &ga)?,
                ctx.stability_log_ratio(&ga, &z0)?,
                ctx.containment(&z0)?,
                ctx.dilation_needed(&ball)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_finite = |v: Vec<f64>| v.into_iter().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let n_nonfinite = rows.iter().map(|r| [r.0, r.1, r.2].iter().filter(|x| !x.is_finite()).count()).sum();
    Ok(LemmaSuiteReport {
        k,
        k_prime: ctx.reg.k_prime(),
        c_d: ctx.reg.c_d,
        n_instances,
        maximal_max_ratio: max_finite(rows.iter().map(|r| r.0).collect()),
        duality_max_ratio: max_finite(rows.iter().map(|r| r.1).collect()),
        stability_max_log_ratio: max_finite(rows.iter().map(|r| r.2).collect()),
        n_nonfinite,
        containment_pairs: rows.iter().map(|r| r.3 .0).sum(),
        containment_holds: rows.iter().map(|r| r.3 .1).sum(),
        dilation_needed: max_finite(rows.iter().map(|r| r.4).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(k: f64) -> LemmaContext {
        let spec = LemmaSpec { dictionary: DictionarySpec { levels: 5, ..Default::default() }, ..Default::default() };
        LemmaContext::new(&Domain::disk(), k, &spec).unwrap()
    }

    #[test]
    fn constant_cases() {
        let c = ctx(0.1);
        let one = |_: &CPoint| 1.0;
        assert_eq!(c.maximal_ratio(&one, &CPoint::c1(0.95, 0.1)).unwrap(), 1.0);
        let f = TestFunction::random_positive_bump(&Domain::disk(), 9);
        let fa = |w: &CPoint| f.eval(w).norm();
        let direct = c.duality_ratio(&fa, &one).unwrap();
        assert!((direct - 1.0).abs() < 0.05, "{direct}");
        assert!(c.stability_log_ratio(&one, &CPoint::c1(0.0, 0.9)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn k_out_of_range_is_an_error() {
        assert!(regularizer_lemma_suite(&Domain::disk(), 0.6, 1, 0, &LemmaSpec::default()).is_err());
    }

    #[test]
    fn small_suite_is_finite_and_contained() {
        let spec = LemmaSpec { dictionary: DictionarySpec { levels: 6, ..Default::default() }, ..Default::default() };
        let r = regularizer_lemma_suite(&Domain::disk(), 0.1, 6, 1, &spec).unwrap();
        assert_eq!(r.n_nonfinite, 0);
        assert_eq!(r.containment_holds, r.containment_pairs);
        assert!(r.maximal_max_ratio > 0.5 && r.maximal_max_ratio < 5.0, "{r:?}");
        assert!(r.duality_max_ratio < 5.0 && r.dilation_needed < 5.0, "{r:?}");
    }
}
