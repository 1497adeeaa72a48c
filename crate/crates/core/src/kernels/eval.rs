//! Bergman kernel evaluation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{basis_norms, NormTable};
use crate::error::{Error, Result};
use crate::geometry::domain::factorial;
use crate::geometry::{CPoint, Domain, DomainKind};

/// Default truncation degree of the monomial expansion.
pub const DEFAULT_MAX_DEGREE: usize = 60;

/// Largest admissible tail bound relative to the partial sum.
pub const TAIL_BUDGET: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum KernelMode {
    ClosedForm,
    TruncatedBasis { max_degree: usize },
}

#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    domain: Domain,
    mode: KernelMode,
    norms: Option<NormTable>,
    /// `n! / pi^n` for the ball.
    ball_const: f64,
}

impl KernelEvaluator {
    pub fn new(domain: &Domain, mode: KernelMode) -> Result<Self> {
        let norms = match (mode, domain.kind()) {
            (KernelMode::TruncatedBasis { max_degree }, DomainKind::Egg { .. }) => {
                Some(basis_norms(domain, max_degree)?)
            }
            (KernelMode::TruncatedBasis { .. }, k) => {
                return Err(Error::Unsupported(format!("truncated basis kernel on {k:?}")))
            }
            (KernelMode::ClosedForm, DomainKind::Egg { m }) => {
                return Err(Error::Unsupported(format!("no closed-form kernel on the egg domain with m={m}")))
            }
            (KernelMode::ClosedForm, _) => None,
        };
        let n = domain.dim();
        Ok(KernelEvaluator { domain: domain.clone(), mode, norms, ball_const: factorial(n) / PI.powi(n as i32) })
    }

    /// Closed form where available, otherwise the default truncated basis.
    pub fn for_domain(domain: &Domain) -> Result<Self> {
        match domain.kind() {
            DomainKind::Egg { .. } => Self::new(domain, KernelMode::TruncatedBasis { max_degree: DEFAULT_MAX_DEGREE }),
            _ => Self::new(domain, KernelMode::ClosedForm),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    /// `K(z, w)`. Truncated evaluations that exceed the tail budget fail with
    /// [`Error::TruncationBudget`].
    pub fn eval(&self, z: &CPoint, w: &CPoint) -> Result<Complex64> {
        match &self.norms {
            None => Ok(self.closed_form(z, w)),
            Some(t) => truncated(t, z, w),
        }
    }

    /// Closed-form kernel; callers must know the evaluator has one.
    #[inline]
    pub fn closed_form(&self, z: &CPoint, w: &CPoint) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self.domain.kind() {
            DomainKind::UnitDisk => {
                let d = one - z.0[0] * w.0[0].conj();
                1.0 / (PI * d * d)
            }
            DomainKind::UnitBall { n } => {
                let d = one - z.inner(w);
                self.ball_const / d.powi(n as i32 + 1)
            }
            DomainKind::ProductDisk { .. } => z
                .0
                .iter()
                .zip(w.0.iter())
                .map(|(a, b)| {
                    let d = one - a * b.conj();
                    1.0 / (PI * d * d)
                })
                .product(),
            DomainKind::Egg { .. } => Complex64::new(f64::NAN, f64::NAN),
        }
    }
}

fn truncated(t: &NormTable, z: &CPoint, w: &CPoint) -> Result<Complex64> {
    let n = t.max_degree;
    let x = z.0[0] * w.0[0].conj();
    let y = z.0[1] * w.0[1].conj();
    let mut xp = Vec::with_capacity(n + 1);
    let mut yp = Vec::with_capacity(n + 1);
    let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    for _ in 0..=n {
        xp.push(a);
        yp.push(b);
        a *= x;
        b *= y;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    // absolute diagonal sums for the ratio test
    let mut diag = vec![0.0; n + 1];
    for i in 0..=n {
        for j in 0..=n {
            let term = xp[i] * yp[j] / t.get(i, j);
            sum += term;
            if i + j <= n {
                diag[i + j] += term.norm();
            }
        }
    }
    if n >= 1 && diag[n] > 0.0 {
        let q = diag[n] / diag[n - 1];
        let tail = if q < 1.0 { diag[n] * q / (1.0 - q) } else { f64::INFINITY };
        if tail > TAIL_BUDGET * sum.norm() {
            return Err(Error::TruncationBudget { tail, sum: sum.norm() });
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn point_in_ball<R: Rng>(rng: &mut R, n: usize, rmax: f64) -> CPoint {
        let d = Domain::ball(n);
        loop {
            let p = d.sample_uniform(rng, 1000).unwrap();
            if p.norm() <= rmax {
                return p;
            }
        }
    }

    #[test]
    fn disk_kernel_at_origin() {
        let ev = KernelEvaluator::new(&Domain::disk(), KernelMode::ClosedForm).unwrap();
        let k = ev.eval(&CPoint::c1(0.0, 0.0), &CPoint::c1(0.0, 0.0)).unwrap();
        assert!((k.re - 1.0 / PI).abs() < 1e-15 && k.im == 0.0);
        let k = ev.eval(&CPoint::c1(0.7, -0.2), &CPoint::c1(0.0, 0.0)).unwrap();
        assert!((k - 1.0 / PI).norm() < 1e-15);
    }

    #[test]
    fn egg_one_matches_ball_closed_form() {
        let egg = KernelEvaluator::for_domain(&Domain::egg(1)).unwrap();
        let ball = KernelEvaluator::for_domain(&Domain::ball(2)).unwrap();
        let mut rng = stream(5, 0);
        for _ in 0..100 {
            let z = point_in_ball(&mut rng, 2, 0.6);
            let w = point_in_ball(&mut rng, 2, 0.6);
            let a = egg.eval(&z, &w).unwrap();
            let b = ball.eval(&z, &w).unwrap();
            assert!((a - b).norm() / b.norm() < 1e-6);
        }
    }

    #[test]
    fn hermitian_symmetry() {
        let mut rng = stream(6, 0);
        for d in [Domain::disk(), Domain::ball(3), Domain::product_disk(2)] {
            let ev = KernelEvaluator::for_domain(&d).unwrap();
            for _ in 0..100 {
                let z = d.sample_uniform(&mut rng, 1000).unwrap();
                let w = d.sample_uniform(&mut rng, 1000).unwrap();
                assert!((ev.eval(&z, &w).unwrap() - ev.eval(&w, &z).unwrap().conj()).norm() < 1e-12 * ev.eval(&z, &w).unwrap().norm().max(1.0));
            }
        }
    }

    #[test]
    fn truncation_budget_refuses_points_near_boundary() {
        let ev = KernelEvaluator::for_domain(&Domain::egg(2)).unwrap();
        let z = CPoint::real(&[0.995, 0.0]);
        assert!(matches!(ev.eval(&z, &z), Err(Error::TruncationBudget { .. })));
        assert!(ev.eval(&CPoint::real(&[0.3, 0.4]), &CPoint::real(&[0.1, 0.5])).is_ok());
    }

    #[test]
    fn diagonal_blows_up_towards_boundary() {
        for d in [Domain::disk(), Domain::ball(2)] {
            let ev = KernelEvaluator::for_domain(&d).unwrap();
            let mut prev = 0.0;
            for k in 0..20 {
                let r = 1.0 - 0.7f64.powi(k);
                let mut c = vec![0.0; d.dim()];
                c[0] = r;
                let z = CPoint::real(&c);
                let v = ev.eval(&z, &z).unwrap().re;
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn closed_form_rejected_on_egg() {
        assert!(KernelEvaluator::new(&Domain::egg(2), KernelMode::ClosedForm).is_err());
    }
}
