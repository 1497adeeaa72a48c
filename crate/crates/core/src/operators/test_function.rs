//! Test functions fed to the operators.

use num_complex::Complex64;
use rand::Rng;

use crate::geometry::probes::near_boundary_point;
use crate::geometry::{CPoint, Domain, QuasiBall};
use crate::rng::stream;
use crate::weights::Weight;

/// One Gaussian bump `amp * exp(-|w - center|^2 / (2 width^2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: CPoint,
    pub width: f64,
    pub amp: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `sum c_alpha w^alpha`.
    HoloPoly(Vec<(Vec<u32>, Complex64)>),
    /// `conj(w)^alpha`.
    AntiHolo(Vec<u32>),
    IndicatorBall { domain: Domain, ball: QuasiBall },
    /// `sigma * chi_B`, with `B` optionally cut to `{depth >= floor}`.
    WeightedIndicator { weight: Weight, ball: QuasiBall, floor: f64 },
    RandomBump(Vec<Bump>),
    Scaled(Box<TestFunction>, f64),
}

fn monomial(w: &CPoint, alpha: &[u32]) -> Complex64 {
    w.0.iter().zip(alpha).map(|(c, a)| c.powu(*a)).product()
}

impl TestFunction {
    pub fn zero() -> Self {
        TestFunction::HoloPoly(vec![])
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        TestFunction::HoloPoly(vec![(vec![0; dim], Complex64::new(c, 0.0))])
    }

    pub fn monomial(alpha: Vec<u32>) -> Self {
        TestFunction::HoloPoly(vec![(alpha, Complex64::new(1.0, 0.0))])
    }

    pub fn indicator(domain: &Domain, ball: QuasiBall) -> Self {
        TestFunction::IndicatorBall { domain: domain.clone(), ball }
    }

    /// A sum of three Gaussian bumps centred near the boundary.
    pub fn random_bump(domain: &Domain, seed: u64) -> Self {
        let mut rng = stream(seed, 0);
        let bumps = (0..3)
            .map(|_| Bump {
                center: near_boundary_point(domain, &mut rng, 0.01, 0.3),
                width: rng.random_range(0.08..0.3),
                amp: Complex64::new(rng.random_range(0.2..1.0), rng.random_range(-0.5..0.5)),
            })
            .collect();
        TestFunction::RandomBump(bumps)
    }

    /// Like `random_bump` with positive real amplitudes.
    pub fn random_positive_bump(domain: &Domain, seed: u64) -> Self {
        match Self::random_bump(domain, seed) {
            TestFunction::RandomBump(b) => TestFunction::RandomBump(
                b.into_iter().map(|b| Bump { amp: Complex64::new(b.amp.norm(), 0.0), ..b }).collect(),
            ),
            _ => unreachable!(),
        }
    }

    pub fn eval(&self, w: &CPoint) -> Complex64 {
        match self {
            TestFunction::HoloPoly(terms) => terms.iter().map(|(a, c)| c * monomial(w, a)).sum(),
            TestFunction::AntiHolo(alpha) => monomial(w, alpha).conj(),
            TestFunction::IndicatorBall { domain, ball } => {
                Complex64::new(if ball.contains(domain, w) { 1.0 } else { 0.0 }, 0.0)
            }
            TestFunction::WeightedIndicator { weight, ball, floor } => {
                let inside = ball.contains(&weight.domain, w) && weight.domain.depth(w) >= *floor;
                Complex64::new(if inside { weight.eval(w) } else { 0.0 }, 0.0)
            }
            TestFunction::RandomBump(bumps) => bumps
                .iter()
                .map(|b| b.amp * (-w.sub(&b.center).norm_sqr() / (2.0 * b.width * b.width)).exp())
                .sum(),
            TestFunction::Scaled(f, c) => f.eval(w) * *c,
        }
    }

    /// A ball outside of which the function vanishes.
    pub fn support(&self) -> Option<&QuasiBall> {
        match self {
            TestFunction::IndicatorBall { ball, .. } | TestFunction::WeightedIndicator { ball, .. } => Some(ball),
            TestFunction::Scaled(f, _) => f.support(),
            _ => None,
        }
    }

    /// Depth floor below which the function vanishes.
    pub fn floor(&self) -> f64 {
        match self {
            TestFunction::WeightedIndicator { floor, .. } => *floor,
            TestFunction::Scaled(f, _) => f.floor(),
            _ => 0.0,
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        match self {
            TestFunction::HoloPoly(_) => true,
            TestFunction::Scaled(f, _) => f.is_holomorphic(),
            _ => false,
        }
    }

    /// `c * f`.
    pub fn scaled(&self, c: f64) -> TestFunction {
        match self {
            TestFunction::HoloPoly(t) => TestFunction::HoloPoly(t.iter().map(|(a, x)| (a.clone(), x * c)).collect()),
            TestFunction::RandomBump(b) => {
                TestFunction::RandomBump(b.iter().map(|b| Bump { amp: b.amp * c, ..b.clone() }).collect())
            }
            TestFunction::Scaled(f, c0) => TestFunction::Scaled(f.clone(), c0 * c),
            other => TestFunction::Scaled(Box::new(other.clone()), c),
        }
    }
}
