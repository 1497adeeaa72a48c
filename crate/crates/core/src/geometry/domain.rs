//! Model domains and their defining functions.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A point of `C^n`.
#[derive(Clone, PartialEq)]
pub struct CPoint(pub SmallVec<[Complex64; 2]>);

impl CPoint {
    pub fn new(coords: &[Complex64]) -> Self {
        CPoint(SmallVec::from_slice(coords))
    }

    pub fn zeros(n: usize) -> Self {
        CPoint(SmallVec::from_elem(Complex64::new(0.0, 0.0), n))
    }

    /// One-dimensional point `x + iy`.
    pub fn c1(x: f64, y: f64) -> Self {
        Self::new(&[Complex64::new(x, y)])
    }

    pub fn real(xs: &[f64]) -> Self {
        CPoint(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian product `<self, other> = sum self_j * conj(other_j)`.
    pub fn inner(&self, other: &CPoint) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn scale(&self, t: f64) -> CPoint {
        CPoint(self.0.iter().map(|c| c * t).collect())
    }

    pub fn add(&self, other: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    /// `self + s * dir` for a complex scalar `s`.
    pub fn axpy(&self, s: Complex64, dir: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(dir.0.iter()).map(|(a, d)| a + s * d).collect())
    }

    pub fn dist(&self, other: &CPoint) -> f64 {
        self.sub(other).norm()
    }
}

impl fmt::Debug for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

/// The four model domain families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    UnitDisk,
    UnitBall { n: usize },
    /// `|z1|^2 + |z2|^(2m) < 1`.
    Egg { m: u32 },
    ProductDisk { n: usize },
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::UnitDisk => write!(f, "unit_disk"),
            DomainKind::UnitBall { n } => write!(f, "unit_ball_{n}"),
            DomainKind::Egg { m } => write!(f, "egg_{m}"),
            DomainKind::ProductDisk { n } => write!(f, "product_disk_{n}"),
        }
    }
}

/// A model pseudoconvex domain with its defining function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Domain {
    kind: DomainKind,
}

impl Domain {
    pub fn new(kind: DomainKind) -> Result<Self> {
        match kind {
            DomainKind::UnitBall { n } if n < 2 => {
                return Err(Error::InvalidArgument("UnitBall requires n >= 2 (use UnitDisk)".into()))
            }
            DomainKind::Egg { m } if m < 1 => {
                return Err(Error::InvalidArgument("Egg requires m >= 1".into()))
            }
            DomainKind::ProductDisk { n } if n < 2 => {
                return Err(Error::InvalidArgument("ProductDisk requires n >= 2".into()))
            }
            _ => {}
        }
        Ok(Domain { kind })
    }

    pub fn disk() -> Self {
        Domain { kind: DomainKind::UnitDisk }
    }

    pub fn ball(n: usize) -> Self {
        Self::new(DomainKind::UnitBall { n }).expect("valid ball dimension")
    }

    pub fn egg(m: u32) -> Self {
        Self::new(DomainKind::Egg { m }).expect("valid egg exponent")
    }

    pub fn product_disk(n: usize) -> Self {
        Self::new(DomainKind::ProductDisk { n }).expect("valid polydisc dimension")
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::UnitDisk => 1,
            DomainKind::UnitBall { n } | DomainKind::ProductDisk { n } => n,
            DomainKind::Egg { .. } => 2,
        }
    }

    /// Whether the domain is the unit ball of some `C^n` (including the disk).
    pub fn is_ball_like(&self) -> bool {
        matches!(self.kind, DomainKind::UnitDisk | DomainKind::UnitBall { .. })
    }

    pub fn rho(&self, z: &CPoint) -> f64 {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::UnitBall { .. } => z.norm_sqr() - 1.0,
            DomainKind::Egg { m } => {
                z.0[0].norm_sqr() + z.0[1].norm_sqr().powi(m as i32) - 1.0
            }
            DomainKind::ProductDisk { .. } => z
                .0
                .iter()
                .map(|c| c.norm_sqr() - 1.0)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, z: &CPoint) -> bool {
        z.dim() == self.dim() && z.is_finite() && self.rho(z) < 0.0
    }

    pub fn check_interior(&self, z: &CPoint) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::NotInterior(format!("{z:?}")))
        }
    }

    /// Real gradient of `rho` packed as complex components
    /// `d rho/dx_j + i d rho/dy_j`.
    pub fn grad_rho(&self, z: &CPoint) -> CPoint {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::UnitBall { .. } => z.scale(2.0),
            DomainKind::Egg { m } => {
                let s = z.0[1].norm_sqr();
                let g2 = if m == 1 { z.0[1] * 2.0 } else { z.0[1] * (2.0 * m as f64 * s.powi(m as i32 - 1)) };
                CPoint::new(&[z.0[0] * 2.0, g2])
            }
            DomainKind::ProductDisk { n } => {
                let j = active_factor(z);
                let mut g = CPoint::zeros(n);
                g.0[j] = z.0[j] * 2.0;
                g
            }
        }
    }

    /// Minkowski gauge: the smallest `t` with `z / t` in the closure.
    /// Every model domain is complete circular, so `1 - gauge` is a boundary
    /// depth comparable to the Euclidean distance.
    pub fn gauge(&self, z: &CPoint) -> f64 {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::UnitBall { .. } => z.norm(),
            DomainKind::ProductDisk { .. } => {
                z.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
            }
            DomainKind::Egg { m } => {
                let a = z.0[0].norm_sqr();
                let r2 = z.0[1].norm();
                let lo0 = z.0[0].norm().max(r2);
                if lo0 == 0.0 {
                    return 0.0;
                }
                if m == 1 {
                    return (a + r2 * r2).sqrt();
                }
                // F(t) = a/t^2 + (r2/t)^(2m) is decreasing; F(lo0) >= 1 > F(2 lo0).
                let f = |t: f64| a / (t * t) + (r2 / t).powi(2 * m as i32) - 1.0;
                let (mut lo, mut hi) = (lo0, 2.0 * lo0);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// `1 - gauge(z)`, the depth used for boundary layers.
    pub fn depth(&self, z: &CPoint) -> f64 {
        1.0 - self.gauge(z)
    }

    pub fn volume(&self) -> f64 {
        match self.kind {
            DomainKind::UnitDisk => PI,
            DomainKind::UnitBall { n } => PI.powi(n as i32) / factorial(n),
            DomainKind::ProductDisk { n } => PI.powi(n as i32),
            // pi^2/m * Beta(1/m, 2) = pi^2 m / (m + 1)
            DomainKind::Egg { m } => PI * PI * m as f64 / (m as f64 + 1.0),
        }
    }

    /// Euclidean distance to the boundary.
    pub fn euclidean_boundary_distance(&self, z: &CPoint) -> f64 {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::UnitBall { .. } => 1.0 - z.norm(),
            DomainKind::ProductDisk { .. } => {
                z.0.iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min)
            }
            DomainKind::Egg { m } => egg_boundary_distance(z.0[0].norm(), z.0[1].norm(), m),
        }
    }

    /// Uniform point of the domain by rejection from the unit polydisc.
    /// Returns `None` if `max_attempts` draws all miss.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: usize) -> Option<CPoint> {
        let n = self.dim();
        for _ in 0..max_attempts {
            let p = CPoint((0..n).map(|_| uniform_unit_disk(rng)).collect());
            if self.rho(&p) < 0.0 {
                return Some(p);
            }
        }
        None
    }

    /// A boundary point in a random direction (distributed by the cone
    /// measure of the domain).
    pub fn random_boundary_point<R: Rng + ?Sized>(&self, rng: &mut R) -> CPoint {
        loop {
            if let Some(x) = self.sample_uniform(rng, 10_000) {
                let g = self.gauge(&x);
                if g > 1e-6 {
                    return x.scale(1.0 / g);
                }
            }
        }
    }

    /// Moves a boundary direction `u` inward to gauge `1 - depth`.
    pub fn at_depth(&self, u: &CPoint, depth: f64) -> CPoint {
        let g = self.gauge(u);
        u.scale((1.0 - depth) / g)
    }
}

pub(crate) fn active_factor(z: &CPoint) -> usize {
    let mut best: usize = 0;
    for (j, c) in z.0.iter().enumerate() {
        if c.norm_sqr() > z.0[best].norm_sqr() {
            best = j;
        }
    }
    best
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Uniform point of the unit disk.
pub fn uniform_unit_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let th = 2.0 * PI * rng.random::<f64>();
    Complex64::from_polar(r, th)
}

/// Standard complex Gaussian vector of length `n`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CPoint {
    CPoint(
        (0..n)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-300);
                let u2: f64 = rng.random();
                let r = (-2.0 * u1.ln()).sqrt();
                Complex64::new(r * (2.0 * PI * u2).cos(), r * (2.0 * PI * u2).sin())
            })
            .collect(),
    )
}

/// Distance from `(x0, y0)` to the curve `x^2 + y^(2m) = 1` in the closed
/// first quadrant. Complete Reinhardt domains reduce to this modulus picture.
fn egg_boundary_distance(x0: f64, y0: f64, m: u32) -> f64 {
    let curve = |y: f64| (1.0 - y.powi(2 * m as i32)).max(0.0).sqrt();
    let d2 = |y: f64| {
        let dx = curve(y) - x0;
        let dy = y - y0;
        dx * dx + dy * dy
    };
    let n: usize = 512;
    let mut best: usize = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..=n {
        let v = d2(i as f64 / n as f64);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let mut lo = (best.saturating_sub(1)) as f64 / n as f64;
    let mut hi = ((best + 1).min(n)) as f64 / n as f64;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if d2(a) < d2(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    d2(0.5 * (lo + hi)).min(best_val).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn egg_one_matches_ball_two() {
        let egg = Domain::egg(1);
        let ball = Domain::ball(2);
        let mut rng = stream(11, 0);
        for _ in 0..1000 {
            let z = complex_gaussian(&mut rng, 2).scale(0.7);
            assert_eq!(egg.rho(&z), ball.rho(&z));
        }
    }

    #[test]
    fn volumes_match_uniform_rejection_rate() {
        for d in [Domain::disk(), Domain::ball(2), Domain::egg(2), Domain::product_disk(2)] {
            let mut rng = stream(3, 1);
            let n = 200_000;
            let hits = (0..n)
                .filter(|_| {
                    let p = CPoint((0..d.dim()).map(|_| uniform_unit_disk(&mut rng)).collect());
                    d.rho(&p) < 0.0
                })
                .count();
            let est = PI.powi(d.dim() as i32) * hits as f64 / n as f64;
            assert!((est - d.volume()).abs() < 0.02 * d.volume(), "{:?}: {est} vs {}", d.kind(), d.volume());
        }
    }

    #[test]
    fn gauge_is_one_on_the_boundary() {
        let d = Domain::egg(3);
        let mut rng = stream(5, 0);
        for _ in 0..100 {
            let u = d.random_boundary_point(&mut rng);
            assert!(d.rho(&u).abs() < 1e-9);
            assert!((d.gauge(&u) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn egg_distance_agrees_with_ball_at_m_one() {
        let d = Domain::egg(1);
        let z = CPoint::real(&[0.3, 0.5]);
        let expected = 1.0 - z.norm();
        assert!((d.euclidean_boundary_distance(&z) - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Domain::new(DomainKind::UnitBall { n: 1 }).is_err());
        assert!(Domain::new(DomainKind::Egg { m: 0 }).is_err());
        assert!(Domain::new(DomainKind::ProductDisk { n: 1 }).is_err());
    }
}
