//! Quasi-metrics, quasi-balls and the boundary distance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::domain::{CPoint, Domain, DomainKind};
use super::frame::{polydisc_metric, tangential_radius, LocalBasis};
use crate::error::{Error, Result};

/// Which quasi-metric a ball is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `||w| - |z|| + |1 - <w,z>/(|w||z|)|`.
    Ball,
    /// Symmetrised polydisc metric `M(z,w) + M(w,z)`.
    Polydisc,
    /// Sum of the disk metric over the factors of a polydisc.
    ProductSum,
}

impl MetricKind {
    /// Canonical metric for a domain kind.
    pub fn canonical(domain: &Domain) -> Self {
        match domain.kind() {
            DomainKind::UnitDisk | DomainKind::UnitBall { .. } => MetricKind::Ball,
            DomainKind::Egg { .. } => MetricKind::Polydisc,
            DomainKind::ProductDisk { .. } => MetricKind::ProductSum,
        }
    }
}

/// Value of the explicit ball metric with the origin fallback flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallMetric {
    pub value: f64,
    /// Set when either point is the origin, where the formula is singular.
    pub origin_fallback: bool,
}

pub fn ball_metric(z: &CPoint, w: &CPoint) -> BallMetric {
    let nz = z.norm();
    let nw = w.norm();
    if nz == 0.0 || nw == 0.0 {
        let both = nz == 0.0 && nw == 0.0;
        return BallMetric { value: (nw - nz).abs() + if both { 0.0 } else { 1.0 }, origin_fallback: true };
    }
    if z == w {
        return BallMetric { value: 0.0, origin_fallback: false };
    }
    let c = w.inner(z) / (nw * nz);
    BallMetric { value: (nw - nz).abs() + (Complex64::new(1.0, 0.0) - c).norm(), origin_fallback: false }
}

/// Disk metric on one complex coordinate.
fn disk_metric(z: Complex64, w: Complex64) -> f64 {
    let nz = z.norm();
    let nw = w.norm();
    if nz == 0.0 || nw == 0.0 {
        return (nw - nz).abs() + if nz == 0.0 && nw == 0.0 { 0.0 } else { 1.0 };
    }
    if z == w {
        return 0.0;
    }
    (nw - nz).abs() + (Complex64::new(1.0, 0.0) - w * z.conj() / (nw * nz)).norm()
}

/// Quasi-distance in the given metric. The polydisc metric can fail only on a
/// degenerate gradient; such pairs are reported as infinitely far apart.
pub fn distance(domain: &Domain, kind: MetricKind, z: &CPoint, w: &CPoint) -> f64 {
    match kind {
        MetricKind::Ball => ball_metric(z, w).value,
        MetricKind::Polydisc => polydisc_metric(domain, z, w).unwrap_or(f64::INFINITY),
        MetricKind::ProductSum => z.0.iter().zip(w.0.iter()).map(|(a, b)| disk_metric(*a, *b)).sum(),
    }
}

/// Canonical quasi-distance of the domain.
pub fn quasi_distance(domain: &Domain, z: &CPoint, w: &CPoint) -> f64 {
    distance(domain, MetricKind::canonical(domain), z, w)
}

/// `B(center, radius) = { w in domain : d(w, center) < radius }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiBall {
    #[serde(with = "point_serde")]
    pub center: CPoint,
    pub radius: f64,
    pub metric: MetricKind,
}

impl QuasiBall {
    pub fn new(domain: &Domain, center: CPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("ball radius {radius} must be positive")));
        }
        domain.check_interior(&center)?;
        Ok(QuasiBall { center, radius, metric: MetricKind::canonical(domain) })
    }

    pub fn contains(&self, domain: &Domain, w: &CPoint) -> bool {
        domain.contains(w) && distance(domain, self.metric, w, &self.center) < self.radius
    }

    pub fn dilate(&self, lambda: f64) -> QuasiBall {
        QuasiBall { center: self.center.clone(), radius: self.radius * lambda, metric: self.metric }
    }

    /// `radius > d(center, bΩ)`.
    pub fn touches_boundary(&self, domain: &Domain) -> Result<bool> {
        Ok(self.radius > boundary_distance(domain, &self.center)?)
    }
}

/// A product of complex discs in a unitary frame: `center + sum zeta_j axes_j`
/// with `|zeta_j| < radii_j`.
#[derive(Clone, Debug)]
pub struct LocalBox {
    pub center: CPoint,
    pub axes: Vec<CPoint>,
    pub radii: Vec<f64>,
}

impl LocalBox {
    pub fn volume(&self) -> f64 {
        self.radii.iter().map(|r| PI * r * r).product()
    }

    /// The unit polydisc, which contains every model domain.
    pub fn unit_polydisc(n: usize) -> Self {
        let axes = (0..n)
            .map(|k| {
                let mut e = CPoint::zeros(n);
                e.0[k] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        LocalBox { center: CPoint::zeros(n), axes, radii: vec![1.0; n] }
    }

    pub fn point(&self, coords: &[Complex64]) -> CPoint {
        let mut p = self.center.clone();
        for (c, a) in coords.iter().zip(&self.axes) {
            p = p.axpy(*c, a);
        }
        p
    }

    /// Radius of a Euclidean ball around `self.center` containing the box.
    pub fn euclidean_radius(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum::<f64>().sqrt()
    }
}

/// A region guaranteed to contain `B(center, r)`.
pub fn bounding_box(domain: &Domain, ball: &QuasiBall) -> LocalBox {
    let n = domain.dim();
    let whole = LocalBox::unit_polydisc(n);
    let c = &ball.center;
    let r = ball.radius;
    let candidate = match ball.metric {
        MetricKind::Ball => {
            let nc = c.norm();
            if nc == 0.0 || r >= 1.0 {
                None
            } else {
                let normal = c.scale(1.0 / nc);
                let basis = LocalBasis::at(domain, c).ok();
                basis.map(|b| {
                    let mut axes = vec![normal];
                    axes.extend(b.axes.into_iter().skip(1));
                    let mut radii = vec![r * (1.0 + nc + r)];
                    let tang = (nc + r) * (2.0 * r - r * r).sqrt();
                    radii.extend(std::iter::repeat_n(tang, n - 1));
                    LocalBox { center: c.clone(), axes, radii }
                })
            }
        }
        MetricKind::Polydisc => LocalBasis::at(domain, c).ok().map(|b| {
            let mut radii = vec![r.min(2.0)];
            for dir in &b.axes[1..] {
                radii.push(tangential_radius(domain, c, dir, r).unwrap_or(2.0).min(2.0));
            }
            LocalBox { center: c.clone(), axes: b.axes, radii }
        }),
        MetricKind::ProductSum => {
            let radii = c.0.iter().map(|cj| r * (1.0 + cj.norm() + r)).collect();
            Some(LocalBox { center: c.clone(), axes: whole.axes.clone(), radii })
        }
    };
    match candidate {
        Some(b) if b.volume() < whole.volume() => b,
        _ => whole,
    }
}

/// Point where the outward normal ray from `z` leaves the domain.
pub fn normal_projection(domain: &Domain, z: &CPoint) -> Result<CPoint> {
    domain.check_interior(z)?;
    let basis = LocalBasis::at(domain, z)?;
    let n = &basis.axes[0];
    let s_max = 4.0;
    let at = |s: f64| z.axpy(Complex64::new(s, 0.0), n);
    if domain.rho(&at(s_max)) <= 0.0 {
        return Err(Error::Bracket(format!("normal ray from {z:?} does not exit within {s_max}")));
    }
    let (mut lo, mut hi) = (0.0, s_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if domain.rho(&at(mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(at(hi))
}

/// Quasi-distance from `z` to its normal projection on the boundary.
///
/// Ball-like domains use the closed form `1 - |z|`, which is what the
/// projection gives there. Points with a vanishing gradient fall back to the
/// Euclidean boundary distance.
pub fn boundary_distance(domain: &Domain, z: &CPoint) -> Result<f64> {
    domain.check_interior(z)?;
    if domain.is_ball_like() {
        return Ok(1.0 - z.norm());
    }
    boundary_distance_by_projection(domain, z)
}

pub fn boundary_distance_by_projection(domain: &Domain, z: &CPoint) -> Result<f64> {
    match normal_projection(domain, z) {
        Ok(p) => Ok(quasi_distance(domain, z, &p)),
        Err(Error::DegenerateGradient(_)) => Ok(domain.euclidean_boundary_distance(z)),
        Err(e) => Err(e),
    }
}

mod point_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::CPoint;

    pub fn serialize<S: Serializer>(p: &CPoint, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = p.0.iter().map(|c| [c.re, c.im]).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CPoint, D::Error> {
        let v: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(CPoint(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
    }
}

pub use point_serde::{deserialize as deserialize_point, serialize as serialize_point};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::complex_gaussian;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn ball_metric_examples() {
        let d = ball_metric(&CPoint::c1(0.5, 0.0), &CPoint::c1(0.9, 0.0));
        assert!((d.value - 0.4).abs() < 1e-15);
        assert!(!d.origin_fallback);
        let z = CPoint::c1(0.3, 0.2);
        assert_eq!(ball_metric(&z, &z).value, 0.0);
        let d = ball_metric(&CPoint::c1(0.5, 0.0), &CPoint::c1(0.0, 0.5));
        assert!((d.value - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ball_metric_origin_fallback() {
        let d = ball_metric(&CPoint::c1(0.0, 0.0), &CPoint::c1(0.4, 0.0));
        assert!(d.origin_fallback);
        assert!((d.value - 1.4).abs() < 1e-15);
        let d = ball_metric(&CPoint::c1(0.0, 0.0), &CPoint::c1(0.0, 0.0));
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn ball_metric_is_exactly_symmetric() {
        let mut rng = stream(1, 0);
        for _ in 0..1000 {
            let z = complex_gaussian(&mut rng, 2).scale(0.4);
            let w = complex_gaussian(&mut rng, 2).scale(0.4);
            assert_eq!(ball_metric(&z, &w).value, ball_metric(&w, &z).value);
        }
    }

    #[test]
    fn boundary_distance_examples() {
        let disk = Domain::disk();
        assert!((boundary_distance(&disk, &CPoint::c1(0.9, 0.0)).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(boundary_distance(&disk, &CPoint::c1(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(boundary_distance_by_projection(&disk, &CPoint::c1(0.0, 0.0)).unwrap(), 1.0);
        let ball = Domain::ball(2);
        let z = CPoint::real(&[0.5, 0.5]);
        let d = boundary_distance(&ball, &z).unwrap();
        assert!((d - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn projection_route_matches_closed_form_on_ball() {
        let ball = Domain::ball(2);
        let mut rng = stream(9, 0);
        for _ in 0..200 {
            let z = ball.sample_uniform(&mut rng, 1000).unwrap();
            if z.norm() < 1e-3 {
                continue;
            }
            let a = boundary_distance(&ball, &z).unwrap();
            let b = boundary_distance_by_projection(&ball, &z).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn bounding_box_contains_ball_members() {
        let mut rng = stream(4, 2);
        for domain in [Domain::disk(), Domain::ball(2), Domain::egg(2), Domain::product_disk(2)] {
            for _ in 0..5 {
                let u = domain.random_boundary_point(&mut rng);
                let depth = 10f64.powf(rng.random_range(-2.5..-0.5));
                let c = domain.at_depth(&u, depth);
                let r = 10f64.powf(rng.random_range(-2.5..-0.7));
                let ball = QuasiBall::new(&domain, c, r).unwrap();
                let bx = bounding_box(&domain, &ball);
                let basis_box = LocalBox { ..bx.clone() };
                // members found by a wide search must lie in the box
                for _ in 0..3000 {
                    let w = ball.center.add(&complex_gaussian(&mut rng, domain.dim()).scale(r.sqrt()));
                    if ball.contains(&domain, &w) {
                        let d = w.sub(&basis_box.center);
                        for (a, rad) in basis_box.axes.iter().zip(&basis_box.radii) {
                            assert!(d.inner(a).norm() <= *rad * (1.0 + 1e-9), "{:?}", domain.kind());
                        }
                    }
                }
            }
        }
    }
}
