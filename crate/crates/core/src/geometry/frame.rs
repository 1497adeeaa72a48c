//! Anisotropic polydiscs adapted to the defining function.
//!
//! At a point `q` the complex normal direction is the normalised gradient of
//! `rho`; the remaining axes complete a unitary frame. The radial radius is
//! `delta` itself and each tangential radius is the largest step along its axis
//! that moves `rho` by at most `delta`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::domain::{CPoint, Domain};
use crate::error::{Error, Result};

/// Angles used for the tangential supremum.
pub const ANGLE_GRID: usize = 16;
/// Relative tolerance of the tangential-radius bisection.
pub const TAU_REL_TOL: f64 = 1e-3;
/// Largest admissible frame parameter.
pub const DELTA_MAX: f64 = 0.5;
const TAU_CAP: f64 = 4.0;

/// Unitary frame at a point: `axes[0]` is the complex normal.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub center: CPoint,
    pub axes: Vec<CPoint>,
}

impl LocalBasis {
    pub fn at(domain: &Domain, q: &CPoint) -> Result<Self> {
        let g = domain.grad_rho(q);
        let norm = g.norm();
        if norm < 1e-12 || !norm.is_finite() {
            return Err(Error::DegenerateGradient(format!("{q:?}")));
        }
        let normal = g.scale(1.0 / norm);
        let n = domain.dim();
        let mut axes = vec![normal];
        for k in 0..n {
            if axes.len() == n {
                break;
            }
            let mut e = CPoint::zeros(n);
            e.0[k] = Complex64::new(1.0, 0.0);
            for a in &axes {
                // e -= <e, a> a
                let c = e.inner(a);
                e = e.axpy(-c, a);
            }
            let en = e.norm();
            if en > 1e-8 {
                axes.push(e.scale(1.0 / en));
            }
        }
        Ok(LocalBasis { center: q.clone(), axes })
    }

    /// Coordinates of `w - center` along the axes.
    pub fn coords(&self, w: &CPoint) -> Vec<Complex64> {
        let d = w.sub(&self.center);
        self.axes.iter().map(|a| d.inner(a)).collect()
    }

    pub fn point(&self, coords: &[Complex64]) -> CPoint {
        let mut p = self.center.clone();
        for (c, a) in coords.iter().zip(&self.axes) {
            p = p.axpy(*c, a);
        }
        p
    }
}

/// Change of `rho` when stepping a complex distance `t` along `dir`,
/// maximised over a fixed angle grid.
pub fn tangential_growth(domain: &Domain, q: &CPoint, dir: &CPoint, t: f64) -> f64 {
    let r0 = domain.rho(q);
    (0..ANGLE_GRID)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / ANGLE_GRID as f64;
            let p = q.axpy(Complex64::from_polar(t, th), dir);
            (domain.rho(&p) - r0).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest `t` whose tangential growth along `dir` stays below `delta`.
pub fn tangential_radius(domain: &Domain, q: &CPoint, dir: &CPoint, delta: f64) -> Result<f64> {
    let mut hi = delta.max(1e-9);
    while tangential_growth(domain, q, dir, hi) <= delta {
        hi *= 2.0;
        if hi > TAU_CAP {
            return Err(Error::Bracket(format!(
                "tangential growth at {q:?} stays below delta={delta:e} up to t={TAU_CAP}"
            )));
        }
    }
    let mut lo = 0.0;
    while hi - lo > TAU_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if tangential_growth(domain, q, dir, mid) <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The polydisc `P(q, delta)`.
#[derive(Clone, Debug)]
pub struct PolydiscFrame {
    pub basis: LocalBasis,
    pub delta: f64,
    /// `tau[0] == delta`; `tau[j]` is the radius along `basis.axes[j]`.
    pub tau: Vec<f64>,
}

impl PolydiscFrame {
    pub fn center(&self) -> &CPoint {
        &self.basis.center
    }

    pub fn normal_dir(&self) -> &CPoint {
        &self.basis.axes[0]
    }

    pub fn tangent_dirs(&self) -> &[CPoint] {
        &self.basis.axes[1..]
    }

    /// Smallest dilation `s` with `w` in `s * P(q, delta)`.
    pub fn dilation_of(&self, w: &CPoint) -> f64 {
        self.basis
            .coords(w)
            .iter()
            .zip(&self.tau)
            .map(|(c, t)| c.norm() / t)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, w: &CPoint) -> bool {
        self.dilation_of(w) < 1.0
    }

    pub fn volume(&self) -> f64 {
        self.tau.iter().map(|t| PI * t * t).product()
    }
}

pub fn polydisc_frame(domain: &Domain, q: &CPoint, delta: f64) -> Result<PolydiscFrame> {
    if !(delta > 0.0 && delta < DELTA_MAX) {
        return Err(Error::InvalidArgument(format!("delta={delta} outside (0, {DELTA_MAX})")));
    }
    frame_unchecked(domain, q, delta)
}

/// Frame without the `delta < DELTA_MAX` guard; used for dilated copies.
pub(crate) fn frame_unchecked(domain: &Domain, q: &CPoint, delta: f64) -> Result<PolydiscFrame> {
    let basis = LocalBasis::at(domain, q)?;
    let mut tau = vec![delta];
    for dir in &basis.axes[1..] {
        tau.push(tangential_radius(domain, q, dir, delta)?);
    }
    Ok(PolydiscFrame { basis, delta, tau })
}

/// Result of the one-sided polydisc distance `M(z, w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolydiscDistance {
    pub value: f64,
    pub saturated: bool,
}

/// `M(z, w) = inf { eps : w in P(z, eps) }`.
///
/// Membership `|zeta_j| < tau_j(z, eps)` is equivalent to
/// `growth_j(|zeta_j|) < eps` because the growth is nondecreasing, so the
/// infimum is read off the frame coordinates directly.
pub fn polydisc_distance(domain: &Domain, z: &CPoint, w: &CPoint) -> Result<PolydiscDistance> {
    if z == w {
        return Ok(PolydiscDistance { value: 0.0, saturated: false });
    }
    let basis = LocalBasis::at(domain, z)?;
    let c = basis.coords(w);
    let mut m = c[0].norm();
    for (cj, dir) in c.iter().zip(&basis.axes).skip(1) {
        m = m.max(tangential_growth(domain, z, dir, cj.norm()));
    }
    if m > DELTA_MAX {
        Ok(PolydiscDistance { value: DELTA_MAX, saturated: true })
    } else {
        Ok(PolydiscDistance { value: m, saturated: false })
    }
}

/// The same infimum found by bisection over `eps`, rebuilding `P(z, eps)` at
/// every step. Slow; kept as an independent route for cross-checks.
pub fn polydisc_distance_bisect(domain: &Domain, z: &CPoint, w: &CPoint) -> Result<PolydiscDistance> {
    if z == w {
        return Ok(PolydiscDistance { value: 0.0, saturated: false });
    }
    let inside = |eps: f64| -> Result<bool> { Ok(frame_unchecked(domain, z, eps)?.contains(w)) };
    if !inside(DELTA_MAX)? {
        return Ok(PolydiscDistance { value: DELTA_MAX, saturated: true });
    }
    let (mut lo, mut hi) = (0.0, DELTA_MAX);
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(PolydiscDistance { value: hi, saturated: false })
}

/// Symmetrised polydisc metric `M(z, w) + M(w, z)`.
pub fn polydisc_metric(domain: &Domain, z: &CPoint, w: &CPoint) -> Result<f64> {
    Ok(polydisc_distance(domain, z, w)?.value + polydisc_distance(domain, w, z)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_radius_is_delta() {
        let d = Domain::ball(2);
        let f = polydisc_frame(&d, &CPoint::real(&[0.9, 0.1]), 0.01).unwrap();
        assert_eq!(f.tau[0], 0.01);
    }

    #[test]
    fn strongly_pseudoconvex_tangential_scaling() {
        let d = Domain::ball(2);
        let delta = 1e-3;
        let f = polydisc_frame(&d, &CPoint::real(&[0.99, 0.0]), delta).unwrap();
        let ratio = f.tau[1] / delta.sqrt();
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn egg_flat_point_scaling() {
        let d = Domain::egg(2);
        let delta = 1e-3;
        let f = polydisc_frame(&d, &CPoint::real(&[1.0 - delta, 0.0]), delta).unwrap();
        let ratio = f.tau[1] / delta.powf(0.25);
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn tau_nondecreasing_in_delta() {
        let d = Domain::egg(3);
        let q = CPoint::real(&[0.8, 0.3]);
        let mut prev = 0.0;
        for delta in [1e-4, 1e-3, 1e-2, 0.1] {
            let f = polydisc_frame(&d, &q, delta).unwrap();
            assert!(f.tau[1] >= prev);
            prev = f.tau[1];
        }
    }

    #[test]
    fn vanishing_gradient_is_an_error() {
        let d = Domain::ball(2);
        assert!(matches!(
            polydisc_frame(&d, &CPoint::zeros(2), 0.1),
            Err(Error::DegenerateGradient(_))
        ));
    }

    #[test]
    fn delta_out_of_range() {
        let d = Domain::disk();
        assert!(polydisc_frame(&d, &CPoint::c1(0.5, 0.0), 0.7).is_err());
    }

    #[test]
    fn egg_tangential_step_costs_fourth_power() {
        let d = Domain::egg(2);
        let z = CPoint::real(&[1.0 - 1e-3, 0.0]);
        let w = z.add(&CPoint::real(&[0.0, 0.1]));
        let m = polydisc_distance(&d, &z, &w).unwrap();
        assert!(!m.saturated);
        let ratio = m.value / 1e-4;
        assert!((0.25..=4.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn direct_and_bisection_routes_agree() {
        let d = Domain::egg(2);
        let pairs = [
            (CPoint::real(&[0.9, 0.1]), CPoint::real(&[0.88, 0.2])),
            (CPoint::real(&[0.95, 0.0]), CPoint::new(&[Complex64::new(0.94, 0.01), Complex64::new(0.0, 0.15)])),
            (CPoint::real(&[0.5, 0.6]), CPoint::real(&[0.52, 0.62])),
        ];
        for (z, w) in pairs {
            let a = polydisc_distance(&d, &z, &w).unwrap().value;
            let b = polydisc_distance_bisect(&d, &z, &w).unwrap().value;
            assert!((a - b).abs() <= 3e-3 * a.max(b), "{a} vs {b}");
        }
    }

    #[test]
    fn identity_and_symmetry() {
        let d = Domain::egg(2);
        let z = CPoint::real(&[0.7, 0.4]);
        let w = CPoint::real(&[0.72, 0.35]);
        assert_eq!(polydisc_metric(&d, &z, &z).unwrap(), 0.0);
        assert_eq!(polydisc_metric(&d, &z, &w).unwrap(), polydisc_metric(&d, &w, &z).unwrap());
    }
}
