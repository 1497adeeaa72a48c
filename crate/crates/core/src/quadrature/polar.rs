//! Graded composite polar rules on the unit disk.
//!
//! A region is described in polar coordinates around a reference angle
//! `theta0`: for each angular offset `t` in `[-half_width, half_width]` it
//! covers radii `bounds(t)`. Angular panels are split at the given kinks of
//! `bounds` and graded geometrically around an optional focus direction.
//! Radial panels are graded towards the boundary circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gauss::Rule1d;
use super::points::PointSet;
use crate::geometry::CPoint;

pub struct DiskRegion<'a> {
    pub theta0: f64,
    pub half_width: f64,
    /// Angular offsets where `bounds` has a kink.
    pub kinks: Vec<f64>,
    pub bounds: Box<dyn Fn(f64) -> (f64, f64) + Sync + 'a>,
}

/// Grade the rule around a point where the integrand varies on a small scale.
#[derive(Clone, Copy, Debug)]
pub struct Focus {
    pub angle: f64,
    pub scale: f64,
}

impl Focus {
    /// Focus at an interior point of the disk: its angle and boundary depth.
    pub fn at(z: Complex64) -> Option<Focus> {
        let depth = 1.0 - z.norm();
        (depth < 0.25 && z.norm() > 0.0).then(|| Focus { angle: z.arg(), scale: depth.max(1e-12) })
    }
}

/// Smallest radial panel relative to the radial extent when the region
/// reaches the boundary circle.
const FIRST_PANEL: f64 = 1.0 / (1u64 << 30) as f64;

impl DiskRegion<'_> {
    pub fn whole(theta0: f64) -> DiskRegion<'static> {
        DiskRegion { theta0, half_width: PI, kinks: vec![], bounds: Box::new(|_| (0.0, 1.0)) }
    }

    /// Rule with `order` Gauss nodes per panel, excluding radii above
    /// `1 - floor`.
    pub fn rule(&self, order: usize, floor: f64, focus: Option<Focus>) -> PointSet {
        let hw = self.half_width;
        let mut cuts = vec![-hw, hw, 0.0];
        for k in &self.kinks {
            if k.abs() < hw {
                cuts.push(*k);
                cuts.push(-*k);
            }
        }
        if let Some(f) = focus {
            let off = wrap(f.angle - self.theta0);
            let mut h = f.scale;
            while h < 2.0 * hw {
                for c in [off - h, off + h] {
                    if c.abs() < hw {
                        cuts.push(c);
                    }
                }
                h *= 2.0;
            }
            if off.abs() < hw {
                cuts.push(off);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let mut ang = Rule1d::default();
        for w in cuts.windows(2) {
            ang.push_interval(w[0], w[1], order);
        }
        let rmax = 1.0 - floor;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (t, wt) in ang.nodes.iter().zip(&ang.weights) {
            let (lo, hi) = (self.bounds)(*t);
            let hi = hi.min(rmax);
            if hi <= lo {
                continue;
            }
            let radial = radial_rule(lo, hi, order);
            let phase = Complex64::from_polar(1.0, self.theta0 + t);
            for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
                points.push(CPoint::new(&[phase * r]));
                weights.push(wt * wr * r);
            }
        }
        PointSet::deterministic(points, weights)
    }
}

/// Radial rule on `[lo, hi]` graded towards `hi`.
fn radial_rule(lo: f64, hi: f64, order: usize) -> Rule1d {
    let width = hi - lo;
    let gap = 1.0 - hi;
    let mut r = Rule1d::default();
    if gap <= 0.0 {
        r.push_graded_right(lo, hi, width * FIRST_PANEL, order, true);
    } else if gap < width {
        r.push_graded_right(lo, hi, gap, order, false);
    } else {
        r.push_interval(lo, hi, order);
    }
    r
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_disk_moments() {
        let set = DiskRegion::whole(0.3).rule(8, 0.0, None);
        assert!((set.total_weight() - PI).abs() < 1e-12);
        let v = set.integrate(|z| (1.0 - z.norm_sqr()).powf(-0.5), 1e-6).value;
        assert!((v - 2.0 * PI).abs() < 1e-7, "{v}");
    }

    #[test]
    fn floor_excludes_outer_annulus() {
        let set = DiskRegion::whole(0.0).rule(8, 1e-3, None);
        let exact = PI * (1.0 - 1e-3f64).powi(2);
        assert!((set.total_weight() - exact).abs() < 1e-12);
    }

    #[test]
    fn focused_rule_integrates_peaked_kernel() {
        // integral of |1 - z conj(w)|^(-4) over the disk is pi / (1 - |z|^2)^2
        let z = Complex64::from_polar(1.0 - 1e-3, 1.0);
        let set = DiskRegion::whole(z.arg()).rule(8, 0.0, Focus::at(z));
        let v = set.integrate(|w| (1.0 - z * w.0[0].conj()).norm().powi(-4), 1e-6).value;
        let exact = PI / (1.0 - z.norm_sqr()).powi(2);
        assert!((v / exact - 1.0).abs() < 1e-6, "{v} {exact}");
    }
}
