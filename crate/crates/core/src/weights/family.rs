//! Seeded families of quasi-balls.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary_distance, Domain, QuasiBall};
use crate::rng::par_generate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    /// Force `R > d(center, bΩ)`.
    pub boundary_touching: bool,
    /// Centers per radius.
    pub n_centers: usize,
    pub radius_grid: Vec<f64>,
    pub seed: u64,
    /// Boundary depth of the centers as a fraction of the radius, drawn
    /// log-uniformly. Touching families need the upper end below one.
    #[serde(default = "default_depth_range")]
    pub depth_range: (f64, f64),
}

fn default_depth_range() -> (f64, f64) {
    (1.0 / 16.0, 0.5)
}

impl FamilySpec {
    pub fn touching(n_centers: usize, radius_grid: Vec<f64>, seed: u64) -> Self {
        FamilySpec { boundary_touching: true, n_centers, radius_grid, seed, depth_range: default_depth_range() }
    }

    /// Mixed family: touching balls and balls well inside the domain.
    pub fn mixed(n_centers: usize, radius_grid: Vec<f64>, seed: u64) -> Self {
        FamilySpec { boundary_touching: false, n_centers, radius_grid, seed, depth_range: (1.0 / 16.0, 8.0) }
    }

    /// Powers of two `2^{-lo} .. 2^{-hi}`.
    pub fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|k| 0.5f64.powi(k)).collect()
    }
}

pub fn ball_family(domain: &Domain, spec: &FamilySpec) -> Result<Vec<QuasiBall>> {
    if spec.radius_grid.is_empty() || spec.n_centers == 0 {
        return Err(Error::InvalidArgument("ball family needs radii and centers".into()));
    }
    let (lo, hi) = spec.depth_range;
    if !(lo > 0.0 && hi >= lo) || (spec.boundary_touching && lo >= 1.0) {
        return Err(Error::InvalidArgument(format!("bad depth range ({lo}, {hi})")));
    }
    let n = spec.radius_grid.len() * spec.n_centers;
    let balls = par_generate(spec.seed, n, |rng, i| -> Result<QuasiBall> {
        let r = spec.radius_grid[i / spec.n_centers];
        let u = domain.random_boundary_point(rng);
        let frac = (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp();
        let mut depth = (frac * r).min(0.9);
        loop {
            let c = domain.at_depth(&u, depth);
            let bd = boundary_distance(domain, &c)?;
            if !spec.boundary_touching || bd < r {
                return QuasiBall::new(domain, c, r);
            }
            depth *= 0.5;
        }
    });
    balls.into_iter().collect()
}

pub fn min_radius(family: &[QuasiBall]) -> f64 {
    family.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touching_family_touches() {
        for d in [Domain::disk(), Domain::ball(2), Domain::egg(2)] {
            let spec = FamilySpec::touching(5, FamilySpec::dyadic(2, 8), 3);
            let fam = ball_family(&d, &spec).unwrap();
            assert_eq!(fam.len(), 35);
            assert!(fam.iter().all(|b| b.touches_boundary(&d).unwrap()));
            assert_eq!(min_radius(&fam), 0.5f64.powi(8));
            assert_eq!(fam, ball_family(&d, &spec).unwrap());
        }
    }
}
