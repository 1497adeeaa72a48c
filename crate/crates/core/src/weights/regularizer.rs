//! The regularizing operator `R_k`.

use std::sync::Arc;

use super::weight::{RadialTable, Weight, WeightFamily};
use crate::error::{Error, Result};
use crate::geometry::{boundary_distance, CPoint, Domain, QuasiBall};
use crate::quadrature::{integrate_ball, IntegralEstimate, QuadratureSpec};

/// `R_k` with the admissible range `k < 1 / (2 C_d)`, `C_d = max(c, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regularizer {
    pub k: f64,
    pub c_d: f64,
}

impl Regularizer {
    pub fn new(k: f64, triangle_constant: f64) -> Result<Self> {
        let c_d = triangle_constant.max(1.0);
        if !(k > 0.0 && k < 1.0 / (2.0 * c_d)) {
            return Err(Error::InvalidArgument(format!("k={k} outside (0, {})", 1.0 / (2.0 * c_d))));
        }
        Ok(Regularizer { k, c_d })
    }

    /// `k' = C_d k / (1 - C_d k)`.
    pub fn k_prime(&self) -> f64 {
        self.c_d * self.k / (1.0 - self.c_d * self.k)
    }

    /// `B_k(z) = { w : d(w,z) < k d(z,bΩ) }`.
    pub fn ball(&self, domain: &Domain, z: &CPoint) -> Result<QuasiBall> {
        QuasiBall::new(domain, z.clone(), self.k * boundary_distance(domain, z)?)
    }

    /// `(1/mu(B_k(z))) ∫_{B_k(z)} |f| dmu`.
    pub fn apply<F>(&self, domain: &Domain, f: F, z: &CPoint, spec: &QuadratureSpec) -> Result<IntegralEstimate>
    where
        F: Fn(&CPoint) -> f64 + Sync,
    {
        let ball = self.ball(domain, z)?;
        let num = integrate_ball(domain, &ball, |w| f(w).abs(), spec)?;
        let den = integrate_ball(domain, &ball, |_| 1.0, spec)?;
        if den.value <= 0.0 {
            return Err(Error::Sampling(format!("B_k(z) at {z:?} resolved as empty")));
        }
        Ok(num.ratio(&den))
    }
}

pub fn regularize(
    domain: &Domain,
    sigma: &Weight,
    k: f64,
    triangle_constant: f64,
    z: &CPoint,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    Regularizer::new(k, triangle_constant)?.apply(domain, |w| sigma.eval(w), z, spec)
}

/// Depth grid of the tabulated regularized weight.
const TABLE_DEPTHS: usize = 200;
const TABLE_MIN_DEPTH: f64 = 1e-9;
const TABLE_MAX_DEPTH: f64 = 0.99;

fn is_radial(w: &Weight) -> bool {
    match &w.family {
        WeightFamily::Constant(_) | WeightFamily::Power { .. } | WeightFamily::Radial { .. } => true,
        WeightFamily::PowerOf { base, .. } | WeightFamily::Scaled { base, .. } => is_radial(base),
        WeightFamily::Table(_) => false,
    }
}

/// `R_k(sigma)` as a weight. Radial weights on ball-like domains only, where
/// `R_k(sigma)` depends on the depth alone and is tabulated once.
pub fn regularized_weight(
    domain: &Domain,
    sigma: &Weight,
    reg: &Regularizer,
    spec: &QuadratureSpec,
) -> Result<Weight> {
    if !domain.is_ball_like() || !is_radial(sigma) {
        return Err(Error::Unsupported("regularized weight needs a radial weight on the disk or ball".into()));
    }
    let (a, b) = (TABLE_MIN_DEPTH.ln(), TABLE_MAX_DEPTH.ln());
    let log_depths: Vec<f64> =
        (0..TABLE_DEPTHS).map(|i| a + (b - a) * i as f64 / (TABLE_DEPTHS - 1) as f64).collect();
    let mut log_values = Vec::with_capacity(TABLE_DEPTHS);
    for x in &log_depths {
        let mut c = vec![0.0; domain.dim()];
        c[0] = 1.0 - x.exp();
        let z = CPoint::real(&c);
        log_values.push(reg.apply(domain, |w| sigma.eval(w), &z, spec)?.value.ln());
    }
    let table = RadialTable { log_depths, log_values };
    Weight::new(
        domain,
        WeightFamily::Radial { table: Arc::new(table), label: format!("R_{}({})", reg.k, sigma.label()) },
        sigma.p,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sample_ball;
    use crate::quadrature::BallOptions;

    #[test]
    fn range_of_k() {
        assert!(Regularizer::new(0.49, 1.0).is_ok());
        assert!(Regularizer::new(0.5, 1.0).is_err());
        assert!(Regularizer::new(0.3, 2.0).is_err());
        assert!(Regularizer::new(0.0, 1.0).is_err());
        let r = Regularizer::new(0.1, 1.0).unwrap();
        assert!((r.k_prime() - 0.1 / 0.9).abs() < 1e-15);
    }

    #[test]
    fn constant_and_linearity() {
        let d = Domain::disk();
        let spec = QuadratureSpec::polar(32, 32);
        let z = CPoint::c1(0.9, 0.1);
        let one = Weight::constant(&d, 1.0, 2.0).unwrap();
        assert!((regularize(&d, &one, 0.1, 1.0, &z, &spec).unwrap().value - 1.0).abs() < 1e-14);
        let w = Weight::power(&d, 0.5, 2.0).unwrap();
        let a = regularize(&d, &w, 0.1, 1.0, &z, &spec).unwrap().value;
        let b = regularize(&d, &w.scaled(2.0), 0.1, 1.0, &z, &spec).unwrap().value;
        assert!((b - 2.0 * a).abs() < 1e-12 * a);
    }

    #[test]
    fn sandwich() {
        let d = Domain::disk();
        let spec = QuadratureSpec::polar(32, 32);
        let w = Weight::power(&d, 0.5, 2.0).unwrap();
        let z = CPoint::c1(0.9, 0.0);
        let reg = Regularizer::new(0.1, 1.0).unwrap();
        let v = reg.apply(&d, |p| w.eval(p), &z, &spec).unwrap().value;
        let set = sample_ball(&d, &reg.ball(&d, &z).unwrap(), &BallOptions::default(), &spec).unwrap();
        let vals: Vec<f64> = set.points.iter().map(|p| w.eval(p)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(0.0, f64::max);
        assert!(lo <= v && v <= hi);
    }

    #[test]
    fn tabulated_weight_matches_direct_evaluation() {
        let d = Domain::disk();
        let spec = QuadratureSpec::polar(32, 32);
        let w = Weight::power(&d, 0.5, 2.0).unwrap();
        let reg = Regularizer::new(0.1, 1.0).unwrap();
        let rw = regularized_weight(&d, &w, &reg, &spec).unwrap();
        for z in [CPoint::c1(0.0, 0.97), CPoint::c1(0.5, 0.2), CPoint::c1(-0.999, 0.0)] {
            let direct = reg.apply(&d, |p| w.eval(p), &z, &spec).unwrap().value;
            assert!((rw.eval(&z) / direct - 1.0).abs() < 5e-3, "{z:?} {} {direct}", rw.eval(&z));
        }
    }
}
