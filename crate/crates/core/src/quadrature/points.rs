//! Weighted point sets and their error estimates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::CPoint;
use crate::rng::pairwise_sum;

/// Number of jackknife blocks per stratum.
pub const JACKKNIFE_BLOCKS: usize = 32;

/// Values below this magnitude are not flagged for relative error.
pub const ABS_FLOOR: f64 = 1e-12;

/// Quadrature or Monte Carlo estimate of an integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralEstimate<T = f64> {
    pub value: T,
    pub std_error: f64,
    pub n_effective: usize,
    pub flagged: bool,
    /// Integrand values that were NaN or infinite; they are dropped.
    pub n_nonfinite: usize,
    /// Set when layer contributions fail to decay towards the boundary.
    pub divergent: bool,
}

impl<T> IntegralEstimate<T> {
    fn with_flag(mut self, rel_tol: f64, magnitude: f64) -> Self {
        self.flagged = self.std_error > rel_tol * magnitude.max(ABS_FLOOR)
            || self.n_nonfinite > 0
            || self.divergent
            || !magnitude.is_finite();
        self
    }
}

impl IntegralEstimate<f64> {
    pub fn exact(value: f64) -> Self {
        IntegralEstimate { value, std_error: 0.0, n_effective: 0, flagged: false, n_nonfinite: 0, divergent: false }
    }

    /// `self / other` with first-order error propagation.
    pub fn ratio(&self, other: &IntegralEstimate) -> IntegralEstimate {
        let value = self.value / other.value;
        let rel = ((self.std_error / self.value).powi(2) + (other.std_error / other.value).powi(2)).sqrt();
        IntegralEstimate {
            value,
            std_error: if value == 0.0 { self.std_error / other.value.abs() } else { value.abs() * rel },
            n_effective: self.n_effective.min(other.n_effective),
            flagged: self.flagged || other.flagged,
            n_nonfinite: self.n_nonfinite + other.n_nonfinite,
            divergent: self.divergent || other.divergent,
        }
    }

    pub fn relative_error(&self) -> f64 {
        self.std_error / self.value.abs().max(ABS_FLOOR)
    }
}

/// Weighted nodes. Monte Carlo sets carry stratum and jackknife block ids;
/// deterministic rules carry neither and report zero sampling error.
#[derive(Clone, Debug, Default)]
pub struct PointSet {
    pub points: Vec<CPoint>,
    pub weights: Vec<f64>,
    pub strata: Vec<u32>,
    pub blocks: Vec<u32>,
    pub n_strata: usize,
    /// Attempted draws, including rejected ones.
    pub n_attempts: usize,
    pub deterministic: bool,
    /// Strata are boundary layers ordered from the core outwards.
    pub boundary_layers: bool,
}

impl PointSet {
    pub fn deterministic(points: Vec<CPoint>, weights: Vec<f64>) -> Self {
        let n = points.len();
        PointSet {
            points,
            weights,
            strata: vec![],
            blocks: vec![],
            n_strata: 1,
            n_attempts: n,
            deterministic: true,
            boundary_layers: false,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Evaluates `f` at every node in parallel, in node order.
    pub fn evaluate<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&CPoint) -> T + Sync,
    {
        self.points.par_iter().map(&f).collect()
    }

    pub fn integrate<F>(&self, f: F, rel_tol: f64) -> IntegralEstimate
    where
        F: Fn(&CPoint) -> f64 + Sync,
    {
        let vals = self.evaluate(f);
        self.estimate(&vals, rel_tol)
    }

    pub fn integrate_complex<F>(&self, f: F, rel_tol: f64) -> IntegralEstimate<Complex64>
    where
        F: Fn(&CPoint) -> Complex64 + Sync,
    {
        let vals = self.evaluate(f);
        self.estimate_complex(&vals, rel_tol)
    }

    /// Weighted sum of precomputed node values with its jackknife error.
    pub fn estimate(&self, values: &[f64], rel_tol: f64) -> IntegralEstimate {
        let (value, var, bad, layers) = self.accumulate(values);
        let divergent = self.boundary_layers && layers_diverge(&layers);
        IntegralEstimate {
            value,
            std_error: var.sqrt(),
            n_effective: self.len() - bad,
            flagged: false,
            n_nonfinite: bad,
            divergent,
        }
        .with_flag(rel_tol, value.abs())
    }

    pub fn estimate_complex(&self, values: &[Complex64], rel_tol: f64) -> IntegralEstimate<Complex64> {
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let (vr, varr, _, _) = self.accumulate(&re);
        let (vi, vari, _, _) = self.accumulate(&im);
        let bad = values.iter().filter(|v| !(v.re.is_finite() && v.im.is_finite())).count();
        let value = Complex64::new(vr, vi);
        IntegralEstimate {
            value,
            std_error: (varr + vari).sqrt(),
            n_effective: self.len() - bad,
            flagged: false,
            n_nonfinite: bad,
            divergent: false,
        }
        .with_flag(rel_tol, value.norm())
    }

    /// Smooth function `g` of several integrals over this set, with a
    /// stratified delete-one-block jackknife error. `columns[i][j]` is the
    /// value of integrand `i` at node `j`; non-finite entries count as zero.
    pub fn jackknife<G>(&self, columns: &[&[f64]], g: G) -> (f64, f64)
    where
        G: Fn(&[f64]) -> f64,
    {
        let m = columns.len();
        let term = |i: usize, j: usize| {
            let v = columns[i][j];
            if v.is_finite() {
                v * self.weights[j]
            } else {
                0.0
            }
        };
        let totals: Vec<f64> = (0..m)
            .map(|i| pairwise_sum(&(0..self.len()).map(|j| term(i, j)).collect::<Vec<_>>()))
            .collect();
        let value = g(&totals);
        if self.deterministic {
            return (value, 0.0);
        }
        let ns = self.n_strata.max(1);
        let nb = JACKKNIFE_BLOCKS;
        let mut cells = vec![0.0; ns * nb * m];
        for j in 0..self.len() {
            let c = (self.strata[j] as usize * nb + self.blocks[j] as usize) * m;
            for i in 0..m {
                cells[c + i] += term(i, j);
            }
        }
        let mut var = 0.0;
        let mut rep = vec![0.0; m];
        for s in 0..ns {
            let stratum: Vec<f64> = (0..m).map(|i| (0..nb).map(|b| cells[(s * nb + b) * m + i]).sum()).collect();
            let mut reps = Vec::with_capacity(nb);
            for b in 0..nb {
                for i in 0..m {
                    let cell = cells[(s * nb + b) * m + i];
                    rep[i] = totals[i] - stratum[i] + (stratum[i] - cell) * nb as f64 / (nb - 1) as f64;
                }
                reps.push(g(&rep));
            }
            let mean = reps.iter().sum::<f64>() / nb as f64;
            var += (nb - 1) as f64 / nb as f64 * reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>();
        }
        (value, var.sqrt())
    }

    /// Returns `(sum, variance, nonfinite count, per-stratum sums)`.
    fn accumulate(&self, values: &[f64]) -> (f64, f64, usize, Vec<f64>) {
        assert_eq!(values.len(), self.len());
        let mut bad = 0;
        let terms: Vec<f64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| {
                if v.is_finite() {
                    v * w
                } else {
                    bad += 1;
                    0.0
                }
            })
            .collect();
        if self.deterministic {
            return (pairwise_sum(&terms), 0.0, bad, vec![]);
        }
        let ns = self.n_strata.max(1);
        let mut members = vec![vec![Vec::new(); JACKKNIFE_BLOCKS]; ns];
        for ((t, s), b) in terms.iter().zip(&self.strata).zip(&self.blocks) {
            members[*s as usize][*b as usize].push(*t);
        }
        let cells: Vec<Vec<f64>> = members.iter().map(|row| row.iter().map(|m| pairwise_sum(m)).collect()).collect();
        let mut var = 0.0;
        let mut stratum_sums = Vec::with_capacity(ns);
        for c in &cells {
            let total = pairwise_sum(c);
            let mean = total / JACKKNIFE_BLOCKS as f64;
            let ss: f64 = c.iter().map(|x| (x - mean).powi(2)).sum();
            var += JACKKNIFE_BLOCKS as f64 / (JACKKNIFE_BLOCKS - 1) as f64 * ss;
            stratum_sums.push(total);
        }
        (pairwise_sum(&stratum_sums), var, bad, stratum_sums)
    }
}

/// Boundary layers are ordered from the core outwards and each one is half as
/// thick as the previous. A convergent integrand loses mass geometrically
/// along that sequence; a sustained ratio close to or above one means the
/// integral does not exist. The last layer is a catch-all and is ignored.
fn layers_diverge(layers: &[f64]) -> bool {
    if layers.len() < 5 {
        return false;
    }
    let inner = &layers[..layers.len() - 1];
    let tail = &inner[inner.len() - 3..];
    if tail.iter().any(|x| *x <= 0.0) {
        return false;
    }
    let ratios = [tail[1] / tail[0], tail[2] / tail[1]];
    (ratios[0] * ratios[1]).sqrt() > 0.95
}

/// Block id of draw `i` out of `n` in its stratum.
pub fn block_of(i: usize, n: usize) -> u32 {
    ((i * JACKKNIFE_BLOCKS) / n.max(1)) as u32
}

#[cfg(test)]
mod tests {
    use crate::geometry::Domain;
    use crate::quadrature::{sample_domain, QuadratureSpec};

    #[test]
    fn jackknife_of_linear_function_matches_block_variance() {
        let set = sample_domain(&Domain::disk(), &QuadratureSpec::stratified(4, 40_000, 1)).unwrap();
        let v: Vec<f64> = set.points.iter().map(|p| p.norm_sqr()).collect();
        let direct = set.estimate(&v, 1e-2);
        let (value, se) = set.jackknife(&[&v], |t| t[0]);
        assert!((value - direct.value).abs() < 1e-12);
        assert!((se / direct.std_error - 1.0).abs() < 1e-6, "{se} {}", direct.std_error);
    }

    #[test]
    fn ratio_of_identical_columns_is_exact() {
        let set = sample_domain(&Domain::disk(), &QuadratureSpec::uniform(10_000, 1)).unwrap();
        let v: Vec<f64> = set.points.iter().map(|p| 1.0 + p.norm()).collect();
        let (value, se) = set.jackknife(&[&v, &v], |t| t[0] / t[1]);
        assert_eq!(value, 1.0);
        assert_eq!(se, 0.0);
    }
}
