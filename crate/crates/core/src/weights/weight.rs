//! Weights and their duals.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CPoint, Domain};

/// Weight description as it appears in configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightSpec {
    Constant { value: f64 },
    Power { t: f64 },
    Table { file: String },
}

/// Pointwise samples of a user-supplied weight, evaluated by nearest neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    pub points: Vec<CPoint>,
    pub values: Vec<f64>,
}

impl WeightTable {
    /// Reads rows `x1, y1, ..., xn, yn, value` (header optional).
    pub fn from_csv(path: &Path, dim: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let Ok(nums) = nums else {
                if i == 0 {
                    continue;
                }
                return Err(Error::Config(format!("{}: row {} is not numeric", path.display(), i + 1)));
            };
            if nums.len() != 2 * dim + 1 {
                return Err(Error::Config(format!(
                    "{}: row {} has {} columns, expected {}",
                    path.display(),
                    i + 1,
                    nums.len(),
                    2 * dim + 1
                )));
            }
            let v = nums[2 * dim];
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{}: row {} has non-positive weight", path.display(), i + 1)));
            }
            points.push(CPoint((0..dim).map(|k| Complex64::new(nums[2 * k], nums[2 * k + 1])).collect()));
            values.push(v);
        }
        if points.is_empty() {
            return Err(Error::Config(format!("{}: empty weight table", path.display())));
        }
        Ok(WeightTable { points, values })
    }

    pub fn eval(&self, z: &CPoint) -> f64 {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = p.sub(z).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        self.values[best]
    }
}

/// Radially tabulated weight `g(depth)` with log-depth interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialTable {
    pub log_depths: Vec<f64>,
    pub log_values: Vec<f64>,
}

impl RadialTable {
    pub fn eval(&self, depth: f64) -> f64 {
        let xs = &self.log_depths;
        let x = depth.max(1e-300).ln().clamp(xs[0], xs[xs.len() - 1]);
        let i = match xs.partition_point(|v| *v < x) {
            0 => 1,
            i if i >= xs.len() => xs.len() - 1,
            i => i,
        };
        let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        (self.log_values[i - 1] + t * (self.log_values[i] - self.log_values[i - 1])).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    Constant(f64),
    /// `scale * (-rho)^t`, which is `scale * (1 - |z|^2)^t` on the disk and ball.
    Power { t: f64, scale: f64 },
    Table(Arc<WeightTable>),
    /// `base^e`.
    PowerOf { base: Box<Weight>, e: f64 },
    /// `c * base`.
    Scaled { base: Box<Weight>, c: f64 },
    /// A radial weight on a ball-like domain given by a depth table.
    Radial { table: Arc<RadialTable>, label: String },
}

/// A positive weight with its exponent `p > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    pub domain: Domain,
    pub family: WeightFamily,
    pub p: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent p={p} must exceed 1")));
    }
    Ok(())
}

impl Weight {
    pub fn new(domain: &Domain, family: WeightFamily, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Weight { domain: domain.clone(), family, p })
    }

    pub fn constant(domain: &Domain, value: f64, p: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::InvalidArgument("constant weight must be positive".into()));
        }
        Self::new(domain, WeightFamily::Constant(value), p)
    }

    pub fn power(domain: &Domain, t: f64, p: f64) -> Result<Self> {
        Self::new(domain, WeightFamily::Power { t, scale: 1.0 }, p)
    }

    pub fn from_spec(domain: &Domain, spec: &WeightSpec, p: f64, base_dir: &Path) -> Result<Self> {
        match spec {
            WeightSpec::Constant { value } => Self::constant(domain, *value, p),
            WeightSpec::Power { t } => Self::power(domain, *t, p),
            WeightSpec::Table { file } => {
                let path = base_dir.join(file);
                let table = WeightTable::from_csv(&path, domain.dim())?;
                Self::new(domain, WeightFamily::Table(Arc::new(table)), p)
            }
        }
    }

    /// The dual exponent `p / (p - 1)`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, WeightFamily::Constant(_))
    }

    pub fn eval(&self, z: &CPoint) -> f64 {
        match &self.family {
            WeightFamily::Constant(c) => *c,
            WeightFamily::Power { t, scale } => scale * (-self.domain.rho(z)).powf(*t),
            WeightFamily::Table(tab) => tab.eval(z),
            WeightFamily::PowerOf { base, e } => base.eval(z).powf(*e),
            WeightFamily::Scaled { base, c } => c * base.eval(z),
            WeightFamily::Radial { table, .. } => table.eval(self.domain.depth(z)),
        }
    }

    /// `c * sigma` with the same exponent.
    pub fn scaled(&self, c: f64) -> Weight {
        let family = match &self.family {
            WeightFamily::Constant(v) => WeightFamily::Constant(c * v),
            WeightFamily::Power { t, scale } => WeightFamily::Power { t: *t, scale: c * scale },
            _ => WeightFamily::Scaled { base: Box::new(self.clone()), c },
        };
        Weight { domain: self.domain.clone(), family, p: self.p }
    }

    pub fn label(&self) -> String {
        match &self.family {
            WeightFamily::Constant(c) => format!("constant({c})"),
            WeightFamily::Power { t, scale } if *scale == 1.0 => format!("power({t})"),
            WeightFamily::Power { t, scale } => format!("{scale}*power({t})"),
            WeightFamily::Table(t) => format!("table({} points)", t.points.len()),
            WeightFamily::PowerOf { base, e } => format!("({})^{e}", base.label()),
            WeightFamily::Scaled { base, c } => format!("{c}*{}", base.label()),
            WeightFamily::Radial { label, .. } => label.clone(),
        }
    }
}

/// `sigma' = sigma^{-1/(p-1)}` with exponent `q = p/(p-1)`.
pub fn dual_weight(w: &Weight) -> Result<Weight> {
    check_p(w.p)?;
    let s = -1.0 / (w.p - 1.0);
    let family = match &w.family {
        WeightFamily::Constant(c) => WeightFamily::Constant(c.powf(s)),
        WeightFamily::Power { t, scale } => WeightFamily::Power { t: t * s, scale: scale.powf(s) },
        WeightFamily::PowerOf { base, e } => {
            let e2 = e * s;
            if (e2 - 1.0).abs() < 1e-12 {
                return Ok(Weight { p: w.q(), ..(**base).clone() });
            }
            WeightFamily::PowerOf { base: base.clone(), e: e2 }
        }
        _ => WeightFamily::PowerOf { base: Box::new(w.clone()), e: s },
    };
    Weight::new(&w.domain, family, w.q())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn dual_of_constant_is_constant() {
        let d = Domain::disk();
        let w = dual_weight(&Weight::constant(&d, 1.0, 3.0).unwrap()).unwrap();
        assert_eq!(w.family, WeightFamily::Constant(1.0));
        assert_eq!(w.p, 1.5);
    }

    #[test]
    fn dual_of_power_weight() {
        let d = Domain::disk();
        let w = dual_weight(&Weight::power(&d, 0.5, 2.0).unwrap()).unwrap();
        assert_eq!(w.family, WeightFamily::Power { t: -0.5, scale: 1.0 });
        assert_eq!(w.p, 2.0);
    }

    #[test]
    fn dual_is_an_involution() {
        let d = Domain::ball(2);
        let mut rng = stream(2, 0);
        let tab = WeightTable {
            points: (0..20).map(|_| d.sample_uniform(&mut rng, 100).unwrap()).collect(),
            values: (1..=20).map(|v| v as f64).collect(),
        };
        for w in [
            Weight::power(&d, 0.7, 3.0).unwrap(),
            Weight::new(&d, WeightFamily::Table(Arc::new(tab)), 1.7).unwrap(),
        ] {
            let dd = dual_weight(&dual_weight(&w).unwrap()).unwrap();
            assert!((dd.p - w.p).abs() < 1e-12);
            for _ in 0..1000 {
                let z = d.sample_uniform(&mut rng, 100).unwrap();
                assert!((dd.eval(&z) / w.eval(&z) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn p_must_exceed_one() {
        assert!(Weight::power(&Domain::disk(), 0.5, 1.0).is_err());
    }

    #[test]
    fn table_reads_csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        std::fs::write(&path, "x,y,value\n0.0,0.0,2.0\n0.5,0.0,3.0\n").unwrap();
        let t = WeightTable::from_csv(&path, 1).unwrap();
        assert_eq!(t.eval(&CPoint::c1(0.4, 0.1)), 3.0);
        assert_eq!(t.eval(&CPoint::c1(-0.1, 0.0)), 2.0);
    }

    #[test]
    fn scaling_is_linear() {
        let d = Domain::disk();
        let w = Weight::power(&d, 0.5, 2.0).unwrap();
        let z = CPoint::c1(0.3, 0.4);
        assert!((w.scaled(2.0).eval(&z) - 2.0 * w.eval(&z)).abs() < 1e-15);
    }
}
