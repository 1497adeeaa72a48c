//! Monomial norms on egg domains.

use std::f64::consts::PI;
use std::io::Write;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainKind};

/// `||z1^a z2^b||^2` for `a, b <= max_degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormTable {
    pub m: u32,
    pub max_degree: usize,
    values: Vec<f64>,
}

impl NormTable {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * (self.max_degree + 1) + b]
    }

    /// Writes `a,b,norm2` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["a", "b", "norm2"]).map_err(io)?;
        for a in 0..=self.max_degree {
            for b in 0..=self.max_degree {
                w.write_record([a.to_string(), b.to_string(), format!("{:e}", self.get(a, b))]).map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `(pi^2 / ((a+1) m)) * Beta((b+1)/m, a+2)`.
pub fn monomial_norm(m: u32, a: usize, b: usize) -> f64 {
    let x = (b as f64 + 1.0) / m as f64;
    let y = a as f64 + 2.0;
    let ln_beta = ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y);
    PI * PI / ((a as f64 + 1.0) * m as f64) * ln_beta.exp()
}

pub fn basis_norms(domain: &Domain, max_degree: usize) -> Result<NormTable> {
    let DomainKind::Egg { m } = domain.kind() else {
        return Err(Error::Unsupported(format!("monomial norm table on {:?}", domain.kind())));
    };
    let n = max_degree + 1;
    let mut values = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            values.push(monomial_norm(m, a, b));
        }
    }
    Ok(NormTable { m, max_degree, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::factorial;

    #[test]
    fn constant_monomial_on_ball() {
        assert!((monomial_norm(1, 0, 0) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn m_one_matches_factorial_formula() {
        for a in 0..12 {
            for b in 0..12 {
                let exact = PI * PI * factorial(a) * factorial(b) / factorial(a + b + 2);
                assert!((monomial_norm(1, a, b) / exact - 1.0).abs() < 1e-11, "{a} {b}");
            }
        }
    }

    #[test]
    fn volume_of_egg_two() {
        // Beta(1/2, 2) = 4/3
        assert!((monomial_norm(2, 0, 0) - PI * PI / 2.0 * 4.0 / 3.0).abs() < 1e-12);
        assert!((monomial_norm(2, 0, 0) - Domain::egg(2).volume()).abs() < 1e-12);
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let t = basis_norms(&Domain::egg(2), 2).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("a,b,norm2\n"));
        assert_eq!(s.lines().count(), 10);
    }
}
