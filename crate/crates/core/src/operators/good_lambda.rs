//! The good-λ experiment: `sigma({P+f > 2λ, Mf <= γλ}) / sigma({P+f > λ})`
//! on sampled level sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::maximal::{DictionarySpec, MaximalDictionary, MaximalFunction};
use super::projection::Projector;
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::CPoint;
use crate::kernels::KernelEvaluator;
use crate::quadrature::{sample_domain, QuadratureSpec};
use crate::weights::Weight;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodLambdaSpec {
    /// Sample of the domain on which the level sets are measured.
    pub sample: QuadratureSpec,
    /// Rule for `P+f` at each sample point.
    pub projection: QuadratureSpec,
    pub dictionary: DictionarySpec,
    /// Homogeneity exponent of the space, for the `1/m` comparison.
    pub m_used: f64,
}

impl Default for GoodLambdaSpec {
    fn default() -> Self {
        GoodLambdaSpec {
            sample: QuadratureSpec::stratified(8, 4096, 0),
            projection: QuadratureSpec::polar(32, 64),
            dictionary: DictionarySpec::default(),
            m_used: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioCell {
    pub ratio: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodLambdaReport {
    pub gamma_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// `ratio_table[i][j]` for `gamma_grid[i]`, `lambda_grid[j]`; `None` when
    /// `{P+f > λ}` is empty.
    pub ratio_table: Vec<Vec<Option<RatioCell>>>,
    /// Slope of `log(mean over λ of the ratio)` against `log γ`; NaN with
    /// fewer than two positive rows.
    pub fitted_exponent: f64,
    /// Smallest `C` with `ratio <= C γ^δ` on every defined cell.
    pub fitted_c: f64,
    pub m_used: f64,
    pub target_exponent: f64,
    pub n_points: usize,
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() || g.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument(format!("{name} grid must be nonempty and positive")));
    }
    Ok(())
}

pub fn good_lambda_experiment(
    ev: &KernelEvaluator,
    f: &TestFunction,
    sigma: &Weight,
    gamma_grid: &[f64],
    lambda_grid: &[f64],
    spec: &GoodLambdaSpec,
) -> Result<GoodLambdaReport> {
    check_grid("gamma", gamma_grid)?;
    check_grid("lambda", lambda_grid)?;
    let domain = ev.domain();
    let set = sample_domain(domain, &spec.sample)?;
    let fv: Vec<_> = set.evaluate(|z| f.eval(z));
    if fv.iter().any(|v| v.re < 0.0 || v.im != 0.0) {
        return Err(Error::InvalidArgument("good-λ experiment needs f >= 0".into()));
    }
    let proj = Projector::new(ev.clone(), spec.projection)?;
    let single = std::slice::from_ref(f);
    let pplus: Vec<f64> = set
        .points
        .par_iter()
        .map(|z| Ok(proj.bundle(single, z)?.positive[0]))
        .collect::<Result<Vec<_>>>()?;
    let dict = MaximalDictionary::new(domain, &spec.dictionary)?;
    let mf = MaximalFunction::new(&dict, |w: &CPoint| f.eval(w).norm()).eval_many(&set.points)?;
    let sig: Vec<f64> = set.evaluate(|z| sigma.eval(z));

    let mut table = Vec::with_capacity(gamma_grid.len());
    for g in gamma_grid {
        let row = lambda_grid
            .iter()
            .map(|l| {
                let den: Vec<f64> = pplus.iter().zip(&sig).map(|(p, s)| if *p > *l { *s } else { 0.0 }).collect();
                if den.iter().all(|x| *x == 0.0) {
                    return None;
                }
                let num: Vec<f64> = pplus
                    .iter()
                    .zip(&mf)
                    .zip(&sig)
                    .map(|((p, m), s)| if *p > 2.0 * l && *m <= g * l { *s } else { 0.0 })
                    .collect();
                let (ratio, std_error) = set.jackknife(&[&num, &den], |t| t[0] / t[1]);
                Some(RatioCell { ratio, std_error })
            })
            .collect::<Vec<_>>();
        table.push(row);
    }

    let (x, y): (Vec<f64>, Vec<f64>) = gamma_grid
        .iter()
        .zip(&table)
        .filter_map(|(g, row)| {
            let cells: Vec<f64> = row.iter().flatten().map(|c| c.ratio).collect();
            let mean = cells.iter().sum::<f64>() / cells.len().max(1) as f64;
            (!cells.is_empty() && mean > 0.0).then(|| (g.ln(), mean.ln()))
        })
        .unzip();
    let fitted_exponent = if x.len() >= 2 { slope(&x, &y) } else { f64::NAN };
    let fitted_c = if fitted_exponent.is_finite() {
        gamma_grid
            .iter()
            .zip(&table)
            .flat_map(|(g, row)| row.iter().flatten().map(move |c| c.ratio / g.powf(fitted_exponent)))
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    Ok(GoodLambdaReport {
        gamma_grid: gamma_grid.to_vec(),
        lambda_grid: lambda_grid.to_vec(),
        ratio_table: table,
        fitted_exponent,
        fitted_c,
        m_used: spec.m_used,
        target_exponent: 1.0 / spec.m_used,
        n_points: set.len(),
    })
}

/// Least-squares slope.
pub(crate) fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, QuasiBall};

    fn quick() -> GoodLambdaSpec {
        GoodLambdaSpec {
            sample: QuadratureSpec::stratified(4, 512, 3),
            dictionary: DictionarySpec { levels: 5, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn zero_function_is_undefined_everywhere() {
        let d = Domain::disk();
        let ev = KernelEvaluator::for_domain(&d).unwrap();
        let sigma = Weight::power(&d, 0.5, 2.0).unwrap();
        let r = good_lambda_experiment(&ev, &TestFunction::zero(), &sigma, &[1.0, 0.1], &[0.1], &quick()).unwrap();
        assert!(r.ratio_table.iter().flatten().all(|c| c.is_none()));
        assert!(r.fitted_exponent.is_nan());
    }

    #[test]
    fn monotone_in_gamma() {
        let d = Domain::disk();
        let ev = KernelEvaluator::for_domain(&d).unwrap();
        let sigma = Weight::power(&d, 0.5, 2.0).unwrap();
        let f = TestFunction::indicator(&d, QuasiBall::new(&d, CPoint::c1(0.9, 0.0), 0.1).unwrap());
        let gammas = [10.0, 1.0, 0.1, 0.01];
        let r = good_lambda_experiment(&ev, &f, &sigma, &gammas, &[0.05, 0.2], &quick()).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = r.ratio_table.iter().map(|row| row[j].unwrap().ratio).collect();
            assert!(col.windows(2).all(|w| w[1] <= w[0]), "{col:?}");
            assert!(col[0] <= 1.0);
        }
        assert!(TestFunction::AntiHolo(vec![1]).eval(&CPoint::c1(0.1, 0.1)).im != 0.0);
        assert!(good_lambda_experiment(&ev, &TestFunction::AntiHolo(vec![1]), &sigma, &[1.0], &[0.1], &quick()).is_err());
    }
}
