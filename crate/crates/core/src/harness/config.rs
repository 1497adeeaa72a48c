//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainKind};
use crate::kernels::{KernelEvaluator, KernelMode};
use crate::quadrature::QuadratureSpec;
use crate::weights::{Weight, WeightSpec};

/// Experiment-specific knobs. Every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Separation constant of the smoothness estimate and the two-ball lemma.
    pub c2: f64,
    /// Boundary-proximity factor of the kernel lower bound.
    pub kappa: f64,
    /// Small-radius threshold of the kernel lower bound.
    pub eps0: f64,
    pub k_values: Vec<f64>,
    pub radii: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub n_pairs: usize,
    pub n_instances: usize,
    pub bundle_size: usize,
    /// Center (on the positive real axis of `z_1`) and radius of the ball
    /// whose indicator drives the good-λ experiment.
    pub indicator_center: f64,
    pub indicator_radius: f64,
    /// Centers per radius of the ball families.
    pub family_centers: usize,
    /// Radius-grid exponents `2^-lo ..= 2^-hi` of the ball families.
    pub family_radii: (i32, i32),
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            c2: 4.0,
            kappa: 0.5,
            eps0: 0.5,
            k_values: vec![0.05, 0.1],
            radii: (3..=7).map(|j| 0.5f64.powi(j)).collect(),
            gamma_grid: vec![10.0, 3.0, 1.0, 0.3, 0.1, 0.03, 0.01],
            lambda_grid: vec![0.02, 0.05, 0.1, 0.2, 0.4],
            n_pairs: 1000,
            n_instances: 200,
            bundle_size: 20,
            indicator_center: 0.9,
            indicator_radius: 0.1,
            family_centers: 8,
            family_radii: (2, 7),
        }
    }
}

fn default_p() -> f64 {
    2.0
}

fn default_domain() -> DomainKind {
    DomainKind::UnitDisk
}

fn default_weight() -> WeightSpec {
    WeightSpec::Power { t: 0.5 }
}

fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec::polar(64, 64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_domain")]
    pub domain: DomainKind,
    #[serde(default = "default_weight")]
    pub weight: WeightSpec,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Closed form where available, truncated basis otherwise.
    #[serde(default)]
    pub kernel: Option<KernelMode>,
    #[serde(default = "default_quadrature")]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Directory against which relative paths (weight tables) resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// The disk reference configuration.
    pub fn reference(seed: u64) -> Self {
        ExperimentConfig {
            seed,
            domain: default_domain(),
            weight: default_weight(),
            p: default_p(),
            kernel: None,
            quadrature: default_quadrature(),
            knobs: Knobs::default(),
            output: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.domain_value().map_err(cfg)?;
        self.quadrature.validate().map_err(cfg)?;
        self.weight_value().map_err(cfg)?;
        self.evaluator().map_err(cfg)?;
        let k = &self.knobs;
        let positive = |name: &str, v: &[f64]| {
            if v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Config(format!("knobs.{name} must be a nonempty list of positive numbers")));
            }
            Ok(())
        };
        positive("k_values", &k.k_values)?;
        positive("radii", &k.radii)?;
        positive("gamma_grid", &k.gamma_grid)?;
        positive("lambda_grid", &k.lambda_grid)?;
        if k.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("knobs.radii must be decreasing".into()));
        }
        if !(k.c2 > 0.0 && k.kappa > 0.0 && k.eps0 > 0.0) {
            return Err(Error::Config("knobs.c2, kappa and eps0 must be positive".into()));
        }
        if k.n_pairs == 0 || k.n_instances == 0 || k.bundle_size == 0 || k.family_centers == 0 {
            return Err(Error::Config("knobs counts must be positive".into()));
        }
        if k.family_radii.0 > k.family_radii.1 {
            return Err(Error::Config("knobs.family_radii must be (lo, hi) with lo <= hi".into()));
        }
        if !(k.indicator_radius > 0.0 && k.indicator_center.abs() < 1.0) {
            return Err(Error::Config("indicator ball must have an interior center and positive radius".into()));
        }
        Ok(())
    }

    pub fn domain_value(&self) -> Result<Domain> {
        Domain::new(self.domain)
    }

    pub fn weight_value(&self) -> Result<Weight> {
        Weight::from_spec(&self.domain_value()?, &self.weight, self.p, &self.base_dir)
    }

    pub fn evaluator(&self) -> Result<KernelEvaluator> {
        let d = self.domain_value()?;
        match self.kernel {
            Some(mode) => KernelEvaluator::new(&d, mode),
            None => KernelEvaluator::for_domain(&d),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_toml("seed = 3\n", Path::new(".")).unwrap();
        assert_eq!(cfg.knobs, Knobs::default());
        assert_eq!(cfg.domain, DomainKind::UnitDisk);
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
            seed = 1
            p = 3.0
            domain = { kind = "unit_ball", n = 2 }
            weight = { type = "power", t = -0.5 }
            kernel = { mode = "closed_form" }
            quadrature = { strategy = { kind = "boundary_stratified", layers = 6 }, n_samples = 10000, rel_tolerance = 0.05, seed = 9 }
            [knobs]
            c2 = 8.0
            radii = [0.25, 0.125]
        "#;
        let cfg = ExperimentConfig::from_toml(text, Path::new(".")).unwrap();
        assert_eq!(cfg.domain, DomainKind::UnitBall { n: 2 });
        assert_eq!(cfg.knobs.c2, 8.0);
        assert_eq!(cfg.knobs.k_values, vec![0.05, 0.1]);
    }

    #[test]
    fn malformed_configs_are_config_errors() {
        for text in [
            "p = 2.0\n",
            "seed = 1\np = 0.5\n",
            "seed = 1\nunknown = 3\n",
            "seed = 1\n[knobs]\nradii = [0.1, 0.2]\n",
            "seed = 1\ndomain = { kind = \"egg\", m = 2 }\nkernel = { mode = \"closed_form\" }\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text, Path::new(".")), Err(Error::Config(_))), "{text}");
        }
    }
}
