//! Quadrature configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    UniformRejection,
    BoundaryStratified { layers: usize },
    PolarGauss { radial: usize, angular: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub strategy: Strategy,
    pub n_samples: usize,
    pub rel_tolerance: f64,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn uniform(n_samples: usize, seed: u64) -> Self {
        QuadratureSpec { strategy: Strategy::UniformRejection, n_samples, rel_tolerance: 1e-2, seed }
    }

    pub fn stratified(layers: usize, n_samples: usize, seed: u64) -> Self {
        QuadratureSpec { strategy: Strategy::BoundaryStratified { layers }, n_samples, rel_tolerance: 1e-2, seed }
    }

    pub fn polar(radial: usize, angular: usize) -> Self {
        QuadratureSpec { strategy: Strategy::PolarGauss { radial, angular }, n_samples: 1, rel_tolerance: 1e-6, seed: 0 }
    }

    pub fn with_tolerance(mut self, rel_tolerance: f64) -> Self {
        self.rel_tolerance = rel_tolerance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n_samples: usize) -> Self {
        self.n_samples = n_samples;
        self
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.strategy, Strategy::PolarGauss { .. })
    }

    /// The same rule with twice the nodes (or samples).
    pub fn refined(&self) -> Self {
        let mut s = *self;
        match &mut s.strategy {
            Strategy::PolarGauss { radial, angular } => {
                *radial *= 2;
                *angular *= 2;
            }
            _ => s.n_samples *= 2,
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::InvalidArgument("rel_tolerance must be positive".into()));
        }
        match self.strategy {
            Strategy::BoundaryStratified { layers } if layers < 1 => {
                Err(Error::InvalidArgument("layer count must be at least 1".into()))
            }
            Strategy::PolarGauss { radial, angular } if radial < 1 || angular < 1 => {
                Err(Error::InvalidArgument("polar rule needs at least one node per direction".into()))
            }
            _ => Ok(()),
        }
    }

    /// Gauss order per panel for graded composite rules.
    pub fn panel_order(&self) -> usize {
        match self.strategy {
            Strategy::PolarGauss { radial, .. } => (radial / 8).clamp(4, 48),
            _ => 8,
        }
    }
}
