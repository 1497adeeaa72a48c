//! Bergman kernels of the model domains and statistical checks of their
//! size, smoothness and lower-bound estimates.

pub mod basis;
pub mod eval;
pub mod probes;

pub use basis::{basis_norms, monomial_norm, NormTable};
pub use eval::{KernelEvaluator, KernelMode, DEFAULT_MAX_DEGREE};
pub use probes::{
    boundary_size_probe, derivative_probe, lower_bound_probe, separated_pairs, size_probe, smoothness_probe,
    DerivativeReport, EstimateFit, PairSampler,
};
