//! Numerical laboratory for weighted `L^p` theory of the Bergman projection on
//! model pseudoconvex domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`] integrates over domains and quasi-balls with error bars.
//! * [`geometry`] holds the model domains, their quasi-metrics and the probes
//!   that calibrate the constants of the space of homogeneous type.
//! * [`kernels`] evaluates Bergman kernels and tests their size/smoothness
//!   estimates.
//! * [`weights`] computes Békollè–Bonami and Muckenhoupt characteristics and the
//!   regularizing operator.
//! * [`operators`] implements the projection, the positive operator, the
//!   boundary-touching maximal function, and the experiments built on them.
//! * [`harness`] parses experiment configs and writes reports.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod operators;
pub mod quadrature;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{CPoint, Domain, DomainKind, QuasiBall};
pub use num_complex::Complex64;
