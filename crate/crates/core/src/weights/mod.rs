//! Weights, their duals, Békollè–Bonami and Muckenhoupt characteristics over
//! seeded ball families, and the regularizing operator.

pub mod characteristic;
pub mod family;
pub mod regularizer;
pub mod weight;

pub use characteristic::{
    ap_characteristic, ball_product, bp_characteristic, duality_identity_check, weight_doubling_probe, BpEstimate,
    BpOptions, DualityReport, PerBall,
};
pub use family::{ball_family, min_radius, FamilySpec};
pub use regularizer::{regularize, regularized_weight, Regularizer};
pub use weight::{dual_weight, Weight, WeightFamily, WeightSpec};
