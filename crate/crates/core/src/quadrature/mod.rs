//! Integration engine: Monte Carlo over whole domains and quasi-balls with
//! jackknife error bars, boundary-layer stratification, and deterministic
//! polar rules on the disk and the ball.

pub mod ball;
pub mod gauss;
pub mod points;
pub mod polar;
pub mod sample;
pub mod spec;

pub use ball::{integrate_ball, integrate_ball_with, sample_ball, BallOptions};
pub use gauss::{gauss_legendre, Rule1d};
pub use polar::{DiskRegion, Focus};
pub use points::{IntegralEstimate, PointSet};
pub use sample::{integrate, integrate_complex, sample_domain};
pub use spec::{QuadratureSpec, Strategy};
