//! Model domains, quasi-metrics, quasi-balls and the probes that calibrate
//! the homogeneous-space constants.

pub mod domain;
pub mod frame;
pub mod metric;
pub mod probes;

pub use domain::{CPoint, Domain, DomainKind};
pub use frame::{polydisc_distance, polydisc_frame, polydisc_metric, PolydiscFrame, DELTA_MAX};
pub use metric::{
    ball_metric, boundary_distance, bounding_box, distance, quasi_distance, BallMetric, LocalBox, MetricKind,
    QuasiBall,
};
pub use probes::*;
