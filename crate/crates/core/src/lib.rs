//! Rate maximization for a downlink where a multi-antenna base station
//! compresses traffic semantically and the user receives through a fluid
//! antenna with selectable ports.
//!
//! The crate covers the near-field channel model ([`model`]), the
//! computation-load model of semantic compression ([`semantic`]), the joint
//! covariance/compression-ratio solver ([`fractional`]), port selection
//! ([`ports`]) and the experiment harness with its baselines
//! ([`experiments`]).

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod fractional;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod parallel;
pub mod ports;
pub mod seeds;
pub mod semantic;

pub use config::{PathDiffMode, PathGainModel, SystemConfig};
pub use error::{Error, Result};
pub use parallel::Execution;
pub use semantic::{LoadModel, LoadSegment, SegmentIndicator};
