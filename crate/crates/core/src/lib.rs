//! Time-causal and time-recursive spatio-temporal receptive fields.
//!
//! The temporal axis is smoothed by cascades of first-order integrators
//! (truncated exponential kernels in continuous time, first-order recursive
//! filters in discrete time). The spatial axes are smoothed with the discrete
//! analogue of the Gaussian. Derivative approximations come from plain
//! difference stencils on top of the smoothed representation.
//!
//! Module map:
//!
//! - [`scale_distribution`]: placement of the temporal scale levels.
//! - [`temporal_kernels`]: continuous cascade kernels, moments, Laplace transform.
//! - [`delay_analysis`]: mean and mode delays, delay tables, step response delay.
//! - [`discrete_temporal`]: recursive filter cascades over sampled time.
//! - [`discrete_spatial`]: discrete Gaussian smoothing and spatial stencils.
//! - [`engine`]: frame-by-frame separable and velocity-adapted pipelines.
//! - [`receptive_field`]: receptive field specifications, presets, kernel sampling.

pub mod delay_analysis;
pub mod discrete_spatial;
pub mod discrete_temporal;
pub mod engine;
mod error;
mod frame;
pub mod receptive_field;
pub mod scale_distribution;
pub mod temporal_kernels;
pub mod warp;

pub use error::{Error, Result};
pub use frame::Frame;
