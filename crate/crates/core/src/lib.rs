//! Stability analysis of partitioned coupling schemes for a two-domain
//! one-dimensional diffusion problem.

pub mod error;
pub mod linalg;
pub mod params;
pub mod assembly;
pub mod spectral;
pub mod normalmode;
pub mod stepper;
pub mod sweep;
pub mod output;
pub mod config;
pub mod validate;

pub use error::{Error, Result};
pub use params::{DimensionlessParams, GridSpec, ParamVar, PhysicalParams};
