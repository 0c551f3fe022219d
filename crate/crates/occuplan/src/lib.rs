//! Continuous occupancy mapping and safe path planning.
//!
//! The toolkit builds continuous occupancy maps from labeled range
//! observations (random Fourier features + logistic regression), represents
//! paths as Gaussian processes over `t ∈ [0, 1]`, and optimises them with a
//! stochastic functional-gradient planner that samples random times along
//! the curve instead of committing to a fixed support resolution.
//!
//! Modules:
//! - [`occupancy`]: feature maps, model training, occupancy and gradient queries.
//! - [`gp_path`]: vector-valued GP path with growing support.
//! - [`planner`]: the stochastic functional-gradient planner.
//! - [`baselines`]: distance cost fields, fixed-support descent, RRT* and PRM*.
//! - [`worlds`]: simulated environments, dataset synthesis, laser-log parsing.
//! - [`scenarios`]: the canonical benchmark world shipped with the crate.

pub mod baselines;
pub mod error;
pub mod gp_path;
pub mod occupancy;
pub mod planner;
pub mod scenarios;
pub mod worlds;

pub use error::{Error, Result};
