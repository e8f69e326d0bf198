//! Discrete-time simulator for Q(lambda)-based multi-hop routing in UAV relay networks.

pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod io;
pub mod link;
pub mod mobility;
pub mod model;
pub mod neighbor;
pub mod routing;
pub mod sim;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use model::{NodeId, Position};
pub use experiment::{preset, ExperimentPreset};
