//! Discrete-time orchestration: traffic, hop delivery, scenarios and metrics.

mod engine;
mod metrics;
mod packet;
mod rng;
mod scenario;
mod traffic;

pub use engine::{
    deliver_hop, run_episode, EnergySpent, run_simulation, run_simulation_full, DecisionAudit, RunOutput, UavState, World,
};
pub use metrics::{EpisodeMetrics, EventRow};
pub use packet::{Packet, PacketKind};
pub use rng::{stream, Stream};
pub use scenario::{inject_fragmentation, ScenarioSpec, ScenarioState};
pub use traffic::{generate_traffic, TrafficGenerator};
