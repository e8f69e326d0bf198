use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::{Rejoin, ScenarioKind, Selection, SimConfig};
use crate::model::NodeId;

use super::engine::World;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub selection: Selection,
    pub fraction: f64,
    pub start_slot: u64,
    pub duration_slots: u64,
    pub rejoin: Rejoin,
    pub rejoin_window_slots: u64,
    pub rejoin_batches: u32,
    pub depletion_level_j: f64,
}

impl ScenarioSpec {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            kind: cfg.scenario,
            selection: cfg.selection,
            fraction: cfg.scenario_fraction,
            start_slot: cfg.ms_to_slots(cfg.scenario_start_ms),
            duration_slots: cfg.ms_to_slots(cfg.scenario_duration_ms).max(1),
            rejoin: cfg.rejoin,
            rejoin_window_slots: cfg.ms_to_slots(cfg.rejoin_window_ms),
            rejoin_batches: cfg.rejoin_batches.max(1),
            depletion_level_j: cfg.depletion_level_j,
        }
    }

    pub fn end_slot(&self) -> u64 {
        self.start_slot + self.duration_slots
    }

    /// Slot offsets (from the end of the window) at which each batch rejoins.
    pub fn rejoin_offsets(&self) -> Vec<u64> {
        match self.rejoin {
            Rejoin::AllAtOnce => vec![0],
            Rejoin::Staggered => {
                let b = self.rejoin_batches as u64;
                (0..b).map(|i| i * self.rejoin_window_slots / b).collect()
            }
        }
    }
}

/// Runtime bookkeeping of an injected scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioState {
    pub selected: Vec<NodeId>,
    /// `(slot, nodes)` rejoin events still pending.
    pub pending_rejoins: Vec<(u64, Vec<NodeId>)>,
    pub started: bool,
}

/// Number of nodes a fraction selects out of `n`.
pub fn selection_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).min(n)
}

/// Picks nodes from `(id, max outgoing Q)` pairs.
pub fn select_nodes<R: Rng + ?Sized>(
    selection: Selection,
    fraction: f64,
    eligible: &[(NodeId, f64)],
    rng: &mut R,
) -> Vec<NodeId> {
    let k = selection_count(fraction, eligible.len());
    let mut pool: Vec<(NodeId, f64)> = eligible.to_vec();
    match selection {
        Selection::Random => {
            pool.shuffle(rng);
        }
        Selection::TopQ => pool.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))),
        Selection::BottomQ => pool.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))),
    }
    pool.into_iter().take(k).map(|(id, _)| id).collect()
}

/// Takes the configured share of nodes out of the network and schedules their return.
pub fn inject_fragmentation(world: &mut World, spec: &ScenarioSpec) -> Vec<NodeId> {
    world.inject_fragmentation(spec)
}
