use serde::{Deserialize, Serialize};

/// One row of `metrics.csv`. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: u64,
    /// Mean reward over the routing decisions of this episode.
    pub reward: f64,
    pub cumulative_reward: f64,
    pub decisions: u64,
    /// Decisions taken with no feasible next hop.
    pub empty_decisions: u64,
    pub total_residual_j: f64,
    /// Data packets that reached the ground station this episode.
    pub l3_delivered: u64,
    pub cumulative_l3_delivered: u64,
    pub pac_tx_l2: u64,
    pub ack_l2: u64,
    pub pac_tx_l3: u64,
    pub ack_l3: u64,
    pub generated: u64,
    pub dropped: u64,
    pub queued: u64,
    pub hellos: u64,
    pub active_nodes: u64,
    pub charging_nodes: u64,
    pub fragmented: bool,
}

/// One row of `events.csv`. Hello rows fill the hello columns in message
/// field order; other rows leave them empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub slot: u64,
    pub kind: String,
    pub node: u32,
    pub peer: Option<u32>,
    pub packet: Option<u64>,
    pub value: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub h: Option<f64>,
    pub residual_j: Option<f64>,
    pub prs_l2: Option<f64>,
    pub prs_l3: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub q_value: Option<f64>,
    pub issued_at: Option<u64>,
    pub next_hello_at: Option<u64>,
}

impl EventRow {
    pub fn new(slot: u64, kind: &str, node: u32) -> Self {
        Self {
            slot,
            kind: kind.to_string(),
            node,
            peer: None,
            packet: None,
            value: None,
            x: None,
            y: None,
            h: None,
            residual_j: None,
            prs_l2: None,
            prs_l3: None,
            beta: None,
            gamma: None,
            q_value: None,
            issued_at: None,
            next_hello_at: None,
        }
    }

    pub fn peer(mut self, p: u32) -> Self {
        self.peer = Some(p);
        self
    }

    pub fn packet(mut self, p: u64) -> Self {
        self.packet = Some(p);
        self
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }
}
