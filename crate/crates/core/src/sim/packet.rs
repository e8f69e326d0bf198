use serde::{Deserialize, Serialize};

use crate::model::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketKind {
    Data,
    AckL2,
    AckL3,
    Hello,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub source: NodeId,
    pub created_at: u64,
    /// Nodes visited so far, source first.
    pub trail: Vec<NodeId>,
    pub size_bytes: u32,
    pub kind: PacketKind,
    /// Forwarding attempts across all hops, including ones that found no next hop.
    pub attempts: u32,
    /// Whether the current holder has already counted this packet as sent.
    pub counted_by_holder: bool,
}

impl Packet {
    pub fn data(id: u64, source: NodeId, created_at: u64, size_bytes: u32) -> Self {
        Self {
            id,
            source,
            created_at,
            trail: vec![source],
            size_bytes,
            kind: PacketKind::Data,
            attempts: 0,
            counted_by_holder: false,
        }
    }

    pub fn bits(&self) -> f64 {
        self.size_bytes as f64 * 8.0
    }

    pub fn holder(&self) -> NodeId {
        *self.trail.last().expect("trail starts with the source")
    }

    pub fn visited(&self, id: NodeId) -> bool {
        self.trail.contains(&id)
    }

    pub fn trail_is_acyclic(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.trail.iter().all(|n| seen.insert(*n))
    }
}
