//! Hello exchange, candidate sector filtering, neighbor tables and
//! LST-adaptive hello scheduling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{NodeId, Position};

/// Broadcast state of one node. Field order is the column order of hello
/// rows in the events trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelloMessage {
    pub origin: NodeId,
    pub location: Position,
    /// Joules.
    pub residual_j: f64,
    /// Layer-2 acknowledgement ratio in `[0, 1]`.
    pub prs_l2: f64,
    /// Layer-3 acknowledgement ratio in `[0, 1]`.
    pub prs_l3: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Sender's maximum outgoing Q-value.
    pub q_value: f64,
    pub issued_at: u64,
    /// Slot of the sender's next scheduled hello.
    pub next_hello_at: u64,
}

impl HelloMessage {
    /// Packet-reception score in `[0, 2]`.
    pub fn prs(&self) -> f64 {
        self.prs_l2 + self.prs_l3
    }

    pub fn is_well_formed(&self) -> bool {
        [
            self.location.x,
            self.location.y,
            self.location.h,
            self.residual_j,
            self.prs_l2,
            self.prs_l3,
            self.beta,
            self.gamma,
            self.q_value,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborRecord {
    pub hello: HelloMessage,
    pub expires_at: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborTable {
    records: BTreeMap<NodeId, NeighborRecord>,
    /// Slot of this node's next hello.
    pub next_hello_at: u64,
}

impl NeighborTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<&NeighborRecord> {
        self.records.get(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.records.contains_key(&id)
    }

    /// Candidate set, in ascending id order.
    pub fn candidates(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.records.keys().copied()
    }

    pub fn records(&self) -> impl Iterator<Item = &NeighborRecord> {
        self.records.values()
    }

    pub fn remove(&mut self, id: NodeId) -> Option<NeighborRecord> {
        self.records.remove(&id)
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }

    /// Drops records whose stored location has left the sector of `src`.
    pub fn retain_sector(&mut self, src: &Position, dst: &Position, tx_radius: f64) {
        self.records
            .retain(|_, r| in_candidate_sector(src, dst, &r.hello.location, tx_radius));
    }
}

/// True when `cand` is within `tx_radius` of `src` and on the
/// destination-facing side of the plane through `src` normal to the
/// source-destination axis.
pub fn in_candidate_sector(src: &Position, dst: &Position, cand: &Position, tx_radius: f64) -> bool {
    let to_cand = cand.sub(src);
    let axis = dst.sub(src);
    let r = dot(&to_cand, &to_cand).sqrt();
    if r > tx_radius * (1.0 + 1e-12) {
        return false;
    }
    dot(&to_cand, &axis) >= -1e-12 * r * dot(&axis, &axis).sqrt()
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Applies a received hello. An in-sector sender is added or refreshed; a
/// sender now outside the sector loses any record it had.
pub fn process_hello(
    table: &mut NeighborTable,
    msg: &HelloMessage,
    src: &Position,
    dst: &Position,
    tx_radius: f64,
    expiry_slots: u64,
) {
    if !msg.is_well_formed() {
        return;
    }
    if in_candidate_sector(src, dst, &msg.location, tx_radius) {
        let expires_at = msg.issued_at.max(msg.next_hello_at) + expiry_slots.max(1);
        table.records.insert(msg.origin, NeighborRecord { hello: *msg, expires_at });
    } else {
        table.records.remove(&msg.origin);
    }
}

/// Removes every record with `expires_at <= now`. Returns the removed ids.
pub fn expire_records(table: &mut NeighborTable, now: u64) -> Vec<NodeId> {
    let stale: Vec<NodeId> = table
        .records
        .iter()
        .filter(|(_, r)| r.expires_at <= now)
        .map(|(id, _)| *id)
        .collect();
    for id in &stale {
        table.records.remove(id);
    }
    stale
}

/// Node-level sustenance time: the most urgent pairwise prediction.
pub fn reduce_lst<I: IntoIterator<Item = Option<f64>>>(pairs: I) -> Option<f64> {
    pairs.into_iter().flatten().fold(None, |acc: Option<f64>, t| {
        Some(acc.map_or(t, |a| a.min(t)))
    })
}

/// Slot of the next hello: `now + t_lst`, at least one slot ahead.
pub fn schedule_next_hello(t_lst: Option<f64>, now: u64, slot_s: f64) -> u64 {
    match t_lst {
        Some(t) if t.is_finite() => {
            let slots = (t / slot_s - 1e-9).ceil();
            now + (slots.clamp(1.0, u32::MAX as f64) as u64)
        }
        Some(_) => now + u32::MAX as u64,
        None => now + 1,
    }
}
