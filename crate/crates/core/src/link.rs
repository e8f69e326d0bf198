//! Collision probability, packet-reception status and link sustenance time.

use serde::{Deserialize, Serialize};

use crate::config::CollisionVariant;

/// Cumulative transmission and acknowledgement counts of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketCounters {
    pub pac_tx_l2: u64,
    pub pac_tx_l3: u64,
    pub ack_l2: u64,
    pub ack_l3: u64,
}

impl PacketCounters {
    pub fn l2_ratio(&self) -> f64 {
        ratio(self.ack_l2, self.pac_tx_l2)
    }

    pub fn l3_ratio(&self) -> f64 {
        ratio(self.ack_l3, self.pac_tx_l3)
    }

    pub fn is_consistent(&self) -> bool {
        self.ack_l2 <= self.pac_tx_l2 && self.ack_l3 <= self.pac_tx_l3
    }
}

fn ratio(acks: u64, sent: u64) -> f64 {
    if sent == 0 {
        0.0
    } else {
        acks as f64 / sent as f64
    }
}

/// `ack_l2/pac_tx_l2 + ack_l3/pac_tx_l3`, a score in `[0, 2]`.
pub fn packet_reception_status(c: &PacketCounters) -> f64 {
    c.l2_ratio() + c.l3_ratio()
}

pub fn collision_probability(r: f64, xi_x: f64, xi_y: f64, variant: CollisionVariant) -> f64 {
    let tail = (-(r * r) / (2.0 * xi_x * xi_y)).exp();
    match variant {
        CollisionVariant::Literal => 1.0 - tail,
        CollisionVariant::Complement => tail,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Receding,
    Approaching,
    Equidistant,
}

/// Classifies a pair from its separation at two consecutive slots.
pub fn classify_relation(prev: f64, now: f64) -> Relation {
    let eps = 1e-9 * prev.abs().max(now.abs()).max(1.0);
    if now > prev + eps {
        Relation::Receding
    } else if now < prev - eps {
        Relation::Approaching
    } else {
        Relation::Equidistant
    }
}

/// Predicted remaining lifetime of a link in seconds, or `None` when no
/// prediction applies.
pub fn link_sustenance_time(d: f64, s_i: f64, s_j: f64, relation: Relation, tx_radius: f64) -> Option<f64> {
    match relation {
        Relation::Receding => {
            let closing = s_i + s_j;
            (closing > 0.0).then(|| ((tx_radius - d) / closing).abs())
        }
        Relation::Approaching => {
            let rel = (s_i - s_j).abs();
            (rel > 0.0).then(|| d / rel)
        }
        Relation::Equidistant => None,
    }
}
