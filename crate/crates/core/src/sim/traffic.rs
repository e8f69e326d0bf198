use crate::model::NodeId;

use super::packet::Packet;

/// Constant-bit-rate source with a fractional-packet accumulator and
/// round-robin source assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficGenerator {
    per_slot: f64,
    acc: f64,
    next_source: usize,
    next_id: u64,
    size_bytes: u32,
}

impl TrafficGenerator {
    pub fn new(rate_bps: f64, slot_s: f64, size_bytes: u32) -> Self {
        Self {
            per_slot: rate_bps * slot_s / (8.0 * size_bytes as f64),
            acc: 0.0,
            next_source: 0,
            next_id: 0,
            size_bytes,
        }
    }

    pub fn packets_per_slot(&self) -> f64 {
        self.per_slot
    }

    /// Packets created in `slot`, sourced round-robin from `sources`.
    pub fn generate(&mut self, slot: u64, sources: &[NodeId]) -> Vec<Packet> {
        self.acc += self.per_slot;
        let n = (self.acc + 1e-9).floor();
        self.acc = (self.acc - n).max(0.0);
        if sources.is_empty() {
            return Vec::new();
        }
        (0..n as u64)
            .map(|_| {
                let src = sources[self.next_source % sources.len()];
                self.next_source = (self.next_source + 1) % sources.len();
                let p = Packet::data(self.next_id, src, slot, self.size_bytes);
                self.next_id += 1;
                p
            })
            .collect()
    }
}

pub fn generate_traffic(gen: &mut TrafficGenerator, slot: u64, sources: &[NodeId]) -> Vec<Packet> {
    gen.generate(slot, sources)
}
