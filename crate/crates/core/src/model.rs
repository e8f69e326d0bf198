//! Shared geometric and numeric primitives.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the network cylinder. `h` is the altitude above the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, h: f64) -> Self {
        Self { x, y, h }
    }

    /// Distance from the cylinder axis.
    pub fn radial(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn horizontal_distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: &Position) -> [f64; 3] {
        [self.x - other.x, self.y - other.y, self.h - other.h]
    }
}

/// Euclidean distance between two positions.
pub fn distance(a: &Position, b: &Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dh = a.h - b.h;
    (dx * dx + dy * dy + dh * dh).sqrt()
}

/// Node identifier. UAVs are numbered `1..=M`; `0` is reserved for the
/// ground control station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const GCS: NodeId = NodeId(0);

    pub fn uav(index: u32) -> NodeId {
        debug_assert!(index >= 1);
        NodeId(index)
    }

    pub fn is_gcs(self) -> bool {
        self == Self::GCS
    }

    /// Zero-based slot of a UAV in per-node vectors. Panics for the GCS.
    pub fn index(self) -> usize {
        assert!(!self.is_gcs(), "the GCS has no UAV index");
        (self.0 - 1) as usize
    }

    pub fn from_index(idx: usize) -> NodeId {
        NodeId(idx as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_gcs() {
            f.write_str("GCS")
        } else {
            write!(f, "U{}", self.0)
        }
    }
}

/// Fixed range used to map a quantity onto the unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationBounds {
    min: f64,
    max: f64,
}

impl NormalizationBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::config(
                "normalization bounds",
                format!("need finite max > min, got [{min}, {max}]"),
            ));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

/// Min-max normalization. Inputs outside the bounds are clamped first.
pub fn normalize(x: f64, bounds: NormalizationBounds) -> f64 {
    let clamped = x.clamp(bounds.min, bounds.max);
    (clamped - bounds.min) / (bounds.max - bounds.min)
}
