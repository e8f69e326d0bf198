use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NeighborDiscovery,
    Receive,
    Transmit,
    Charge,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::NeighborDiscovery => "neighbor_discovery",
            Mode::Receive => "receive",
            Mode::Transmit => "transmit",
            Mode::Charge => "charge",
        }
    }

    /// Whether `self -> next` is an edge of the mode diagram (or a self-loop).
    pub fn can_move_to(self, next: Mode) -> bool {
        use Mode::*;
        self == next
            || matches!(
                (self, next),
                (NeighborDiscovery, Receive)
                    | (Receive, Transmit)
                    | (Transmit, Receive)
                    | (Receive, NeighborDiscovery)
                    | (Transmit, NeighborDiscovery)
                    | (NeighborDiscovery | Receive | Transmit, Charge)
                    | (Charge, NeighborDiscovery)
            )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEvents {
    pub residual_j: f64,
    pub threshold_j: f64,
    /// Charging finished and the battery is full.
    pub charged: bool,
    /// Hello window open.
    pub hello_due: bool,
    pub q_r: usize,
    pub q_t: usize,
    /// Feasible next-hop count.
    pub n_h: usize,
}

pub fn step_mode(current: Mode, ev: &ModeEvents) -> Mode {
    use Mode::*;
    match current {
        Charge => {
            if ev.charged {
                NeighborDiscovery
            } else {
                Charge
            }
        }
        _ if ev.residual_j < ev.threshold_j => Charge,
        _ if ev.hello_due || ev.n_h == 0 => NeighborDiscovery,
        NeighborDiscovery => Receive,
        Receive | Transmit => {
            if ev.q_t > 0 && ev.q_r == 0 {
                Transmit
            } else {
                Receive
            }
        }
    }
}

/// Applies `step_mode` until it reaches a fixed point (at most three hops).
pub fn settle_mode(current: Mode, ev: &ModeEvents) -> Mode {
    let mut m = current;
    for _ in 0..3 {
        let next = step_mode(m, ev);
        if next == m {
            break;
        }
        m = next;
    }
    m
}
