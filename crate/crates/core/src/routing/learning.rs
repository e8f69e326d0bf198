use std::collections::BTreeMap;

use crate::config::LearningRateVariant;
use crate::model::NodeId;

/// Learning rate driven by link coverage.
pub fn dynamic_learning_rate(p_cov: f64, beta_min: f64, beta_max: f64, variant: LearningRateVariant) -> f64 {
    let prime = match variant {
        LearningRateVariant::Literal => 1.0 / (1.0 + (-p_cov).exp()),
        LearningRateVariant::Inverted => 1.0 / (1.0 + p_cov.exp()),
    };
    prime * (beta_max - beta_min) + beta_min
}

/// Discount driven by the fraction of the network currently reachable as candidates.
pub fn dynamic_discount(n_c: usize, m: usize, gamma_min: f64, gamma_max: f64) -> f64 {
    let ratio = if m == 0 { 0.0 } else { (n_c as f64 / m as f64).min(1.0) };
    ratio * (gamma_max - gamma_min) + gamma_min
}

/// Dense Q-values indexed by (holding node, next hop); unseen pairs are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n: usize,
    q: Vec<f64>,
}

impl QTable {
    /// Table for node ids `0..n` (the ground station is id 0).
    pub fn new(n: usize) -> Self {
        Self { n, q: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, node: NodeId, action: NodeId) -> f64 {
        self.q[node.0 as usize * self.n + action.0 as usize]
    }

    pub fn set(&mut self, node: NodeId, action: NodeId, v: f64) {
        self.q[node.0 as usize * self.n + action.0 as usize] = v;
    }

    fn add(&mut self, node: NodeId, action: NodeId, dv: f64) {
        self.q[node.0 as usize * self.n + action.0 as usize] += dv;
    }

    pub fn row(&self, node: NodeId) -> &[f64] {
        let i = node.0 as usize * self.n;
        &self.q[i..i + self.n]
    }

    /// Largest outgoing value of `node`, 0 for a node that never learned anything.
    pub fn max_outgoing(&self, node: NodeId) -> f64 {
        self.row(node).iter().copied().fold(0.0, f64::max)
    }

    /// Largest value over the given actions; `None` for an empty set.
    pub fn max_over<I: IntoIterator<Item = NodeId>>(&self, node: NodeId, actions: I) -> Option<f64> {
        actions
            .into_iter()
            .map(|a| self.get(node, a))
            .fold(None, |acc, v| Some(acc.map_or(v, |m: f64| m.max(v))))
    }

    /// Nonzero entries in (node, action) order.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.q.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(i, v)| {
            (NodeId((i / self.n) as u32), NodeId((i % self.n) as u32), *v)
        })
    }

    pub fn all_finite(&self) -> bool {
        self.q.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EligibilityTraces {
    e: BTreeMap<(NodeId, NodeId), f64>,
}

impl EligibilityTraces {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, node: NodeId, action: NodeId) -> f64 {
        self.e.get(&(node, action)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn clear(&mut self) {
        self.e.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), f64)> + '_ {
        self.e.iter().map(|(k, v)| (*k, *v))
    }
}

/// Watkins Q(lambda) step with a replacing trace. Returns the TD error.
#[allow(clippy::too_many_arguments)]
pub fn update_q(
    q: &mut QTable,
    traces: &mut EligibilityTraces,
    node: NodeId,
    action: NodeId,
    reward: f64,
    max_q_next: f64,
    beta: f64,
    gamma: f64,
    lambda: f64,
    was_greedy: bool,
) -> f64 {
    let delta = reward + gamma * max_q_next - q.get(node, action);
    traces.e.insert((node, action), 1.0);
    for (&(n, a), &e) in &traces.e {
        q.add(n, a, beta * delta * e);
    }
    if was_greedy {
        let decay = beta * lambda;
        traces.e.retain(|_, e| {
            *e *= decay;
            *e > 1e-12
        });
    } else {
        traces.e.clear();
    }
    delta
}

/// Plain one-step Q-learning, kept separate from the trace machinery.
pub fn one_step_q_update(q: &mut QTable, node: NodeId, action: NodeId, reward: f64, max_q_next: f64, beta: f64, gamma: f64) {
    let old = q.get(node, action);
    q.set(node, action, old + beta * (reward + gamma * max_q_next - old));
}
