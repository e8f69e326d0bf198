use std::cmp::Ordering;

use crate::model::{distance, NodeId, Position};

/// What the deciding node knows about one candidate at decision time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateState {
    pub id: NodeId,
    pub position: Position,
    /// Advertised residual energy in joules.
    pub residual_j: f64,
    /// Distance from the deciding node, meters.
    pub distance: f64,
    pub p_cov: f64,
    pub p_coll: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    pub energy_threshold: f64,
    pub coverage_min: f64,
    pub collision_threshold: f64,
    pub tx_radius: f64,
}

/// Energy, reachability, coverage and collision constraints.
pub fn feasible(c: &CandidateState, k: &Constraints) -> bool {
    c.residual_j > k.energy_threshold
        && c.distance <= k.tx_radius
        && c.p_cov >= k.coverage_min
        && c.p_coll < k.collision_threshold
}

/// Angle between `cand - src` and the source-destination axis, in `[0, pi]`.
pub fn divergence_angle(src: &Position, dst: &Position, cand: &Position) -> f64 {
    let u = cand.sub(src);
    let v = dst.sub(src);
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let d = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    c.atan2(d)
}

/// Picks the candidate ranked first by `better`, breaking exact ties by
/// smaller divergence from the source-destination axis, then by smaller id.
fn pick<'a, I, F>(src: &Position, dst: &Position, cands: I, better: F) -> Option<NodeId>
where
    I: IntoIterator<Item = &'a CandidateState>,
    F: Fn(f64, f64) -> Ordering,
{
    cands
        .into_iter()
        .map(|c| (c, divergence_angle(src, dst, &c.position)))
        .min_by(|(a, aa), (b, ba)| {
            better(a.q, b.q)
                .then(aa.total_cmp(ba))
                .then(a.id.cmp(&b.id))
        })
        .map(|(c, _)| c.id)
}

/// IQMR next hop: the feasible candidate with the largest Q-value.
pub fn select_next_hop(src: &Position, dst: &Position, cands: &[CandidateState], k: &Constraints) -> Option<NodeId> {
    pick(src, dst, cands.iter().filter(|c| feasible(c, k)), |a, b| b.total_cmp(&a))
}

/// Smallest value wins; used by cost-based Q-routing.
pub fn select_min_cost<'a, I>(src: &Position, dst: &Position, cands: I) -> Option<NodeId>
where
    I: IntoIterator<Item = &'a CandidateState>,
{
    pick(src, dst, cands, |a, b| a.total_cmp(&b))
}

/// Geographic baseline: the feasible candidate closest to the destination.
pub fn baseline_greedy(dst: &Position, cands: &[CandidateState], k: &Constraints) -> Option<NodeId> {
    cands
        .iter()
        .filter(|c| feasible(c, k))
        .map(|c| (c.id, distance(&c.position, dst)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(id, _)| id)
}
