/// Normalized link and node state feeding the reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    pub p_coll: f64,
    pub prs_l3: f64,
    pub prs_l2: f64,
    pub p_cov: f64,
    pub energy_norm: f64,
    /// Number of feasible next hops.
    pub n_h: usize,
}

/// Weighted reward in `[0, 1]`; zero when no next hop is available.
pub fn compute_reward(inp: &RewardInputs, w: &[f64; 5]) -> f64 {
    if inp.n_h == 0 {
        return 0.0;
    }
    let u = |x: f64| x.clamp(0.0, 1.0);
    w[0] * (1.0 - u(inp.p_coll))
        + w[1] * u(inp.prs_l3)
        + w[2] * u(inp.prs_l2)
        + w[3] * u(inp.p_cov)
        + w[4] * u(inp.energy_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: [f64; 5] = [0.40, 0.25, 0.15, 0.12, 0.08];

    #[test]
    fn reward_cases() {
        let perfect = RewardInputs { p_coll: 0.0, prs_l3: 1.0, prs_l2: 1.0, p_cov: 1.0, energy_norm: 1.0, n_h: 3 };
        assert!((compute_reward(&perfect, &W) - 1.0).abs() < 1e-15);
        assert_eq!(compute_reward(&RewardInputs { n_h: 0, ..perfect }, &W), 0.0);
        let worst = RewardInputs { p_coll: 1.0, prs_l3: 0.0, prs_l2: 0.0, p_cov: 0.0, energy_norm: 0.0, n_h: 1 };
        assert_eq!(compute_reward(&worst, &W), 0.0);
    }
}
