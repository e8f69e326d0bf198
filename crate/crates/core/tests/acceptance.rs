//! Acceptance suite. Runs every headline criterion and prints one PASS/FAIL
//! line each; exits nonzero if any criterion fails.

use std::time::Instant;

use iqmr_core::channel::{
    coverage_probability, nakagami_m, nakagami_m_standard, path_loss, ChannelParams,
};
use iqmr_core::config::{CollisionVariant, LearningRateVariant, Policy};
use iqmr_core::energy::{fly_energy, tx_energy, EnergyParams};
use iqmr_core::experiment::{
    convergence_episode, mean, preset, recovery_episodes, window_dip, PresetRun,
};
use iqmr_core::link::{collision_probability, packet_reception_status, PacketCounters};
use iqmr_core::model::{distance, normalize, NormalizationBounds};
use iqmr_core::routing::{
    baseline_greedy, compute_reward, dynamic_discount, dynamic_learning_rate, feasible,
    select_next_hop, update_q, EligibilityTraces, QTable, RewardInputs,
};
use iqmr_core::sim::{run_simulation, EpisodeMetrics, World};
use iqmr_core::{NodeId, Position, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

type Outcome = Result<String, String>;

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("formula oracles", formula_oracles),
        ("q(0) matches one-step q-learning", q_lambda_zero),
        ("coverage against numerical integration", coverage_oracle),
        ("threshold and spacing monotonicity", monotonicity),
        ("learning-rate convergence ordering", convergence_ordering),
        ("fragmentation recovery", fragmentation_recovery),
        ("policy dominance", policy_dominance),
        ("determinism", determinism),
        ("invariant sweep", invariant_sweep),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- formulas

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}

struct Worst {
    name: &'static str,
    err: f64,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Self { name, err: 0.0 }
    }
    fn see(&mut self, got: f64, want: f64) {
        self.err = self.err.max(rel_err(got, want));
    }
}

fn formula_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf0);
    let mut worst = Vec::new();
    let n = 1000;

    let mut w = Worst::new("normalize");
    for _ in 0..n {
        let lo = rng.random_range(-1e3..1e3);
        let hi = lo + rng.random_range(1e-3..1e4);
        let x = rng.random_range(lo - 10.0..hi + 10.0);
        let want = if x <= lo {
            0.0
        } else if x >= hi {
            1.0
        } else {
            (x - lo) / (hi - lo)
        };
        w.see(normalize(x, NormalizationBounds::new(lo, hi).unwrap()), want);
    }
    worst.push(w);

    let mut w = Worst::new("distance");
    for _ in 0..n {
        let a = Position::new(rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3), rng.random_range(0.0..500.0));
        let b = Position::new(rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3), rng.random_range(0.0..500.0));
        let want = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.h - b.h).powi(2)).sqrt();
        w.see(distance(&a, &b), want);
    }
    worst.push(w);

    let p = EnergyParams::from_config(&SimConfig::reference(1, 1));
    let mut w = Worst::new("tx_energy");
    for _ in 0..n {
        let k = rng.random_range(1.0..1e5);
        let r: f64 = rng.random_range(0.0..400.0);
        let amp = if r <= 100.0 { 41e-6 * r.powf(2.0) } else { 100e-12 * r.powf(4.0) };
        w.see(tx_energy(k, r, &p), k * (50e-9 + amp));
    }
    worst.push(w);

    let mut w = Worst::new("fly_energy");
    for _ in 0..n {
        let mass = rng.random_range(0.0..20.0);
        let tau = rng.random_range(0.0..2900.0);
        let want = (0.217 * mass + 0.185 * tau) / (1.0 - 0.217 * tau / 650.0);
        w.see(fly_energy(mass, tau, &p).unwrap(), want);
    }
    worst.push(w);

    let mut w = Worst::new("path_loss");
    for _ in 0..n {
        let r: f64 = rng.random_range(0.0..1e3);
        let h: f64 = rng.random_range(0.1..500.0);
        let alpha: f64 = rng.random_range(2.0..4.0);
        let want = (-alpha * (r.hypot(h)).ln()).exp();
        w.see(path_loss(r, h, alpha).unwrap(), want);
    }
    worst.push(w);

    let mut w = Worst::new("nakagami_m");
    for _ in 0..n {
        let k = rng.random_range(0.0..50.0);
        w.see(nakagami_m(k), (k + 1.0) / (k + 0.5));
        w.see(nakagami_m_standard(k), (k + 1.0) * (k + 1.0) / (2.0 * k + 1.0));
    }
    worst.push(w);

    let mut w = Worst::new("collision_probability");
    for _ in 0..n {
        let r: f64 = rng.random_range(0.01..30.0);
        let (xx, xy): (f64, f64) = (rng.random_range(0.5..10.0), rng.random_range(0.5..10.0));
        let tail = (-0.5 * r * r / xx / xy).exp();
        w.see(collision_probability(r, xx, xy, CollisionVariant::Complement), tail);
        w.see(collision_probability(r, xx, xy, CollisionVariant::Literal), -(-0.5 * r * r / xx / xy).exp_m1());
    }
    worst.push(w);

    let mut w = Worst::new("packet_reception_status");
    for _ in 0..n {
        let t2 = rng.random_range(0..1000u64);
        let t3 = rng.random_range(0..1000u64);
        let c = PacketCounters {
            pac_tx_l2: t2,
            pac_tx_l3: t3,
            ack_l2: rng.random_range(0..=t2),
            ack_l3: rng.random_range(0..=t3),
        };
        let part = |a: u64, t: u64| if t == 0 { 0.0 } else { a as f64 / t as f64 };
        w.see(packet_reception_status(&c), part(c.ack_l2, t2) + part(c.ack_l3, t3));
    }
    worst.push(w);

    let mut w = Worst::new("dynamic beta/gamma");
    for _ in 0..n {
        let pc: f64 = rng.random_range(0.0..1.0);
        let (lo, hi) = (rng.random_range(0.0..0.5), rng.random_range(0.5..1.0));
        let sig = |x: f64| x.exp() / (1.0 + x.exp());
        w.see(dynamic_learning_rate(pc, lo, hi, LearningRateVariant::Literal), lo + (hi - lo) * sig(pc));
        w.see(dynamic_learning_rate(pc, lo, hi, LearningRateVariant::Inverted), lo + (hi - lo) * sig(-pc));
        let m = rng.random_range(1..100usize);
        let nc = rng.random_range(0..=m);
        w.see(dynamic_discount(nc, m, lo, hi), lo + (hi - lo) * nc as f64 / m as f64);
    }
    worst.push(w);

    let mut w = Worst::new("compute_reward");
    for _ in 0..n {
        let mut ws: Vec<f64> = (0..5).map(|_| rng.random_range(0.01..1.0)).collect();
        ws.sort_by(|a, b| b.total_cmp(a));
        let s: f64 = ws.iter().sum();
        let ws = [ws[0] / s, ws[1] / s, ws[2] / s, ws[3] / s, ws[4] / s];
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
        let n_h = rng.random_range(0..4usize);
        let inp = RewardInputs { p_coll: x[0], prs_l3: x[1], prs_l2: x[2], p_cov: x[3], energy_norm: x[4], n_h };
        let want = if n_h == 0 {
            0.0
        } else {
            ws[0] - ws[0] * x[0] + ws[1] * x[1] + ws[2] * x[2] + ws[3] * x[3] + ws[4] * x[4]
        };
        w.see(compute_reward(&inp, &ws), want);
    }
    worst.push(w);

    let bad: Vec<String> = worst.iter().filter(|w| w.err > 1e-9).map(|w| format!("{} {:.2e}", w.name, w.err)).collect();
    let max = worst.iter().map(|w| w.err).fold(0.0, f64::max);
    check(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} formulas x {n} inputs, worst relative error {max:.1e}", worst.len())
        } else {
            format!("relative error above 1e-9: {}", bad.join(", "))
        },
    )
}

// ---------------------------------------------------------------- Q(0)

fn q_lambda_zero() -> Outcome {
    let nodes = 12usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x90);
    let mut q = QTable::new(nodes + 1);
    let mut traces = EligibilityTraces::new();
    let mut oracle = vec![vec![0.0f64; nodes + 1]; nodes + 1];
    let (beta, gamma) = (0.3, 0.85);
    for t in 0..10_000 {
        let s = rng.random_range(1..=nodes);
        let a = rng.random_range(0..=nodes);
        let r: f64 = rng.random_range(0.0..1.0);
        let next: Vec<usize> = (0..=nodes).filter(|_| rng.random_bool(0.4)).collect();
        let max_lib = q.max_over(NodeId(a as u32), next.iter().map(|&j| NodeId(j as u32))).unwrap_or(0.0);
        let max_oracle = next.iter().map(|&j| oracle[a][j]).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        let max_oracle = max_oracle.unwrap_or(0.0);
        update_q(&mut q, &mut traces, NodeId(s as u32), NodeId(a as u32), r, max_lib, beta, gamma, 0.0, rng.random_bool(0.8));
        let old = oracle[s][a];
        oracle[s][a] = old + beta * (r + gamma * max_oracle - old);
        for i in 0..=nodes {
            for j in 0..=nodes {
                let got = q.get(NodeId(i as u32), NodeId(j as u32));
                if got.to_bits() != oracle[i][j].to_bits() {
                    return Err(format!("transition {t}: q({i},{j}) = {got:e}, expected {:e}", oracle[i][j]));
                }
            }
        }
    }
    Ok("10000 transitions, tables bit-identical".into())
}

// ---------------------------------------------------------------- coverage

/// `P[g0 S >= theta sum g_i I_i]` for unit-mean Gamma(m) gains, by quadrature
/// over the interferer gains (one or two interferers).
fn coverage_integral(m: f64, s: f64, interf: &[f64], theta: f64) -> f64 {
    let g = Gamma::new(m, m).unwrap(); // shape m, rate m
    let tail = |x: f64| 1.0 - g.cdf(x);
    let upper = 12.0 / m.min(1.0) + 12.0;
    let steps = 1200;
    let h = upper / steps as f64;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let mut acc = f(0.0) + f(upper);
        for k in 1..steps {
            acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    match interf {
        [a] => simpson(&|y| g.pdf(y) * tail(theta * a * y / s)),
        [a, b] => simpson(&|y1| g.pdf(y1) * simpson(&|y2| g.pdf(y2) * tail(theta * (a * y1 + b * y2) / s))),
        _ => unreachable!("one or two interferers"),
    }
}

fn coverage_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    let mut worst = 0.0f64;
    let mut trials = 0;
    for case in 0..24 {
        let m = [nakagami_m(1.0), nakagami_m(0.2), nakagami_m_standard(3.0), 1.0][case % 4];
        let theta = [0.5, 1.0, 2.0, 4.0][(case / 4) % 4];
        let alpha = 3.0;
        let params = ChannelParams { path_loss_exponent: alpha, m, theta, mc_samples: 40_000 };
        let pos = |rng: &mut ChaCha8Rng| {
            Position::new(rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0), rng.random_range(100.0..300.0))
        };
        let (tx, rx) = (pos(&mut rng), pos(&mut rng));
        let k = 1 + case % 2;
        let xs: Vec<Position> = (0..k).map(|_| pos(&mut rng)).collect();
        let gain = |a: &Position| distance(a, &rx).powf(-alpha);
        let want = coverage_integral(m, gain(&tx), &xs.iter().map(gain).collect::<Vec<_>>(), theta);
        let got = coverage_probability(&tx, &rx, &xs, &params, &mut rng);
        worst = worst.max((got - want).abs());
        trials += 1;
    }
    // symmetric geometry: interferer as far from the receiver as the transmitter
    let rx = Position::new(0.0, 0.0, 200.0);
    let tx = Position::new(120.0, 0.0, 200.0);
    let x = Position::new(-120.0, 0.0, 200.0);
    let params = ChannelParams { path_loss_exponent: 3.0, m: nakagami_m(1.0), theta: 1.0, mc_samples: 100_000 };
    let sym = coverage_probability(&tx, &rx, &[x], &params, &mut rng);
    check(
        worst <= 0.02 && (sym - 0.5).abs() <= 0.01,
        format!("{trials} geometries, worst |mc - integral| = {worst:.4}; symmetric case {sym:.4}"),
    )
}

// ---------------------------------------------------------------- scenario helpers

fn runs(name: &str) -> Vec<PresetRun> {
    preset(name).unwrap().runs(&[]).unwrap()
}

fn simulate(r: &PresetRun) -> Vec<EpisodeMetrics> {
    run_simulation(&r.config).unwrap()
}

fn rewards(m: &[EpisodeMetrics]) -> Vec<f64> {
    m.iter().map(|x| x.reward).collect()
}

fn strictly(xs: &[f64], increasing: bool) -> bool {
    xs.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn fmt(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.1}")).collect::<Vec<_>>().join(", ")
}

fn monotonicity() -> Outcome {
    let final_reward = |name: &str| -> Vec<f64> {
        runs(name).iter().map(|r| simulate(r).last().unwrap().cumulative_reward).collect()
    };
    let theta = final_reward("fig8b");
    let spacing = final_reward("fig8c");
    check(
        strictly(&theta, false) && strictly(&spacing, true),
        format!("theta 0.5..4 -> [{}]; spacing smallest..largest -> [{}]", fmt(&theta), fmt(&spacing)),
    )
}

fn convergence_ordering() -> Outcome {
    let all = runs("fig6");
    let seeds = preset("fig6").unwrap().seeds;
    let mut good = 0;
    let mut lines = Vec::new();
    for &seed in &seeds {
        // variants are listed in increasing beta
        let idx: Vec<usize> = all
            .iter()
            .filter(|r| r.seed == seed)
            .map(|r| convergence_episode(&rewards(&simulate(r)), 50, 0.05).unwrap())
            .collect();
        let ok = idx.windows(2).all(|w| w[1] <= w[0]);
        good += ok as usize;
        lines.push(format!("seed {seed} {idx:?}"));
    }
    check(good >= 4, format!("{good}/5 seeds ordered; {}", lines.join("; ")))
}

struct FragRun {
    before: f64,
    dip: f64,
    recovery: Option<usize>,
}

fn frag_stats(r: &PresetRun) -> FragRun {
    let c = &r.config;
    let s = c.ms_to_slots(c.scenario_start_ms) as usize;
    let e = s + c.ms_to_slots(c.scenario_duration_ms) as usize;
    let rw = rewards(&simulate(r));
    let before = mean(&rw[s.saturating_sub(e - s)..s]);
    FragRun { before, dip: window_dip(&rw, s, e), recovery: recovery_episodes(&rw, e, 50, before) }
}

fn fragmentation_recovery() -> Outcome {
    let fig9 = runs("fig9");
    let mut good = 0;
    let mut lines = Vec::new();
    for seed in 1..=5u64 {
        let get = |v: &str| frag_stats(fig9.iter().find(|r| r.seed == seed && r.variant == v).unwrap());
        let (once, stag) = (get("all_at_once"), get("staggered"));
        let faster = match (stag.recovery, once.recovery) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        };
        let ok = once.dip >= 0.2 && faster;
        good += ok as usize;
        lines.push(format!(
            "seed {seed}: level {:.2} dip {:.2} recovery {:?}/{:?}",
            once.before, once.dip, once.recovery, stag.recovery
        ));
    }
    // random against top-Q selection at the same fraction
    let dip_of = |selection: &str| {
        let extra = [("selection".to_string(), selection.to_string())];
        let rs = preset("fig11").unwrap().runs(&extra).unwrap();
        let dips: Vec<f64> = rs.iter().filter(|r| r.variant == "all_at_once").map(|r| frag_stats(r).dip).collect();
        mean(&dips)
    };
    let (random, top) = (dip_of("random"), dip_of("top_q"));
    check(
        good >= 4 && random < top,
        format!(
            "{good}/5 seeds dip >= 20% with faster staggered recovery [{}]; mean dip random {random:.3} vs top-Q {top:.3}",
            lines.join("; ")
        ),
    )
}

fn policy_dominance() -> Outcome {
    let all = runs("fig12");
    let mut good = 0;
    let mut lines = Vec::new();
    for seed in 1..=5u64 {
        let last = |p: &str| {
            let m = simulate(all.iter().find(|r| r.seed == seed && r.variant == p).unwrap());
            let l = m.last().unwrap().clone();
            (l.total_residual_j, l.cumulative_l3_delivered)
        };
        let (i, g, v) = (last("iqmr"), last("greedy"), last("vanilla_q"));
        let ok = i.0 >= g.0 && i.0 >= v.0 && i.1 >= g.1 && i.1 >= v.1;
        good += ok as usize;
        lines.push(format!(
            "seed {seed}: E {:.0}/{:.0}/{:.0} L3 {}/{}/{}",
            i.0 / 1e3, g.0 / 1e3, v.0 / 1e3, i.1, g.1, v.1
        ));
    }
    check(
        good >= 4,
        format!("{good}/5 seeds (iqmr/greedy/vanilla_q, energy in kJ): {}", lines.join("; ")),
    )
}

fn determinism() -> Outcome {
    let cfg = &runs("table1")[0].config;
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    iqmr_core::io::write_metrics(&a, &run_simulation(cfg).unwrap()).unwrap();
    iqmr_core::io::write_metrics(&b, &run_simulation(cfg).unwrap()).unwrap();
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    check(x == y, format!("{} episodes, {} bytes, identical: {}", cfg.episodes, x.len(), x == y))
}

// ---------------------------------------------------------------- invariants

fn random_config(rng: &mut ChaCha8Rng) -> SimConfig {
    let pick = |rng: &mut ChaCha8Rng, xs: &[&str]| xs[rng.random_range(0..xs.len())].to_string();
    let m = rng.random_range(1..=10u32);
    let n = rng.random_range(1..=200u32);
    let mut kv: Vec<(String, String)> = vec![
        ("uav_count".into(), m.to_string()),
        ("episodes".into(), n.to_string()),
        ("seed".into(), rng.random::<u32>().to_string()),
        ("policy".into(), pick(rng, &["iqmr", "greedy", "vanilla_q"])),
        ("network_radius_m".into(), pick(rng, &["150", "400", "1000"])),
        ("cbr_rate_bps".into(), pick(rng, &["0", "24000", "96000", "480000"])),
        ("sir_threshold".into(), pick(rng, &["0.5", "1", "4"])),
        ("interference".into(), pick(rng, &["active", "all"])),
        ("ideal_hellos".into(), pick(rng, &["true", "false"])),
        ("collision_variant".into(), pick(rng, &["literal", "complement"])),
        ("ack_feedback".into(), pick(rng, &["both", "l2_only", "l3_only"])),
        ("lambda".into(), format!("{}", rng.random_range(0.0..1.0))),
        ("max_tx_per_slot".into(), pick(rng, &["1", "4", "16"])),
        ("mc_samples".into(), "200".into()),
        ("energy_full_j".into(), pick(rng, &["207792", "3000"])),
        ("charge_time_s".into(), "0.3".into()),
        ("scenario".into(), pick(rng, &["none", "energy_depletion", "fragmentation"])),
        ("selection".into(), pick(rng, &["random", "top_q", "bottom_q"])),
        ("scenario_fraction".into(), pick(rng, &["0.2", "0.5", "1"])),
        ("scenario_start_ms".into(), format!("{}", rng.random_range(0..(n * 10)))),
        ("scenario_duration_ms".into(), pick(rng, &["50", "200", "400"])),
        ("rejoin".into(), pick(rng, &["all_at_once", "staggered"])),
        ("rejoin_window_ms".into(), pick(rng, &["10", "40"])),
    ];
    if rng.random_bool(0.3) {
        kv.push(("fixed_beta".into(), pick(rng, &["0.01", "0.5", "1"])));
    }
    if rng.random_bool(0.3) {
        kv.push(("fixed_gamma".into(), pick(rng, &["0", "0.5", "0.9"])));
    }
    let mut table = toml::Table::new();
    for (k, v) in kv {
        table.insert(k, iqmr_core::config::parse_override_value(&v));
    }
    SimConfig::from_table(table).unwrap()
}

fn invariant_sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a);
    let mut decisions = 0usize;
    for run in 0..100 {
        let cfg = random_config(&mut rng);
        let mut world = World::new(&cfg).unwrap();
        world.enable_audit();
        for _ in 0..cfg.episodes {
            world.step();
            world
                .check_invariants()
                .map_err(|e| format!("run {run} slot {}: {e}", world.slot()))?;
            for a in world.take_audit() {
                decisions += 1;
                let ctx = || format!("run {run} slot {} node {}", a.slot, a.node);
                let k = &a.constraints;
                match a.chosen {
                    None if a.reward != 0.0 => return Err(format!("{}: reward {} with no next hop", ctx(), a.reward)),
                    Some(_) if !(a.reward > 0.0 && a.reward <= 1.0) => {
                        return Err(format!("{}: reward {} outside (0, 1]", ctx(), a.reward))
                    }
                    _ => {}
                }
                let chosen = a.chosen.and_then(|id| a.candidates.iter().find(|c| c.id == id));
                if a.chosen.is_some() && chosen.is_none() {
                    return Err(format!("{}: chosen node is not a candidate", ctx()));
                }
                match a.policy {
                    Policy::Iqmr | Policy::Greedy => {
                        if let Some(c) = chosen {
                            if !feasible(c, k) {
                                return Err(format!("{}: infeasible next hop {}", ctx(), c.id));
                            }
                        }
                        let expect = if a.policy == Policy::Iqmr {
                            select_next_hop(&a.src, &a.dst, &a.candidates, k)
                        } else {
                            baseline_greedy(&a.dst, &a.candidates, k)
                        };
                        if expect != a.chosen {
                            return Err(format!("{}: chose {:?}, selection gives {:?}", ctx(), a.chosen, expect));
                        }
                        let mut moved = a.candidates.clone();
                        for c in &mut moved {
                            c.q = (2.5 * c.q - 1.0).exp();
                        }
                        if select_next_hop(&a.src, &a.dst, &moved, k) != select_next_hop(&a.src, &a.dst, &a.candidates, k) {
                            return Err(format!("{}: selection not invariant under a monotone map", ctx()));
                        }
                    }
                    Policy::VanillaQ => {
                        if let Some(c) = chosen {
                            if !(c.residual_j > k.energy_threshold && c.distance <= k.tx_radius) {
                                return Err(format!("{}: unusable next hop {}", ctx(), c.id));
                            }
                        }
                    }
                }
                if a.residual_j < k.energy_threshold {
                    return Err(format!("{}: decided below the energy threshold", ctx()));
                }
            }
        }
        if world.below_threshold_transmissions() != 0 {
            return Err(format!("run {run}: transmissions below the energy threshold"));
        }
    }
    Ok(format!("100 runs, {decisions} audited decisions"))
}
