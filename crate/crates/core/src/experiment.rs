//! Named experiment presets, multi-run comparison and a few series statistics.

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::sim::EpisodeMetrics;

/// One point on a preset's sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub overrides: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub description: &'static str,
    /// Applied on top of the desk scenario.
    pub base: Vec<(String, String)>,
    /// Name of the swept quantity; the variant labels are its values.
    pub axis: &'static str,
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
}

/// A fully resolved run of a preset.
#[derive(Debug, Clone)]
pub struct PresetRun {
    pub variant: String,
    pub seed: u64,
    pub config: SimConfig,
}

/// The scaled-down reference scenario every preset starts from: 20 UAVs on a
/// 400 m disc, 48 kbit/s of CBR traffic, 2000 episodes.
pub const DESK: &[(&str, &str)] = &[
    ("uav_count", "20"),
    ("episodes", "2000"),
    ("network_radius_m", "400"),
    ("cbr_rate_bps", "48000"),
];

pub const PRESET_NAMES: &[&str] =
    &["table1", "fig6", "fig7", "fig8a", "fig8b", "fig8c", "fig9", "fig10", "fig11", "fig12"];

const FRAGMENT: &[(&str, &str)] = &[
    ("scenario", "fragmentation"),
    ("scenario_start_ms", "5000"),
    ("episodes", "1000"),
    ("cbr_rate_bps", "96000"),
    ("rejoin_window_ms", "40"),
];

/// Geometry scale factors of the spacing sweep, smallest spacing first.
pub const SPACING_SCALES: &[f64] = &[0.015, 0.02, 0.025, 0.03];

fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn variants(key: &str, values: &[&str]) -> Vec<Variant> {
    values
        .iter()
        .map(|v| Variant { label: v.to_string(), overrides: vec![(key.to_string(), v.to_string())] })
        .collect()
}

fn single() -> Vec<Variant> {
    vec![Variant { label: "base".into(), overrides: vec![] }]
}

/// Overrides that shrink the whole geometry (and speeds) by `s`, which scales
/// mean inter-UAV spacing by the same factor.
pub fn spacing_overrides(s: f64) -> Vec<(String, String)> {
    let base = SimConfig::reference(20, 1);
    let scaled = |k: &str, v: f64| (k.to_string(), format!("{}", v * s));
    vec![
        scaled("network_radius_m", 400.0),
        scaled("network_height_m", base.network_height_m),
        scaled("altitude_min_m", base.altitude_min_m),
        scaled("altitude_max_m", base.altitude_max_m),
        scaled("tx_radius_m", base.tx_radius_m),
        scaled("speed_min_mps", base.speed_min_mps),
        scaled("speed_max_mps", base.speed_max_mps),
        scaled("crossover_distance_m", base.crossover_distance_m),
    ]
}

pub fn preset(name: &str) -> Result<ExperimentPreset> {
    let five = vec![1, 2, 3, 4, 5];
    let p = match name {
        "table1" => ExperimentPreset {
            name: "table1",
            description: "reference parameters scaled to 20 UAVs",
            base: vec![],
            axis: "none",
            variants: single(),
            seeds: vec![1],
        },
        "fig6" => ExperimentPreset {
            name: "fig6",
            description: "fixed learning rate sweep after 20% of the UAVs run flat",
            base: kv(&[
                ("episodes", "1000"),
                ("scenario", "energy_depletion"),
                ("selection", "random"),
                ("scenario_fraction", "0.2"),
                ("scenario_start_ms", "3000"),
            ]),
            axis: "fixed_beta",
            variants: variants("fixed_beta", &["0.01", "0.1", "0.5", "1"]),
            seeds: five,
        },
        "fig7" => ExperimentPreset {
            name: "fig7",
            description: "energy depletion of the highest and lowest Q half",
            base: kv(&[
                ("scenario", "energy_depletion"),
                ("scenario_fraction", "0.5"),
                ("scenario_start_ms", "5000"),
            ]),
            axis: "selection",
            variants: variants("selection", &["top_q", "bottom_q"]),
            seeds: vec![1],
        },
        "fig8a" => ExperimentPreset {
            name: "fig8a",
            description: "hop ACKs against end-to-end ACKs as reception feedback",
            base: vec![],
            axis: "ack_feedback",
            variants: variants("ack_feedback", &["l2_only", "l3_only"]),
            seeds: vec![1],
        },
        "fig8b" => ExperimentPreset {
            name: "fig8b",
            description: "SIR threshold sweep",
            base: kv(&[("episodes", "1000")]),
            axis: "sir_threshold",
            variants: variants("sir_threshold", &["0.5", "1", "2", "4"]),
            seeds: vec![1],
        },
        "fig8c" => ExperimentPreset {
            name: "fig8c",
            description: "mean inter-UAV spacing sweep",
            base: kv(&[("episodes", "1000"), ("collision_variant", "complement")]),
            axis: "spacing_scale",
            variants: SPACING_SCALES
                .iter()
                .map(|s| Variant { label: format!("{s}"), overrides: spacing_overrides(*s) })
                .collect(),
            seeds: vec![1],
        },
        "fig9" | "fig10" => ExperimentPreset {
            name: if name == "fig9" { "fig9" } else { "fig10" },
            description: if name == "fig9" {
                "top-Q half fragmented for 400 ms"
            } else {
                "top-Q half fragmented for 200 ms"
            },
            base: {
                let mut b = kv(FRAGMENT);
                b.extend(kv(&[
                    ("selection", "top_q"),
                    ("scenario_fraction", "0.5"),
                    ("scenario_duration_ms", if name == "fig9" { "400" } else { "200" }),
                ]));
                b
            },
            axis: "rejoin",
            variants: variants("rejoin", &["all_at_once", "staggered"]),
            seeds: five,
        },
        "fig11" => ExperimentPreset {
            name: "fig11",
            description: "random 20% fragmented for 200 ms",
            base: {
                let mut b = kv(FRAGMENT);
                b.extend(kv(&[
                    ("selection", "random"),
                    ("scenario_fraction", "0.2"),
                    ("scenario_duration_ms", "200"),
                ]));
                b
            },
            axis: "rejoin",
            variants: variants("rejoin", &["all_at_once", "staggered"]),
            seeds: five,
        },
        "fig12" => ExperimentPreset {
            name: "fig12",
            description: "IQMR against greedy geographic and vanilla Q-routing",
            base: vec![],
            axis: "policy",
            variants: variants("policy", &["iqmr", "greedy", "vanilla_q"]),
            seeds: five,
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(p)
}

impl ExperimentPreset {
    pub fn all() -> Vec<ExperimentPreset> {
        PRESET_NAMES.iter().map(|n| preset(n).expect("known preset")).collect()
    }

    /// Resolves every (variant, seed) pair. `extra` overrides are applied last.
    pub fn runs(&self, extra: &[(String, String)]) -> Result<Vec<PresetRun>> {
        self.runs_with_seeds(&self.seeds, extra)
    }

    pub fn runs_with_seeds(&self, seeds: &[u64], extra: &[(String, String)]) -> Result<Vec<PresetRun>> {
        let mut out = Vec::new();
        for v in &self.variants {
            for &seed in seeds {
                let mut table = toml::Table::new();
                let seed_s = seed.to_string();
                let layers = [kv(DESK), self.base.clone(), v.overrides.clone(), vec![("seed".into(), seed_s)]];
                for (k, val) in layers.iter().flatten().chain(extra) {
                    table.insert(k.clone(), crate::config::parse_override_value(val));
                }
                let config = SimConfig::from_table(table)?;
                out.push(PresetRun { variant: v.label.clone(), seed, config });
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------- compare

/// Keys that must agree between runs for them to be comparable.
const SCENARIO_KEYS: &[&str] = &[
    "uav_count",
    "episodes",
    "network_radius_m",
    "cbr_rate_bps",
    "scenario",
    "selection",
    "scenario_fraction",
    "scenario_start_ms",
    "scenario_duration_ms",
    "rejoin",
];

/// One run taking part in a comparison.
#[derive(Debug, Clone)]
pub struct CompareInput {
    pub label: String,
    pub seed: u64,
    pub config: toml::Table,
    pub metrics: Vec<EpisodeMetrics>,
}

/// One line of the comparison table: a label at an episode checkpoint,
/// aggregated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub episode: u64,
    pub label: String,
    pub seeds: usize,
    pub residual_mean_j: f64,
    pub residual_min_j: f64,
    pub residual_max_j: f64,
    pub l3_mean: f64,
    pub l3_min: u64,
    pub l3_max: u64,
}

pub const COMPARE_COLUMNS: &[&str] = &[
    "episode",
    "label",
    "seeds",
    "residual_mean_j",
    "residual_min_j",
    "residual_max_j",
    "l3_mean",
    "l3_min",
    "l3_max",
];

/// Checks that all runs share a scenario and that every label covers the same seeds.
pub fn check_comparable(runs: &[CompareInput]) -> Result<()> {
    let Some(first) = runs.first() else {
        return Err(Error::Mismatch("nothing to compare".into()));
    };
    for r in &runs[1..] {
        for key in SCENARIO_KEYS {
            if r.config.get(*key) != first.config.get(*key) {
                return Err(Error::Mismatch(format!(
                    "`{key}` differs: {} has {}, {} has {}",
                    first.label,
                    show(first.config.get(*key)),
                    r.label,
                    show(r.config.get(*key)),
                )));
            }
        }
    }
    let seeds_of = |label: &str| {
        let mut s: Vec<u64> = runs.iter().filter(|r| r.label == label).map(|r| r.seed).collect();
        s.sort_unstable();
        s
    };
    let reference = seeds_of(&first.label);
    for r in runs {
        let s = seeds_of(&r.label);
        if s != reference {
            return Err(Error::Mismatch(format!(
                "seed sets differ: {} has {:?}, {} has {:?}",
                first.label, reference, r.label, s
            )));
        }
    }
    Ok(())
}

fn show(v: Option<&toml::Value>) -> String {
    v.map_or_else(|| "nothing".to_string(), |v| v.to_string())
}

/// Aggregates runs every `every` episodes (and at the last episode).
pub fn compare(runs: &[CompareInput], every: u64) -> Result<Vec<CompareRow>> {
    check_comparable(runs)?;
    let every = every.max(1);
    let mut labels: Vec<&str> = Vec::new();
    for r in runs {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    let len = runs.iter().map(|r| r.metrics.len()).min().unwrap_or(0) as u64;
    let mut checkpoints: Vec<u64> = (1..=len).filter(|e| e % every == 0).collect();
    if len > 0 && checkpoints.last() != Some(&len) {
        checkpoints.push(len);
    }
    let mut out = Vec::new();
    for &cp in &checkpoints {
        for label in &labels {
            let rows: Vec<&EpisodeMetrics> = runs
                .iter()
                .filter(|r| r.label == *label)
                .map(|r| &r.metrics[cp as usize - 1])
                .collect();
            let n = rows.len() as f64;
            let e: Vec<f64> = rows.iter().map(|m| m.total_residual_j).collect();
            let l: Vec<u64> = rows.iter().map(|m| m.cumulative_l3_delivered).collect();
            out.push(CompareRow {
                episode: cp,
                label: label.to_string(),
                seeds: rows.len(),
                residual_mean_j: e.iter().sum::<f64>() / n,
                residual_min_j: e.iter().copied().fold(f64::INFINITY, f64::min),
                residual_max_j: e.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                l3_mean: l.iter().sum::<u64>() as f64 / n,
                l3_min: *l.iter().min().unwrap(),
                l3_max: *l.iter().max().unwrap(),
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- series statistics

/// Trailing moving average; entry `i` averages `xs[i+1-w..=i]` and exists for `i >= w-1`.
pub fn moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    if w == 0 || xs.len() < w {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(xs.len() - w + 1);
    let mut sum: f64 = xs[..w].iter().sum();
    out.push(sum / w as f64);
    for i in w..xs.len() {
        sum += xs[i] - xs[i - w];
        out.push(sum / w as f64);
    }
    out
}

/// First episode index from which the `w`-episode moving average stays
/// within `tol` (relative) of its final value.
pub fn convergence_episode(rewards: &[f64], w: usize, tol: f64) -> Option<usize> {
    let ma = moving_average(rewards, w);
    let last = *ma.last()?;
    let band = tol * last.abs();
    let mut first = ma.len();
    for i in (0..ma.len()).rev() {
        if (ma[i] - last).abs() > band {
            break;
        }
        first = i;
    }
    Some(first + w - 1)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Relative drop of mean reward in `[start, end)` against the equally long
/// window before `start`.
pub fn window_dip(rewards: &[f64], start: usize, end: usize) -> f64 {
    let len = end - start;
    let before = mean(&rewards[start.saturating_sub(len)..start]);
    let during = mean(&rewards[start..end.min(rewards.len())]);
    if before <= 0.0 {
        0.0
    } else {
        1.0 - during / before
    }
}

/// Episodes after `from` until the trailing `w`-episode mean first reaches
/// `level`.
pub fn recovery_episodes(rewards: &[f64], from: usize, w: usize, level: f64) -> Option<usize> {
    (from + w..=rewards.len()).find(|&i| mean(&rewards[i - w..i]) >= level).map(|i| i - from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        let names: std::collections::HashSet<_> = ExperimentPreset::all().iter().map(|p| p.name).collect();
        assert_eq!(names.len(), PRESET_NAMES.len());
        for p in ExperimentPreset::all() {
            let runs = p.runs(&[]).unwrap();
            assert_eq!(runs.len(), p.variants.len() * p.seeds.len(), "{}", p.name);
        }
        assert!(matches!(preset("fig13"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn fig6_has_four_rates() {
        let p = preset("fig6").unwrap();
        let betas: Vec<_> = p.runs_with_seeds(&[1], &[]).unwrap().iter().map(|r| r.config.fixed_beta).collect();
        assert_eq!(betas, vec![Some(0.01), Some(0.1), Some(0.5), Some(1.0)]);
    }

    #[test]
    fn extra_overrides_win() {
        let p = preset("fig12").unwrap();
        let runs = p.runs(&[("episodes".into(), "7".into())]).unwrap();
        assert!(runs.iter().all(|r| r.config.episodes == 7));
        assert!(p.runs(&[("uav_count".into(), "0".into())]).is_err());
    }

    fn input(label: &str, seed: u64, e: &[f64]) -> CompareInput {
        let cfg = SimConfig::reference(3, e.len() as u32);
        let metrics = e
            .iter()
            .enumerate()
            .map(|(i, &r)| EpisodeMetrics {
                episode: i as u64,
                reward: 0.0,
                cumulative_reward: 0.0,
                decisions: 0,
                empty_decisions: 0,
                total_residual_j: r,
                l3_delivered: 0,
                cumulative_l3_delivered: i as u64 * seed,
                pac_tx_l2: 0,
                ack_l2: 0,
                pac_tx_l3: 0,
                ack_l3: 0,
                generated: 0,
                dropped: 0,
                queued: 0,
                hellos: 0,
                active_nodes: 3,
                charging_nodes: 0,
                fragmented: false,
            })
            .collect();
        CompareInput { label: label.into(), seed, config: cfg.to_table(), metrics }
    }

    #[test]
    fn mean_and_band_over_seeds() {
        let runs = vec![
            input("a", 1, &[10.0, 9.0, 8.0]),
            input("a", 2, &[10.0, 7.0, 4.0]),
            input("a", 3, &[10.0, 8.0, 6.0]),
            input("b", 1, &[1.0, 1.0, 1.0]),
            input("b", 2, &[1.0, 1.0, 1.0]),
            input("b", 3, &[1.0, 1.0, 1.0]),
        ];
        let rows = compare(&runs, 2).unwrap();
        assert_eq!(rows.len(), 4);
        let a = &rows[2];
        assert_eq!((a.episode, a.label.as_str(), a.seeds), (3, "a", 3));
        assert_eq!((a.residual_mean_j, a.residual_min_j, a.residual_max_j), (6.0, 4.0, 8.0));
        assert_eq!((a.l3_mean, a.l3_min, a.l3_max), (4.0, 2, 6));
    }

    #[test]
    fn mismatches_are_refused() {
        let mut b = input("b", 1, &[1.0]);
        b.config.insert("scenario".into(), toml::Value::String("fragmentation".into()));
        let err = compare(&[input("a", 1, &[1.0]), b], 1).unwrap_err();
        assert!(err.to_string().contains("scenario"), "{err}");
        let err = compare(&[input("a", 1, &[1.0]), input("b", 2, &[1.0])], 1).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn statistics() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.5, 2.5, 3.5]);
        let xs: Vec<f64> = (0..100).map(|i| if i < 60 { 0.0 } else { 1.0 }).collect();
        assert_eq!(convergence_episode(&xs, 10, 0.05), Some(69));
        assert!((window_dip(&[1.0, 1.0, 0.5, 0.5], 2, 4) - 0.5).abs() < 1e-12);
        assert_eq!(recovery_episodes(&[0.0, 0.0, 1.0, 1.0], 0, 2, 1.0), Some(4));
        assert_eq!(recovery_episodes(&[0.0; 4], 0, 2, 1.0), None);
    }
}
