//! Output files: `metrics.csv`, `events.csv`, `q_table.csv` and `summary.json`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::experiment::{CompareInput, CompareRow, COMPARE_COLUMNS};
use crate::error::Result;
use crate::routing::QTable;
use crate::sim::{EpisodeMetrics, EventRow};

/// Column order of `metrics.csv`.
pub const METRICS_COLUMNS: &[&str] = &[
    "episode",
    "reward",
    "cumulative_reward",
    "decisions",
    "empty_decisions",
    "total_residual_j",
    "l3_delivered",
    "cumulative_l3_delivered",
    "pac_tx_l2",
    "ack_l2",
    "pac_tx_l3",
    "ack_l3",
    "generated",
    "dropped",
    "queued",
    "hellos",
    "active_nodes",
    "charging_nodes",
    "fragmented",
];

/// Column order of `events.csv`.
pub const EVENT_COLUMNS: &[&str] = &[
    "slot",
    "kind",
    "node",
    "peer",
    "packet",
    "value",
    "x",
    "y",
    "h",
    "residual_j",
    "prs_l2",
    "prs_l3",
    "beta",
    "gamma",
    "q_value",
    "issued_at",
    "next_hello_at",
];

fn write_rows<T: Serialize, W: Write>(out: W, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_metrics_to<W: Write>(out: W, rows: &[EpisodeMetrics]) -> Result<()> {
    write_rows(out, rows, METRICS_COLUMNS)
}

pub fn write_metrics(path: &Path, rows: &[EpisodeMetrics]) -> Result<()> {
    write_metrics_to(BufWriter::new(File::create(path)?), rows)
}

pub fn read_metrics_from<R: Read>(input: R) -> Result<Vec<EpisodeMetrics>> {
    read_rows(input)
}

pub fn read_metrics(path: &Path) -> Result<Vec<EpisodeMetrics>> {
    read_metrics_from(File::open(path)?)
}

pub fn write_events(path: &Path, rows: &[EventRow]) -> Result<()> {
    write_rows(BufWriter::new(File::create(path)?), rows, EVENT_COLUMNS)
}

pub fn read_events(path: &Path) -> Result<Vec<EventRow>> {
    read_rows(File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEntry {
    pub node: u32,
    pub next_hop: u32,
    pub q: f64,
}

/// Writes the nonzero entries of a Q-table.
pub fn write_q_table(path: &Path, q: &QTable) -> Result<()> {
    let rows: Vec<QEntry> = q.entries().map(|(n, a, v)| QEntry { node: n.0, next_hop: a.0, q: v }).collect();
    write_rows(BufWriter::new(File::create(path)?), &rows, &["node", "next_hop", "q"])
}

pub fn read_q_table(path: &Path) -> Result<Vec<QEntry>> {
    read_rows(File::open(path)?)
}

/// Machine-readable digest of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub policy: String,
    pub seed: u64,
    pub uav_count: u32,
    pub episodes: u32,
    pub scenario: String,
    pub final_cumulative_reward: f64,
    pub final_total_residual_j: f64,
    pub l3_delivered: u64,
    pub generated: u64,
    pub dropped: u64,
    pub mean_reward: f64,
    /// Every configuration key with its effective value.
    pub config: toml::Table,
}

impl RunSummary {
    pub fn new(label: &str, cfg: &SimConfig, metrics: &[EpisodeMetrics]) -> Self {
        let last = metrics.last();
        let mean_reward = if metrics.is_empty() {
            0.0
        } else {
            metrics.iter().map(|m| m.reward).sum::<f64>() / metrics.len() as f64
        };
        let scenario = serde_json::to_value(cfg.scenario)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        Self {
            label: label.to_string(),
            policy: cfg.policy.name().to_string(),
            seed: cfg.seed,
            uav_count: cfg.uav_count,
            episodes: cfg.episodes,
            scenario,
            final_cumulative_reward: last.map_or(0.0, |m| m.cumulative_reward),
            final_total_residual_j: last.map_or(cfg.uav_count as f64 * cfg.energy_full_j, |m| m.total_residual_j),
            l3_delivered: last.map_or(0, |m| m.cumulative_l3_delivered),
            generated: last.map_or(0, |m| m.generated),
            dropped: last.map_or(0, |m| m.dropped),
            mean_reward,
            config: cfg.to_table(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

pub fn write_compare(path: &Path, rows: &[CompareRow]) -> Result<()> {
    write_rows(BufWriter::new(File::create(path)?), rows, COMPARE_COLUMNS)
}

pub fn read_compare(path: &Path) -> Result<Vec<CompareRow>> {
    read_rows(File::open(path)?)
}

/// Loads a run directory written by `iqmr run` (`summary.json` + `metrics.csv`).
pub fn load_run(dir: &Path) -> Result<CompareInput> {
    let s = read_summary(&dir.join("summary.json"))?;
    let metrics = read_metrics(&dir.join("metrics.csv"))?;
    Ok(CompareInput { label: s.label, seed: s.seed, config: s.config, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(e: u64) -> EpisodeMetrics {
        EpisodeMetrics {
            episode: e,
            reward: 0.1 * e as f64 + 1.0 / 3.0,
            cumulative_reward: 2.5,
            decisions: 3,
            empty_decisions: 1,
            total_residual_j: 207_791.123_456_789,
            l3_delivered: 1,
            cumulative_l3_delivered: 7,
            pac_tx_l2: 9,
            ack_l2: 8,
            pac_tx_l3: 5,
            ack_l3: 4,
            generated: 11,
            dropped: 0,
            queued: 2,
            hellos: 6,
            active_nodes: 20,
            charging_nodes: 0,
            fragmented: e % 2 == 0,
        }
    }

    #[test]
    fn metrics_round_trip() {
        let rows: Vec<_> = (0..5).map(row).collect();
        let mut buf = Vec::new();
        write_metrics_to(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), METRICS_COLUMNS.join(","));
        assert_eq!(read_metrics_from(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn header_matches_struct_order() {
        let mut buf = Vec::new();
        let mut w = csv::Writer::from_writer(&mut buf);
        w.serialize(row(0)).unwrap();
        drop(w);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), METRICS_COLUMNS.join(","));

        let mut buf = Vec::new();
        let mut w = csv::Writer::from_writer(&mut buf);
        w.serialize(EventRow::new(0, "hello", 1)).unwrap();
        drop(w);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), EVENT_COLUMNS.join(","));
    }

    #[test]
    fn events_and_q_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            EventRow::new(3, "tx_ok", 4).peer(0).value(0.75),
            EventRow { x: Some(1.5), issued_at: Some(3), ..EventRow::new(3, "hello", 2) },
        ];
        let p = dir.path().join("events.csv");
        write_events(&p, &rows).unwrap();
        assert_eq!(read_events(&p).unwrap(), rows);

        let mut q = QTable::new(4);
        q.set(crate::NodeId(2), crate::NodeId(0), 0.625);
        let p = dir.path().join("q.csv");
        write_q_table(&p, &q).unwrap();
        assert_eq!(read_q_table(&p).unwrap(), vec![QEntry { node: 2, next_hop: 0, q: 0.625 }]);
    }

    #[test]
    fn summary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimConfig::reference(3, 5);
        let s = RunSummary::new("x", &cfg, &[row(0), row(1)]);
        let p = dir.path().join("summary.json");
        write_json(&p, &s).unwrap();
        assert_eq!(read_summary(&p).unwrap(), s);
        assert_eq!(s.scenario, "none");

        write_metrics(&dir.path().join("metrics.csv"), &[row(0), row(1)]).unwrap();
        let run = load_run(dir.path()).unwrap();
        assert_eq!((run.label.as_str(), run.seed, run.metrics.len()), ("x", 0, 2));
        assert_eq!(run.config, cfg.to_table());
    }

    #[test]
    fn compare_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![CompareRow {
            episode: 10,
            label: "iqmr".into(),
            seeds: 3,
            residual_mean_j: 1.0 / 3.0,
            residual_min_j: 0.1,
            residual_max_j: 0.5,
            l3_mean: 2.5,
            l3_min: 1,
            l3_max: 4,
        }];
        let p = dir.path().join("compare.csv");
        write_compare(&p, &rows).unwrap();
        assert_eq!(read_compare(&p).unwrap(), rows);
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), COMPARE_COLUMNS.join(","));
    }
}
