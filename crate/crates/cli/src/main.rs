//! `iqmr`: run simulations, named experiment presets and policy comparisons.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use iqmr_core::config::{parse_assignment, Policy};
use iqmr_core::experiment::{self, CompareInput, ExperimentPreset, PRESET_NAMES};
use iqmr_core::io::{self, RunSummary};
use iqmr_core::sim::run_simulation_full;
use iqmr_core::SimConfig;

#[derive(Parser)]
#[command(name = "iqmr", version, about = "UAV multi-hop routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration, a sweep or a preset and write its output files.
    Run(RunArgs),
    /// Aggregate residual energy and L3 deliveries of several runs side by side.
    Compare(CompareArgs),
    /// List the experiment presets.
    Presets,
}

#[derive(Args)]
struct Source {
    /// Configuration file (flat TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named experiment preset.
    #[arg(long)]
    preset: Option<String>,
    /// Override any configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive seed range, e.g. `1..5`.
    #[arg(long, value_name = "N..M")]
    seeds: Option<String>,
    /// Routing policy: iqmr, greedy or vanilla_q.
    #[arg(long)]
    policy: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory.
    #[arg(long, env = "IQMR_SIM_OUT", default_value = "out")]
    out: PathBuf,
    /// Also write `events.csv` and `q_table.csv`.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Run directories written by `iqmr run`, searched recursively.
    runs: Vec<PathBuf>,
    #[command(flatten)]
    source: Source,
    /// Policies to run when comparing from a configuration, e.g. `iqmr,greedy`.
    #[arg(long, value_delimiter = ',')]
    policies: Vec<String>,
    /// Checkpoint spacing in episodes.
    #[arg(long, default_value_t = 100)]
    every: u64,
    /// Directory for `compare.csv` (and the runs, when they are simulated here).
    #[arg(long, env = "IQMR_SIM_OUT", default_value = "out")]
    out: PathBuf,
}

/// One simulation to execute and where its files go.
struct Job {
    label: String,
    dir: PathBuf,
    config: SimConfig,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Presets => {
            for p in ExperimentPreset::all() {
                let labels: Vec<_> = p.variants.iter().map(|v| v.label.as_str()).collect();
                println!("{:<7} {} [{}: {}]", p.name, p.description, p.axis, labels.join(", "));
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let (a, b) = s
        .split_once("..")
        .with_context(|| format!("--seeds: expected N..M, got `{s}`"))?;
    let a: u64 = a.trim().parse().with_context(|| format!("--seeds: bad start `{a}`"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().with_context(|| format!("--seeds: bad end `{b}`"))?;
    if b < a {
        bail!("--seeds: empty range {a}..{b}");
    }
    Ok((a..=b).collect())
}

impl Source {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for s in &self.set {
            out.push(parse_assignment(s)?);
        }
        if let Some(p) = &self.policy {
            Policy::parse(p)?;
            out.push(("policy".into(), p.clone()));
        }
        Ok(out)
    }

    fn seed_list(&self) -> Result<Option<Vec<u64>>> {
        match (&self.seed, &self.seeds) {
            (Some(s), _) => Ok(Some(vec![*s])),
            (None, Some(r)) => parse_seeds(r).map(Some),
            (None, None) => Ok(None),
        }
    }

    /// Expands the source into runs. `root` is the output directory.
    fn jobs(&self, root: &Path) -> Result<Vec<Job>> {
        let overrides = self.overrides()?;
        let seeds = self.seed_list()?;
        if let Some(name) = &self.preset {
            let p = experiment::preset(name)?;
            let seeds = seeds.unwrap_or_else(|| p.seeds.clone());
            let runs = p.runs_with_seeds(&seeds, &overrides)?;
            return Ok(runs
                .into_iter()
                .map(|r| Job {
                    dir: root.join(p.name).join(&r.variant).join(format!("seed-{}", r.seed)),
                    label: r.variant,
                    config: r.config,
                })
                .collect());
        }
        let Some(path) = &self.config else {
            bail!("one of --config or --preset is required (presets: {})", PRESET_NAMES.join(", "));
        };
        let base = SimConfig::load(path, &overrides)
            .with_context(|| format!("loading {}", path.display()))?;
        let multi_seed = seeds.as_ref().is_some_and(|s| s.len() > 1);
        let seeds = seeds.unwrap_or_else(|| vec![base.seed]);
        let sweep = base.sweep_value_list();
        let points: Vec<(Option<String>, SimConfig)> = if sweep.is_empty() {
            vec![(None, base.clone())]
        } else {
            let key = base.sweep_param.clone();
            if key.is_empty() {
                bail!("invalid configuration: sweep_param: required when sweep_values is set");
            }
            sweep
                .iter()
                .map(|v| Ok((Some(format!("{key}={v}")), base.with_override(&key, v)?)))
                .collect::<Result<_>>()?
        };
        let mut jobs = Vec::new();
        for (point, cfg) in points {
            for &seed in &seeds {
                let mut dir = root.to_path_buf();
                if let Some(p) = &point {
                    dir.push(p);
                }
                if multi_seed {
                    dir.push(format!("seed-{seed}"));
                }
                let config = cfg.with_override("seed", &seed.to_string())?;
                let label = point.clone().unwrap_or_else(|| config.policy.name().to_string());
                jobs.push(Job { label, dir, config });
            }
        }
        Ok(jobs)
    }
}

fn execute(job: &Job, trace: bool) -> Result<CompareInput> {
    std::fs::create_dir_all(&job.dir).with_context(|| format!("creating {}", job.dir.display()))?;
    let mut cfg = job.config.clone();
    cfg.trace = cfg.trace || trace;
    tracing::info!(label = %job.label, seed = cfg.seed, dir = %job.dir.display(), "running");
    let out = run_simulation_full(&cfg)?;
    io::write_metrics(&job.dir.join("metrics.csv"), &out.metrics)?;
    let summary = RunSummary::new(&job.label, &cfg, &out.metrics);
    io::write_json(&job.dir.join("summary.json"), &summary)?;
    if cfg.trace {
        io::write_events(&job.dir.join("events.csv"), &out.events)?;
        io::write_q_table(&job.dir.join("q_table.csv"), &out.q_table)?;
    }
    println!(
        "{}: seed {} reward {:.3} residual {:.0} J l3 {} -> {}",
        job.label,
        cfg.seed,
        summary.final_cumulative_reward,
        summary.final_total_residual_j,
        summary.l3_delivered,
        job.dir.display()
    );
    Ok(CompareInput { label: job.label.clone(), seed: cfg.seed, config: summary.config, metrics: out.metrics })
}

fn run(a: RunArgs) -> Result<()> {
    let jobs = a.source.jobs(&a.out)?;
    for job in &jobs {
        execute(job, a.trace)?;
    }
    Ok(())
}

fn find_runs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if dir.join("summary.json").is_file() {
        out.push(dir.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    for e in entries {
        find_runs(&e, out)?;
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let inputs: Vec<CompareInput> = if !a.runs.is_empty() {
        let mut dirs = Vec::new();
        for r in &a.runs {
            find_runs(r, &mut dirs)?;
        }
        if dirs.is_empty() {
            bail!("no run directories (with summary.json) found");
        }
        dirs.iter().map(|d| io::load_run(d).with_context(|| d.display().to_string())).collect::<Result<_>>()?
    } else {
        let mut jobs = Vec::new();
        if a.policies.is_empty() {
            jobs = a.source.jobs(&a.out.join("runs"))?;
        } else {
            for p in &a.policies {
                Policy::parse(p)?;
                let mut src = Source {
                    config: a.source.config.clone(),
                    preset: a.source.preset.clone(),
                    set: a.source.set.clone(),
                    seed: a.source.seed,
                    seeds: a.source.seeds.clone(),
                    policy: Some(p.clone()),
                };
                let root = a.out.join("runs").join(p);
                src.set.retain(|s| !s.starts_with("policy="));
                let mut js = src.jobs(&root)?;
                for j in &mut js {
                    j.label = p.clone();
                }
                jobs.extend(js);
            }
        }
        jobs.iter().map(|j| execute(j, false)).collect::<Result<_>>()?
    };
    let rows = experiment::compare(&inputs, a.every)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let path = a.out.join("compare.csv");
    io::write_compare(&path, &rows)?;
    println!(
        "{:>8} {:<12} {:>5} {:>14} {:>14} {:>14} {:>9} {:>6} {:>6}",
        "episode", "label", "seeds", "residual_j", "min", "max", "l3", "min", "max"
    );
    for r in &rows {
        println!(
            "{:>8} {:<12} {:>5} {:>14.1} {:>14.1} {:>14.1} {:>9.1} {:>6} {:>6}",
            r.episode, r.label, r.seeds, r.residual_mean_j, r.residual_min_j, r.residual_max_j, r.l3_mean, r.l3_min, r.l3_max
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}
