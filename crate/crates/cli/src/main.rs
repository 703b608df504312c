//! `cfmec` — train, evaluate, compare and plot resource-allocation policies
//! on the simulated cell-free MEC network.

mod plot;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use cfmec::config::{Algorithm, Architecture, SystemConfig};
use cfmec::harness::{
    self, evaluate_policy, read_metrics_csv, run_experiment, MetricsWriter,
};
use cfmec::phy;

#[derive(Parser)]
#[command(name = "cfmec", version, about = "Cell-free MEC resource-allocation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a learned policy (or run a heuristic) and write metrics + checkpoints.
    Train(RunArgs),
    /// Evaluate saved checkpoints (or a heuristic) without exploration.
    Eval(EvalArgs),
    /// Run an (algorithm x architecture) grid with a shared network drop.
    Compare(CompareArgs),
    /// Render SVG charts from metrics CSV files.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Flat key = value configuration file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<usize>,
    /// maddpg, ddpg_central, offload_first or local_first.
    #[arg(long)]
    algo: Option<String>,
    /// cell_free, small_cell or colocated.
    #[arg(long)]
    arch: Option<String>,
    /// Output directory for metrics, checkpoints and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory holding actor checkpoints and the run manifest of a
    /// previous training run.
    #[arg(long)]
    checkpoints: PathBuf,
    #[command(flatten)]
    common: RunArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated algorithms (default: maddpg).
    #[arg(long, default_value = "maddpg")]
    algos: String,
    /// Comma-separated architectures (default: all three).
    #[arg(long, default_value = "cell_free,small_cell,colocated")]
    archs: String,
    #[command(flatten)]
    common: RunArgs,
}

#[derive(Args)]
struct PlotArgs {
    /// Metrics CSV files; each becomes one labelled curve.
    inputs: Vec<PathBuf>,
    /// Directory the SVG files are written into.
    #[arg(long)]
    out: PathBuf,
    /// Moving-average window (defaults to the config value).
    #[arg(long)]
    window: Option<usize>,
}

fn resolve_config(args: &RunArgs, fallback: Option<&Path>) -> anyhow::Result<SystemConfig> {
    let mut cfg = match (&args.config, fallback) {
        (Some(path), _) => SystemConfig::from_file(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        (None, Some(manifest)) if manifest.exists() => SystemConfig::from_file(manifest)
            .with_context(|| format!("loading manifest {}", manifest.display()))?,
        _ => SystemConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(episodes) = args.episodes {
        cfg.episodes = episodes;
    }
    if let Some(algo) = &args.algo {
        cfg.algorithm = algo.parse()?;
    }
    if let Some(arch) = &args.arch {
        cfg.architecture = arch.parse()?;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().cmd {
        Cmd::Train(args) => {
            let cfg = resolve_config(&args, None)?;
            eprintln!(
                "training {} on {} (M={}, K={}, {} episodes, seed {})",
                cfg.algorithm, cfg.architecture, cfg.ap_count, cfg.user_count, cfg.episodes, cfg.seed
            );
            let artifacts = run_experiment(&cfg)?;
            let last = artifacts.metrics.last().context("no episodes ran")?;
            eprintln!(
                "done: {} episodes, final reward {:.3}, success {:.3}; metrics at {}",
                artifacts.metrics.len(),
                last.reward,
                last.success_rate,
                artifacts.metrics_path.display()
            );
            for p in &artifacts.checkpoint_paths {
                eprintln!("checkpoint {}", p.display());
            }
        }
        Cmd::Eval(args) => {
            let manifest = args.checkpoints.join("run_manifest.txt");
            let mut cfg = resolve_config(&args.common, Some(&manifest))?;
            if args.common.out.is_none() {
                cfg.out_dir = args.checkpoints.display().to_string();
            }
            let episodes = args.common.episodes.unwrap_or(cfg.eval_episodes);
            let base = phy::generate_scenario(&cfg, cfg.seed)?;
            let scenario = phy::make_architecture(&base, cfg.architecture, &cfg.pathloss);
            let policy = harness::load_policy(&args.checkpoints, &cfg, &scenario)?;
            let out_dir = PathBuf::from(&cfg.out_dir);
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("eval_metrics.csv");
            let mut writer = MetricsWriter::create(&path)?;
            let history =
                evaluate_policy(&policy, &scenario, &cfg, episodes, cfg.seed, |m| {
                    writer.write(m)
                })?;
            let n = history.len() as f64;
            let reward: f64 = history.iter().map(|m| m.reward).sum::<f64>() / n;
            let success: f64 = history.iter().map(|m| m.success_rate).sum::<f64>() / n;
            eprintln!(
                "evaluated {} over {} episodes: mean reward {:.3}, mean success {:.4}; rows at {}",
                cfg.algorithm,
                history.len(),
                reward,
                success,
                path.display()
            );
        }
        Cmd::Compare(args) => {
            let cfg = resolve_config(&args.common, None)?;
            let algos = parse_list::<Algorithm>(&args.algos)?;
            let archs = parse_list::<Architecture>(&args.archs)?;
            let table = harness::compare_architectures(&cfg, &algos, &archs)?;
            eprintln!("comparison table at {}", table.display());
        }
        Cmd::Plot(args) => {
            if args.inputs.is_empty() {
                bail!("plot needs at least one metrics CSV");
            }
            let window = args.window.unwrap_or(SystemConfig::default().moving_avg_window);
            std::fs::create_dir_all(&args.out)?;
            let mut loaded = Vec::new();
            for path in &args.inputs {
                let metrics = read_metrics_csv(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let label = label_for(path);
                loaded.push((label, metrics));
            }
            let charts: [(&str, &str, fn(&harness::EpisodeMetrics) -> f64); 4] = [
                ("reward", "episode reward", |m| m.reward),
                ("success_rate", "success rate", |m| m.success_rate),
                ("mean_energy", "mean energy per user-step (J)", |m| m.mean_energy_j),
                ("mean_latency", "mean latency (s)", |m| m.mean_latency_s),
            ];
            for (name, label, field) in charts {
                let series: Vec<plot::Series> = loaded
                    .iter()
                    .map(|(lbl, metrics)| plot::series_from_metrics(lbl, metrics, field))
                    .collect();
                let svg = plot::render_chart(name, label, &series, window);
                let path = args.out.join(format!("{name}.svg"));
                std::fs::write(&path, svg)?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| Ok(t.parse::<T>()?))
        .collect()
}

/// Curve label: the run-directory name when the file is a standard
/// metrics.csv, otherwise the file stem.
fn label_for(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    if stem == "metrics" || stem == "eval_metrics" {
        if let Some(parent) = path.parent().and_then(|p| p.file_name()).and_then(|s| s.to_str()) {
            return parent.to_string();
        }
    }
    stem.to_string()
}
