//! Experiment orchestration: builds scenario + environment + agents from a
//! configuration, runs training or heuristic evaluation, and emits metrics
//! CSV files, actor checkpoints and a run manifest.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::baselines;
use crate::config::{Algorithm, Architecture, SystemConfig};
use crate::env::{Action, MecEnv, Observation};
use crate::error::Error;
use crate::phy::{self, NetworkScenario};
use crate::rl::{self, load_mlp, save_mlp, Learner, Mlp};
use crate::Result;

/// Aggregated scores of one episode. The success rate counts every
/// (user, step) pair; energy and latency are means over the same pairs, with
/// latency capped at the step length (tasks do not outlive their slot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub reward: f64,
    pub success_rate: f64,
    pub mean_energy_j: f64,
    pub mean_latency_s: f64,
}

pub const METRICS_HEADER: &str = "episode,reward,success_rate,mean_energy_j,mean_latency_s";

impl EpisodeMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{:.9e},{:.9e}",
            self.episode, self.reward, self.success_rate, self.mean_energy_j, self.mean_latency_s
        )
    }
}

/// Append-per-episode CSV writer; every row is flushed so a crash preserves
/// all completed episodes.
pub struct MetricsWriter {
    file: File,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(path)?;
        writeln!(file, "{METRICS_HEADER}")?;
        file.flush()?;
        Ok(Self { file })
    }

    pub fn write(&mut self, m: &EpisodeMetrics) -> Result<()> {
        writeln!(self.file, "{}", m.csv_row())?;
        self.file.flush()?;
        Ok(())
    }
}

/// Read back a metrics CSV (used by the plot subcommand and tests).
pub fn read_metrics_csv(path: &Path) -> Result<Vec<EpisodeMetrics>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "{}: unexpected metrics header {other:?}",
                path.display()
            )))
        }
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Config(format!("malformed metrics row '{line}'")));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{s}'")))
            };
            Ok(EpisodeMetrics {
                episode: fields[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad episode '{}'", fields[0])))?,
                reward: parse(fields[1])?,
                success_rate: parse(fields[2])?,
                mean_energy_j: parse(fields[3])?,
                mean_latency_s: parse(fields[4])?,
            })
        })
        .collect()
}

/// A deployable decision rule: trained actors or one of the heuristics.
pub enum Policy {
    /// Per-agent actors; each one sees only its own observation.
    MaddpgActors(Vec<Mlp<f64>>),
    /// One actor mapping the full state to the joint action.
    Central(Mlp<f64>),
    /// Fixed per-user power coefficients, everything offloaded.
    OffloadFirst(Vec<f64>),
    /// Fixed per-user power coefficients, local processor saturated.
    LocalFirst(Vec<f64>),
}

impl Policy {
    /// Build the heuristic policies from a scenario's large-scale gains.
    pub fn heuristic(algo: Algorithm, scenario: &NetworkScenario, cfg: &SystemConfig) -> Result<Policy> {
        let etas = baselines::fpc_coefficients(scenario, &cfg.fpc, cfg.radio.max_ul_power_w)?;
        match algo {
            Algorithm::OffloadFirst => Ok(Policy::OffloadFirst(etas)),
            Algorithm::LocalFirst => Ok(Policy::LocalFirst(etas)),
            other => Err(Error::Config(format!("{other} is not a heuristic"))),
        }
    }

    /// Joint action for the current observations. The MADDPG arm only ever
    /// touches each agent's own normalized observation.
    pub fn actions(&self, observations: &[Observation]) -> Vec<Action> {
        match self {
            Policy::MaddpgActors(actors) => actors
                .iter()
                .zip(observations)
                .map(|(actor, obs)| {
                    let out = actor.forward(ndarray::ArrayView1::from(&obs.normalized));
                    Action {
                        alpha: out[0].clamp(0.0, 1.0),
                        eta: out[1].clamp(0.0, 1.0),
                    }
                })
                .collect(),
            Policy::Central(actor) => {
                let mut state = Vec::with_capacity(3 * observations.len());
                for o in observations {
                    state.extend_from_slice(&o.normalized);
                }
                let out = actor.forward(ndarray::ArrayView1::from(&state));
                out.as_slice()
                    .unwrap()
                    .chunks_exact(2)
                    .map(|c| Action {
                        alpha: c[0].clamp(0.0, 1.0),
                        eta: c[1].clamp(0.0, 1.0),
                    })
                    .collect()
            }
            Policy::OffloadFirst(etas) => etas
                .iter()
                .map(|&eta| baselines::offloading_first_action(eta))
                .collect(),
            Policy::LocalFirst(etas) => etas
                .iter()
                .map(|&eta| baselines::local_first_action(eta))
                .collect(),
        }
    }

    fn expected_dims(&self, users: usize) -> Result<()> {
        let check = |cond: bool, what: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::Checkpoint(format!(
                    "policy does not match the configuration: {what}"
                )))
            }
        };
        match self {
            Policy::MaddpgActors(actors) => {
                check(actors.len() == users, "actor count != user count")?;
                for a in actors {
                    check(a.input_dim() == 3 && a.output_dim() == 2, "actor dims")?;
                }
                Ok(())
            }
            Policy::Central(actor) => check(
                actor.input_dim() == 3 * users && actor.output_dim() == 2 * users,
                "central actor dims",
            ),
            Policy::OffloadFirst(etas) | Policy::LocalFirst(etas) => {
                check(etas.len() == users, "power coefficient count")
            }
        }
    }
}

/// Exploration-free evaluation over fresh randomness (the evaluation RNG
/// streams of `seed`). Emits one metrics row per episode.
pub fn evaluate_policy(
    policy: &Policy,
    scenario: &NetworkScenario,
    cfg: &SystemConfig,
    episodes: usize,
    seed: u64,
    mut on_episode: impl FnMut(&EpisodeMetrics) -> Result<()>,
) -> Result<Vec<EpisodeMetrics>> {
    policy.expected_dims(scenario.user_count())?;
    let mut env = MecEnv::new_eval(scenario.clone(), cfg, seed);
    let step_len_s = cfg.radio.coherence_ms * 1e-3;
    let users = env.user_count();
    let horizon = env.horizon();
    let mut history = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let mut obs = env.reset();
        let mut reward_total = 0.0;
        let mut met = 0usize;
        let mut energy_sum = 0.0;
        let mut latency_sum = 0.0;
        for _ in 0..horizon {
            let actions = policy.actions(&obs);
            let res = env.step(&actions);
            reward_total += res.rewards[0];
            for u in &res.outcome.per_user {
                if u.deadline_met {
                    met += 1;
                }
                energy_sum += u.e_total_j;
                latency_sum += u.t_total_s.min(step_len_s);
            }
            obs = res.observations;
        }
        let opportunities = (horizon * users) as f64;
        let m = EpisodeMetrics {
            episode,
            reward: reward_total,
            success_rate: met as f64 / opportunities,
            mean_energy_j: energy_sum / opportunities,
            mean_latency_s: latency_sum / opportunities,
        };
        on_episode(&m)?;
        history.push(m);
    }
    Ok(history)
}

/// Everything a finished run leaves on disk.
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub metrics_path: PathBuf,
    pub checkpoint_paths: Vec<PathBuf>,
    pub metrics: Vec<EpisodeMetrics>,
}

fn checkpoint_path(dir: &Path, idx: usize) -> PathBuf {
    dir.join(format!("actor_{idx:02}.ckpt"))
}

/// Save each learner's actor; returns the paths.
fn save_actors(dir: &Path, learners: &[Learner<f32>]) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(learners.len());
    for (i, l) in learners.iter().enumerate() {
        let path = checkpoint_path(dir, i);
        save_mlp(&path, &l.bundle.actor)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Load the actors a previous run saved under `dir` into a policy matching
/// `cfg.algorithm`; shapes are validated against the configuration.
pub fn load_policy(dir: &Path, cfg: &SystemConfig, scenario: &NetworkScenario) -> Result<Policy> {
    let policy = match cfg.algorithm {
        Algorithm::Maddpg => {
            let actors = (0..cfg.user_count)
                .map(|i| load_mlp(&checkpoint_path(dir, i)))
                .collect::<Result<Vec<_>>>()?;
            Policy::MaddpgActors(actors)
        }
        Algorithm::DdpgCentral => Policy::Central(load_mlp(&checkpoint_path(dir, 0))?),
        algo => Policy::heuristic(algo, scenario, cfg)?,
    };
    policy.expected_dims(cfg.user_count)?;
    Ok(policy)
}

/// Run one experiment cell: validate, build the scenario for the configured
/// architecture, then train (writing per-episode metrics as they happen and
/// actor checkpoints at the end) or, for heuristics, evaluate.
pub fn run_experiment(cfg: &SystemConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("run_manifest.txt"), cfg.to_manifest_string())?;

    let base = phy::generate_scenario(cfg, cfg.seed)?;
    let scenario = phy::make_architecture(&base, cfg.architecture, &cfg.pathloss);

    let metrics_path = out_dir.join("metrics.csv");
    let mut writer = MetricsWriter::create(&metrics_path)?;

    let (metrics, checkpoint_paths) = match cfg.algorithm {
        Algorithm::Maddpg => {
            let mut env = MecEnv::new(scenario.clone(), cfg, cfg.seed);
            let (learners, history) =
                rl::train_maddpg(&mut env, cfg, |m| writer.write(m))?;
            (history, save_actors(&out_dir, &learners)?)
        }
        Algorithm::DdpgCentral => {
            let mut env = MecEnv::new(scenario.clone(), cfg, cfg.seed);
            let (learners, history) =
                rl::train_ddpg_centralized(&mut env, cfg, |m| writer.write(m))?;
            (history, save_actors(&out_dir, &learners)?)
        }
        algo => {
            let policy = Policy::heuristic(algo, &scenario, cfg)?;
            let history = evaluate_policy(&policy, &scenario, cfg, cfg.episodes, cfg.seed, |m| {
                writer.write(m)
            })?;
            (history, Vec::new())
        }
    };

    Ok(RunArtifacts {
        out_dir,
        metrics_path,
        checkpoint_paths,
        metrics,
    })
}

pub const COMPARISON_HEADER: &str =
    "algorithm,architecture,episode,reward,success_rate,mean_energy_j,mean_latency_s";

/// Grid of (algorithm x architecture) runs sharing the base seed, so the
/// user/AP drop is identical in every cell. Each cell writes its own run
/// directory; the long-format table lands in `comparison.csv`.
pub fn compare_architectures(
    cfg: &SystemConfig,
    algorithms: &[Algorithm],
    architectures: &[Architecture],
) -> Result<PathBuf> {
    cfg.validate()?;
    let root = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&root)?;
    let table_path = root.join("comparison.csv");
    let mut table = File::create(&table_path)?;
    writeln!(table, "{COMPARISON_HEADER}")?;

    for &algo in algorithms {
        for &arch in architectures {
            let mut cell = cfg.clone();
            cell.algorithm = algo;
            cell.architecture = arch;
            cell.out_dir = root.join(format!("{algo}_{arch}")).display().to_string();
            let artifacts = run_experiment(&cell)?;
            for m in &artifacts.metrics {
                writeln!(table, "{algo},{arch},{}", m.csv_row())?;
            }
            table.flush()?;
        }
    }
    Ok(table_path)
}
