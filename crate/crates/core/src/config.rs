//! Experiment configuration: every physical, compute and training constant,
//! with defaults matching the evaluated system, plus the flat `key = value`
//! config-file format used by the CLI and the run manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::compute::ComputeConfig;
use crate::error::Error;
use crate::phy::{PathLossConstants, RadioConfig};
use crate::Result;

/// Resource-allocation policy under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Maddpg,
    DdpgCentral,
    OffloadFirst,
    LocalFirst,
}

impl Algorithm {
    pub fn is_learned(self) -> bool {
        matches!(self, Algorithm::Maddpg | Algorithm::DdpgCentral)
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maddpg" => Ok(Algorithm::Maddpg),
            "ddpg_central" => Ok(Algorithm::DdpgCentral),
            "offload_first" => Ok(Algorithm::OffloadFirst),
            "local_first" => Ok(Algorithm::LocalFirst),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected maddpg, ddpg_central, offload_first or local_first)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Maddpg => "maddpg",
            Algorithm::DdpgCentral => "ddpg_central",
            Algorithm::OffloadFirst => "offload_first",
            Algorithm::LocalFirst => "local_first",
        };
        f.write_str(s)
    }
}

/// Serving topology the users are attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    CellFree,
    SmallCell,
    Colocated,
}

impl FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cell_free" => Ok(Architecture::CellFree),
            "small_cell" => Ok(Architecture::SmallCell),
            "colocated" => Ok(Architecture::Colocated),
            other => Err(Error::Config(format!(
                "unknown architecture '{other}' (expected cell_free, small_cell or colocated)"
            ))),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Architecture::CellFree => "cell_free",
            Architecture::SmallCell => "small_cell",
            Architecture::Colocated => "colocated",
        };
        f.write_str(s)
    }
}

/// Training hyperparameters of the DDPG-family learners.
#[derive(Debug, Clone)]
pub struct RlConfig {
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub discount: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub warmup_transitions: usize,
    pub noise_sigma_init: f64,
    pub noise_sigma_decay: f64,
    pub noise_sigma_floor: f64,
}

impl Default for RlConfig {
    fn default() -> Self {
        Self {
            lr_actor: 1e-4,
            lr_critic: 1e-3,
            discount: 0.99,
            tau: 0.005,
            batch_size: 128,
            replay_capacity: 100_000,
            warmup_transitions: 1_000,
            noise_sigma_init: 0.2,
            noise_sigma_decay: 0.9995,
            noise_sigma_floor: 0.01,
        }
    }
}

/// Fractional power control constants.
#[derive(Debug, Clone)]
pub struct FpcConfig {
    /// Target receive power `p_0`, in watts.
    pub p0_w: f64,
    /// Path-gain compensation exponent.
    pub nu: f64,
}

impl Default for FpcConfig {
    fn default() -> Self {
        Self {
            p0_w: 10f64.powf((-35.0 - 30.0) / 10.0), // -35 dBm
            nu: 0.5,
        }
    }
}

/// Full experiment configuration. Defaults reproduce the 100-AP / 10-user
/// system; [`SystemConfig::desk_scale`] shrinks it to a laptop-sized setup.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    // Network geometry.
    pub ap_count: usize,
    pub user_count: usize,
    pub area_side_km: f64,
    pub cluster_fraction: f64,

    pub pathloss: PathLossConstants,
    pub radio: RadioConfig,
    pub compute: ComputeConfig,
    pub rl: RlConfig,
    pub fpc: FpcConfig,

    // Environment framing.
    pub steps_per_episode: usize,
    /// Reference SINR used to normalize the previous-rate observation.
    pub rate_norm_sinr: f64,
    /// Charge `p * step` of transmit energy when offloading is infeasible
    /// (rate zero with pending bits) and p > 0.
    pub infeasible_energy_charge: bool,

    // Run settings.
    pub algorithm: Algorithm,
    pub architecture: Architecture,
    pub episodes: usize,
    pub eval_episodes: usize,
    pub seed: u64,
    pub out_dir: String,
    pub moving_avg_window: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            ap_count: 100,
            user_count: 10,
            area_side_km: 1.0,
            cluster_fraction: 0.3,
            pathloss: PathLossConstants::default(),
            radio: RadioConfig::default(),
            compute: ComputeConfig::default(),
            rl: RlConfig::default(),
            fpc: FpcConfig::default(),
            steps_per_episode: 100,
            rate_norm_sinr: 1e3,
            infeasible_energy_charge: true,
            algorithm: Algorithm::Maddpg,
            architecture: Architecture::CellFree,
            episodes: 3000,
            eval_episodes: 100,
            seed: 1,
            out_dir: "runs/out".to_string(),
            moving_avg_window: 50,
        }
    }
}

impl SystemConfig {
    /// Reduced configuration (40 APs, 5 users, 800 episodes) that trains in
    /// minutes on a single CPU core.
    pub fn desk_scale() -> Self {
        Self {
            ap_count: 40,
            user_count: 5,
            episodes: 800,
            ..Self::default()
        }
    }

    /// Serving-cluster size implied by `cluster_fraction`.
    pub fn cluster_size(&self) -> usize {
        ((self.cluster_fraction * self.ap_count as f64).round() as usize).max(1)
    }

    /// Pilot sequence length; defaults to one orthogonal pilot per user.
    pub fn pilot_len(&self) -> usize {
        if self.radio.pilot_len == 0 {
            self.user_count
        } else {
            self.radio.pilot_len
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.ap_count == 0 || self.user_count == 0 {
            return err("ap_count and user_count must be positive".into());
        }
        if self.ap_count < self.user_count {
            return err(format!(
                "ap_count ({}) must be >= user_count ({})",
                self.ap_count, self.user_count
            ));
        }
        if !(self.cluster_fraction > 0.0 && self.cluster_fraction <= 1.0) {
            return err(format!(
                "cluster_fraction must lie in (0, 1], got {}",
                self.cluster_fraction
            ));
        }
        if self.area_side_km <= 0.0 {
            return err("area_side_km must be positive".into());
        }
        self.pathloss.validate()?;
        self.radio.validate()?;
        if self.pilot_len() < self.user_count {
            return err(format!(
                "pilot_len ({}) must be >= user_count ({}) for orthogonal pilots",
                self.pilot_len(),
                self.user_count
            ));
        }
        self.compute.validate()?;
        if self.rl.batch_size == 0 || self.rl.replay_capacity < self.rl.batch_size {
            return err("replay_capacity must be >= batch_size > 0".into());
        }
        if self.rl.warmup_transitions < self.rl.batch_size {
            return err("warmup_transitions must be >= batch_size".into());
        }
        if !(self.rl.discount >= 0.0 && self.rl.discount <= 1.0) {
            return err("discount must lie in [0, 1]".into());
        }
        if self.fpc.p0_w <= 0.0 || self.fpc.nu < 0.0 {
            return err("fpc constants must satisfy p0_w > 0, nu >= 0".into());
        }
        if self.steps_per_episode == 0 || self.episodes == 0 {
            return err("episodes and steps_per_episode must be positive".into());
        }
        Ok(())
    }

    /// Parse a flat `key = value` config file. Every key is optional; unknown
    /// keys are rejected so typos fail loudly.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_overrides(&text)
    }

    /// Apply `key = value` lines on top of the defaults.
    pub fn from_str_overrides(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, e)))?;
        }
        Ok(cfg)
    }

    /// Set a single configuration key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse::<T>()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
        }
        match key {
            "ap_count" => self.ap_count = num(key, value)?,
            "user_count" => self.user_count = num(key, value)?,
            "area_side_km" => self.area_side_km = num(key, value)?,
            "cluster_fraction" => self.cluster_fraction = num(key, value)?,
            "carrier_freq_mhz" => self.pathloss.carrier_freq_mhz = num(key, value)?,
            "ap_height_m" => self.pathloss.ap_height_m = num(key, value)?,
            "user_height_m" => self.pathloss.user_height_m = num(key, value)?,
            "d0_km" => self.pathloss.d0_km = num(key, value)?,
            "d1_km" => self.pathloss.d1_km = num(key, value)?,
            "shadow_std_db" => self.pathloss.shadow_std_db = num(key, value)?,
            "bandwidth_hz" => self.radio.bandwidth_hz = num(key, value)?,
            "noise_figure_db" => self.radio.noise_figure_db = num(key, value)?,
            "pilot_power_w" => self.radio.pilot_power_w = num(key, value)?,
            "pilot_len" => self.radio.pilot_len = num(key, value)?,
            "max_ul_power_w" => self.radio.max_ul_power_w = num(key, value)?,
            "coherence_ms" => self.radio.coherence_ms = num(key, value)?,
            "prelog_factor" => self.radio.prelog_factor = num(key, value)?,
            "cycles_per_bit" => self.compute.cycles_per_bit = num(key, value)?,
            "kappa" => self.compute.kappa = num(key, value)?,
            "f_local_max_hz" => self.compute.f_local_max_hz = num(key, value)?,
            "f_edge_hz" => self.compute.f_edge_hz = num(key, value)?,
            "deadline_s" => self.compute.deadline_s = num(key, value)?,
            "task_min_bits" => self.compute.task_min_bits = num(key, value)?,
            "task_max_bits" => self.compute.task_max_bits = num(key, value)?,
            "lr_actor" => self.rl.lr_actor = num(key, value)?,
            "lr_critic" => self.rl.lr_critic = num(key, value)?,
            "discount" => self.rl.discount = num(key, value)?,
            "tau" => self.rl.tau = num(key, value)?,
            "batch_size" => self.rl.batch_size = num(key, value)?,
            "replay_capacity" => self.rl.replay_capacity = num(key, value)?,
            "warmup_transitions" => self.rl.warmup_transitions = num(key, value)?,
            "noise_sigma_init" => self.rl.noise_sigma_init = num(key, value)?,
            "noise_sigma_decay" => self.rl.noise_sigma_decay = num(key, value)?,
            "noise_sigma_floor" => self.rl.noise_sigma_floor = num(key, value)?,
            "fpc_p0_dbm" => {
                let dbm: f64 = num(key, value)?;
                self.fpc.p0_w = 10f64.powf((dbm - 30.0) / 10.0);
            }
            "fpc_nu" => self.fpc.nu = num(key, value)?,
            "steps_per_episode" => self.steps_per_episode = num(key, value)?,
            "rate_norm_sinr" => self.rate_norm_sinr = num(key, value)?,
            "infeasible_energy_charge" => {
                self.infeasible_energy_charge = num::<bool>(key, value)?
            }
            "algorithm" => self.algorithm = value.parse()?,
            "architecture" => self.architecture = value.parse()?,
            "episodes" => self.episodes = num(key, value)?,
            "eval_episodes" => self.eval_episodes = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out_dir" => self.out_dir = value.to_string(),
            "moving_avg_window" => self.moving_avg_window = num(key, value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Render the fully resolved configuration as a config file. Written to
    /// the run manifest so any run can be replayed from its output directory.
    pub fn to_manifest_string(&self) -> String {
        let mut kv = BTreeMap::new();
        kv.insert("ap_count", self.ap_count.to_string());
        kv.insert("user_count", self.user_count.to_string());
        kv.insert("area_side_km", self.area_side_km.to_string());
        kv.insert("cluster_fraction", self.cluster_fraction.to_string());
        kv.insert("carrier_freq_mhz", self.pathloss.carrier_freq_mhz.to_string());
        kv.insert("ap_height_m", self.pathloss.ap_height_m.to_string());
        kv.insert("user_height_m", self.pathloss.user_height_m.to_string());
        kv.insert("d0_km", self.pathloss.d0_km.to_string());
        kv.insert("d1_km", self.pathloss.d1_km.to_string());
        kv.insert("shadow_std_db", self.pathloss.shadow_std_db.to_string());
        kv.insert("bandwidth_hz", self.radio.bandwidth_hz.to_string());
        kv.insert("noise_figure_db", self.radio.noise_figure_db.to_string());
        kv.insert("pilot_power_w", self.radio.pilot_power_w.to_string());
        kv.insert("pilot_len", self.radio.pilot_len.to_string());
        kv.insert("max_ul_power_w", self.radio.max_ul_power_w.to_string());
        kv.insert("coherence_ms", self.radio.coherence_ms.to_string());
        kv.insert("prelog_factor", self.radio.prelog_factor.to_string());
        kv.insert("cycles_per_bit", self.compute.cycles_per_bit.to_string());
        kv.insert("kappa", format!("{:e}", self.compute.kappa));
        kv.insert("f_local_max_hz", self.compute.f_local_max_hz.to_string());
        kv.insert("f_edge_hz", self.compute.f_edge_hz.to_string());
        kv.insert("deadline_s", self.compute.deadline_s.to_string());
        kv.insert("task_min_bits", self.compute.task_min_bits.to_string());
        kv.insert("task_max_bits", self.compute.task_max_bits.to_string());
        kv.insert("lr_actor", self.rl.lr_actor.to_string());
        kv.insert("lr_critic", self.rl.lr_critic.to_string());
        kv.insert("discount", self.rl.discount.to_string());
        kv.insert("tau", self.rl.tau.to_string());
        kv.insert("batch_size", self.rl.batch_size.to_string());
        kv.insert("replay_capacity", self.rl.replay_capacity.to_string());
        kv.insert("warmup_transitions", self.rl.warmup_transitions.to_string());
        kv.insert("noise_sigma_init", self.rl.noise_sigma_init.to_string());
        kv.insert("noise_sigma_decay", self.rl.noise_sigma_decay.to_string());
        kv.insert("noise_sigma_floor", self.rl.noise_sigma_floor.to_string());
        kv.insert("fpc_p0_dbm", {
            let dbm = 10.0 * self.fpc.p0_w.log10() + 30.0;
            format!("{dbm}")
        });
        kv.insert("fpc_nu", self.fpc.nu.to_string());
        kv.insert("steps_per_episode", self.steps_per_episode.to_string());
        kv.insert("rate_norm_sinr", self.rate_norm_sinr.to_string());
        kv.insert(
            "infeasible_energy_charge",
            self.infeasible_energy_charge.to_string(),
        );
        kv.insert("algorithm", self.algorithm.to_string());
        kv.insert("architecture", self.architecture.to_string());
        kv.insert("episodes", self.episodes.to_string());
        kv.insert("eval_episodes", self.eval_episodes.to_string());
        kv.insert("seed", self.seed.to_string());
        kv.insert("out_dir", self.out_dir.clone());
        kv.insert("moving_avg_window", self.moving_avg_window.to_string());

        let mut out = String::new();
        for (k, v) in kv {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}
