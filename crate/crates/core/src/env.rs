//! The shared multi-agent environment: task arrivals, joint-action
//! collection, physical-layer and compute-model evaluation, and the
//! cooperative energy reward.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Uniform;

use crate::compute::{self, ComputeConfig, UserCosts};
use crate::config::SystemConfig;
use crate::phy::{self, NetworkScenario, RadioConfig};
use crate::rng::{self, Stream};

/// What one agent sees at the start of a step: its fresh task, its deadline
/// and the uplink rate it achieved in the previous step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub task_bits: f64,
    pub deadline_s: f64,
    pub prev_rate_bps: f64,
    /// `[task / task_max, deadline / step, rate / rate_norm]`, clipped to
    /// [0, 1]; this is the form fed to the networks.
    pub normalized: [f64; 3],
}

/// Joint resource-allocation decision of one agent: the fraction of maximum
/// local speed and the fraction of maximum uplink power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub alpha: f64,
    pub eta: f64,
}

impl Action {
    /// Actions arrive noise-perturbed; out-of-range values are clipped, not
    /// rejected.
    pub fn clipped(self) -> Action {
        Action {
            alpha: self.alpha.clamp(0.0, 1.0),
            eta: self.eta.clamp(0.0, 1.0),
        }
    }
}

/// Concatenation of all normalized observations in agent-index order.
pub type FullState = Vec<f64>;

/// Everything measurable about one environment step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub per_user: Vec<UserCosts>,
    /// Cooperative reward shared by every agent.
    pub reward: f64,
}

/// Result of advancing the environment by one step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observations: Vec<Observation>,
    /// Identical entry per agent; kept per-agent to mirror the interface the
    /// learners consume.
    pub rewards: Vec<f64>,
    pub outcome: StepOutcome,
    pub done: bool,
}

/// Deadline-miss penalty factor on a user's energy in the reward.
pub const MISS_PENALTY: f64 = 10.0;

/// Cooperative reward: the negated penalty-weighted total energy in
/// millijoules. Meeting users count their energy once, missing users ten
/// times over.
pub fn cooperative_reward(per_user: &[UserCosts]) -> f64 {
    -per_user
        .iter()
        .map(|u| {
            let xi = if u.deadline_met { 1.0 } else { MISS_PENALTY };
            xi * u.e_total_j * 1e3
        })
        .sum::<f64>()
}

/// The simulated mobile edge network as seen by the learning agents. One
/// instance is single-threaded; `step` mutates internal state.
pub struct MecEnv {
    scenario: NetworkScenario,
    radio: RadioConfig,
    compute: ComputeConfig,
    pilot_len: usize,
    deadlines_s: Vec<f64>,
    step_len_s: f64,
    horizon: usize,
    rate_norm_bps: f64,
    max_power_w: f64,
    infeasible_energy_charge: bool,
    noise_power_w: f64,
    rng_channels: ChaCha8Rng,
    rng_tasks: ChaCha8Rng,
    task_dist: Uniform<f64>,
    observations: Vec<Observation>,
    step_idx: usize,
}

impl MecEnv {
    /// Build an environment over a fixed scenario. The large-scale fading is
    /// frozen for the environment's lifetime; small-scale fading and task
    /// sizes are redrawn every step from streams derived from `seed`.
    pub fn new(scenario: NetworkScenario, cfg: &SystemConfig, seed: u64) -> Self {
        Self::with_streams(scenario, cfg, seed, Stream::Channels, Stream::Tasks)
    }

    /// Same as [`MecEnv::new`] but drawing from the evaluation streams, so
    /// evaluation never perturbs or reuses training randomness.
    pub fn new_eval(scenario: NetworkScenario, cfg: &SystemConfig, seed: u64) -> Self {
        Self::with_streams(scenario, cfg, seed, Stream::EvalChannels, Stream::EvalTasks)
    }

    fn with_streams(
        scenario: NetworkScenario,
        cfg: &SystemConfig,
        seed: u64,
        ch_stream: Stream,
        task_stream: Stream,
    ) -> Self {
        let users = scenario.user_count();
        let step_len_s = cfg.radio.coherence_ms * 1e-3;
        Self {
            radio: cfg.radio.clone(),
            compute: cfg.compute.clone(),
            pilot_len: cfg.pilot_len(),
            deadlines_s: vec![cfg.compute.deadline_s; users],
            step_len_s,
            horizon: cfg.steps_per_episode,
            rate_norm_bps: cfg.radio.bandwidth_hz * (1.0 + cfg.rate_norm_sinr).log2(),
            max_power_w: cfg.radio.max_ul_power_w,
            infeasible_energy_charge: cfg.infeasible_energy_charge,
            noise_power_w: cfg.radio.noise_power_w(),
            rng_channels: rng::stream_rng(seed, ch_stream),
            rng_tasks: rng::stream_rng(seed, task_stream),
            task_dist: Uniform::new_inclusive(cfg.compute.task_min_bits, cfg.compute.task_max_bits),
            observations: Vec::new(),
            scenario,
            step_idx: 0,
        }
    }

    /// Override the uniform deadline with per-user values.
    pub fn set_deadlines(&mut self, deadlines_s: Vec<f64>) {
        assert_eq!(deadlines_s.len(), self.user_count());
        self.deadlines_s = deadlines_s;
    }

    pub fn user_count(&self) -> usize {
        self.scenario.user_count()
    }

    pub fn scenario(&self) -> &NetworkScenario {
        &self.scenario
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn observe(&mut self, prev_rates: &[f64]) {
        let obs = (0..self.user_count())
            .map(|k| {
                let task_bits = self.rng_tasks.sample(self.task_dist);
                let deadline_s = self.deadlines_s[k];
                let prev_rate_bps = prev_rates[k];
                let normalized = [
                    (task_bits / self.compute.task_max_bits).clamp(0.0, 1.0),
                    (deadline_s / self.step_len_s).clamp(0.0, 1.0),
                    (prev_rate_bps / self.rate_norm_bps).clamp(0.0, 1.0),
                ];
                Observation {
                    task_bits,
                    deadline_s,
                    prev_rate_bps,
                    normalized,
                }
            })
            .collect();
        self.observations = obs;
    }

    /// Start a new episode: fresh tasks, zeroed previous rates, step counter
    /// reset. Randomness continues from the environment's streams.
    pub fn reset(&mut self) -> Vec<Observation> {
        self.step_idx = 0;
        let zeros = vec![0.0; self.user_count()];
        self.observe(&zeros);
        self.observations.clone()
    }

    /// Snapshot of all current observations in agent-index order, normalized
    /// entries only. Unchanged between `step` calls.
    pub fn full_state(&self) -> FullState {
        let mut state = Vec::with_capacity(3 * self.observations.len());
        for o in &self.observations {
            state.extend_from_slice(&o.normalized);
        }
        state
    }

    /// Advance one step under the joint action. Fresh fading is drawn, rates
    /// are computed jointly from the full power vector, the compute model is
    /// evaluated with proportional edge sharing, and every agent receives the
    /// same cooperative reward.
    pub fn step(&mut self, joint_action: &[Action]) -> StepResult {
        assert_eq!(joint_action.len(), self.user_count());
        assert!(
            self.step_idx < self.horizon,
            "episode horizon exhausted; call reset()"
        );
        let users = self.user_count();
        let actions: Vec<Action> = joint_action.iter().map(|a| a.clipped()).collect();

        let ch = phy::draw_channels(
            &self.scenario,
            &self.radio,
            self.pilot_len,
            &mut self.rng_channels,
        );
        let powers: Vec<f64> = actions.iter().map(|a| a.eta * self.max_power_w).collect();
        let sinr = phy::uplink_sinr(&powers, &ch, &self.scenario.clusters, self.noise_power_w);
        let rates: Vec<f64> = sinr
            .iter()
            .map(|&g| phy::achievable_rate(g, self.radio.bandwidth_hz, self.radio.prelog_factor))
            .collect();

        let splits: Vec<_> = (0..users)
            .map(|k| {
                compute::split_task(
                    self.observations[k].task_bits,
                    actions[k].alpha,
                    self.deadlines_s[k],
                    &self.compute,
                )
            })
            .collect();
        let offloads: Vec<f64> = splits.iter().map(|s| s.offload_bits).collect();
        let edge_shares = compute::edge_allocation(&offloads, self.compute.f_edge_hz);

        let per_user: Vec<UserCosts> = (0..users)
            .map(|k| {
                let (t_local, e_local) =
                    compute::local_cost(&splits[k], self.deadlines_s[k], &self.compute);
                let (t_tr, t_comp, t_off, e_off) = compute::offload_cost(
                    splits[k].offload_bits,
                    rates[k],
                    edge_shares[k],
                    powers[k],
                    self.compute.cycles_per_bit,
                    self.step_len_s,
                    self.infeasible_energy_charge,
                );
                compute::combine(
                    rates[k],
                    t_local,
                    e_local,
                    t_tr,
                    t_comp,
                    t_off,
                    e_off,
                    self.deadlines_s[k],
                )
            })
            .collect();

        let reward = cooperative_reward(&per_user);
        self.step_idx += 1;
        let done = self.step_idx >= self.horizon;
        self.observe(&rates);

        StepResult {
            observations: self.observations.clone(),
            rewards: vec![reward; users],
            outcome: StepOutcome { per_user, reward },
            done,
        }
    }
}
