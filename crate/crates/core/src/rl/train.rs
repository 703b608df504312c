//! Training loops. MADDPG and the centralized DDPG baseline share one loop:
//! a learner is an agent owning a slice of the full state (its observation)
//! and a slice of the joint action. MADDPG uses K local learners; the
//! centralized baseline is a single learner spanning everything, which makes
//! the two algorithms structurally identical at K = 1.

use std::ops::Range;

use crate::config::SystemConfig;
use crate::env::{Action, MecEnv};
use crate::harness::EpisodeMetrics;
use crate::rl::agent::{AgentBundle, SlotActor};
use crate::rl::mlp::{Mlp, Real};
use crate::rl::replay::Transition;
use crate::Result;

/// Observation dimension per user.
pub const OBS_DIM: usize = 3;
/// Action dimension per user.
pub const ACT_DIM: usize = 2;

/// One learning agent plus the state/action slices it owns.
pub struct Learner<T> {
    pub obs_range: Range<usize>,
    pub act_range: Range<usize>,
    pub bundle: AgentBundle<T>,
}

impl<T: Real> Learner<T> {
    /// Exploration-free copies of the current actors, widened to f64 for
    /// checkpointing and evaluation.
    pub fn actor_f64(&self) -> Mlp<f64> {
        self.bundle.actor.convert()
    }
}

/// K decentralized learners: agent k observes its own 3 entries and controls
/// its own 2 action entries, while every critic sees the full state and the
/// joint action.
pub fn maddpg_learners<T: Real>(cfg: &SystemConfig) -> Vec<Learner<T>> {
    let k = cfg.user_count;
    let critic_in = k * OBS_DIM + k * ACT_DIM;
    (0..k)
        .map(|i| Learner {
            obs_range: i * OBS_DIM..(i + 1) * OBS_DIM,
            act_range: i * ACT_DIM..(i + 1) * ACT_DIM,
            bundle: AgentBundle::new(OBS_DIM, ACT_DIM, critic_in, &cfg.rl, cfg.seed, i as u64),
        })
        .collect()
}

/// A single centralized learner observing the full state and emitting the
/// whole joint action.
pub fn central_learner<T: Real>(cfg: &SystemConfig) -> Vec<Learner<T>> {
    let k = cfg.user_count;
    let state_dim = k * OBS_DIM;
    let act_dim = k * ACT_DIM;
    vec![Learner {
        obs_range: 0..state_dim,
        act_range: 0..act_dim,
        bundle: AgentBundle::new(state_dim, act_dim, state_dim + act_dim, &cfg.rl, cfg.seed, 0),
    }]
}

fn joint_to_actions(joint: &[f64]) -> Vec<Action> {
    joint
        .chunks_exact(ACT_DIM)
        .map(|c| Action {
            alpha: c[0],
            eta: c[1],
        })
        .collect()
}

/// Run `cfg.episodes` training episodes, invoking `on_episode` after each one
/// (the harness streams metrics to disk there).
pub fn train_learners<T: Real>(
    env: &mut MecEnv,
    learners: &mut [Learner<T>],
    cfg: &SystemConfig,
    mut on_episode: impl FnMut(&EpisodeMetrics) -> Result<()>,
) -> Result<Vec<EpisodeMetrics>> {
    let users = env.user_count();
    let act_total = users * ACT_DIM;
    let horizon = env.horizon();
    let step_len_s = cfg.radio.coherence_ms * 1e-3;
    let discount = T::from_f64(cfg.rl.discount);
    let tau = T::from_f64(cfg.rl.tau);
    let batch_size = cfg.rl.batch_size;
    let warmup = cfg.rl.warmup_transitions;
    let mut history = Vec::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        env.reset();
        let mut reward_total = 0.0;
        let mut met = 0usize;
        let mut energy_sum = 0.0;
        let mut latency_sum = 0.0;

        for _ in 0..horizon {
            let state = env.full_state();
            let mut joint = vec![0.0f64; act_total];
            for l in learners.iter_mut() {
                let a = l.bundle.act(&state[l.obs_range.clone()], true);
                joint[l.act_range.clone()].copy_from_slice(&a);
            }
            let res = env.step(&joint_to_actions(&joint));
            let next_state = env.full_state();

            let state_t: Box<[T]> = state.iter().map(|&v| T::from_f64(v)).collect();
            let action_t: Box<[T]> = joint.iter().map(|&v| T::from_f64(v)).collect();
            let next_t: Box<[T]> = next_state.iter().map(|&v| T::from_f64(v)).collect();
            // the reward is shared, every learner stores the same scalar
            let reward_t = T::from_f64(res.rewards[0]);
            for l in learners.iter_mut() {
                l.bundle.buffer.push(Transition {
                    state: state_t.clone(),
                    action: action_t.clone(),
                    reward: reward_t,
                    next_state: next_t.clone(),
                });
            }

            if learners[0].bundle.buffer.len() >= warmup {
                update_round(learners, discount, tau, batch_size);
            }

            reward_total += res.rewards[0];
            for u in &res.outcome.per_user {
                if u.deadline_met {
                    met += 1;
                }
                energy_sum += u.e_total_j;
                latency_sum += u.t_total_s.min(step_len_s);
            }
        }

        for l in learners.iter_mut() {
            l.bundle.decay_noise();
        }
        let opportunities = (horizon * users) as f64;
        let metrics = EpisodeMetrics {
            episode,
            reward: reward_total,
            success_rate: met as f64 / opportunities,
            mean_energy_j: energy_sum / opportunities,
            mean_latency_s: latency_sum / opportunities,
        };
        on_episode(&metrics)?;
        history.push(metrics);
    }
    Ok(history)
}

/// One critic + actor + target cycle per learner. All updates in the round
/// read the same pre-round snapshot of every actor and target actor.
fn update_round<T: Real>(learners: &mut [Learner<T>], discount: T, tau: T, batch_size: usize) {
    let current: Vec<Mlp<T>> = learners.iter().map(|l| l.bundle.actor.clone()).collect();
    let targets: Vec<Mlp<T>> = learners
        .iter()
        .map(|l| l.bundle.target_actor.clone())
        .collect();
    let obs_ranges: Vec<Range<usize>> = learners.iter().map(|l| l.obs_range.clone()).collect();
    let act_ranges: Vec<Range<usize>> = learners.iter().map(|l| l.act_range.clone()).collect();

    for l in learners.iter_mut() {
        let indices = {
            let bundle = &mut l.bundle;
            let idx = bundle
                .buffer
                .sample_indices(&mut bundle.sample_rng, batch_size);
            idx
        };
        let batch = l.bundle.gather(&indices);

        let target_slots: Vec<SlotActor<'_, T>> = targets
            .iter()
            .enumerate()
            .map(|(j, net)| SlotActor {
                obs_range: obs_ranges[j].clone(),
                act_range: act_ranges[j].clone(),
                net,
            })
            .collect();
        l.bundle.critic_update(&batch, &target_slots, discount);

        let current_slots: Vec<SlotActor<'_, T>> = current
            .iter()
            .enumerate()
            .map(|(j, net)| SlotActor {
                obs_range: obs_ranges[j].clone(),
                act_range: act_ranges[j].clone(),
                net,
            })
            .collect();
        l.bundle.actor_update(
            &batch,
            &current_slots,
            l.obs_range.clone(),
            l.act_range.clone(),
        );

        l.bundle.update_targets(tau);
    }
}

/// Train K decentralized agents with centralized critics.
pub fn train_maddpg(
    env: &mut MecEnv,
    cfg: &SystemConfig,
    on_episode: impl FnMut(&EpisodeMetrics) -> Result<()>,
) -> Result<(Vec<Learner<f32>>, Vec<EpisodeMetrics>)> {
    let mut learners = maddpg_learners::<f32>(cfg);
    let history = train_learners(env, &mut learners, cfg, on_episode)?;
    Ok((learners, history))
}

/// Train the single centralized agent over the same environment.
pub fn train_ddpg_centralized(
    env: &mut MecEnv,
    cfg: &SystemConfig,
    on_episode: impl FnMut(&EpisodeMetrics) -> Result<()>,
) -> Result<(Vec<Learner<f32>>, Vec<EpisodeMetrics>)> {
    let mut learners = central_learner::<f32>(cfg);
    let history = train_learners(env, &mut learners, cfg, on_episode)?;
    Ok((learners, history))
}
