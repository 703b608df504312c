//! One learning agent: actor/critic pair, their targets, optimizers, replay
//! buffer and exploration noise, plus the deterministic-policy-gradient
//! update rules.

use std::ops::Range;

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::adam::AdamState;
use super::mlp::{soft_update, Mlp, MlpGrads, OutputActivation, Real, HIDDEN_LAYERS};
use super::replay::ReplayBuffer;
use crate::config::RlConfig;
use crate::rng::{self, Stream};

/// A snapshot view of one agent's actor together with the slices of the full
/// state / joint action it reads and writes. Updates of all agents in a round
/// run against the same snapshot.
pub struct SlotActor<'a, T> {
    pub obs_range: Range<usize>,
    pub act_range: Range<usize>,
    pub net: &'a Mlp<T>,
}

/// Sampled mini-batch in matrix form; rows are transitions.
pub struct Batch<T> {
    pub states: Array2<T>,
    pub actions: Array2<T>,
    pub rewards: Array1<T>,
    pub next_states: Array2<T>,
}

/// Actor/critic pair with targets, Adam states, replay buffer and noise.
pub struct AgentBundle<T> {
    pub actor: Mlp<T>,
    pub critic: Mlp<T>,
    pub target_actor: Mlp<T>,
    pub target_critic: Mlp<T>,
    pub adam_actor: AdamState<T>,
    pub adam_critic: AdamState<T>,
    pub buffer: ReplayBuffer<T>,
    pub noise_sigma: f64,
    noise_decay: f64,
    noise_floor: f64,
    noise_rng: ChaCha8Rng,
    pub sample_rng: ChaCha8Rng,
}

impl<T: Real> AgentBundle<T> {
    /// Build an agent with freshly initialized networks: actor
    /// `obs_dim -> 128 -> 64 -> 64 -> act_dim` with logistic output, critic
    /// `critic_input_dim -> 128 -> 64 -> 64 -> 1` with identity output.
    /// Targets start as exact copies.
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        critic_input_dim: usize,
        rl: &RlConfig,
        master_seed: u64,
        agent_idx: u64,
    ) -> Self {
        let mut init_rng = rng::stream_rng(master_seed, Stream::AgentInit(agent_idx));
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend_from_slice(&HIDDEN_LAYERS);
        actor_sizes.push(act_dim);
        let mut critic_sizes = vec![critic_input_dim];
        critic_sizes.extend_from_slice(&HIDDEN_LAYERS);
        critic_sizes.push(1);

        // Last actor layer scaled down so initial actions sit near 0.5.
        let actor = Mlp::new(&actor_sizes, OutputActivation::Logistic, 0.1, &mut init_rng);
        let critic = Mlp::new(&critic_sizes, OutputActivation::Identity, 1.0, &mut init_rng);
        let target_actor = actor.clone();
        let target_critic = critic.clone();
        let adam_actor = AdamState::new(&actor, rl.lr_actor);
        let adam_critic = AdamState::new(&critic, rl.lr_critic);
        Self {
            actor,
            critic,
            target_actor,
            target_critic,
            adam_actor,
            adam_critic,
            buffer: ReplayBuffer::new(rl.replay_capacity),
            noise_sigma: rl.noise_sigma_init,
            noise_decay: rl.noise_sigma_decay,
            noise_floor: rl.noise_sigma_floor,
            noise_rng: rng::stream_rng(master_seed, Stream::AgentNoise(agent_idx)),
            sample_rng: rng::stream_rng(master_seed, Stream::AgentSample(agent_idx)),
        }
    }

    /// Map the agent's own observation to an action in `[0,1]^d`; with
    /// exploration a Gaussian perturbation is added before clipping. Note the
    /// signature: only the local observation is available here.
    pub fn act(&mut self, observation: &[f64], explore: bool) -> Vec<f64> {
        let input = Array1::from_iter(observation.iter().map(|&v| T::from_f64(v)));
        let out = self.actor.forward(input.view());
        out.iter()
            .map(|&v| {
                let mut a = v.as_f64();
                if explore {
                    let z: f64 = self.noise_rng.sample(StandardNormal);
                    a += self.noise_sigma * z;
                }
                a.clamp(0.0, 1.0)
            })
            .collect()
    }

    /// Episode-boundary exploration decay down to the configured floor.
    pub fn decay_noise(&mut self) {
        self.noise_sigma = (self.noise_sigma * self.noise_decay).max(self.noise_floor);
    }

    /// TD-target critic loss and its exact parameter gradient:
    /// `L = (1/B) sum_i (y_i - Q(s_i, a_i))^2` with
    /// `y_i = r_i + discount * Q'(s'_i, a'_i)` and next actions taken from the
    /// agents' target actors.
    pub fn critic_gradient(
        &self,
        batch: &Batch<T>,
        target_actors: &[SlotActor<'_, T>],
        discount: T,
    ) -> (f64, MlpGrads<T>) {
        let b = batch.states.nrows();
        let act_total = batch.actions.ncols();

        let mut next_actions = Array2::zeros((b, act_total));
        for slot in target_actors {
            let obs = batch
                .next_states
                .slice(ndarray::s![.., slot.obs_range.clone()])
                .to_owned();
            let cache = slot.net.forward_batch(&obs);
            next_actions
                .slice_mut(ndarray::s![.., slot.act_range.clone()])
                .assign(cache.output());
        }

        let next_input = concatenate(
            Axis(1),
            &[batch.next_states.view(), next_actions.view()],
        )
        .expect("state/action widths are fixed");
        let q_next = self.target_critic.forward_batch(&next_input);
        let q_next = q_next.output();

        let input = concatenate(Axis(1), &[batch.states.view(), batch.actions.view()])
            .expect("state/action widths are fixed");
        let cache = self.critic.forward_batch(&input);
        let q = cache.output();

        let inv_b = T::from_f64(1.0 / b as f64);
        let mut loss = T::zero();
        let mut d_q = Array2::zeros((b, 1));
        for i in 0..b {
            let y = batch.rewards[i] + discount * q_next[[i, 0]];
            let resid = q[[i, 0]] - y;
            loss = loss + resid * resid * inv_b;
            d_q[[i, 0]] = T::from_f64(2.0) * resid * inv_b;
        }
        let (grads, _) = self.critic.backward_batch(&cache, &d_q);
        (loss.as_f64(), grads)
    }

    /// One Adam step on the critic; returns the pre-step loss.
    pub fn critic_update(
        &mut self,
        batch: &Batch<T>,
        target_actors: &[SlotActor<'_, T>],
        discount: T,
    ) -> f64 {
        let (loss, grads) = self.critic_gradient(batch, target_actors, discount);
        self.adam_critic.apply(&mut self.critic, &grads);
        loss
    }

    /// Deterministic policy gradient of the batch-mean critic value with the
    /// agent's own action slot replaced by its current policy and every other
    /// slot filled from the other agents' current actors. Returned as the
    /// gradient of the *negated* objective, ready for a descent step.
    pub fn policy_gradient(
        &self,
        batch: &Batch<T>,
        current_actors: &[SlotActor<'_, T>],
        own_obs: Range<usize>,
        own_act: Range<usize>,
    ) -> MlpGrads<T> {
        let b = batch.states.nrows();
        let state_dim = batch.states.ncols();
        let act_total = batch.actions.ncols();

        let mut actions = Array2::zeros((b, act_total));
        for slot in current_actors {
            if slot.act_range == own_act {
                continue;
            }
            let obs = batch
                .states
                .slice(ndarray::s![.., slot.obs_range.clone()])
                .to_owned();
            let cache = slot.net.forward_batch(&obs);
            actions
                .slice_mut(ndarray::s![.., slot.act_range.clone()])
                .assign(cache.output());
        }
        let own_in = batch
            .states
            .slice(ndarray::s![.., own_obs.clone()])
            .to_owned();
        let own_cache = self.actor.forward_batch(&own_in);
        actions
            .slice_mut(ndarray::s![.., own_act.clone()])
            .assign(own_cache.output());

        let input = concatenate(Axis(1), &[batch.states.view(), actions.view()])
            .expect("state/action widths are fixed");
        let critic_cache = self.critic.forward_batch(&input);
        // Maximize mean Q == descend on -mean Q.
        let d_q = Array2::from_elem((b, 1), T::from_f64(-1.0 / b as f64));
        let (_, d_input) = self.critic.backward_batch(&critic_cache, &d_q);

        let d_own = d_input
            .slice(ndarray::s![
                ..,
                state_dim + own_act.start..state_dim + own_act.end
            ])
            .to_owned();
        let (grads, _) = self.actor.backward_batch(&own_cache, &d_own);
        grads
    }

    /// One Adam ascent step on the actor along the policy gradient; returns
    /// the gradient norm.
    pub fn actor_update(
        &mut self,
        batch: &Batch<T>,
        current_actors: &[SlotActor<'_, T>],
        own_obs: Range<usize>,
        own_act: Range<usize>,
    ) -> f64 {
        let grads = self.policy_gradient(batch, current_actors, own_obs, own_act);
        let norm = grads.l2_norm();
        self.adam_actor.apply(&mut self.actor, &grads);
        norm
    }

    /// Soft-update both targets toward the mains.
    pub fn update_targets(&mut self, tau: T) {
        soft_update(&mut self.target_actor, &self.actor, tau);
        soft_update(&mut self.target_critic, &self.critic, tau);
    }

    /// Assemble a mini-batch from the agent's buffer at the given indices.
    pub fn gather(&self, indices: &[usize]) -> Batch<T>
    where
        T: Copy,
    {
        let b = indices.len();
        let first = self.buffer.get(indices[0]);
        let state_dim = first.state.len();
        let act_dim = first.action.len();
        let mut states = Array2::zeros((b, state_dim));
        let mut actions = Array2::zeros((b, act_dim));
        let mut rewards = Array1::zeros(b);
        let mut next_states = Array2::zeros((b, state_dim));
        for (row, &idx) in indices.iter().enumerate() {
            let t = self.buffer.get(idx);
            for (j, &v) in t.state.iter().enumerate() {
                states[[row, j]] = v;
            }
            for (j, &v) in t.action.iter().enumerate() {
                actions[[row, j]] = v;
            }
            rewards[row] = t.reward;
            for (j, &v) in t.next_state.iter().enumerate() {
                next_states[[row, j]] = v;
            }
        }
        Batch {
            states,
            actions,
            rewards,
            next_states,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::replay::Transition;
    use ndarray::array;

    fn rl_cfg() -> RlConfig {
        RlConfig::default()
    }

    fn bundle_k1() -> AgentBundle<f64> {
        // K = 1: obs 3, act 2, critic input 5
        AgentBundle::new(3, 2, 5, &rl_cfg(), 7, 0)
    }

    #[test]
    fn targets_start_as_exact_copies() {
        let b = bundle_k1();
        assert_eq!(b.actor.weights[0], b.target_actor.weights[0]);
        assert_eq!(b.critic.biases[2], b.target_critic.biases[2]);
    }

    #[test]
    fn act_is_deterministic_without_exploration() {
        let mut b = bundle_k1();
        let o = [0.4, 1.0, 0.0];
        let a1 = b.act(&o, false);
        let a2 = b.act(&o, false);
        assert_eq!(a1, a2);
        for v in a1 {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn exploration_stays_clipped_even_with_huge_noise() {
        let mut b = bundle_k1();
        b.noise_sigma = 50.0;
        for _ in 0..100 {
            for v in b.act(&[0.1, 1.0, 0.3], true) {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn noise_schedule_decays_to_floor() {
        let mut b = bundle_k1();
        assert_eq!(b.noise_sigma, 0.2);
        b.decay_noise();
        assert!((b.noise_sigma - 0.2 * 0.9995).abs() < 1e-15);
        for _ in 0..20_000 {
            b.decay_noise();
        }
        assert_eq!(b.noise_sigma, 0.01);
    }

    fn zero_fill(net: &mut Mlp<f64>) {
        for w in &mut net.weights {
            w.fill(0.0);
        }
        for b in &mut net.biases {
            b.fill(0.0);
        }
    }

    fn constant_batch(b: usize, reward: f64) -> Batch<f64> {
        Batch {
            states: Array2::from_elem((b, 3), 0.5),
            actions: Array2::from_elem((b, 2), 0.5),
            rewards: Array1::from_elem(b, reward),
            next_states: Array2::from_elem((b, 3), 0.5),
        }
    }

    #[test]
    fn critic_target_arithmetic_and_zero_loss_fixed_point() {
        let mut bundle = bundle_k1();
        // target critic emits a constant -2 regardless of input
        zero_fill(&mut bundle.target_critic);
        *bundle.target_critic.biases.last_mut().unwrap() = array![-2.0];
        // main critic already equals the target value y = -1 + 0.99*(-2)
        zero_fill(&mut bundle.critic);
        *bundle.critic.biases.last_mut().unwrap() = array![-2.98];

        let batch = constant_batch(4, -1.0);
        let before = bundle.critic.clone();
        let target_snapshot = bundle.target_actor.clone();
        let slots = [SlotActor {
            obs_range: 0..3,
            act_range: 0..2,
            net: &target_snapshot,
        }];
        let (loss, grads) = bundle.critic_gradient(&batch, &slots, 0.99);
        assert!(loss.abs() < 1e-24, "loss {loss}");
        assert!(grads.l2_norm() < 1e-12);
        let loss = bundle.critic_update(&batch, &slots, 0.99);
        assert!(loss.abs() < 1e-24);
        assert_eq!(bundle.critic.weights[0], before.weights[0]);
        assert_eq!(bundle.critic.biases[3], before.biases[3]);
    }

    #[test]
    fn critic_loss_matches_naive_mean_of_squared_residuals() {
        let mut bundle = bundle_k1();
        let b = 16;
        let mut batch = constant_batch(b, 0.0);
        // randomize the batch a little
        for i in 0..b {
            for j in 0..3 {
                batch.states[[i, j]] = (i * 3 + j) as f64 * 0.017 % 1.0;
                batch.next_states[[i, j]] = (i * 3 + j) as f64 * 0.029 % 1.0;
            }
            for j in 0..2 {
                batch.actions[[i, j]] = (i * 2 + j) as f64 * 0.013 % 1.0;
            }
            batch.rewards[i] = -(i as f64) * 0.1;
        }
        let target_snapshot = bundle.target_actor.clone();
        let slots = [SlotActor {
            obs_range: 0..3,
            act_range: 0..2,
            net: &target_snapshot,
        }];
        let (loss, _) = bundle.critic_gradient(&batch, &slots, 0.99);

        // independent per-sample loop over single forwards
        let mut manual = 0.0;
        for i in 0..b {
            let next_obs = batch.next_states.row(i);
            let next_act = bundle.target_actor.forward(next_obs);
            let mut next_in = next_obs.to_vec();
            next_in.extend(next_act.iter());
            let q_next = bundle
                .target_critic
                .forward(Array1::from_vec(next_in).view())[0];
            let y = batch.rewards[i] + 0.99 * q_next;
            let mut cur = batch.states.row(i).to_vec();
            cur.extend(batch.actions.row(i).iter());
            let q = bundle.critic.forward(Array1::from_vec(cur).view())[0];
            manual += (y - q) * (y - q);
        }
        manual /= b as f64;
        assert!((loss - manual).abs() <= 1e-10, "{loss} vs {manual}");
        bundle.critic_update(&batch, &slots, 0.99);
    }

    #[test]
    fn action_blind_critic_freezes_actor() {
        let mut bundle = bundle_k1();
        // zero the first-layer weights that touch the action columns (3..5)
        for mut row in bundle.critic.weights[0].rows_mut() {
            row[3] = 0.0;
            row[4] = 0.0;
        }
        let before = bundle.actor.clone();
        let batch = constant_batch(8, -1.0);
        let actor_snapshot = bundle.actor.clone();
        let slots = [SlotActor {
            obs_range: 0..3,
            act_range: 0..2,
            net: &actor_snapshot,
        }];
        let norm = bundle.actor_update(&batch, &slots, 0..3, 0..2);
        assert_eq!(norm, 0.0);
        assert_eq!(bundle.actor.weights[0], before.weights[0]);
        assert_eq!(bundle.actor.biases[3], before.biases[3]);
    }

    #[test]
    fn actor_climbs_to_surrogate_optimum() {
        // Critic computing exactly -|alpha - 0.7|: the policy should drive
        // its first action component to 0.7 from any start.
        let mut bundle = bundle_k1();
        zero_fill(&mut bundle.critic);
        // layer 0 (128 x 5): two rectifier units implement |alpha - 0.7|
        bundle.critic.weights[0][[0, 3]] = 1.0;
        bundle.critic.biases[0][0] = -0.7;
        bundle.critic.weights[0][[1, 3]] = -1.0;
        bundle.critic.biases[0][1] = 0.7;
        // layer 1 folds them together, layer 2 passes through
        bundle.critic.weights[1][[0, 0]] = 1.0;
        bundle.critic.weights[1][[0, 1]] = 1.0;
        bundle.critic.weights[2][[0, 0]] = 1.0;
        // output negates
        bundle.critic.weights[3][[0, 0]] = -1.0;

        bundle.adam_actor.lr = 0.01;
        let batch = constant_batch(4, 0.0);
        for _ in 0..2000 {
            let snapshot = bundle.actor.clone();
            let slots = [SlotActor {
                obs_range: 0..3,
                act_range: 0..2,
                net: &snapshot,
            }];
            bundle.actor_update(&batch, &slots, 0..3, 0..2);
        }
        let a = bundle.act(&[0.5, 0.5, 0.5], false);
        assert!((a[0] - 0.7).abs() < 0.02, "alpha converged to {}", a[0]);
    }

    #[test]
    fn policy_gradient_matches_finite_differences() {
        // d/dtheta of mean_B Q(s, mu(o)) on a small random net, against
        // central differences through the full chain.
        let mut bundle = AgentBundle::<f64>::new(3, 2, 5, &rl_cfg(), 99, 0);
        let b = 4;
        let mut batch = constant_batch(b, 0.0);
        for i in 0..b {
            for j in 0..3 {
                batch.states[[i, j]] = 0.1 + 0.2 * ((i + j) as f64 % 4.0);
            }
        }

        let objective = |actor: &Mlp<f64>, critic: &Mlp<f64>| -> f64 {
            let mut total = 0.0;
            for i in 0..b {
                let obs = batch.states.row(i);
                let act = actor.forward(obs);
                let mut input = obs.to_vec();
                input.extend(act.iter());
                total += critic.forward(Array1::from_vec(input).view())[0];
            }
            total / b as f64
        };

        let snapshot = bundle.actor.clone();
        let slots = [SlotActor {
            obs_range: 0..3,
            act_range: 0..2,
            net: &snapshot,
        }];
        // policy_gradient returns the gradient of -J
        let grads = bundle.policy_gradient(&batch, &slots, 0..3, 0..2);

        let h = 1e-5;
        for l in 0..bundle.actor.weights.len() {
            // logical iteration order matches the row-major parameter slice
            let analytic_w: Vec<f64> = grads.weights[l].iter().copied().collect();
            for idx in 0..bundle.actor.weights[l].len() {
                let orig = bundle.actor.weights[l].as_slice().unwrap()[idx];
                bundle.actor.weights[l].as_slice_mut().unwrap()[idx] = orig + h;
                let up = objective(&bundle.actor, &bundle.critic);
                bundle.actor.weights[l].as_slice_mut().unwrap()[idx] = orig - h;
                let down = objective(&bundle.actor, &bundle.critic);
                bundle.actor.weights[l].as_slice_mut().unwrap()[idx] = orig;
                let numeric = (up - down) / (2.0 * h);
                let analytic = -analytic_w[idx];
                let rel =
                    (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(rel <= 1e-4, "layer {l} idx {idx}: {numeric} vs {analytic}");
            }
        }
    }

    #[test]
    fn gather_reconstructs_transitions() {
        let mut bundle = bundle_k1();
        for i in 0..10 {
            bundle.buffer.push(Transition {
                state: vec![i as f64; 3].into_boxed_slice(),
                action: vec![0.5; 2].into_boxed_slice(),
                reward: -(i as f64),
                next_state: vec![i as f64 + 1.0; 3].into_boxed_slice(),
            });
        }
        let batch = bundle.gather(&[2, 7]);
        assert_eq!(batch.states[[0, 0]], 2.0);
        assert_eq!(batch.states[[1, 1]], 7.0);
        assert_eq!(batch.rewards[1], -7.0);
        assert_eq!(batch.next_states[[0, 2]], 3.0);
    }
}
