//! Adam optimizer over an [`Mlp`]'s parameters.

use ndarray::{Array1, Array2};

use super::mlp::{Mlp, MlpGrads, Real};

/// Per-parameter first/second moment accumulators plus the shared step
/// counter; bias-corrected updates as in the original formulation.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    step: u64,
    m_w: Vec<Array2<T>>,
    v_w: Vec<Array2<T>>,
    m_b: Vec<Array1<T>>,
    v_b: Vec<Array1<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(net: &Mlp<T>, lr: f64) -> Self {
        Self {
            lr: T::from_f64(lr),
            beta1: T::from_f64(0.9),
            beta2: T::from_f64(0.999),
            eps: T::from_f64(1e-8),
            step: 0,
            m_w: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            v_w: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            m_b: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            v_b: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One descent step along `grads`.
    pub fn apply(&mut self, params: &mut Mlp<T>, grads: &MlpGrads<T>) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        let (b1, b2) = (self.beta1, self.beta2);
        let one = T::one();
        let (lr, eps) = (self.lr, self.eps);

        let update = move |p: &mut T, g: &T, m: &mut T, v: &mut T| {
            let g = *g;
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
        };

        // gradient arrays out of the backward pass may carry any layout
        for l in 0..params.weights.len() {
            ndarray::Zip::from(&mut params.weights[l])
                .and(&grads.weights[l])
                .and(&mut self.m_w[l])
                .and(&mut self.v_w[l])
                .for_each(update);
            ndarray::Zip::from(&mut params.biases[l])
                .and(&grads.biases[l])
                .and(&mut self.m_b[l])
                .and(&mut self.v_b[l])
                .for_each(update);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::mlp::OutputActivation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net_and_grads(fill: f64) -> (Mlp<f64>, MlpGrads<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f64>::new(&[2, 3, 1], OutputActivation::Identity, 1.0, &mut rng);
        let mut grads = MlpGrads::zeros_like(&net);
        for g in &mut grads.weights {
            g.fill(fill);
        }
        for g in &mut grads.biases {
            g.fill(fill);
        }
        (net, grads)
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let (mut net, grads) = net_and_grads(1.0);
        let before = net.clone();
        let mut adam = AdamState::new(&net, 1e-3);
        adam.apply(&mut net, &grads);
        for (w, w0) in net.weights.iter().zip(&before.weights) {
            for (a, b) in w.iter().zip(w0.iter()) {
                let delta = b - a;
                // bias correction makes m_hat/sqrt(v_hat) = 1 on step one
                assert!((delta - 1e-3).abs() < 1e-8, "delta {delta}");
            }
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let (mut net, zero) = net_and_grads(0.0);
        let before = net.clone();
        let mut adam = AdamState::new(&net, 1e-3);
        // even with previously accumulated moments the parameters may move,
        // so test the fresh-state contract the update rule guarantees
        adam.apply(&mut net, &zero);
        adam.apply(&mut net, &zero);
        assert_eq!(net.weights[0], before.weights[0]);
        assert_eq!(net.biases[1], before.biases[1]);
        assert_eq!(adam.step_count(), 2);
    }

    /// Scalar reference implementation, evolved independently.
    fn scalar_adam(grads: &[f64], lr: f64) -> Vec<f64> {
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let (mut m, mut v, mut p) = (0.0, 0.0, 0.0);
        let mut trace = Vec::new();
        for (t, &g) in grads.iter().enumerate() {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - b1.powi(t as i32 + 1));
            let v_hat = v / (1.0 - b2.powi(t as i32 + 1));
            p -= lr * m_hat / (v_hat.sqrt() + eps);
            trace.push(p);
        }
        trace
    }

    #[test]
    fn matches_scalar_oracle_and_shrinks_repeat_steps() {
        let (mut net, grads) = net_and_grads(0.7);
        let p0 = net.weights[0][[0, 0]];
        let mut adam = AdamState::new(&net, 1e-2);
        let mut seen = Vec::new();
        for _ in 0..5 {
            adam.apply(&mut net, &grads);
            seen.push(net.weights[0][[0, 0]] - p0);
        }
        let expect = scalar_adam(&[0.7; 5], 1e-2);
        for (a, b) in seen.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        // second identical step is no larger than the first
        let step1 = seen[0].abs();
        let step2 = (seen[1] - seen[0]).abs();
        assert!(step2 <= step1 + 1e-15);
    }
}
