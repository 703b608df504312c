//! Fixed-architecture fully connected networks with exact backpropagation.
//!
//! The networks are generic over the float width: training runs in `f32` for
//! throughput on a single core, while the gradient-verification tests
//! instantiate the very same code at `f64` where central finite differences
//! are meaningful.

use ndarray::{Array1, Array2, ArrayView1, Axis, LinalgScalar, ScalarOperand};
use num_traits::Float;
use rand::Rng;

/// Float widths the networks can run at.
pub trait Real:
    Float + LinalgScalar + ScalarOperand + std::fmt::Debug + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
}

/// Output nonlinearity; hidden layers are always rectified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    /// Squashes into (0, 1); used by actors.
    Logistic,
    /// Raw affine output; used by critics.
    Identity,
}

/// Hidden widths shared by every actor and critic.
pub const HIDDEN_LAYERS: [usize; 3] = [128, 64, 64];

/// A multilayer perceptron: affine layers with rectified hidden units.
#[derive(Debug, Clone)]
pub struct Mlp<T> {
    /// Per-layer weights, shape `(fan_out, fan_in)`.
    pub weights: Vec<Array2<T>>,
    pub biases: Vec<Array1<T>>,
    pub output: OutputActivation,
}

/// Activations retained by a forward pass; enough for an exact backward pass.
pub struct MlpCache<T> {
    /// `activations[0]` is the input batch, the last entry the output batch.
    activations: Vec<Array2<T>>,
}

impl<T> MlpCache<T> {
    pub fn output(&self) -> &Array2<T> {
        self.activations.last().expect("cache is never empty")
    }
}

/// Parameter gradients shaped exactly like the network.
#[derive(Debug, Clone)]
pub struct MlpGrads<T> {
    pub weights: Vec<Array2<T>>,
    pub biases: Vec<Array1<T>>,
}

impl<T: Real> MlpGrads<T> {
    pub fn zeros_like(net: &Mlp<T>) -> Self {
        Self {
            weights: net
                .weights
                .iter()
                .map(|w| Array2::zeros(w.raw_dim()))
                .collect(),
            biases: net
                .biases
                .iter()
                .map(|b| Array1::zeros(b.raw_dim()))
                .collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>();
        }
        for b in &self.biases {
            acc += b.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>();
        }
        acc.sqrt()
    }
}

fn logistic<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

impl<T: Real> Mlp<T> {
    /// Initialize with per-layer uniform weights in `±1/sqrt(fan_in)`.
    /// `final_scale` shrinks the last layer (actors start near the logistic
    /// midpoint with 0.1). Randomness is drawn as f64 so the draw sequence is
    /// identical across float widths.
    pub fn new<R: Rng>(
        layer_sizes: &[usize],
        output: OutputActivation,
        final_scale: f64,
        rng: &mut R,
    ) -> Self {
        assert!(layer_sizes.len() >= 2, "need at least input and output");
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for l in 0..layer_sizes.len() - 1 {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            let mut bound = 1.0 / (fan_in as f64).sqrt();
            if l == layer_sizes.len() - 2 {
                bound *= final_scale;
            }
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                T::from_f64(rng.gen_range(-bound..bound))
            });
            let b = Array1::from_shape_fn(fan_out, |_| T::from_f64(rng.gen_range(-bound..bound)));
            weights.push(w);
            biases.push(b);
        }
        Self {
            weights,
            biases,
            output,
        }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.weights[0].ncols()];
        sizes.extend(self.weights.iter().map(|w| w.nrows()));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().nrows()
    }

    /// Batched forward pass; rows are samples.
    pub fn forward_batch(&self, input: &Array2<T>) -> MlpCache<T> {
        assert_eq!(input.ncols(), self.input_dim(), "input width mismatch");
        let depth = self.weights.len();
        let mut activations = Vec::with_capacity(depth + 1);
        activations.push(input.clone());
        for l in 0..depth {
            let mut z = activations[l].dot(&self.weights[l].t());
            for mut row in z.rows_mut() {
                row.zip_mut_with(&self.biases[l], |zv, &bv| *zv = *zv + bv);
            }
            let a = if l + 1 == depth {
                match self.output {
                    OutputActivation::Logistic => z.mapv_into(logistic),
                    OutputActivation::Identity => z,
                }
            } else {
                z.mapv_into(|v| v.max(T::zero()))
            };
            activations.push(a);
        }
        MlpCache { activations }
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: ArrayView1<T>) -> Array1<T> {
        let batch = input.insert_axis(Axis(0)).to_owned();
        let cache = self.forward_batch(&batch);
        cache.output().row(0).to_owned()
    }

    /// Exact gradients of any scalar objective whose gradient with respect to
    /// the network output is `d_output`. Also returns the gradient with
    /// respect to the input batch, which is what chains the critic into the
    /// policy update.
    pub fn backward_batch(
        &self,
        cache: &MlpCache<T>,
        d_output: &Array2<T>,
    ) -> (MlpGrads<T>, Array2<T>) {
        let depth = self.weights.len();
        assert_eq!(cache.activations.len(), depth + 1, "stale cache");
        let out = cache.output();
        assert_eq!(d_output.raw_dim(), out.raw_dim());

        // Output-layer delta folds in the output nonlinearity.
        let mut delta = match self.output {
            OutputActivation::Logistic => {
                let mut d = d_output.clone();
                d.zip_mut_with(out, |dv, &y| *dv = *dv * y * (T::one() - y));
                d
            }
            OutputActivation::Identity => d_output.clone(),
        };

        let mut grads = MlpGrads {
            weights: Vec::with_capacity(depth),
            biases: Vec::with_capacity(depth),
        };
        for l in (0..depth).rev() {
            grads.weights.push(delta.t().dot(&cache.activations[l]));
            grads.biases.push(delta.sum_axis(Axis(0)));
            let mut d_prev = delta.dot(&self.weights[l]);
            if l > 0 {
                // Rectifier mask of the previous hidden activation.
                d_prev.zip_mut_with(&cache.activations[l], |dv, &a| {
                    if a <= T::zero() {
                        *dv = T::zero();
                    }
                });
            }
            delta = d_prev;
        }
        grads.weights.reverse();
        grads.biases.reverse();
        (grads, delta)
    }

    /// Element count over all weights and biases.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Convert parameters to a different float width.
    pub fn convert<U: Real>(&self) -> Mlp<U> {
        Mlp {
            weights: self
                .weights
                .iter()
                .map(|w| w.mapv(|v| U::from_f64(v.as_f64())))
                .collect(),
            biases: self
                .biases
                .iter()
                .map(|b| b.mapv(|v| U::from_f64(v.as_f64())))
                .collect(),
            output: self.output,
        }
    }
}

/// Polyak / soft target update: `target <- tau * main + (1 - tau) * target`.
pub fn soft_update<T: Real>(target: &mut Mlp<T>, main: &Mlp<T>, tau: T) {
    let keep = T::one() - tau;
    for (tw, mw) in target.weights.iter_mut().zip(&main.weights) {
        tw.zip_mut_with(mw, |t, &m| *t = tau * m + keep * *t);
    }
    for (tb, mb) in target.biases.iter_mut().zip(&main.biases) {
        tb.zip_mut_with(mb, |t, &m| *t = tau * m + keep * *t);
    }
}
