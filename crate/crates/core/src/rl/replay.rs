//! Circular replay buffer with uniform mini-batch sampling.

use rand::Rng;

/// One stored interaction: full state, joint action, shared reward and the
/// successor full state.
#[derive(Debug, Clone)]
pub struct Transition<T> {
    pub state: Box<[T]>,
    pub action: Box<[T]>,
    pub reward: T,
    pub next_state: Box<[T]>,
}

/// Fixed-capacity store; once full, the write cursor wraps and the oldest
/// transitions are overwritten.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    storage: Vec<Transition<T>>,
    cursor: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            capacity,
            storage: Vec::new(),
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn push(&mut self, t: Transition<T>) {
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, idx: usize) -> &Transition<T> {
        &self.storage[idx]
    }

    /// Uniform sample of `batch` distinct indices.
    pub fn sample_indices<R: Rng>(&self, rng: &mut R, batch: usize) -> Vec<usize> {
        assert!(
            self.len() >= batch,
            "cannot sample {batch} transitions from a buffer of {}",
            self.len()
        );
        rand::seq::index::sample(rng, self.len(), batch).into_vec()
    }
}
