//! Deterministic seed derivation.
//!
//! Every stochastic component (scenario drop, per-step fading, task arrivals,
//! per-agent weight init, exploration noise, replay sampling) owns a ChaCha
//! stream whose seed is derived from the single experiment seed. Reusing a
//! stream id with the same master seed always yields the same stream, which is
//! what makes whole runs reproducible from one integer.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named sub-streams of an experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// AP/user positions, large-scale gains, clusters.
    Scenario,
    /// Small-scale fading and estimation noise during training episodes.
    Channels,
    /// Task-size arrivals during training episodes.
    Tasks,
    /// Fading/noise during evaluation episodes.
    EvalChannels,
    /// Task arrivals during evaluation episodes.
    EvalTasks,
    /// Shadowing draws for the co-located architecture rebuild.
    ColocatedShadow,
    /// Weight initialization of agent `k`.
    AgentInit(u64),
    /// Exploration noise of agent `k`.
    AgentNoise(u64),
    /// Replay mini-batch sampling of agent `k`.
    AgentSample(u64),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Scenario => 1,
            Stream::Channels => 2,
            Stream::Tasks => 3,
            Stream::EvalChannels => 4,
            Stream::EvalTasks => 5,
            Stream::ColocatedShadow => 6,
            Stream::AgentInit(k) => 0x100 + k,
            Stream::AgentNoise(k) => 0x10_000 + k,
            Stream::AgentSample(k) => 0x1_000_000 + k,
        }
    }
}

/// SplitMix64 finalizer; decorrelates nearby (seed, stream) pairs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the sub-seed for `stream` under `master`.
pub fn derive(master: u64, stream: Stream) -> u64 {
    mix(master ^ mix(stream.id()))
}

/// Seeded ChaCha stream for `stream` under `master`.
pub fn stream_rng(master: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream))
}
