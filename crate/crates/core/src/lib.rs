//! Discrete-time simulator of a cell-free massive MIMO mobile edge computing
//! network, together with a multi-agent deterministic-policy-gradient training
//! harness that learns joint uplink-power and local-CPU-speed allocation.
//!
//! The crate is organized around the simulation pipeline:
//!
//! - [`phy`]: network geometry, large-scale fading, per-step Rayleigh fading
//!   with LS channel estimation, uplink SINR and achievable rate under MRC.
//! - [`compute`]: the parallel local/edge computation model (task splitting,
//!   execution time, proportional edge CPU sharing, energy accounting).
//! - [`env`]: the shared multi-agent environment tying the two together and
//!   emitting the cooperative energy-based reward.
//! - [`rl`]: from-scratch MLPs with exact backprop, Adam, replay buffers and
//!   the MADDPG / centralized-DDPG training loops.
//! - [`baselines`]: non-learning heuristics (fractional power control,
//!   offloading-first, local-first).
//! - [`harness`]: experiment orchestration, metrics CSV output, checkpoints.

pub mod baselines;
pub mod compute;
pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod phy;
pub mod rl;
pub mod rng;

pub use config::SystemConfig;
pub use env::{Action, FullState, MecEnv, Observation, StepOutcome};
pub use error::Error;
pub use phy::{ChannelRealization, NetworkScenario, PathLossConstants, RadioConfig};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
