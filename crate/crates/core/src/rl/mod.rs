//! From-scratch neural/optimization core: MLPs with exact backprop, Adam,
//! replay buffers, exploration noise, soft target updates and the
//! deterministic-policy-gradient training loops.

pub mod adam;
pub mod agent;
pub mod checkpoint;
pub mod mlp;
pub mod replay;
pub mod train;

pub use adam::AdamState;
pub use agent::{AgentBundle, Batch, SlotActor};
pub use checkpoint::{load_mlp, save_mlp};
pub use mlp::{soft_update, Mlp, MlpGrads, OutputActivation, Real, HIDDEN_LAYERS};
pub use replay::{ReplayBuffer, Transition};
pub use train::{
    central_learner, maddpg_learners, train_ddpg_centralized, train_learners, train_maddpg,
    Learner, ACT_DIM, OBS_DIM,
};
