//! Non-learning heuristics: fractional power control and the two scheduling
//! policies built on it (offloading-first and local-execution-first).

pub use crate::config::FpcConfig;
use crate::env::Action;
use crate::error::Error;
use crate::phy::NetworkScenario;
use crate::Result;

/// Fractional power control: `p = min(p_max, p0 * lambda^-nu)` where
/// `lambda` is the user's aggregate serving gain.
pub fn fpc_power(lambda: f64, cfg: &FpcConfig, p_max_w: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::Scenario(format!(
            "aggregate gain must be positive, got {lambda}"
        )));
    }
    Ok(p_max_w.min(cfg.p0_w * lambda.powf(-cfg.nu)))
}

/// Per-user FPC power-control coefficients `eta = p / p_max` for a scenario.
pub fn fpc_coefficients(
    scenario: &NetworkScenario,
    cfg: &FpcConfig,
    p_max_w: f64,
) -> Result<Vec<f64>> {
    (0..scenario.user_count())
        .map(|k| Ok(fpc_power(scenario.cluster_gain(k), cfg, p_max_w)? / p_max_w))
        .collect()
}

/// Offload everything; transmit at the FPC power. The policy is open loop:
/// it ignores the task size and previous rate entirely.
pub fn offloading_first_action(fpc_eta: f64) -> Action {
    Action {
        alpha: 0.0,
        eta: fpc_eta,
    }
}

/// Run the local processor flat out and offload whatever does not fit, again
/// at the FPC power.
pub fn local_first_action(fpc_eta: f64) -> Action {
    Action {
        alpha: 1.0,
        eta: fpc_eta,
    }
}
