//! Parallel local/edge computation model: task splitting, local execution
//! cost, proportional edge CPU sharing, offloading delay/energy and the
//! per-user combination into a step outcome.

use crate::error::Error;
use crate::Result;

/// Computation constants.
#[derive(Debug, Clone)]
pub struct ComputeConfig {
    /// CPU cycles needed per task bit.
    pub cycles_per_bit: f64,
    /// Effective switched capacitance of the local processor.
    pub kappa: f64,
    /// Maximum local processor speed, cycles/s.
    pub f_local_max_hz: f64,
    /// Edge server capacity, cycles/s.
    pub f_edge_hz: f64,
    /// Task completion deadline, seconds (uniform default; per-user values
    /// can be supplied to the environment directly).
    pub deadline_s: f64,
    pub task_min_bits: f64,
    pub task_max_bits: f64,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            cycles_per_bit: 500.0,
            kappa: 1e-27,
            f_local_max_hz: 1e9,
            f_edge_hz: 100e9,
            deadline_s: 1e-3,
            task_min_bits: 2500.0,
            task_max_bits: 7500.0,
        }
    }
}

impl ComputeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycles_per_bit <= 0.0
            || self.kappa <= 0.0
            || self.f_local_max_hz <= 0.0
            || self.f_edge_hz <= 0.0
            || self.deadline_s <= 0.0
            || self.task_min_bits <= 0.0
        {
            return Err(Error::Config("compute constants must be positive".into()));
        }
        if self.task_min_bits > self.task_max_bits {
            return Err(Error::Config(format!(
                "task_min_bits ({}) must be <= task_max_bits ({})",
                self.task_min_bits, self.task_max_bits
            )));
        }
        Ok(())
    }
}

/// How one task is divided between the local processor and the edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSplit {
    pub local_bits: f64,
    pub offload_bits: f64,
    /// Local processor speed chosen for this step, cycles/s.
    pub f_local_hz: f64,
}

/// Per-user cost breakdown for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserCosts {
    pub rate_bps: f64,
    pub t_local_s: f64,
    pub t_tr_s: f64,
    pub t_comp_s: f64,
    pub t_offload_s: f64,
    pub t_total_s: f64,
    pub e_local_j: f64,
    pub e_offload_j: f64,
    pub e_total_j: f64,
    pub deadline_met: bool,
}

/// Split a task: process as many bits locally as the chosen speed can finish
/// within the deadline, offload the remainder.
pub fn split_task(task_bits: f64, alpha: f64, deadline_s: f64, cfg: &ComputeConfig) -> TaskSplit {
    debug_assert!(task_bits >= 0.0);
    debug_assert!((0.0..=1.0).contains(&alpha));
    let f_local_hz = alpha * cfg.f_local_max_hz;
    let capacity_bits = deadline_s * f_local_hz / cfg.cycles_per_bit;
    // The paired subtraction keeps local + offload == task exact in floating
    // point; local may land one ulp off the capacity, which the Eq.-style
    // deadline clamp in local_cost absorbs.
    let (local_bits, offload_bits) = if capacity_bits >= task_bits {
        (task_bits, 0.0)
    } else {
        let offload = task_bits - capacity_bits;
        (task_bits - offload, offload)
    };
    TaskSplit {
        local_bits,
        offload_bits,
        f_local_hz,
    }
}

/// Local execution time and energy. Zero local bits cost nothing, which also
/// covers the zero-speed case (no bits fit at zero speed).
pub fn local_cost(split: &TaskSplit, deadline_s: f64, cfg: &ComputeConfig) -> (f64, f64) {
    if split.local_bits <= 0.0 {
        return (0.0, 0.0);
    }
    let t = (split.local_bits * cfg.cycles_per_bit / split.f_local_hz).min(deadline_s);
    let e = cfg.kappa * split.local_bits * cfg.cycles_per_bit * split.f_local_hz.powi(2);
    (t, e)
}

/// Share the edge CPU among offloading users in proportion to their offloaded
/// bits. With nothing offloaded anywhere the whole vector is zero.
pub fn edge_allocation(offload_bits: &[f64], f_edge_hz: f64) -> Vec<f64> {
    let total: f64 = offload_bits.iter().sum();
    if total <= 0.0 {
        return vec![0.0; offload_bits.len()];
    }
    offload_bits
        .iter()
        .map(|&bits| f_edge_hz * (bits / total))
        .collect()
}

/// Transmission and edge-computing delay plus uplink energy for the offloaded
/// part. Pending bits with a zero rate (or no edge share) can never finish:
/// the delay becomes infinite and, when enabled, the transmitter is charged
/// for the whole step.
#[allow(clippy::too_many_arguments)]
pub fn offload_cost(
    offload_bits: f64,
    rate_bps: f64,
    f_cpu_hz: f64,
    power_w: f64,
    cycles_per_bit: f64,
    step_s: f64,
    charge_infeasible: bool,
) -> (f64, f64, f64, f64) {
    if offload_bits <= 0.0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    if rate_bps <= 0.0 || f_cpu_hz <= 0.0 {
        let e = if charge_infeasible { power_w * step_s } else { 0.0 };
        return (f64::INFINITY, f64::INFINITY, f64::INFINITY, e);
    }
    let t_tr = offload_bits / rate_bps;
    let t_comp = offload_bits * cycles_per_bit / f_cpu_hz;
    (t_tr, t_comp, t_tr + t_comp, power_w * t_tr)
}

/// Combine the local and offload legs into the per-user outcome.
pub fn combine(
    rate_bps: f64,
    t_local_s: f64,
    e_local_j: f64,
    t_tr_s: f64,
    t_comp_s: f64,
    t_offload_s: f64,
    e_offload_j: f64,
    deadline_s: f64,
) -> UserCosts {
    let t_total_s = t_local_s.max(t_offload_s);
    UserCosts {
        rate_bps,
        t_local_s,
        t_tr_s,
        t_comp_s,
        t_offload_s,
        t_total_s,
        e_local_j,
        e_offload_j,
        e_total_j: e_local_j + e_offload_j,
        deadline_met: t_total_s <= deadline_s,
    }
}
