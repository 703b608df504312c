use cfmec::config::{Algorithm, SystemConfig};
use cfmec::env::MecEnv;
use cfmec::harness::{evaluate_policy, Policy};
use cfmec::phy::generate_scenario;
use cfmec::rl;
use std::time::Instant;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let mut cfg = SystemConfig::desk_scale();
    cfg.seed = seed;
    let scenario = generate_scenario(&cfg, cfg.seed).unwrap();
    let t0 = Instant::now();

    let mut env = MecEnv::new(scenario.clone(), &cfg, cfg.seed);
    let (maddpg, hist) = rl::train_maddpg(&mut env, &cfg, |m| {
        if m.episode % 50 == 0 {
            println!(
                "[maddpg {seed}] ep {} reward {:.2} success {:.3} ({:.0?})",
                m.episode,
                m.reward,
                m.success_rate,
                t0.elapsed()
            );
        }
        Ok(())
    })
    .unwrap();
    let tail: Vec<f64> = hist.iter().rev().take(100).map(|m| m.reward).collect();
    println!(
        "[maddpg {seed}] trained in {:.0?}; trailing-100 train reward {:.2}",
        t0.elapsed(),
        mean(&tail)
    );

    let policy = Policy::MaddpgActors(maddpg.iter().map(|l| l.actor_f64()).collect());
    let ev = evaluate_policy(&policy, &scenario, &cfg, 100, cfg.seed, |_| Ok(())).unwrap();
    let maddpg_r = mean(&ev.iter().map(|m| m.reward).collect::<Vec<_>>());
    let maddpg_s = mean(&ev.iter().map(|m| m.success_rate).collect::<Vec<_>>());
    println!("[maddpg {seed}] EVAL reward {maddpg_r:.3} success {maddpg_s:.4}");

    let t1 = Instant::now();
    let mut env = MecEnv::new(scenario.clone(), &cfg, cfg.seed);
    let (ddpg, _) = rl::train_ddpg_centralized(&mut env, &cfg, |m| {
        if m.episode % 200 == 0 {
            println!(
                "[ddpg {seed}] ep {} reward {:.2} success {:.3}",
                m.episode, m.reward, m.success_rate
            );
        }
        Ok(())
    })
    .unwrap();
    println!("[ddpg {seed}] trained in {:.0?}", t1.elapsed());
    let policy = Policy::Central(ddpg[0].actor_f64());
    let ev = evaluate_policy(&policy, &scenario, &cfg, 100, cfg.seed, |_| Ok(())).unwrap();
    let ddpg_r = mean(&ev.iter().map(|m| m.reward).collect::<Vec<_>>());
    let ddpg_s = mean(&ev.iter().map(|m| m.success_rate).collect::<Vec<_>>());
    println!("[ddpg {seed}] EVAL reward {ddpg_r:.3} success {ddpg_s:.4}");

    for algo in [Algorithm::OffloadFirst, Algorithm::LocalFirst] {
        let policy = Policy::heuristic(algo, &scenario, &cfg).unwrap();
        let ev = evaluate_policy(&policy, &scenario, &cfg, 100, cfg.seed, |_| Ok(())).unwrap();
        let r = mean(&ev.iter().map(|m| m.reward).collect::<Vec<_>>());
        let s = mean(&ev.iter().map(|m| m.success_rate).collect::<Vec<_>>());
        println!("[{algo} {seed}] EVAL reward {r:.3} success {s:.4}");
    }

    println!(
        "[summary {seed}] maddpg {maddpg_r:.3} vs ddpg {ddpg_r:.3}; ratio ddpg/maddpg = {:.3}; maddpg success {maddpg_s:.4}",
        ddpg_r / maddpg_r
    );
    println!("total {:.0?}", t0.elapsed());
}
