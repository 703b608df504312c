//! Physical layer: geometry, large-scale fading, per-step Rayleigh fading
//! with least-squares channel estimation, and uplink SINR / rate under
//! maximum-ratio combining for the three serving architectures.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{Architecture, SystemConfig};
use crate::error::Error;
use crate::rng::{self, Stream};
use crate::Result;

/// Three-slope path-loss model constants.
#[derive(Debug, Clone)]
pub struct PathLossConstants {
    pub carrier_freq_mhz: f64,
    pub ap_height_m: f64,
    pub user_height_m: f64,
    pub d0_km: f64,
    pub d1_km: f64,
    /// Shadow-fading standard deviation in dB, applied beyond `d1_km`.
    pub shadow_std_db: f64,
}

impl Default for PathLossConstants {
    fn default() -> Self {
        Self {
            carrier_freq_mhz: 1900.0,
            ap_height_m: 15.0,
            user_height_m: 1.65,
            d0_km: 0.01,
            d1_km: 0.05,
            shadow_std_db: 10.0,
        }
    }
}

impl PathLossConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0_km > 0.0 && self.d0_km < self.d1_km) {
            return Err(Error::Config(format!(
                "need 0 < d0_km < d1_km, got d0={} d1={}",
                self.d0_km, self.d1_km
            )));
        }
        if self.carrier_freq_mhz <= 0.0
            || self.ap_height_m <= 0.0
            || self.user_height_m <= 0.0
            || self.shadow_std_db < 0.0
        {
            return Err(Error::Config(
                "carrier frequency and antenna heights must be positive, shadow_std_db >= 0"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Fixed attenuation term of the three-slope model, in dB.
    pub fn attenuation_db(&self) -> f64 {
        let f = self.carrier_freq_mhz;
        46.3 + 33.9 * f.log10() - 13.82 * self.ap_height_m.log10()
            - (1.1 * f.log10() - 0.7) * self.user_height_m
            + (1.56 * f.log10() - 0.8)
    }
}

/// Uplink radio constants.
#[derive(Debug, Clone)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    /// Receiver noise figure; the noise power is derived from it.
    pub noise_figure_db: f64,
    pub pilot_power_w: f64,
    /// Pilot sequence length in samples; 0 means "one pilot per user".
    pub pilot_len: usize,
    pub max_ul_power_w: f64,
    pub coherence_ms: f64,
    /// Multiplicative rate factor; 1.0 reproduces the plain Shannon rate,
    /// set below 1 to account for the pilot overhead fraction.
    pub prelog_factor: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 5e6,
            noise_figure_db: 9.0,
            pilot_power_w: 0.1,
            pilot_len: 0,
            max_ul_power_w: 0.1,
            coherence_ms: 1.0,
            prelog_factor: 1.0,
        }
    }
}

impl RadioConfig {
    /// Thermal noise power over the bandwidth: -174 dBm/Hz + 10 log10(W) + NF.
    pub fn noise_power_w(&self) -> f64 {
        let dbm = -174.0 + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db;
        10f64.powf((dbm - 30.0) / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandwidth_hz <= 0.0
            || self.pilot_power_w <= 0.0
            || self.max_ul_power_w <= 0.0
            || self.coherence_ms <= 0.0
            || self.prelog_factor <= 0.0
        {
            return Err(Error::Config(
                "bandwidth, pilot power, max power, coherence time and prelog must be positive"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// One network drop: positions, large-scale gains and serving clusters.
#[derive(Debug, Clone)]
pub struct NetworkScenario {
    /// AP coordinates in km; length M.
    pub ap_positions: Vec<[f64; 2]>,
    /// User coordinates in km; length K.
    pub user_positions: Vec<[f64; 2]>,
    /// Linear large-scale gains, `beta[m][k]`, all positive.
    pub beta: Vec<Vec<f64>>,
    /// Per-user serving AP indices, strongest gains first.
    pub clusters: Vec<Vec<usize>>,
    /// Seed the drop was generated from; lets architecture rebuilds draw
    /// reproducible shadowing without threading an RNG through.
    pub seed: u64,
}

impl NetworkScenario {
    pub fn ap_count(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn user_count(&self) -> usize {
        self.user_positions.len()
    }

    /// Aggregate serving gain `sum of beta over the user's cluster`.
    pub fn cluster_gain(&self, user: usize) -> f64 {
        self.clusters[user].iter().map(|&m| self.beta[m][user]).sum()
    }
}

/// One coherence interval of small-scale fading.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Unit-variance complex fades, `h[m][k]`.
    pub h: Vec<Vec<Complex64>>,
    /// True channels `g = sqrt(beta) * h`.
    pub g: Vec<Vec<Complex64>>,
    /// LS channel estimates `g + e`, `e ~ CN(0, sigma^2 / (tau_p * q_p))`.
    pub g_hat: Vec<Vec<Complex64>>,
}

/// Three-slope path loss in dB at distance `d_km`.
pub fn path_loss_db(d_km: f64, c: &PathLossConstants) -> f64 {
    debug_assert!(d_km >= 0.0);
    let l = c.attenuation_db();
    if d_km <= c.d0_km {
        -l - 10.0 * (c.d0_km.powi(2) * c.d1_km.powf(1.5)).log10()
    } else if d_km <= c.d1_km {
        -l - 10.0 * (d_km.powi(2) * c.d1_km.powf(1.5)).log10()
    } else {
        -l - 35.0 * d_km.log10()
    }
}

/// Linear large-scale gain from a path loss and a standard-normal shadowing
/// draw. Shadowing is skipped entirely when `apply_shadowing` is false (the
/// model only shadows links longer than `d1`).
pub fn large_scale_gain(pl_db: f64, z: f64, shadow_std_db: f64, apply_shadowing: bool) -> f64 {
    let shadow_db = if apply_shadowing { shadow_std_db * z } else { 0.0 };
    10f64.powf(pl_db / 10.0) * 10f64.powf(shadow_db / 10.0)
}

fn distance_km(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Serving cluster: the `size` APs with the largest gain, ties resolved in
/// favor of the lower AP index.
fn form_cluster(beta_col: &[f64], size: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..beta_col.len()).collect();
    order.sort_by(|&a, &b| {
        beta_col[b]
            .partial_cmp(&beta_col[a])
            .expect("large-scale gains must not be NaN")
            .then(a.cmp(&b))
    });
    order.truncate(size);
    order
}

/// Drop APs and users uniformly over the square area, compute large-scale
/// gains and form user-centric clusters.
pub fn generate_scenario(config: &SystemConfig, seed: u64) -> Result<NetworkScenario> {
    config.validate()?;
    let cluster_size = config.cluster_size();
    if cluster_size > config.ap_count {
        return Err(Error::Scenario(format!(
            "cluster size {} exceeds AP count {}",
            cluster_size, config.ap_count
        )));
    }
    if config.user_count > config.pilot_len() {
        return Err(Error::Scenario(format!(
            "{} users cannot share {} orthogonal pilots",
            config.user_count,
            config.pilot_len()
        )));
    }

    let mut rng = rng::stream_rng(seed, Stream::Scenario);
    let side = config.area_side_km;
    let ap_positions: Vec<[f64; 2]> = (0..config.ap_count)
        .map(|_| [rng.gen::<f64>() * side, rng.gen::<f64>() * side])
        .collect();
    let user_positions: Vec<[f64; 2]> = (0..config.user_count)
        .map(|_| [rng.gen::<f64>() * side, rng.gen::<f64>() * side])
        .collect();

    let mut beta = vec![vec![0.0; config.user_count]; config.ap_count];
    for (m, ap) in ap_positions.iter().enumerate() {
        for (k, user) in user_positions.iter().enumerate() {
            let d = distance_km(*ap, *user);
            let pl = path_loss_db(d, &config.pathloss);
            let z: f64 = rng.sample(StandardNormal);
            beta[m][k] = large_scale_gain(
                pl,
                z,
                config.pathloss.shadow_std_db,
                d > config.pathloss.d1_km,
            );
        }
    }

    let clusters = (0..config.user_count)
        .map(|k| {
            let col: Vec<f64> = (0..config.ap_count).map(|m| beta[m][k]).collect();
            form_cluster(&col, cluster_size)
        })
        .collect();

    Ok(NetworkScenario {
        ap_positions,
        user_positions,
        beta,
        clusters,
        seed,
    })
}

/// Rebuild the scenario for a different serving architecture. The user drop
/// is kept, so runs over different architectures stay directly comparable.
pub fn make_architecture(scenario: &NetworkScenario, mode: Architecture, c: &PathLossConstants) -> NetworkScenario {
    match mode {
        Architecture::CellFree => scenario.clone(),
        Architecture::SmallCell => {
            let mut out = scenario.clone();
            out.clusters = (0..scenario.user_count())
                .map(|k| {
                    let col: Vec<f64> =
                        (0..scenario.ap_count()).map(|m| scenario.beta[m][k]).collect();
                    form_cluster(&col, 1)
                })
                .collect();
            out
        }
        Architecture::Colocated => {
            // One base station at the area center with as many antennas as a
            // cell-free cluster; every antenna sees the same large-scale gain.
            let antennas = scenario.clusters.first().map_or(1, Vec::len);
            let center = centroid_of_area(scenario);
            let mut rng = rng::stream_rng(scenario.seed, Stream::ColocatedShadow);
            let users = scenario.user_positions.clone();
            let mut beta = vec![vec![0.0; users.len()]; antennas];
            for (k, user) in users.iter().enumerate() {
                let d = distance_km(center, *user);
                let pl = path_loss_db(d, c);
                let z: f64 = rng.sample(StandardNormal);
                let gain = large_scale_gain(pl, z, c.shadow_std_db, d > c.d1_km);
                for row in beta.iter_mut() {
                    row[k] = gain;
                }
            }
            let clusters = vec![(0..antennas).collect::<Vec<_>>(); users.len()];
            NetworkScenario {
                ap_positions: vec![center; antennas],
                user_positions: users,
                beta,
                clusters,
                seed: scenario.seed,
            }
        }
    }
}

fn centroid_of_area(scenario: &NetworkScenario) -> [f64; 2] {
    // The drop is uniform over [0, side]^2; the bounding box of the original
    // AP positions approximates the area, but the configured side length is
    // not stored here, so use the midpoint of the extremes of all positions.
    let all = scenario
        .ap_positions
        .iter()
        .chain(scenario.user_positions.iter());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in all {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0]
}

/// Draw one coherence interval: i.i.d. CN(0,1) fades and LS estimates with
/// estimation-noise variance `sigma^2 / (tau_p * q_p)` per entry.
pub fn draw_channels<R: Rng>(
    scenario: &NetworkScenario,
    radio: &RadioConfig,
    pilot_len: usize,
    rng: &mut R,
) -> ChannelRealization {
    let m_count = scenario.ap_count();
    let k_count = scenario.user_count();
    let noise_var = radio.noise_power_w() / (pilot_len as f64 * radio.pilot_power_w);
    let comp_std = (0.5f64).sqrt();
    let est_std = (noise_var / 2.0).sqrt();

    let mut h = vec![vec![Complex64::new(0.0, 0.0); k_count]; m_count];
    let mut g = h.clone();
    let mut g_hat = h.clone();
    for m in 0..m_count {
        for k in 0..k_count {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h[m][k] = Complex64::new(re * comp_std, im * comp_std);
            g[m][k] = scenario.beta[m][k].sqrt() * h[m][k];
        }
    }
    for m in 0..m_count {
        for k in 0..k_count {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g_hat[m][k] = g[m][k] + Complex64::new(re * est_std, im * est_std);
        }
    }
    ChannelRealization { h, g, g_hat }
}

/// Uplink SINR per user under MRC over each user's serving cluster.
///
/// `gamma_k = p_k |sum_m ghat*_mk g_mk|^2 /
///            (sum_{k'!=k} p_k' |sum_m ghat*_mk g_mk'|^2 + sigma^2 sum_m |ghat_mk|^2)`
/// with all sums restricted to the cluster of user `k`; zero power gives zero
/// SINR.
pub fn uplink_sinr(
    powers_w: &[f64],
    ch: &ChannelRealization,
    clusters: &[Vec<usize>],
    noise_power_w: f64,
) -> Vec<f64> {
    let k_count = clusters.len();
    let mut sinr = vec![0.0; k_count];
    for k in 0..k_count {
        if powers_w[k] <= 0.0 {
            continue;
        }
        // Combined coefficients c_{k,k'} = sum over the cluster of user k.
        let mut coeff = vec![Complex64::new(0.0, 0.0); k_count];
        let mut est_energy = 0.0;
        for &m in &clusters[k] {
            let w = ch.g_hat[m][k].conj();
            est_energy += ch.g_hat[m][k].norm_sqr();
            for (kp, c) in coeff.iter_mut().enumerate() {
                *c += w * ch.g[m][kp];
            }
        }
        let signal = powers_w[k] * coeff[k].norm_sqr();
        let mut interference = 0.0;
        for kp in 0..k_count {
            if kp != k {
                interference += powers_w[kp] * coeff[kp].norm_sqr();
            }
        }
        sinr[k] = signal / (interference + noise_power_w * est_energy);
    }
    sinr
}

/// Shannon uplink rate in bit/s, scaled by the configured prelog factor.
pub fn achievable_rate(sinr: f64, bandwidth_hz: f64, prelog_factor: f64) -> f64 {
    debug_assert!(sinr >= 0.0);
    prelog_factor * bandwidth_hz * (1.0 + sinr).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_plc() -> PathLossConstants {
        PathLossConstants::default()
    }

    #[test]
    fn attenuation_matches_frozen_value() {
        // Direct evaluation of the Hata-style constant at the default
        // frequency/heights, frozen from an independent calculation.
        let l = default_plc().attenuation_db();
        assert!((l - 140.71508370390842).abs() < 1e-9, "L = {l}");
    }

    #[test]
    fn path_loss_far_branch() {
        let pl = path_loss_db(0.1, &default_plc());
        assert!((pl - (-105.71508370390842)).abs() < 1e-9, "PL = {pl}");
    }

    #[test]
    fn path_loss_middle_branch() {
        let pl = path_loss_db(0.03, &default_plc());
        assert!((pl - (-90.74205886334195)).abs() < 1e-9, "PL = {pl}");
    }

    #[test]
    fn path_loss_near_branch_is_distance_free() {
        let c = default_plc();
        let a = path_loss_db(0.01, &c);
        let b = path_loss_db(0.003, &c);
        let frozen = -81.1996337689487;
        assert_eq!(a, b);
        assert!((a - frozen).abs() < 1e-9, "PL = {a}");
    }

    #[test]
    fn gain_is_pure_db_conversion_without_shadowing() {
        let g = large_scale_gain(-100.0, 3.7, 10.0, false);
        assert!((g - 1e-10).abs() < 1e-24);
    }

    #[test]
    fn zero_draw_means_unit_shadow_factor() {
        let g = large_scale_gain(-50.0, 0.0, 25.0, true);
        let base = large_scale_gain(-50.0, 0.0, 0.0, false);
        assert_eq!(g, base);
    }

    #[test]
    fn lognormal_shadow_moment() {
        // E[10^(sigma z / 10)] = exp((ln10 * sigma / 10)^2 / 2).
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for &sigma in &[4.0f64, 10.0] {
            let n = 100_000;
            let mut acc = 0.0;
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                acc += large_scale_gain(0.0, z, sigma, true);
            }
            let mean = acc / n as f64;
            let expect = ((10f64.ln() * sigma / 10.0).powi(2) / 2.0).exp();
            let rel = (mean - expect).abs() / expect;
            assert!(rel < 0.05, "sigma={sigma}: mean {mean} vs {expect} (rel {rel})");
        }
    }

    #[test]
    fn scenario_is_deterministic_and_clustered() {
        let mut cfg = SystemConfig::default();
        cfg.ap_count = 100;
        cfg.user_count = 10;
        let a = generate_scenario(&cfg, 7).unwrap();
        let b = generate_scenario(&cfg, 7).unwrap();
        assert_eq!(a.ap_positions, b.ap_positions);
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.clusters, b.clusters);
        for cluster in &a.clusters {
            assert_eq!(cluster.len(), 30);
            let mut sorted = cluster.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), 30);
        }
        // Every in-cluster gain at least matches every out-of-cluster gain.
        for (k, cluster) in a.clusters.iter().enumerate() {
            let in_min = cluster
                .iter()
                .map(|&m| a.beta[m][k])
                .fold(f64::INFINITY, f64::min);
            let out_max = (0..a.ap_count())
                .filter(|m| !cluster.contains(m))
                .map(|m| a.beta[m][k])
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(in_min >= out_max);
        }
    }

    #[test]
    fn single_ap_single_user() {
        let mut cfg = SystemConfig::default();
        cfg.ap_count = 1;
        cfg.user_count = 1;
        cfg.cluster_fraction = 1.0;
        let s = generate_scenario(&cfg, 3).unwrap();
        assert_eq!(s.clusters, vec![vec![0]]);
    }

    #[test]
    fn rejects_undersized_pilots() {
        let mut cfg = SystemConfig::default();
        cfg.radio.pilot_len = 4;
        cfg.user_count = 10;
        assert!(matches!(generate_scenario(&cfg, 1), Err(Error::Config(_))));
    }

    #[test]
    fn cluster_tie_break_prefers_lower_index() {
        let beta = vec![0.5, 0.7, 0.7, 0.2];
        assert_eq!(form_cluster(&beta, 2), vec![1, 2]);
        let beta = vec![0.7, 0.7, 0.7, 0.7];
        assert_eq!(form_cluster(&beta, 3), vec![0, 1, 2]);
    }

    fn tiny_scenario(seed: u64, m: usize, k: usize) -> NetworkScenario {
        let mut cfg = SystemConfig::default();
        cfg.ap_count = m;
        cfg.user_count = k;
        cfg.cluster_fraction = 0.75;
        cfg.radio.pilot_len = k.max(1);
        generate_scenario(&cfg, seed).unwrap()
    }

    #[test]
    fn fade_statistics() {
        let scenario = tiny_scenario(11, 50, 10);
        let radio = RadioConfig::default();
        let mut rng = stream_rng(11, Stream::Channels);
        let mut sum_sq_re = 0.0;
        let mut sum_sq_est = 0.0;
        let mut n = 0usize;
        // 2000 realizations x 500 entries = 1e6 draws.
        for _ in 0..2000 {
            let ch = draw_channels(&scenario, &radio, 10, &mut rng);
            for m in 0..50 {
                for k in 0..10 {
                    sum_sq_re += ch.h[m][k].re * ch.h[m][k].re;
                    sum_sq_est += (ch.g_hat[m][k] - ch.g[m][k]).norm_sqr();
                    n += 1;
                }
            }
        }
        let var_re = sum_sq_re / n as f64;
        assert!((var_re - 0.5).abs() / 0.5 < 0.01, "Re(h) variance {var_re}");
        let est_var = sum_sq_est / n as f64;
        let expect = radio.noise_power_w() / (10.0 * radio.pilot_power_w);
        assert!(
            (est_var - expect).abs() / expect < 0.02,
            "estimate-noise variance {est_var} vs {expect}"
        );
    }

    #[test]
    fn infinite_pilot_power_gives_perfect_estimates() {
        let scenario = tiny_scenario(5, 6, 3);
        let mut radio = RadioConfig::default();
        radio.pilot_power_w = f64::INFINITY;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = draw_channels(&scenario, &radio, 3, &mut rng);
        for m in 0..6 {
            for k in 0..3 {
                assert_eq!(ch.g_hat[m][k], ch.g[m][k]);
            }
        }
    }

    /// Literal transcription of the SINR expression, summing term by term.
    fn naive_sinr(
        powers: &[f64],
        ch: &ChannelRealization,
        clusters: &[Vec<usize>],
        noise: f64,
    ) -> Vec<f64> {
        let kc = clusters.len();
        (0..kc)
            .map(|k| {
                if powers[k] == 0.0 {
                    return 0.0;
                }
                let mut sig = Complex64::new(0.0, 0.0);
                for &m in &clusters[k] {
                    sig += ch.g_hat[m][k].conj() * ch.g[m][k];
                }
                let num = powers[k] * sig.norm_sqr();
                let mut den = 0.0;
                for kp in 0..kc {
                    if kp == k {
                        continue;
                    }
                    let mut cross = Complex64::new(0.0, 0.0);
                    for &m in &clusters[k] {
                        cross += ch.g_hat[m][k].conj() * ch.g[m][kp];
                    }
                    den += powers[kp] * cross.norm_sqr();
                }
                let mut est = 0.0;
                for &m in &clusters[k] {
                    est += ch.g_hat[m][k].norm_sqr();
                }
                num / (den + noise * est)
            })
            .collect()
    }

    #[test]
    fn sinr_matches_naive_oracle() {
        for seed in 0..100u64 {
            let scenario = tiny_scenario(seed, 6, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
            let ch = draw_channels(&scenario, &RadioConfig::default(), 3, &mut rng);
            let powers = vec![
                0.1 * rng.gen::<f64>(),
                0.1 * rng.gen::<f64>(),
                0.1 * rng.gen::<f64>(),
            ];
            let noise = RadioConfig::default().noise_power_w();
            let fast = uplink_sinr(&powers, &ch, &scenario.clusters, noise);
            let slow = naive_sinr(&powers, &ch, &scenario.clusters, noise);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn single_user_perfect_csi_closed_form() {
        let scenario = tiny_scenario(21, 4, 1);
        let mut radio = RadioConfig::default();
        radio.pilot_power_w = f64::INFINITY; // g_hat == g
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = draw_channels(&scenario, &radio, 1, &mut rng);
        let noise = radio.noise_power_w();
        let p = 0.07;
        let gamma = uplink_sinr(&[p], &ch, &scenario.clusters, noise)[0];
        let energy: f64 = scenario.clusters[0]
            .iter()
            .map(|&m| ch.g[m][0].norm_sqr())
            .sum();
        let expect = p * energy / noise;
        assert!((gamma - expect).abs() / expect < 1e-12);
        // and exact linearity in p for the single-user case
        let gamma2 = uplink_sinr(&[2.0 * p], &ch, &scenario.clusters, noise)[0];
        assert!((gamma2 - 2.0 * gamma).abs() / gamma2 < 1e-12);
    }

    #[test]
    fn zero_power_zero_sinr_and_rate() {
        let scenario = tiny_scenario(31, 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = draw_channels(&scenario, &RadioConfig::default(), 3, &mut rng);
        let noise = RadioConfig::default().noise_power_w();
        let sinr = uplink_sinr(&[0.0, 0.05, 0.05], &ch, &scenario.clusters, noise);
        assert_eq!(sinr[0], 0.0);
        assert_eq!(achievable_rate(0.0, 5e6, 1.0), 0.0);
    }

    #[test]
    fn rate_examples() {
        assert!((achievable_rate(3.0, 5e6, 1.0) - 1e7).abs() < 1e-6);
        assert!((achievable_rate(1.0, 5e6, 1.0) - 5e6).abs() < 1e-9);
    }

    #[test]
    fn raising_one_power_weakly_degrades_others() {
        let scenario = tiny_scenario(41, 8, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = draw_channels(&scenario, &RadioConfig::default(), 4, &mut rng);
        let noise = RadioConfig::default().noise_power_w();
        let base = uplink_sinr(&[0.05; 4], &ch, &scenario.clusters, noise);
        let mut powers = [0.05; 4];
        powers[2] = 0.1;
        let bumped = uplink_sinr(&powers, &ch, &scenario.clusters, noise);
        for k in 0..4 {
            if k != 2 {
                assert!(bumped[k] <= base[k] + 1e-18);
            }
        }
    }

    #[test]
    fn architectures_reshape_clusters() {
        let scenario = tiny_scenario(51, 10, 3);
        let c = default_plc();

        let cf = make_architecture(&scenario, Architecture::CellFree, &c);
        assert_eq!(cf.beta, scenario.beta);
        assert_eq!(cf.clusters, scenario.clusters);

        let sc = make_architecture(&scenario, Architecture::SmallCell, &c);
        for (k, cluster) in sc.clusters.iter().enumerate() {
            assert_eq!(cluster.len(), 1);
            let best = (0..scenario.ap_count())
                .max_by(|&a, &b| {
                    scenario.beta[a][k]
                        .partial_cmp(&scenario.beta[b][k])
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            assert_eq!(cluster[0], best);
        }
        assert_eq!(sc.user_positions, scenario.user_positions);

        let col = make_architecture(&scenario, Architecture::Colocated, &c);
        let antennas = scenario.clusters[0].len();
        assert_eq!(col.ap_count(), antennas);
        assert_eq!(col.user_positions, scenario.user_positions);
        for k in 0..col.user_count() {
            for m in 1..antennas {
                assert_eq!(col.beta[m][k], col.beta[0][k]);
            }
            assert_eq!(col.clusters[k].len(), antennas);
        }
        // rebuilding is deterministic
        let col2 = make_architecture(&scenario, Architecture::Colocated, &c);
        assert_eq!(col.beta, col2.beta);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sinr_equals_oracle_on_random_instances(seed in 0u64..10_000, scale in 1e-3f64..1.0) {
            let scenario = tiny_scenario(seed, 8, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
            let ch = draw_channels(&scenario, &RadioConfig::default(), 4, &mut rng);
            let powers: Vec<f64> = (0..4).map(|_| scale * rng.gen::<f64>()).collect();
            let noise = RadioConfig::default().noise_power_w();
            let fast = uplink_sinr(&powers, &ch, &scenario.clusters, noise);
            let slow = naive_sinr(&powers, &ch, &scenario.clusters, noise);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }

        #[test]
        fn uniform_power_scaling_is_monotone(seed in 0u64..5_000, c in 1.001f64..50.0) {
            let scenario = tiny_scenario(seed, 6, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ch = draw_channels(&scenario, &RadioConfig::default(), 3, &mut rng);
            let noise = RadioConfig::default().noise_power_w();
            let p0: Vec<f64> = (0..3).map(|_| 0.02 + 0.05 * rng.gen::<f64>()).collect();
            let p1: Vec<f64> = p0.iter().map(|p| p * c).collect();
            let g0 = uplink_sinr(&p0, &ch, &scenario.clusters, noise);
            let g1 = uplink_sinr(&p1, &ch, &scenario.clusters, noise);
            // Scaling all powers up only shrinks the noise share of the
            // denominator, so every SINR weakly improves.
            for (a, b) in g1.iter().zip(&g0) {
                prop_assert!(a >= b);
            }
        }
    }
}
