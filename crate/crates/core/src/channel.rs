//! System configuration, path-loss geometry, and the per-block
//! physical-layer quantities: harvested energies, MRC SINR, MRT SNR, and the
//! outage-free relay transmit power.

use num_complex::Complex64;

use crate::gamma::{moment_match_gamma_sum, GammaError, GammaParams};
use crate::special::reg_upper_gamma;

/// All physical-layer parameters in linear units (Watts, Joules).
///
/// The transmission block is normalized to T = 1; the half-block factors in
/// the energy formulas come from that convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Source transmit power P₀ [W].
    pub source_power: f64,
    /// Interferer transmit powers P_l [W], length L.
    pub interferer_powers: Vec<f64>,
    /// Energy conversion efficiency η ∈ (0, 1].
    pub efficiency: f64,
    /// Nakagami shape m of the source→relay entries (integer per the model).
    pub nakagami_shape: u32,
    /// Relay antenna count N.
    pub relay_antennas: usize,
    /// Average power gain Ω₀ of the source→relay link.
    pub gain_source_relay: f64,
    /// Average power gains Ω_l of the interferer→relay links, length L.
    pub gain_interferer_relay: Vec<f64>,
    /// Average power gain Λ₀ of the relay→destination link.
    pub gain_relay_dest: f64,
    /// Noise power at the relay σ_R² [W].
    pub noise_relay: f64,
    /// Noise power at the destination σ_D² [W].
    pub noise_dest: f64,
    /// Source rate ℝ [bits/s/Hz].
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error("relay is behind or at the destination (d_SD must exceed d_SR)")]
    Geometry,
    #[error("degenerate zero-norm channel vector")]
    DegenerateChannel,
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.source_power > 0.0) {
            return Err(ChannelError::InvalidConfig("source power must be positive"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(ChannelError::InvalidConfig("efficiency must be in (0,1]"));
        }
        if self.nakagami_shape == 0 || self.relay_antennas == 0 {
            return Err(ChannelError::InvalidConfig("m and N must be positive"));
        }
        if self.interferer_powers.len() != self.gain_interferer_relay.len() {
            return Err(ChannelError::InvalidConfig("P_l and Ω_l length mismatch"));
        }
        if self
            .interferer_powers
            .iter()
            .chain(self.gain_interferer_relay.iter())
            .any(|&x| !(x > 0.0 && x.is_finite()))
        {
            return Err(ChannelError::InvalidConfig("interferer terms must be positive"));
        }
        for &x in &[
            self.gain_source_relay,
            self.gain_relay_dest,
            self.noise_relay,
            self.noise_dest,
            self.rate,
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(ChannelError::InvalidConfig("gains, noise and rate must be positive"));
            }
        }
        Ok(())
    }

    pub fn num_interferers(&self) -> usize {
        self.interferer_powers.len()
    }

    /// SINR threshold μ = 2^{2ℝ} − 1 (half-block data transmission).
    pub fn sinr_threshold(&self) -> f64 {
        (2.0f64).powf(2.0 * self.rate) - 1.0
    }

    /// Means P_lΩ_l of the per-interferer exponential powers at the MRC output.
    pub fn interference_means(&self) -> Vec<f64> {
        self.interferer_powers
            .iter()
            .zip(&self.gain_interferer_relay)
            .map(|(&p, &w)| p * w)
            .collect()
    }
}

/// Linear source–relay–destination geometry with interferer distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub d_source_relay: f64,
    pub d_source_dest: f64,
    pub d_interferer_relay: Vec<f64>,
    pub pathloss_exponent: f64,
}

/// Path-loss average power gain 1/(1 + d^α).
pub fn path_loss_gain(d: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + d.powf(alpha))
}

/// Fill in the average power gains of `base` from the linear topology.
pub fn config_from_topology(base: &SystemConfig, topo: &Topology) -> Result<SystemConfig, ChannelError> {
    if topo.d_source_dest <= topo.d_source_relay {
        return Err(ChannelError::Geometry);
    }
    if !(2.0..=5.0).contains(&topo.pathloss_exponent) {
        return Err(ChannelError::InvalidConfig("path-loss exponent must be in [2,5]"));
    }
    let alpha = topo.pathloss_exponent;
    let mut cfg = base.clone();
    cfg.gain_source_relay = path_loss_gain(topo.d_source_relay, alpha);
    cfg.gain_relay_dest = path_loss_gain(topo.d_source_dest - topo.d_source_relay, alpha);
    cfg.gain_interferer_relay = topo
        .d_interferer_relay
        .iter()
        .map(|&d| path_loss_gain(d, alpha))
        .collect();
    cfg.validate()?;
    Ok(cfg)
}

/// One block-fading realization of every channel vector.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    /// Source→relay vector h₀.
    pub h0: Vec<Complex64>,
    /// Relay→destination vector g₀.
    pub g0: Vec<Complex64>,
    /// Interferer→relay vectors h_l.
    pub hl: Vec<Vec<Complex64>>,
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

impl ChannelDraw {
    pub fn h0_norm_sq(&self) -> f64 {
        norm_sq(&self.h0)
    }

    pub fn g0_norm_sq(&self) -> f64 {
        norm_sq(&self.g0)
    }

    /// |v_l|² = |h₀†h_l|²/‖h₀‖², the interference powers after combining.
    pub fn projected_interference_powers(&self) -> Result<Vec<f64>, ChannelError> {
        let h0_sq = self.h0_norm_sq();
        if h0_sq <= 0.0 {
            return Err(ChannelError::DegenerateChannel);
        }
        Ok(self
            .hl
            .iter()
            .map(|hl| {
                let dot: Complex64 = self.h0.iter().zip(hl).map(|(a, b)| a.conj() * b).sum();
                dot.norm_sqr() / h0_sq
            })
            .collect())
    }
}

/// Total harvested energy in Mode I: (η/2)P₀‖h₀‖² + η Σ P_l‖h_l‖².
pub fn harvested_energy_eh(draw: &ChannelDraw, cfg: &SystemConfig) -> f64 {
    let eta = cfg.efficiency;
    let src = 0.5 * eta * cfg.source_power * draw.h0_norm_sq();
    let cci: f64 = cfg
        .interferer_powers
        .iter()
        .zip(&draw.hl)
        .map(|(&p, hl)| p * norm_sq(hl))
        .sum();
    src + eta * cci
}

/// Harvested energy in Mode II (CCI only, second slot): (η/2) Σ P_l‖h_l‖².
pub fn harvested_energy_cci_only(draw: &ChannelDraw, cfg: &SystemConfig) -> f64 {
    0.5 * cfg.efficiency
        * cfg
            .interferer_powers
            .iter()
            .zip(&draw.hl)
            .map(|(&p, hl)| p * norm_sq(hl))
            .sum::<f64>()
}

/// SINR at the relay after MRC: P₀‖h₀‖² / (Σ P_l|v_l|² + σ_R²).
pub fn mrc_sinr(draw: &ChannelDraw, cfg: &SystemConfig) -> Result<f64, ChannelError> {
    let h0_sq = draw.h0_norm_sq();
    if h0_sq <= 0.0 {
        return Err(ChannelError::DegenerateChannel);
    }
    let proj = draw.projected_interference_powers()?;
    let interference: f64 = cfg
        .interferer_powers
        .iter()
        .zip(&proj)
        .map(|(&p, &v)| p * v)
        .sum();
    Ok(cfg.source_power * h0_sq / (interference + cfg.noise_relay))
}

/// Minimum relay power for an outage-free second hop: P_R = μσ_D²/‖g₀‖².
pub fn required_relay_power(draw: &ChannelDraw, cfg: &SystemConfig) -> Result<f64, ChannelError> {
    let g0_sq = draw.g0_norm_sq();
    if g0_sq <= 0.0 {
        return Err(ChannelError::DegenerateChannel);
    }
    Ok(cfg.sinr_threshold() * cfg.noise_dest / g0_sq)
}

/// Destination SNR under MRT: P_R‖g₀‖²/σ_D².
pub fn mrt_snr(relay_power: f64, draw: &ChannelDraw, cfg: &SystemConfig) -> f64 {
    relay_power * draw.g0_norm_sq() / cfg.noise_dest
}

/// CDF of the required relay power P_R = μσ_D²/‖g₀‖² with
/// ‖g₀‖² ~ Gamma(N, NΛ₀):
/// F(x) = Σ_{i=0}^{N−1} u^i/i! · e^{−u}, u = μσ_D²/(Λ₀x).
pub fn cdf_required_power(x: f64, cfg: &SystemConfig) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let u = cfg.sinr_threshold() * cfg.noise_dest / (cfg.gain_relay_dest * x);
    // Equals Q(N, u); the finite sum is exact for integer N.
    reg_upper_gamma(cfg.relay_antennas as f64, u).expect("valid upper gamma args")
}

/// Gamma summands of the Mode-I harvested energy Ẽ_I:
/// Gamma(mN, (η/2)P₀NΩ₀) plus one Gamma(N, ηP_lNΩ_l) per interferer.
pub fn eh_energy_summands(cfg: &SystemConfig) -> Vec<GammaParams<f64>> {
    let n = cfg.relay_antennas as f64;
    let eta = cfg.efficiency;
    let mut v = vec![GammaParams::new(
        (cfg.nakagami_shape as usize * cfg.relay_antennas) as f64,
        0.5 * eta * cfg.source_power * n * cfg.gain_source_relay,
    )
    .expect("valid source summand")];
    for (&p, &w) in cfg.interferer_powers.iter().zip(&cfg.gain_interferer_relay) {
        v.push(GammaParams::new(n, eta * p * n * w).expect("valid interferer summand"));
    }
    v
}

/// Moment-matched (m_I, Ω_I) of Ẽ_I.
pub fn eh_energy_gamma_params(cfg: &SystemConfig) -> Result<GammaParams<f64>, ChannelError> {
    Ok(moment_match_gamma_sum(&eh_energy_summands(cfg))?)
}

/// Moment-matched (m_J, Ω_J) of the Mode-II energy Ẽ_II, or `None` when
/// there are no interferers (Ẽ_II ≡ 0, a unit step at the origin).
pub fn cci_energy_gamma_params(cfg: &SystemConfig) -> Result<Option<GammaParams<f64>>, ChannelError> {
    if cfg.num_interferers() == 0 {
        return Ok(None);
    }
    let n = cfg.relay_antennas as f64;
    let eta = cfg.efficiency;
    let summands: Vec<_> = cfg
        .interferer_powers
        .iter()
        .zip(&cfg.gain_interferer_relay)
        .map(|(&p, &w)| GammaParams::new(n, 0.5 * eta * p * n * w).expect("valid summand"))
        .collect();
    Ok(Some(moment_match_gamma_sum(&summands)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_complex_gaussian_vector, sample_nakagami_vector, RngStream};

    fn test_config(l: usize) -> SystemConfig {
        SystemConfig {
            source_power: 1.0,
            interferer_powers: vec![0.1; l],
            efficiency: 0.5,
            nakagami_shape: 2,
            relay_antennas: 4,
            gain_source_relay: 1.0 / 37.0,
            gain_interferer_relay: (0..l).map(|i| 1.0 / (145.0 + 25.0 * i as f64)).collect(),
            gain_relay_dest: 1.0 / 197.0,
            noise_relay: 1e-11,
            noise_dest: 1e-11,
            rate: 1.0,
        }
    }

    fn draw(cfg: &SystemConfig, seed: u64) -> ChannelDraw {
        let mut rng = RngStream::new(seed, 0).rng();
        let n = cfg.relay_antennas;
        ChannelDraw {
            h0: sample_nakagami_vector(&mut rng, n, cfg.nakagami_shape, cfg.gain_source_relay)
                .unwrap(),
            g0: sample_complex_gaussian_vector(&mut rng, n, cfg.gain_relay_dest).unwrap(),
            hl: cfg
                .gain_interferer_relay
                .iter()
                .map(|&w| sample_complex_gaussian_vector(&mut rng, n, w).unwrap())
                .collect(),
        }
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss_gain(0.0, 2.0), 1.0);
        assert!((path_loss_gain(6.0, 2.0) - 1.0 / 37.0).abs() < 1e-15);
        assert!((path_loss_gain(20.0, 3.0) - 1.0 / 8001.0).abs() < 1e-18);
        assert!((path_loss_gain(12.0, 4.0) - 1.0 / 20737.0).abs() < 1e-18);
    }

    #[test]
    fn topology_reproduces_reference_gains() {
        let topo = Topology {
            d_source_relay: 6.0,
            d_source_dest: 20.0,
            d_interferer_relay: vec![12.0, 13.0, 14.0],
            pathloss_exponent: 2.0,
        };
        let cfg = config_from_topology(&test_config(3), &topo).unwrap();
        assert!((cfg.gain_source_relay - 1.0 / 37.0).abs() < 1e-15);
        assert!((cfg.gain_relay_dest - 1.0 / 197.0).abs() < 1e-15);
        let expect = [1.0 / 145.0, 1.0 / 170.0, 1.0 / 197.0];
        for (g, e) in cfg.gain_interferer_relay.iter().zip(expect) {
            assert!((g - e).abs() < 1e-15);
        }
        // L = 0 passes through
        let mut base = test_config(0);
        base.interferer_powers.clear();
        let topo0 = Topology { d_interferer_relay: vec![], ..topo };
        assert!(config_from_topology(&base, &topo0)
            .unwrap()
            .gain_interferer_relay
            .is_empty());
    }

    #[test]
    fn geometry_error() {
        let topo = Topology {
            d_source_relay: 20.0,
            d_source_dest: 20.0,
            d_interferer_relay: vec![],
            pathloss_exponent: 2.0,
        };
        let mut base = test_config(0);
        base.interferer_powers.clear();
        assert_eq!(config_from_topology(&base, &topo), Err(ChannelError::Geometry));
    }

    #[test]
    fn harvested_energy_term_by_term() {
        let cfg = test_config(3);
        let d = draw(&cfg, 11);
        let eta = cfg.efficiency;
        let mut expect = 0.5 * eta * cfg.source_power * norm_sq(&d.h0);
        for (p, hl) in cfg.interferer_powers.iter().zip(&d.hl) {
            expect += eta * p * norm_sq(hl);
        }
        assert!((harvested_energy_eh(&d, &cfg) - expect).abs() < 1e-15 * expect);
        // Mode II harvests the CCI for one slot only: 2Ẽ_II = Ẽ_I − (η/2)P₀‖h₀‖².
        let e2 = harvested_energy_cci_only(&d, &cfg);
        let cci_full: f64 = cfg
            .interferer_powers
            .iter()
            .zip(&d.hl)
            .map(|(p, hl)| p * norm_sq(hl))
            .sum();
        assert!((e2 - 0.5 * eta * cci_full).abs() < 1e-15);
        assert!(e2 <= harvested_energy_eh(&d, &cfg));
        let identity = harvested_energy_eh(&d, &cfg)
            - 2.0 * e2
            - 0.5 * eta * cfg.source_power * norm_sq(&d.h0);
        assert!(identity.abs() < 1e-15);
    }

    #[test]
    fn cci_energy_zero_without_interferers() {
        let mut cfg = test_config(0);
        cfg.interferer_powers.clear();
        let d = draw(&cfg, 5);
        assert_eq!(harvested_energy_cci_only(&d, &cfg), 0.0);
        assert!(cci_energy_gamma_params(&cfg).unwrap().is_none());
    }

    // Oracle: apply the explicit MRC weight vector to the received signal
    // model and compare power ratios.
    #[test]
    fn mrc_sinr_matches_direct_combining() {
        let cfg = test_config(3);
        for seed in 0..50 {
            let d = draw(&cfg, seed);
            let h0_norm = d.h0_norm_sq().sqrt();
            // w = h₀†/‖h₀‖; signal amplitude |w·h₀|² = ‖h₀‖²
            let signal = cfg.source_power * d.h0_norm_sq();
            let mut interference = 0.0;
            for (p, hl) in cfg.interferer_powers.iter().zip(&d.hl) {
                let dot: Complex64 = d.h0.iter().zip(hl).map(|(a, b)| a.conj() * b).sum();
                interference += p * (dot / h0_norm).norm_sqr();
            }
            let expect = signal / (interference + cfg.noise_relay);
            let got = mrc_sinr(&d, &cfg).unwrap();
            assert!(((got - expect) / expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mrc_sinr_no_interference_and_scale_invariance() {
        let mut cfg = test_config(0);
        cfg.interferer_powers.clear();
        let d = draw(&cfg, 3);
        let got = mrc_sinr(&d, &cfg).unwrap();
        let expect = cfg.source_power * d.h0_norm_sq() / cfg.noise_relay;
        assert!(((got - expect) / expect).abs() < 1e-14);

        // Common scaling of {P₀, P_l, σ_R²} leaves γ_R unchanged.
        let cfg = test_config(3);
        let d = draw(&cfg, 8);
        let base = mrc_sinr(&d, &cfg).unwrap();
        let mut scaled = cfg.clone();
        scaled.source_power *= 7.0;
        scaled.interferer_powers.iter_mut().for_each(|p| *p *= 7.0);
        scaled.noise_relay *= 7.0;
        let after = mrc_sinr(&d, &scaled).unwrap();
        assert!(((after - base) / base).abs() < 1e-12);
    }

    #[test]
    fn relay_power_hits_threshold_exactly() {
        let cfg = test_config(3);
        let mu = cfg.sinr_threshold();
        for seed in 0..1000 {
            let d = draw(&cfg, seed);
            let pr = required_relay_power(&d, &cfg).unwrap();
            let snr = mrt_snr(pr, &d, &cfg);
            assert!(((snr - mu) / mu).abs() <= 1e-12);
        }
        // Doubling ‖g₀‖² halves P_R.
        let mut d = draw(&cfg, 0);
        let p1 = required_relay_power(&d, &cfg).unwrap();
        let s2 = 2.0f64.sqrt();
        d.g0.iter_mut().for_each(|z| *z *= s2);
        let p2 = required_relay_power(&d, &cfg).unwrap();
        assert!(((p1 / p2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn required_power_substitution() {
        let mut cfg = test_config(0);
        cfg.rate = 1.0; // μ = 3
        cfg.noise_dest = 1.0;
        let d = ChannelDraw {
            h0: vec![Complex64::new(1.0, 0.0)],
            g0: vec![Complex64::new(3.0f64.sqrt(), 0.0)],
            hl: vec![],
        };
        assert!((required_relay_power(&d, &cfg).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cdf_required_power_shape() {
        let cfg = test_config(3);
        assert_eq!(cdf_required_power(0.0, &cfg), 0.0);
        assert_eq!(cdf_required_power(-1.0, &cfg), 0.0);
        assert!(cdf_required_power(1e12, &cfg) > 1.0 - 1e-9);
        let mut prev = 0.0;
        for i in 1..=1000 {
            let x = i as f64 * 1e-4;
            let c = cdf_required_power(x, &cfg);
            assert!((0.0..=1.0).contains(&c));
            assert!(c + 1e-15 >= prev);
            prev = c;
        }
        // N = 1 reduction: F(x) = exp(−μσ_D²/(Λ₀x))
        let mut cfg1 = cfg.clone();
        cfg1.relay_antennas = 1;
        let x = 0.02;
        let expect = (-cfg1.sinr_threshold() * cfg1.noise_dest / (cfg1.gain_relay_dest * x)).exp();
        assert!((cdf_required_power(x, &cfg1) - expect).abs() < 1e-13);
    }

    #[test]
    fn eh_params_single_summand_exact() {
        let mut cfg = test_config(0);
        cfg.interferer_powers.clear();
        let p = eh_energy_gamma_params(&cfg).unwrap();
        let n = cfg.relay_antennas as f64;
        assert!((p.shape - (cfg.nakagami_shape as f64) * n).abs() < 1e-12);
        let expect_mean = 0.5 * cfg.efficiency * cfg.source_power * n * cfg.gain_source_relay;
        assert!(((p.mean - expect_mean) / expect_mean).abs() < 1e-14);
    }

    #[test]
    fn eh_params_mean_additivity() {
        let cfg = test_config(3);
        let p = eh_energy_gamma_params(&cfg).unwrap();
        let n = cfg.relay_antennas as f64;
        let mut expect = 0.5 * cfg.efficiency * cfg.source_power * n * cfg.gain_source_relay;
        for (pw, w) in cfg.interferer_powers.iter().zip(&cfg.gain_interferer_relay) {
            expect += cfg.efficiency * pw * n * w;
        }
        assert!(((p.mean - expect) / expect).abs() < 1e-14);
    }
}
