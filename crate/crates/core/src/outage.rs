//! First-hop outage probability Pr{γ_R < μ} of the MRC receiver under
//! co-channel interference, by three independent routes: a finite closed
//! form (partial fractions over the interference stages), adaptive
//! quadrature against the interference density, and Monte Carlo.

use crate::channel::SystemConfig;
use crate::gamma::GammaParams;
use crate::hypoexp::{ExpSumDensity, HypoExpError, HypoExpParams};
use crate::quad::integrate_semi_infinite;
use crate::sampling::{sample_exponential, sample_gamma, RngStream};
use crate::special::{reg_lower_gamma, reg_upper_gamma, SpecialError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageMethod {
    /// Exact finite sum; requires pairwise-distinct interference means.
    Closed,
    /// Adaptive quadrature of the gamma tail against the interference
    /// density; handles repeated means.
    Quadrature,
    MonteCarlo { trials: u64, stream: RngStream },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OutageError {
    #[error("interference means are degenerate; use OutageMethod::Quadrature")]
    DegenerateRates,
    #[error("invalid interference parameters")]
    InvalidInterference,
    #[error(transparent)]
    Special(#[from] SpecialError),
}

impl From<HypoExpError> for OutageError {
    fn from(e: HypoExpError) -> Self {
        match e {
            HypoExpError::DegenerateRates => OutageError::DegenerateRates,
            HypoExpError::InvalidMeans => OutageError::InvalidInterference,
        }
    }
}

/// Pr{ P₀‖h₀‖² / (Y + σ_R²) < μ } with P₀‖h₀‖² ~ Gamma(mN, NP₀Ω₀) and Y a
/// sum of exponentials with means P_lΩ_l.
pub fn first_hop_outage(cfg: &SystemConfig, method: OutageMethod) -> Result<f64, OutageError> {
    let shape = (cfg.nakagami_shape as usize * cfg.relay_antennas) as f64;
    // γ_R < μ  ⟺  Gamma(mN, scale P₀Ω₀/m) < μ(Y + σ_R²)
    let rate_c = cfg.nakagami_shape as f64 * cfg.sinr_threshold()
        / (cfg.source_power * cfg.gain_source_relay);
    let noise = cfg.noise_relay;
    let means = cfg.interference_means();
    match method {
        OutageMethod::Closed => closed_form(shape as usize, rate_c, noise, &means),
        OutageMethod::Quadrature => quadrature(shape, rate_c, noise, &means),
        OutageMethod::MonteCarlo { trials, stream } => {
            Ok(monte_carlo(cfg, shape, trials, stream))
        }
    }
}

/// 1 − E_Y[Q(a, c(Y+σ²))] expanded term-by-term over the partial-fraction
/// decomposition of Y; exact for integer shape a.
fn closed_form(a: usize, c: f64, noise: f64, means: &[f64]) -> Result<f64, OutageError> {
    if means.is_empty() {
        return Ok(reg_lower_gamma(a as f64, c * noise)?);
    }
    let hypo = HypoExpParams::new(means.to_vec())?;
    let weights = hypo.weights()?;
    let mut succ = 0.0; // E[Q(a, c(Y+σ²))], the no-outage probability
    for (l, &theta) in means.iter().enumerate() {
        let rate = 1.0 / theta;
        // Σ_k c^k/k! Σ_t C(k,t) σ²^{k−t} t! /(λ+c)^{t+1}
        let mut sum_k = 0.0;
        let mut ck_over_kfact = 1.0; // c^k / k!
        for k in 0..a {
            if k > 0 {
                ck_over_kfact *= c / k as f64;
            }
            let mut inner = 0.0;
            let mut binom = 1.0; // C(k, t)
            let mut tfact = 1.0; // t!
            for t in 0..=k {
                if t > 0 {
                    binom *= (k - t + 1) as f64 / t as f64;
                    tfact *= t as f64;
                }
                let pow_noise = noise.powi((k - t) as i32);
                let denom = (rate + c).powi(t as i32 + 1);
                inner += binom * pow_noise * tfact / denom;
            }
            sum_k += ck_over_kfact * inner;
        }
        succ += weights[l] * rate * sum_k;
    }
    succ *= (-c * noise).exp();
    Ok((1.0 - succ).clamp(0.0, 1.0))
}

fn quadrature(a: f64, c: f64, noise: f64, means: &[f64]) -> Result<f64, OutageError> {
    if means.is_empty() {
        return Ok(reg_lower_gamma(a, c * noise)?);
    }
    let density = ExpSumDensity::new(means)?;
    // The integrand is f_Y(y)·Q(a, c(y+σ²)); the gamma factor confines it to
    // y ≲ a/c. Window on the narrower of the two features so the adaptive
    // rule cannot step over a bump far below the interference mean.
    let gamma_span = (a + 10.0 * a.sqrt() + 10.0) / c;
    let scale = (density.mean() + density.max_stage_mean()).min(gamma_span);
    let succ = integrate_semi_infinite(
        |y: f64| {
            let q = reg_upper_gamma(a, c * (y + noise)).unwrap_or(0.0);
            q * density.pdf(y)
        },
        scale,
        1e-11,
    );
    Ok((1.0 - succ).clamp(0.0, 1.0))
}

fn monte_carlo(cfg: &SystemConfig, shape: f64, trials: u64, stream: RngStream) -> f64 {
    let mut rng = stream.rng();
    let mu = cfg.sinr_threshold();
    let signal_dist = GammaParams::new(
        shape,
        cfg.source_power * cfg.relay_antennas as f64 * cfg.gain_source_relay,
    )
    .expect("valid signal distribution");
    let means = cfg.interference_means();
    let mut outages = 0u64;
    for _ in 0..trials {
        let signal = sample_gamma(&mut rng, signal_dist);
        let interference: f64 = means
            .iter()
            .map(|&m| sample_exponential(&mut rng, m).expect("positive mean"))
            .sum();
        if signal / (interference + cfg.noise_relay) < mu {
            outages += 1;
        }
    }
    outages as f64 / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l: usize, source_power: f64, interferer_power: f64) -> SystemConfig {
        SystemConfig {
            source_power,
            interferer_powers: vec![interferer_power; l],
            efficiency: 0.5,
            nakagami_shape: 2,
            relay_antennas: 4,
            gain_source_relay: 1.0 / 37.0,
            gain_interferer_relay: vec![1.0 / 145.0, 1.0 / 170.0, 1.0 / 197.0][..l].to_vec(),
            gain_relay_dest: 1.0 / 197.0,
            noise_relay: 1e-11,
            noise_dest: 1e-11,
            rate: 1.0,
        }
    }

    #[test]
    fn no_interference_reduction() {
        let c = cfg(0, 1.0, 0.0);
        let m = c.nakagami_shape as f64;
        let n = c.relay_antennas as f64;
        let expect = reg_lower_gamma(
            m * n,
            m * c.sinr_threshold() * c.noise_relay / (c.source_power * c.gain_source_relay),
        )
        .unwrap();
        for method in [OutageMethod::Closed, OutageMethod::Quadrature] {
            let got = first_hop_outage(&c, method).unwrap();
            assert!((got - expect).abs() < 1e-15);
        }
        // Vanishing noise: threshold collapses, outage → 0.
        let mut c0 = c.clone();
        c0.noise_relay = 1e-30;
        assert!(first_hop_outage(&c0, OutageMethod::Closed).unwrap() < 1e-12);
    }

    #[test]
    fn closed_matches_quadrature() {
        for (ps, pi) in [(1.0, 0.1), (0.1, 0.1), (10.0, 1.0), (0.01, 3.0)] {
            let c = cfg(3, ps, pi);
            let a = first_hop_outage(&c, OutageMethod::Closed).unwrap();
            let b = first_hop_outage(&c, OutageMethod::Quadrature).unwrap();
            assert!((a - b).abs() < 1e-6, "P_s={ps} P_I={pi}: {a} vs {b}");
        }
    }

    #[test]
    fn closed_matches_monte_carlo() {
        let c = cfg(3, 1.0, 0.1); // 30 dBm source, 20 dBm interferers
        let closed = first_hop_outage(&c, OutageMethod::Closed).unwrap();
        let trials = 2_000_000;
        let mc = first_hop_outage(
            &c,
            OutageMethod::MonteCarlo { trials, stream: RngStream::new(7, 0) },
        )
        .unwrap();
        let sigma = (closed * (1.0 - closed) / trials as f64).sqrt();
        assert!(
            (closed - mc).abs() < 3.0 * sigma + 1e-9,
            "closed {closed}, mc {mc}, 3σ {}",
            3.0 * sigma
        );
    }

    #[test]
    fn degenerate_means_route_to_quadrature() {
        let mut c = cfg(2, 1.0, 0.1);
        c.gain_interferer_relay = vec![1.0 / 145.0, 1.0 / 145.0];
        assert_eq!(
            first_hop_outage(&c, OutageMethod::Closed),
            Err(OutageError::DegenerateRates)
        );
        let q = first_hop_outage(&c, OutageMethod::Quadrature).unwrap();
        assert!((0.0..=1.0).contains(&q));
        // Quadrature with merged stages agrees with a slightly-perturbed
        // distinct-rate closed form.
        let mut c2 = c.clone();
        c2.gain_interferer_relay[1] *= 1.0 + 1e-6;
        let closed = first_hop_outage(&c2, OutageMethod::Closed).unwrap();
        assert!((q - closed).abs() < 1e-4, "{q} vs {closed}");
    }

    #[test]
    fn outage_monotone_in_source_power() {
        let mut prev = 1.0;
        for ps in [0.01, 0.1, 1.0, 10.0] {
            let p = first_hop_outage(&cfg(3, ps, 0.1), OutageMethod::Closed).unwrap();
            assert!(p <= prev + 1e-12);
            prev = p;
        }
    }
}
