//! The analytical core: battery discretization, the eight-case transition
//! matrix of the battery chain, its stationary distribution, and the
//! resulting outage probability and throughput.


use crate::channel::{
    cci_energy_gamma_params, cdf_required_power, eh_energy_gamma_params, ChannelError,
    SystemConfig,
};
use crate::gamma::{GammaError, GammaParams};
use crate::linalg::{solve_dense, SolveError};
use crate::outage::{first_hop_outage, OutageError, OutageMethod};
use crate::Scalar;

/// Discrete-level battery: levels ε_i = iC/Q for i ∈ {0..Q}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryModel<F> {
    pub capacity: F,
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyLevel {
    Level(usize),
    /// Required power exceeds what a full battery can deliver.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarkovError {
    #[error("battery capacity and level count must be positive")]
    InvalidBattery,
    #[error("row {row} of the transition matrix sums to 1{deviation:+e}")]
    RowSum { row: usize, deviation: f64 },
    #[error("transition matrix has no unique stationary distribution")]
    ReducibleChain,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Outage(#[from] OutageError),
}

impl<F: Scalar> BatteryModel<F> {
    pub fn new(capacity: F, levels: usize) -> Result<Self, MarkovError> {
        if !(capacity > F::zero() && capacity.is_finite()) || levels == 0 {
            return Err(MarkovError::InvalidBattery);
        }
        Ok(Self { capacity, levels })
    }

    pub fn level_energy(&self, i: usize) -> F {
        debug_assert!(i <= self.levels);
        F::from(i as f64).unwrap() * self.capacity / F::from(self.levels as f64).unwrap()
    }

    /// Largest level strictly below the harvested amount (capped at Q).
    /// The strict inequality means harvests never round up.
    pub fn discretize_harvest(&self, x: F) -> usize {
        if x <= F::zero() {
            return 0;
        }
        let q = self.levels;
        if x > self.capacity {
            return q;
        }
        let guess = (x * F::from(q as f64).unwrap() / self.capacity)
            .floor()
            .to_f64()
            .unwrap() as usize;
        let mut i = guess.min(q);
        // resolve round-off at the boundary against the defining inequality
        while i > 0 && !(self.level_energy(i) < x) {
            i -= 1;
        }
        while i < q && self.level_energy(i + 1) < x {
            i += 1;
        }
        i
    }

    /// Smallest level whose energy covers `p_r / 2`, the half-block
    /// transmission energy; `Infeasible` when even a full battery cannot.
    pub fn required_energy_level(&self, p_r: F) -> EnergyLevel {
        let half = F::from(0.5).unwrap();
        let need = p_r * half;
        if need > self.capacity {
            return EnergyLevel::Infeasible;
        }
        let q = self.levels;
        let guess = (need * F::from(q as f64).unwrap() / self.capacity)
            .ceil()
            .to_f64()
            .unwrap() as usize;
        let mut j = guess.min(q).max(1);
        while j > 1 && self.level_energy(j - 1) >= need {
            j -= 1;
        }
        while j < q && self.level_energy(j) < need {
            j += 1;
        }
        EnergyLevel::Level(j)
    }
}

/// Everything the transition matrix needs from the physical layer.
pub struct ModelInputs<'a, F> {
    pub eh_dist: GammaParams<F>,
    /// `None` encodes the L = 0 case: the Mode-II energy is identically
    /// zero and its CDF a unit step at the origin.
    pub cci_dist: Option<GammaParams<F>>,
    pub power_cdf: &'a dyn Fn(F) -> F,
    pub first_hop_outage: F,
}

/// Row-stochastic (Q+1)×(Q+1) battery-level transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<F> {
    q: usize,
    entries: Vec<F>,
}

impl<F: Scalar> TransitionMatrix<F> {
    pub fn dim(&self) -> usize {
        self.q + 1
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.entries[i * self.dim() + j]
    }

    pub fn row(&self, i: usize) -> &[F] {
        let n = self.dim();
        &self.entries[i * n..(i + 1) * n]
    }

    #[cfg(test)]
    pub(crate) fn entry_mut(&mut self, i: usize, j: usize) -> &mut F {
        let n = self.dim();
        &mut self.entries[i * n + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist<F> {
    pub probs: Vec<F>,
}

const ROW_SUM_HARD_LIMIT: f64 = 1e-6;

/// Assemble the eight transition cases. Rows are asserted row-stochastic,
/// never renormalized: a violation signals a transcription bug.
pub fn build_transition_matrix<F: Scalar>(
    inputs: &ModelInputs<'_, F>,
    battery: &BatteryModel<F>,
) -> Result<TransitionMatrix<F>, MarkovError> {
    let q = battery.levels;
    let n = q + 1;
    let pr_o = inputs.first_hop_outage;
    let one = F::one();
    let two = F::from(2.0).unwrap();

    // F_{Ẽ_I}(kC/Q), F_{Ẽ_II}(kC/Q), F_{P_R}(2kC/Q) for k = 0..=Q
    let mut f_eh = Vec::with_capacity(n);
    let mut f_cci = Vec::with_capacity(n);
    let mut f_pow = Vec::with_capacity(n);
    for k in 0..=q {
        let e = battery.level_energy(k);
        f_eh.push(inputs.eh_dist.cdf(e)?);
        f_cci.push(match &inputs.cci_dist {
            Some(d) => d.cdf(e)?,
            None => {
                if k == 0 {
                    F::zero()
                } else {
                    one
                }
            }
        });
        f_pow.push((inputs.power_cdf)(two * e));
    }

    let mut entries = vec![F::zero(); n * n];
    // empty battery: Mode I only
    entries[0] = f_eh[1.min(q)];
    for j in 1..q {
        entries[j] = f_eh[j + 1] - f_eh[j];
    }
    entries[q] = one - f_eh[q];
    if q == 1 {
        // the two cells above collapse; rebuild explicitly
        entries[0] = f_eh[1];
        entries[1] = one - f_eh[1];
    }

    for i in 1..q {
        let can_forward = f_pow[i];
        let cannot = one - can_forward;
        let row = &mut entries[i * n..(i + 1) * n];
        // discharge: Mode III drops exactly i−j levels
        for j in 0..i {
            row[j] = (one - pr_o) * (f_pow[i - j] - f_pow[i - j - 1]);
        }
        // unchanged: zero discretized harvest in Mode I or II
        row[i] = cannot * f_eh[1] + can_forward * pr_o * f_cci[1];
        // partial charge by j−i levels
        for j in i + 1..q {
            let d = j - i;
            row[j] = cannot * (f_eh[d + 1] - f_eh[d]) + pr_o * can_forward * (f_cci[d + 1] - f_cci[d]);
        }
        // fully charged
        row[q] = cannot * (one - f_eh[q - i]) + pr_o * can_forward * (one - f_cci[q - i]);
    }

    // full battery row
    {
        let row = &mut entries[q * n..];
        for j in 0..q {
            row[j] = (one - pr_o) * (f_pow[q - j] - f_pow[q - j - 1]);
        }
        row[q] = (one - f_pow[q]) + f_pow[q] * pr_o;
    }

    let z = TransitionMatrix { q, entries };
    check_row_stochastic(&z)?;
    Ok(z)
}

/// Assert every row sums to 1 within the hard limit, naming the first
/// offending row.
pub fn check_row_stochastic<F: Scalar>(z: &TransitionMatrix<F>) -> Result<(), MarkovError> {
    for i in 0..z.dim() {
        let sum = z.row(i).iter().fold(F::zero(), |a, &b| a + b);
        let dev = (sum - F::one()).to_f64().unwrap();
        if dev.abs() > ROW_SUM_HARD_LIMIT {
            return Err(MarkovError::RowSum { row: i, deviation: dev });
        }
    }
    Ok(())
}

/// Solve π = Zᵀπ by the direct system (Zᵀ − I + B)π = 1 with B all-ones.
pub fn stationary_distribution<F: Scalar>(
    z: &TransitionMatrix<F>,
) -> Result<StationaryDist<F>, MarkovError> {
    let n = z.dim();
    let mut a = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            // Zᵀ[i][j] = Z[j][i]
            let mut v = z.get(j, i) + F::one();
            if i == j {
                v = v - F::one();
            }
            a[i * n + j] = v;
        }
    }
    let mut b = vec![F::one(); n];
    match solve_dense(&mut a, &mut b) {
        Ok(()) => Ok(StationaryDist { probs: b }),
        // Degenerate chains (e.g. Z ≈ I when no energy ever arrives) make the
        // direct system singular; fall back to the Cesàro average of the
        // power iteration, which converges to a stationary vector for any
        // row-stochastic matrix.
        Err(SolveError::IllConditioned(_)) => cesaro_stationary(z),
    }
}

fn cesaro_stationary<F: Scalar>(z: &TransitionMatrix<F>) -> Result<StationaryDist<F>, MarkovError> {
    let n = z.dim();
    let uniform = F::one() / F::from(n).unwrap();
    let mut cur = vec![uniform; n];
    let mut avg = vec![F::zero(); n];
    let mut next = vec![F::zero(); n];
    let tol = F::from(1e-12).unwrap();
    for iter in 1..=200_000u32 {
        for v in next.iter_mut() {
            *v = F::zero();
        }
        for i in 0..n {
            for j in 0..n {
                next[j] = next[j] + cur[i] * z.get(i, j);
            }
        }
        let k = F::from(iter).unwrap();
        let mut drift = F::zero();
        for j in 0..n {
            avg[j] = avg[j] + (next[j] - avg[j]) / k;
            drift = drift.max((next[j] - cur[j]).abs());
        }
        std::mem::swap(&mut cur, &mut next);
        if drift <= tol {
            // the average is already stationary; verify the residual
            let mut worst = F::zero();
            for j in 0..n {
                let mut back = F::zero();
                for i in 0..n {
                    back = back + avg[i] * z.get(i, j);
                }
                worst = worst.max((back - avg[j]).abs());
            }
            if worst <= F::from(1e-9).unwrap() {
                return Ok(StationaryDist { probs: avg });
            }
            break;
        }
    }
    Err(MarkovError::ReducibleChain)
}

/// Eq. of the stationary outage: mass of all non-discharging transitions,
/// P_out = Σ_i π_i Σ_{j≥i} T_{i,j}.
pub fn outage_probability<F: Scalar>(pi: &StationaryDist<F>, z: &TransitionMatrix<F>) -> F {
    let n = z.dim();
    debug_assert_eq!(pi.probs.len(), n);
    let mut p = F::zero();
    for i in 0..n {
        let mut stay = F::zero();
        for j in i..n {
            stay = stay + z.get(i, j);
        }
        p = p + pi.probs[i] * stay;
    }
    p.min(F::one()).max(F::zero())
}

/// Throughput Υ = ℝ(1 − P_out).
pub fn throughput<F: Scalar>(p_out: F, rate: F) -> F {
    rate * (F::one() - p_out)
}

/// Full closed-form pipeline output, with intermediates kept for inspection.
#[derive(Debug, Clone)]
pub struct AnalyticReport {
    pub eh_dist: GammaParams<f64>,
    pub cci_dist: Option<GammaParams<f64>>,
    pub first_hop_outage: f64,
    pub transition_matrix: TransitionMatrix<f64>,
    pub stationary: StationaryDist<f64>,
    pub outage: f64,
    pub throughput: f64,
}

/// Compose the full analytical chain for one configuration. The first-hop
/// outage uses the closed route, falling back to quadrature on degenerate
/// interference rates.
pub fn analytic_pipeline(
    cfg: &SystemConfig,
    battery: &BatteryModel<f64>,
) -> Result<AnalyticReport, MarkovError> {
    cfg.validate()?;
    let eh_dist = eh_energy_gamma_params(cfg)?;
    let cci_dist = cci_energy_gamma_params(cfg)?;
    let pr_o = match first_hop_outage(cfg, OutageMethod::Closed) {
        Ok(p) => p,
        Err(OutageError::DegenerateRates) => first_hop_outage(cfg, OutageMethod::Quadrature)?,
        Err(e) => return Err(e.into()),
    };
    let power_cdf = |x: f64| cdf_required_power(x, cfg);
    let inputs = ModelInputs {
        eh_dist,
        cci_dist,
        power_cdf: &power_cdf,
        first_hop_outage: pr_o,
    };
    let z = build_transition_matrix(&inputs, battery)?;
    let pi = stationary_distribution(&z)?;
    let p_out = outage_probability(&pi, &z);
    Ok(AnalyticReport {
        eh_dist,
        cci_dist,
        first_hop_outage: pr_o,
        throughput: throughput(p_out, cfg.rate),
        outage: p_out,
        stationary: pi,
        transition_matrix: z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn battery() -> BatteryModel<f64> {
        BatteryModel::new(0.5, 90).unwrap()
    }

    #[test]
    fn discretize_harvest_cases() {
        let b = battery();
        assert_eq!(b.discretize_harvest(0.001), 0); // below ε₁ ≈ 0.00556
        assert_eq!(b.discretize_harvest(0.4), 71); // ε₇₂ = 0.4 exactly, strict
        assert_eq!(b.discretize_harvest(0.9), 90); // above capacity
        assert_eq!(b.discretize_harvest(0.0), 0);
    }

    #[test]
    fn required_level_cases() {
        let b = battery();
        // P_R/2 = ε₃ exactly → level 3 (boundary is inclusive)
        let e3 = b.level_energy(3);
        assert_eq!(b.required_energy_level(2.0 * e3), EnergyLevel::Level(3));
        assert_eq!(b.required_energy_level(2.0 * 0.49), EnergyLevel::Level(89));
        assert_eq!(b.required_energy_level(2.0 * 0.51), EnergyLevel::Infeasible);
    }

    #[test]
    fn discretize_strict_inequality_semantics() {
        let b = BatteryModel::new(1.0, 10).unwrap();
        for k in 0..10usize {
            let eps = b.level_energy(k);
            let delta = 0.049;
            assert_eq!(b.discretize_harvest(eps + delta), k);
        }
    }

    proptest! {
        #[test]
        fn discretize_monotone(xs in prop::collection::vec(0.0f64..1.0, 2)) {
            let b = BatteryModel::new(0.7, 33).unwrap();
            let (lo, hi) = if xs[0] <= xs[1] { (xs[0], xs[1]) } else { (xs[1], xs[0]) };
            prop_assert!(b.discretize_harvest(lo) <= b.discretize_harvest(hi));
        }

        #[test]
        fn required_level_monotone(ps in prop::collection::vec(1e-6f64..2.0, 2)) {
            let b = BatteryModel::new(0.7, 33).unwrap();
            let (lo, hi) = if ps[0] <= ps[1] { (ps[0], ps[1]) } else { (ps[1], ps[0]) };
            match (b.required_energy_level(lo), b.required_energy_level(hi)) {
                (EnergyLevel::Level(a), EnergyLevel::Level(c)) => prop_assert!(a <= c),
                (EnergyLevel::Infeasible, EnergyLevel::Level(_)) => prop_assert!(false),
                _ => {}
            }
        }
    }

    fn toy_inputs<'a>(
        power_cdf: &'a dyn Fn(f64) -> f64,
        pr_o: f64,
    ) -> ModelInputs<'a, f64> {
        ModelInputs {
            eh_dist: GammaParams::new(2.0, 0.3).unwrap(),
            cci_dist: Some(GammaParams::new(1.5, 0.05).unwrap()),
            power_cdf,
            first_hop_outage: pr_o,
        }
    }

    #[test]
    fn q1_matrix_matches_hand_formulas() {
        let c = 0.5f64;
        let b = BatteryModel::new(c, 1).unwrap();
        let power_cdf = |x: f64| 1.0 - (-x / 0.4).exp();
        let pr_o = 0.2;
        let inputs = toy_inputs(&power_cdf, pr_o);
        let z = build_transition_matrix(&inputs, &b).unwrap();
        let f_eh_c = inputs.eh_dist.cdf(c).unwrap();
        let f_pow_2c = power_cdf(2.0 * c);
        assert!((z.get(0, 0) - f_eh_c).abs() < 1e-12);
        assert!((z.get(0, 1) - (1.0 - f_eh_c)).abs() < 1e-12);
        assert!((z.get(1, 1) - ((1.0 - f_pow_2c) + f_pow_2c * pr_o)).abs() < 1e-12);
        assert!((z.get(1, 0) - (1.0 - pr_o) * f_pow_2c).abs() < 1e-12);
    }

    #[test]
    fn q2_matrix_matches_hand_formulas() {
        let c = 0.6f64;
        let b = BatteryModel::new(c, 2).unwrap();
        let power_cdf = |x: f64| 1.0 - (-x / 0.25).exp();
        let pr_o = 0.35;
        let inputs = toy_inputs(&power_cdf, pr_o);
        let z = build_transition_matrix(&inputs, &b).unwrap();
        let fe = |x: f64| inputs.eh_dist.cdf(x).unwrap();
        let fc = |x: f64| inputs.cci_dist.unwrap().cdf(x).unwrap();
        let h = c / 2.0;
        // row 0: pure Mode-I charging
        assert!((z.get(0, 0) - fe(h)).abs() < 1e-12);
        assert!((z.get(0, 1) - (fe(c) - fe(h))).abs() < 1e-12);
        assert!((z.get(0, 2) - (1.0 - fe(c))).abs() < 1e-12);
        // row 1: mixture of the three middle cases
        let a1 = power_cdf(2.0 * h);
        assert!((z.get(1, 0) - (1.0 - pr_o) * a1).abs() < 1e-12);
        let t11 = (1.0 - a1) * fe(h) + a1 * pr_o * fc(h);
        assert!((z.get(1, 1) - t11).abs() < 1e-12);
        let t12 = (1.0 - a1) * (1.0 - fe(h)) + pr_o * a1 * (1.0 - fc(h));
        assert!((z.get(1, 2) - t12).abs() < 1e-12);
        // row 2: full battery
        let a2 = power_cdf(2.0 * c);
        assert!((z.get(2, 2) - ((1.0 - a2) + a2 * pr_o)).abs() < 1e-12);
        assert!((z.get(2, 1) - (1.0 - pr_o) * power_cdf(2.0 * h)).abs() < 1e-12);
        assert!((z.get(2, 0) - (1.0 - pr_o) * (a2 - power_cdf(2.0 * h))).abs() < 1e-12);

        // stationary distribution solves the 3-state chain
        let pi = stationary_distribution(&z).unwrap();
        for i in 0..3 {
            let mut back = 0.0;
            for j in 0..3 {
                back += z.get(j, i) * pi.probs[j];
            }
            assert!((back - pi.probs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn corrupted_entry_fails_row_check_with_row_index() {
        let b = BatteryModel::new(0.5, 4).unwrap();
        let power_cdf = |x: f64| 1.0 - (-x / 0.4).exp();
        let inputs = toy_inputs(&power_cdf, 0.3);
        let mut z = build_transition_matrix(&inputs, &b).unwrap();
        *z.entry_mut(2, 3) += 0.01;
        match check_row_stochastic(&z) {
            Err(MarkovError::RowSum { row, deviation }) => {
                assert_eq!(row, 2);
                assert!((deviation - 0.01).abs() < 1e-9);
            }
            other => panic!("expected RowSum error, got {other:?}"),
        }
    }

    #[test]
    fn certain_first_hop_outage_never_discharges() {
        let b = BatteryModel::new(0.5, 8).unwrap();
        let power_cdf = |x: f64| 1.0 - (-x / 0.4).exp();
        let inputs = toy_inputs(&power_cdf, 1.0);
        let z = build_transition_matrix(&inputs, &b).unwrap();
        for i in 0..z.dim() {
            for j in 0..i {
                assert_eq!(z.get(i, j), 0.0);
            }
        }
        // no discharging transitions → stationary outage probability is 1
        let pi = stationary_distribution(&z).unwrap();
        assert!((outage_probability(&pi, &z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_state_stationary_textbook() {
        let z = TransitionMatrix::<f64> {
            q: 1,
            entries: vec![0.7, 0.3, 0.4, 0.6],
        };
        let pi = stationary_distribution(&z).unwrap();
        // off-diagonals (α, β) = (0.3, 0.4) → π = (β, α)/(α+β)
        assert!((pi.probs[0] - 0.4 / 0.7).abs() < 1e-12);
        assert!((pi.probs[1] - 0.3 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn doubly_stochastic_gives_uniform() {
        let n = 5;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 0.5;
            entries[i * n + (i + 1) % n] = 0.3;
            entries[i * n + (i + 2) % n] = 0.2;
        }
        let z = TransitionMatrix { q: n - 1, entries };
        let pi = stationary_distribution(&z).unwrap();
        for &p in &pi.probs {
            assert!((p - 0.2f64).abs() < 1e-12);
        }
    }

    #[test]
    fn throughput_substitution() {
        assert_eq!(throughput(1.0, 2.0), 0.0);
        assert_eq!(throughput(0.0, 2.0), 2.0);
        assert!((throughput(0.25, 2.0) - 1.5f64).abs() < 1e-15);
    }

    fn section_iv_config() -> SystemConfig {
        SystemConfig {
            source_power: 1.0,
            interferer_powers: vec![0.1; 3],
            efficiency: 0.5,
            nakagami_shape: 2,
            relay_antennas: 4,
            gain_source_relay: 1.0 / 37.0,
            gain_interferer_relay: vec![1.0 / 145.0, 1.0 / 170.0, 1.0 / 197.0],
            gain_relay_dest: 1.0 / 197.0,
            noise_relay: 1e-11,
            noise_dest: 1e-11,
            rate: 1.0,
        }
    }

    #[test]
    fn pipeline_is_deterministic_and_sane() {
        let cfg = section_iv_config();
        let b = BatteryModel::new(0.5, 20).unwrap();
        let r1 = analytic_pipeline(&cfg, &b).unwrap();
        let r2 = analytic_pipeline(&cfg, &b).unwrap();
        assert_eq!(r1.throughput.to_bits(), r2.throughput.to_bits());
        assert!(r1.throughput >= 0.0 && r1.throughput <= cfg.rate);
        // complement identity: outage + discharge mass = 1
        let mut discharge = 0.0;
        for i in 0..r1.transition_matrix.dim() {
            for j in 0..i {
                discharge += r1.stationary.probs[i] * r1.transition_matrix.get(i, j);
            }
        }
        assert!((r1.outage + discharge - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pipeline_no_energy_means_no_throughput() {
        let mut cfg = section_iv_config();
        cfg.interferer_powers.clear();
        cfg.gain_interferer_relay.clear();
        cfg.source_power = 1e-12;
        let b = BatteryModel::new(0.5, 10).unwrap();
        let r = analytic_pipeline(&cfg, &b).unwrap();
        assert!(r.throughput < 1e-9, "throughput {}", r.throughput);
    }
}
