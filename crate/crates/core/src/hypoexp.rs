//! Hypoexponential machinery for the aggregate interference power at the
//! combiner output: a sum of independent exponentials, one per interferer.
//!
//! The public density requires pairwise-distinct means (plain partial
//! fractions). [`ExpSumDensity`] additionally handles repeated means by
//! grouping them into Erlang stages and expanding the higher-order poles.


use crate::Scalar;

/// Relative gap below which two stage means are considered equal.
pub const DISTINCT_REL_TOL: f64 = 1e-9;

/// Sum of independent exponentials; `means[l]` is the mean of the l-th stage.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoExpParams<F> {
    pub means: Vec<F>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HypoExpError {
    #[error("stage mean list must be non-empty with positive entries")]
    InvalidMeans,
    #[error("stage means are not pairwise distinct within relative tolerance {DISTINCT_REL_TOL}")]
    DegenerateRates,
}

impl<F: Scalar> HypoExpParams<F> {
    pub fn new(means: Vec<F>) -> Result<Self, HypoExpError> {
        if means.is_empty() || means.iter().any(|m| !(*m > F::zero() && m.is_finite())) {
            return Err(HypoExpError::InvalidMeans);
        }
        Ok(Self { means })
    }

    pub fn mean(&self) -> F {
        self.means.iter().fold(F::zero(), |acc, &m| acc + m)
    }

    fn check_distinct(&self) -> Result<(), HypoExpError> {
        let tol = F::from(DISTINCT_REL_TOL).unwrap();
        for (i, &a) in self.means.iter().enumerate() {
            for &b in &self.means[i + 1..] {
                if (a - b).abs() <= tol * a.max(b) {
                    return Err(HypoExpError::DegenerateRates);
                }
            }
        }
        Ok(())
    }

    /// Partial-fraction weights wₗ = Π_{k≠l} λₖ/(λₖ − λₗ) in rate form.
    ///
    /// Fails with `DegenerateRates` when two means coincide.
    pub fn weights(&self) -> Result<Vec<F>, HypoExpError> {
        self.check_distinct()?;
        let rates: Vec<F> = self.means.iter().map(|&m| F::one() / m).collect();
        Ok(rates
            .iter()
            .enumerate()
            .map(|(l, &rl)| {
                rates
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != l)
                    .fold(F::one(), |acc, (_, &rk)| acc * rk / (rk - rl))
            })
            .collect())
    }

    /// Density f_Y(y) = Σₗ wₗ λₗ e^{−λₗ y} for y ≥ 0.
    pub fn pdf(&self, y: F) -> Result<F, HypoExpError> {
        if y < F::zero() {
            return Ok(F::zero());
        }
        if self.means.len() == 1 {
            let theta = self.means[0];
            return Ok((-y / theta).exp() / theta);
        }
        let w = self.weights()?;
        let mut f = F::zero();
        for (l, &theta) in self.means.iter().enumerate() {
            f = f + w[l] / theta * (-y / theta).exp();
        }
        Ok(f)
    }
}

/// One Erlang group: `stages` exponentials sharing mean `theta`.
#[derive(Debug, Clone, Copy)]
struct ErlangGroup<F> {
    theta: F,
    stages: usize,
}

/// Density of a sum of exponentials with arbitrary (possibly repeated) means.
///
/// Expands Π_g (s + λ_g)^{−k_g} into partial fractions with higher-order
/// poles; pole coefficients come from a log-derivative recursion, so no
/// symbolic differentiation is needed.
#[derive(Debug, Clone)]
pub struct ExpSumDensity<F> {
    groups: Vec<ErlangGroup<F>>,
    // coeffs[g][j-1] multiplies y^{j-1} e^{-λ_g y} λ_g^j / (j-1)!
    coeffs: Vec<Vec<F>>,
}

impl<F: Scalar> ExpSumDensity<F> {
    pub fn new(means: &[F]) -> Result<Self, HypoExpError> {
        if means.is_empty() || means.iter().any(|m| !(*m > F::zero() && m.is_finite())) {
            return Err(HypoExpError::InvalidMeans);
        }
        let tol = F::from(DISTINCT_REL_TOL).unwrap();
        let mut groups: Vec<ErlangGroup<F>> = Vec::new();
        let mut sorted = means.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for m in sorted {
            match groups.last_mut() {
                Some(g) if (g.theta - m).abs() <= tol * g.theta.max(m) => g.stages += 1,
                _ => groups.push(ErlangGroup { theta: m, stages: 1 }),
            }
        }
        let coeffs = Self::pole_coefficients(&groups);
        Ok(Self { groups, coeffs })
    }

    /// A_{g,j} for the expansion L(s) = Σ_g Σ_j A_{g,j}/(s+λ_g)^j, scaled so
    /// that `coeffs[g][j-1] = A_{g,j} / λ_g^j`.
    fn pole_coefficients(groups: &[ErlangGroup<F>]) -> Vec<Vec<F>> {
        let rates: Vec<F> = groups.iter().map(|g| F::one() / g.theta).collect();
        let mut all = Vec::with_capacity(groups.len());
        for (g, grp) in groups.iter().enumerate() {
            let k = grp.stages;
            // φ(s) = Π_h λ_h^{k_h} Π_{h≠g} (s+λ_h)^{-k_h}, expanded at s = −λ_g.
            // Derivatives via φ' = φ (ln φ)'.
            let mut phi = vec![F::zero(); k];
            let mut phi0 = F::one();
            for (h, other) in groups.iter().enumerate() {
                phi0 = phi0 * rates[h].powi(other.stages as i32);
                if h != g {
                    phi0 = phi0 / (rates[h] - rates[g]).powi(other.stages as i32);
                }
            }
            phi[0] = phi0;
            // g_n = (ln φ)^{(n)}(−λ_g) = (−1)^n (n−1)! Σ_{h≠g} k_h (λ_h−λ_g)^{−n}
            let mut log_derivs = vec![F::zero(); k];
            for n in 1..k {
                let mut s = F::zero();
                for (h, other) in groups.iter().enumerate() {
                    if h != g {
                        s = s + F::from(other.stages as f64).unwrap()
                            / (rates[h] - rates[g]).powi(n as i32);
                    }
                }
                let sign = if n % 2 == 0 { F::one() } else { -F::one() };
                log_derivs[n] = sign * F::from(factorial(n - 1)).unwrap() * s;
            }
            for n in 1..k {
                let mut acc = F::zero();
                for j in 0..n {
                    acc = acc + F::from(binomial(n - 1, j)).unwrap() * phi[j] * log_derivs[n - j];
                }
                phi[n] = acc;
            }
            // A_{g,j} = φ^{(k−j)}(−λ_g)/(k−j)!
            let mut row = vec![F::zero(); k];
            for j in 1..=k {
                let a = phi[k - j] / F::from(factorial(k - j)).unwrap();
                row[j - 1] = a / rates[g].powi(j as i32);
            }
            all.push(row);
        }
        all
    }

    pub fn pdf(&self, y: F) -> F {
        if y < F::zero() {
            return F::zero();
        }
        let mut f = F::zero();
        for (g, grp) in self.groups.iter().enumerate() {
            let rate = F::one() / grp.theta;
            let e = (-rate * y).exp();
            for (jm1, &c) in self.coeffs[g].iter().enumerate() {
                let j = jm1 + 1;
                // Erlang(j, rate) density
                let dens =
                    rate.powi(j as i32) * y.powi(jm1 as i32) * e / F::from(factorial(jm1)).unwrap();
                f = f + c * dens;
            }
        }
        f
    }

    /// Mean of the sum, used to pick an integration scale.
    pub fn mean(&self) -> F {
        self.groups.iter().fold(F::zero(), |acc, g| {
            acc + g.theta * F::from(g.stages as f64).unwrap()
        })
    }

    pub fn max_stage_mean(&self) -> F {
        self.groups
            .iter()
            .map(|g| g.theta)
            .fold(F::zero(), |a, b| a.max(b))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}
