//! Data-generating processes and the Monte Carlo driver.
//!
//! Two adoption laws are simulated over a panel of `t_max` periods:
//!
//! * the proportional-hazards law `T|X ~ Exp(exp(βX))` with `X ~ U(-10, 10)`,
//! * a lognormal accelerated-failure-time law `T = exp(-m(X) + ζ)` with
//!   `m(x) = 1 - ℓ(2k₁(x+θ)) + ℓ(2k₂(x-θ))` and logistic `ℓ`.
//!
//! Adoption times are generated on their natural continuous scale and then
//! expressed in panel-period units: one period equals `q/t_max` raw time
//! units, where `q` is the marginal adoption quantile at the target
//! probability (0.15 unless configured otherwise). This makes
//! `P{T ≤ t_max} = 0.15` hold exactly at the panel horizon, which is the
//! calibration the simulation study prescribes, while leaving the hazard
//! model itself untouched (a common time rescaling is absorbed by the
//! baseline hazard). Outcomes follow the AR(1) recursion
//! `Ỹ_t = ρỸ_{t-1} + δ√t + γX + ε_t` from `Ỹ_0 = 0`, plus `τ` once treated.

pub mod mc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::panel::{AdoptionData, Panel, PanelError};
use crate::randtest::{RandTestError, WeightVector};

pub use mc::{run_monte_carlo, McCell, McDesign, McResult};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no root: adoption CDF does not reach {target} on the search bracket")]
    NoRoot { target: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical underflow in hazard evaluation")]
    NumericalUnderflow,
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Weights(#[from] RandTestError),
}

/// Configuration of the proportional-hazards design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dgp51Config {
    pub n: usize,
    pub rho: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub delta: f64,
    pub beta: f64,
    pub tau: f64,
    pub rep_seed: u64,
}

impl Default for Dgp51Config {
    fn default() -> Self {
        Self {
            n: 25,
            rho: 0.2,
            sigma: 0.2,
            gamma: 0.0,
            delta: 0.0,
            beta: 1.0,
            tau: 0.0,
            rep_seed: 0,
        }
    }
}

/// Configuration of the accelerated-failure-time design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dgp52Config {
    pub n: usize,
    pub rho: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub tau: f64,
    pub k1: f64,
    pub k2: f64,
    pub theta: f64,
    pub zeta_sd: f64,
    pub rep_seed: u64,
}

impl Default for Dgp52Config {
    fn default() -> Self {
        Self {
            n: 25,
            rho: 0.2,
            sigma: 0.2,
            gamma: 0.0,
            tau: 0.0,
            k1: 0.0,
            k2: 0.0,
            theta: 8.0,
            zeta_sd: 0.4,
            rep_seed: 0,
        }
    }
}

fn validate_common(n: usize, rho: f64, sigma: f64) -> Result<(), SimError> {
    if n < 2 {
        return Err(SimError::InvalidConfig(format!("n = {n} < 2")));
    }
    if !(rho.abs() < 1.0) {
        return Err(SimError::InvalidConfig(format!("|rho| = {} >= 1", rho.abs())));
    }
    if !(sigma >= 0.0) {
        return Err(SimError::InvalidConfig(format!("sigma = {sigma} < 0")));
    }
    Ok(())
}

pub fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// `m(x) = 1 − ℓ(2k₁(x+θ)) + ℓ(2k₂(x−θ))`.
pub fn aft_location(x: f64, k1: f64, k2: f64, theta: f64) -> f64 {
    1.0 - logistic(2.0 * k1 * (x + theta)) + logistic(2.0 * k2 * (x - theta))
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// `ln(1 − Φ(z))`, stable deep into the upper tail.
pub fn ln_normal_sf(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)).ln()
    } else {
        // Asymptotic Mills series: sf(z) ~ φ(z)/z (1 − 1/z² + 3/z⁴ − 15/z⁶).
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        -0.5 * z2 - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
    }
}

/// Marginal adoption-time distribution, for calibration and rescaling.
/// The covariate integral uses a 10,000-node midpoint rule.
#[derive(Debug, Clone, PartialEq)]
pub enum AdoptionMarginal {
    /// `T|X ~ Exp(exp(βx))`, `X ~ U(x_low, x_high)`.
    ProportionalHazards { beta: f64, x_low: f64, x_high: f64 },
    /// `T = exp(−m(X) + ζ)`, `ζ ~ N(0, zeta_sd²)`, `X ~ U(x_low, x_high)`.
    Aft {
        k1: f64,
        k2: f64,
        theta: f64,
        zeta_sd: f64,
        x_low: f64,
        x_high: f64,
    },
}

const QUADRATURE_NODES: usize = 10_000;

impl AdoptionMarginal {
    pub fn section51(beta: f64) -> Self {
        Self::ProportionalHazards {
            beta,
            x_low: -10.0,
            x_high: 10.0,
        }
    }

    pub fn section52(k1: f64, k2: f64, theta: f64, zeta_sd: f64) -> Self {
        Self::Aft {
            k1,
            k2,
            theta,
            zeta_sd,
            x_low: -10.0,
            x_high: 10.0,
        }
    }

    fn nodes(x_low: f64, x_high: f64) -> Vec<f64> {
        if x_low == x_high {
            return vec![x_low];
        }
        let h = (x_high - x_low) / QUADRATURE_NODES as f64;
        (0..QUADRATURE_NODES)
            .map(|k| x_low + (k as f64 + 0.5) * h)
            .collect()
    }

    /// `P{T <= t}`, marginally over the covariate.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            AdoptionMarginal::ProportionalHazards { beta, x_low, x_high } => {
                let nodes = Self::nodes(x_low, x_high);
                let sum: f64 = nodes
                    .iter()
                    .map(|&x| 1.0 - (-t * (beta * x).exp()).exp())
                    .sum();
                sum / nodes.len() as f64
            }
            AdoptionMarginal::Aft {
                k1,
                k2,
                theta,
                zeta_sd,
                x_low,
                x_high,
            } => {
                let nodes = Self::nodes(x_low, x_high);
                let sum: f64 = nodes
                    .iter()
                    .map(|&x| normal_cdf((t.ln() + aft_location(x, k1, k2, theta)) / zeta_sd))
                    .sum();
                sum / nodes.len() as f64
            }
        }
    }

    /// Continuous root of `P{T <= t} = p`, by bisection on an expanding
    /// bracket.
    pub fn quantile(&self, p: f64) -> Result<f64, SimError> {
        if !(0.0 < p && p < 1.0) {
            return Err(SimError::InvalidConfig(format!("target prob {p} not in (0,1)")));
        }
        let mut lo = 1e-18;
        let mut hi = 1.0;
        let mut tries = 0;
        while self.cdf(hi) < p {
            hi *= 8.0;
            tries += 1;
            if tries > 80 {
                return Err(SimError::NoRoot { target: p });
            }
        }
        while self.cdf(lo) > p {
            lo /= 8.0;
            tries += 1;
            if tries > 160 {
                return Err(SimError::NoRoot { target: p });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) < 1e-14 * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Output of [`calibrate_tmax`]: the continuous root and its integer
/// rounding (up, floored at the smallest valid panel length of 2).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Calibration {
    pub continuous_root: f64,
    pub t_max: usize,
}

/// Solve `P{T <= t} = target_prob` over the marginal adoption distribution
/// and round up to the nearest integer `>= 2`.
pub fn calibrate_tmax(
    marginal: &AdoptionMarginal,
    target_prob: f64,
) -> Result<Calibration, SimError> {
    let root = marginal.quantile(target_prob)?;
    let t_max = (root.ceil() as usize).max(2);
    Ok(Calibration {
        continuous_root: root,
        t_max,
    })
}

/// Which adoption law a prepared sampler draws from.
#[derive(Debug, Clone)]
enum DgpKind {
    S51(Dgp51Config),
    S52(Dgp52Config),
}

/// A DGP with its panel horizon and cached period length (raw time units per
/// panel period), so repeated simulation avoids re-solving the quantile.
#[derive(Debug, Clone)]
pub struct PreparedDgp {
    kind: DgpKind,
    t_max: usize,
    /// Raw adoption-time units per panel period.
    period_length: f64,
    target_prob: f64,
}

/// One simulated replication, keeping the raw first-adoption time available
/// for hazard evaluation on the original scale.
#[derive(Debug)]
pub struct SimulatedRep {
    pub panel: Panel,
    pub adoption: AdoptionData,
    pub covariates: Vec<f64>,
    /// Raw (unscaled) adoption times.
    pub raw_times: Vec<f64>,
}

impl PreparedDgp {
    pub fn new_51(config: &Dgp51Config, t_max: usize) -> Result<Self, SimError> {
        Self::new_51_with_target(config, t_max, 0.15)
    }

    pub fn new_51_with_target(
        config: &Dgp51Config,
        t_max: usize,
        target_prob: f64,
    ) -> Result<Self, SimError> {
        validate_common(config.n, config.rho, config.sigma)?;
        if t_max < 2 {
            return Err(SimError::InvalidConfig(format!("t_max = {t_max} < 2")));
        }
        let q = AdoptionMarginal::section51(config.beta).quantile(target_prob)?;
        Ok(Self {
            kind: DgpKind::S51(config.clone()),
            t_max,
            period_length: q / t_max as f64,
            target_prob,
        })
    }

    pub fn new_52(config: &Dgp52Config, t_max: usize) -> Result<Self, SimError> {
        Self::new_52_with_target(config, t_max, 0.15)
    }

    pub fn new_52_with_target(
        config: &Dgp52Config,
        t_max: usize,
        target_prob: f64,
    ) -> Result<Self, SimError> {
        validate_common(config.n, config.rho, config.sigma)?;
        if t_max < 2 {
            return Err(SimError::InvalidConfig(format!("t_max = {t_max} < 2")));
        }
        if config.k1 < 0.0 || config.k2 < 0.0 || config.theta < 0.0 || config.zeta_sd <= 0.0 {
            return Err(SimError::InvalidConfig(
                "k1, k2, theta must be >= 0 and zeta_sd > 0".into(),
            ));
        }
        let q = AdoptionMarginal::section52(config.k1, config.k2, config.theta, config.zeta_sd)
            .quantile(target_prob)?;
        Ok(Self {
            kind: DgpKind::S52(config.clone()),
            t_max,
            period_length: q / t_max as f64,
            target_prob,
        })
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn period_length(&self) -> f64 {
        self.period_length
    }

    pub fn target_prob(&self) -> f64 {
        self.target_prob
    }

    /// Draw one replication with the given seed. Draw order: covariates,
    /// adoption noise, outcome noise in unit-major time-minor order.
    pub fn simulate(&self, seed: u64) -> Result<SimulatedRep, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, rho, sigma, gamma, delta, tau) = match &self.kind {
            DgpKind::S51(c) => (c.n, c.rho, c.sigma, c.gamma, c.delta, c.tau),
            DgpKind::S52(c) => (c.n, c.rho, c.sigma, c.gamma, 0.0, c.tau),
        };
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let raw_times: Vec<f64> = match &self.kind {
            DgpKind::S51(c) => xs
                .iter()
                .map(|&x| {
                    let e: f64 = rng.sample(Exp1);
                    e * (-c.beta * x).exp()
                })
                .collect(),
            DgpKind::S52(c) => xs
                .iter()
                .map(|&x| {
                    let z: f64 = rng.sample(StandardNormal);
                    (-aft_location(x, c.k1, c.k2, c.theta) + c.zeta_sd * z).exp()
                })
                .collect(),
        };
        let times: Vec<f64> = raw_times
            .iter()
            .map(|&t| t / self.period_length)
            .collect();
        let censored: Vec<bool> = times.iter().map(|&t| t > self.t_max as f64).collect();

        let t_max = self.t_max;
        let mut outcomes = vec![vec![0.0; t_max]; n];
        for i in 0..n {
            let mut prev = 0.0;
            for t in 1..=t_max {
                let eps: f64 = rng.sample(StandardNormal);
                prev = rho * prev + delta * (t as f64).sqrt() + gamma * xs[i] + sigma * eps;
                let treated = times[i] <= t as f64;
                outcomes[i][t - 1] = prev + if treated { tau } else { 0.0 };
            }
        }
        let covariates: Vec<Vec<Vec<f64>>> =
            xs.iter().map(|&x| vec![vec![x]; t_max]).collect();
        let panel = Panel::new(outcomes, covariates, None)?;
        let adoption = AdoptionData::new(times, censored, t_max)?;
        Ok(SimulatedRep {
            panel,
            adoption,
            covariates: xs,
            raw_times,
        })
    }
}

/// Proportional-hazards design: returns the panel, the adoption data (in
/// panel-period units) and the true hazard coefficient.
pub fn simulate_51(
    config: &Dgp51Config,
    t_max: usize,
) -> Result<(Panel, AdoptionData, f64), SimError> {
    let prepared = PreparedDgp::new_51(config, t_max)?;
    let rep = prepared.simulate(config.rep_seed)?;
    Ok((rep.panel, rep.adoption, config.beta))
}

/// Accelerated-failure-time design.
pub fn simulate_52(config: &Dgp52Config, t_max: usize) -> Result<(Panel, AdoptionData), SimError> {
    let prepared = PreparedDgp::new_52(config, t_max)?;
    let rep = prepared.simulate(config.rep_seed)?;
    Ok((rep.panel, rep.adoption))
}

/// First-adopter weights under the AFT law: `w_i ∝ h_i(T_(1))` with `h_i`
/// the hazard of the lognormal law `log T ~ N(−m(X_i), ζ_sd²)`, evaluated in
/// log space. `t1` is on the raw adoption-time scale.
pub fn aft_adopter_weights(
    config: &Dgp52Config,
    xs: &[f64],
    t1: f64,
) -> Result<WeightVector, SimError> {
    if !(t1 > 0.0) {
        return Err(SimError::InvalidConfig(format!("t1 = {t1} must be > 0")));
    }
    // h(t) = φ(z) / (σ t (1 − Φ(z))) with z = (ln t + m(x)) / σ; the σt
    // factor is common across units and cancels in the normalization.
    let scores: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let z = (t1.ln() + aft_location(x, config.k1, config.k2, config.theta))
                / config.zeta_sd;
            -0.5 * z * z - ln_normal_sf(z)
        })
        .collect();
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(SimError::NumericalUnderflow);
    }
    Ok(WeightVector::from_scores(&scores)?)
}

/// Split-by-index derivation of per-replication seeds: replications with
/// distinct indices get independent ChaCha streams with probability one up
/// to 64-bit collisions.
pub fn replication_seed(base_seed: u64, replication: u64) -> u64 {
    let mut z = base_seed
        .wrapping_add((replication.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
