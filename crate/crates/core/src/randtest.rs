//! The randomization-test engine.
//!
//! Conditional on the first adoption time and the covariates, the first
//! adopter's identity has the softmax law
//! `ω_i(β) = exp(X_{i,T_(1)}'β) / Σ_k exp(X_{k,T_(1)}'β)`. The test compares
//! the observed statistic against the `1−α` quantile of the ω-weighted
//! empirical distribution of the placebo statistics `s_{n,i}`, obtained by
//! substituting each candidate unit for the first adopter with `T_(1)` held
//! fixed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::panel::{AdoptionData, Panel, PanelError};
use crate::stats::{Statistic, StatsError};

#[derive(Debug, Error)]
pub enum RandTestError {
    #[error("first adoption at or beyond the horizon: T_(1) = {t1} >= t_max = {t_max}")]
    FirstAdoptionAtBoundary { t1: f64, t_max: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("weight vector invalid: {0}")]
    InvalidWeights(String),
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Probability vector over candidate first adopters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    /// Validates non-negativity, finiteness and unit sum (within 1e-12).
    pub fn new(w: Vec<f64>) -> Result<Self, RandTestError> {
        if w.is_empty() {
            return Err(RandTestError::InvalidWeights("empty".into()));
        }
        if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(RandTestError::InvalidWeights(
                "entries must be finite and >= 0".into(),
            ));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(RandTestError::InvalidWeights(format!(
                "sum {sum} != 1 beyond 1e-12"
            )));
        }
        Ok(Self { w })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            w: vec![1.0 / n as f64; n],
        }
    }

    /// Normalized softmax of raw scores, with max-subtraction stabilization.
    pub fn from_scores(scores: &[f64]) -> Result<Self, RandTestError> {
        if scores.is_empty() {
            return Err(RandTestError::InvalidWeights("empty".into()));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(RandTestError::InvalidWeights("non-finite score".into()));
        }
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
        let sum: f64 = w.iter().sum();
        for x in &mut w {
            *x /= sum;
        }
        Ok(Self { w })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Provenance of the weight vector used by a test run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Uniform,
    Feasible,
    Infeasible,
    Custom,
}

/// `ω_i(β) = exp(X_{i,T_(1)}'β) / Σ_k exp(X_{k,T_(1)}'β)`, covariates through
/// the rounding map.
pub fn adopter_weights(
    panel: &Panel,
    t1: f64,
    beta: &[f64],
) -> Result<WeightVector, RandTestError> {
    if t1 >= panel.t_max() as f64 {
        return Err(RandTestError::FirstAdoptionAtBoundary {
            t1,
            t_max: panel.t_max(),
        });
    }
    let scores: Vec<f64> = (0..panel.n())
        .map(|i| {
            panel
                .covariate_at(i, t1)
                .iter()
                .zip(beta)
                .map(|(x, b)| x * b)
                .sum()
        })
        .collect();
    WeightVector::from_scores(&scores)
}

/// `ĉ = inf{s' : Σ w_i 1{s_i <= s'} >= 1−α}`, resolved on the support of `s`.
pub fn weighted_critical_value(s: &[f64], w: &WeightVector, alpha: f64) -> f64 {
    debug_assert_eq!(s.len(), w.len());
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let target = 1.0 - alpha;
    let mut cum = 0.0;
    let mut idx = 0;
    while idx < order.len() {
        // Advance over the whole group of ties so the CDF jumps once per value.
        let value = s[order[idx]];
        while idx < order.len() && s[order[idx]] == value {
            cum += w.as_slice()[order[idx]];
            idx += 1;
        }
        if cum >= target - 1e-15 {
            return value;
        }
    }
    s[order[order.len() - 1]]
}

/// `p = Σ w_i 1{s_i >= s_obs}`.
pub fn p_value(s: &[f64], w: &WeightVector, s_obs: f64) -> f64 {
    s.iter()
        .zip(w.as_slice())
        .filter(|(&si, _)| si >= s_obs)
        .map(|(_, &wi)| wi)
        .sum()
}

/// Full record of a randomization-test run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub s_obs: f64,
    pub s_candidates: Vec<f64>,
    pub weights: WeightVector,
    pub alpha: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    /// `q = (1−α) − Σ w_i 1{s_i < ĉ}` — the gap between the nominal level and
    /// the weighted mass strictly below the critical value.
    pub randomized_extra_prob: f64,
    pub weight_mode: WeightMode,
    /// First-adopter index the observed statistic belongs to.
    pub first_adopter: usize,
    /// First adoption time the candidate statistics were evaluated at.
    pub t1: f64,
}

impl TestReport {
    /// Exact-level rejection probability at the critical-value atom:
    /// `a = (F(ĉ) − (1−α)) / mass(ĉ)`. Rejecting with this probability when
    /// `s_obs = ĉ` (on top of the non-randomized rule) makes the conditional
    /// rejection probability exactly α.
    pub fn atom_rejection_prob(&self) -> f64 {
        let mut mass_at = 0.0;
        let mut mass_le = 0.0;
        for (&si, &wi) in self.s_candidates.iter().zip(self.weights.as_slice()) {
            if si == self.critical_value {
                mass_at += wi;
            }
            if si <= self.critical_value {
                mass_le += wi;
            }
        }
        if mass_at <= 0.0 {
            return 0.0;
        }
        ((mass_le - (1.0 - self.alpha)) / mass_at).clamp(0.0, 1.0)
    }

    /// Dump candidate statistics as `unit,s_value,weight` CSV text.
    pub fn candidates_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("unit,s_value,weight\n");
        for (i, (&s, &w)) in self
            .s_candidates
            .iter()
            .zip(self.weights.as_slice())
            .enumerate()
        {
            out.push_str(&format!("{},{},{}\n", labels[i], s, w));
        }
        out
    }
}

/// Evaluate the statistic for every candidate, compare the observed value
/// against the weighted critical value, and assemble the report.
pub fn run_test(
    panel: &Panel,
    adoption: &AdoptionData,
    statistic: &Statistic,
    weights: &WeightVector,
    alpha: f64,
    weight_mode: WeightMode,
) -> Result<TestReport, RandTestError> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(RandTestError::InvalidAlpha(alpha));
    }
    if weights.len() != panel.n() {
        return Err(RandTestError::InvalidWeights(format!(
            "{} weights for {} units",
            weights.len(),
            panel.n()
        )));
    }
    let (i1, t1) = adoption.first_adopter()?;
    if t1 >= panel.t_max() as f64 {
        return Err(RandTestError::FirstAdoptionAtBoundary {
            t1,
            t_max: panel.t_max(),
        });
    }
    let s_candidates = statistic.candidate_values(panel, adoption, t1)?;
    Ok(assemble_report(
        s_candidates,
        weights.clone(),
        alpha,
        weight_mode,
        i1,
        t1,
    ))
}

/// Build the report from precomputed candidate statistics.
pub fn assemble_report(
    s_candidates: Vec<f64>,
    weights: WeightVector,
    alpha: f64,
    weight_mode: WeightMode,
    i1: usize,
    t1: f64,
) -> TestReport {
    let s_obs = s_candidates[i1];
    let critical_value = weighted_critical_value(&s_candidates, &weights, alpha);
    let p = p_value(&s_candidates, &weights, s_obs);
    let mass_below: f64 = s_candidates
        .iter()
        .zip(weights.as_slice())
        .filter(|(&si, _)| si < critical_value)
        .map(|(_, &wi)| wi)
        .sum();
    TestReport {
        s_obs,
        reject: s_obs > critical_value,
        critical_value,
        p_value: p,
        randomized_extra_prob: (1.0 - alpha) - mass_below,
        s_candidates,
        weights,
        alpha,
        weight_mode,
        first_adopter: i1,
        t1,
    }
}

/// Randomized decision: always reject when the non-randomized test rejects;
/// at the critical-value atom, additionally reject when `u` falls below the
/// exact-level atom probability.
pub fn decide_randomized(report: &TestReport, u: f64) -> bool {
    if report.reject {
        return true;
    }
    report.s_obs == report.critical_value && u < report.atom_rejection_prob()
}
