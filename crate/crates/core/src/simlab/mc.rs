//! Monte Carlo driver: rejection rates of the uniform / feasible /
//! infeasible tests over seeded, reproducible replication streams.
//!
//! Per replication the driver simulates a dataset, anchors the statistic's
//! windows at the boundary of the first adoption period (the period of
//! adoption and everything later is post), evaluates the two-sided candidate
//! statistics `|s_{n,i}|`, and runs the test once per weight mode. The
//! feasible weights come from a fresh Cox fit; replications where that fit
//! fails are excluded and counted, as are replications whose first adoption
//! leaves no usable window. Both the non-randomized decision and the
//! exactly-level randomized decision are tallied.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    aft_adopter_weights, replication_seed, Dgp51Config, Dgp52Config, PreparedDgp, SimError,
    SimulatedRep,
};
use crate::cox::{fit_cox, CoxOptions};
use crate::panel::Panel;
use crate::randtest::{
    adopter_weights, assemble_report, decide_randomized, WeightMode, WeightVector,
};
use crate::stats::RobustPlugins;

/// One simulation-table cell: the design file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McDesign {
    /// 1 and 2: proportional-hazards adoption with the DiD statistic;
    /// 3: AFT adoption with the DiD statistic;
    /// 4: AFT adoption with the robustified statistics (oracle and feasible).
    pub table: u8,
    pub n: usize,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub k1: f64,
    #[serde(default)]
    pub k2: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_zeta_sd")]
    pub zeta_sd: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Panel length in periods. The adoption-time scale is calibrated so
    /// that `P{T <= t_max}` equals `adoption_target` regardless of this
    /// choice; the default matches the desk-scale replication manifest.
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_target")]
    pub adoption_target: f64,
    #[serde(default = "default_reps")]
    pub replications: u64,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_theta() -> f64 {
    8.0
}
fn default_rho() -> f64 {
    0.2
}
fn default_sigma() -> f64 {
    0.2
}
fn default_beta() -> f64 {
    1.0
}
fn default_zeta_sd() -> f64 {
    0.4
}
fn default_alpha() -> f64 {
    0.05
}
fn default_t_max() -> usize {
    300
}
fn default_target() -> f64 {
    0.15
}
fn default_reps() -> u64 {
    10_000
}

impl McDesign {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(1..=4).contains(&self.table) {
            return Err(SimError::InvalidConfig(format!("table {} not in 1..=4", self.table)));
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(SimError::InvalidConfig(format!("alpha {} not in (0,1)", self.alpha)));
        }
        Ok(())
    }

    fn uses_aft(&self) -> bool {
        self.table >= 3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McStatistic {
    Did,
    RobustFeasible,
    RobustOracle,
}

impl McStatistic {
    pub fn label(&self) -> &'static str {
        match self {
            McStatistic::Did => "did",
            McStatistic::RobustFeasible => "robust_feasible",
            McStatistic::RobustOracle => "robust_oracle",
        }
    }
}

/// Tallies for one (statistic, weight mode) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McCell {
    pub statistic: McStatistic,
    pub weights: WeightMode,
    pub used_reps: u64,
    pub rejections_randomized: u64,
    pub rejections_nonrandomized: u64,
    /// Rejection rate (%) of the exactly-level randomized test.
    pub rate_pct: f64,
    /// Rejection rate (%) of the non-randomized `S > c_hat` rule.
    pub rate_nonrandomized_pct: f64,
    pub mc_std_err_pct: f64,
}

/// Result of a Monte Carlo run: the resolved design plus one row per
/// (statistic, weight mode).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McResult {
    pub design: McDesign,
    pub replications: u64,
    pub base_seed: u64,
    /// Raw adoption-time units per panel period used in the rescale.
    pub period_length: f64,
    /// Replications dropped because the Cox fit failed.
    pub excluded_fit: u64,
    /// Replications dropped because the first adoption left no usable
    /// pre/post window (or no adoption happened in-sample).
    pub excluded_window: u64,
    pub cells: Vec<McCell>,
}

impl McResult {
    pub fn cell(&self, statistic: McStatistic, weights: WeightMode) -> Option<&McCell> {
        self.cells
            .iter()
            .find(|c| c.statistic == statistic && c.weights == weights)
    }

    /// CSV rows in the table layout, plus std-error and exclusion columns.
    pub fn to_csv(&self) -> String {
        let d = &self.design;
        let mut out = String::from(
            "table,n,gamma,tau,k1,k2,rho,sigma,t_max,replications,base_seed,statistic,weights,\
             used_reps,excluded_fit,excluded_window,rate_pct,rate_nonrandomized_pct,mc_std_err_pct\n",
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.4},{:.4},{:.4}\n",
                d.table,
                d.n,
                d.gamma,
                d.tau,
                d.k1,
                d.k2,
                d.rho,
                d.sigma,
                d.t_max,
                self.replications,
                self.base_seed,
                c.statistic.label(),
                match c.weights {
                    WeightMode::Uniform => "uniform",
                    WeightMode::Feasible => "feasible",
                    WeightMode::Infeasible => "infeasible",
                    WeightMode::Custom => "custom",
                },
                c.used_reps,
                self.excluded_fit,
                self.excluded_window,
                c.rate_pct,
                c.rate_nonrandomized_pct,
                c.mc_std_err_pct
            ));
        }
        out
    }
}

const WEIGHT_MODES: [WeightMode; 3] = [
    WeightMode::Uniform,
    WeightMode::Feasible,
    WeightMode::Infeasible,
];

#[derive(Default, Clone)]
struct Tally {
    used: u64,
    rej_rand: u64,
    rej_nonrand: u64,
}

#[derive(Default, Clone)]
struct RepCounts {
    excluded_fit: u64,
    excluded_window: u64,
    // [statistic][weight_mode]
    tallies: Vec<Vec<Tally>>,
}

impl RepCounts {
    fn new(n_stats: usize) -> Self {
        Self {
            excluded_fit: 0,
            excluded_window: 0,
            tallies: vec![vec![Tally::default(); WEIGHT_MODES.len()]; n_stats],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.excluded_fit += other.excluded_fit;
        self.excluded_window += other.excluded_window;
        for (a, b) in self.tallies.iter_mut().zip(other.tallies) {
            for (x, y) in a.iter_mut().zip(b) {
                x.used += y.used;
                x.rej_rand += y.rej_rand;
                x.rej_nonrand += y.rej_nonrand;
            }
        }
        self
    }
}

/// Fast path for the per-candidate DiD values at a window anchor: one
/// `O(n · t_max)` sweep instead of `O(n² · t_max)` repeated calls. Equality
/// with `stats::did_statistic` is covered by a unit test.
fn did_candidates(panel: &Panel, anchor: f64) -> Vec<f64> {
    let n = panel.n();
    let t_max = panel.t_max();
    let fl = anchor.floor() as usize;
    let fac = n as f64 / (n as f64 - 1.0);
    let mut totals = vec![0.0; t_max];
    for t in 1..=t_max {
        for i in 0..n {
            totals[t - 1] += panel.outcome(i, t);
        }
    }
    (0..n)
        .map(|i| {
            let mut pre = 0.0;
            for t in 1..=fl {
                pre += fac * (panel.outcome(i, t) - totals[t - 1] / n as f64);
            }
            let mut post = 0.0;
            for t in fl + 1..=t_max {
                post += fac * (panel.outcome(i, t) - totals[t - 1] / n as f64);
            }
            post / (t_max - fl) as f64 - pre / fl as f64
        })
        .collect()
}

fn statistics_for(design: &McDesign) -> Vec<McStatistic> {
    if design.table == 4 {
        vec![McStatistic::RobustFeasible, McStatistic::RobustOracle]
    } else {
        vec![McStatistic::Did]
    }
}

/// Run every replication of a design cell and tabulate rejection rates at
/// the design's nominal level.
pub fn run_monte_carlo(
    design: &McDesign,
    replications: u64,
    base_seed: u64,
) -> Result<McResult, SimError> {
    design.validate()?;
    if replications < 1 {
        return Err(SimError::InvalidConfig("replications must be >= 1".into()));
    }
    let prepared = if design.uses_aft() {
        PreparedDgp::new_52_with_target(
            &Dgp52Config {
                n: design.n,
                rho: design.rho,
                sigma: design.sigma,
                gamma: design.gamma,
                tau: design.tau,
                k1: design.k1,
                k2: design.k2,
                theta: design.theta,
                zeta_sd: design.zeta_sd,
                rep_seed: 0,
            },
            design.t_max,
            design.adoption_target,
        )?
    } else {
        PreparedDgp::new_51_with_target(
            &Dgp51Config {
                n: design.n,
                rho: design.rho,
                sigma: design.sigma,
                gamma: design.gamma,
                delta: design.delta,
                beta: design.beta,
                tau: design.tau,
                rep_seed: 0,
            },
            design.t_max,
            design.adoption_target,
        )?
    };
    let stats = statistics_for(design);

    let counts = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut local = RepCounts::new(stats.len());
            run_replication(design, &prepared, &stats, base_seed, r, &mut local);
            local
        })
        .reduce(|| RepCounts::new(stats.len()), RepCounts::merge);

    let mut cells = Vec::new();
    for (si, stat) in stats.iter().enumerate() {
        for (wi, mode) in WEIGHT_MODES.iter().enumerate() {
            let t = &counts.tallies[si][wi];
            let used = t.used.max(1) as f64;
            let p = t.rej_rand as f64 / used;
            cells.push(McCell {
                statistic: *stat,
                weights: *mode,
                used_reps: t.used,
                rejections_randomized: t.rej_rand,
                rejections_nonrandomized: t.rej_nonrand,
                rate_pct: 100.0 * p,
                rate_nonrandomized_pct: 100.0 * t.rej_nonrand as f64 / used,
                mc_std_err_pct: 100.0 * (p * (1.0 - p) / used).sqrt(),
            });
        }
    }
    Ok(McResult {
        design: design.clone(),
        replications,
        base_seed,
        period_length: prepared.period_length(),
        excluded_fit: counts.excluded_fit,
        excluded_window: counts.excluded_window,
        cells,
    })
}

fn run_replication(
    design: &McDesign,
    prepared: &PreparedDgp,
    stats: &[McStatistic],
    base_seed: u64,
    r: u64,
    counts: &mut RepCounts,
) {
    let seed = replication_seed(base_seed, r);
    let rep = match prepared.simulate(seed) {
        Ok(rep) => rep,
        Err(_) => {
            counts.excluded_window += 1;
            return;
        }
    };
    let t_max = design.t_max;
    let (i1, t1) = match rep.adoption.first_adopter() {
        Ok(v) => v,
        Err(_) => {
            counts.excluded_window += 1;
            return;
        }
    };
    // Windows anchored at the boundary of the adoption period: periods
    // strictly before ⌈T1⌉ are pre, the adoption period itself and later are
    // post. At least one pre period is kept for first adoptions inside the
    // first period.
    let adoption_period = (t1.ceil() as usize).max(2);
    if adoption_period + 1 > t_max {
        counts.excluded_window += 1;
        return;
    }
    let anchor = adoption_period as f64 - 0.5;

    // Feasible weights from the partial-likelihood fit; a failed fit drops
    // the replication from every variant.
    let feasible = match fit_cox(&rep.panel, &rep.adoption, &CoxOptions::default()) {
        Ok(fit) => match adopter_weights(&rep.panel, anchor, &fit.beta_hat) {
            Ok(w) => w,
            Err(_) => {
                counts.excluded_fit += 1;
                return;
            }
        },
        Err(_) => {
            counts.excluded_fit += 1;
            return;
        }
    };
    let infeasible = match infeasible_weights(design, &rep, anchor) {
        Ok(w) => w,
        Err(_) => {
            counts.excluded_fit += 1;
            return;
        }
    };
    let uniform = WeightVector::uniform(design.n);

    let did = did_candidates(&rep.panel, anchor);
    let mut candidate_sets: Vec<Vec<f64>> = Vec::with_capacity(stats.len());
    for stat in stats {
        let values = match stat {
            McStatistic::Did => did.clone(),
            McStatistic::RobustOracle => {
                match RobustPlugins::from_parameters(design.gamma, design.rho, anchor, t_max) {
                    Ok(plugins) => robust_values(&did, &rep.covariates, &plugins),
                    Err(_) => {
                        counts.excluded_fit += 1;
                        return;
                    }
                }
            }
            McStatistic::RobustFeasible => {
                match RobustPlugins::estimate(&rep.panel, &rep.adoption, anchor) {
                    Ok(plugins) => robust_values(&did, &rep.covariates, &plugins),
                    Err(_) => {
                        counts.excluded_fit += 1;
                        return;
                    }
                }
            }
        };
        // Two-sided form: the tables test departures in either direction.
        candidate_sets.push(values.into_iter().map(f64::abs).collect());
    }

    // Atom draws come after the simulation stream, one per (statistic, mode),
    // in fixed order.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5DEE_CE66_D1CE_CAFE);
    for (si, candidates) in candidate_sets.iter().enumerate() {
        for (wi, mode) in WEIGHT_MODES.iter().enumerate() {
            let weights = match mode {
                WeightMode::Uniform => &uniform,
                WeightMode::Feasible => &feasible,
                WeightMode::Infeasible => &infeasible,
                WeightMode::Custom => unreachable!(),
            };
            let report = assemble_report(
                candidates.clone(),
                weights.clone(),
                design.alpha,
                *mode,
                i1,
                anchor,
            );
            let u: f64 = rng.gen();
            let tally = &mut counts.tallies[si][wi];
            tally.used += 1;
            if report.reject {
                tally.rej_nonrand += 1;
            }
            if decide_randomized(&report, u) {
                tally.rej_rand += 1;
            }
        }
    }
}

/// Robust candidates from precomputed DiD values: subtracts the covariate
/// correction in one sweep. Equality with `stats::robust_statistic` is
/// covered by a unit test.
fn robust_values(did: &[f64], xs: &[f64], plugins: &RobustPlugins) -> Vec<f64> {
    let n = did.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let scale = n / (n - 1.0) * plugins.gamma * (plugins.rho_plus - plugins.rho_minus);
    did.iter()
        .zip(xs)
        .map(|(&d, &x)| d - scale * (x_bar - x))
        .collect()
}

fn infeasible_weights(
    design: &McDesign,
    rep: &SimulatedRep,
    anchor: f64,
) -> Result<WeightVector, SimError> {
    if design.uses_aft() {
        // True hazards of the lognormal adoption law, on the raw time scale.
        let (i1, _) = rep.adoption.first_adopter()?;
        let config = Dgp52Config {
            n: design.n,
            k1: design.k1,
            k2: design.k2,
            theta: design.theta,
            zeta_sd: design.zeta_sd,
            ..Dgp52Config::default()
        };
        aft_adopter_weights(&config, &rep.covariates, rep.raw_times[i1])
    } else {
        Ok(adopter_weights(&rep.panel, anchor, &[design.beta])?)
    }
}
