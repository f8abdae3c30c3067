//! Test-statistic plugins.
//!
//! * difference-in-differences contrast around the first adoption time,
//! * synthetic-control ratio statistic with simplex-constrained donor
//!   weights (see [`synth`]),
//! * robustified statistics that subtract the covariate-driven part of the
//!   DiD contrast using either oracle `(γ, ρ)` or their plug-in estimates.
//!
//! Window conventions: with `f = ⌊T_(1)⌋` the pre window is the grid points
//! `1..=f` and the post window `f+1..=t_max`; each window average divides by
//! its own term count. For non-integer `T_(1)` these counts agree with the
//! displayed `⌊T_(1)⌋` / `t_max − ⌈T_(1)⌉` bookkeeping up to the post-window
//! count being taken literally as the number of summands, which is what the
//! robustness correction needs for exact cancellation. An exactly integer
//! `T_(1)` makes the two window families differ by one term; that case is
//! flagged with a warning.

pub mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::panel::{AdoptionData, Panel, PanelError};
pub use synth::{synth_statistic, synth_weights, SynthOptions, SynthWeights};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty {which} window for T_(1) = {t1} with t_max = {t_max}")]
    EmptyWindow {
        which: &'static str,
        t1: f64,
        t_max: usize,
    },
    #[error("empty pre-period: no grid time strictly before T_(1) = {0}")]
    EmptyPrePeriod(f64),
    #[error("|rho| must be < 1, got {0}")]
    InvalidRho(f64),
    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(&'static str),
    #[error("operation requires a scalar time-invariant covariate")]
    RequiresScalarTimeInvariantCovariate,
    #[error("need at least {need} units, got {got}")]
    TooFewUnits { need: usize, got: usize },
    #[error(transparent)]
    Panel(#[from] PanelError),
}

/// Guard shared by the DiD-style windows: `1 <= ⌊T1⌋` and `⌈T1⌉ < t_max`.
fn check_windows(t1: f64, t_max: usize) -> Result<usize, StatsError> {
    let fl = t1.floor();
    if !(fl >= 1.0) {
        return Err(StatsError::EmptyWindow {
            which: "pre",
            t1,
            t_max,
        });
    }
    if !((t1.ceil() as usize) < t_max) {
        return Err(StatsError::EmptyWindow {
            which: "post",
            t1,
            t_max,
        });
    }
    if t1.fract() == 0.0 {
        log::warn!(
            "T_(1) = {t1} is an exact integer; the pre window [1, T1] and the \
             rho_minus window [1, T1) differ by one term"
        );
    }
    Ok(fl as usize)
}

/// Mean of `Y_{i,t} − mean_{j≠i} Y_{j,t}` over the post window minus the same
/// over the pre window.
pub fn did_statistic(panel: &Panel, candidate: usize, t1: f64) -> Result<f64, StatsError> {
    let n = panel.n();
    if n < 2 {
        return Err(StatsError::TooFewUnits { need: 2, got: n });
    }
    let t_max = panel.t_max();
    let fl = check_windows(t1, t_max)?;
    let fac = n as f64 / (n as f64 - 1.0);
    let contrast = |t: usize| -> f64 {
        let mut total = 0.0;
        for j in 0..n {
            total += panel.outcome(j, t);
        }
        let y = panel.outcome(candidate, t);
        // y - mean_{j != candidate} = n/(n-1) * (y - mean_all)
        fac * (y - total / n as f64)
    };
    let pre: f64 = (1..=fl).map(contrast).sum::<f64>() / fl as f64;
    let post: f64 = (fl + 1..=t_max).map(contrast).sum::<f64>() / (t_max - fl) as f64;
    Ok(post - pre)
}

/// Window averages of the autoregressive transient `ρ^t / (1−ρ)`:
/// `ρ_+` over `T1 < t <= t_max`, `ρ_−` over `1 <= t < T1`.
pub fn rho_windows(rho: f64, t1: f64, t_max: usize) -> Result<(f64, f64), StatsError> {
    if !(rho.abs() < 1.0) {
        return Err(StatsError::InvalidRho(rho));
    }
    let fl = check_windows(t1, t_max)?;
    let geom_sum = |a: usize, b: usize| -> f64 {
        // sum_{t=a..=b} rho^t
        if a > b || rho == 0.0 {
            return 0.0;
        }
        (rho.powi(a as i32) - rho.powi(b as i32 + 1)) / (1.0 - rho)
    };
    let post_count = (t_max - fl) as f64;
    let rho_plus = geom_sum(fl + 1, t_max) / (1.0 - rho) / post_count;
    // Strictly below T1: drops t = T1 itself when T1 is an integer, while the
    // divisor stays at ⌊T1⌋ as displayed.
    let minus_top = if t1.fract() == 0.0 { fl - 1 } else { fl };
    let rho_minus = geom_sum(1, minus_top) / (1.0 - rho) / fl as f64;
    Ok((rho_plus, rho_minus))
}

/// Plug-in parameters of the robustified statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustPlugins {
    pub gamma: f64,
    pub rho: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

impl RobustPlugins {
    /// Oracle variant: known `(γ, ρ)`, windows from `T_(1)`.
    pub fn from_parameters(
        gamma: f64,
        rho: f64,
        t1: f64,
        t_max: usize,
    ) -> Result<Self, StatsError> {
        let (rho_plus, rho_minus) = rho_windows(rho, t1, t_max)?;
        Ok(Self {
            gamma,
            rho,
            rho_plus,
            rho_minus,
        })
    }

    /// Feasible variant: plug-in estimates recomputed from the dataset.
    pub fn estimate(
        panel: &Panel,
        adoption: &AdoptionData,
        t1: f64,
    ) -> Result<Self, StatsError> {
        let gamma = estimate_gamma(panel, adoption)?;
        let mut rho = estimate_rho(panel, adoption, gamma)?;
        if rho.abs() >= 1.0 {
            log::warn!("estimated rho {rho} outside (-1, 1); clamping for the window sums");
            rho = rho.clamp(-0.999, 0.999);
        }
        let (rho_plus, rho_minus) = rho_windows(rho, t1, panel.t_max())?;
        Ok(Self {
            gamma,
            rho,
            rho_plus,
            rho_minus,
        })
    }
}

fn scalar_covariates(panel: &Panel) -> Result<Vec<f64>, StatsError> {
    panel
        .scalar_covariates()
        .ok_or(StatsError::RequiresScalarTimeInvariantCovariate)
}

/// No-intercept slope of `C⁻¹y` on `C⁻¹x` at the `t = 1` cross-section, with
/// `y_i = Y_{i,1} − Y_{1,1}`, `x_i = X_i − X_1` and `C = I + U`
/// (so `C⁻¹ = I − U/(n+1)` in closed form).
pub fn estimate_gamma(panel: &Panel, _adoption: &AdoptionData) -> Result<f64, StatsError> {
    let xs = scalar_covariates(panel)?;
    let n = panel.n();
    if n < 2 {
        return Err(StatsError::TooFewUnits { need: 2, got: n });
    }
    let y: Vec<f64> = (0..n)
        .map(|i| panel.outcome(i, 1) - panel.outcome(0, 1))
        .collect();
    let x: Vec<f64> = (0..n).map(|i| xs[i] - xs[0]).collect();
    let cinv = |v: &[f64]| -> Vec<f64> {
        let s: f64 = v.iter().sum::<f64>() / (n as f64 + 1.0);
        v.iter().map(|vi| vi - s).collect()
    };
    let xt = cinv(&x);
    let yt = cinv(&y);
    let denom: f64 = xt.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(StatsError::DegenerateRegressor(
            "covariate has no cross-sectional variation",
        ));
    }
    Ok(xt.iter().zip(&yt).map(|(a, b)| a * b).sum::<f64>() / denom)
}

/// Single no-intercept slope from regressing `D⁻¹(Y₁ − γ̂X₁)` on `D⁻¹Y₁⁻`,
/// stacking all `(n−1)(t_max−1)` transformed pairs; the first adopter's row
/// is dropped and `D⁻¹ = I − U/n` acts along the unit dimension per column.
pub fn estimate_rho(
    panel: &Panel,
    adoption: &AdoptionData,
    gamma_hat: f64,
) -> Result<f64, StatsError> {
    let n = panel.n();
    if n < 3 {
        return Err(StatsError::TooFewUnits { need: 3, got: n });
    }
    let xs = scalar_covariates(panel)?;
    let (i1, _) = adoption.first_adopter()?;
    let rows: Vec<usize> = (0..n).filter(|&i| i != i1).collect();
    let m = rows.len();
    let t_max = panel.t_max();
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 1..t_max {
        // Column t of Y1- is Y[., t]; column t of Y1 - gamma*X1 is Y[., t+1] - gamma X.
        let a: Vec<f64> = rows
            .iter()
            .map(|&j| panel.outcome(j, t + 1) - gamma_hat * xs[j])
            .collect();
        let b: Vec<f64> = rows.iter().map(|&j| panel.outcome(j, t)).collect();
        let dinv = |v: &[f64]| -> Vec<f64> {
            let s: f64 = v.iter().sum::<f64>() / (m as f64 + 1.0);
            v.iter().map(|vi| vi - s).collect()
        };
        let at = dinv(&a);
        let bt = dinv(&b);
        for k in 0..m {
            num += at[k] * bt[k];
            den += bt[k] * bt[k];
        }
    }
    if !(den > 0.0) {
        return Err(StatsError::DegenerateRegressor(
            "lagged outcomes are identically zero after the D-transform",
        ));
    }
    Ok(num / den)
}

/// `S_n(candidate) − n/(n−1) · γ (ρ_+ − ρ_−)(X̄ − X_candidate)`.
pub fn robust_statistic(
    panel: &Panel,
    candidate: usize,
    t1: f64,
    plugins: &RobustPlugins,
) -> Result<f64, StatsError> {
    let xs = scalar_covariates(panel)?;
    let did = did_statistic(panel, candidate, t1)?;
    let n = panel.n() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let correction =
        n / (n - 1.0) * plugins.gamma * (plugins.rho_plus - plugins.rho_minus)
            * (x_bar - xs[candidate]);
    Ok(did - correction)
}

/// Statistic selection for a test run. Candidate values are the statistic
/// re-evaluated with each unit substituted for the first adopter, `T_(1)`
/// held fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    Did,
    Synth(SynthOptions),
    RobustOracle { gamma: f64, rho: f64 },
    RobustFeasible,
}

impl Statistic {
    pub fn candidate_values(
        &self,
        panel: &Panel,
        adoption: &AdoptionData,
        t1: f64,
    ) -> Result<Vec<f64>, StatsError> {
        let n = panel.n();
        match self {
            Statistic::Did => (0..n).map(|i| did_statistic(panel, i, t1)).collect(),
            Statistic::Synth(options) => {
                use rayon::prelude::*;
                (0..n)
                    .into_par_iter()
                    .map(|i| synth_statistic(panel, i, t1, options))
                    .collect()
            }
            Statistic::RobustOracle { gamma, rho } => {
                let plugins = RobustPlugins::from_parameters(*gamma, *rho, t1, panel.t_max())?;
                (0..n)
                    .map(|i| robust_statistic(panel, i, t1, &plugins))
                    .collect()
            }
            Statistic::RobustFeasible => {
                let plugins = RobustPlugins::estimate(panel, adoption, t1)?;
                (0..n)
                    .map(|i| robust_statistic(panel, i, t1, &plugins))
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::AdoptionData;

    fn panel_from_outcomes(y: Vec<Vec<f64>>, xs: &[f64]) -> Panel {
        let t_max = y[0].len();
        let covs = xs.iter().map(|&x| vec![vec![x]; t_max]).collect();
        Panel::new(y, covs, None).unwrap()
    }

    #[test]
    fn did_zero_on_constant_panel() {
        let panel = panel_from_outcomes(vec![vec![3.3; 4]; 3], &[0.0, 1.0, 2.0]);
        for cand in 0..3 {
            assert_eq!(did_statistic(&panel, cand, 2.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn did_zero_under_unit_fixed_effects() {
        let effects = [1.0, -2.0, 5.0];
        let y = effects.iter().map(|&a| vec![a; 4]).collect();
        let panel = panel_from_outcomes(y, &[0.0, 1.0, 2.0]);
        for cand in 0..3 {
            assert!(did_statistic(&panel, cand, 2.5).unwrap().abs() < 1e-14);
        }
    }

    /// Spreadsheet-style literal two-window summation on a 3x4 integer
    /// fixture with T1 = 2.5.
    #[test]
    fn did_matches_direct_summation_oracle() {
        let y = vec![
            vec![1.0, 2.0, 5.0, 7.0],
            vec![0.0, 1.0, 1.0, 2.0],
            vec![4.0, 4.0, 6.0, 5.0],
        ];
        let panel = panel_from_outcomes(y.clone(), &[0.0, 1.0, 2.0]);
        // candidate 0: contrast_t = y0 - (y1 + y2)/2
        let c = |t: usize| y[0][t - 1] - (y[1][t - 1] + y[2][t - 1]) / 2.0;
        // pre = {1, 2}, post = {3, 4}
        let oracle = (c(3) + c(4)) / 2.0 - (c(1) + c(2)) / 2.0;
        let got = did_statistic(&panel, 0, 2.5).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn did_invariant_to_common_time_trend() {
        let base = vec![
            vec![1.0, 2.0, 5.0, 7.0, 1.0],
            vec![0.0, 1.0, 1.0, 2.0, 0.5],
            vec![4.0, 4.0, 6.0, 5.0, 3.0],
        ];
        let trend = |t: usize| 2.0 * (t as f64).sqrt() - 0.3 * t as f64;
        let shifted: Vec<Vec<f64>> = base
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(t0, v)| v + trend(t0 + 1))
                    .collect()
            })
            .collect();
        let p1 = panel_from_outcomes(base, &[0.0, 1.0, 2.0]);
        let p2 = panel_from_outcomes(shifted, &[0.0, 1.0, 2.0]);
        for cand in 0..3 {
            let a = did_statistic(&p1, cand, 2.5).unwrap();
            let b = did_statistic(&p2, cand, 2.5).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn did_window_boundaries() {
        let panel = panel_from_outcomes(
            vec![vec![1.0; 4], vec![2.0; 4], vec![0.0; 4]],
            &[0.0, 1.0, 2.0],
        );
        // pre window empty below 1
        assert!(matches!(
            did_statistic(&panel, 0, 0.4),
            Err(StatsError::EmptyWindow { which: "pre", .. })
        ));
        // ceil(T1) = t_max leaves no post window under the literal guard
        assert!(matches!(
            did_statistic(&panel, 0, 3.5),
            Err(StatsError::EmptyWindow { which: "post", .. })
        ));
        // interior values fine, including integer T1 (with a warning)
        assert!(did_statistic(&panel, 0, 2.0).is_ok());
    }

    #[test]
    fn rho_windows_fixtures() {
        // rho = 0 -> (0, 0)
        assert_eq!(rho_windows(0.0, 2.5, 4).unwrap(), (0.0, 0.0));
        // hand-expanded finite sums at rho = .5, T1 = 2.5, t_max = 4
        let (rp, rm) = rho_windows(0.5, 2.5, 4).unwrap();
        assert!((rp - 0.1875).abs() < 1e-15, "{rp}");
        assert!((rm - 0.75).abs() < 1e-15, "{rm}");
    }

    #[test]
    fn rho_windows_match_geometric_closed_form() {
        for &rho in &[-0.7f64, -0.2, 0.3, 0.9] {
            for &t1 in &[1.5f64, 3.25, 5.5] {
                let t_max = 8;
                let (rp, rm) = rho_windows(rho, t1, t_max).unwrap();
                let fl = t1.floor() as usize;
                let brute_plus: f64 = (fl + 1..=t_max)
                    .map(|t| rho.powi(t as i32) / (1.0 - rho))
                    .sum::<f64>()
                    / (t_max - fl) as f64;
                let brute_minus: f64 = (1..=fl)
                    .map(|t| rho.powi(t as i32) / (1.0 - rho))
                    .sum::<f64>()
                    / fl as f64;
                assert!((rp - brute_plus).abs() < 1e-13);
                assert!((rm - brute_minus).abs() < 1e-13);
            }
        }
        assert!(matches!(
            rho_windows(1.0, 2.5, 4),
            Err(StatsError::InvalidRho(_))
        ));
    }

    #[test]
    fn rho_minus_integer_t1_drops_boundary_term() {
        // Literal displays: pre sum excludes t = T1 but still divides by T1.
        let (_, rm) = rho_windows(0.5, 3.0, 6).unwrap();
        let expect = (0.5 + 0.25) / 0.5 / 3.0;
        assert!((rm - expect).abs() < 1e-15);
    }

    fn adoption_for(n: usize, t_max: usize) -> AdoptionData {
        // First adopter is unit 1 at T1 = 2.5; the rest censored.
        let mut times = vec![(t_max + 1) as f64; n];
        let mut censored = vec![true; n];
        times[1] = 2.5;
        censored[1] = false;
        AdoptionData::new(times, censored, t_max).unwrap()
    }

    #[test]
    fn gamma_noiseless_recovery() {
        let g0 = -1.7;
        let xs = [0.4, -0.8, 1.9, 2.2, -0.3];
        let y: Vec<Vec<f64>> = xs.iter().map(|&x| vec![g0 * x + 4.0; 3]).collect();
        let panel = panel_from_outcomes(y, &xs);
        let adoption = adoption_for(5, 3);
        let got = estimate_gamma(&panel, &adoption).unwrap();
        assert!((got - g0).abs() < 1e-10, "{got}");
    }

    #[test]
    fn gamma_degenerate_on_constant_covariate() {
        let xs = [1.5; 4];
        let y: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64; 3]).collect();
        let panel = panel_from_outcomes(y, &xs);
        assert!(matches!(
            estimate_gamma(&panel, &adoption_for(4, 3)),
            Err(StatsError::DegenerateRegressor(_))
        ));
    }

    /// Dense linear-algebra oracle: slope of the no-intercept regression of
    /// `C^{-1} y` on `C^{-1} x` with `C^{-1}` from an explicit matrix inverse.
    #[test]
    fn gamma_matches_dense_gls_oracle() {
        use nalgebra::{DMatrix, DVector};
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(3..13);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y1: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y: Vec<Vec<f64>> = y1.iter().map(|&v| vec![v, v + 1.0]).collect();
            let panel = panel_from_outcomes(y, &xs);
            let got = estimate_gamma(&panel, &adoption_for(n, 2)).unwrap();

            let c = DMatrix::<f64>::identity(n, n) + DMatrix::<f64>::from_element(n, n, 1.0);
            let cinv = c.try_inverse().unwrap();
            let yv = DVector::from_iterator(n, (0..n).map(|i| y1[i] - y1[0]));
            let xv = DVector::from_iterator(n, (0..n).map(|i| xs[i] - xs[0]));
            let yt = &cinv * yv;
            let xt = &cinv * xv;
            let oracle = xt.dot(&yt) / xt.dot(&xt);
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
        }
    }

    #[test]
    fn rho_noiseless_recovery() {
        // sigma = 0 recursion with known rho and gamma matched exactly.
        let rho0 = 0.6;
        let gamma0 = 0.9;
        let xs = [0.5, -1.0, 2.0, 1.0, -0.4];
        let t_max = 6;
        let y: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| {
                let mut row = Vec::with_capacity(t_max);
                let mut prev = 0.0;
                for _ in 0..t_max {
                    prev = rho0 * prev + gamma0 * x;
                    row.push(prev);
                }
                row
            })
            .collect();
        let panel = panel_from_outcomes(y, &xs);
        let adoption = adoption_for(5, t_max);
        let got = estimate_rho(&panel, &adoption, gamma0).unwrap();
        assert!((got - rho0).abs() < 1e-8, "{got}");
    }

    #[test]
    fn rho_degenerate_on_zero_lags() {
        // Outcomes vanish everywhere except the last period.
        let xs = [0.5, -1.0, 2.0];
        let y: Vec<Vec<f64>> = (0..3).map(|i| vec![0.0, 0.0, i as f64 + 1.0]).collect();
        let panel = panel_from_outcomes(y, &xs);
        let adoption = adoption_for(3, 3);
        assert!(matches!(
            estimate_rho(&panel, &adoption, 0.0),
            Err(StatsError::DegenerateRegressor(_))
        ));
    }

    #[test]
    fn rho_matches_dense_gls_oracle() {
        use nalgebra::{DMatrix, DVector};
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let n = rng.gen_range(3..13);
            let t_max = rng.gen_range(2..9usize);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..t_max).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let gamma = rng.gen_range(-1.0..1.0);
            let panel = panel_from_outcomes(y.clone(), &xs);
            let adoption = adoption_for(n, t_max);
            let got = estimate_rho(&panel, &adoption, gamma).unwrap();

            // Dense oracle: stack D^{-1}-transformed columns, unit 1 dropped
            // (the fixture's first adopter).
            let m = n - 1;
            let rows: Vec<usize> = (0..n).filter(|&i| i != 1).collect();
            let d = DMatrix::<f64>::identity(m, m) + DMatrix::<f64>::from_element(m, m, 1.0);
            let dinv = d.try_inverse().unwrap();
            let mut num = 0.0;
            let mut den = 0.0;
            for t in 1..t_max {
                let a = DVector::from_iterator(
                    m,
                    rows.iter().map(|&j| y[j][t] - gamma * xs[j]),
                );
                let b = DVector::from_iterator(m, rows.iter().map(|&j| y[j][t - 1]));
                let at = &dinv * a;
                let bt = &dinv * b;
                num += at.dot(&bt);
                den += bt.dot(&bt);
            }
            let oracle = num / den;
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
        }
    }

    #[test]
    fn robust_equals_did_when_gamma_zero() {
        let y = vec![
            vec![1.0, 2.0, 5.0, 7.0],
            vec![0.0, 1.0, 1.0, 2.0],
            vec![4.0, 4.0, 6.0, 5.0],
        ];
        let xs = [0.3, -1.0, 2.0];
        let panel = panel_from_outcomes(y, &xs);
        let plugins = RobustPlugins::from_parameters(0.0, 0.4, 2.5, 4).unwrap();
        for cand in 0..3 {
            let did = did_statistic(&panel, cand, 2.5).unwrap();
            let rob = robust_statistic(&panel, cand, 2.5, &plugins).unwrap();
            assert_eq!(did, rob);
        }
    }

    #[test]
    fn robust_equals_did_at_mean_covariate() {
        let y = vec![
            vec![1.0, 2.0, 5.0, 7.0],
            vec![0.0, 1.0, 1.0, 2.0],
            vec![4.0, 4.0, 6.0, 5.0],
        ];
        // X for candidate 0 equals the average of all three.
        let xs = [1.0, -0.5, 2.5];
        let panel = panel_from_outcomes(y, &xs);
        let plugins = RobustPlugins::from_parameters(2.0, 0.4, 2.5, 4).unwrap();
        let did = did_statistic(&panel, 0, 2.5).unwrap();
        let rob = robust_statistic(&panel, 0, 2.5, &plugins).unwrap();
        assert!((did - rob).abs() < 1e-14);
    }

    /// Noiseless null data from the AR(1)-with-covariate recursion: the
    /// oracle-corrected statistic vanishes for every candidate.
    #[test]
    fn robust_oracle_cancels_exactly_on_noiseless_null() {
        let rho0 = 0.2;
        let gamma0 = 1.4;
        let xs = [2.0, -3.0, 0.5, 1.0, -1.5, 4.0];
        let t_max = 7;
        let y: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| {
                let mut prev = 0.0;
                (0..t_max)
                    .map(|t| {
                        prev = rho0 * prev + 0.7 * ((t + 1) as f64).sqrt() + gamma0 * x;
                        prev
                    })
                    .collect()
            })
            .collect();
        let panel = panel_from_outcomes(y, &xs);
        let t1 = 3.5;
        let plugins = RobustPlugins::from_parameters(gamma0, rho0, t1, t_max).unwrap();
        for cand in 0..xs.len() {
            let s = robust_statistic(&panel, cand, t1, &plugins).unwrap();
            assert!(s.abs() < 1e-10, "candidate {cand}: {s}");
        }
    }

    #[test]
    fn robust_requires_scalar_time_invariant_covariate() {
        // Time-varying covariate path.
        let outcomes = vec![vec![0.0; 4]; 3];
        let covs: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|i| (0..4).map(|t| vec![(i + t) as f64]).collect())
            .collect();
        let panel = Panel::new(outcomes, covs, None).unwrap();
        let plugins = RobustPlugins {
            gamma: 1.0,
            rho: 0.2,
            rho_plus: 0.0,
            rho_minus: 0.1,
        };
        assert!(matches!(
            robust_statistic(&panel, 0, 2.5, &plugins),
            Err(StatsError::RequiresScalarTimeInvariantCovariate)
        ));
    }
}
