//! Synthetic-control donor weights and the pre/post fit-ratio statistic.
//!
//! The weight program is least squares of the candidate's pre-period outcome
//! path on the donors' paths over the simplex (weights non-negative, summing
//! to one, candidate excluded). Solved by fully corrective Frank–Wolfe: each
//! outer step adds the steepest vertex, then re-optimizes exactly over the
//! simplex spanned by the vertices collected so far; the certificate is the
//! Frank–Wolfe duality gap.

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::panel::Panel;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthOptions {
    pub max_iter: usize,
    /// Duality-gap tolerance.
    pub tol: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-10,
        }
    }
}

/// Simplex weights over donors; the candidate's own entry is exactly zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthWeights {
    /// Length-n vector, `w[candidate] = 0`.
    pub weights: Vec<f64>,
    pub pre_fit_sse: f64,
    /// Final Frank–Wolfe duality gap.
    pub duality_gap: f64,
    pub iterations: usize,
}

/// Grid times strictly before `t1`.
fn pre_period(t1: f64, t_max: usize) -> Vec<usize> {
    (1..=t_max).filter(|&t| (t as f64) < t1).collect()
}

/// Grid times at or after `t1`.
fn post_period(t1: f64, t_max: usize) -> Vec<usize> {
    (1..=t_max).filter(|&t| (t as f64) >= t1).collect()
}

/// Solve `min_w Σ_{t<T1} (Y_{cand,t} − Σ_{j≠cand} w_j Y_{j,t})²` over the
/// simplex.
pub fn synth_weights(
    panel: &Panel,
    candidate: usize,
    t1: f64,
    options: &SynthOptions,
) -> Result<SynthWeights, StatsError> {
    let n = panel.n();
    if n < 2 {
        return Err(StatsError::TooFewUnits { need: 2, got: n });
    }
    let pre = pre_period(t1, panel.t_max());
    if pre.is_empty() {
        return Err(StatsError::EmptyPrePeriod(t1));
    }
    let donors: Vec<usize> = (0..n).filter(|&j| j != candidate).collect();
    let m = donors.len();
    let rows = pre.len();
    // b[r][k] = donor k's outcome at pre time r; y[r] = candidate's outcome.
    let b: Vec<f64> = pre
        .iter()
        .flat_map(|&t| donors.iter().map(move |&j| (t, j)))
        .map(|(t, j)| panel.outcome(j, t))
        .collect();
    let y: Vec<f64> = pre.iter().map(|&t| panel.outcome(candidate, t)).collect();

    let residual = |w: &[f64]| -> Vec<f64> {
        (0..rows)
            .map(|r| {
                let fitted: f64 = (0..m).map(|k| b[r * m + k] * w[k]).sum();
                y[r] - fitted
            })
            .collect()
    };
    let sse = |w: &[f64]| -> f64 { residual(w).iter().map(|r| r * r).sum() };
    // grad_k = -2 sum_r b[r][k] * residual_r
    let gradient = |w: &[f64]| -> Vec<f64> {
        let res = residual(w);
        (0..m)
            .map(|k| -2.0 * (0..rows).map(|r| b[r * m + k] * res[r]).sum::<f64>())
            .collect()
    };

    let mut w = vec![1.0 / m as f64; m];
    let mut active: Vec<usize> = Vec::new();
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    for iter in 0..options.max_iter {
        iterations = iter;
        let g = gradient(&w);
        // Linear minimization oracle over the simplex: best single vertex.
        let (v_star, g_min) = g
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, &v)| (k, v))
            .unwrap();
        let g_dot_w: f64 = g.iter().zip(&w).map(|(gi, wi)| gi * wi).sum();
        gap = g_dot_w - g_min;
        if gap <= options.tol {
            break;
        }
        if !active.contains(&v_star) {
            active.push(v_star);
        }
        // Fully corrective step: exact minimum over the simplex of the
        // active vertices; falls back to a plain line-searched FW step if
        // the restricted system is singular.
        match solve_restricted(&b, &y, rows, m, &active) {
            Some(w_active) => {
                w = vec![0.0; m];
                for (&k, &wk) in active.iter().zip(&w_active) {
                    w[k] = wk;
                }
                // Prune vertices the correction zeroed out.
                active.retain(|&k| w[k] > 0.0);
            }
            None => {
                // Quadratic exact line search toward the vertex.
                let mut dir = vec![0.0; m];
                for (k, d) in dir.iter_mut().enumerate() {
                    *d = if k == v_star { 1.0 } else { 0.0 } - w[k];
                }
                let bd: Vec<f64> = (0..rows)
                    .map(|r| (0..m).map(|k| b[r * m + k] * dir[k]).sum())
                    .collect();
                let denom: f64 = bd.iter().map(|v| v * v).sum();
                if denom <= 0.0 {
                    break;
                }
                let theta = (gap / (2.0 * denom)).clamp(0.0, 1.0);
                for (wk, d) in w.iter_mut().zip(&dir) {
                    *wk += theta * d;
                }
            }
        }
    }

    let pre_fit_sse = sse(&w);
    let mut weights = vec![0.0; n];
    for (&j, &wk) in donors.iter().zip(&w) {
        weights[j] = wk;
    }
    Ok(SynthWeights {
        weights,
        pre_fit_sse,
        duality_gap: gap,
        iterations,
    })
}

/// Exact minimizer of the restricted least-squares problem over the simplex
/// of `active` donor columns, by iterating the equality-constrained solve and
/// stepping back to the feasible face whenever a coordinate turns negative.
/// Returns `None` if the KKT system is singular.
fn solve_restricted(
    b: &[f64],
    y: &[f64],
    rows: usize,
    m: usize,
    active: &[usize],
) -> Option<Vec<f64>> {
    let mut live: Vec<usize> = active.to_vec();
    let mut current = vec![1.0 / live.len() as f64; live.len()];
    for _ in 0..active.len() * 2 + 4 {
        let k = live.len();
        // KKT for min ||y - B_A w||^2 s.t. 1'w = 1:
        // [2 B'B  1] [w]   [2 B'y]
        // [1'     0] [λ] = [1    ]
        let dim = k + 1;
        let mut a = vec![0.0; dim * dim];
        let mut rhs = vec![0.0; dim];
        for (p, &dp) in live.iter().enumerate() {
            for (q, &dq) in live.iter().enumerate() {
                let mut s = 0.0;
                for r in 0..rows {
                    s += b[r * m + dp] * b[r * m + dq];
                }
                a[p * dim + q] = 2.0 * s;
            }
            let mut s = 0.0;
            for r in 0..rows {
                s += b[r * m + dp] * y[r];
            }
            rhs[p] = 2.0 * s;
            a[p * dim + k] = 1.0;
            a[k * dim + p] = 1.0;
        }
        rhs[k] = 1.0;
        let sol = gauss_solve(&mut a, &mut rhs, dim)?;
        let w_hat = &sol[..k];
        if w_hat.iter().all(|&v| v >= -1e-14) {
            let mut out = vec![0.0; active.len()];
            for (idx, &donor) in active.iter().enumerate() {
                if let Some(pos) = live.iter().position(|&d| d == donor) {
                    out[idx] = w_hat[pos].max(0.0);
                }
            }
            // Renormalize away the clamp dust.
            let total: f64 = out.iter().sum();
            for v in &mut out {
                *v /= total;
            }
            return Some(out);
        }
        // Step from the feasible `current` toward w_hat until the first
        // coordinate hits zero, then drop it (Lawson–Hanson inner loop).
        let mut theta = 1.0f64;
        let mut drop_idx = None;
        for (p, (&c, &h)) in current.iter().zip(w_hat).enumerate() {
            if h < 0.0 && c > h {
                let step = c / (c - h);
                if step < theta {
                    theta = step;
                    drop_idx = Some(p);
                }
            }
        }
        let drop_idx = drop_idx?;
        for (p, c) in current.iter_mut().enumerate() {
            *c += theta * (w_hat[p] - *c);
        }
        current.remove(drop_idx);
        live.remove(drop_idx);
        if live.is_empty() {
            return None;
        }
        let total: f64 = current.iter().sum();
        if total <= 0.0 {
            return None;
        }
        for c in &mut current {
            *c /= total;
        }
    }
    None
}

/// Gaussian elimination with partial pivoting; `None` on a singular pivot.
fn gauss_solve(a: &mut [f64], rhs: &mut [f64], dim: usize) -> Option<Vec<f64>> {
    let scale = a
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&r1, &r2| a[r1 * dim + col].abs().total_cmp(&a[r2 * dim + col].abs()))
            .unwrap();
        if a[pivot_row * dim + col].abs() < 1e-12 * scale {
            return None;
        }
        if pivot_row != col {
            for c in 0..dim {
                a.swap(col * dim + c, pivot_row * dim + c);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = a[col * dim + col];
        for r in col + 1..dim {
            let f = a[r * dim + col] / pivot;
            if f == 0.0 {
                continue;
            }
            for c in col..dim {
                a[r * dim + c] -= f * a[col * dim + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; dim];
    for r in (0..dim).rev() {
        let mut s = rhs[r];
        for c in r + 1..dim {
            s -= a[r * dim + c] * x[c];
        }
        x[r] = s / a[r * dim + r];
    }
    Some(x)
}

/// Ratio of post-period to pre-period squared prediction error of the
/// synthetic control. A perfect pre-period fit maps to `+∞`, which orders
/// above every finite statistic in the weighted CDF.
pub fn synth_statistic(
    panel: &Panel,
    candidate: usize,
    t1: f64,
    options: &SynthOptions,
) -> Result<f64, StatsError> {
    let fit = synth_weights(panel, candidate, t1, options)?;
    let post = post_period(t1, panel.t_max());
    if post.is_empty() {
        return Err(StatsError::EmptyWindow {
            which: "post",
            t1,
            t_max: panel.t_max(),
        });
    }
    let predict = |t: usize| -> f64 {
        (0..panel.n())
            .map(|j| fit.weights[j] * panel.outcome(j, t))
            .sum()
    };
    let sq = |t: &usize| -> f64 {
        let e = panel.outcome(candidate, *t) - predict(*t);
        e * e
    };
    let post_sse: f64 = post.iter().map(sq).sum();
    let pre_sse = fit.pre_fit_sse;
    if pre_sse == 0.0 {
        log::warn!("perfect pre-period fit for candidate {candidate}: statistic is +inf");
        return Ok(f64::INFINITY);
    }
    Ok(post_sse / pre_sse)
}
