//! Core data model for staggered-adoption panels.
//!
//! A [`Panel`] holds outcomes `Y[i][t]` and covariates `X[i][t] ∈ R^d` on the
//! integer observation grid `t ∈ {1, .., t_max}`; adoption times are
//! real-valued and live in [`AdoptionData`] together with right-censoring
//! indicators. Covariates requested at off-grid times go through the
//! rounding map `[t] = ⌈t⌉` (capped at `t_max`).

use std::collections::HashMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("missing cell for unit {unit} at time {time}")]
    MissingCell { unit: String, time: usize },
    #[error("duplicate cell for unit {unit} at time {time}")]
    DuplicateCell { unit: String, time: usize },
    #[error("tied uncensored adoption times at t = {time}")]
    TiedAdoption { time: f64 },
    #[error("non-finite value in column {column} for unit {unit}")]
    NonFiniteValue { unit: String, column: String },
    #[error("all units censored: no adoption event observed")]
    AllCensored,
    #[error("unit {unit}: censor flag {censored} inconsistent with adoption time {time} (t_max = {t_max})")]
    CensoringMismatch {
        unit: String,
        time: f64,
        censored: bool,
        t_max: usize,
    },
    #[error("adoption time for unit {unit} must be strictly positive, got {time}")]
    NonPositiveAdoptionTime { unit: String, time: f64 },
    #[error("panel needs t_max >= 2, got {0}")]
    TooFewPeriods(usize),
    #[error("{0}")]
    Shape(String),
    #[error("unit {0} appears in the adoption file but not in the panel")]
    UnknownUnit(String),
    #[error("covariate {column} declared time-invariant but varies within unit {unit}")]
    NotTimeInvariant { unit: String, column: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("could not parse `{value}` in column {column}")]
    Parse { column: String, value: String },
}

/// Real-valued time point with the grid rounding accessor `[t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeIndex {
    value: f64,
}

impl TimeIndex {
    pub fn new(value: f64) -> Result<Self, PanelError> {
        if !value.is_finite() || value < 0.0 {
            return Err(PanelError::Shape(format!(
                "time index must be finite and >= 0, got {value}"
            )));
        }
        Ok(Self { value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// The rounding map `[t]`: `⌈t⌉` for `t <= t_max`, else `t_max`.
    pub fn round_to_grid(&self, t_max: usize) -> usize {
        round_time(self.value, t_max)
    }
}

/// `[t] = ⌈t⌉` for `t <= t_max`, `t_max` beyond. Values in `[0, 1]` land on
/// the first grid point since the grid starts at 1.
pub fn round_time(t: f64, t_max: usize) -> usize {
    if t > t_max as f64 {
        t_max
    } else {
        (t.ceil() as usize).max(1)
    }
}

/// Balanced panel of outcomes and covariates over `t = 1..=t_max`.
#[derive(Debug, Clone)]
pub struct Panel {
    n: usize,
    t_max: usize,
    dim: usize,
    outcomes: Vec<f64>,   // [i][t], row-major, t zero-based internally
    covariates: Vec<f64>, // [i][t][k]
    unit_labels: Option<Vec<String>>,
}

impl Panel {
    /// Build a panel from per-unit outcome rows and covariate paths.
    /// `covariates[i][t]` is the d-vector of unit `i` at grid time `t + 1`.
    pub fn new(
        outcomes: Vec<Vec<f64>>,
        covariates: Vec<Vec<Vec<f64>>>,
        unit_labels: Option<Vec<String>>,
    ) -> Result<Self, PanelError> {
        let n = outcomes.len();
        if n == 0 {
            return Err(PanelError::Shape("panel has no units".into()));
        }
        let t_max = outcomes[0].len();
        if t_max < 2 {
            return Err(PanelError::TooFewPeriods(t_max));
        }
        if covariates.len() != n {
            return Err(PanelError::Shape(format!(
                "covariates have {} units, outcomes {}",
                covariates.len(),
                n
            )));
        }
        let dim = covariates[0].first().map_or(0, Vec::len);
        let mut y = Vec::with_capacity(n * t_max);
        let mut x = Vec::with_capacity(n * t_max * dim);
        for i in 0..n {
            if outcomes[i].len() != t_max || covariates[i].len() != t_max {
                return Err(PanelError::Shape(format!(
                    "unit {i} has a ragged time dimension"
                )));
            }
            for t in 0..t_max {
                let v = outcomes[i][t];
                if !v.is_finite() {
                    return Err(PanelError::NonFiniteValue {
                        unit: label_or_index(&unit_labels, i),
                        column: "outcome".into(),
                    });
                }
                y.push(v);
                if covariates[i][t].len() != dim {
                    return Err(PanelError::Shape(format!(
                        "unit {i} time {t}: covariate dimension {} != {dim}",
                        covariates[i][t].len()
                    )));
                }
                for (k, &c) in covariates[i][t].iter().enumerate() {
                    if !c.is_finite() {
                        return Err(PanelError::NonFiniteValue {
                            unit: label_or_index(&unit_labels, i),
                            column: format!("x{}", k + 1),
                        });
                    }
                    x.push(c);
                }
            }
        }
        if let Some(ref labels) = unit_labels {
            if labels.len() != n {
                return Err(PanelError::Shape("label count != unit count".into()));
            }
        }
        Ok(Self {
            n,
            t_max,
            dim,
            outcomes: y,
            covariates: x,
            unit_labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Outcome of unit `i` at integer grid time `t ∈ 1..=t_max`.
    pub fn outcome(&self, i: usize, t: usize) -> f64 {
        debug_assert!((1..=self.t_max).contains(&t));
        self.outcomes[i * self.t_max + (t - 1)]
    }

    /// Covariate vector of unit `i` at integer grid time `t ∈ 1..=t_max`.
    pub fn covariate(&self, i: usize, t: usize) -> &[f64] {
        debug_assert!((1..=self.t_max).contains(&t));
        let base = (i * self.t_max + (t - 1)) * self.dim;
        &self.covariates[base..base + self.dim]
    }

    /// Covariate vector at a real time, through the rounding map:
    /// `X[i][⌈t⌉]` for `t <= t_max`, `X[i][t_max]` beyond.
    pub fn covariate_at(&self, i: usize, t: f64) -> &[f64] {
        self.covariate(i, round_time(t, self.t_max))
    }

    pub fn unit_label(&self, i: usize) -> String {
        label_or_index(&self.unit_labels, i)
    }

    pub fn unit_labels(&self) -> Vec<String> {
        (0..self.n).map(|i| self.unit_label(i)).collect()
    }

    /// True when every unit's covariate path is constant over time.
    pub fn covariates_time_invariant(&self) -> bool {
        (0..self.n).all(|i| {
            let first = self.covariate(i, 1);
            (2..=self.t_max).all(|t| self.covariate(i, t) == first)
        })
    }

    /// The scalar time-invariant covariate per unit, if the panel has one.
    pub fn scalar_covariates(&self) -> Option<Vec<f64>> {
        if self.dim != 1 || !self.covariates_time_invariant() {
            return None;
        }
        Some((0..self.n).map(|i| self.covariate(i, 1)[0]).collect())
    }
}

fn label_or_index(labels: &Option<Vec<String>>, i: usize) -> String {
    labels
        .as_ref()
        .map(|l| l[i].clone())
        .unwrap_or_else(|| format!("{}", i + 1))
}

/// Adoption times with right-censoring indicators, `δ_i = 1{T_i > t_max}`.
#[derive(Debug, Clone)]
pub struct AdoptionData {
    times: Vec<f64>,
    censored: Vec<bool>,
}

impl AdoptionData {
    /// Validates positivity, censor-flag consistency against `t_max`, and the
    /// no-ties rule for uncensored times.
    pub fn new(times: Vec<f64>, censored: Vec<bool>, t_max: usize) -> Result<Self, PanelError> {
        Self::with_labels(times, censored, t_max, None)
    }

    pub fn with_labels(
        times: Vec<f64>,
        censored: Vec<bool>,
        t_max: usize,
        labels: Option<&[String]>,
    ) -> Result<Self, PanelError> {
        if times.len() != censored.len() {
            return Err(PanelError::Shape("times/censored length mismatch".into()));
        }
        let name = |i: usize| {
            labels
                .map(|l| l[i].clone())
                .unwrap_or_else(|| format!("{}", i + 1))
        };
        for (i, (&t, &c)) in times.iter().zip(&censored).enumerate() {
            if !t.is_finite() || t <= 0.0 {
                return Err(PanelError::NonPositiveAdoptionTime {
                    unit: name(i),
                    time: t,
                });
            }
            let beyond = t > t_max as f64;
            if beyond != c {
                return Err(PanelError::CensoringMismatch {
                    unit: name(i),
                    time: t,
                    censored: c,
                    t_max,
                });
            }
        }
        // Ties among uncensored times are ruled out by the hazard model.
        let mut uncensored: Vec<f64> = times
            .iter()
            .zip(&censored)
            .filter(|(_, &c)| !c)
            .map(|(&t, _)| t)
            .collect();
        uncensored.sort_by(f64::total_cmp);
        for w in uncensored.windows(2) {
            if w[0] == w[1] {
                return Err(PanelError::TiedAdoption { time: w[0] });
            }
        }
        Ok(Self { times, censored })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn is_censored(&self, i: usize) -> bool {
        self.censored[i]
    }

    pub fn censored(&self) -> &[bool] {
        &self.censored
    }

    pub fn n_events(&self) -> usize {
        self.censored.iter().filter(|&&c| !c).count()
    }

    /// `(I_1, T_(1))`: index and time of the earliest uncensored adoption.
    pub fn first_adopter(&self) -> Result<(usize, f64), PanelError> {
        self.times
            .iter()
            .zip(&self.censored)
            .enumerate()
            .filter(|(_, (_, &c))| !c)
            .min_by(|a, b| a.1 .0.total_cmp(b.1 .0))
            .map(|(i, (&t, _))| (i, t))
            .ok_or(PanelError::AllCensored)
    }
}

/// Column mapping for the long-format panel CSV.
///
/// The expected header is `unit,time,outcome,x1,..,xd`; covariate columns are
/// taken from the header unless listed explicitly. A covariate marked
/// time-invariant is validated to be constant within each unit.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CsvSchema {
    pub unit_column: Option<String>,
    pub time_column: Option<String>,
    pub outcome_column: Option<String>,
    /// Covariate columns in order; `None` means every column after the first
    /// three in header order.
    pub covariate_columns: Option<Vec<String>>,
    /// Names of covariate columns declared constant within unit.
    pub time_invariant: Vec<String>,
}

/// Stored adoption time for censored rows with an empty time field.
pub fn censored_placeholder(t_max: usize) -> f64 {
    (t_max + 1) as f64
}

/// Load a long-format panel CSV plus an adoption CSV
/// (`unit,adoption_time,censored`).
///
/// Units are indexed in first-appearance order of the panel file; times must
/// form the complete grid `1..=t_max` per unit.
pub fn load_panel(
    panel_path: &Path,
    adoption_path: &Path,
    schema: &CsvSchema,
) -> Result<(Panel, AdoptionData), PanelError> {
    let mut rdr = csv::Reader::from_path(panel_path)?;
    let headers = rdr.headers()?.clone();
    let col =
        |name: &str| -> Result<usize, PanelError> {
            headers.iter().position(|h| h == name).ok_or_else(|| {
                PanelError::Shape(format!("column `{name}` not found in panel header"))
            })
        };
    let unit_col = col(schema.unit_column.as_deref().unwrap_or("unit"))?;
    let time_col = col(schema.time_column.as_deref().unwrap_or("time"))?;
    let outcome_col = col(schema.outcome_column.as_deref().unwrap_or("outcome"))?;
    let cov_names: Vec<String> = match &schema.covariate_columns {
        Some(names) => names.clone(),
        None => headers
            .iter()
            .enumerate()
            .filter(|(idx, _)| ![unit_col, time_col, outcome_col].contains(idx))
            .map(|(_, h)| h.to_string())
            .collect(),
    };
    let cov_cols = cov_names
        .iter()
        .map(|n| col(n))
        .collect::<Result<Vec<_>, _>>()?;

    let parse = |column: &str, value: &str| -> Result<f64, PanelError> {
        value.trim().parse::<f64>().map_err(|_| PanelError::Parse {
            column: column.into(),
            value: value.into(),
        })
    };

    let mut order: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    // (unit, time) -> (outcome, covariates)
    let mut cells: HashMap<(usize, usize), (f64, Vec<f64>)> = HashMap::new();
    let mut t_seen = 0usize;
    for record in rdr.records() {
        let record = record?;
        let unit = record.get(unit_col).unwrap_or("").trim().to_string();
        let t_raw = parse("time", record.get(time_col).unwrap_or(""))?;
        if t_raw.fract() != 0.0 || t_raw < 1.0 {
            return Err(PanelError::Parse {
                column: "time".into(),
                value: format!("{t_raw} (grid times are integers >= 1)"),
            });
        }
        let t = t_raw as usize;
        t_seen = t_seen.max(t);
        let i = *index.entry(unit.clone()).or_insert_with(|| {
            order.push(unit.clone());
            order.len() - 1
        });
        let y = parse("outcome", record.get(outcome_col).unwrap_or(""))?;
        let mut xs = Vec::with_capacity(cov_cols.len());
        for (name, &c) in cov_names.iter().zip(&cov_cols) {
            xs.push(parse(name, record.get(c).unwrap_or(""))?);
        }
        if cells.insert((i, t), (y, xs)).is_some() {
            return Err(PanelError::DuplicateCell { unit, time: t });
        }
    }
    let n = order.len();
    let t_max = t_seen;
    if n == 0 || t_max == 0 {
        return Err(PanelError::Shape("panel file has no data rows".into()));
    }
    if t_max < 2 {
        return Err(PanelError::TooFewPeriods(t_max));
    }
    let mut outcomes = vec![vec![0.0; t_max]; n];
    let mut covariates = vec![vec![Vec::new(); t_max]; n];
    for i in 0..n {
        for t in 1..=t_max {
            match cells.remove(&(i, t)) {
                Some((y, xs)) => {
                    outcomes[i][t - 1] = y;
                    covariates[i][t - 1] = xs;
                }
                None => {
                    return Err(PanelError::MissingCell {
                        unit: order[i].clone(),
                        time: t,
                    })
                }
            }
        }
    }
    // Time-invariance declarations.
    for name in &schema.time_invariant {
        let k = cov_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| PanelError::Shape(format!("unknown covariate `{name}`")))?;
        for i in 0..n {
            let first = covariates[i][0][k];
            if covariates[i].iter().any(|xs| xs[k] != first) {
                return Err(PanelError::NotTimeInvariant {
                    unit: order[i].clone(),
                    column: name.clone(),
                });
            }
        }
    }
    let panel = Panel::new(outcomes, covariates, Some(order.clone()))?;

    // Adoption file: unit,adoption_time,censored.
    let mut rdr = csv::Reader::from_path(adoption_path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let (u_col, t_col, c_col) = match (find("unit"), find("adoption_time"), find("censored")) {
        (Some(u), Some(t), Some(c)) => (u, t, c),
        _ => {
            return Err(PanelError::Shape(
                "adoption header must be unit,adoption_time,censored".into(),
            ))
        }
    };
    let mut times = vec![f64::NAN; n];
    let mut censored = vec![false; n];
    let mut seen = vec![false; n];
    for record in rdr.records() {
        let record = record?;
        let unit = record.get(u_col).unwrap_or("").trim().to_string();
        let i = *index
            .get(&unit)
            .ok_or_else(|| PanelError::UnknownUnit(unit.clone()))?;
        let c_raw = record.get(c_col).unwrap_or("").trim();
        let c = match c_raw {
            "0" => false,
            "1" => true,
            other => {
                return Err(PanelError::Parse {
                    column: "censored".into(),
                    value: other.into(),
                })
            }
        };
        let t_raw = record.get(t_col).unwrap_or("").trim();
        let t = if t_raw.is_empty() {
            if !c {
                return Err(PanelError::Parse {
                    column: "adoption_time".into(),
                    value: "(empty for an uncensored unit)".into(),
                });
            }
            censored_placeholder(t_max)
        } else {
            parse("adoption_time", t_raw)?
        };
        if seen[i] {
            return Err(PanelError::DuplicateCell { unit, time: 0 });
        }
        seen[i] = true;
        times[i] = t;
        censored[i] = c;
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(PanelError::Shape(format!(
            "unit {} missing from the adoption file",
            order[i]
        )));
    }
    let adoption = AdoptionData::with_labels(times, censored, t_max, Some(&order))?;
    Ok((panel, adoption))
}

/// Write a `(Panel, AdoptionData)` pair back to the two-file CSV format
/// accepted by [`load_panel`].
pub fn save_panel(
    panel: &Panel,
    adoption: &AdoptionData,
    panel_path: &Path,
    adoption_path: &Path,
) -> Result<(), PanelError> {
    let mut w = csv::Writer::from_path(panel_path)?;
    let mut header = vec!["unit".to_string(), "time".into(), "outcome".into()];
    for k in 0..panel.dim() {
        header.push(format!("x{}", k + 1));
    }
    w.write_record(&header)?;
    for i in 0..panel.n() {
        for t in 1..=panel.t_max() {
            let mut row = vec![
                panel.unit_label(i),
                t.to_string(),
                format_f64(panel.outcome(i, t)),
            ];
            for &x in panel.covariate(i, t) {
                row.push(format_f64(x));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(adoption_path)?;
    w.write_record(["unit", "adoption_time", "censored"])?;
    for i in 0..panel.n() {
        w.write_record(&[
            panel.unit_label(i),
            format_f64(adoption.time(i)),
            if adoption.is_censored(i) { "1" } else { "0" }.into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn format_f64(v: f64) -> String {
    // Shortest representation that round-trips.
    let mut buf = ryu_like(v);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("nan") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    const PANEL_2X3: &str = "unit,time,outcome,x1\n\
        a,1,0.5,1.0\na,2,0.7,1.0\na,3,0.9,1.0\n\
        b,1,0.1,2.0\nb,2,0.2,2.0\nb,3,0.3,2.0\n";

    #[test]
    fn loads_minimal_complete_grid() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "p.csv", PANEL_2X3);
        let a = write_file(&dir, "a.csv", "unit,adoption_time,censored\na,1.5,0\nb,,1\n");
        let (panel, adoption) = load_panel(&p, &a, &CsvSchema::default()).unwrap();
        assert_eq!(panel.n(), 2);
        assert_eq!(panel.t_max(), 3);
        assert_eq!(panel.dim(), 1);
        assert_eq!(panel.outcome(1, 2), 0.2);
        assert_eq!(adoption.time(0), 1.5);
        assert!(adoption.is_censored(1));
        assert_eq!(adoption.time(1), 4.0); // empty time stored as t_max + 1
    }

    #[test]
    fn missing_cell_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let truncated = "unit,time,outcome,x1\n\
            a,1,0.5,1.0\na,2,0.7,1.0\na,3,0.9,1.0\n\
            b,1,0.1,2.0\nb,2,0.2,2.0\n";
        let p = write_file(&dir, "p.csv", truncated);
        let a = write_file(&dir, "a.csv", "unit,adoption_time,censored\na,1.5,0\nb,,1\n");
        match load_panel(&p, &a, &CsvSchema::default()) {
            Err(PanelError::MissingCell { unit, time }) => {
                assert_eq!(unit, "b");
                assert_eq!(time, 3);
            }
            other => panic!("expected MissingCell, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_cell_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let dup = format!("{PANEL_2X3}b,3,0.4,2.0\n");
        let p = write_file(&dir, "p.csv", &dup);
        let a = write_file(&dir, "a.csv", "unit,adoption_time,censored\na,1.5,0\nb,,1\n");
        assert!(matches!(
            load_panel(&p, &a, &CsvSchema::default()),
            Err(PanelError::DuplicateCell { .. })
        ));
    }

    #[test]
    fn tied_uncensored_adoption_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "p.csv", PANEL_2X3);
        let a = write_file(
            &dir,
            "a.csv",
            "unit,adoption_time,censored\na,1.5,0\nb,1.5,0\n",
        );
        assert!(matches!(
            load_panel(&p, &a, &CsvSchema::default()),
            Err(PanelError::TiedAdoption { .. })
        ));
    }

    #[test]
    fn non_finite_outcome_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let bad = PANEL_2X3.replace("b,2,0.2,2.0", "b,2,NaN,2.0");
        let p = write_file(&dir, "p.csv", &bad);
        let a = write_file(&dir, "a.csv", "unit,adoption_time,censored\na,1.5,0\nb,,1\n");
        assert!(matches!(
            load_panel(&p, &a, &CsvSchema::default()),
            Err(PanelError::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn censoring_consistency_is_validated() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "p.csv", PANEL_2X3);
        // claims censored but time is inside the horizon
        let a = write_file(&dir, "a.csv", "unit,adoption_time,censored\na,1.5,0\nb,2.0,1\n");
        assert!(matches!(
            load_panel(&p, &a, &CsvSchema::default()),
            Err(PanelError::CensoringMismatch { .. })
        ));
    }

    #[test]
    fn covariate_rounding_rules() {
        let outcomes = vec![vec![0.0; 5]; 1];
        let covs = vec![(1..=5).map(|t| vec![t as f64]).collect::<Vec<_>>()];
        let panel = Panel::new(outcomes, covs, None).unwrap();
        assert_eq!(panel.covariate_at(0, 2.3), &[3.0]); // ceiling
        assert_eq!(panel.covariate_at(0, 7.0), &[5.0]); // capped at t_max
        assert_eq!(panel.covariate_at(0, 4.0), &[4.0]); // integer passthrough
    }

    #[test]
    fn first_adopter_rules() {
        let a = AdoptionData::new(vec![3.1, 2.4, 9.9], vec![false; 3], 10).unwrap();
        assert_eq!(a.first_adopter().unwrap(), (1, 2.4));

        let a = AdoptionData::new(vec![3.1, 11.0], vec![false, true], 10).unwrap();
        assert_eq!(a.first_adopter().unwrap(), (0, 3.1));

        let a = AdoptionData::new(vec![11.0, 12.0], vec![true, true], 10).unwrap();
        assert!(matches!(a.first_adopter(), Err(PanelError::AllCensored)));
    }

    #[test]
    fn round_trip_identity() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "p.csv", PANEL_2X3);
        let a = write_file(&dir, "a.csv", "unit,adoption_time,censored\na,1.5,0\nb,,1\n");
        let (panel, adoption) = load_panel(&p, &a, &CsvSchema::default()).unwrap();
        let p2 = dir.path().join("p2.csv");
        let a2 = dir.path().join("a2.csv");
        save_panel(&panel, &adoption, &p2, &a2).unwrap();
        let (panel2, adoption2) = load_panel(&p2, &a2, &CsvSchema::default()).unwrap();
        assert_eq!(panel.n(), panel2.n());
        assert_eq!(panel.t_max(), panel2.t_max());
        for i in 0..panel.n() {
            for t in 1..=panel.t_max() {
                assert_eq!(panel.outcome(i, t), panel2.outcome(i, t));
                assert_eq!(panel.covariate(i, t), panel2.covariate(i, t));
            }
            assert_eq!(adoption.time(i), adoption2.time(i));
            assert_eq!(adoption.is_censored(i), adoption2.is_censored(i));
        }
    }
}
