//! Monte Carlo experiment harness: seeded replications of the selection
//! procedure on catalog models, with decision-agreement tables and MSPE
//! ratio curves over the replications.
//!
//! A replication simulates `n` points, treats the first `T = n − m` as the
//! training range and the final `m` as the held-out test segment, runs the
//! selection engine for the requested horizons, and records the "seven
//! pieces": the three winners `(p̂_s, p̂_ls, N̂)` and the four validation/test
//! MSPEs. Decisions for any margin `δ` are recomputed from the stored MSPEs,
//! so one run of replications serves a whole `δ` grid.
//!
//! Reproducibility: replication `r` draws from a stream seeded by
//! `mix(base_seed, r)` — no shared RNG state — so records are identical
//! byte-for-byte regardless of worker count or scheduling, and any single
//! replication can be re-run in isolation.

use crate::catalog::model_by_label;
use crate::error::{Error, Result};
use crate::select::{ratio_and_choice, rows_for_harness, SelectionConfig};
use crate::series::format_value;
use crate::tvar::{mix_seed, simulate_tvar, TvarSpec};
use serde::Serialize;

/// The default window grid for a combined sample of `n` points:
/// `N_min = ⌊(n/2)^0.8⌋`, `N_max = ⌊n^0.8⌋`, ascending with step
/// `⌈(N_max − N_min)/25⌉` (at most 26 and, for `n ≥ 27` or so, exactly 25
/// or fewer elements).
pub fn default_n_grid(n: usize) -> Result<Vec<usize>> {
    if n < 16 {
        return Err(Error::InvalidConfig(format!(
            "need n >= 16 for the default window grid, got {n}"
        )));
    }
    let n_min = (n as f64 / 2.0).powf(0.8).floor() as usize;
    let n_max = (n as f64).powf(0.8).floor() as usize;
    let step = ((n_max - n_min) as f64 / 25.0).ceil().max(1.0) as usize;
    Ok((n_min..=n_max).step_by(step).collect())
}

/// A Monte Carlo experiment: which model, how large, how many replications,
/// and the reporting grids. `None` overrides fall back to the standard
/// protocol (`m = ⌊n^0.85/4⌋`, `p_max = 7`, default window grid).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentPlan {
    pub model: String,
    /// Combined sample size (training plus test segment).
    pub n: usize,
    pub replications: usize,
    pub base_seed: u64,
    /// Margins for the decision tables (decisions are recomputed from the
    /// recorded MSPEs, so this grid costs nothing extra).
    pub deltas: Vec<f64>,
    /// Horizons to evaluate, ascending.
    pub horizons: Vec<usize>,
    pub m: Option<usize>,
    pub p_max: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
}

impl ExperimentPlan {
    pub fn new(model: impl Into<String>, n: usize, replications: usize, base_seed: u64) -> Self {
        ExperimentPlan {
            model: model.into(),
            n,
            replications,
            base_seed,
            deltas: vec![0.0, 0.01, 0.05, 0.1, 0.15, 0.2, 0.4, 0.6],
            horizons: (1..=10).collect(),
            m: None,
            p_max: None,
            n_grid: None,
        }
    }

    /// Resolves the plan into a model and a validated selection
    /// configuration.
    pub fn resolve(&self) -> Result<(TvarSpec, SelectionConfig)> {
        let spec = model_by_label(&self.model)?;
        if self.horizons.is_empty() || !self.horizons.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "horizons must be nonempty and strictly increasing".into(),
            ));
        }
        let m = self.m.unwrap_or_else(|| crate::select::standard_m(self.n));
        if m == 0 || self.n <= m {
            return Err(Error::InvalidConfig(format!(
                "sample size {} leaves no room for a test segment of length {m}",
                self.n
            )));
        }
        let n_grid = match &self.n_grid {
            Some(g) => g.clone(),
            None => default_n_grid(self.n)?,
        };
        let h_max = *self.horizons.last().unwrap();
        let config = SelectionConfig::new(
            self.n - m,
            m,
            self.p_max.unwrap_or(7),
            n_grid,
            h_max,
            0.0,
        )?;
        Ok((spec, config))
    }
}

/// The per-horizon record of one replication: the three winners and the
/// validation/test MSPEs of both classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecordRow {
    pub h: usize,
    pub p_s: usize,
    pub p_ls: usize,
    pub n_ls: usize,
    pub mspe2_s: f64,
    pub mspe2_ls: f64,
    pub mspe3_s: f64,
    pub mspe3_ls: f64,
}

/// One replication: its seed and one [`RecordRow`] per horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub seed: u64,
    pub rows: Vec<RecordRow>,
}

/// A replication that could not be completed (recorded, never fatal).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub seed: u64,
    pub kind: String,
    pub message: String,
}

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub plan: ExperimentPlan,
    pub records: Vec<ReplicationRecord>,
    pub failures: Vec<ReplicationFailure>,
}

#[cfg(feature = "parallel")]
fn map_replications<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_replications<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Runs the experiment: simulate, select, record — one independent seeded
/// stream per replication.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome> {
    let (spec, config) = plan.resolve()?;
    let results = map_replications(plan.replications, |r| {
        let seed = mix_seed(plan.base_seed, r as u64);
        let run = || -> Result<ReplicationRecord> {
            let x = simulate_tvar(&spec, plan.n, seed)?;
            let rows = rows_for_harness(&x, &config, &plan.horizons)?;
            let rows = rows
                .into_iter()
                .map(|row| {
                    let missing = || Error::InvalidConfig(
                        "internal: test metrics absent on a full simulated sample".into(),
                    );
                    Ok(RecordRow {
                        h: row.h,
                        p_s: row.p_s,
                        p_ls: row.p_ls,
                        n_ls: row.n_ls,
                        mspe2_s: row.mspe2_s,
                        mspe2_ls: row.mspe2_ls,
                        mspe3_s: row.mspe3_s.ok_or_else(missing)?,
                        mspe3_ls: row.mspe3_ls.ok_or_else(missing)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ReplicationRecord { seed, rows })
        };
        (r, seed, run())
    });

    let mut records = Vec::with_capacity(plan.replications);
    let mut failures = Vec::new();
    for (r, seed, result) in results {
        match result {
            Ok(record) => records.push(record),
            Err(e) => failures.push(ReplicationFailure {
                replication: r,
                seed,
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
    Ok(ExperimentOutcome {
        plan: plan.clone(),
        records,
        failures,
    })
}

/// Agreement between the validation and test decisions at margin `delta`,
/// plus the full 2×2 joint breakdown (proportions over all records).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionSummaryRow {
    pub delta: f64,
    pub h: usize,
    /// Proportion of replications where validation and test decide alike.
    pub same: f64,
    /// Windowed class chosen on both segments.
    pub ls_ls: f64,
    /// Windowed on validation, stationary on test.
    pub ls_s: f64,
    /// Stationary on validation, windowed on test.
    pub s_ls: f64,
    /// Stationary on both.
    pub s_s: f64,
}

fn record_row<'a>(record: &'a ReplicationRecord, h: usize) -> Result<&'a RecordRow> {
    record
        .rows
        .iter()
        .find(|row| row.h == h)
        .ok_or_else(|| Error::InvalidConfig(format!("records do not contain horizon {h}")))
}

/// Builds the decision-agreement table over a `δ` grid and a horizon set.
pub fn same_decision_table(
    records: &[ReplicationRecord],
    deltas: &[f64],
    horizons: &[usize],
) -> Result<Vec<DecisionSummaryRow>> {
    if records.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot summarise an empty record set".into(),
        ));
    }
    let mut out = Vec::with_capacity(deltas.len() * horizons.len());
    for &delta in deltas {
        for &h in horizons {
            let mut cells = [0usize; 4]; // [ls_ls, ls_s, s_ls, s_s]
            for record in records {
                let row = record_row(record, h)?;
                let (_, ls2) = ratio_and_choice(row.mspe2_s, row.mspe2_ls, delta);
                let (_, ls3) = ratio_and_choice(row.mspe3_s, row.mspe3_ls, delta);
                let cell = match (ls2, ls3) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                cells[cell] += 1;
            }
            let total = records.len() as f64;
            let p = |c: usize| cells[c] as f64 / total;
            out.push(DecisionSummaryRow {
                delta,
                h,
                same: p(0) + p(3),
                ls_ls: p(0),
                ls_s: p(1),
                s_ls: p(2),
                s_s: p(3),
            });
        }
    }
    Ok(out)
}

/// Ratio of mean MSPEs (stationary over windowed) per horizon, on the
/// validation and test segments — the replication estimate of the population
/// ratio curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioCurveRow {
    pub h: usize,
    pub ratio2: f64,
    pub ratio3: f64,
}

/// Per-horizon ratios of replication-mean MSPEs.
pub fn ratio_curves(records: &[ReplicationRecord]) -> Result<Vec<RatioCurveRow>> {
    if records.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot summarise an empty record set".into(),
        ));
    }
    let horizons: Vec<usize> = records[0].rows.iter().map(|r| r.h).collect();
    let mut out = Vec::with_capacity(horizons.len());
    for &h in &horizons {
        let mut sums = [0.0f64; 4];
        for record in records {
            let row = record_row(record, h)?;
            sums[0] += row.mspe2_s;
            sums[1] += row.mspe2_ls;
            sums[2] += row.mspe3_s;
            sums[3] += row.mspe3_ls;
        }
        out.push(RatioCurveRow {
            h,
            ratio2: sums[0] / sums[1],
            ratio3: sums[2] / sums[3],
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV forms
// ---------------------------------------------------------------------------

const RECORDS_HEADER: &str =
    "replication,seed,h,p_s,p_ls,n_ls,mspe2_s,mspe2_ls,mspe3_s,mspe3_ls";

/// One CSV row per replication × horizon.
pub fn records_to_csv(records: &[ReplicationRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for (r, record) in records.iter().enumerate() {
        for row in &record.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r,
                record.seed,
                row.h,
                row.p_s,
                row.p_ls,
                row.n_ls,
                format_value(row.mspe2_s),
                format_value(row.mspe2_ls),
                format_value(row.mspe3_s),
                format_value(row.mspe3_ls),
            ));
        }
    }
    out
}

/// Parses the output of [`records_to_csv`] (rows grouped by the replication
/// column).
pub fn records_from_csv(text: &str) -> Result<Vec<ReplicationRecord>> {
    let mut records: Vec<(usize, ReplicationRecord)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("replication,")) {
            continue;
        }
        let bad = || Error::Parse {
            line: i + 1,
            text: line.to_string(),
        };
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 10 {
            return Err(bad());
        }
        let r: usize = parts[0].parse().map_err(|_| bad())?;
        let seed: u64 = parts[1].parse().map_err(|_| bad())?;
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let row = RecordRow {
            h: int(parts[2])?,
            p_s: int(parts[3])?,
            p_ls: int(parts[4])?,
            n_ls: int(parts[5])?,
            mspe2_s: num(parts[6])?,
            mspe2_ls: num(parts[7])?,
            mspe3_s: num(parts[8])?,
            mspe3_ls: num(parts[9])?,
        };
        match records.last_mut() {
            Some((last_r, record)) if *last_r == r => record.rows.push(row),
            _ => records.push((r, ReplicationRecord { seed, rows: vec![row] })),
        }
    }
    Ok(records.into_iter().map(|(_, rec)| rec).collect())
}

/// CSV form of the decision-agreement table.
pub fn decision_table_to_csv(rows: &[DecisionSummaryRow]) -> String {
    let mut out = String::from("delta,h,same,ls_ls,ls_s,s_ls,s_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_value(r.delta),
            r.h,
            format_value(r.same),
            format_value(r.ls_ls),
            format_value(r.ls_s),
            format_value(r.s_ls),
            format_value(r.s_s),
        ));
    }
    out
}

/// CSV form of the ratio curves.
pub fn ratio_curves_to_csv(rows: &[RatioCurveRow]) -> String {
    let mut out = String::from("h,ratio2,ratio3\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.h,
            format_value(r.ratio2),
            format_value(r.ratio3),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_matches_the_documented_arithmetic() {
        let g = default_n_grid(10_000).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 910);
        assert_eq!(g[1] - g[0], 27);
        assert_eq!(*g.last().unwrap(), 1558);

        let g = default_n_grid(100).unwrap();
        assert_eq!(g[0], 22);
        assert_eq!(*g.last().unwrap(), 39);

        assert!(default_n_grid(15).is_err());
    }

    #[test]
    fn default_grid_is_increasing_and_bounded() {
        for n in [16, 37, 100, 513, 2000, 4096, 9999] {
            let n_min = (n as f64 / 2.0).powf(0.8).floor() as usize;
            let n_max = (n as f64).powf(0.8).floor() as usize;
            let g = default_n_grid(n).unwrap();
            assert!(g.windows(2).all(|w| w[0] < w[1]), "n={n}");
            assert!(*g.first().unwrap() == n_min);
            assert!(*g.last().unwrap() <= n_max);
            assert!(g.len() <= 26);
        }
    }

    #[test]
    fn standard_segment_lengths_for_the_protocol_sizes() {
        let expected = [
            (100, 12),
            (250, 27),
            (500, 49),
            (1000, 88),
            (2000, 159),
            (4000, 288),
            (6000, 406),
            (8000, 519),
            (10_000, 627),
        ];
        for (n, m) in expected {
            assert_eq!(crate::select::standard_m(n), m, "n={n}");
        }
    }

    #[test]
    fn zero_replications_produce_an_empty_outcome() {
        let plan = ExperimentPlan::new("periodic1", 500, 0, 1);
        let out = run_experiment(&plan).unwrap();
        assert!(out.records.is_empty());
        assert!(out.failures.is_empty());
        assert!(same_decision_table(&out.records, &[0.0], &[1]).is_err());
    }

    #[test]
    fn single_replication_record_is_well_formed() {
        let mut plan = ExperimentPlan::new("indepNonHetero", 1000, 1, 42);
        plan.horizons = vec![1, 2, 3];
        let out = run_experiment(&plan).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.failures.is_empty());
        let record = &out.records[0];
        assert_eq!(record.rows.len(), 3);
        for row in &record.rows {
            // Unit-variance independent noise: every forecaster's MSPE
            // concentrates near 1 at these segment lengths.
            for v in [row.mspe2_s, row.mspe2_ls, row.mspe3_s, row.mspe3_ls] {
                assert!((0.5..=2.0).contains(&v), "h={}: MSPE {v}", row.h);
            }
            assert!(row.n_ls == 0 || row.n_ls >= row.p_ls);
        }
    }

    #[test]
    fn identical_plans_give_identical_records() {
        let mut plan = ExperimentPlan::new("periodic1", 500, 3, 7);
        plan.horizons = vec![1, 2];
        let a = run_experiment(&plan).unwrap();
        let b = run_experiment(&plan).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(records_to_csv(&a.records), records_to_csv(&b.records));
    }

    fn synthetic_record(seed: u64, s2: f64, ls2: f64, s3: f64, ls3: f64) -> ReplicationRecord {
        ReplicationRecord {
            seed,
            rows: vec![RecordRow {
                h: 1,
                p_s: 1,
                p_ls: 1,
                n_ls: 30,
                mspe2_s: s2,
                mspe2_ls: ls2,
                mspe3_s: s3,
                mspe3_ls: ls3,
            }],
        }
    }

    #[test]
    fn identical_records_agree_with_probability_one() {
        let records = vec![synthetic_record(1, 1.2, 1.0, 1.3, 1.0); 5];
        let table = same_decision_table(&records, &[0.0, 0.1, 0.5], &[1]).unwrap();
        for row in &table {
            assert_eq!(row.same, 1.0);
            let total = row.ls_ls + row.ls_s + row.s_ls + row.s_s;
            assert!((total - 1.0).abs() < 1e-12);
        }
        // delta = 0 / 0.1: ratio 1.2 >= 1+delta on both segments -> ls_ls;
        // delta = 0.5: neither -> s_s.
        assert_eq!(table[0].ls_ls, 1.0);
        assert_eq!(table[1].ls_ls, 1.0);
        assert_eq!(table[2].s_s, 1.0);
    }

    #[test]
    fn windowed_share_is_monotone_in_delta() {
        let records: Vec<ReplicationRecord> = (0..40)
            .map(|i| {
                let bump = 1.0 + (i as f64) * 0.01;
                synthetic_record(i as u64, bump, 1.0, 1.0, bump)
            })
            .collect();
        let deltas = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5];
        let table = same_decision_table(&records, &deltas, &[1]).unwrap();
        let ls2: Vec<f64> = table.iter().map(|r| r.ls_ls + r.ls_s).collect();
        for pair in ls2.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "ls share grew with delta: {ls2:?}");
        }
    }

    #[test]
    fn ratio_curves_of_a_single_record_are_its_ratios() {
        let records = vec![synthetic_record(1, 1.2, 1.0, 0.9, 1.5)];
        let rows = ratio_curves(&records).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].ratio2 - 1.2).abs() < 1e-15);
        assert!((rows[0].ratio3 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn records_csv_round_trips_exactly() {
        let mut plan = ExperimentPlan::new("increasing2", 500, 2, 11);
        plan.horizons = vec![1, 3];
        let out = run_experiment(&plan).unwrap();
        let csv = records_to_csv(&out.records);
        let parsed = records_from_csv(&csv).unwrap();
        assert_eq!(parsed, out.records);
        assert_eq!(records_to_csv(&parsed), csv);
    }
}
