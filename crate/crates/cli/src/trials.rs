use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use paretotopo::problems::{sample_pareto, ProblemSpec};
use paretotopo::simplicity::{analyze, AnalysisConfig};

use crate::report::{Report, RunConfig};

/// One line of the per-trial table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub problem: String,
    pub trial: usize,
    pub seed: u64,
    pub n_points: Option<usize>,
    pub delta: Option<f64>,
    pub max_birth: Option<f64>,
    pub min_death: Option<f64>,
    pub consistent: Option<bool>,
    pub betti: Option<String>,
    #[serde(rename = "S1_unsatisfied")]
    pub s1_unsatisfied: Option<bool>,
    #[serde(rename = "S2_unsatisfied")]
    pub s2_unsatisfied: Option<bool>,
    pub s2_witnesses: Option<usize>,
    pub status: String,
}

impl TrialRow {
    /// Row for the full objective set of a finished report.
    pub fn from_report(problem: &str, trial: usize, seed: u64, report: &Report) -> Self {
        let mut row = Self::failed(problem, trial, seed, "no subset analysed".into());
        let Some(full) = report.full() else { return row };
        row.n_points = Some(full.n_points);
        if let Some(reason) = &full.skipped {
            row.status = format!("skipped: {reason}");
            return row;
        }
        row.status = "ok".into();
        row.delta = full.delta;
        if let Some(e) = &full.estimate {
            row.max_birth = Some(e.max_birth);
            row.min_death = Some(e.min_death);
            row.consistent = Some(e.consistent);
        }
        if let Some(s1) = &full.s1 {
            row.betti = Some(s1.betti.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(";"));
            row.s1_unsatisfied = Some(s1.violated);
        }
        if let Some(s2) = &full.s2 {
            row.s2_unsatisfied = Some(s2.violated);
            row.s2_witnesses = Some(s2.witnesses.len());
        }
        row
    }

    fn failed(problem: &str, trial: usize, seed: u64, status: String) -> Self {
        Self {
            problem: problem.to_string(),
            trial,
            seed,
            n_points: None,
            delta: None,
            max_birth: None,
            min_death: None,
            consistent: None,
            betti: None,
            s1_unsatisfied: None,
            s2_unsatisfied: None,
            s2_witnesses: None,
            status,
        }
    }
}

/// Aggregate over trials: average diameter and violation counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub problem: String,
    pub trials: usize,
    pub completed: usize,
    #[serde(rename = "Average delta")]
    pub average_delta: Option<f64>,
    #[serde(rename = "S1_unsatisfied")]
    pub s1_unsatisfied: usize,
    #[serde(rename = "S2_unsatisfied")]
    pub s2_unsatisfied: usize,
}

impl TrialSummary {
    pub fn from_rows(problem: &str, rows: &[TrialRow]) -> Self {
        let deltas: Vec<f64> = rows.iter().filter_map(|r| r.delta).collect();
        Self {
            problem: problem.to_string(),
            trials: rows.len(),
            completed: rows.iter().filter(|r| r.status == "ok").count(),
            average_delta: (!deltas.is_empty()).then(|| deltas.iter().sum::<f64>() / deltas.len() as f64),
            s1_unsatisfied: rows.iter().filter(|r| r.s1_unsatisfied == Some(true)).count(),
            s2_unsatisfied: rows.iter().filter(|r| r.s2_unsatisfied == Some(true)).count(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialsOptions {
    pub spec: ProblemSpec,
    pub trials: usize,
    pub n_points: usize,
    pub base_seed: u64,
    /// Template; the seed is replaced per trial.
    pub analysis: AnalysisConfig,
}

impl TrialsOptions {
    /// The benchmark protocol: N = 300, filtration capped at the problem's
    /// protocol diameter, defaults elsewhere.
    pub fn protocol(spec: ProblemSpec, trials: usize, base_seed: u64) -> Self {
        let analysis = AnalysisConfig {
            delta_max: Some(spec.protocol_delta_max()),
            ..Default::default()
        };
        Self {
            spec,
            trials,
            n_points: 300,
            base_seed,
            analysis,
        }
    }

    pub fn seed_of(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

pub struct TrialOutcome {
    pub row: TrialRow,
    pub report: Option<Report>,
}

/// Runs one trial: sample with the trial seed, then analyse with the same seed.
pub fn run_trial(opts: &TrialsOptions, trial: usize) -> TrialOutcome {
    let seed = opts.seed_of(trial);
    let name = opts.spec.name();
    let config = AnalysisConfig {
        seed,
        ..opts.analysis.clone()
    };
    let result = sample_pareto(&opts.spec, opts.n_points, seed).and_then(|pc| analyze(&pc, &config));
    match result {
        Ok(analysis) => {
            let run = RunConfig {
                command: "trials".into(),
                problem: Some(name.to_string()),
                x_csv: None,
                f_csv: None,
                n_points: Some(opts.n_points),
                oversample: Some(opts.spec.oversampling),
                trial: Some(trial),
                outputs: Vec::new(),
                analysis: config,
            };
            let report = Report::new(run, analysis);
            TrialOutcome {
                row: TrialRow::from_report(name, trial, seed, &report),
                report: Some(report),
            }
        }
        Err(e) => TrialOutcome {
            row: TrialRow::failed(name, trial, seed, format!("error: {e}")),
            report: None,
        },
    }
}

/// All trials, in parallel, reduced in trial order.
pub fn run_trials(opts: &TrialsOptions) -> Vec<TrialOutcome> {
    (0..opts.trials).into_par_iter().map(|t| run_trial(opts, t)).collect()
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(delta: Option<f64>, s1: Option<bool>, s2: Option<bool>) -> TrialRow {
        let mut r = TrialRow::failed("MED", 0, 0, "ok".into());
        r.delta = delta;
        r.s1_unsatisfied = s1;
        r.s2_unsatisfied = s2;
        r
    }

    #[test]
    fn summary_counts() {
        let rows = vec![
            row(Some(0.4), Some(true), Some(false)),
            row(Some(0.6), Some(false), Some(true)),
            TrialRow::failed("MED", 2, 2, "error: boom".into()),
        ];
        let s = TrialSummary::from_rows("MED", &rows);
        assert_eq!((s.trials, s.completed, s.s1_unsatisfied, s.s2_unsatisfied), (3, 2, 1, 1));
        assert!((s.average_delta.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(TrialSummary::from_rows("MED", &[]).average_delta, None);
    }

    #[test]
    fn table_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        write_rows(&path, &[TrialSummary::from_rows("MED", &[row(Some(0.5), Some(false), Some(false))])]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("problem,trials,completed,Average delta,S1_unsatisfied,S2_unsatisfied\n"));
        assert!(text.contains("MED,1,1,0.5,0,0"));
    }
}
