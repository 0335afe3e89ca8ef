//! Cost profile over a grid of sample sizes and maximal dimensions.
//!
//! Memory is not measured; it is approximated by the simplex count times
//! the in-memory size of one simplex record.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use paretotopo::pointset::pairwise_distances;
use paretotopo::problems::{sample_pareto, ProblemSpec};
use paretotopo::rips::{count_rips_simplices, projected_simplex_count, Simplex};
use paretotopo::simplicity::{analyze, AnalysisConfig};
use paretotopo::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: String,
    pub n: usize,
    pub maxdim: usize,
    pub status: String,
    pub simplices: Option<u64>,
    pub memory_bytes: Option<u64>,
    pub sample_s: Option<f64>,
    pub persistence_s: Option<f64>,
    pub band_s: Option<f64>,
    pub s1_s: Option<f64>,
    pub s2_s: Option<f64>,
    pub total_s: Option<f64>,
    pub note: String,
}

impl BenchRow {
    pub fn is_dnf(&self) -> bool {
        self.status == "DNF"
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub spec: ProblemSpec,
    pub n_list: Vec<usize>,
    pub maxdim_list: Vec<usize>,
    pub seed: u64,
    pub replicates: usize,
    pub delta_max: Option<f64>,
    pub simplex_cap: u64,
}

impl BenchOptions {
    pub fn new(spec: ProblemSpec, n_list: Vec<usize>, maxdim_list: Vec<usize>) -> Self {
        Self {
            delta_max: Some(spec.protocol_delta_max()),
            spec,
            n_list,
            maxdim_list,
            seed: 0,
            replicates: 100,
            simplex_cap: paretotopo::rips::default_simplex_cap(),
        }
    }
}

/// Grid rows in `(n, maxdim)` order. Points are sampled once per `n`, so
/// rows that share `n` analyse the same cloud.
pub fn run_bench(opts: &BenchOptions) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &n in &opts.n_list {
        let clock = Instant::now();
        let sampled = sample_pareto(&opts.spec, n, opts.seed);
        let sample_s = clock.elapsed().as_secs_f64();
        for &maxdim in &opts.maxdim_list {
            let mut row = BenchRow {
                problem: opts.spec.name().to_string(),
                n,
                maxdim,
                status: "ok".into(),
                simplices: None,
                memory_bytes: None,
                sample_s: Some(sample_s),
                persistence_s: None,
                band_s: None,
                s1_s: None,
                s2_s: None,
                total_s: None,
                note: String::new(),
            };
            let pc = match &sampled {
                Ok(pc) => pc,
                Err(e) => {
                    row.status = "error".into();
                    row.note = e.to_string();
                    rows.push(row);
                    continue;
                }
            };
            let dm = pairwise_distances(pc);
            let delta_max = opts.delta_max.unwrap_or_else(|| dm.max_distance());
            let projected = projected_simplex_count(&dm, delta_max, maxdim);
            if projected > opts.simplex_cap as u128 {
                row.status = "DNF".into();
                row.note = format!("guard: projected {projected} simplices > cap {}", opts.simplex_cap);
                rows.push(row);
                continue;
            }
            let simplices: u64 = count_rips_simplices(&dm, delta_max, maxdim).iter().sum();
            row.simplices = Some(simplices);
            row.memory_bytes = Some(simplices * std::mem::size_of::<Simplex>() as u64);
            let config = AnalysisConfig {
                maxdim,
                seed: opts.seed,
                replicates: opts.replicates,
                delta_max: opts.delta_max,
                simplex_cap: opts.simplex_cap,
                timings: true,
                ..Default::default()
            };
            let clock = Instant::now();
            match analyze(pc, &config) {
                Ok(report) => {
                    row.total_s = Some(clock.elapsed().as_secs_f64() + sample_s);
                    if let Some(t) = report.full().and_then(|s| s.timings.as_ref()) {
                        row.persistence_s = Some(t.persistence_s);
                        row.band_s = Some(t.band_s);
                        row.s1_s = Some(t.s1_s);
                        row.s2_s = Some(t.s2_s);
                    }
                }
                Err(e @ Error::SimplexCapExceeded { .. }) => {
                    row.status = "DNF".into();
                    row.note = e.to_string();
                }
                Err(e) => {
                    row.status = "error".into();
                    row.note = e.to_string();
                }
            }
            rows.push(row);
        }
    }
    rows
}
