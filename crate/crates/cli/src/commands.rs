use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use paretotopo::diagram::BandMethod;
use paretotopo::lp::DEFAULT_EPS;
use paretotopo::pointset::{load_point_cloud, write_point_cloud};
use paretotopo::problems::{sample_pareto, ProblemKind, ProblemSpec, DEFAULT_OVERSAMPLING};
use paretotopo::rips::{DEFAULT_SIMPLEX_CAP, SIMPLEX_CAP_ENV};
use paretotopo::simplicity::{analyze, AnalysisConfig, PairDim, S2Options, SubsetSelection};
use paretotopo::Error;

use crate::bench::{run_bench, BenchOptions};
use crate::report::{write_text, Report, RunConfig};
use crate::svg::render_diagram;
use crate::trials::{run_trials, write_rows, TrialRow, TrialSummary, TrialsOptions};

#[derive(Debug, Parser)]
#[command(name = "paretotopo", version, about = "Topological simplicity test for multi-objective problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a benchmark Pareto set into `<prefix>_x.csv` and `<prefix>_f.csv`.
    Sample(SampleArgs),
    /// Run the S1/S2 tests on a decision (and objective) CSV pair.
    Analyze(AnalyzeArgs),
    /// Repeat sample + analyze and aggregate the verdicts.
    Trials(TrialsArgs),
    /// Time the pipeline over a grid of sample sizes and dimensions.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub problem: ProblemKind,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLING)]
    pub oversample: usize,
    /// Output prefix; defaults to the problem name.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates for the confidence band.
    #[arg(long, default_value_t = 100)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 2)]
    pub maxdim: usize,
    /// Test at this diameter instead of the estimate.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Filtration cap (default: largest pairwise distance; `trials` uses 1.0).
    #[arg(long)]
    pub delta_max: Option<f64>,
    /// Simplex dimension for S2 pairs, or `all`.
    #[arg(long, default_value = "1")]
    pub pair_dim: PairDim,
    /// `full`, `all`, or a maximal subset size.
    #[arg(long, default_value = "full")]
    pub subsets: SubsetSelection,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = BandMethod::Hausdorff)]
    pub band: BandMethod,
    /// Strictness margin for the S2 LP.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Stop S2 after this many witnesses (0 = check every pair).
    #[arg(long, default_value_t = 10)]
    pub max_witnesses: usize,
    #[arg(long, env = SIMPLEX_CAP_ENV, default_value_t = DEFAULT_SIMPLEX_CAP)]
    pub simplex_cap: u64,
    /// Record per-phase wall time in reports (they stop being reproducible).
    #[arg(long)]
    pub timings: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

impl AnalysisArgs {
    pub fn config(&self, run_s2: bool) -> AnalysisConfig {
        AnalysisConfig {
            maxdim: self.maxdim,
            alpha: self.alpha,
            replicates: self.bootstrap,
            seed: self.seed,
            band_method: self.band,
            delta: self.delta,
            delta_max: self.delta_max,
            s2: S2Options {
                pair_dim: self.pair_dim,
                eps: self.eps,
                max_witnesses: self.max_witnesses,
            },
            run_s2,
            subsets: self.subsets,
            simplex_cap: self.simplex_cap,
            timings: self.timings,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Decision-space CSV.
    #[arg(long)]
    pub x: PathBuf,
    /// Objective-space CSV.
    #[arg(long)]
    pub f: Option<PathBuf>,
    /// Require the S2 test (fails without objectives).
    #[arg(long, conflicts_with = "no_s2")]
    pub s2: bool,
    /// Skip the S2 test.
    #[arg(long)]
    pub no_s2: bool,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Persistence diagram of the full problem as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Persistence diagram of the full problem as CSV.
    #[arg(long)]
    pub diagram_csv: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct TrialsArgs {
    #[arg(long)]
    pub problem: ProblemKind,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLING)]
    pub oversample: usize,
    /// Directory for trials.csv, table.csv and (with --reports) per-trial JSON.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub reports: bool,
    /// Per-trial SVG diagrams in the output directory.
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub problem: ProblemKind,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,300")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub maxdim: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub bootstrap: usize,
    /// Filtration cap (default: the problem's protocol value).
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long, env = SIMPLEX_CAP_ENV, default_value_t = DEFAULT_SIMPLEX_CAP)]
    pub simplex_cap: u64,
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

pub fn run(cli: Cli) -> Result<()> {
    let jobs = match &cli.command {
        Command::Sample(_) => 0,
        Command::Analyze(a) => a.analysis.jobs,
        Command::Trials(a) => a.analysis.jobs,
        Command::Bench(a) => a.jobs,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| match cli.command {
        Command::Sample(a) => cmd_sample(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Trials(a) => cmd_trials(&a),
        Command::Bench(a) => cmd_bench(&a),
    })
}

/// Stable identifier for the JSON error object.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Csv { .. } => "csv",
        Error::Io { .. } => "io",
        Error::RowCountMismatch { .. } => "row_count_mismatch",
        Error::InvalidCloud(_) => "invalid_cloud",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::SimplexCapExceeded { .. } => "simplex_cap_exceeded",
        Error::OracleTooLarge { .. } => "oracle_too_large",
        Error::InsufficientSample { .. } => "insufficient_sample",
        Error::MissingObjectives => "missing_objectives",
        Error::Lp(_) => "lp",
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn sample_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let base = prefix.as_os_str().to_string_lossy();
    (PathBuf::from(format!("{base}_x.csv")), PathBuf::from(format!("{base}_f.csv")))
}

pub fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let spec = ProblemSpec::new(a.problem).with_oversampling(a.oversample);
    let pc = sample_pareto(&spec, a.n, a.seed)?;
    let prefix = a.out.clone().unwrap_or_else(|| PathBuf::from(spec.name().to_ascii_lowercase()));
    let (x, f) = sample_paths(&prefix);
    for p in [&x, &f] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    write_point_cloud(&pc, &x, Some(&f))?;
    let summary = serde_json::json!({ "problem": spec.name(), "n_points": pc.len(), "x_csv": display(&x), "f_csv": display(&f) });
    println!("{summary}");
    Ok(())
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    if a.s2 && a.f.is_none() {
        return Err(Error::MissingObjectives.into());
    }
    let pc = load_point_cloud(&a.x, a.f.as_deref())?;
    let config = a.analysis.config(a.f.is_some() && !a.no_s2);
    let analysis = analyze(&pc, &config)?;
    let outputs = [&a.out, &a.svg, &a.diagram_csv].into_iter().flatten().map(|p| display(p)).collect();
    let run = RunConfig {
        command: "analyze".into(),
        problem: None,
        x_csv: Some(display(&a.x)),
        f_csv: a.f.as_deref().map(display),
        n_points: Some(pc.len()),
        oversample: None,
        trial: None,
        outputs,
        analysis: config,
    };
    let report = Report::new(run, analysis);
    if let Some(full) = report.full() {
        if let Some(diagram) = &full.diagram {
            if let Some(path) = &a.svg {
                let c = full.band.as_ref().map(|b| b.c);
                write_text(path, &render_diagram(diagram, c, &format!("{} (N = {})", display(&a.x), full.n_points)))?;
            }
            if let Some(path) = &a.diagram_csv {
                diagram.write_csv(path)?;
            }
        } else if a.svg.is_some() || a.diagram_csv.is_some() {
            bail!("no diagram: {}", full.skipped.as_deref().unwrap_or("analysis skipped"));
        }
    }
    match &a.out {
        Some(path) => report.write(path)?,
        None => std::io::stdout().write_all(report.to_json()?.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_trials(a: &TrialsArgs) -> Result<()> {
    let spec = ProblemSpec::new(a.problem).with_oversampling(a.oversample);
    let mut analysis = a.analysis.config(true);
    analysis.delta_max = analysis.delta_max.or(Some(spec.protocol_delta_max()));
    let opts = TrialsOptions {
        spec: spec.clone(),
        trials: a.trials,
        n_points: a.n,
        base_seed: a.analysis.seed,
        analysis,
    };
    let outcomes = run_trials(&opts);
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for o in &outcomes {
        let Some(report) = &o.report else { continue };
        let stem = format!("trial_{:03}", o.row.trial);
        if a.reports {
            report.write(&a.out_dir.join(format!("{stem}.json")))?;
        }
        if a.svg {
            if let Some(full) = report.full() {
                if let Some(d) = &full.diagram {
                    let title = format!("{} trial {} (seed {})", spec.name(), o.row.trial, o.row.seed);
                    let svg = render_diagram(d, full.band.as_ref().map(|b| b.c), &title);
                    write_text(&a.out_dir.join(format!("{stem}.svg")), &svg)?;
                }
            }
        }
    }
    let rows: Vec<TrialRow> = outcomes.into_iter().map(|o| o.row).collect();
    let summary = TrialSummary::from_rows(spec.name(), &rows);
    write_rows(&a.out_dir.join("trials.csv"), &rows)?;
    write_rows(&a.out_dir.join("table.csv"), std::slice::from_ref(&summary))?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let spec = ProblemSpec::new(a.problem);
    let opts = BenchOptions {
        delta_max: a.delta_max.or(Some(spec.protocol_delta_max())),
        spec,
        n_list: a.n.clone(),
        maxdim_list: a.maxdim.clone(),
        seed: a.seed,
        replicates: a.bootstrap,
        simplex_cap: a.simplex_cap,
    };
    let rows = run_bench(&opts);
    write_rows(&a.out, &rows)?;
    let dnf = rows.iter().filter(|r| r.is_dnf()).count();
    println!("{}", serde_json::json!({ "rows": rows.len(), "dnf": dnf, "out": display(&a.out) }));
    Ok(())
}
