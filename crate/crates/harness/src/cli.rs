//! `gsp` command line.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use gsp_core::estimators::EstimatorJson;
use gsp_core::graph::{self, PerturbMode, SpectrumJson};
use gsp_core::power::{import_matpower, AcGridModel};
use gsp_core::{LinearEstimator, SampleMoments, SpectralGraph, TrainingSet};

use crate::config::ExperimentConfig;
use crate::eval::{evaluate_mse, load_grid, Problem};
use crate::experiments::{experiment_a, experiment_b, test_seed, train_seed};
use crate::fits::fit;
use crate::report::write_runtime_csv;
use crate::runtime::measure_runtime;
use crate::HarnessError;

#[derive(Debug, Parser)]
#[command(name = "gsp", version, about = "Graph-signal estimation experiments")]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (directory for `dataset generate`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Caps the worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph spectra and topology changes.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Grid file conversion.
    #[command(subcommand)]
    Grid(GridCmd),
    /// Training data.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Fit one estimator and write it as JSON.
    Fit(FitArgs),
    /// Monte Carlo MSE of a saved estimator.
    Eval(EvalArgs),
    /// Run experiment A or B and write the MSE table.
    Experiment {
        #[arg(value_enum)]
        which: Which,
    },
    /// Runtime table (time to reach each target MSE).
    Runtime,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Which {
    A,
    B,
}

#[derive(Debug, Subcommand)]
pub enum GraphCmd {
    /// Laplacian spectrum of the configured grid (or an edge list) as JSON.
    Build {
        /// Edge list CSV `from,to,weight` (0-based) instead of the grid.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Perturb the grid topology and write the new branch CSV.
    Perturb {
        #[arg(long, value_enum, default_value = "edges")]
        target: Target,
        #[arg(long, value_enum, default_value = "add")]
        mode: Mode,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Target {
    Edges,
    Vertices,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Add,
    Remove,
}

#[derive(Debug, Subcommand)]
pub enum GridCmd {
    /// Convert a MATPOWER case file to a branch CSV.
    Import { case: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum DatasetCmd {
    /// Write x.csv, g.csv and moments.json into the `--out` directory.
    Generate {
        #[arg(long)]
        p: usize,
    },
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub filter: String,
    /// Training samples; the config's `p_train` when absent.
    #[arg(long)]
    pub p: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub estimator: PathBuf,
    /// Test draws; the config's `trials` when absent.
    #[arg(long)]
    pub trials: Option<usize>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_config(cli: &Cli, required: bool) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if required => return Err(HarnessError::Config("--config is required".into())),
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Option<PathBuf>, value: &T) -> Result<(), HarnessError> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), HarnessError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Graph(GraphCmd::Build { edges }) => {
            let sg = match edges {
                Some(p) => SpectralGraph::build(graph::read_edge_csv(File::open(p)?, None)?)?,
                None => load_grid(&load_config(&cli, false)?)?.spectral_graph()?,
            };
            write_json(&cli.out, &SpectrumJson::from(&sg))
        }
        Command::Graph(GraphCmd::Perturb { target, mode, m }) => {
            let cfg = load_config(&cli, false)?;
            let grid = load_grid(&cfg)?;
            let g = grid.graph()?;
            let mode = match mode {
                Mode::Add => PerturbMode::Add,
                Mode::Remove => PerturbMode::Remove,
            };
            let new = match target {
                Target::Edges => grid.with_topology(&graph::perturb_edges(&g, *m, mode, cfg.seed)?, None)?,
                Target::Vertices => {
                    let (ng, map) = graph::perturb_vertices(&g, *m, mode, cfg.seed)?;
                    grid.with_topology(&ng, Some(&map))?
                }
            };
            new.write_csv(output(&cli.out)?)?;
            Ok(())
        }
        Command::Grid(GridCmd::Import { case }) => {
            let text = std::fs::read_to_string(case)?;
            let grid: AcGridModel<f64> = import_matpower(&text)?;
            grid.write_csv(output(&cli.out)?)?;
            Ok(())
        }
        Command::Dataset(DatasetCmd::Generate { p }) => {
            let cfg = load_config(&cli, false)?;
            let dir = cli
                .out
                .clone()
                .ok_or_else(|| HarnessError::Config("dataset generate needs --out DIR".into()))?;
            let problem = Problem::from_config(&cfg)?;
            let ts = TrainingSet::generate(&problem.model, *p, train_seed(cfg.seed, *p))?;
            ts.write_csv(&dir)?;
            let m = SampleMoments::from_training(&ts, &problem.sg, problem.model.noise.covariance())?;
            write_json(&Some(dir.join("moments.json")), &m.to_json())
        }
        Command::Fit(args) => {
            let cfg = load_config(&cli, false)?;
            let label = match args.filter.as_str() {
                "lmmse" => "slmmse",
                other => other,
            };
            if !crate::config::KNOWN_ESTIMATORS.contains(&label) {
                return Err(HarnessError::Config(format!("unknown filter '{}'", args.filter)));
            }
            let problem = Problem::from_config(&cfg)?;
            let p = args.p.unwrap_or(cfg.p_train);
            let m = SampleMoments::from_model(&problem.model, &problem.sg, p, train_seed(cfg.seed, p))?;
            let f = fit(label, &problem, &m, &cfg)?;
            let json = match f.filter() {
                Some(ff) => ff.to_json(),
                None => f.linear().to_json(None),
            };
            write_json(&cli.out, &json)
        }
        Command::Eval(args) => {
            let cfg = load_config(&cli, false)?;
            let est = read_estimator(&args.estimator)?;
            let problem = Problem::from_config(&cfg)?;
            let trials = args.trials.unwrap_or(cfg.trials);
            let s = evaluate_mse(&est, &problem.model, trials, test_seed(cfg.seed))?;
            let mut w = output(&cli.out)?;
            writeln!(w, "estimator,trials,mse,stderr")?;
            writeln!(w, "{},{trials},{:.10e},{:.10e}", est.label, s.mse, s.stderr)?;
            w.flush()?;
            Ok(())
        }
        Command::Experiment { which } => {
            let cfg = load_config(&cli, true)?;
            let report = match which {
                Which::A => experiment_a(&cfg)?.report,
                Which::B => experiment_b(&cfg)?.report,
            };
            report.write_csv(output(&cli.out)?)
        }
        Command::Runtime => {
            let cfg = load_config(&cli, true)?;
            let r = measure_runtime(&cfg)?;
            write_runtime_csv(&r.rows, output(&cli.out)?)
        }
    }
}

fn read_estimator(path: &Path) -> Result<LinearEstimator<f64>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    let j: EstimatorJson = serde_json::from_str(&text)?;
    Ok(LinearEstimator::from_json(&j)?)
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
