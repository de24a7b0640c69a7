//! Command-line front end for geopack.

mod bench;
mod run;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use geopack::fattri::FatOptions;
use geopack::generate::{generate_instance, GeneratorSpec};
use geopack::rounding::SolverConfig;

#[derive(Parser, Debug)]
#[command(name = "geopack", version, about = "Capacitated geometric packing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Opts {
    /// Instance file: a geometric instance or a plain hypergraph.
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Generator spec file, used instead of --instance.
    #[arg(long, global = true)]
    gen: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file with `solver` and `fat` blocks.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Defaults to csv for bench and json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    with_oracle: bool,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Bi-criteria capacity relaxation.
    #[arg(long, global = true)]
    phi: Option<u32>,
    /// Swap size for local search.
    #[arg(long, global = true, default_value_t = geopack::localsearch::DEFAULT_B)]
    b: usize,
    /// Reject unknown fields in instance files.
    #[arg(long, global = true)]
    strict: bool,
    /// Node budget for the exact solver.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    node_budget: u64,
    /// Bench: number of generated instances.
    #[arg(long, global = true, default_value_t = 20)]
    instances: usize,
    /// Bench: rounding seeds per instance.
    #[arg(long, global = true, default_value_t = 1)]
    seeds: usize,
    /// Bench: comma-separated algorithms.
    #[arg(long, global = true, default_value = "pack")]
    algos: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Lp,
    Pack,
    PackRects,
    PackBoxes,
    PackPointsRects,
    PackPointsFattri,
    LocalSearch,
    Exact,
    Bench,
    Generate,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub solver: SolverConfig,
    pub fat: FatOptions,
}

/// Raised when a produced solution fails its own feasibility check.
#[derive(Debug)]
pub struct InfeasibleOutput(pub String);

impl std::fmt::Display for InfeasibleOutput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "infeasible output: {}", self.0)
    }
}

impl std::error::Error for InfeasibleOutput {}

impl Opts {
    fn config(&self) -> Result<CliConfig> {
        let mut cfg: CliConfig = match &self.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?,
            None => CliConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.solver.seed = seed;
        }
        if let Some(t) = self.trials {
            cfg.solver.trials = t;
        }
        if let Some(a) = self.alpha {
            cfg.solver.alpha = a;
        }
        cfg.solver.validate()?;
        Ok(cfg)
    }

    fn spec(&self) -> Result<Option<GeneratorSpec>> {
        let Some(path) = &self.gen else { return Ok(None) };
        let mut spec: GeneratorSpec = serde_json::from_str(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        Ok(Some(spec))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GEOPACK_THREADS") {
        let n: usize = v.parse().with_context(|| format!("GEOPACK_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let opts = &cli.opts;
    match cli.command {
        Command::Generate => {
            let Some(spec) = opts.spec()? else { bail!("generate needs --gen") };
            opts.emit(&(generate_instance(&spec)?.to_json() + "\n"))
        }
        Command::Bench => {
            let Some(spec) = opts.spec()? else { bail!("bench needs --gen") };
            let text = bench::bench(&spec, &opts.config()?, opts)?;
            opts.emit(&text)
        }
        command => {
            let input = run::Input::load(opts)?;
            let cfg = opts.config()?;
            let report = run::run(command, &input, &cfg, opts)?;
            let text = match opts.format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Csv => bench::to_csv(&[report.row(0)])?,
            };
            opts.emit(&text)?;
            if !report.feasible {
                return Err(InfeasibleOutput(format!("{} produced an infeasible set", report.command)).into());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<InfeasibleOutput>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
