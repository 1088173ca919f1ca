//! Command-line interface: `fit`, `benchmark`, `density` and `lpd`.
//!
//! Exit status is 0 on success, 2 for invalid input (configuration, data,
//! flags), 3 when a sampler fails and 1 when output cannot be written.

pub mod benchmark;
pub mod config;
pub mod density;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::chain::{ChainResult, SamplerKind};
use crate::designs::{sample_design, GibbsOptions};
use crate::distributions::RngStream;
use crate::error::Error;
use crate::misclass::{limiting_posterior_sample, EtaVector, PosteriorContext, RidgeAnchor};
use crate::samplers::{run_cross_sectional, McmcLength};
use crate::types::Design;

use benchmark::{run_benchmark, BenchmarkPlan};
use config::{parse_config, parse_counts_csv, ModelPriors, RunConfig};

pub const SEED_ENV: &str = "ATTRIB_BAYES_SEED";
const DEFAULT_SEED: u64 = 1;
const LPD_REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("sampler failed: {0}")]
    Sampler(Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Sampler(_) => 3,
            CliError::Output { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "attrib-bayes", version, about = "Posterior inference for population attributable risk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured seed and the ATTRIB_BAYES_SEED variable.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to the configured output_path, then ".".
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel chains; all cores when omitted.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV with header x11,x12,x21,x22 replacing the configured counts.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the posterior and write chain.csv, summary.csv and summary.txt.
    Fit(CommonArgs),
    /// Compare cross-sectional samplers over the configured data scales.
    Benchmark(CommonArgs),
    /// Kernel density grids of the posterior, written to density.csv.
    Density {
        #[command(flatten)]
        common: CommonArgs,
        /// Read draws from an existing chain CSV instead of sampling.
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long, default_value_t = density::DEFAULT_GRID_POINTS)]
        points: usize,
    },
    /// Draws from the limiting posterior through theta_true, or through the
    /// observed frequencies when theta_true is absent.
    Lpd(CommonArgs),
}

/// Precedence: flag, then environment, then configuration.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Some(raw) = env {
        return raw
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{SEED_ENV}='{raw}' is not an unsigned integer")));
    }
    Ok(config.unwrap_or(DEFAULT_SEED))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| CliError::Output { path: path.clone(), source })?;
    Ok(path)
}

/// Everything a subcommand needs after flags, environment and config are merged.
struct Session {
    config: RunConfig,
    seed: u64,
    out: PathBuf,
    pool: rayon::ThreadPool,
}

impl Session {
    fn new(args: &CommonArgs) -> Result<Self, CliError> {
        let mut config = parse_config(&read_input(&args.config)?)?;
        if let Some(path) = &args.data {
            config = config.with_counts(parse_counts_csv(&read_input(path)?)?)?;
        }
        let env = std::env::var(SEED_ENV).ok();
        let seed = resolve_seed(args.seed, env.as_deref(), config.seed)?;
        let out = args.out.clone().or_else(|| config.output_path.clone()).unwrap_or_else(|| PathBuf::from("."));
        if args.threads == Some(0) {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
        Ok(Session { config, seed, out, pool })
    }
}

/// Runs one chain of the configured sampler.
pub fn run_chain(config: &RunConfig, rng: &mut RngStream) -> crate::Result<ChainResult> {
    let data = config.data();
    match &config.priors {
        ModelPriors::Design(spec) => {
            let opts = GibbsOptions { burn_in: config.burn_in, ..GibbsOptions::default() };
            sample_design(rng, &data, spec, config.retained(), opts)
        }
        ModelPriors::CrossSectional(priors) => {
            let ctx = PosteriorContext::new(data, *priors)?;
            let length = McmcLength::new(config.iterations, config.burn_in)?;
            run_cross_sectional(config.sampler, rng, &ctx, &config.tuning, length, config.data_scale)
        }
    }
}

/// Runs `config.chains` chains in parallel, chain `k` on substream `k` of `seed`.
pub fn run_chains(config: &RunConfig, seed: u64) -> Result<Vec<ChainResult>, CliError> {
    (0..config.chains)
        .into_par_iter()
        .map(|k| run_chain(config, &mut RngStream::substream(seed, k as u64)))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(CliError::Sampler)
}

fn write_chains(s: &Session, prefix: &str, sampler: SamplerKind, chains: &[ChainResult]) -> Result<(), CliError> {
    let quantities = output::reported_quantities(s.config.table.design);
    let rows = output::summary_rows(chains, quantities)?;
    write_output(&s.out, &format!("{prefix}chain.csv"), &output::chain_csv(chains))?;
    write_output(&s.out, &format!("{prefix}summary.csv"), &output::summary_csv(&rows))?;
    let text = output::summary_text(sampler, chains, &rows);
    write_output(&s.out, &format!("{prefix}summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn fit(args: &CommonArgs) -> Result<(), CliError> {
    let s = Session::new(args)?;
    let chains = s.pool.install(|| run_chains(&s.config, s.seed))?;
    write_chains(&s, "", s.config.sampler, &chains)
}

fn lpd(args: &CommonArgs) -> Result<(), CliError> {
    let s = Session::new(args)?;
    let ModelPriors::CrossSectional(priors) = s.config.priors else {
        return Err(CliError::Validation("lpd needs cross_sectional data".into()));
    };
    let anchor = match s.config.theta_true {
        Some(theta) => RidgeAnchor::Theta(theta),
        None => RidgeAnchor::Eta(EtaVector::from_table(&s.config.data())),
    };
    let n = s.config.retained();
    let chains = s.pool.install(|| {
        (0..s.config.chains)
            .into_par_iter()
            .map(|k| {
                let mut rng = RngStream::substream(s.seed, k as u64);
                limiting_posterior_sample(&mut rng, anchor, &priors, n, LPD_REJECTION_CAP)
            })
            .collect::<crate::Result<Vec<_>>>()
            .map_err(CliError::Sampler)
    })?;
    write_chains(&s, "lpd_", SamplerKind::LimitingPosterior, &chains)
}

fn density_cmd(args: &CommonArgs, chain: Option<&Path>, points: usize) -> Result<(), CliError> {
    let s = Session::new(args)?;
    let chains = match chain {
        Some(path) => output::read_chain_csv(&read_input(path)?, s.config.sampler)?,
        None => s.pool.install(|| run_chains(&s.config, s.seed))?,
    };
    let quantities = output::reported_quantities(s.config.table.design);
    let csv = s.pool.install(|| density::density_csv(&chains, quantities, points)).map_err(|e| match e {
        Error::InvalidInput(msg) => CliError::Validation(msg),
        other => CliError::Sampler(other),
    })?;
    let path = write_output(&s.out, "density.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn benchmark_cmd(args: &CommonArgs) -> Result<(), CliError> {
    let s = Session::new(args)?;
    let ModelPriors::CrossSectional(priors) = s.config.priors else {
        return Err(CliError::Validation("benchmark needs cross_sectional data".into()));
    };
    debug_assert_eq!(s.config.table.design, Design::CrossSectional);
    let bench = &s.config.benchmark;
    let plan = BenchmarkPlan {
        table: s.config.table,
        priors,
        samplers: &bench.samplers,
        scales: &bench.scales,
        chains: bench.chains,
        length: McmcLength::new(s.config.iterations, s.config.burn_in).map_err(|e| CliError::Validation(e.to_string()))?,
        tuning: s.config.tuning,
        seed: s.seed,
    };
    let cells = s.pool.install(|| run_benchmark(&plan));
    write_output(&s.out, "benchmark_acceptance.csv", &benchmark::acceptance_csv(&cells))?;
    write_output(&s.out, "benchmark_ess_per_1000.csv", &benchmark::ess_per_thousand_csv(&cells))?;
    write_output(&s.out, "benchmark_ess_per_second.csv", &benchmark::ess_per_second_csv(&cells))?;
    let text = benchmark::benchmark_text(&cells);
    write_output(&s.out, "benchmark.txt", &text)?;
    print!("{text}");
    Ok(())
}

/// Parses arguments and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Validation(e.to_string())),
    };
    match &cli.command {
        Command::Fit(a) => fit(a),
        Command::Benchmark(a) => benchmark_cmd(a),
        Command::Density { common, chain, points } => density_cmd(common, chain.as_deref(), *points),
        Command::Lpd(a) => lpd(a),
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), Some(3)).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some("2"), Some(3)).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, Some(3)).unwrap(), 3);
        assert_eq!(resolve_seed(None, None, None).unwrap(), DEFAULT_SEED);
        assert!(matches!(resolve_seed(None, Some("x"), None), Err(CliError::Validation(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation(String::new()).exit_code(), 2);
        assert_eq!(CliError::Sampler(Error::OutsideA).exit_code(), 3);
    }

    #[test]
    fn unknown_subcommand_is_a_validation_error() {
        assert!(matches!(run(["attrib-bayes", "sample"]), Err(CliError::Validation(_))));
    }
}
