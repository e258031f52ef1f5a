use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dunkl::config::{ExperimentConfig, OutputFormat, Overrides};
use dunkl::report::write_rows;
use dunkl::suites::{run_calculus, run_norms, run_suite, Suite};
use dunkl::DunklError;

/// Verification suites and experiments for Dunkl kernels, Lipschitz norms
/// and the matrix semigroup calculus.
///
/// Worker threads: DUNKL_THREADS (default: available parallelism).
#[derive(Parser)]
#[command(name = "dunkl-lab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite; exit 1 if any check fails.
    Verify {
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Norm-equivalence report over corpus × β × k.
    Norms {
        #[command(flatten)]
        common: Common,
    },
    /// Matrix calculus experiments on the generator test set.
    Calculus {
        /// comma-separated generator names
        #[arg(long, value_delimiter = ',')]
        generators: Option<Vec<String>>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// comma-separated multiplicities
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<f64>>,
    /// comma-separated exponents; an empty value gives an empty list
    #[arg(long, num_args = 0..=1, default_missing_value = "")]
    beta: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

enum Failure {
    Config(String),
    Assertion(String),
}

impl From<DunklError> for Failure {
    fn from(e: DunklError) -> Self {
        match e {
            DunklError::Config(_) | DunklError::Parameter(_) => Failure::Config(e.to_string()),
            other => Failure::Assertion(other.to_string()),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|e| Failure::Config(format!("--beta: '{p}': {e}"))))
        .collect()
}

fn load(common: &Common, generators: Option<Vec<String>>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let format = common.format.as_deref().map(str::parse::<OutputFormat>).transpose()?;
    let beta = common.beta.as_deref().map(parse_list).transpose()?;
    cfg.apply(&Overrides { k: common.k.clone(), beta, tol: common.tol, out: common.out.clone(), format, generators });
    cfg.validate()?;
    Ok(cfg)
}

fn emit<T: serde::Serialize>(cfg: &ExperimentConfig, rows: &[T]) -> Result<(), Failure> {
    let format = cfg.output.format;
    match &cfg.output.path {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?;
            let mut w = std::io::BufWriter::new(f);
            write_rows(rows, format, &mut w)?;
            w.flush().map_err(|e| Failure::Config(e.to_string()))?;
        }
        None => write_rows(rows, format, std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Verify { suite, common } => {
            let suite: Suite = suite.parse()?;
            let cfg = load(&common, None)?;
            let rows = run_suite(suite, &cfg)?;
            emit(&cfg, &rows)?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            for r in &failed {
                eprintln!("FAIL {}: {:e} > {:e}", r.check, r.value, r.bound);
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Assertion(format!("{} of {} checks failed", failed.len(), rows.len())))
            }
        }
        Cmd::Norms { common } => {
            let cfg = load(&common, None)?;
            let rows = run_norms(&cfg)?;
            emit(&cfg, &rows)?;
            let flagged = rows.iter().filter(|r| !r.in_band()).count();
            if flagged > 0 {
                eprintln!("{flagged} ratio(s) outside the band");
            }
            Ok(())
        }
        Cmd::Calculus { generators, common } => {
            let cfg = load(&common, generators)?;
            let rows = run_calculus(&cfg)?;
            emit(&cfg, &rows)?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.passes()).collect();
            for r in &failed {
                eprintln!("FAIL {} {} {}: {:e}", r.operation, r.generator_id, r.parameter, r.value);
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Assertion(format!("{} residual(s) above tolerance", failed.len())))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
