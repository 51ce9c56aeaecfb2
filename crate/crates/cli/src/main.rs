//! Command-line front end for selberg-lab.
//!
//! Exit codes: 0 ok, 1 I/O or parse error, 2 validation failure,
//! 3 numerical non-convergence, 4 violated precondition.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::{Command, Format, RunConfig};
use selberg_lab::LabError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "selberg-lab", version, about = "Dirichlet series with Selberg-type functional equations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Write the result here instead of stdout.
    #[arg(short, long)]
    output: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a JSON config file.
    Run {
        config: PathBuf,
    },
    /// Print the degree 2(Σλ − Σλ').
    Degree {
        spec: String,
        #[command(flatten)]
        common: Common,
    },
    /// Check specs against the class axioms.
    Validate {
        #[arg(required = true)]
        specs: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// F(1/2+it) by the smoothed approximate functional equation.
    Eval {
        spec: String,
        #[arg(short, long = "t", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        t: Vec<f64>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Gamma-quotient asymptotics on the critical line.
    GammaAsym {
        spec: String,
        #[arg(short, long = "t", value_delimiter = ',')]
        t: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Pole sets of the gamma factors and their differences.
    GammaSets {
        spec: String,
        #[command(flatten)]
        common: Common,
    },
    /// Normalized window integrals against the closed form.
    Detect {
        spec: String,
        #[arg(short, long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(short = 'T', long = "big-t", value_delimiter = ',')]
        big_t: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a degree 0 or degree 1 series.
    Classify {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        shift_a: Option<f64>,
        #[arg(long)]
        period_q: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a factorization into two shifted Dirichlet L-functions.
    ProbePrimitivity {
        spec: String,
        #[arg(long)]
        q_max: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
        /// t_min,t_max,step
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t_grid: Option<Vec<f64>>,
        /// Screen cutoff on the residual.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Count and locate zeros in a rectangle.
    Zeros {
        spec: String,
        /// sigma_min,sigma_max,t_min,t_max
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rectangle: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Zeros of the second spec that are not zeros of the first.
    CompareZeros {
        spec1: String,
        spec2: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rectangle: Option<Vec<f64>>,
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn base(command: Command, specs: Vec<String>, c: Common) -> RunConfig {
    RunConfig {
        command,
        specs,
        output: c.output,
        format: c.format,
        x: None,
        eta: None,
        t: vec![],
        alpha: vec![],
        rectangle: None,
        shift_a: None,
        period_q: None,
        horizon: None,
        q_max: None,
        t_grid: None,
        threshold: None,
        seed: c.seed,
        threads: c.threads,
    }
}

fn fixed<const N: usize>(v: Option<Vec<f64>>, what: &str) -> Result<Option<[f64; N]>, LabError> {
    v.map(|v| <[f64; N]>::try_from(v).map_err(|v| LabError::Parse(format!("{what} takes {N} values, got {}", v.len()))))
        .transpose()
}

fn to_config(cmd: Cmd) -> Result<RunConfig, LabError> {
    Ok(match cmd {
        Cmd::Run { config } => RunConfig::load(&config)?,
        Cmd::Degree { spec, common } => base(Command::Degree, vec![spec], common),
        Cmd::Validate { specs, common } => base(Command::Validate, specs, common),
        Cmd::Eval { spec, t, x, eta, common } => RunConfig { t, x, eta, ..base(Command::Eval, vec![spec], common) },
        Cmd::GammaAsym { spec, t, common } => RunConfig { t, ..base(Command::GammaAsym, vec![spec], common) },
        Cmd::GammaSets { spec, common } => base(Command::GammaSets, vec![spec], common),
        Cmd::Detect { spec, alpha, big_t, common } => RunConfig { alpha, t: big_t, ..base(Command::Detect, vec![spec], common) },
        Cmd::Classify { spec, shift_a, period_q, horizon, common } => {
            RunConfig { shift_a, period_q, horizon, ..base(Command::Classify, vec![spec], common) }
        }
        Cmd::ProbePrimitivity { spec, q_max, horizon, t_grid, threshold, common } => RunConfig {
            q_max,
            horizon,
            t_grid: fixed::<3>(t_grid, "--t-grid")?,
            threshold,
            ..base(Command::ProbePrimitivity, vec![spec], common)
        },
        Cmd::Zeros { spec, rectangle, common } => RunConfig { rectangle: fixed::<4>(rectangle, "--rectangle")?, ..base(Command::Zeros, vec![spec], common) },
        Cmd::CompareZeros { spec1, spec2, rectangle, threshold, common } => RunConfig {
            rectangle: fixed::<4>(rectangle, "--rectangle")?,
            threshold,
            ..base(Command::CompareZeros, vec![spec1, spec2], common)
        },
    })
}

fn run(cfg: &RunConfig) -> Result<i32, LabError> {
    if let Some(n) = cfg.threads {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = commands::execute(cfg)?;
    let hash = cfg.hash();
    match &cfg.output {
        Some(path) => std::fs::write(path, commands::render_file(&outcome.artifact, &hash))
            .map_err(|e| LabError::Io(format!("{path}: {e}")))?,
        None => print!("{}", commands::render(&outcome.artifact, &hash)),
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    // Usage errors are parse errors (exit 1); exit 2 is reserved for validation.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = to_config(cli.command).and_then(|cfg| run(&cfg));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let err = serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() });
            eprintln!("{err}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
