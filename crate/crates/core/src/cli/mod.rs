//! Command-line surface. [`run`] is the whole program; the binary only
//! forwards process arguments and streams.
//!
//! Exit codes: 0 success, 1 certification failure or benchmark mismatch,
//! 2 configuration or parse error, 3 numeric failure.

mod commands;
mod model_spec;

pub use commands::{
    CertifyDocument, DigammaDocument, FieldDocument, FieldRow, LocateDocument, TailCheck, XiDocument,
};
pub use model_spec::{load_table, parse_complex, parse_inline, read_model_file, Model, ModelFile};

use crate::certifier::{CertMethod, Partial};
use crate::complex::{NumericPolicy, Rectangle};
use crate::error::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "merozero", version, about = "Zeros of W' via the argument gradient of W")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Locate zeros of W' in a rectangle
    Locate(ModelArgs),
    /// Certify a rectangle free of zeros of W'
    Certify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "t")]
        partial: PartialArg,
        #[arg(long, value_enum, default_value = "termwise")]
        method: MethodArg,
    },
    /// Export the argument-gradient field on an inclusive lattice
    Field(ModelArgs),
    /// Compare the locator with the polynomial oracle on random rational functions
    Bench {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Record per-instance wall-clock time (makes output non-reproducible)
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Real zeros of the digamma function and the off-axis certificate
    Digamma {
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Strip-exterior certificates and critical-line roots of the truncated xi
    Xi {
        /// Zeta-zero ordinate file
        #[arg(long)]
        zeros: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        /// Consecutive ordinate pairs searched on the critical line
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        /// Height |t| covered by the strip-exterior certificates
        #[arg(long, default_value_t = 60.0)]
        height: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Inline model, e.g. "poly: 0 -3 0 1" or "gamma: n=1000"
    #[arg(long, conflicts_with = "model_file", required_unless_present = "model_file")]
    pub model: Option<String>,
    /// JSON model file
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["SIGMA_MIN", "SIGMA_MAX", "T_MIN", "T_MAX"], required = true)]
    pub region: Vec<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Seeds (or lattice points) per axis
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol_grad: Option<f64>,
    #[arg(long)]
    pub tol_res: Option<f64>,
    #[arg(long)]
    pub singular_radius: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartialArg {
    Sigma,
    T,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Termwise,
    Interval,
}

/// Source of the model: inline text or a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Inline(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Locate,
    Certify { partial: Partial, method: CertMethod },
    Field,
    Bench { instances: usize, seed: u64, timing: bool },
    Digamma { count: usize, n: usize },
    Xi { zeros: PathBuf, n: usize, sigma: f64, pairs: usize, height: f64 },
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub model_source: Option<ModelSource>,
    pub region: Option<Rectangle>,
    pub policy: NumericPolicy,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, Error> {
        let (command, model, common) = match cli.command {
            CliCommand::Locate(m) => (Command::Locate, Some((m.model, m.model_file, m.region)), m.common),
            CliCommand::Certify { model: m, partial, method } => {
                let partial = match partial {
                    PartialArg::Sigma => Partial::Sigma,
                    PartialArg::T => Partial::T,
                };
                let method = match method {
                    MethodArg::Termwise => CertMethod::TermwiseSign,
                    MethodArg::Interval => CertMethod::IntervalBound,
                };
                (Command::Certify { partial, method }, Some((m.model, m.model_file, m.region)), m.common)
            }
            CliCommand::Field(m) => (Command::Field, Some((m.model, m.model_file, m.region)), m.common),
            CliCommand::Bench { instances, seed, timing, common } => (Command::Bench { instances, seed, timing }, None, common),
            CliCommand::Digamma { count, n, common } => (Command::Digamma { count, n }, None, common),
            CliCommand::Xi { zeros, n, sigma, pairs, height, common } => {
                if !(height > 0.0 && height.is_finite()) {
                    return Err(Error::Domain(format!("height must be positive, got {height}")));
                }
                (Command::Xi { zeros, n, sigma, pairs, height }, None, common)
            }
        };
        let (model_source, region) = match model {
            Some((inline, file, r)) => {
                let source = match (inline, file) {
                    (Some(s), None) => ModelSource::Inline(s),
                    (None, Some(p)) => ModelSource::File(p),
                    _ => return Err(Error::Domain("exactly one of --model and --model-file is required".into())),
                };
                (Some(source), Some(Rectangle::new(r[0], r[1], r[2], r[3])?))
            }
            None => (None, None),
        };
        let mut policy = NumericPolicy::default();
        if let Some(g) = common.grid {
            policy.grid_density = g;
        }
        if let Some(v) = common.tol_grad {
            policy.grad_tol = v;
        }
        if let Some(v) = common.tol_res {
            policy.residual_tol = v;
        }
        if let Some(v) = common.singular_radius {
            policy.singular_radius = v;
        }
        policy.validate()?;
        Ok(RunConfig { command, model_source, region, policy, output_format: common.format, output_path: common.out })
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_)
        | Error::InvalidRectangle(_)
        | Error::InvalidPolicy(_)
        | Error::InvalidModel(_)
        | Error::EmptyRegion
        | Error::Parse { .. }
        | Error::NonMonotone { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

/// Runs the program on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    match commands::execute(&config) {
        Ok((code, text)) => {
            if let Err(e) = emit(&config, &text, stdout) {
                let _ = writeln!(stderr, "error: writing output: {e}");
                return EXIT_CONFIG;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(config: &RunConfig, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match &config.output_path {
        Some(p) => std::fs::write(p, text),
        None => stdout.write_all(text.as_bytes()),
    }
}
