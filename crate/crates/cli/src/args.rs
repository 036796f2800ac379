use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selinf::pipeline::LambdaRule;
use selinf::sim::ExperimentConfig;
use selinf::ConditioningMode;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::{Experiment, InferManifest, Scenario, SigmaSource, SimulateManifest, Suite};

pub const DEFAULT_SIGN_CAP: usize = 15;

#[derive(Debug, Parser)]
#[command(name = "selinf", version, about = "Exact selective inference for the lasso")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the lasso to a CSV file and report selective intervals.
    Infer(InferArgs),
    /// Run a Monte Carlo coverage or width experiment.
    Simulate(SimulateArgs),
    /// Intervals for one observation of a truncated standard normal.
    Tnci(TnciArgs),
    /// Repeat a run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sign,
    Model,
}

impl From<Mode> for ConditioningMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sign => ConditioningMode::Sign,
            Mode::Model => ConditioningMode::Model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// `auto` or a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Auto,
    Value(f64),
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LambdaArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(LambdaArg::Value(v)),
            _ => Err(format!("expected `auto` or a positive number, got {s:?}")),
        }
    }
}

impl LambdaArg {
    fn rule(self, draws: usize) -> LambdaRule {
        match self {
            LambdaArg::Auto => LambdaRule::Expectation { draws },
            LambdaArg::Value(lambda) => LambdaRule::Fixed { lambda },
        }
    }
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the response column.
    #[arg(long)]
    pub response: String,
    /// Center predictors and scale them to unit norm; center the response.
    #[arg(long)]
    pub standardize: bool,
    /// Penalty level, or `auto` for 2 E|X^T eps|_inf.
    #[arg(long, default_value = "auto")]
    pub lambda: LambdaArg,
    /// Simulations used by `--lambda auto`.
    #[arg(long, default_value_t = 5000)]
    pub lambda_draws: usize,
    /// Ridge weight of the elastic net.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Noise standard deviation; estimated from the full fit when omitted.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Mode::Sign)]
    pub mode: Mode,
    /// Largest model for which `--mode model` enumerates sign patterns.
    #[arg(long, default_value_t = DEFAULT_SIGN_CAP)]
    pub sign_cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

impl InferArgs {
    pub fn to_manifest(&self) -> Result<InferManifest, CliError> {
        let data = std::fs::canonicalize(&self.data).map_err(|source| CliError::Read {
            path: self.data.clone(),
            source,
        })?;
        Ok(InferManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            data,
            response: self.response.clone(),
            standardize: self.standardize,
            lambda: self.lambda.rule(self.lambda_draws),
            gamma: self.gamma,
            sigma: self.sigma,
            sigma_source: if self.sigma.is_some() {
                SigmaSource::User
            } else {
                SigmaSource::Estimated
            },
            alpha: self.alpha,
            mode: self.mode.into(),
            sign_cap: self.sign_cap,
            seed: self.seed,
            format: self.format,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    Coverage,
    Widths,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON experiment file; the flags below are then ignored except
    /// `--replications` and `--seed`, which override every scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ExperimentArg::Coverage, conflicts_with = "config")]
    pub experiment: ExperimentArg,
    #[arg(long, conflicts_with = "config")]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "config")]
    pub p: Option<usize>,
    /// Number of nonzero coefficients, placed first.
    #[arg(long, default_value_t = 0, conflicts_with = "config")]
    pub k: usize,
    /// Value of every nonzero coefficient.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, conflicts_with = "config")]
    pub strength: f64,
    #[arg(long, default_value_t = 1.0, conflicts_with = "config")]
    pub sigma: f64,
    #[arg(long, default_value = "auto", conflicts_with = "config")]
    pub lambda: LambdaArg,
    #[arg(long, default_value_t = 1000, conflicts_with = "config")]
    pub lambda_draws: usize,
    #[arg(long, default_value_t = 0.0, conflicts_with = "config")]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.1, conflicts_with = "config")]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Mode::Sign, conflicts_with = "config")]
    pub mode: Mode,
    #[arg(long, default_value_t = DEFAULT_SIGN_CAP, conflicts_with = "config")]
    pub sign_cap: usize,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl SimulateArgs {
    pub fn to_manifest(&self) -> Result<SimulateManifest, CliError> {
        let mut suite = match &self.config {
            Some(path) => Suite::load(path)?,
            None => self.flag_suite()?,
        };
        for s in &mut suite.scenarios {
            if let Some(r) = self.replications {
                s.config.replications = r;
            }
            if let Some(seed) = self.seed {
                s.config.seed = seed;
            }
        }
        Ok(SimulateManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: suite.experiment,
            scenarios: suite.scenarios,
        })
    }

    fn flag_suite(&self) -> Result<Suite, CliError> {
        let (Some(n), Some(p)) = (self.n, self.p) else {
            return Err(CliError::Usage("simulate needs --config or both --n and --p".into()));
        };
        if self.k > p {
            return Err(CliError::Usage(format!("--k {} exceeds --p {p}", self.k)));
        }
        let mut config = ExperimentConfig::sparse(n, p, self.k, self.strength, self.sigma, self.lambda.rule(self.lambda_draws), 0);
        config.gamma = self.gamma;
        config.alpha = self.alpha;
        config.mode = self.mode.into();
        config.sign_cap = self.sign_cap;
        Ok(Suite {
            experiment: match self.experiment {
                ExperimentArg::Coverage => Experiment::Coverage,
                ExperimentArg::Widths => Experiment::Widths,
            },
            scenarios: vec![Scenario {
                label: "default".into(),
                config,
            }],
        })
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TnciArgs {
    /// Lower truncation point `a`.
    #[arg(long = "lower", short = 'a')]
    pub lower: f64,
    /// Upper truncation point `b`.
    #[arg(long = "upper", short = 'b')]
    pub upper: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Observations, comma separated. Defaults to an even grid inside (a, b).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Size of the default grid.
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// `manifest.json` written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}
