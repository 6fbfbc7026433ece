//! The `rcr-design` command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure or
//! singular matrix, 4 I/O error, 5 failed statistical check.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::DesignError;

pub mod commands;
pub mod config;
pub mod output;

pub use config::ProblemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Io,
    Statistical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Numeric,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn statistical(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Statistical,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::Io => 4,
            ErrorKind::Statistical => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::SingularCriterion { .. } | DesignError::Solver(_) => {
                CliError::numeric(e.to_string())
            }
            _ => CliError::config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rcr-design",
    version,
    about = "Optimal designs for predicting individual random coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimax weight of a case, in closed form and numerically.
    Minimax(CommonArgs),
    /// IMSE criterion of a given design.
    Criterion(CommonArgs),
    /// Efficiency of the minimax design over the rescaled variance rho.
    EfficiencyCurve(CommonArgs),
    /// Writes figure1.csv .. figure8.csv into the --out directory.
    Figures(CommonArgs),
    /// Monte Carlo check of the BLUP mean squared error matrix.
    Simulate(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// linear, quadratic or polynomial.
    #[arg(long)]
    pub model: Option<String>,
    /// Minimax case: SL, Q1, Q2, Q3, Q4 or Q5.
    #[arg(long)]
    pub case: Option<String>,
    /// Number of individuals.
    #[arg(long)]
    pub n: Option<usize>,
    /// Observations per individual.
    #[arg(long)]
    pub m: Option<usize>,
    /// Variances as a comma list of zero, inf or positive numbers.
    #[arg(long)]
    pub d: Option<String>,
    /// lo:hi:step inside (0, 1).
    #[arg(long)]
    pub rho_grid: Option<String>,
    /// Output file, or output directory for `figures`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// JSON problem configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Echo the effective configuration to stderr.
    #[arg(long)]
    pub verbose: bool,
    /// Design as x:w,x:w,...
    #[arg(long)]
    pub design: Option<String>,
    /// File holding a design in the --design syntax.
    #[arg(long, conflicts_with = "design")]
    pub design_file: Option<PathBuf>,
    /// Degree of a polynomial model.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Design region lo:hi.
    #[arg(long)]
    pub region: Option<String>,
    /// Inclusive range of n for weight figures, lo:hi.
    #[arg(long)]
    pub n_range: Option<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Error variance for `simulate`.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Mean coefficients for `simulate`, comma separated.
    #[arg(long)]
    pub beta: Option<String>,
    /// Print CSV instead of key=value lines.
    #[arg(long)]
    pub csv: bool,
}

impl CommonArgs {
    /// Reads `--config` and overlays the flags.
    pub fn resolve(&self) -> Result<ProblemConfig, CliError> {
        let file = match &self.config {
            Some(path) => ProblemConfig::load(path)?,
            None => ProblemConfig::default(),
        };
        let design = match &self.design_file {
            Some(path) => Some(
                std::fs::read_to_string(path)
                    .map_err(|e| {
                        CliError::config(format!("cannot read design {}: {e}", path.display()))
                    })?
                    .split_whitespace()
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            None => self.design.clone(),
        };
        let region = self.region.as_deref().map(parse_region).transpose()?;
        let beta = self.beta.as_deref().map(parse_list).transpose()?;
        let flags = ProblemConfig {
            model: self.model.clone(),
            degree: self.degree,
            region,
            measure: None,
            n: self.n,
            m: self.m,
            d: self.d.clone().map(config::VarianceList::Text),
            case: self.case.clone(),
            design,
            rho_grid: self.rho_grid.clone(),
            n_range: self.n_range.clone(),
            out: self.out.clone(),
            seed: self.seed,
            replicates: self.replicates,
            sigma2: self.sigma2,
            beta,
            threads: self.threads,
        };
        Ok(file.merge(flags))
    }
}

fn parse_region(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::config(format!("region `{s}` is not lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok([
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ])
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("cannot parse `{t}` in `{s}`")))
        })
        .collect()
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    type Handler = fn(&ProblemConfig, &CommonArgs) -> Result<commands::Report, CliError>;
    let (args, f): (&CommonArgs, Handler) = match command {
        Command::Minimax(a) => (a, commands::minimax),
        Command::Criterion(a) => (a, commands::criterion),
        Command::EfficiencyCurve(a) => (a, commands::efficiency_curve),
        Command::Figures(a) => (a, commands::figures),
        Command::Simulate(a) => (a, commands::simulate),
    };
    let cfg = args.resolve()?;
    if args.verbose {
        let _ = writeln!(err, "{}", cfg.to_json());
    }
    let report = match cfg.threads {
        None => f(&cfg, args)?,
        Some(0) => return Err(CliError::config("--threads must be at least 1")),
        Some(t) => crate::simulation::with_threads(t, || f(&cfg, args))??,
    };
    out.write_all(report.text.as_bytes())
        .map_err(|e| CliError::io(format!("cannot write output: {e}")))?;
    report.failure.map_or(Ok(()), Err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::config("x").exit_code(), 2);
        assert_eq!(CliError::numeric("x").exit_code(), 3);
        assert_eq!(CliError::io("x").exit_code(), 4);
        assert_eq!(CliError::statistical("x").exit_code(), 5);
        let singular = DesignError::SingularCriterion {
            matrix: "M".into(),
            rcond: 0.0,
        };
        assert_eq!(CliError::from(singular).exit_code(), 3);
        assert_eq!(
            CliError::from(DesignError::InvalidArgument("n".into())).exit_code(),
            2
        );
    }
}
