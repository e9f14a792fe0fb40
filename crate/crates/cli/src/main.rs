use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod format;

use error::{EXIT_OK, EXIT_USAGE};

/// Circulant metrics in three dimensions: angles, almost-conformal
/// transforms, angle flows and gradient-condition checks on fields.
///
/// Exit codes: 0 success, 1 usage or parse error, 2 domain or precondition
/// error, 3 a field check failed.
#[derive(Debug, Parser)]
#[command(name = "circmetric", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// cos φ and φ for the g-angle between w and qw.
    Angle(AngleArgs),
    /// Iterate the almost-conformal map and trace the angle sequence.
    Iterate(IterateArgs),
    /// Check the gradient conditions and ∇q for coefficient fields on a box.
    CheckFields(CheckFieldsArgs),
    /// Apply one almost-conformal step g ↦ αg + βf.
    Transform(TransformArgs),
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// JSON config file; flags given explicitly override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output format: text, csv or json [default: text].
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Write the output to FILE instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct MetricArgs {
    /// Diagonal entry A of g.
    #[arg(long = "A", value_name = "A", allow_hyphen_values = true)]
    a: Option<String>,
    /// Off-diagonal entry B of g.
    #[arg(long = "B", value_name = "B", allow_hyphen_values = true)]
    b: Option<String>,
}

#[derive(Debug, Clone, Args)]
struct ParamArgs {
    /// Coefficient α of g.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Coefficient β of the associated form f.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
}

#[derive(Debug, Clone, Args)]
struct AngleArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// The vector w as x,y,z.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    w: Option<String>,
    /// Report φ in degrees instead of radians.
    #[arg(long)]
    degrees: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args)]
struct IterateArgs {
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// The vector w as x,y,z [default: 1,0,0].
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    w: Option<String>,
    /// Maximum number of steps [default: 500].
    #[arg(long)]
    max_steps: Option<usize>,
    /// Stop once 1 − cos φₙ < EPSILON [default: 1e-9].
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Rescale every gₙ so that A + 2B = 1.
    #[arg(long)]
    normalize: bool,
    /// Report φ in degrees instead of radians.
    #[arg(long)]
    degrees: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args)]
struct CheckFieldsArgs {
    /// Expression for A(x, y, z).
    #[arg(long = "A", value_name = "EXPR", allow_hyphen_values = true)]
    a: Option<String>,
    /// Expression for B(x, y, z).
    #[arg(long = "B", value_name = "EXPR", allow_hyphen_values = true)]
    b: Option<String>,
    /// Expression for α(x, y, z).
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Expression for β(x, y, z).
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    beta: Option<String>,
    /// Lower corner of the box [default: 0,0,0].
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    lower: Option<String>,
    /// Upper corner of the box [default: 1,1,1].
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    upper: Option<String>,
    /// Grid points per axis [default: 5].
    #[arg(long)]
    n: Option<usize>,
    /// Central-difference step [default: 1e-4].
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Tolerance for residuals and |∇q| [default: 1e-6].
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args)]
struct TransformArgs {
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Angle(args) => commands::angle(args),
        Command::Iterate(args) => commands::iterate(args),
        Command::CheckFields(args) => commands::check_fields(args),
        Command::Transform(args) => commands::transform(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
