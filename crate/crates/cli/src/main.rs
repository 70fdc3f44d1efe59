use cara_kit::commands::{self, BoundsMode, CommandOutput};
use cara_kit::config::{OutputFormat, Overrides, RunConfig};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Decide, diagnose, and visualize whether F*(f o phi) preserves the class
/// of normalized positive-real-part functions on the unit disk.
#[derive(Parser)]
#[command(name = "cara-kit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Radius refinement steps of the scan grid
    #[arg(long = "grid-J")]
    grid_j: Option<usize>,
    /// Angles per circle of the scan grid
    #[arg(long = "grid-M")]
    grid_m: Option<usize>,
    /// Outermost grid radius (must be below 1)
    #[arg(long)]
    rmax: Option<f64>,
    /// Convergence tolerance for fixed-point products
    #[arg(long)]
    tol: Option<f64>,
    /// Number of rotations sampled by the rotation sweep
    #[arg(long = "lambda-samples")]
    lambda_samples: Option<usize>,
    /// Output file (reports) or directory (examples)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for tabular results
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl CommonOpts {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid_j: self.grid_j,
            grid_m: self.grid_m,
            r_max: self.rmax,
            tol: self.tol,
            lambda_samples: self.lambda_samples,
            fixed_point_radius: None,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the pair (F, phi) preserves the class on the grid
    Check {
        /// Multiplication symbol F (expression in z)
        #[arg(long = "F")]
        f_expr: String,
        /// Composition symbol phi (expression in z)
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Construct the fixed point of an admissible, non-rotation pair
    #[command(name = "fixed-point")]
    FixedPoint {
        /// Multiplication symbol F (expression in z)
        #[arg(long = "F")]
        f_expr: String,
        /// Composition symbol phi (expression in z)
        #[arg(long)]
        phi: String,
        /// Compact radius on which convergence is enforced
        #[arg(long)]
        r: Option<f64>,
        /// Optional seed function for a seed-independence check
        #[arg(long = "f")]
        seed: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Reproduce one of the worked examples (1, 2, or 3)
    Examples {
        #[arg(long)]
        which: u8,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print a sufficiency threshold
    Bounds {
        #[arg(long, value_enum)]
        mode: BoundsMode,
        value: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Echo the canonical form of an expression
    Parse {
        /// Expression to parse
        #[arg(long = "f")]
        expr: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn resolve_config(common: &CommonOpts, extra_radius: Option<f64>) -> Result<RunConfig, CommandOutput> {
    let mut overrides = common.overrides();
    overrides.fixed_point_radius = extra_radius;
    RunConfig::resolve(&overrides).map_err(|e| {
        // config failures cannot echo a config; report with defaults
        let fallback = RunConfig::default();
        let payload = cara_kit::report::InputErrorPayload {
            input: "config".to_string(),
            message: e.to_string(),
            offset: None,
            expected: vec![],
        };
        CommandOutput {
            json: cara_kit::report::ReportEnvelope::new(
                command_echo(),
                &fallback,
                "input_error",
                payload,
            )
            .to_json(),
            exit_code: 2,
        }
    })
}

fn command_echo() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo = command_echo();
    let output = match &cli.command {
        Command::Check { f_expr, phi, common } => match resolve_config(common, None) {
            Ok(config) => commands::cmd_check(&config, echo, f_expr, phi),
            Err(out) => out,
        },
        Command::FixedPoint {
            f_expr,
            phi,
            r,
            seed,
            common,
        } => match resolve_config(common, *r) {
            Ok(config) => {
                commands::cmd_fixed_point(&config, echo, f_expr, phi, seed.as_deref())
            }
            Err(out) => out,
        },
        Command::Examples { which, common } => match resolve_config(common, None) {
            Ok(config) => commands::cmd_examples(&config, echo, *which),
            Err(out) => out,
        },
        Command::Bounds { mode, value, common } => match resolve_config(common, None) {
            Ok(config) => commands::cmd_bounds(&config, echo, *mode, *value),
            Err(out) => out,
        },
        Command::Parse { expr, common } => match resolve_config(common, None) {
            Ok(config) => commands::cmd_parse(&config, echo, expr),
            Err(out) => out,
        },
    };
    println!("{}", output.json);
    ExitCode::from(output.exit_code as u8)
}
