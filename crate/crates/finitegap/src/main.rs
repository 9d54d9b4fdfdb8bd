//! Command-line front end: runs mode-density, field, energy, and emission
//! sweeps from JSON run configurations, or the validation suite.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use finitegap::config::Config;
use finitegap::dom::DomRoute;
use finitegap::error::{Error, Result};
use finitegap::sweep::{self, SweepMeta, SweepOutput};
use finitegap::validate::{self, Mutation};

#[derive(Parser)]
#[command(
    name = "finitegap",
    version,
    about = "Mode density, modal fields, and dipole emission in finite periodic dielectric stacks",
    after_help = "Each subcommand falls back to a bundled configuration when --config is \
omitted: dom -> fig4, field -> fig5, energy -> fig6, emission and validate -> fig7."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of modes over the frequency grid, scaled by the bulk velocity.
    Dom(RouteArgs),
    /// Field intensity profile of one cell over the frequency grid.
    Field(FieldArgs),
    /// Stored mode energy, total and per cell, over the frequency grid.
    Energy(CommonArgs),
    /// Bulk-relative emission rate of each configured dipole.
    Emission(RouteArgs),
    /// Cross-route and oracle validation suite; exits 1 on any failure.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; a bundled default is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frequency grid points, overriding the config.
    #[arg(long)]
    points: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RouteArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Density-of-modes route.
    #[arg(long, value_enum, default_value_t = RouteArg::Phase)]
    route: RouteArg,
}

#[derive(Args)]
struct FieldArgs {
    /// JSON run configuration; a bundled default is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cell to profile (1-based); defaults to the config's field_cell,
    /// then to the middle cell.
    #[arg(long)]
    cell: Option<usize>,
    /// Spatial sample points per cell (the frequency grid comes from the
    /// config).
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON run configuration; a bundled default is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Deliberately corrupt one computation to confirm the suite notices.
    #[arg(long, value_enum, hide = true)]
    mutate: Option<MutationArg>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Phase,
    Closed,
    Qw,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MutationArg {
    MatrixPower,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Dom(args) => {
            let (config, scenario) = load(&args.common.config, "fig4", args.common.points)?;
            let routes = resolve_routes(args.route, &scenario.stack);
            let output = sweep::dom_sweep(
                &scenario.stack,
                &scenario.grid,
                &routes,
                SweepMeta::new("dom", config.hash()),
            )?;
            emit(&output, args.common.format, &args.common.out)?;
        }
        Command::Field(args) => {
            let (config, scenario) = load(&args.config, "fig5", None)?;
            let cell = args
                .cell
                .or(scenario.field_cell)
                .unwrap_or((scenario.stack.periods() + 1) / 2);
            if cell == 0 || cell > scenario.stack.periods() {
                return Err(Error::Config {
                    path: "--cell".to_string(),
                    message: format!("cell {cell} outside 1..={}", scenario.stack.periods()),
                });
            }
            if args.points < 2 {
                return Err(Error::Config {
                    path: "--points".to_string(),
                    message: format!("need at least 2 sample points, got {}", args.points),
                });
            }
            let output = sweep::field_sweep(
                &scenario.stack,
                cell,
                &scenario.grid,
                args.points,
                SweepMeta::new("field", config.hash()),
            )?;
            emit(&output, args.format, &args.out)?;
        }
        Command::Energy(args) => {
            let (config, scenario) = load(&args.config, "fig6", args.points)?;
            let output = sweep::energy_sweep(
                &scenario.stack,
                &scenario.grid,
                SweepMeta::new("energy", config.hash()),
            )?;
            emit(&output, args.format, &args.out)?;
        }
        Command::Emission(args) => {
            let (config, scenario) = load(&args.common.config, "fig7", args.common.points)?;
            if scenario.dipoles.is_empty() {
                return Err(Error::Config {
                    path: "dipoles".to_string(),
                    message: "at least one dipole placement is required".to_string(),
                });
            }
            let route = match args.route {
                RouteArg::Phase => DomRoute::PhaseDerivative,
                RouteArg::Closed => DomRoute::ClosedForm,
                RouteArg::Qw => DomRoute::QuarterWave,
                // Emission needs a single density; "all" means the default.
                RouteArg::All => DomRoute::PhaseDerivative,
            };
            let output = sweep::emission_sweep(
                &scenario.stack,
                &scenario.dipoles,
                &scenario.grid,
                route,
                SweepMeta::new("emission", config.hash()),
            )?;
            emit(&output, args.common.format, &args.common.out)?;
        }
        Command::Validate(args) => {
            let (_, scenario) = load(&args.config, "fig7", None)?;
            let mutation = args.mutate.map(|m| match m {
                MutationArg::MatrixPower => Mutation::MatrixPower,
            });
            let report = validate::run_suite(&scenario, mutation);
            with_output(&args.out, |out| report.write_table(out))?;
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Loads the configuration, applies the grid-points override, and resolves
/// the scenario. The reported config hash includes the override.
fn load(
    path: &Option<PathBuf>,
    default_builtin: &str,
    points: Option<usize>,
) -> Result<(Config, finitegap::config::Scenario)> {
    let mut config = match path {
        Some(p) => Config::from_path(p)?,
        None => Config::builtin(default_builtin)?,
    };
    if let Some(points) = points {
        config.grid.points = points;
    }
    let scenario = config.build()?;
    Ok((config, scenario))
}

/// "all" means every route the cell supports; the quarter-wave closed form
/// exists only for quarter-wave cells.
fn resolve_routes(route: RouteArg, stack: &finitegap::Stack) -> Vec<DomRoute> {
    match route {
        RouteArg::Phase => vec![DomRoute::PhaseDerivative],
        RouteArg::Closed => vec![DomRoute::ClosedForm],
        RouteArg::Qw => vec![DomRoute::QuarterWave],
        RouteArg::All => {
            let mut routes = vec![DomRoute::PhaseDerivative, DomRoute::ClosedForm];
            if stack.cell().is_quarter_wave() {
                routes.push(DomRoute::QuarterWave);
            }
            routes
        }
    }
}

fn emit(output: &SweepOutput, format: Format, out: &Option<PathBuf>) -> Result<()> {
    with_output(out, |writer| match format {
        Format::Csv => output.write_csv(writer),
        Format::Json => output.write_json(writer),
    })
}

fn with_output(
    out: &Option<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(path) => {
            let mut writer = BufWriter::new(File::create(path)?);
            body(&mut writer)?;
            writer.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)
        }
    }
}
