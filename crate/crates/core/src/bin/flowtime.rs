//! Command-line front end: solve, verify, normalize, integralize, open
//! shop, hardness generation, the brute-force oracle and Gantt charts.
//!
//! Exit codes: 0 success, 1 usage/parse error, 2 verification failure,
//! 3 oracle size-guard refusal. Errors print one machine-readable line
//! `E_<CODE>: message` to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flowtime_core::error::Error;
use flowtime_core::hardness::{self, GeneralInstance, ThreePartition};
use flowtime_core::openshop::{self, OpenShopInstance};
use flowtime_core::schedule::{Schedule, ScheduleWire};
use flowtime_core::{flow, gantt, lp, normalize, Instance};

#[derive(Parser)]
#[command(name = "flowtime", version, about = "Exact preemptive scheduling of equal-length jobs, minimizing total completion time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScheduleInput {
    /// Instance JSON the schedule belongs to.
    #[arg(long, value_name = "INSTANCE")]
    instance: PathBuf,
    /// Schedule JSON.
    #[arg(value_name = "SCHEDULE")]
    schedule: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an optimal schedule; prints the exact objective.
    Solve {
        #[arg(value_name = "INSTANCE")]
        instance: PathBuf,
        /// Write the schedule JSON here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also convert the result into an integral schedule.
        #[arg(long)]
        integral: bool,
        /// Dump the linear program as human-readable inequalities
        /// (debugging aid, not a stable format).
        #[arg(long, value_name = "PATH")]
        dump_lp: Option<PathBuf>,
    },
    /// Check a schedule against every structural condition.
    Verify {
        #[command(flatten)]
        input: ScheduleInput,
    },
    /// Turn a schedule into a busy, irreducible one.
    Normalize {
        #[command(flatten)]
        input: ScheduleInput,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Log one line per applied reduction to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Move all preemptions to integer times without losing optimality.
    Integralize {
        #[command(flatten)]
        input: ScheduleInput,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Dump the flow network in DOT format for visual inspection.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Solve a unit-time open-shop instance.
    Openshop {
        #[arg(value_name = "INSTANCE")]
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the hardness instance of a 3-Partition input; prints the
    /// threshold D.
    GenerateHard {
        #[arg(value_name = "THREE_PARTITION")]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact optimum of a small instance by dynamic programming.
    Oracle {
        #[arg(value_name = "INSTANCE")]
        instance: PathBuf,
        /// Input has per-job processing times.
        #[arg(long)]
        general: bool,
        /// Search preemptions on the half-unit grid instead of integers.
        #[arg(long)]
        half_grid: bool,
    },
    /// Render a schedule as an SVG Gantt chart.
    Gantt {
        #[command(flatten)]
        input: ScheduleInput,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Pixels per time unit.
        #[arg(long, default_value_t = 20)]
        scale: u32,
    },
}

/// One machine-readable error line plus the exit code.
struct CliError {
    code: &'static str,
    message: String,
    exit: u8,
}

impl CliError {
    fn new(code: &'static str, exit: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into(), exit }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SizeGuard { .. } => CliError::new("E_GUARD", 3, e.to_string()),
            Error::InvalidInstance(_) | Error::InvalidArgument(_) => {
                CliError::new("E_PARSE", 1, e.to_string())
            }
            Error::InvalidSchedule { .. } => CliError::new("E_SCHEDULE", 1, e.to_string()),
            Error::NonIntegral(_) | Error::Precondition(_) => {
                CliError::new("E_ARG", 1, e.to_string())
            }
            Error::Infeasible(_) => CliError::new("E_INTERNAL", 1, e.to_string()),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::new("E_IO", 1, format!("cannot read {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::new("E_PARSE", 1, format!("{}: {e}", path.display()))
    })
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| {
            CliError::new("E_IO", 1, format!("cannot write {}: {e}", p.display()))
        }),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn load_schedule(input: &ScheduleInput) -> Result<(Instance, Schedule), CliError> {
    let instance: Instance = read_json(&input.instance)?;
    let wire: ScheduleWire = read_json(&input.schedule)?;
    let schedule = Schedule::from_wire(instance.clone(), wire)?;
    Ok((instance, schedule))
}

fn schedule_json(schedule: &Schedule) -> String {
    serde_json::to_string_pretty(&schedule.to_wire()).expect("schedule serializes")
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve { instance, output, integral, dump_lp } => {
            let instance: Instance = read_json(&instance)?;
            if let Some(path) = &dump_lp {
                let text = lp::build_lp(&instance).dump_text();
                fs::write(path, text).map_err(|e| {
                    CliError::new("E_IO", 1, format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let (mut schedule, objective) = lp::solve(&instance);
            if integral {
                schedule = flow::integralize(&instance, &schedule)?;
            }
            println!("{objective}");
            write_output(&output, &schedule_json(&schedule))?;
            Ok(0)
        }
        Command::Verify { input } => {
            let (_, schedule) = load_schedule(&input)?;
            let report = schedule.verify();
            println!("{report}");
            Ok(if report.passed() { 0 } else { 2 })
        }
        Command::Normalize { input, output, trace } => {
            let (instance, schedule) = load_schedule(&input)?;
            let busy = normalize::make_busy(&schedule)?;
            let (irreducible, traces) = normalize::make_irreducible_traced(&busy)?;
            if trace {
                for t in &traces {
                    eprintln!("{t}");
                }
            }
            let _ = instance;
            println!("{}", irreducible.objective());
            write_output(&output, &schedule_json(&irreducible))?;
            Ok(0)
        }
        Command::Integralize { input, output, dot } => {
            let (instance, schedule) = load_schedule(&input)?;
            if let Some(path) = &dot {
                let network = flow::build_network(&instance, &schedule)?;
                fs::write(path, network.to_dot()).map_err(|e| {
                    CliError::new("E_IO", 1, format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let integral = flow::integralize(&instance, &schedule)?;
            println!("{}", integral.objective());
            write_output(&output, &schedule_json(&integral))?;
            Ok(0)
        }
        Command::Openshop { instance, output } => {
            let os: OpenShopInstance = read_json(&instance)?;
            let (schedule, objective) = openshop::solve_openshop(&os)?;
            println!("{objective}");
            let json =
                serde_json::to_string_pretty(&schedule).expect("schedule serializes");
            write_output(&output, &json)?;
            Ok(0)
        }
        Command::GenerateHard { input, output } => {
            let tp: ThreePartition = read_json(&input)?;
            let hard = hardness::generate(&tp)?;
            println!("{}", hard.threshold);
            let json = serde_json::to_string_pretty(&hard.instance)
                .expect("instance serializes");
            write_output(&output, &json)?;
            Ok(0)
        }
        Command::Oracle { instance, general, half_grid } => {
            let optimum = if general {
                let gi: GeneralInstance = read_json(&instance)?;
                hardness::brute_force_general(&gi)?
            } else {
                let inst: Instance = read_json(&instance)?;
                hardness::brute_force_equal_p(&inst, !half_grid)?
            };
            println!("{optimum}");
            Ok(0)
        }
        Command::Gantt { input, output, scale } => {
            let (_, schedule) = load_schedule(&input)?;
            let svg = gantt::emit_gantt(&schedule, scale);
            write_output(&output, &svg)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}: {}", e.code, e.message);
            ExitCode::from(e.exit)
        }
    }
}
