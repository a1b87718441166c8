use clap::{Args, Parser, Subcommand};
use efqs_cli::config::ScenarioConfig;
use efqs_cli::predict::{replica_report, PredictArgs};
use efqs_cli::scenario::run_scenario;
use efqs_cli::sweeps::{entropy_sweep, filter_sweep, time_sweep, SweepParams};
use efqs_cli::validation::{print_report, run_criteria, Level};
use efqs_cli::AppError;
use std::path::PathBuf;

/// Energy-filtered quantum states on a spin-1/2 chain: scenario runner,
/// validation suite, and closed-form replica predictions.
#[derive(Parser)]
#[command(name = "efqs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write one CSV per measurement family
    Run {
        /// Path to an INI scenario file
        config: PathBuf,
        /// Overwrite results produced by a different config
        #[arg(long)]
        force: bool,
    },
    /// Run the validation suite; exits 1 if any criterion fails
    Validate {
        /// Reach L = 12 (default quick level stays at L <= 10)
        #[arg(long)]
        full: bool,
        /// Comma-separated criterion numbers to run (default all)
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
    },
    /// Print closed-form replica quantities for one parameter point
    ReplicaPredict {
        /// Replica index (any positive value; integers get eigenvalue lists)
        #[arg(long)]
        n: f64,
        /// Rescaled filter width
        #[arg(long, default_value_t = 1.0)]
        tau_tilde: f64,
        /// Energy-variance density
        #[arg(long, default_value_t = 1.0)]
        eps2: f64,
        /// Subsystem fraction in [0, 1]
        #[arg(long)]
        f: f64,
        /// Chain volume for volume-scaled quantities
        #[arg(long, default_value_t = 1)]
        volume: usize,
        /// Physical filter width; adds the asymptotic entropy line
        #[arg(long)]
        tau: Option<f64>,
        /// Twist growth rate for the asymptotic entropy
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Number of region cuts
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        /// Include the subleading log correction where it applies
        #[arg(long)]
        subleading: bool,
    },
    /// Sweep filter widths and record the energy variance (variance.csv schema)
    FilterSweep(SweepArgs),
    /// Sweep filter widths and record mid-chain S^z (observables.csv schema)
    TimeSweep(SweepArgs),
    /// Sweep filter widths and record half-chain entropies (entropies.csv schema)
    EntropySweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Chain length
    #[arg(long = "L")]
    l: usize,
    /// Coupling strength
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    /// Transverse field
    #[arg(long, default_value_t = 1.2)]
    hx: f64,
    /// Longitudinal field
    #[arg(long, default_value_t = 0.8)]
    hz: f64,
    /// Initial product state: neel or yplus
    #[arg(long, default_value = "neel")]
    state: String,
    /// Largest filter width; the grid starts at 0
    #[arg(long, default_value_t = 2.0)]
    tau_max: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 9)]
    tau_steps: usize,
    /// Filter backend: exact, iterative, or fourier
    #[arg(long, default_value = "exact")]
    backend: String,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

impl SweepArgs {
    fn params(&self) -> SweepParams {
        SweepParams {
            l: self.l,
            j: self.j,
            h_x: self.hx,
            h_z: self.hz,
            state: self.state.clone(),
            tau_max: self.tau_max,
            tau_steps: self.tau_steps,
            backend: self.backend.clone(),
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    std::process::exit(dispatch(cli));
}

fn report_error(e: &AppError) -> i32 {
    eprintln!("{e}");
    e.exit_code()
}

fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { config, force } => {
            let cfg = match ScenarioConfig::from_file(&config) {
                Ok(cfg) => cfg,
                Err(e) => return report_error(&e),
            };
            match run_scenario(&cfg, force) {
                Ok(summary) => {
                    println!(
                        "wrote {} rows across {} files in {}",
                        summary.rows,
                        summary.files.len(),
                        cfg.output_dir.display()
                    );
                    0
                }
                Err(e) => report_error(&e),
            }
        }
        Command::Validate { full, criteria } => {
            if let Some(bad) = criteria.iter().find(|i| **i < 1 || **i > 13) {
                return report_error(&AppError::Config(format!(
                    "--criteria: {bad} is outside 1..=13"
                )));
            }
            let level = if full { Level::Full } else { Level::Quick };
            let selected = if criteria.is_empty() {
                None
            } else {
                Some(criteria.as_slice())
            };
            if print_report(&run_criteria(level, selected)) {
                0
            } else {
                1
            }
        }
        Command::ReplicaPredict {
            n,
            tau_tilde,
            eps2,
            f,
            volume,
            tau,
            gamma,
            area,
            subleading,
        } => {
            let args = PredictArgs {
                n,
                tau_tilde,
                eps2,
                f,
                volume,
                tau,
                gamma,
                area,
                subleading,
            };
            match replica_report(&args) {
                Ok(text) => {
                    print!("{text}");
                    0
                }
                Err(e) => report_error(&e),
            }
        }
        Command::FilterSweep(a) => write_sweep(&a, filter_sweep),
        Command::TimeSweep(a) => write_sweep(&a, time_sweep),
        Command::EntropySweep(a) => write_sweep(&a, entropy_sweep),
    }
}

fn write_sweep(
    args: &SweepArgs,
    sweep: fn(&SweepParams) -> Result<efqs::ResultTable, AppError>,
) -> i32 {
    match sweep(&args.params()) {
        Ok(table) => match std::fs::write(&args.out, table.to_csv()) {
            Ok(()) => {
                println!("wrote {} rows to {}", table.len(), args.out.display());
                0
            }
            Err(e) => report_error(&AppError::Io(e)),
        },
        Err(e) => report_error(&e),
    }
}
