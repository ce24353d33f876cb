//! `gaspower`: command-line front end of the coupled gas/power simulator.
//!
//! Exit codes: 0 success, 2 usage or invalid settings, 3 unreadable or
//! invalid input, 4 initialization failure, 5 Newton failure during a time
//! step, 6 file system error, 7 mismatched result sets.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use gaspower_core::io::{self, ResultSet, SnapshotLevel, Summary};
use gaspower_core::solver::run_simulation;
use gaspower_core::{build_layout, build_network, read_scenario, CouplingKind, Error, ScenarioDescription};

// Writes to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! put {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "gaspower",
    version,
    about = "Transient simulation of coupled gas and power networks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Time step [s], overriding the scenario.
    #[arg(long, global = true, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Target cell length [m], overriding the scenario.
    #[arg(long, global = true, value_name = "METERS")]
    dx: Option<f64>,
    /// Node coupling condition, overriding the scenario.
    #[arg(long, global = true, value_name = "pressure|bernoulli")]
    coupling: Option<CouplingKind>,
    /// Newton residual tolerance, overriding the scenario.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Recorded snapshots.
    #[arg(
        long,
        global = true,
        value_name = "none|conversion|full",
        default_value = "conversion"
    )]
    snapshots: SnapshotLevel,
    /// Log filter, e.g. `info` or `gaspower_core=debug`.
    #[arg(long, global = true, env = "GASPOWER_LOG", default_value = "warn")]
    log_level: String,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario over its horizon and write the results to --out.
    Simulate,
    /// Compare two result directories of full-snapshot runs, one per
    /// coupling condition.
    CompareCouplings {
        pressure_run: PathBuf,
        bernoulli_run: PathBuf,
    },
    /// Import GasLib or Matpower data into the native scenario format.
    Convert {
        #[command(subcommand)]
        source: Convert,
    },
    /// Print gas totals of a result directory, recomputed from its CSV files.
    Report { results: PathBuf },
    /// Check a scenario without simulating.
    Validate,
}

#[derive(Subcommand)]
enum Convert {
    /// Gas network from a GasLib `.net` file.
    Gaslib {
        #[arg(long)]
        net: PathBuf,
        /// GasLib `.scn` nominations for boundary flows.
        #[arg(long)]
        nominations: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Power network from a Matpower case file.
    Matpower {
        #[arg(long)]
        case: PathBuf,
        /// Conversion table whose buses become the slack buses.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coupled scenario from both networks and a `bus,gas_node` table.
    Merge {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        nominations: PathBuf,
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidConfig(_) => 2,
            Error::Schema { .. }
            | Error::UnitMismatch { .. }
            | Error::DanglingReference { .. }
            | Error::InvalidConversion { .. }
            | Error::DisconnectedGas { .. }
            | Error::MissingSlack { .. }
            | Error::InvalidNetwork(_)
            | Error::Import { .. }
            | Error::Format { .. } => 3,
            Error::Initialization(_) => 4,
            Error::StepFailed { .. }
            | Error::NewtonFailed { .. }
            | Error::SingularJacobian(_)
            | Error::NonPositiveDensity { .. }
            | Error::PressureOutOfRange { .. } => 5,
            Error::Io { .. } => 6,
            Error::Mismatch(_) => 7,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.global.log_level).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate => simulate(g),
        Command::CompareCouplings {
            pressure_run,
            bernoulli_run,
        } => compare(g, pressure_run, bernoulli_run),
        Command::Convert { source } => convert(source),
        Command::Report { results } => report(g, results),
        Command::Validate => validate(g),
    }
}

/// Reads the scenario and applies the solver overrides.
fn scenario(g: &Global) -> Result<ScenarioDescription, Failure> {
    let path = g
        .scenario
        .as_ref()
        .ok_or_else(|| Failure::usage("--scenario is required"))?;
    let mut s = read_scenario(path)?;
    if let Some(dt) = g.dt {
        s.solver.dt = dt;
    }
    if let Some(dx) = g.dx {
        s.solver.dx = dx;
    }
    if let Some(c) = g.coupling {
        s.solver.coupling = c;
    }
    if let Some(tol) = g.tol {
        s.solver.tol = tol;
    }
    s.solver.validate()?;
    Ok(s)
}

fn print_json(value: &impl serde::Serialize) {
    say!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON values serialize")
    );
}

fn simulate(g: &Global) -> Outcome {
    let out = g.out.as_ref().ok_or_else(|| Failure::usage("--out is required"))?;
    let s = scenario(g)?;
    let net = build_network(&s)?;
    info!(
        "simulating {} h with dt = {} s, dx = {} m, {} coupling",
        s.solver.horizon / 3600.0,
        s.solver.dt,
        s.solver.dx,
        s.solver.coupling
    );
    let results = run_simulation(net, s.solver.clone(), g.snapshots)?;
    io::write_results(&results, out)?;
    let summary = Summary::of(&results);
    if g.json {
        print_json(&summary);
    } else {
        say!("wrote {} time levels to {}", summary.time_levels, out.display());
        print_totals(&summary);
    }
    Ok(())
}

fn print_totals(summary: &Summary) {
    say!("{:<16} {:>16} {:>16}", "node", "consumed [m3]", "generated [m3]");
    for n in &summary.per_node {
        say!(
            "{:<16} {:>16.1} {:>16.1}",
            n.node,
            n.totals.consumed_m3,
            n.totals.generated_m3
        );
    }
    say!(
        "{:<16} {:>16.1} {:>16.1}",
        "total",
        summary.totals.consumed_m3,
        summary.totals.generated_m3
    );
}

fn compare(g: &Global, pressure_run: &Path, bernoulli_run: &Path) -> Outcome {
    let p = io::read_results(pressure_run)?;
    let b = io::read_results(bernoulli_run)?;
    let cmp = io::compare_couplings(&p, &b)?;
    if let Some(out) = &g.out {
        fs::create_dir_all(out).map_err(|e| Error::Io {
            path: out.clone(),
            source: e,
        })?;
        let path = out.join("comparison.json");
        let text = serde_json::to_string_pretty(&cmp).expect("comparison serializes") + "\n";
        fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
    }
    if g.json {
        print_json(&cmp);
    } else {
        put!("{cmp}");
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}

fn emit(s: &ScenarioDescription, output: Option<&PathBuf>) -> Outcome {
    let text = s.to_toml()?;
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => put!("{text}"),
    }
    Ok(())
}

fn convert(source: &Convert) -> Outcome {
    match source {
        Convert::Gaslib {
            net,
            nominations,
            output,
        } => {
            let mut gas = io::import_gaslib(&read(net)?)?;
            if let Some(n) = nominations {
                io::apply_nominations(&mut gas, &read(n)?)?;
            }
            let s = ScenarioDescription {
                gas,
                ..Default::default()
            };
            emit(&s, output.as_ref())
        }
        Convert::Matpower { case, table, output } => {
            let slacks = match table {
                Some(t) => Some(io::conversion_buses(&io::parse_conversion_table(&read(t)?)?)),
                None => None,
            };
            let power = io::import_matpower(&read(case)?, slacks.as_deref())?;
            let s = ScenarioDescription {
                power,
                ..Default::default()
            };
            emit(&s, output.as_ref())
        }
        Convert::Merge {
            net,
            nominations,
            case,
            table,
            output,
        } => {
            let s = io::assemble(&read(net)?, &read(nominations)?, &read(case)?, &read(table)?)?;
            emit(&s, output.as_ref())
        }
    }
}

fn report(g: &Global, dir: &Path) -> Outcome {
    let results: ResultSet = io::read_results(dir)?;
    let summary = Summary::of(&results);
    if g.json {
        print_json(&json!({
            "results": dir,
            "coupling": summary.coupling,
            "time_levels": summary.time_levels,
            "totals": summary.totals,
            "per_node": summary.per_node,
        }));
    } else {
        print_totals(&summary);
    }
    Ok(())
}

fn validate(g: &Global) -> Outcome {
    let s = scenario(g)?;
    let net = build_network(&s)?;
    let c = build_layout(&net, s.solver.dx).counts();
    if c.unknowns() != c.equations() {
        return Err(Failure {
            code: 3,
            message: format!("system is not square: {c:?}"),
        });
    }
    let pipes = net.pipes().count();
    if g.json {
        print_json(&json!({
            "gas_nodes": net.nodes.len(),
            "gas_edges": net.edges.len(),
            "pipes": pipes,
            "buses": net.buses.len(),
            "conversions": net.conversions.len(),
            "unknowns": c.unknowns(),
            "equations": c.equations(),
            "steps": s.solver.steps(),
        }));
    } else {
        say!(
            "ok: {} gas nodes, {} gas edges ({} pipes), {} buses, {} conversions",
            net.nodes.len(),
            net.edges.len(),
            pipes,
            net.buses.len(),
            net.conversions.len()
        );
        say!(
            "{} unknowns, {} equations, {} time steps",
            c.unknowns(),
            c.equations(),
            s.solver.steps()
        );
    }
    Ok(())
}
