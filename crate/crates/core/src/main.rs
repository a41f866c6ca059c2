use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use auv_energy::collocation::CollocationSolution;
use auv_energy::sim::experiments::{compare_controllers, linspace, run_oracle, sweep_horizon, sweep_initial_conditions};
use auv_energy::sim::{run_scenario, ConstraintEnvelope, Scenario, SimLog};

#[derive(Parser)]
#[command(name = "auv-energy", version, about = "Energy-optimal AUV surge control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Directory for CSV and report output.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-loop run with the controller named in the scenario.
    Simulate(Io),
    /// Collocation oracle and all three controllers on one scenario.
    Compare(Io),
    /// Energy-optimal MPC over a list of prediction horizons.
    SweepHorizon {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10,15,20,25")]
        horizons: Vec<usize>,
        /// Timing repeats per horizon.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// RTEO-MPC and T-MPC over a grid of initial positions and speeds.
    SweepIc {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0.0)]
        x0_min: f64,
        /// Defaults to the scenario destination.
        #[arg(long)]
        x0_max: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        u0_min: f64,
        #[arg(long, default_value_t = 0.5)]
        u0_max: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 6)]
        grid: usize,
    },
    /// Direct-collocation reference solution only.
    Oracle(Io),
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn prepare(io: &Io) -> Result<Scenario, String> {
    let sc = Scenario::load(&io.scenario).map_err(|e| format!("{}: {e}", io.scenario.display()))?;
    fs::create_dir_all(&io.out).map_err(|e| format!("cannot create {}: {e}", io.out.display()))?;
    Ok(sc)
}

fn simulate(io: &Io) -> Result<String, String> {
    let sc = prepare(io)?;
    let log = run_scenario(&sc).map_err(|e| e.to_string())?;
    write(&io.out, "trace.csv", &log.trace_csv())?;
    write(&io.out, "decisions.csv", &log.decisions_csv())?;
    write(&io.out, "summary.csv", &format!("{}\n{}\n", SimLog::SUMMARY_HEADER, log.summary_row()))?;
    let audit = ConstraintEnvelope::default().audit(&log);
    let mut report = format!(
        "{}: {} after {:.1} s, energy {:.3} J (surge {:.3}, heave {:.3}, pitch {:.4}, yaw {:.4})\n\
         solver on {}/{} steps, avg {:.6} s, total {:.4} s, max {:.6} s\n",
        log.controller.label(),
        if log.reached { "arrived" } else { "time limit reached" },
        log.travel_time,
        log.ledger.total,
        log.ledger.surge,
        log.ledger.heave,
        log.ledger.pitch,
        log.ledger.yaw,
        log.solver_invocations(),
        log.records.len(),
        log.average_solve_time(),
        log.total_solve_time(),
        log.max_solve_time()
    );
    if audit.is_empty() {
        report.push_str("constraint envelope respected\n");
    } else {
        report.push_str(&format!("{} constraint violations, first: {}\n", audit.len(), audit[0]));
    }
    write(&io.out, "report.txt", &report)?;
    Ok(report)
}

fn compare(io: &Io) -> Result<String, String> {
    let sc = prepare(io)?;
    let report = compare_controllers(&sc).map_err(|e| e.to_string())?;
    for log in &report.runs {
        let tag = log.controller.label().to_lowercase().replace('-', "");
        write(&io.out, &format!("trace_{tag}.csv"), &log.trace_csv())?;
    }
    if let Some(rteo) = report.run(auv_energy::sim::ControllerKind::Rteo) {
        write(&io.out, "trace.csv", &rteo.trace_csv())?;
    }
    write(&io.out, "oracle.csv", &report.oracle.solution.to_csv())?;
    write(&io.out, "summary.csv", &report.summary_csv())?;
    let table = report.table();
    write(&io.out, "report.txt", &table)?;
    Ok(table)
}

fn oracle(io: &Io) -> Result<String, String> {
    let sc = prepare(io)?;
    let run = run_oracle(&sc).map_err(|e| e.to_string())?;
    let s: &CollocationSolution = &run.solution;
    write(&io.out, "oracle.csv", &s.to_csv())?;
    write(
        &io.out,
        "summary.csv",
        &format!(
            "{}\nDC,,,,,{},{},,{}\n",
            SimLog::SUMMARY_HEADER,
            s.energy,
            s.travel_time,
            run.solve_time
        ),
    )?;
    let report = format!(
        "collocation oracle: energy {:.3} J, travel time {:.2} s, {} segments\n\
         defect residual {:.2e}, KKT residual {:.2e}, {} iterations, {:.3} s\n",
        s.energy,
        s.travel_time,
        s.x.len() - 1,
        s.defect_residual,
        s.kkt_residual,
        s.iterations,
        run.solve_time
    );
    write(&io.out, "report.txt", &report)?;
    Ok(report)
}

fn run(cli: Cli) -> Result<String, String> {
    match cli.command {
        Command::Simulate(io) => simulate(&io),
        Command::Compare(io) => compare(&io),
        Command::Oracle(io) => oracle(&io),
        Command::SweepHorizon { io, horizons, repeats } => {
            let sc = prepare(&io)?;
            let sweep = sweep_horizon(&sc, &horizons, repeats, true).map_err(|e| e.to_string())?;
            write(&io.out, "summary.csv", &sweep.to_csv())?;
            let table = sweep.table();
            write(&io.out, "report.txt", &table)?;
            Ok(table)
        }
        Command::SweepIc { io, x0_min, x0_max, u0_min, u0_max, grid } => {
            let sc = prepare(&io)?;
            let x0s = linspace(x0_min, x0_max.unwrap_or(sc.xf), grid);
            let u0s = linspace(u0_min, u0_max, grid);
            let sweep = sweep_initial_conditions(&sc, &x0s, &u0s).map_err(|e| e.to_string())?;
            write(&io.out, "summary.csv", &sweep.to_csv())?;
            let table = sweep.table();
            write(&io.out, "report.txt", &table)?;
            Ok(table)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
