use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tbcavity::cli::{run_eigen, run_simulate, run_sweep, write_simulation, CliError, Scenario};
use tbcavity::Method;

#[derive(Parser)]
#[command(name = "tbcavity", version, about = "Position-based qubits in a multilevel quantum cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the initial state and write timeseries.csv and summary.json.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the scenario's propagator.
        #[arg(long, value_parser = parse_method)]
        propagator: Option<Method>,
        /// Overrides the scenario's oracle step count.
        #[arg(long)]
        oracle_steps: Option<usize>,
    },
    /// Print per-block eigenenergies and eigenvectors at one time as JSON.
    Eigen {
        scenario: PathBuf,
        #[arg(long)]
        time: f64,
    },
    /// Run one simulation per value of a scenario parameter.
    Sweep {
        scenario: PathBuf,
        /// Dotted path to a number, e.g. `qubits.0.ts_mag.value`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; an empty string sweeps nothing.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Write sweep.csv here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown propagator `{s}`, expected closed_form, exp_integral or oracle"))
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Config(format!("--values: `{s}` is not a number"))))
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            propagator,
            oracle_steps,
        } => {
            let mut doc: serde_json::Value =
                serde_json::from_str(&read(&scenario)?).map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(m) = propagator {
                doc["propagator"] = serde_json::to_value(m).expect("method serializes");
            }
            if let Some(n) = oracle_steps {
                doc["oracle_steps"] = n.into();
            }
            let scn = Scenario::from_value(doc)?;
            let sim = run_simulate(&scn)?;
            write_simulation(&scn, &sim, &out)
        }
        Command::Eigen { scenario, time } => {
            let scn = Scenario::from_json_str(&read(&scenario)?)?;
            let report = run_eigen(&scn, time)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => {
            let doc = serde_json::from_str(&read(&scenario)?).map_err(|e| CliError::Config(e.to_string()))?;
            let csv = run_sweep(&doc, &param, &parse_values(&values)?)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    let path = dir.join("sweep.csv");
                    std::fs::write(&path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
                }
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
