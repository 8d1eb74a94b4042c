//! `ising-echo`: runs scenario files and figure presets, writing CSV tables
//! and gnuplot scripts.
//!
//! Exit status: 0 success, 1 invalid input, 2 runtime or numerical failure,
//! 3 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ising_echo::runner::{parse_config, preset, presets, run_scenario, write_results, Scenario};
use ising_echo::{Error, ErrorClass};

#[derive(Parser)]
#[command(name = "ising-echo", version, about = "Echo and concurrence of two qubits on a quenched Ising chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (`key = value` lines).
    Run {
        config: PathBuf,
        /// Output CSV; overrides the `output` key. Defaults to `<name>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset.
    Preset {
        name: String,
        /// Directory for `<name>.csv` and `<name>.gp`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the presets and the figure each reproduces.
    ListPresets,
    /// Compare free-fermion and dense echoes on random protocols.
    OracleCompare {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the comparison table to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Largest pointwise disagreement accepted by `oracle-compare`.
const ORACLE_TOLERANCE: f64 = 1e-7;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Validation => 1,
                ErrorClass::Runtime => 2,
                ErrorClass::Io => 3,
            })
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
            let scenario = parse_config(&text)?;
            let path = out
                .or_else(|| scenario.output.clone())
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", scenario.name)));
            run_and_write(&scenario, &path)
        }
        Command::Preset { name, out } => {
            let p = preset(&name).ok_or_else(|| {
                Error::InvalidInput(format!("unknown preset `{name}`; see `list-presets`"))
            })?;
            let scenario = p.scenario()?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            run_and_write(&scenario, &out.join(format!("{}.csv", p.name)))
        }
        Command::ListPresets => {
            let width = presets().iter().map(|p| p.name.len()).max().unwrap_or(0);
            for p in presets() {
                println!("{:width$}  {:18}  {}", p.name, p.figure, p.description);
            }
            Ok(())
        }
        Command::OracleCompare { n, cases, seed, out } => {
            let mut scenario = preset("oracle-compare").expect("built-in preset").scenario()?;
            scenario.base.n = n;
            scenario.cases = cases;
            scenario.seed = seed;
            let table = run_scenario(&scenario)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                report(&write_results(&table, &dir.join("oracle-compare.csv"))?.csv);
            }
            let worst: f64 = table.meta("max_abs_diff").and_then(|v| v.parse().ok()).unwrap_or(f64::NAN);
            println!("n = {n}, cases = {cases}, seed = {seed}: max |L_fermion - L_oracle| = {worst:.3e}");
            if worst < ORACLE_TOLERANCE {
                Ok(())
            } else {
                Err(Error::OracleMismatch { worst, tolerance: ORACLE_TOLERANCE })
            }
        }
    }
}

fn run_and_write(scenario: &Scenario, path: &Path) -> Result<(), Error> {
    let table = run_scenario(scenario)?;
    let files = write_results(&table, path)?;
    report(&files.csv);
    report(&files.plot_script);
    Ok(())
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}
