use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use reeb_lab::{parse_config, run_task, DumpPlan};

/// Numerical workbench for Reeb dynamics and symplectic disc fillings on
/// star-shaped hypersurfaces in R^4.
#[derive(Parser)]
#[command(name = "reeb-lab", version, about)]
struct Args {
    /// Path to the run configuration file.
    config: PathBuf,

    /// Directory for the dense CSV/JSON sample dumps.
    #[arg(long, value_name = "DIR")]
    dump_dir: Option<PathBuf>,

    /// Print only the verdict JSON; write no dumps.
    #[arg(long)]
    json_only: bool,
}

const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_VERIFICATION_FALSE: u8 = 3;

fn main() -> ExitCode {
    let args = Args::parse();

    if let Ok(raw) = std::env::var("REEB_LAB_THREADS") {
        let Ok(n) = raw.parse::<usize>() else {
            eprintln!("REEB_LAB_THREADS must be a non-negative integer, got '{raw}'");
            return ExitCode::from(EXIT_INVALID_INPUT);
        };
        if let Err(e) = reeb_lab_core::par::init_threads(n) {
            eprintln!("{e}");
            return ExitCode::from(EXIT_INVALID_INPUT);
        }
    }

    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("reading {}: {e}", args.config.display());
            return ExitCode::from(EXIT_INVALID_INPUT);
        }
    };

    let cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return ExitCode::from(EXIT_INVALID_INPUT);
        }
    };

    let plan = DumpPlan { dir: args.dump_dir, json_only: args.json_only };
    match run_task(&cfg, &plan) {
        Ok(verdict) => {
            print!("{}", verdict.to_json());
            if verdict.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFICATION_FALSE)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
