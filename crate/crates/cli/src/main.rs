use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dynlag::RunError;

/// Curvature, reduction and focal-point analyses of Hamiltonian systems.
#[derive(Parser)]
#[command(name = "dynlag", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses requested by a config file.
    Run {
        config: PathBuf,
    },
    /// Inspect the model library.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Run the invariant suite and the determinism check.
    Verify {
        /// Seed of the randomized suites.
        #[arg(long, default_value_t = 20261018)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ModelsAction {
    /// List model names accepted by configs.
    List,
}

fn report_error(e: &RunError) -> ExitCode {
    eprintln!("dynlag: {e}");
    ExitCode::from(e.exit_code())
}

fn verify(seed: u64) -> ExitCode {
    let mut ok = true;
    for outcome in lagcurv::verify::run_library_criteria(seed) {
        ok &= outcome.passed();
        println!("{outcome}");
    }
    let scratch = std::env::temp_dir().join(format!("dynlag-verify-{}", std::process::id()));
    match dynlag::determinism_check(&scratch) {
        Ok(runs) => {
            let bad: Vec<String> = runs.iter().filter_map(|(n, d)| d.as_ref().map(|d| format!("{n}: {d}"))).collect();
            let names: Vec<&str> = runs.iter().map(|(n, _)| n.as_str()).collect();
            let pass = bad.is_empty();
            ok &= pass;
            println!(
                "criterion 11 [{}] byte-identical reruns; differing configs = {} (tol 0) — {}",
                if pass { "PASS" } else { "FAIL" },
                bad.len(),
                if pass { names.join(", ") } else { bad.join("; ") }
            );
        }
        Err(e) => {
            ok = false;
            println!("criterion 11 [FAIL] byte-identical reruns — {e}");
        }
    }
    let _ = std::fs::remove_dir_all(&scratch);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config } => match dynlag::run_config(&config) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => report_error(&e),
        },
        Command::Models { action: ModelsAction::List } => {
            for (name, summary) in lagcurv::models::MODEL_CATALOGUE {
                println!("{name:<12} {summary}");
            }
            ExitCode::SUCCESS
        }
        Command::Verify { seed } => verify(seed),
    }
}
