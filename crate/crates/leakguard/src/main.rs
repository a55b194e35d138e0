use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use leakguard::{demo_leakage, exit_code, run_conformance, run_workflow_in, DemoKind, EXIT_OK};
use leakguard_core::{GuardMode, Session};

/// Leakage-safe supervised learning workflows.
///
/// Exit codes: 0 ok, 1 conformance failure, 2 spec or config error,
/// 3 guard rejection, 4 data error.
#[derive(Parser)]
#[command(name = "leakguard", version)]
struct Cli {
    /// Override the workflow's guards setting.
    #[arg(long, global = true, value_enum)]
    guards: Option<Guards>,
    /// Print the provenance registry to stderr when done.
    #[arg(long, global = true)]
    registry_dump: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Guards {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run a workflow file and print its report.
    Run { file: PathBuf },
    /// Run the conformance suite.
    Conformance,
    /// Run a leakage demonstration.
    Demo {
        #[arg(value_parser = ["seed_selection", "screen_selection", "duplicate_injection"])]
        kind: String,
        #[arg(long, default_value_t = 50)]
        replicates: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let guards = cli.guards.map(|g| match g {
        Guards::On => GuardMode::On,
        Guards::Off => GuardMode::Off,
    });
    let session = Session::new();
    let code = match cli.command {
        Command::Run { file } => {
            let report = run_workflow_in(&session, &file, guards);
            if let Some(e) = &report.error {
                eprintln!("{}: {}", e.name, e.message);
            }
            print_json(&report);
            report.exit_code()
        }
        Command::Conformance => {
            let report = run_conformance();
            for c in &report.checks {
                eprintln!("[{}] {}. {}: {}", if c.passed { "pass" } else { "FAIL" }, c.condition, c.name, c.detail);
            }
            print_json(&report);
            if report.all_passed() { EXIT_OK } else { 1 }
        }
        Command::Demo { kind, replicates, seed } => {
            let kind: DemoKind = kind.parse().expect("clap restricts the values");
            match demo_leakage(kind, replicates, seed) {
                Ok(report) => {
                    print_json(&report);
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("{}: {e}", e.name());
                    exit_code(&e)
                }
            }
        }
    };
    if cli.registry_dump {
        eprintln!("{}", serde_json::to_string_pretty(&session.snapshot()).expect("snapshot serializes"));
    }
    ExitCode::from(code as u8)
}
