use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tdccm::cli::{self, Command, Options};
use tdccm::verify::Suite;

#[derive(Parser)]
#[command(name = "tdccm", version, about = "Coupled cluster and NHIP runs on the Rabi model")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML config, or a manifest.json from an earlier run
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Add exact-diagonalization reference columns and checks
    #[arg(long, global = true, value_enum)]
    oracle: Option<Oracle>,
    /// Worker threads for sweeps over g and SUB-N levels
    #[arg(long, global = true, value_name = "K")]
    sweep_parallel: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Ed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Algebra,
    Gradients,
    Brackets,
    Eccm,
    Nhip,
    All,
}

#[derive(Subcommand)]
enum Sub {
    /// Stationary SUB-N energies along a continuation in g
    Stationary,
    /// Time evolution of observables
    Evolve,
    /// Linear-response excitation frequencies
    Spectrum,
    /// Three-space NHIP certification of a Dyson map
    Nhip,
    /// Randomized invariant suites
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Cli::parse();
    let (command, suites) = match args.command {
        Sub::Stationary => (Command::Stationary, vec![]),
        Sub::Evolve => (Command::Evolve, vec![]),
        Sub::Spectrum => (Command::Spectrum, vec![]),
        Sub::Nhip => (Command::Nhip, vec![]),
        Sub::Verify { suite } => {
            let suites = match suite {
                SuiteArg::Algebra => vec![Suite::Algebra],
                SuiteArg::Gradients => vec![Suite::Gradients],
                SuiteArg::Brackets => vec![Suite::Brackets],
                SuiteArg::Eccm => vec![Suite::Eccm],
                SuiteArg::Nhip => vec![Suite::Nhip],
                SuiteArg::All => Suite::ALL.to_vec(),
            };
            (Command::Verify, suites)
        }
    };
    let opts = Options {
        config: args.common.config,
        out: args.common.out,
        oracle_ed: args.common.oracle.is_some(),
        sweep_parallel: args.common.sweep_parallel,
        seed: args.common.seed,
        suites,
    };
    match cli::execute(command, &opts) {
        Ok(outcome) => {
            for c in &outcome.manifest.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                println!("{mark} {}: {} = {:.3e} (tolerance {:.1e})", c.suite, c.name, c.value, c.tolerance);
            }
            if let Some(err) = outcome.manifest.summary.get("error") {
                eprintln!("error: {}", err.as_str().unwrap_or_default());
            }
            for s in outcome.manifest.summary.get("levels").and_then(|v| v.as_object()).into_iter().flatten() {
                if let Some(msg) = s.1.get("divergence") {
                    eprintln!("{}: {}", s.0, msg.as_str().unwrap_or_default());
                }
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}
