use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use procoh::scenario::{self, Built};
use procoh_cli::{render, report, to_json, EXIT_FAIL, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "procoh", version, about = "Mod-p cohomology of p-adic analytic groups via fusion-stable spectral sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Built-in name (gl2, extraspecial3) or path to a JSON scenario.
    #[arg(long)]
    scenario: String,
    /// Prime for built-ins that take one.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// dim H^n(Z/p; J^k) for n = 0..6.
    JordanTable {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// The corner of the E2 page.
    E2 {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// The fusion-stable page.
    Stable {
        #[command(flatten)]
        args: ScenarioArgs,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Full computation: E2, stable page, differentials, E-infinity, ring.
    Run {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Compare with the scenario's expected outputs; exit 1 on mismatch.
        #[arg(long)]
        verify: bool,
        /// Column bound n_max.
        #[arg(long)]
        window: Option<usize>,
    },
}

fn emit<T: serde::Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) {
    match format {
        Format::Text => print!("{}", text(value)),
        Format::Json => print!("{}", to_json(value)),
    }
}

fn build(args: &ScenarioArgs, window: Option<usize>) -> procoh::Result<Built> {
    scenario::load(&args.scenario, args.p)?.build(window)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::JordanTable { p, k, format } => report::jordan_table(p, k).map(|t| {
            emit(format, &t, render::jordan_table);
            true
        }),
        Command::E2 { args } => build(&args, None).and_then(|b| report::corner_report(&b)).map(|r| {
            emit(args.format, &r, render::corner_report);
            true
        }),
        Command::Stable { args, window } => build(&args, window).and_then(|b| report::stable_report(&b)).map(|r| {
            emit(args.format, &r, render::stable_report);
            true
        }),
        Command::Run { args, verify, window } => build(&args, window).and_then(|b| report::run(&b, verify)).map(|r| {
            emit(args.format, &r, render::run_report);
            r.passed()
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
