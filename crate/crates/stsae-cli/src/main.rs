use clap::{Parser, Subcommand};
use stsae_cli::commands::{
    cmd_direct, cmd_fit, cmd_simulate, cmd_summarize, cmd_trend, cmd_waic_compare, DirectArgs,
    FitArgs, SimulateArgs, SummarizeArgs, TrendArgs, WaicCompareArgs,
};
use stsae_cli::ExitCode;

/// Spatio-temporal small area estimation from plot-level inventory data.
#[derive(Parser)]
#[command(name = "stsae", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the hierarchical model and write posterior summaries and draws.
    Fit(FitArgs),
    /// Design-based direct estimates per area and year.
    Direct(DirectArgs),
    /// Per-area trend summaries from a saved fit.
    Trend(TrendArgs),
    /// Compare two saved fits by predictive information criterion.
    WaicCompare(WaicCompareArgs),
    /// Run a synthetic-population simulation study.
    Simulate(SimulateArgs),
    /// Recompute summaries from a saved fit's draws.
    Summarize(SummarizeArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help/version on stdout with success; real usage
            // errors land on stderr with exit code 1.
            let _ = err.print();
            let code = if err.use_stderr() {
                ExitCode::Usage as i32
            } else {
                ExitCode::Success as i32
            };
            std::process::exit(code);
        }
    };

    let result = match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Direct(args) => cmd_direct(args),
        Command::Trend(args) => cmd_trend(args),
        Command::WaicCompare(args) => cmd_waic_compare(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Summarize(args) => cmd_summarize(args),
    };

    match result {
        Ok(()) => std::process::exit(ExitCode::Success as i32),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code() as i32);
        }
    }
}
