mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;

use args::{BenchCommand, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ghs(a) => commands::ghs(a),
        Command::GhsPenalized(a) => commands::ghs_penalized(a),
        Command::Wlr(a) => commands::wlr(a),
        Command::Em(a) => commands::em(a),
        Command::Als(a) => commands::als(a),
        Command::UniformSvd(a) => commands::uniform_svd(a),
        Command::Bench(BenchCommand::SweepLambda(a)) => commands::sweep(a),
        Command::Bench(BenchCommand::Compare(a)) => commands::compare(a),
        Command::Bench(BenchCommand::Trace(a)) => commands::trace(a),
        Command::Selftest(a) => commands::selftest(a),
        Command::Convert(a) => commands::convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wlra: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
