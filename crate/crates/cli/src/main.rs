//! `ppaw` command-line driver. Exit codes: 0 success, 1 usage error, 2 data
//! or protocol error; failures print one `error: <category>: <detail>` line.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn dispatch(argv: impl IntoIterator<Item = std::ffi::OsString>) -> Result<(), Failure> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            // a closed pipe (`ppaw --help | head`) is not an error
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            // clap renders several lines with hints; keep the first, minus its
            // own `error: ` prefix
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            return Err(Failure::usage(first.trim_start_matches("error: ")));
        }
    };
    match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Extract(a) => commands::extract(a),
        Command::Offline(a) => commands::offline(a),
        Command::Ppaw(a) => commands::ppaw(a),
        Command::SweepO(a) => commands::sweep(a),
        Command::Gateway(a) => commands::gateway(a),
        Command::Wearable(a) => commands::wearable(a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    match dispatch(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let detail = f.detail.replace(['\n', '\r'], " ");
            eprintln!("error: {}: {detail}", f.category);
            ExitCode::from(f.code as u8)
        }
    }
}
