use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = ncbt::args::Cli::parse();
    match ncbt::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ncbt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
