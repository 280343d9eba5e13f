use std::process::ExitCode;

use clap::Parser;

mod args;
mod curves;
mod error;
mod gen;
mod output;
mod surgery;
mod verify;

use args::{expand_config, Cli, Command};
use error::{CliError, CliResult};
use output::emit;

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => {
            let csv = gen::run(&a)?;
            emit(None, &csv)
        }
        Command::Curves(a) => emit(a.out.as_deref(), &curves::run(a.grid)?),
        Command::Verify(a) => {
            let o = verify::run(&a)?;
            emit(a.out.as_deref(), &o.csv)?;
            eprintln!("{}: {}", if o.failures == 0 { "PASS" } else { "FAIL" }, o.summary);
            if o.failures == 0 {
                Ok(())
            } else {
                Err(CliError::Verify(o.summary))
            }
        }
        Command::Surgery(a) => {
            let csv = surgery::run(&a)?;
            emit(a.out.as_deref(), &csv)
        }
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("dimsurgery: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        // clap exits 2 on usage errors and 0 for --help
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dimsurgery: {e}");
            e.exit_code()
        }
    }
}
