use std::process::ExitCode;

use clap::Parser;
use er3bp::config::{expand_config, Cli, TOLERANCE_ENV};
use er3bp::CliError;

fn fail(err: CliError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(err) => return fail(err),
    };
    let cli = Cli::parse_from(args);
    let env_tol = std::env::var(TOLERANCE_ENV).ok();
    match er3bp::run(cli, env_tol.as_deref()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(err) => fail(err),
    }
}
