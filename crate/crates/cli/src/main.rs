use std::process::ExitCode;

use clap::Parser;
use fenchel_duo_cli::cli::{dispatch, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FENCHEL_DUO_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                fenchel_duo_cli::exit::CONFIG
            } else {
                0
            });
        }
    };
    ExitCode::from(dispatch(cli))
}
