use clap::Parser;
use sponge_cli::{run, Cli};
use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            let _ = error.print();
            // help and version are not failures; every other usage error is a parse error
            return ExitCode::from(if error.use_stderr() { 1 } else { 0 });
        }
    };
    let status = run(
        &cli.into_config(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(status as u8)
}
