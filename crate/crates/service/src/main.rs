use std::io;
use std::process::ExitCode;

use clap::Parser;
use inld_service::cli::{run, Cli, Io};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdin = io::stdin();
    let code = run(cli, Io { input: &mut stdin.lock(), out: &mut io::stdout(), err: &mut io::stderr() });
    ExitCode::from(code as u8)
}
