use std::process::ExitCode;

use clap::Parser;
use pbsgates_cli::{dispatch, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = dispatch(
        cli,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}
