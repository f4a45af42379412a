use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use rlnc_lab_cli::args::Cli;
use rlnc_lab_cli::{configure_threads, execute, EXIT_CONFIG};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let mut out = io::stdout().lock();
    let result = configure_threads().and_then(|()| execute(&cli, &mut out));
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
