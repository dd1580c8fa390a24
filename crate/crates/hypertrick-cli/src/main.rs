use clap::Parser;
use hypertrick_cli::commands::{Cli, CmdError, dispatch};

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => {}
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CmdError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
