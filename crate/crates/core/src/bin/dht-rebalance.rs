use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use dht_rebalance::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let status = match cli::execute(&args, &mut out) {
        Ok(exit) => exit,
        Err(e) => {
            eprintln!("dht-rebalance: {e}");
            e.exit()
        }
    };
    let _ = out.flush();
    ExitCode::from(status.code() as u8)
}
