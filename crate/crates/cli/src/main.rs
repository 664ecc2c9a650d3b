use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use policy_overlap_cli::{commands, Cli, Context};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    // clap prints help/version itself and exits 2 on usage errors
    let cli = Cli::parse_from(&args);
    let result = Context::from_cli(&cli, args).and_then(|ctx| commands::dispatch(&ctx, &cli.command));
    match result {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
