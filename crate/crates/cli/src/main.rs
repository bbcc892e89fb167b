use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use nosecone_cli::commands::write_file;
use nosecone_cli::{run, Cli, Command};

fn out_path(command: &Command) -> Option<&std::path::Path> {
    match command {
        Command::Solve(a) => a.common.out.as_deref(),
        Command::Shoot(a) => a.common.out.as_deref(),
        Command::DragTable(c) => c.out.as_deref(),
        Command::Sweep(a) => a.common.out.as_deref(),
        Command::Compare(a) => a.common.out.as_deref(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli.command).and_then(|outcome| {
        match out_path(&cli.command) {
            Some(path) => write_file(path, &outcome.rendered)?,
            None => {
                let _ = std::io::stdout().write_all(outcome.rendered.as_bytes());
            }
        }
        Ok(outcome.exit_code)
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nosecone: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
