use std::process::ExitCode;

use clap::Parser;

use tcrf_cli::args::{Cli, Command};
use tcrf_cli::commands;

/// 2 for invalid parameters, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let invalid = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<tcrf::Error>(),
            Some(tcrf::Error::InvalidParameter(_))
        )
    });
    if invalid {
        2
    } else {
        1
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Kernels(a) => commands::kernels(a),
        Command::Delays(a) => commands::delays(a),
        Command::Filter(a) => commands::filter(a),
        Command::RfModel(a) => commands::rf_model(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
