mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{bench, build, generate, inspect, render, serve};

fn run(cli: &Cli) -> error::Result<()> {
    match &cli.command {
        Command::Build(a) => build::run(a),
        Command::Render(a) => render::run(a),
        Command::Gbuffer(a) => inspect::gbuffer(a),
        Command::Stats(a) => inspect::stats(a),
        Command::Ssim(a) => inspect::compare(a),
        Command::Bench(c) => bench::run(c),
        Command::Serve(a) => serve::run(a),
        Command::Vectors(a) => generate::vectors(a),
        Command::Generate(a) => generate::scene(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut message = e.to_string();
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let text = s.to_string();
                if !message.contains(&text) {
                    message = format!("{message}: {text}");
                }
                source = s.source();
            }
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
