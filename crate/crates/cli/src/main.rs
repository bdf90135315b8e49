//! `gpet`: trace an edge through a noisy image with Gaussian process regression.

mod config;
mod error;
mod evaluate;
mod generate;
mod output;
mod sweep;
mod trace;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "gpet", version, about = "Gaussian process edge tracing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a noisy, occluded sinusoid test case.
    Generate(generate::GenerateArgs),
    /// Trace an edge in one image or a sequence of frames.
    Trace(trace::TraceArgs),
    /// Compare the tracer with the Dijkstra baseline on a case with known truth.
    Evaluate(evaluate::EvaluateArgs),
    /// Re-run the synthetic case with one parameter perturbed.
    Sweep(sweep::SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Trace(a) => trace::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Sweep(a) => sweep::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
