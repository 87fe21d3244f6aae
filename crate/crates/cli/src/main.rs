mod args;
mod artifacts;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use textgraph::eval::memory::TrackingAllocator;

use args::{Cli, Command};
use artifacts::Workdir;

#[global_allocator]
static ALLOCATOR: TrackingAllocator = TrackingAllocator;

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let wd = Workdir::new(&cli.workdir)?;
    match &cli.command {
        Command::Preprocess(a) => commands::preprocess_cmd(&wd, a)?,
        Command::BuildGraph(a) => commands::build_graph_cmd(&wd, a)?,
        Command::Embed(a) => commands::embed_cmd(&wd, a)?,
        Command::Train(a) => return commands::train_cmd(&wd, a),
        Command::Sweep(a) => commands::sweep_cmd(&wd, a)?,
        Command::Worker(a) => commands::worker_cmd(&wd, a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
