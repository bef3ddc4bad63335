mod commands;
mod output;
mod scan;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Format;

/// Loose spanning trees in 3-uniform hypergraphs.
#[derive(Parser, Debug)]
#[command(name = "loose3", version)]
pub struct Cli {
    /// Seed for every random choice; echoed in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Node budget for exact searches.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated tree (`LT v1`) or host (`H3 v1`) plus `<out>.meta.json`.
    Gen(commands::GenArgs),
    /// Run the checkers that apply to an `H3 v1` or `LT v1` file.
    Check(commands::CheckArgs),
    /// Embed a tree into a host, exactly or with the absorbing pipeline.
    Embed(commands::EmbedArgs),
    /// Assign tree vertices to clusters along a tight cycle's matching.
    Assign(commands::AssignArgs),
    /// Complete a small seeded partial embedding by absorption.
    AbsorbDemo(commands::AbsorbDemoArgs),
    /// Collapse the progression hypertree, or the faces of an `H3 v1` file.
    Collapse(commands::CollapseArgs),
    /// Success rates of seeded embedding runs over a grid of sizes and densities.
    Scan(scan::ScanArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(&cli, a),
        Command::Check(a) => commands::check(&cli, a),
        Command::Embed(a) => commands::embed(&cli, a),
        Command::Assign(a) => commands::assign(&cli, a),
        Command::AbsorbDemo(a) => commands::absorb_demo(&cli, a),
        Command::Collapse(a) => commands::collapse(&cli, a),
        Command::Scan(a) => scan::scan(&cli, a),
    };
    match result {
        Ok(v) => {
            print!("{}", output::render(&output::isolate_timing(v), cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
