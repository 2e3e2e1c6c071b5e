//! `chordkd`: synthesize corpora, pseudo-label, train, evaluate and infer.

mod commands;
mod index;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chordkd", version, about = "Teacher-student chord recognition toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set train.max_epochs=5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "chordkd-out")]
    out: PathBuf,
    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Allow writing into a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus (features, .lab files, manifest).
    Synth,
    /// Label every corpus frame with the template teacher.
    Pseudolabel {
        /// Keep the teacher logits for distillation.
        #[arg(long)]
        store_logits: bool,
    },
    /// Train a stage-1 or stage-2 student.
    Train,
    /// Score predictions against reference annotations.
    Eval {
        /// Also report frame-wise agreement with stored teacher labels.
        #[arg(long)]
        against_teacher: bool,
    },
    /// Chord-root distribution of a corpus.
    Stats,
    /// Predict `.lab` files with a trained student.
    Infer,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth => commands::synth(&cli.global),
        Command::Pseudolabel { store_logits } => commands::pseudolabel(&cli.global, store_logits),
        Command::Train => commands::train(&cli.global),
        Command::Eval { against_teacher } => commands::eval(&cli.global, against_teacher),
        Command::Stats => commands::stats(&cli.global),
        Command::Infer => commands::infer(&cli.global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
