//! `emleak`: simulate capacitor switching transients, sweep energy partitions,
//! synthesize EM traces and attack them.
//!
//! Exit codes: 0 success, 2 validation or usage error, 3 I/O error
//! (including refusing to overwrite), 4 numerical stability or accuracy error.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{circuit, traces};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Parser)]
#[command(name = "emleak", version, about = "Capacitor switching energy, EM leakage traces and correlation attacks")]
struct Cli {
    /// Output directory
    #[arg(long, global = true, env = "EMLEAK_OUT", default_value = "emleak-out")]
    out: PathBuf,

    /// Seed for every random stream
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overwrite existing output files
    #[arg(long, global = true)]
    force: bool,

    /// Output formats; repeatable. Each command has its own default set.
    #[arg(long = "format", global = true, value_enum)]
    formats: Vec<Format>,

    /// Leave the generation timestamp out of SVG files
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one switching transient and export the waveform (default: csv)
    Transient(circuit::TransientArgs),
    /// Heat and radiation energy versus resistance (default: csv, json, svg)
    Fig3(circuit::Fig3Args),
    /// Heat and radiation energy versus adiabatic ramp time (default: csv, json, svg)
    Fig4(circuit::Fig4Args),
    /// Synthesize a trace set into traces.emlk (default: csv, json, svg alongside)
    Synth(traces::SynthArgs),
    /// Correlation attack, minimum traces to disclosure and SNR (default: csv, json, svg)
    Attack(traces::AttackArgs),
    /// Compare MTD and SNR across adiabatic ramp times (default: csv, json, svg)
    Evaluate(traces::EvaluateArgs),
    /// Amplitude, SNR and MTD maps over a probe grid (default: csv, json, svg)
    Grid(traces::GridArgs),
}

/// Settings shared by every command.
pub struct Ctx {
    pub seed: u64,
    formats: Vec<Format>,
    pub stamp: Option<String>,
}

impl Ctx {
    pub fn wants(&self, f: Format, defaults: &[Format]) -> bool {
        if self.formats.is_empty() {
            defaults.contains(&f)
        } else {
            self.formats.contains(&f)
        }
    }

    pub fn meta(&self, command: &str) -> serde_json::Value {
        serde_json::json!({
            "tool": "emleak",
            "version": VERSION,
            "command": command,
            "seed": self.seed,
        })
    }
}

/// A fast result disagreed with its reference computation.
#[derive(Debug)]
pub struct Mismatch(pub String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Mismatch {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use emleak_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e.root() {
                E::Stability { .. } | E::Accuracy { .. } => 4,
                E::Io(_) | E::Format(_) => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
        if cause.downcast_ref::<Mismatch>().is_some() {
            return 4;
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(emleak_core::Error::validation("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let stamp = (!cli.no_timestamp).then(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        format!("by emleak {VERSION} at unix time {secs}")
    });
    let ctx = Ctx {
        seed: cli.seed,
        formats: cli.formats,
        stamp,
    };
    let outputs = match &cli.command {
        Command::Transient(a) => circuit::transient(&ctx, a)?,
        Command::Fig3(a) => circuit::fig3(&ctx, a)?,
        Command::Fig4(a) => circuit::fig4(&ctx, a)?,
        Command::Synth(a) => traces::synth(&ctx, a)?,
        Command::Attack(a) => traces::attack(&ctx, a)?,
        Command::Evaluate(a) => traces::evaluate(&ctx, a)?,
        Command::Grid(a) => traces::grid(&ctx, a)?,
    };
    for path in outputs.commit(&cli.out, cli.force)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emleak: error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
