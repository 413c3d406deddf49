use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use antiphase_cli::commands;
use antiphase_cli::config::{RunConfig, PRESETS};
use antiphase_cli::table::Table;
use antiphase_cli::verify::{self, Mutation};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "antiphase",
    version,
    about = "Stability of antiphase clusters in oscillator rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled configuration by name
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    source: Source,
    /// Output CSV path; defaults to the config's `output`, then stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Parallel {
    #[command(flatten)]
    common: Common,
    /// Worker threads for grid sweeps; output does not depend on this
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the ring from a decoupled state
    Simulate(Common),
    /// Closed-form block spectra over the psi grid (uniform rings)
    Eigs(Common),
    /// Max transverse rate over (alpha, psi) for uniform rings
    SweepUniform(Parallel),
    /// Max transverse Floquet exponent over (alpha, detuning)
    SweepAlternating(Parallel),
    /// Per-block Floquet exponents
    Floquet(Parallel),
    /// Run the invariant suite and report PASS/FAIL per check
    Verify {
        /// Corrupt the block matrices to confirm the suite can fail
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
    /// Print a bundled configuration as JSON, or list them
    Preset { name: Option<String> },
}

fn load(source: &Source) -> Result<RunConfig> {
    Ok(match (&source.config, &source.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => unreachable!("clap enforces one source"),
    })
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn tabulate(common: &Common, f: impl FnOnce(&RunConfig) -> Result<Table>) -> Result<()> {
    let config = load(&common.source)?;
    let table = f(&config)?;
    emit(
        &table.render(),
        common.out.as_ref().or(config.output.as_ref()),
    )
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(c) => tabulate(&c, commands::simulate)?,
        Command::Eigs(c) => tabulate(&c, commands::eigs)?,
        Command::SweepUniform(p) => tabulate(&p.common, |c| commands::sweep_uniform(c, p.workers))?,
        Command::SweepAlternating(p) => {
            tabulate(&p.common, |c| commands::sweep_alternating(c, p.workers))?
        }
        Command::Floquet(p) => tabulate(&p.common, |c| commands::floquet(c, p.workers))?,
        Command::Verify { inject_sign_flip } => {
            let mutation = if inject_sign_flip {
                Mutation::BlockSignFlip
            } else {
                Mutation::None
            };
            let report = verify::run(mutation);
            print!("{report}");
            return Ok(report.all_passed());
        }
        Command::Preset { name: Some(name) } => println!("{}", RunConfig::preset(&name)?.to_json()),
        Command::Preset { name: None } => {
            for name in PRESETS {
                println!("{name}");
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
