// Copyright 2026 The lambdamem Authors
// SPDX-License-Identifier: Apache-2.0

//! `lambdamem` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error (unknown command
//! or flag), 3 malformed or invalid configuration, 4 tolerance failure in
//! `oracle-check`.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lambdamem::io::emit::{to_json_string, Format};
use lambdamem::Error;

use commands::Ctx;
use settings::Settings;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "lambdamem", version, about = "Write/read simulations of Lambda-type atomic memories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Key-value configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// csv, json or both.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    r: Option<String>,
    #[arg(long, global = true)]
    length: Option<String>,
    #[arg(long = "t-write", global = true)]
    t_write: Option<String>,
    #[arg(long = "t-read", global = true)]
    t_read: Option<String>,
    /// forward or backward.
    #[arg(long, global = true)]
    direction: Option<String>,
    /// analytic, impulse or auto.
    #[arg(long, global = true)]
    strategy: Option<String>,
    /// kernel, oracle or raman.
    #[arg(long, global = true)]
    solver: Option<String>,
    #[arg(long = "grid-t", global = true)]
    grid_t: Option<String>,
    #[arg(long = "grid-z", global = true)]
    grid_z: Option<String>,
    #[arg(long = "t-min", global = true)]
    t_min: Option<String>,
    #[arg(long = "t-max", global = true)]
    t_max: Option<String>,
    #[arg(long, global = true)]
    points: Option<String>,
    #[arg(long = "r-min", global = true)]
    r_min: Option<String>,
    #[arg(long = "r-max", global = true)]
    r_max: Option<String>,
    /// Sweep axis: detuning or length.
    #[arg(long, global = true)]
    axis: Option<String>,
    #[arg(long = "l-min", global = true)]
    l_min: Option<String>,
    #[arg(long = "l-max", global = true)]
    l_max: Option<String>,
    /// Coupling weights: residue or linear.
    #[arg(long, global = true)]
    weights: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Entrance coherence |b(t, 0)|^2 from the closed form.
    Coherence,
    /// Write stage: losses and stored profile.
    Write,
    /// Write then read: retrieved intensity and efficiency.
    Read,
    /// Total-loss minimum over the write duration.
    Optimize,
    /// Stored fraction against detuning, or losses against length.
    Sweep,
    /// Exact against Raman-limit read-out and regime classification.
    RamanCompare,
    /// Kernel-vs-oracle and conservation checks; exits 4 on failure.
    OracleCheck,
    /// Transverse mode capacity from the Fresnel number.
    Capacity,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Coherence => "coherence",
            Command::Write => "write",
            Command::Read => "read",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::RamanCompare => "raman-compare",
            Command::OracleCheck => "oracle-check",
            Command::Capacity => "capacity",
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::DetuningRange { .. }
        | Error::Negative { .. }
        | Error::NonPositive { .. }
        | Error::GridMismatch(_)
        | Error::RamanAtResonance
        | Error::Unsupported(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let flags = [
        ("format", cli.format.clone()),
        ("r", cli.r.clone()),
        ("length", cli.length.clone()),
        ("t_write", cli.t_write.clone()),
        ("t_read", cli.t_read.clone()),
        ("direction", cli.direction.clone()),
        ("strategy", cli.strategy.clone()),
        ("solver", cli.solver.clone()),
        ("grid_t", cli.grid_t.clone()),
        ("grid_z", cli.grid_z.clone()),
        ("t_min", cli.t_min.clone()),
        ("t_max", cli.t_max.clone()),
        ("points", cli.points.clone()),
        ("r_min", cli.r_min.clone()),
        ("r_max", cli.r_max.clone()),
        ("axis", cli.axis.clone()),
        ("l_min", cli.l_min.clone()),
        ("l_max", cli.l_max.clone()),
        ("weights", cli.weights.clone()),
    ];
    let settings = Settings::resolve(cli.config.as_deref(), &flags)?;
    let format: Format = settings.or("format", Format::Both)?;
    std::fs::create_dir_all(&cli.out)?;
    if let Some((_, conv)) = settings.physical()? {
        for w in &conv.warnings {
            eprintln!("warning: validity condition violated: {}", serde_json::to_string(w)?.trim_matches('"'));
        }
    }
    let ctx = Ctx { settings: &settings, out: &cli.out, format };
    let outcome = match cli.command {
        Command::Coherence => commands::coherence(&ctx),
        Command::Write => commands::write(&ctx),
        Command::Read => commands::read(&ctx),
        Command::Optimize => commands::optimize(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::RamanCompare => commands::raman_compare(&ctx),
        Command::OracleCheck => commands::oracle_check(&ctx),
        Command::Capacity => commands::capacity(&ctx),
    }?;
    outcome.manifest.write(&cli.out)?;
    print!("{}", to_json_string(&outcome.summary)?);
    for p in &outcome.written {
        eprintln!("wrote {}", p.display());
    }
    if outcome.tolerance_failed {
        eprintln!("{}: tolerance check failed", cli.command.name());
        return Ok(EXIT_TOLERANCE);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
