//! `ris-decoy`: runs scenario files and exports CSV tables plus a manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod experiments;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{CliError, CliResult, EXIT_CODES_HELP};
use experiments::Context;
use output::{Manifest, OutputDir};
use scenario::{Experiment, Scenario};

#[derive(Parser)]
#[command(name = "ris-decoy", version, about = "Design RIS decoy profiles and export the analysis as CSV", after_help = EXIT_CODES_HELP)]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario and write the requested experiment tables.
    Run {
        /// Scenario file (TOML).
        file: PathBuf,
        /// Experiment(s) to run; repeat or comma-separate. `none` writes only
        /// the manifest. Defaults to `[output].experiments`.
        #[arg(long, value_delimiter = ',', value_parser = parse_experiment)]
        experiment: Vec<Option<Experiment>>,
        /// Overrides `[scene].seed`.
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=i64::MAX as u64))]
        seed: Option<u64>,
        /// Overrides `[output].dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the schema and the feasibility conditions without solving.
    Validate {
        file: PathBuf,
        /// Also print the scenario in canonical form (every key, fixed order).
        #[arg(long)]
        canonical: bool,
    },
}

fn parse_experiment(s: &str) -> Result<Option<Experiment>, String> {
    if s.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

fn load(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Scenario::parse(&text)
}

fn validate(path: &Path, canonical: bool) -> CliResult<String> {
    let s = load(path)?;
    let tail = if canonical {
        format!("\n{}", s.to_canonical()?)
    } else {
        String::new()
    };
    let scene = s.scene_config()?;
    let derived = scene.derived_theta_true().map_err(CliError::from_config)?;
    let basis = scene.basis().map_err(CliError::from_config)?;
    let angles = match s.scene.theta_true_deg {
        Some(p) => format!(
            "derived θ_true = {:.2}°, pinned θ_true = {p:.2}° (pinned wins)",
            derived.degrees()
        ),
        None => format!("derived θ_true = {:.2}° (not pinned)", derived.degrees()),
    };
    Ok(format!(
        "feasible; {angles}\n  M ≥ 2K: {} ≥ {}\n  cond(V) = {:.3e}\n  η(θ_fake) = {:.4}\n{tail}",
        scene.m,
        2 * scene.k,
        basis.condition_number(),
        basis.eta(scene.theta_fake)
    ))
}

fn run(
    path: &Path,
    requested: &[Option<Experiment>],
    seed: Option<u64>,
    out: Option<PathBuf>,
    quiet: bool,
) -> CliResult<()> {
    let mut s = load(path)?;
    if let Some(seed) = seed {
        s.scene.seed = seed;
    }
    if !requested.is_empty() {
        s.output.experiments = requested.iter().flatten().copied().collect();
    }
    let experiments = Experiment::expand(&s.output.experiments);
    let hash = s.config_hash()?;
    let seed = s.scene.seed;
    let dir = out.unwrap_or_else(|| PathBuf::from(&s.output.dir));

    let ctx = Context::new(&s, &experiments)?;
    let mut out = OutputDir::create(&dir)?;
    let mut manifest = Manifest::default();
    manifest.set("tool", env!("CARGO_BIN_NAME"));
    manifest.set("version", env!("CARGO_PKG_VERSION"));
    manifest.set("scenario", &s.name);
    manifest.set("config_hash", &hash);
    manifest.set("seed", seed);
    manifest.set("timestamp_unix", output::timestamp());
    manifest.set(
        "experiments",
        experiments.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(","),
    );
    manifest.set("theta_true_deg", output::angle(ctx.scene.theta_true()?.degrees()));
    ctx.describe_solution(&mut manifest)?;

    for e in experiments {
        let table = ctx.run(e, &mut manifest)?;
        let name = format!("{e}.csv");
        let written = out.write(&name, &table.render(&hash, seed))?;
        if !quiet {
            eprintln!("wrote {}", written.display());
        }
    }
    for (name, digest) in std::mem::take(&mut out.written) {
        manifest.set(format!("file.{name}.sha256"), digest);
    }
    let m = out.write("manifest.txt", &manifest.render())?;
    if !quiet {
        eprintln!("wrote {}", m.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            file,
            experiment,
            seed,
            out,
        } => run(&file, &experiment, seed, out, cli.quiet),
        Command::Validate { file, canonical } => validate(&file, canonical).map(|report| print!("{report}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
