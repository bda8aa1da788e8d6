use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wplab::harness::{
    cmd_dispersion, cmd_evolve, cmd_lap, cmd_stationary, cmd_verify, exit_code_for, RunArtifact, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "wplab",
    version,
    about = "Periodic stationary solutions and the stability of perturbations around them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the stationary family and check its invariants.
    Stationary(Common),
    /// Run a scenario with its configured checks.
    Evolve(Common),
    /// Comparison, contraction and conservation on seeded random pairs.
    Verify(Common),
    /// Run a scenario and fit the L2 decay rate.
    Dispersion(Common),
    /// Lap-number suite for a zero-mean perturbation.
    Lap(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random perturbations and verify trials.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of verify trials.
    #[arg(long)]
    trials: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Stationary(c) => ("stationary", c),
        Command::Evolve(c) => ("evolve", c),
        Command::Verify(c) => ("verify", c),
        Command::Dispersion(c) => ("dispersion", c),
        Command::Lap(c) => ("lap", c),
    };
    let fallback_out = common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let cfg = match ScenarioConfig::from_path(&common.config) {
        Ok(mut cfg) => {
            if let Some(out) = &common.out {
                cfg.output = out.clone();
            }
            if let Some(seed) = common.seed {
                cfg.initial.seed = seed;
                cfg.verify.seed = seed;
            }
            if let Some(trials) = common.trials {
                cfg.verify.trials = trials;
            }
            cfg
        }
        Err(e) => return report_failure(name, None, &fallback_out, &e),
    };
    let result = match &cli.command {
        Command::Stationary(_) => cmd_stationary(&cfg),
        Command::Evolve(_) => cmd_evolve(&cfg),
        Command::Verify(_) => cmd_verify(&cfg, cfg.verify.trials, cfg.verify.seed),
        Command::Dispersion(_) => cmd_dispersion(&cfg),
        Command::Lap(_) => cmd_lap(&cfg),
    };
    match result {
        Ok(art) => {
            print_verdicts(&art);
            ExitCode::from(art.exit_code as u8)
        }
        Err(e) => report_failure(name, Some(&cfg), &cfg.output, &e),
    }
}

fn print_verdicts(art: &RunArtifact) {
    for v in &art.verdicts {
        let value = v.value.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
        let limit = v.limit.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
        let note = v.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
        println!(
            "{:<4} {:<20} value {:>14}  limit {:>10}{note}",
            if v.passed { "PASS" } else { "FAIL" },
            v.check,
            value,
            limit
        );
    }
    for (k, v) in &art.summary {
        println!("     {k} = {v}");
    }
    println!("verdicts written to {}", art.output_dir.join("verdicts.json").display());
}

fn report_failure(name: &str, cfg: Option<&ScenarioConfig>, out: &std::path::Path, err: &wplab::LabError) -> ExitCode {
    eprintln!("wplab {name}: {err}");
    let art = RunArtifact::failed(name, cfg, out, err);
    if let Err(w) = art.write() {
        eprintln!("could not write verdicts: {w}");
    }
    ExitCode::from(exit_code_for(err) as u8)
}
