mod commands;
mod config;
mod output;

use anyhow::Result;
use brheat::core::UnitSystem;
use clap::{Parser, Subcommand, ValueEnum};
use output::RunOutcome;
use std::path::PathBuf;

/// Brownian heat engine toolbox: closed-form thermodynamics, cycle
/// analysis, relaxation fractions, optimal driving protocols, finite
/// time power optimization, and stochastic simulation.  Every command
/// computes its results along two independent routes and exits
/// nonzero, with a machine-readable failure list, when they disagree.
#[derive(Parser)]
#[command(name = "brheat", version, max_term_width = 100)]
struct Cli {
    /// TOML configuration file; every field is optional and unknown
    /// keys are rejected.  Defaults are used when the flag is absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Random seed for the simulate command.
    #[arg(long, global = true, default_value_t = 12345)]
    seed: u64,

    /// Unit system for dimensional quantities.
    #[arg(long, global = true, value_enum, default_value_t = Units::Natural)]
    units: Units,

    /// Also write plot.py, a matplotlib script for the CSV outputs.
    /// The tool itself never renders images.
    #[arg(long, global = true)]
    plot_script: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Units {
    Natural,
    Si,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep internal energy, free energy, and entropy over frequency,
    /// classical and quantum side by side.
    Thermo,
    /// Analyze one engine cycle (stirling, carnot, or otto) and
    /// optionally map the quantum-to-classical efficiency ratio.
    Cycle,
    /// Tabulate the position and momentum relaxation fractions over
    /// damping ratio and window length.
    Bathswitch,
    /// Compute the minimum-dissipation frequency protocol and the
    /// closed-form dissipation bounds.
    Protocol,
    /// Efficiency at maximum power: optimal durations and the
    /// dissipation-split bounds grid.
    Maxpower,
    /// Integrate a trajectory ensemble of the driven oscillator and
    /// compare against the exact moment equations.
    Simulate,
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            if outcome.failures.is_empty() {
                return;
            }
            let path = cli.out.join("failures.csv");
            if let Err(e) = output::write_failures(&path, &outcome.failures) {
                eprintln!("error: could not write {}: {e}", path.display());
            }
            eprintln!(
                "error: {} dual-route check(s) failed; see {}",
                outcome.failures.len(),
                path.display()
            );
            for f in &outcome.failures {
                eprintln!("  {}: got {:.6e}, want {:.6e} (tolerance {:.1e})", f.check, f.got, f.want, f.tolerance);
            }
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: &Cli) -> Result<RunOutcome> {
    std::fs::create_dir_all(&cli.out)?;
    let units = match cli.units {
        Units::Natural => UnitSystem::natural(),
        Units::Si => UnitSystem::si(),
    };
    let ctx = commands::Context {
        out: cli.out.clone(),
        units,
        seed: cli.seed,
        plot_script: cli.plot_script,
    };
    match cli.command {
        Command::Thermo => commands::thermo::run(config::load(cli.config.as_deref())?, &ctx),
        Command::Cycle => commands::cycle::run(config::load(cli.config.as_deref())?, &ctx),
        Command::Bathswitch => {
            commands::bathswitch::run(config::load(cli.config.as_deref())?, &ctx)
        }
        Command::Protocol => commands::protocol::run(config::load(cli.config.as_deref())?, &ctx),
        Command::Maxpower => commands::maxpower::run(config::load(cli.config.as_deref())?, &ctx),
        Command::Simulate => commands::simulate::run(config::load(cli.config.as_deref())?, &ctx),
    }
}
