use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qssa_cli::commands::{
    cmd_approx, cmd_compare, cmd_scale, cmd_simulate, cmd_stability, ApproachArg, RegimeArg,
};
use qssa_cli::config::load_scenario;
use std::path::PathBuf;

/// Simulate, nondimensionalize and approximate the single-enzyme
/// reaction network under the quasi-steady-state assumptions.
#[derive(Parser)]
#[command(name = "qssa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset from the preset directory (see QSSA_PRESETS_DIR).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: config `output.dir`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Proceed even when the requested regime disagrees with the
    /// classified one.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeOpt {
    Standard,
    Reverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproachOpt {
    Free,
    Total,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full system; writes trajectory.csv and meta.json.
    Simulate(CommonArgs),
    /// Evaluate the closed-form approximations; writes approx.csv.
    Approx {
        #[command(flatten)]
        common: CommonArgs,
        /// Regime whose formulas to evaluate (default: classified).
        #[arg(long, value_enum)]
        regime: Option<RegimeOpt>,
        /// Dependent-variable approach.
        #[arg(long, value_enum, default_value = "free")]
        approach: ApproachOpt,
    },
    /// Compare oracle and approximations; writes errors.json.
    Compare(CommonArgs),
    /// Nondimensionalize the scenario's system; writes scaling.json.
    Scale(CommonArgs),
    /// Eigenvalues and Dulac certificate; writes stability.json.
    Stability(CommonArgs),
}

fn run(
    common: &CommonArgs,
    f: impl FnOnce(&qssa_cli::ScenarioConfig, &PathBuf) -> Result<(), qssa_cli::CliError>,
) -> Result<()> {
    if common.config.is_none() && common.preset.is_none() {
        bail!("pass --config <path> and/or --preset <name>");
    }
    let scenario = load_scenario(common.preset.as_deref(), common.config.as_deref())?;
    let out_dir = common
        .out
        .clone()
        .or_else(|| scenario.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    f(&scenario, &out_dir)?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(common) => run(common, |cfg, out| cmd_simulate(cfg, out)),
        Command::Approx {
            common,
            regime,
            approach,
        } => {
            let regime = regime.map(|r| match r {
                RegimeOpt::Standard => RegimeArg::Standard,
                RegimeOpt::Reverse => RegimeArg::Reverse,
            });
            let approach = match approach {
                ApproachOpt::Free => ApproachArg::Free,
                ApproachOpt::Total => ApproachArg::Total,
            };
            run(common, |cfg, out| {
                cmd_approx(cfg, out, regime, approach, common.force)
            })
        }
        Command::Compare(common) => run(common, |cfg, out| cmd_compare(cfg, out)),
        Command::Scale(common) => run(common, |cfg, out| cmd_scale(cfg, out)),
        Command::Stability(common) => run(common, |cfg, out| cmd_stability(cfg, out)),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
