//! Command-line harness: validate scenario configs, run them across their
//! seed lists, and emit the CSV series and summaries.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use storesim_core::metrics::write_summary_csv;
use storesim_core::scenario::{
    run_preset, run_scenario, write_scenario_outputs, ExperimentPreset, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "storesim",
    version,
    about = "Deterministic simulator for storage-constrained zone-clustered sensor networks",
    after_help = "Seeds of a scenario run in parallel; set RAYON_NUM_THREADS to bound the \
                  worker count. Identical configs and seeds always reproduce identical output \
                  files."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of one scenario config and write its CSV outputs.
    Run {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Directory the CSVs are written into.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run one of the bundled experiment presets end to end.
    Preset {
        /// Preset name; `list-presets` shows the choices.
        name: String,
        /// Directory the CSVs are written into.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the bundled experiment presets.
    ListPresets,
    /// Parse and validate a scenario config without running it.
    Validate {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
    },
}

fn label_for(config: &Path) -> String {
    config
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario")
        .to_string()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let label = label_for(&config);
            let outcome = run_scenario(&label, &cfg)
                .with_context(|| format!("config {} failed validation", config.display()))?;
            let mut written = write_scenario_outputs(&out, &outcome, false)?;
            let summary_path = out.join(format!("{label}.summary.csv"));
            let rows: Vec<_> = outcome.runs.iter().map(|r| r.summary).collect();
            write_summary_csv(&summary_path, &rows)
                .with_context(|| format!("failed to write {}", summary_path.display()))?;
            written.push(summary_path);
            for path in &written {
                println!("wrote {}", path.display());
            }
        }
        Command::Preset { name, out } => {
            let preset = ExperimentPreset::from_name(&name)?;
            let outcomes = run_preset(preset, Some(&out))?;
            for o in &outcomes {
                println!("ran {} over {} seeds", o.label, o.runs.len());
            }
            println!(
                "{}: {} scenarios written to {}",
                preset.name(),
                outcomes.len(),
                out.display()
            );
        }
        Command::ListPresets => {
            for p in ExperimentPreset::ALL {
                println!("{:<16} {}", p.name(), p.describe());
            }
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            cfg.validate()
                .with_context(|| format!("config {} failed validation", config.display()))?;
            println!(
                "{} is valid: {} over {} nodes, {} seed(s), {:.0} s simulated",
                config.display(),
                cfg.scenario.protocol,
                cfg.node_count(),
                cfg.scenario.seeds.len(),
                cfg.scenario.sim_time_s,
            );
        }
    }
    Ok(())
}
