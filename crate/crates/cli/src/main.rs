use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use smartfog::centrality::{betweenness, CentralityMode};
use smartfog::clustering::{areas_to_json, cluster_functional_areas};
use smartfog::decision::{select_gateways, AreaType};
use smartfog::harness::{self, ExperimentConfig};
use smartfog::overlay::{build_overlay, FogOverlay, OverlayParams};
use smartfog::simulation::Mode;
use smartfog::Execution;

#[derive(Parser)]
#[command(name = "smartfog", version, about = "Fog overlay planning and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation sweep and write results.csv and summary.csv.
    Simulate(SweepArgs),
    /// Time the planning stages and write timing.csv and timing_summary.csv.
    Timing(SweepArgs),
    /// Print the communication gateways selected for one overlay.
    Select(PlanArgs),
    /// Print the functional areas of one overlay as JSON.
    Cluster(PlanArgs),
    /// Print a generated overlay as JSON.
    Overlay {
        #[arg(long, default_value_t = 20)]
        devices: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma separated overlay sizes, in devices.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma separated: smartfog, unoptimized.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,
    /// Replications per size and mode.
    #[arg(long)]
    reps: Option<usize>,
    /// Seed of replication 0; replication r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only measure stage timings (same as the `timing` subcommand).
    #[arg(long)]
    timing_only: bool,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(sizes) = &self.sizes {
            config.overlay_sizes = sizes.clone();
        }
        if let Some(modes) = &self.modes {
            config.modes = modes.clone();
        }
        if let Some(reps) = self.reps {
            config.replications = reps;
        }
        if let Some(seed) = self.seed {
            config.seed_base = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if self.sequential {
            config.execution = Execution::Sequential;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct PlanArgs {
    /// Overlay JSON document; a generated overlay is used when absent.
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    devices: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma separated: compute, memory.
    #[arg(long, value_delimiter = ',', default_value = "compute,memory")]
    areas: Vec<AreaType>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    unweighted: bool,
}

impl PlanArgs {
    fn overlay(&self) -> Result<FogOverlay> {
        match &self.overlay {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(FogOverlay::from_json(&text)?)
            }
            None => Ok(build_overlay(self.devices, self.seed, &OverlayParams::default())?),
        }
    }

    fn mode(&self) -> CentralityMode {
        if self.unweighted {
            CentralityMode::Unweighted
        } else {
            CentralityMode::WeightedByLatency
        }
    }
}

fn sweep(args: &SweepArgs, timing: bool) -> Result<()> {
    let config = args.config()?;
    if timing || args.timing_only {
        for row in harness::run_timing(&config)? {
            println!(
                "n={:<4} betweenness {:.4} ms  sort+decision {:.4} ms  spectral {:.4} ms",
                row.n_devices, row.betweenness_median_ms, row.sort_decision_median_ms, row.spectral_median_ms
            );
        }
        println!("wrote {}", config.output_dir.join(harness::TIMING_FILE).display());
    } else {
        let output = harness::run_experiment(&config)?;
        for row in &output.summary {
            println!(
                "{:<15} n={:<4} spa {:.2} ms  pc {:.2} ms  load {:.0} B  dropped {}",
                row.mode.to_string(),
                row.n_devices,
                row.spa_median_ms,
                row.pc_median_ms,
                row.network_load_median_bytes,
                row.dropped_total
            );
        }
        println!("wrote {}", output.results_path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => sweep(&args, false),
        Command::Timing(args) => sweep(&args, true),
        Command::Select(args) => {
            let overlay = args.overlay()?;
            let centrality = betweenness(&overlay, args.mode())?;
            let assignment = select_gateways(&overlay, &args.areas, &centrality)?;
            println!("{}", serde_json::to_string_pretty(&assignment)?);
            Ok(())
        }
        Command::Cluster(args) => {
            let overlay = args.overlay()?;
            let centrality = betweenness(&overlay, args.mode())?;
            let assignment = select_gateways(&overlay, &args.areas, &centrality)?;
            let areas = cluster_functional_areas(&overlay, &assignment, args.k, args.bandwidth, args.seed)?;
            println!("{}", areas_to_json(&areas)?);
            Ok(())
        }
        Command::Overlay { devices, seed } => {
            println!("{}", build_overlay(devices, seed, &OverlayParams::default())?.to_json()?);
            Ok(())
        }
    }
}
