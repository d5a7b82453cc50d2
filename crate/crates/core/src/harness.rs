//! Seeded experiment sweeps and stage timings.
//!
//! Replication `r` of every cell uses seed `seed_base + r` for the overlay,
//! the planning pipeline and the simulation, so both modes of a replication
//! run on the same overlay. Replications run through [`Execution`] and are
//! collected in (size, mode, replication) order, which keeps the result
//! files byte-identical across runs and thread counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::centrality::{betweenness_with, CentralityMode, CentralityScores};
use crate::clustering::{cluster_functional_areas_with, FunctionalArea};
use crate::decision::{evaluate_devices, select_from_evaluations, AreaType, GatewayAssignment};
use crate::overlay::{build_overlay, FogOverlay, OverlayParams};
use crate::simulation::{self, Mode, ResultRow, SimulationReport, Strategy, WorkloadSpec};
use crate::{stats, Error, Execution, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const TIMING_SUMMARY_FILE: &str = "timing_summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub overlay_sizes: Vec<usize>,
    pub modes: Vec<Mode>,
    pub replications: usize,
    pub seed_base: u64,
    /// One communication gateway is selected per entry.
    pub areas: Vec<AreaType>,
    /// Clusters per gateway clustering.
    pub clusters: usize,
    /// Gaussian bandwidth; `None` uses the median pairwise distance.
    pub bandwidth: Option<f64>,
    pub centrality: CentralityMode,
    pub overlay: OverlayParams,
    pub workload: WorkloadSpec,
    pub output_dir: PathBuf,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            overlay_sizes: vec![20, 30, 40],
            modes: vec![Mode::SmartFog, Mode::UnoptimizedFog],
            replications: 100,
            seed_base: 1,
            areas: vec![AreaType::ComputeOptimized, AreaType::MemoryOptimized],
            clusters: 2,
            bandwidth: None,
            centrality: CentralityMode::default(),
            overlay: OverlayParams::default(),
            workload: WorkloadSpec::default(),
            output_dir: PathBuf::from("results"),
            execution: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.overlay_sizes.is_empty() {
            return Err(Error::config("overlay_sizes", "at least one size is required"));
        }
        if self.modes.is_empty() {
            return Err(Error::config("modes", "at least one mode is required"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        if self.areas.is_empty() {
            return Err(Error::config("areas", "at least one functional area is required"));
        }
        if self.clusters == 0 {
            return Err(Error::config("clusters", "must be >= 1"));
        }
        if let Some(g) = self.bandwidth {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::config("bandwidth", "must be finite and > 0"));
            }
        }
        // gateways are excluded from clustering, leaving n - areas candidates
        let min_size = (self.areas.len() + self.clusters).max(2);
        if let Some(&n) = self.overlay_sizes.iter().find(|&&n| n < min_size) {
            return Err(Error::config(
                "overlay_sizes",
                format!("size {n} is below the minimum {min_size} for {} areas and k = {}", self.areas.len(), self.clusters),
            ));
        }
        self.overlay.validate()?;
        self.workload.validate()
    }

    pub fn seed(&self, replication: usize) -> u64 {
        self.seed_base.wrapping_add(replication as u64)
    }
}

/// Wall-clock cost of the planning stages for one overlay, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub n_devices: usize,
    pub replication: usize,
    pub seed: u64,
    pub betweenness_ms: f64,
    /// Device evaluation, non-dominated sorting and the decision step,
    /// excluding centrality.
    pub sort_decision_ms: f64,
    pub spectral_ms: f64,
}

/// Output of the SmartFog planning pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SmartFogPlan {
    pub centrality: CentralityScores,
    pub assignment: GatewayAssignment,
    pub areas: Vec<FunctionalArea>,
    pub timings: StageTimings,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Centrality, gateway selection and functional-area clustering, timed.
pub fn plan_smartfog(overlay: &FogOverlay, config: &ExperimentConfig, seed: u64, replication: usize) -> Result<SmartFogPlan> {
    let start = Instant::now();
    let centrality = betweenness_with(overlay, config.centrality, config.execution)?;
    let betweenness_ms = elapsed_ms(start);

    let start = Instant::now();
    let evaluations = evaluate_devices(overlay, &centrality)?;
    let assignment = select_from_evaluations(&evaluations, &config.areas)?;
    let sort_decision_ms = elapsed_ms(start);

    let start = Instant::now();
    let areas =
        cluster_functional_areas_with(overlay, &assignment, config.clusters, config.bandwidth, seed, config.execution)?;
    let spectral_ms = elapsed_ms(start);

    Ok(SmartFogPlan {
        centrality,
        assignment,
        areas,
        timings: StageTimings {
            n_devices: overlay.len(),
            replication,
            seed,
            betweenness_ms,
            sort_decision_ms,
            spectral_ms,
        },
    })
}

/// One simulation run of a (size, mode, replication) cell.
pub fn run_replication(config: &ExperimentConfig, n_devices: usize, mode: Mode, replication: usize) -> Result<SimulationReport> {
    let seed = config.seed(replication);
    let overlay = build_overlay(n_devices, seed, &config.overlay)?;
    match mode {
        Mode::SmartFog => {
            let plan = plan_smartfog(&overlay, config, seed, replication)?;
            let strategy = Strategy::SmartFog { assignment: &plan.assignment, areas: &plan.areas };
            simulation::run(&overlay, &strategy, &config.workload, seed)
        }
        Mode::UnoptimizedFog => simulation::run(&overlay, &Strategy::Unoptimized, &config.workload, seed),
    }
}

/// Every result row of the sweep, ordered by size, mode, then replication.
pub fn run_rows(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &n in &config.overlay_sizes {
        for &mode in &config.modes {
            for r in 0..config.replications {
                jobs.push((n, mode, r));
            }
        }
    }
    config
        .execution
        .map(&jobs, |&(n, mode, r)| run_replication(config, n, mode, r).map(|report| report.row()))
        .into_iter()
        .collect()
}

/// Per-(mode, size) aggregate of the run rows. Medians and sample standard
/// deviations are taken over the per-run values; runs without a completed
/// loop of a kind are left out of that kind's statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mode: Mode,
    pub n_devices: usize,
    pub replications: usize,
    pub spa_median_ms: f64,
    pub spa_stddev: f64,
    pub pc_median_ms: f64,
    pub pc_stddev: f64,
    pub network_load_median_bytes: f64,
    pub network_load_stddev: f64,
    pub completed_median: f64,
    pub dropped_total: u64,
}

fn finite(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values.filter(|v| v.is_finite()).collect()
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut cells: Vec<(Mode, usize)> = Vec::new();
    for row in rows {
        if !cells.contains(&(row.mode, row.n_devices)) {
            cells.push((row.mode, row.n_devices));
        }
    }
    cells
        .into_iter()
        .map(|(mode, n)| {
            let cell: Vec<&ResultRow> = rows.iter().filter(|r| r.mode == mode && r.n_devices == n).collect();
            let spa = finite(cell.iter().map(|r| r.spa_median_ms));
            let pc = finite(cell.iter().map(|r| r.pc_median_ms));
            let load: Vec<f64> = cell.iter().map(|r| r.network_load_bytes as f64).collect();
            let completed: Vec<f64> = cell.iter().map(|r| r.completed as f64).collect();
            SummaryRow {
                mode,
                n_devices: n,
                replications: cell.len(),
                spa_median_ms: stats::median(&spa),
                spa_stddev: stats::stddev(&spa),
                pc_median_ms: stats::median(&pc),
                pc_stddev: stats::stddev(&pc),
                network_load_median_bytes: stats::median(&load),
                network_load_stddev: stats::stddev(&load),
                completed_median: stats::median(&completed),
                dropped_total: cell.iter().map(|r| r.dropped).sum(),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Runs the sweep and writes `results.csv` and `summary.csv` into the
/// configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rows = run_rows(config)?;
    let summary = summarize(&rows);
    fs::create_dir_all(&config.output_dir)?;
    let results_path = config.output_dir.join(RESULTS_FILE);
    let summary_path = config.output_dir.join(SUMMARY_FILE);
    write_csv(&results_path, &rows)?;
    write_csv(&summary_path, &summary)?;
    Ok(ExperimentOutput { rows, summary, results_path, summary_path })
}

/// Stage timings for every size and replication, measured one replication
/// at a time so runs do not compete for cores. Simulation is skipped.
pub fn timing_report(config: &ExperimentConfig) -> Result<Vec<StageTimings>> {
    config.validate()?;
    let mut timings = Vec::with_capacity(config.overlay_sizes.len() * config.replications);
    for &n in &config.overlay_sizes {
        // untimed warm-up so the first measured run does not pay for cold caches
        let warmup = build_overlay(n, config.seed(0), &config.overlay)?;
        plan_smartfog(&warmup, config, config.seed(0), 0)?;
        for r in 0..config.replications {
            let seed = config.seed(r);
            let overlay = build_overlay(n, seed, &config.overlay)?;
            timings.push(plan_smartfog(&overlay, config, seed, r)?.timings);
        }
    }
    Ok(timings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub n_devices: usize,
    pub replications: usize,
    pub betweenness_median_ms: f64,
    pub betweenness_stddev_ms: f64,
    pub sort_decision_median_ms: f64,
    pub sort_decision_stddev_ms: f64,
    pub spectral_median_ms: f64,
    pub spectral_stddev_ms: f64,
}

pub fn summarize_timings(timings: &[StageTimings]) -> Vec<TimingSummary> {
    let mut sizes: Vec<usize> = Vec::new();
    for t in timings {
        if !sizes.contains(&t.n_devices) {
            sizes.push(t.n_devices);
        }
    }
    sizes
        .into_iter()
        .map(|n| {
            let cell: Vec<&StageTimings> = timings.iter().filter(|t| t.n_devices == n).collect();
            let column = |f: fn(&StageTimings) -> f64| cell.iter().map(|t| f(t)).collect::<Vec<f64>>();
            let b = column(|t| t.betweenness_ms);
            let s = column(|t| t.sort_decision_ms);
            let c = column(|t| t.spectral_ms);
            TimingSummary {
                n_devices: n,
                replications: cell.len(),
                betweenness_median_ms: stats::median(&b),
                betweenness_stddev_ms: stats::stddev(&b),
                sort_decision_median_ms: stats::median(&s),
                sort_decision_stddev_ms: stats::stddev(&s),
                spectral_median_ms: stats::median(&c),
                spectral_stddev_ms: stats::stddev(&c),
            }
        })
        .collect()
}

/// Runs [`timing_report`] and writes `timing.csv` and `timing_summary.csv`.
pub fn run_timing(config: &ExperimentConfig) -> Result<Vec<TimingSummary>> {
    let timings = timing_report(config)?;
    let summary = summarize_timings(&timings);
    fs::create_dir_all(&config.output_dir)?;
    write_csv(&config.output_dir.join(TIMING_FILE), &timings)?;
    write_csv(&config.output_dir.join(TIMING_SUMMARY_FILE), &summary)?;
    Ok(summary)
}
