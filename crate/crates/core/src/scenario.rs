//! Scenario configuration, validation, the bundled experiment presets, and
//! the runner that fans a scenario out over its seeds and writes CSVs.
//!
//! Configs are TOML with nested sections; unknown keys are hard errors, and
//! every validation message names the offending key so a bad file fails fast
//! and legibly.

use crate::aggregation::AggregationModel;
use crate::channel::{ChannelConfig, InterferenceScope};
use crate::deployment::FieldSpec;
use crate::metrics::{
    average_timeseries, write_summary_csv, write_timeseries_csv, write_zone_series_csv, SummaryRow,
    TickRow,
};
use crate::protocols::{CoordinationBounds, ProtocolKind};
use crate::sim::{RunResult, Simulation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("scenario.sim_time_s must be positive, got {0}")]
    BadSimTime(f64),
    #[error("scenario.round_length_s must be positive, got {0}")]
    BadRoundLength(f64),
    #[error("scenario.round_length_s ({round}) must divide scenario.sim_time_s ({sim}) evenly")]
    RoundDoesNotDivideSim { round: f64, sim: f64 },
    #[error("scenario.sampling_period_s must be positive, got {0}")]
    BadSamplingPeriod(f64),
    #[error("scenario.sampling_period_s ({period}) must divide scenario.round_length_s ({round}) evenly")]
    PeriodDoesNotDivideRound { period: f64, round: f64 },
    #[error("scenario.sample_bytes must be at least 1")]
    ZeroSampleBytes,
    #[error("scenario.metric_tick_s must be positive, got {0}")]
    BadMetricTick(f64),
    #[error("scenario.metric_tick_s ({tick}) must not exceed scenario.round_length_s ({round})")]
    TickExceedsRound { tick: f64, round: f64 },
    #[error("scenario.seeds must list at least one seed")]
    NoSeeds,
    #[error("deployment.nodes is required when deployment.mode = \"uniform\"")]
    MissingNodes,
    #[error("deployment.zone_counts is required when deployment.mode = \"biased\"")]
    MissingZoneCounts,
    #[error("deployment.nodes must be at least 1")]
    ZeroNodes,
    #[error("activity.high_fraction must lie in [0, 1], got {0}")]
    BadHighFraction(f64),
    #[error("activity.rate_multiplier must be at least 1")]
    ZeroRateMultiplier,
    #[error("aggregation.alpha: {0}")]
    Aggregation(#[from] crate::aggregation::AggregationError),
    #[error("coordination bounds: {0}")]
    Coordination(#[from] crate::protocols::ProtocolError),
    #[error("cluster.member_batch_samples must be at least 1")]
    ZeroBatch,
    #[error("channel: {0}")]
    Channel(#[from] crate::channel::ChannelError),
    #[error(
        "channel.jitter_window_s plus the airtime of one member batch \
         ({window_plus_tx_s:.6} s) must stay under the effective sampling period \
         ({period_s:.6} s) so every transmission resolves before the next slot"
    )]
    JitterWindowTooWide { window_plus_tx_s: f64, period_s: f64 },
    #[error("energy.flash_j_per_mb must be non-negative and finite, got {0}")]
    BadFlashCost(f64),
    #[error("energy.radio_multiplier must be non-negative and finite, got {0}")]
    BadRadioMultiplier(f64),
    #[error("field: {0}")]
    Field(#[from] crate::deployment::DeploymentError),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("failed to read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("failed to parse config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("unknown preset '{0}'; run list-presets for the available names")]
    UnknownPreset(String),
}

fn to_micros(secs: f64) -> u64 {
    (secs * 1e6).round() as u64
}

/// Core timing and sizing knobs of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub protocol: ProtocolKind,
    pub sim_time_s: f64,
    pub round_length_s: f64,
    pub sampling_period_s: f64,
    pub sample_bytes: u64,
    pub storage_cap_bytes: u64,
    pub metric_tick_s: f64,
    pub seeds: Vec<u64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            protocol: ProtocolKind::Ls,
            sim_time_s: 500.0,
            round_length_s: 10.0,
            sampling_period_s: 1.0,
            sample_bytes: 100,
            storage_cap_bytes: 30_000,
            metric_tick_s: 1.0,
            seeds: vec![1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeployMode {
    Uniform,
    Biased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeploymentSection {
    pub mode: DeployMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zone_counts: Option<Vec<(u32, u32)>>,
}

impl Default for DeploymentSection {
    fn default() -> Self {
        DeploymentSection { mode: DeployMode::Uniform, nodes: Some(50), zone_counts: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityModel {
    Even,
    Uneven,
}

/// Whether every zone samples at the base rate, or a drawn subset of zones
/// runs `rate_multiplier` times faster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActivitySection {
    pub model: ActivityModel,
    pub high_fraction: f64,
    pub rate_multiplier: u32,
}

impl Default for ActivitySection {
    fn default() -> Self {
        ActivitySection { model: ActivityModel::Even, high_fraction: 0.5, rate_multiplier: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggModelKind {
    ConstantRatio,
    OnePacket,
}

/// When the cluster head writes an aggregate: once per round over the whole
/// buffer, or incrementally as each sample arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggGranularity {
    Round,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregationSection {
    pub model: AggModelKind,
    pub alpha: f64,
    pub granularity: AggGranularity,
}

impl Default for AggregationSection {
    fn default() -> Self {
        AggregationSection {
            model: AggModelKind::ConstantRatio,
            alpha: 0.5,
            granularity: AggGranularity::Round,
        }
    }
}

impl AggregationSection {
    pub fn to_model(self) -> AggregationModel {
        match self.model {
            AggModelKind::ConstantRatio => AggregationModel::ConstantRatio { alpha: self.alpha },
            AggModelKind::OnePacket => AggregationModel::OnePacket,
        }
    }
}

/// Redundancy coordination knobs: the per-zone-per-round reduction draw and
/// the size of the metadata message each participant broadcasts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoordinationSection {
    pub reduction_min: f64,
    pub reduction_max: f64,
    pub meta_bytes: u64,
}

impl Default for CoordinationSection {
    fn default() -> Self {
        CoordinationSection { reduction_min: 0.2, reduction_max: 0.4, meta_bytes: 16 }
    }
}

impl CoordinationSection {
    pub fn bounds(self) -> CoordinationBounds {
        CoordinationBounds {
            reduction_min: self.reduction_min,
            reduction_max: self.reduction_max,
        }
    }

    /// Degenerate (0, 0) bounds disable the exchange entirely, making the
    /// coordinated protocols collapse onto their uncoordinated counterparts.
    pub fn enabled(self) -> bool {
        self.reduction_min > 0.0 || self.reduction_max > 0.0
    }
}

/// Clustering mechanics: election advertisement size and how many samples a
/// member batches into one transmission to its head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterSection {
    pub ad_bytes: u64,
    pub member_batch_samples: u32,
}

impl Default for ClusterSection {
    fn default() -> Self {
        ClusterSection { ad_bytes: 16, member_batch_samples: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    pub flash_j_per_mb: f64,
    pub radio_multiplier: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        EnergySection { flash_j_per_mb: 0.055, radio_multiplier: 40.0 }
    }
}

/// One complete run description; the unit the CLI loads, validates, and runs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub field: FieldSpec,
    pub deployment: DeploymentSection,
    pub activity: ActivitySection,
    pub aggregation: AggregationSection,
    pub coordination: CoordinationSection,
    pub cluster: ClusterSection,
    pub channel: ChannelConfig,
    pub energy: EnergySection,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
            .map_err(|source| HarnessError::Parse { path: path.to_path_buf(), source })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario configs always serialize")
    }

    pub fn sim_end_micros(&self) -> u64 {
        to_micros(self.scenario.sim_time_s)
    }

    pub fn round_micros(&self) -> u64 {
        to_micros(self.scenario.round_length_s)
    }

    pub fn tick_micros(&self) -> u64 {
        to_micros(self.scenario.metric_tick_s)
    }

    pub fn base_period_micros(&self) -> u64 {
        to_micros(self.scenario.sampling_period_s)
    }

    /// Sampling period of a high-activity zone under the uneven model.
    pub fn high_period_micros(&self) -> u64 {
        match self.activity.model {
            ActivityModel::Even => self.base_period_micros(),
            ActivityModel::Uneven => {
                (self.base_period_micros() / self.activity.rate_multiplier.max(1) as u64).max(1)
            }
        }
    }

    /// Total node count of the deployment, whatever its mode.
    pub fn node_count(&self) -> u32 {
        match self.deployment.mode {
            DeployMode::Uniform => self.deployment.nodes.unwrap_or(0),
            DeployMode::Biased => self
                .deployment
                .zone_counts
                .as_ref()
                .map(|zc| zc.iter().map(|&(_, c)| c).sum())
                .unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.scenario;
        if !(s.sim_time_s.is_finite() && s.sim_time_s > 0.0) {
            return Err(ConfigError::BadSimTime(s.sim_time_s));
        }
        if !(s.round_length_s.is_finite() && s.round_length_s > 0.0) {
            return Err(ConfigError::BadRoundLength(s.round_length_s));
        }
        if self.sim_end_micros() % self.round_micros() != 0 {
            return Err(ConfigError::RoundDoesNotDivideSim {
                round: s.round_length_s,
                sim: s.sim_time_s,
            });
        }
        if !(s.sampling_period_s.is_finite() && s.sampling_period_s > 0.0) {
            return Err(ConfigError::BadSamplingPeriod(s.sampling_period_s));
        }
        if self.round_micros() % self.base_period_micros() != 0 {
            return Err(ConfigError::PeriodDoesNotDivideRound {
                period: s.sampling_period_s,
                round: s.round_length_s,
            });
        }
        if s.sample_bytes == 0 {
            return Err(ConfigError::ZeroSampleBytes);
        }
        if !(s.metric_tick_s.is_finite() && s.metric_tick_s > 0.0) {
            return Err(ConfigError::BadMetricTick(s.metric_tick_s));
        }
        if self.tick_micros() > self.round_micros() {
            return Err(ConfigError::TickExceedsRound {
                tick: s.metric_tick_s,
                round: s.round_length_s,
            });
        }
        if s.seeds.is_empty() {
            return Err(ConfigError::NoSeeds);
        }
        match self.deployment.mode {
            DeployMode::Uniform => match self.deployment.nodes {
                None => return Err(ConfigError::MissingNodes),
                Some(0) => return Err(ConfigError::ZeroNodes),
                Some(_) => {}
            },
            DeployMode::Biased => {
                if self.deployment.zone_counts.as_ref().map_or(true, |zc| zc.is_empty()) {
                    return Err(ConfigError::MissingZoneCounts);
                }
            }
        }
        let a = &self.activity;
        if !(a.high_fraction.is_finite() && (0.0..=1.0).contains(&a.high_fraction)) {
            return Err(ConfigError::BadHighFraction(a.high_fraction));
        }
        if a.rate_multiplier == 0 {
            return Err(ConfigError::ZeroRateMultiplier);
        }
        self.aggregation.to_model().validate()?;
        self.coordination.bounds().validate()?;
        if self.cluster.member_batch_samples == 0 {
            return Err(ConfigError::ZeroBatch);
        }
        self.channel.validate()?;
        if self.scenario.protocol.clustered() {
            let batch_bytes =
                s.sample_bytes * self.cluster.member_batch_samples as u64;
            let window_plus_tx = self.channel.jitter_window_micros()
                + self.channel.tx_duration_micros(batch_bytes);
            let period = self.high_period_micros();
            if window_plus_tx >= period {
                return Err(ConfigError::JitterWindowTooWide {
                    window_plus_tx_s: window_plus_tx as f64 / 1e6,
                    period_s: period as f64 / 1e6,
                });
            }
        }
        let e = &self.energy;
        if !(e.flash_j_per_mb.is_finite() && e.flash_j_per_mb >= 0.0) {
            return Err(ConfigError::BadFlashCost(e.flash_j_per_mb));
        }
        if !(e.radio_multiplier.is_finite() && e.radio_multiplier >= 0.0) {
            return Err(ConfigError::BadRadioMultiplier(e.radio_multiplier));
        }
        self.field.validate()?;
        if let (DeployMode::Biased, Some(zc)) =
            (self.deployment.mode, self.deployment.zone_counts.as_ref())
        {
            // Mirror the placement-time checks here so `validate` catches
            // everything before a run starts.
            let zones = self.field.zone_count();
            let mut seen = std::collections::BTreeSet::new();
            for &(zone, count) in zc {
                if zone >= zones {
                    return Err(crate::deployment::DeploymentError::UnknownZone(zone, zones).into());
                }
                if count == 0 {
                    return Err(crate::deployment::DeploymentError::ZeroCount(zone).into());
                }
                if !seen.insert(zone) {
                    return Err(crate::deployment::DeploymentError::DuplicateZone(zone).into());
                }
            }
        }
        Ok(())
    }
}

/// One labeled run of a preset expansion.
#[derive(Debug, Clone)]
pub struct PresetRun {
    pub label: String,
    pub config: ScenarioConfig,
    /// Whether this run's per-zone series is part of the preset's output.
    pub zone_series: bool,
}

/// The bundled experiments. Each expands to a list of labeled scenarios
/// whose structure is pinned by a golden test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentPreset {
    Fig1Storage,
    Fig2Energy,
    Fig3Collection,
    Fig4Depletion,
    Fig5Bincov,
    Fig6Manifold,
    Fig7Biased,
}

impl ExperimentPreset {
    pub const ALL: [ExperimentPreset; 7] = [
        ExperimentPreset::Fig1Storage,
        ExperimentPreset::Fig2Energy,
        ExperimentPreset::Fig3Collection,
        ExperimentPreset::Fig4Depletion,
        ExperimentPreset::Fig5Bincov,
        ExperimentPreset::Fig6Manifold,
        ExperimentPreset::Fig7Biased,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentPreset::Fig1Storage => "fig1_storage",
            ExperimentPreset::Fig2Energy => "fig2_energy",
            ExperimentPreset::Fig3Collection => "fig3_collection",
            ExperimentPreset::Fig4Depletion => "fig4_depletion",
            ExperimentPreset::Fig5Bincov => "fig5_bincov",
            ExperimentPreset::Fig6Manifold => "fig6_manifold",
            ExperimentPreset::Fig7Biased => "fig7_biased",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentPreset::Fig1Storage => {
                "final storage per sensor: four protocols at 50/100/150 nodes"
            }
            ExperimentPreset::Fig2Energy => {
                "storage-phase radio energy: four protocols at 50/100/150 nodes"
            }
            ExperimentPreset::Fig3Collection => {
                "collection time: four protocols at 50/100/150 nodes"
            }
            ExperimentPreset::Fig4Depletion => {
                "depletion timeline: LS vs CBCS under even and uneven generation"
            }
            ExperimentPreset::Fig5Bincov => {
                "binary coverage timeline: LS vs CBCS under even and uneven generation"
            }
            ExperimentPreset::Fig6Manifold => {
                "manifold coverage and dead zones: LS vs CBCS, even and uneven"
            }
            ExperimentPreset::Fig7Biased => {
                "biased deployment: per-zone exhaustion under the two aggregation laws"
            }
        }
    }

    pub fn from_name(name: &str) -> Result<Self, HarnessError> {
        ExperimentPreset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))
    }

    pub fn expand(self) -> Vec<PresetRun> {
        match self {
            ExperimentPreset::Fig1Storage
            | ExperimentPreset::Fig2Energy
            | ExperimentPreset::Fig3Collection => {
                let mut runs = Vec::new();
                for protocol in ProtocolKind::ALL {
                    for nodes in [50u32, 100, 150] {
                        let mut cfg = ScenarioConfig::default();
                        cfg.scenario.protocol = protocol;
                        // Rounds short enough that head tenure cycles through
                        // every member well before the run ends.
                        cfg.scenario.round_length_s = 10.0;
                        cfg.scenario.storage_cap_bytes = 10_000_000;
                        cfg.scenario.metric_tick_s = 10.0;
                        cfg.scenario.seeds = vec![1, 2, 3, 4, 5];
                        cfg.deployment.nodes = Some(nodes);
                        runs.push(PresetRun {
                            label: format!("{}_n{nodes}", protocol.to_string().to_lowercase()),
                            config: cfg,
                            zone_series: false,
                        });
                    }
                }
                runs
            }
            ExperimentPreset::Fig4Depletion
            | ExperimentPreset::Fig5Bincov
            | ExperimentPreset::Fig6Manifold => {
                let mut runs = Vec::new();
                for protocol in [ProtocolKind::Ls, ProtocolKind::Cbcs] {
                    for model in [ActivityModel::Even, ActivityModel::Uneven] {
                        let mut cfg = ScenarioConfig::default();
                        cfg.scenario.protocol = protocol;
                        cfg.scenario.round_length_s = 10.0;
                        cfg.scenario.seeds = vec![1, 2, 3, 4, 5];
                        cfg.deployment.nodes = Some(50);
                        cfg.activity.model = model;
                        cfg.aggregation.granularity = AggGranularity::Sample;
                        let tag = match model {
                            ActivityModel::Even => "even",
                            ActivityModel::Uneven => "uneven",
                        };
                        runs.push(PresetRun {
                            label: format!("{}_{tag}", protocol.to_string().to_lowercase()),
                            config: cfg,
                            zone_series: false,
                        });
                    }
                }
                runs
            }
            ExperimentPreset::Fig7Biased => {
                let mut runs = Vec::new();
                for (model, cap) in
                    [(AggModelKind::ConstantRatio, 10_000u64), (AggModelKind::OnePacket, 1_000)]
                {
                    let mut cfg = ScenarioConfig::default();
                    cfg.scenario.protocol = ProtocolKind::Cbcs;
                    cfg.scenario.sim_time_s = 600.0;
                    cfg.scenario.round_length_s = 10.0;
                    cfg.scenario.metric_tick_s = 10.0;
                    cfg.scenario.storage_cap_bytes = cap;
                    cfg.scenario.seeds = vec![1];
                    cfg.deployment.mode = DeployMode::Biased;
                    cfg.deployment.nodes = None;
                    cfg.deployment.zone_counts = Some(vec![(0, 5), (1, 4), (2, 3), (3, 2)]);
                    cfg.aggregation.model = model;
                    cfg.aggregation.granularity = AggGranularity::Sample;
                    cfg.channel.interference = InterferenceScope::None;
                    let tag = match model {
                        AggModelKind::ConstantRatio => "constant_ratio",
                        AggModelKind::OnePacket => "one_packet",
                    };
                    runs.push(PresetRun {
                        label: tag.to_string(),
                        config: cfg,
                        zone_series: true,
                    });
                }
                runs
            }
        }
    }
}

/// Everything one scenario produced: the per-seed runs and their tick-grid
/// average.
#[derive(Debug)]
pub struct ScenarioOutcome {
    pub label: String,
    pub config: ScenarioConfig,
    pub runs: Vec<RunResult>,
    pub averaged: Vec<TickRow>,
}

/// Validates a scenario and runs every seed (in parallel across seeds; set
/// RAYON_NUM_THREADS to bound the worker count).
pub fn run_scenario(label: &str, cfg: &ScenarioConfig) -> Result<ScenarioOutcome, ConfigError> {
    cfg.validate()?;
    let runs: Vec<RunResult> = cfg
        .scenario
        .seeds
        .par_iter()
        .map(|&seed| Simulation::new(cfg, seed).expect("config validated above").run())
        .collect();
    let averaged = average_timeseries(&runs.iter().map(|r| r.ticks.clone()).collect::<Vec<_>>());
    Ok(ScenarioOutcome { label: label.to_string(), config: cfg.clone(), runs, averaged })
}

/// Writes one scenario's CSVs: a timeseries per seed, the seed-averaged
/// timeseries, and optionally the per-zone series per seed.
pub fn write_scenario_outputs(
    out_dir: &Path,
    outcome: &ScenarioOutcome,
    zone_series: bool,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|source| HarnessError::Write { path: out_dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let wrap = |path: PathBuf| move |source| HarnessError::Write { path, source };
    for run in &outcome.runs {
        let path = out_dir.join(format!("{}.seed{}.csv", outcome.label, run.seed));
        write_timeseries_csv(&path, &run.ticks).map_err(wrap(path.clone()))?;
        written.push(path);
        if zone_series {
            let path = out_dir.join(format!("{}.seed{}.zones.csv", outcome.label, run.seed));
            write_zone_series_csv(&path, &run.zone_ticks).map_err(wrap(path.clone()))?;
            written.push(path);
        }
    }
    let avg_path = out_dir.join(format!("{}.avg.csv", outcome.label));
    write_timeseries_csv(&avg_path, &outcome.averaged).map_err(wrap(avg_path.clone()))?;
    written.push(avg_path);
    Ok(written)
}

/// Runs a whole preset; with an output directory, also writes each run's
/// CSVs plus a combined summary.csv (one row per run per seed).
pub fn run_preset(
    preset: ExperimentPreset,
    out_dir: Option<&Path>,
) -> Result<Vec<ScenarioOutcome>, HarnessError> {
    let runs = preset.expand();
    // Validate everything up front so a bad expansion writes nothing.
    for r in &runs {
        r.config.validate()?;
    }
    let mut outcomes = Vec::new();
    for r in &runs {
        let outcome = run_scenario(&r.label, &r.config)?;
        if let Some(dir) = out_dir {
            write_scenario_outputs(dir, &outcome, r.zone_series)?;
        }
        outcomes.push(outcome);
    }
    if let Some(dir) = out_dir {
        let summary_rows: Vec<SummaryRow> = outcomes
            .iter()
            .flat_map(|o| o.runs.iter().map(|r| r.summary))
            .collect();
        let path = dir.join("summary.csv");
        write_summary_csv(&path, &summary_rows)
            .map_err(|source| HarnessError::Write { path: path.clone(), source })?;
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ScenarioConfig::default().validate().expect("defaults must validate");
    }

    #[test]
    fn toml_round_trips() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.protocol = ProtocolKind::Ccs;
        cfg.scenario.seeds = vec![7, 8];
        cfg.channel.jitter_window_s = 0.25;
        let text = cfg.to_toml_string();
        let parsed = ScenarioConfig::from_toml_str(&text).expect("round trip parse");
        assert_eq!(parsed, cfg, "serialize/parse must be lossless");
    }

    #[test]
    fn biased_deployments_parse_from_toml() {
        let text = "[deployment]\nmode = \"biased\"\nzone_counts = [[0, 5], [3, 2]]\n";
        let cfg = ScenarioConfig::from_toml_str(text).expect("parse");
        assert_eq!(cfg.deployment.mode, DeployMode::Biased);
        assert_eq!(cfg.deployment.zone_counts, Some(vec![(0, 5), (3, 2)]));
        cfg.validate().expect("a stray default node count is ignored under biased mode");
        assert_eq!(cfg.node_count(), 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[scenario]\nprotocol = \"ls\"\nwarp_speed = 9\n";
        let err = ScenarioConfig::from_toml_str(text).unwrap_err();
        assert!(
            err.to_string().contains("warp_speed"),
            "error should name the unknown key, got: {err}"
        );
    }

    #[test]
    fn validation_names_the_offending_key() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.round_length_s = 7.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("round_length_s"), "got: {err}");

        let mut cfg = ScenarioConfig::default();
        cfg.scenario.metric_tick_s = 0.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("metric_tick_s"), "got: {err}");

        let mut cfg = ScenarioConfig::default();
        cfg.deployment.mode = DeployMode::Biased;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("zone_counts"), "got: {err}");

        let mut cfg = ScenarioConfig::default();
        cfg.scenario.protocol = ProtocolKind::Cbcs;
        cfg.channel.jitter_window_s = 1.5;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("jitter_window_s"), "got: {err}");
    }

    #[test]
    fn jitter_window_check_uses_the_high_rate_period() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.protocol = ProtocolKind::Cbcs;
        cfg.activity.model = ActivityModel::Uneven;
        cfg.activity.rate_multiplier = 2;
        cfg.channel.jitter_window_s = 0.498;
        // 0.498 s window + 3.2 ms airtime fits under 1 s but not under the
        // 0.5 s high-zone period.
        assert!(cfg.validate().is_err());
        cfg.activity.model = ActivityModel::Even;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn preset_names_round_trip() {
        for p in ExperimentPreset::ALL {
            assert_eq!(ExperimentPreset::from_name(p.name()).unwrap(), p);
        }
        assert!(matches!(
            ExperimentPreset::from_name("fig9_warp"),
            Err(HarnessError::UnknownPreset(_))
        ));
    }

    #[test]
    fn density_sweep_presets_expand_to_twelve_runs() {
        let runs = ExperimentPreset::Fig1Storage.expand();
        let labels: Vec<&str> = runs.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "ls_n50", "ls_n100", "ls_n150", "cls_n50", "cls_n100", "cls_n150", "cbcs_n50",
                "cbcs_n100", "cbcs_n150", "ccs_n50", "ccs_n100", "ccs_n150",
            ],
            "preset expansion must stay stable"
        );
        for r in &runs {
            assert_eq!(r.config.scenario.seeds, vec![1, 2, 3, 4, 5]);
            assert_eq!(r.config.scenario.storage_cap_bytes, 10_000_000);
            assert_eq!(r.config.scenario.sim_time_s, 500.0);
            assert_eq!(r.config.scenario.round_length_s, 10.0);
            r.config.validate().expect("preset configs must validate");
        }
        let energy = ExperimentPreset::Fig2Energy.expand();
        assert_eq!(energy.len(), 12);
    }

    #[test]
    fn coverage_presets_pair_protocols_with_activity_models() {
        let runs = ExperimentPreset::Fig4Depletion.expand();
        let labels: Vec<&str> = runs.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, vec!["ls_even", "ls_uneven", "cbcs_even", "cbcs_uneven"]);
        for r in &runs {
            assert_eq!(r.config.deployment.nodes, Some(50));
            assert_eq!(r.config.scenario.round_length_s, 10.0);
            assert_eq!(r.config.scenario.storage_cap_bytes, 30_000);
            assert_eq!(r.config.aggregation.granularity, AggGranularity::Sample);
            r.config.validate().expect("preset configs must validate");
        }
    }

    #[test]
    fn biased_preset_pins_the_rate_law_setup() {
        let runs = ExperimentPreset::Fig7Biased.expand();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].label, "constant_ratio");
        assert_eq!(runs[1].label, "one_packet");
        for r in &runs {
            assert_eq!(
                r.config.deployment.zone_counts,
                Some(vec![(0, 5), (1, 4), (2, 3), (3, 2)])
            );
            assert_eq!(r.config.channel.interference, InterferenceScope::None);
            assert_eq!(r.config.scenario.sim_time_s, 600.0);
            assert!(r.zone_series);
            r.config.validate().expect("preset configs must validate");
        }
        assert_eq!(runs[0].config.scenario.storage_cap_bytes, 10_000);
        assert_eq!(runs[1].config.scenario.storage_cap_bytes, 1_000);
    }
}
