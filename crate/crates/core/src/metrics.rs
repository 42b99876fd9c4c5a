//! Coverage, depletion and collection metrics, plus the fixed-schema CSV
//! writers the harness emits.
//!
//! Coverage asks whether a zone can still absorb an observation of `demand`
//! bytes somewhere on its members' storing paths; depletion asks whether a
//! node's own flash is below one observation. The collection phase drains
//! every holder over a one-hop link and reports per-holder transfer times.

use crate::domain::{Energy, EnergyModel, SensorNode};
use crate::protocols::ProtocolKind;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// One zone at one instant: for every member, the bytes still available on
/// its storing path (the cluster head's flash while attached, its own
/// otherwise).
#[derive(Debug, Clone)]
pub struct ZoneCapability {
    pub effective_avail: Vec<u64>,
}

impl ZoneCapability {
    fn members(&self) -> usize {
        self.effective_avail.len()
    }

    fn capable(&self, demand: u64) -> usize {
        self.effective_avail.iter().filter(|&&a| a >= demand).count()
    }
}

/// Fraction of occupied zones with at least `min_frac` of their members able
/// to absorb `demand` bytes (inclusive threshold; `min_frac` 0 degenerates to
/// "at least one member"). Empty zones are outside the denominator.
pub fn manifold_coverage(zones: &[ZoneCapability], demand: u64, min_frac: f64) -> f64 {
    assert!((0.0..=1.0).contains(&min_frac), "coverage threshold must lie in [0, 1]");
    let occupied: Vec<&ZoneCapability> = zones.iter().filter(|z| z.members() > 0).collect();
    if occupied.is_empty() {
        return 0.0;
    }
    let covered = occupied
        .iter()
        .filter(|z| {
            let need = ((min_frac * z.members() as f64 - 1e-9).ceil().max(0.0) as usize).max(1);
            z.capable(demand) >= need
        })
        .count();
    covered as f64 / occupied.len() as f64
}

/// Fraction of occupied zones where at least one member can absorb `demand`
/// bytes. Identical to `manifold_coverage` at threshold zero.
pub fn binary_coverage(zones: &[ZoneCapability], demand: u64) -> f64 {
    manifold_coverage(zones, demand, 0.0)
}

/// One row of the per-tick timeseries, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRow {
    pub t_s: f64,
    pub mean_storage_bytes: f64,
    pub depleted_frac: f64,
    pub bincov: f64,
    pub cov25: f64,
    pub cov50: f64,
    pub cov100: f64,
    pub deadzone_frac: f64,
}

/// One zone's state at one tick, for the per-zone series of the biased
/// deployment study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneTickRow {
    pub t_s: f64,
    pub zone: u32,
    pub members: u32,
    pub capable_frac: f64,
    pub all_depleted: bool,
}

/// One run's summary line, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub protocol: ProtocolKind,
    pub density: u32,
    pub seed: u64,
    pub pre_energy_j: f64,
    pub post_energy_j: f64,
    pub loss_frac: f64,
    pub mean_collection_s: f64,
    pub mean_storage_final_bytes: f64,
}

/// Everything a run records tick by tick.
#[derive(Debug, Clone, Default)]
pub struct MetricsLog {
    pub ticks: Vec<TickRow>,
    pub zone_ticks: Vec<ZoneTickRow>,
}

/// Result of draining every holder after the storage phase ends.
#[derive(Debug, Clone)]
pub struct CollectionReport {
    /// Transfer time per node, zero for nodes holding nothing.
    pub per_node_s: Vec<f64>,
    pub holders: u32,
    pub mean_collection_s: f64,
    pub post_energy: Energy,
}

/// Sequentially polls every node holding data and transfers its stored bytes
/// at `bandwidth` bytes per second over one hop, charging collection-phase
/// transmit energy for exactly the stored bytes. The mean is over holders
/// only; nodes that stored nothing neither transmit nor count.
pub fn run_collection(
    nodes: &mut [SensorNode],
    bandwidth_bytes_per_s: u64,
    energy: &EnergyModel,
) -> CollectionReport {
    assert!(bandwidth_bytes_per_s > 0, "collection bandwidth must be positive");
    let mut per_node_s = vec![0.0; nodes.len()];
    let mut holders = 0u32;
    let mut total_s = 0.0;
    let mut post_energy = Energy::ZERO;
    for (i, node) in nodes.iter_mut().enumerate() {
        if node.storage_used == 0 {
            continue;
        }
        holders += 1;
        let secs = node.storage_used as f64 / bandwidth_bytes_per_s as f64;
        per_node_s[i] = secs;
        total_s += secs;
        node.charge_radio_post(node.storage_used, energy);
        post_energy += energy.radio_energy(node.storage_used, crate::domain::RadioDir::Tx);
    }
    let mean_collection_s = if holders > 0 { total_s / holders as f64 } else { 0.0 };
    CollectionReport { per_node_s, holders, mean_collection_s, post_energy }
}

pub const TIMESERIES_HEADER: &str =
    "t,mean_storage_bytes,depleted_frac,bincov,cov25,cov50,cov100,deadzone_frac";
pub const SUMMARY_HEADER: &str =
    "protocol,density,seed,pre_energy_J,post_energy_J,loss_frac,mean_collection_s,mean_storage_final_bytes";
pub const ZONE_SERIES_HEADER: &str = "t,zone,members,capable_frac,all_depleted";

pub fn write_timeseries_csv(path: &Path, rows: &[TickRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.t_s,
            r.mean_storage_bytes,
            r.depleted_frac,
            r.bincov,
            r.cov25,
            r.cov50,
            r.cov100,
            r.deadzone_frac
        )?;
    }
    w.flush()
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.protocol,
            r.density,
            r.seed,
            r.pre_energy_j,
            r.post_energy_j,
            r.loss_frac,
            r.mean_collection_s,
            r.mean_storage_final_bytes
        )?;
    }
    w.flush()
}

pub fn write_zone_series_csv(path: &Path, rows: &[ZoneTickRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{ZONE_SERIES_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.t_s, r.zone, r.members, r.capable_frac, r.all_depleted)?;
    }
    w.flush()
}

/// Column-wise arithmetic mean of several runs' timeseries. Every series must
/// cover the same ticks.
pub fn average_timeseries(series: &[Vec<TickRow>]) -> Vec<TickRow> {
    let Some(first) = series.first() else { return Vec::new() };
    for s in series {
        assert_eq!(s.len(), first.len(), "seed runs must produce identical tick grids");
    }
    let n = series.len() as f64;
    (0..first.len())
        .map(|i| {
            let mut acc = TickRow {
                t_s: first[i].t_s,
                mean_storage_bytes: 0.0,
                depleted_frac: 0.0,
                bincov: 0.0,
                cov25: 0.0,
                cov50: 0.0,
                cov100: 0.0,
                deadzone_frac: 0.0,
            };
            for s in series {
                let r = s[i];
                assert_eq!(r.t_s, acc.t_s, "tick grids must align");
                acc.mean_storage_bytes += r.mean_storage_bytes;
                acc.depleted_frac += r.depleted_frac;
                acc.bincov += r.bincov;
                acc.cov25 += r.cov25;
                acc.cov50 += r.cov50;
                acc.cov100 += r.cov100;
                acc.deadzone_frac += r.deadzone_frac;
            }
            acc.mean_storage_bytes /= n;
            acc.depleted_frac /= n;
            acc.bincov /= n;
            acc.cov25 /= n;
            acc.cov50 /= n;
            acc.cov100 /= n;
            acc.deadzone_frac /= n;
            acc
        })
        .collect()
}
