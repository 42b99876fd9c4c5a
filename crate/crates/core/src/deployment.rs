//! Field geometry and node placement: a rectangular field tiled into square
//! zones small enough that any two nodes sharing a zone can hear each other,
//! plus the uniform and per-zone (biased) deployment generators.

use crate::domain::{NodeId, SensorNode, ZoneId};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DeploymentError {
    #[error("field width {width} m is not a positive multiple of zone_side {side} m")]
    WidthNotTiled { width: f64, side: f64 },
    #[error("field height {height} m is not a positive multiple of zone_side {side} m")]
    HeightNotTiled { height: f64, side: f64 },
    #[error("zone diagonal {diag:.2} m reaches radio_range {range} m; zone members could not all hear each other")]
    RangeTooShort { diag: f64, range: f64 },
    #[error("deployment needs at least one node")]
    EmptyDeployment,
    #[error("zone id {0} is not on a grid of {1} zones")]
    UnknownZone(u32, u32),
    #[error("zone id {0} appears more than once in the deployment counts")]
    DuplicateZone(u32),
    #[error("zone id {0} requests a node count of zero")]
    ZeroCount(u32),
}

/// Whether a zone's sensors report at the base rate or at the elevated rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZoneActivity {
    #[default]
    Low,
    High,
}

/// The rectangular field and its zone tiling parameters, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub width_m: f64,
    pub height_m: f64,
    pub zone_side_m: f64,
    pub radio_range_m: f64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::default_square()
    }
}

impl FieldSpec {
    /// The 350 m square field with 70 m zones and 100 m radios used by the
    /// bundled experiments.
    pub fn default_square() -> Self {
        FieldSpec {
            width_m: 350.0,
            height_m: 350.0,
            zone_side_m: 70.0,
            radio_range_m: 100.0,
        }
    }

    fn tiled(extent: f64, side: f64) -> Option<u32> {
        if side <= 0.0 || extent <= 0.0 {
            return None;
        }
        let count = (extent / side).round();
        if count >= 1.0 && (count * side - extent).abs() < 1e-6 {
            Some(count as u32)
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<(), DeploymentError> {
        Self::tiled(self.width_m, self.zone_side_m).ok_or(DeploymentError::WidthNotTiled {
            width: self.width_m,
            side: self.zone_side_m,
        })?;
        Self::tiled(self.height_m, self.zone_side_m).ok_or(DeploymentError::HeightNotTiled {
            height: self.height_m,
            side: self.zone_side_m,
        })?;
        let diag = self.zone_side_m * std::f64::consts::SQRT_2;
        if diag >= self.radio_range_m {
            return Err(DeploymentError::RangeTooShort {
                diag,
                range: self.radio_range_m,
            });
        }
        Ok(())
    }

    pub fn cols(&self) -> u32 {
        Self::tiled(self.width_m, self.zone_side_m).expect("validated field")
    }

    pub fn rows(&self) -> u32 {
        Self::tiled(self.height_m, self.zone_side_m).expect("validated field")
    }

    pub fn zone_count(&self) -> u32 {
        self.cols() * self.rows()
    }
}

/// One grid cell: its closed-ended bounds, resident nodes, and activity level.
#[derive(Debug, Clone)]
pub struct Zone {
    pub id: ZoneId,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub members: Vec<NodeId>,
    pub activity: ZoneActivity,
}

/// The zone tiling of a validated field, with per-zone membership.
#[derive(Debug, Clone)]
pub struct ZoneGrid {
    pub field: FieldSpec,
    pub zones: Vec<Zone>,
    cols: u32,
    rows: u32,
}

impl ZoneGrid {
    pub fn new(field: FieldSpec) -> Result<Self, DeploymentError> {
        field.validate()?;
        let cols = field.cols();
        let rows = field.rows();
        let side = field.zone_side_m;
        let zones = (0..rows * cols)
            .map(|i| {
                let col = i % cols;
                let row = i / cols;
                Zone {
                    id: ZoneId(i),
                    x0: col as f64 * side,
                    y0: row as f64 * side,
                    x1: (col + 1) as f64 * side,
                    y1: (row + 1) as f64 * side,
                    members: Vec::new(),
                    activity: ZoneActivity::Low,
                }
            })
            .collect();
        Ok(ZoneGrid { field, zones, cols, rows })
    }

    pub fn zone_count(&self) -> u32 {
        self.cols * self.rows
    }

    fn cell_index(coord: f64, side: f64, count: u32) -> u32 {
        // A coordinate exactly on a cell edge belongs to the lower-indexed
        // cell, so cells are (lo, hi] except the first, which is [0, hi].
        if coord <= 0.0 {
            return 0;
        }
        let idx = (coord / side).ceil() as i64 - 1;
        idx.clamp(0, count as i64 - 1) as u32
    }

    /// Maps a field position to its zone. Total over the closed field
    /// rectangle; edge coordinates resolve to the lower-indexed zone.
    pub fn zone_of(&self, x: f64, y: f64) -> ZoneId {
        assert!(
            (0.0..=self.field.width_m).contains(&x) && (0.0..=self.field.height_m).contains(&y),
            "position ({x}, {y}) is outside the field"
        );
        let col = Self::cell_index(x, self.field.zone_side_m, self.cols);
        let row = Self::cell_index(y, self.field.zone_side_m, self.rows);
        ZoneId(row * self.cols + col)
    }

    /// Places `n` nodes uniformly over the whole field.
    pub fn place_uniform<R: Rng>(
        &mut self,
        n: u32,
        storage_cap: u64,
        rng: &mut R,
    ) -> Result<Vec<SensorNode>, DeploymentError> {
        if n == 0 {
            return Err(DeploymentError::EmptyDeployment);
        }
        let mut nodes = Vec::with_capacity(n as usize);
        for i in 0..n {
            let x = rng.random_range(0.0..self.field.width_m);
            let y = rng.random_range(0.0..self.field.height_m);
            let zone = self.zone_of(x, y);
            let node = SensorNode::new(NodeId(i), (x, y), zone, storage_cap, self.field.radio_range_m);
            self.zones[zone.0 as usize].members.push(node.id);
            nodes.push(node);
        }
        Ok(nodes)
    }

    /// Places the requested node count uniformly inside each listed zone,
    /// leaving every other zone empty.
    pub fn place_biased<R: Rng>(
        &mut self,
        zone_counts: &[(u32, u32)],
        storage_cap: u64,
        rng: &mut R,
    ) -> Result<Vec<SensorNode>, DeploymentError> {
        if zone_counts.is_empty() {
            return Err(DeploymentError::EmptyDeployment);
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(zone, count) in zone_counts {
            if zone >= self.zone_count() {
                return Err(DeploymentError::UnknownZone(zone, self.zone_count()));
            }
            if count == 0 {
                return Err(DeploymentError::ZeroCount(zone));
            }
            if !seen.insert(zone) {
                return Err(DeploymentError::DuplicateZone(zone));
            }
        }
        let mut nodes = Vec::new();
        let mut next_id = 0u32;
        for &(zone_idx, count) in zone_counts {
            let (x0, y0, x1, y1) = {
                let z = &self.zones[zone_idx as usize];
                (z.x0, z.y0, z.x1, z.y1)
            };
            for _ in 0..count {
                // Redraw the rare edge hit so the edge-ownership rule cannot
                // put the node in a neighboring zone.
                let (x, y) = loop {
                    let x = rng.random_range(x0..x1);
                    let y = rng.random_range(y0..y1);
                    if self.zone_of(x, y) == ZoneId(zone_idx) {
                        break (x, y);
                    }
                };
                let node = SensorNode::new(
                    NodeId(next_id),
                    (x, y),
                    ZoneId(zone_idx),
                    storage_cap,
                    self.field.radio_range_m,
                );
                self.zones[zone_idx as usize].members.push(node.id);
                nodes.push(node);
                next_id += 1;
            }
        }
        Ok(nodes)
    }

    /// Marks ceil(high_fraction x zone count) distinct zones High, the rest
    /// Low.
    pub fn assign_activity<R: Rng>(&mut self, high_fraction: f64, rng: &mut R) {
        assert!(
            (0.0..=1.0).contains(&high_fraction),
            "high_fraction must lie in [0, 1]"
        );
        for z in &mut self.zones {
            z.activity = ZoneActivity::Low;
        }
        let count = self.zone_count() as usize;
        // Subtract a hair before the ceiling so float noise in the product
        // (e.g. 0.4 x 25 = 10.000000000000002) cannot bump the count.
        let k = ((high_fraction * count as f64 - 1e-9).ceil().max(0.0) as usize).min(count);
        if k == 0 {
            return;
        }
        for idx in rand::seq::index::sample(rng, count, k) {
            self.zones[idx].activity = ZoneActivity::High;
        }
    }
}

/// Renders a topology as a plain-text table for inspection and replay.
pub fn topology_table(nodes: &[SensorNode]) -> String {
    let mut out = String::from("node\tx\ty\tzone\n");
    for n in nodes {
        out.push_str(&format!("{}\t{:.3}\t{:.3}\t{}\n", n.id.0, n.pos.0, n.pos.1, n.zone.0));
    }
    out
}
