//! Core value types: node and sample records, and the energy model shared by
//! flash writes and radio traffic.
//!
//! Energy is tracked in integer picojoules so that accounting is exact: the
//! default flash cost of 0.055 J/MB is exactly 55,000 pJ/byte and the radio
//! costs 40 times that per byte, so sums and ratios never drift.

use crate::engine::SimTime;
use serde::{Deserialize, Serialize};

/// Identifies a sensor node. Ids are dense, assigned in deployment order,
/// and double as election tie-breakers (lowest id wins).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Identifies a zone of the deployment grid, row-major from the origin corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ZoneId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl std::fmt::Display for ZoneId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "z{}", self.0)
    }
}

/// An amount of energy in integer picojoules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Energy(u64);

impl Energy {
    pub const ZERO: Energy = Energy(0);

    pub fn from_picojoules(pj: u64) -> Self {
        Energy(pj)
    }

    pub fn picojoules(self) -> u64 {
        self.0
    }

    pub fn joules(self) -> f64 {
        self.0 as f64 * 1e-12
    }
}

impl std::ops::Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, |a, b| a + b)
    }
}

/// Direction of a radio transfer, for energy accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadioDir {
    Tx,
    Rx,
}

/// Per-byte energy costs for flash writes and radio transfers.
///
/// Receive cost equals transmit cost; both are `radio_multiplier` times the
/// flash write cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyModel {
    store_pj_per_byte: u64,
    tx_pj_per_byte: u64,
    rx_pj_per_byte: u64,
}

impl EnergyModel {
    /// Builds a model from a flash cost in joules per megabyte (1 MB = 10^6
    /// bytes) and a radio-to-flash cost ratio. Rates are rounded to the
    /// nearest picojoule per byte; the defaults convert exactly.
    pub fn new(flash_j_per_mb: f64, radio_multiplier: f64) -> Self {
        assert!(
            flash_j_per_mb >= 0.0 && radio_multiplier >= 0.0,
            "energy rates must be non-negative"
        );
        let store = (flash_j_per_mb * 1e6).round() as u64;
        let radio = (flash_j_per_mb * 1e6 * radio_multiplier).round() as u64;
        EnergyModel {
            store_pj_per_byte: store,
            tx_pj_per_byte: radio,
            rx_pj_per_byte: radio,
        }
    }

    pub fn store_pj_per_byte(&self) -> u64 {
        self.store_pj_per_byte
    }

    pub fn tx_pj_per_byte(&self) -> u64 {
        self.tx_pj_per_byte
    }

    /// Energy to write `bytes` to flash.
    pub fn storage_energy(&self, bytes: u64) -> Energy {
        Energy(bytes * self.store_pj_per_byte)
    }

    /// Energy to move `bytes` over the radio in the given direction.
    pub fn radio_energy(&self, bytes: u64, dir: RadioDir) -> Energy {
        let rate = match dir {
            RadioDir::Tx => self.tx_pj_per_byte,
            RadioDir::Rx => self.rx_pj_per_byte,
        };
        Energy(bytes * rate)
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel::new(0.055, 40.0)
    }
}

/// Outcome of an attempt to store bytes into a node's flash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreOutcome {
    Stored,
    Rejected,
}

/// One sensor reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataSample {
    pub origin: NodeId,
    pub zone: ZoneId,
    pub t_gen: SimTime,
    pub size: u64,
}

impl DataSample {
    /// Builds a sample taken by `node` at time `t`. Samples always carry a
    /// positive payload and inherit the zone the node was deployed in.
    pub fn taken_by(node: &SensorNode, t: SimTime, size: u64) -> Self {
        assert!(size > 0, "samples carry a positive payload");
        DataSample {
            origin: node.id,
            zone: node.zone,
            t_gen: t,
            size,
        }
    }
}

/// A deployed sensor: fixed position and zone, a flash budget, and energy
/// meters split between the storage phase and the collection phase.
#[derive(Debug, Clone)]
pub struct SensorNode {
    pub id: NodeId,
    pub pos: (f64, f64),
    pub zone: ZoneId,
    pub storage_cap: u64,
    pub storage_used: u64,
    /// Total energy spent during the storage phase (flash + radio + idle).
    pub energy_pre: Energy,
    /// Radio share of `energy_pre`; local-only protocols keep this at zero.
    pub radio_pre: Energy,
    /// Energy spent offloading stored data during the collection phase.
    pub energy_post: Energy,
    pub radio_range: f64,
}

impl SensorNode {
    pub fn new(id: NodeId, pos: (f64, f64), zone: ZoneId, storage_cap: u64, radio_range: f64) -> Self {
        SensorNode {
            id,
            pos,
            zone,
            storage_cap,
            storage_used: 0,
            energy_pre: Energy::ZERO,
            radio_pre: Energy::ZERO,
            energy_post: Energy::ZERO,
            radio_range,
        }
    }

    pub fn available(&self) -> u64 {
        self.storage_cap - self.storage_used
    }

    /// Writes `bytes` to flash if they fit in one piece. On success the used
    /// counter grows and the flash write energy is charged; a rejected write
    /// leaves the node untouched.
    pub fn try_store(&mut self, bytes: u64, energy: &EnergyModel) -> StoreOutcome {
        if bytes > self.available() {
            return StoreOutcome::Rejected;
        }
        self.storage_used += bytes;
        self.energy_pre += energy.storage_energy(bytes);
        StoreOutcome::Stored
    }

    /// Charges a storage-phase radio transfer of `bytes`.
    pub fn charge_radio_pre(&mut self, bytes: u64, dir: RadioDir, energy: &EnergyModel) {
        let e = energy.radio_energy(bytes, dir);
        self.energy_pre += e;
        self.radio_pre += e;
    }

    /// Charges storage-phase energy for keeping the radio powered, as during
    /// a cluster-head tenure. Counted as radio energy.
    pub fn charge_idle_pre(&mut self, e: Energy) {
        self.energy_pre += e;
        self.radio_pre += e;
    }

    /// Charges a collection-phase transmission of `bytes`.
    pub fn charge_radio_post(&mut self, bytes: u64, energy: &EnergyModel) {
        self.energy_post += energy.radio_energy(bytes, RadioDir::Tx);
    }
}
