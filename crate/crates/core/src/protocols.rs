//! The four storage-management strategies and their round-level machinery:
//! cluster-head election by available storage, and the coordination draw that
//! tells a zone what fraction of its samples is redundant this round.

use crate::domain::NodeId;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("coordination bounds must satisfy 0 <= min <= max < 1, got ({0}, {1})")]
    BadReductionBounds(f64, f64),
}

/// Which storage strategy every node in a run follows.
///
/// - `Ls`: store every sample locally; the radio stays off.
/// - `Cls`: local storage plus per-round coordination that suppresses
///   redundant samples before they are stored.
/// - `Cbcs`: per-zone cluster heads collect members' samples over the radio
///   and store an aggregate.
/// - `Ccs`: clustering and coordination combined — members suppress first,
///   the cluster head aggregates what still arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Ls,
    Cls,
    Cbcs,
    Ccs,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] =
        [ProtocolKind::Ls, ProtocolKind::Cls, ProtocolKind::Cbcs, ProtocolKind::Ccs];

    /// Protocols that elect cluster heads and ship samples over the radio.
    pub fn clustered(self) -> bool {
        matches!(self, ProtocolKind::Cbcs | ProtocolKind::Ccs)
    }

    /// Protocols that run the per-round redundancy coordination exchange.
    pub fn coordinated(self) -> bool {
        matches!(self, ProtocolKind::Cls | ProtocolKind::Ccs)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProtocolKind::Ls => "LS",
            ProtocolKind::Cls => "CLS",
            ProtocolKind::Cbcs => "CBCS",
            ProtocolKind::Ccs => "CCS",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ls" => Ok(ProtocolKind::Ls),
            "cls" => Ok(ProtocolKind::Cls),
            "cbcs" => Ok(ProtocolKind::Cbcs),
            "ccs" => Ok(ProtocolKind::Ccs),
            other => Err(format!("unknown protocol '{other}' (expected ls, cls, cbcs, or ccs)")),
        }
    }
}

/// Picks the winner among delivered advertisements: the candidate with the
/// most available storage, ties broken by lowest node id. Empty → no head.
pub fn elect(candidates: &[(NodeId, u64)]) -> Option<NodeId> {
    candidates
        .iter()
        .copied()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(id, _)| id)
}

/// Bounds for the per-zone-per-round redundancy draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoordinationBounds {
    pub reduction_min: f64,
    pub reduction_max: f64,
}

impl Default for CoordinationBounds {
    fn default() -> Self {
        CoordinationBounds { reduction_min: 0.2, reduction_max: 0.4 }
    }
}

impl CoordinationBounds {
    pub fn disabled() -> Self {
        CoordinationBounds { reduction_min: 0.0, reduction_max: 0.0 }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let (lo, hi) = (self.reduction_min, self.reduction_max);
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi < 1.0) {
            return Err(ProtocolError::BadReductionBounds(lo, hi));
        }
        Ok(())
    }

    /// Draws this zone-round's suppression fraction, uniform over
    /// [min, max); degenerate bounds return min exactly.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.reduction_min >= self.reduction_max {
            self.reduction_min
        } else {
            rng.random_range(self.reduction_min..self.reduction_max)
        }
    }
}

/// Clustering state for one round: which node heads each zone and who is
/// attached to it. Zones with no head (empty, or every ad collided) run
/// unclustered and members fall back to local storage.
#[derive(Debug, Clone, Default)]
pub struct RoundState {
    pub round_index: u64,
    pub ch_of_zone: Vec<Option<NodeId>>,
    pub members_of: Vec<Vec<NodeId>>,
}

impl RoundState {
    pub fn unclustered(zone_count: usize) -> Self {
        RoundState {
            round_index: 0,
            ch_of_zone: vec![None; zone_count],
            members_of: vec![Vec::new(); zone_count],
        }
    }
}
