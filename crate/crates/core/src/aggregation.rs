//! In-network aggregation at the cluster head: how a buffer of raw samples is
//! reduced before it touches flash.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AggregationError {
    #[error("aggregation.alpha must lie in (0, 1], got {0}")]
    BadAlpha(f64),
}

/// The two reduction laws: a constant compression ratio applied to the total
/// byte count, or a fixed-size summary packet per zone-round no matter how
/// many samples arrived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum AggregationModel {
    ConstantRatio { alpha: f64 },
    OnePacket,
}

impl AggregationModel {
    pub fn validate(&self) -> Result<(), AggregationError> {
        if let AggregationModel::ConstantRatio { alpha } = *self {
            if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
                return Err(AggregationError::BadAlpha(alpha));
            }
        }
        Ok(())
    }
}

/// Rounds a ratio of a byte count up to whole bytes, guarding against float
/// noise in products like 0.3 x 1000 = 300.00000000000006.
pub(crate) fn scaled_bytes(ratio: f64, bytes: u64) -> u64 {
    if bytes == 0 {
        return 0;
    }
    (ratio * bytes as f64 - 1e-9).ceil().max(0.0) as u64
}

/// Reduces one buffer of sample sizes to the byte count actually written.
/// An empty buffer aggregates to nothing.
pub fn aggregate(model: AggregationModel, sample_bytes: &[u64]) -> u64 {
    if sample_bytes.is_empty() {
        return 0;
    }
    match model {
        AggregationModel::ConstantRatio { alpha } => {
            scaled_bytes(alpha, sample_bytes.iter().sum())
        }
        AggregationModel::OnePacket => sample_bytes[0],
    }
}
