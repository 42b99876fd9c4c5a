//! Contention MAC model: transmissions inside one zone start at a jittered
//! offset, and any that overlap in time collide. No carrier sensing, no
//! retransmission — a collision simply loses every frame it touches.

use crate::domain::NodeId;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("channel.bandwidth_bytes_per_s must be positive")]
    ZeroBandwidth,
    #[error("channel.jitter_window_s must be finite and non-negative, got {0}")]
    BadJitterWindow(f64),
}

/// How far interference reaches. `Zone` is the physical model (all zone
/// members hear each other); `None` disables collisions for analytic
/// scenarios that assume perfect delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceScope {
    Zone,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub bandwidth_bytes_per_s: u64,
    pub jitter_window_s: f64,
    pub interference: InterferenceScope,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        // Defaults are calibrated so uniform CBCS runs land near 1.5% loss at
        // 50 nodes and 7.5% at 150 on the 25-zone field, then frozen.
        ChannelConfig {
            bandwidth_bytes_per_s: 31_250,
            jitter_window_s: 0.368,
            interference: InterferenceScope::Zone,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.bandwidth_bytes_per_s == 0 {
            return Err(ChannelError::ZeroBandwidth);
        }
        if !self.jitter_window_s.is_finite() || self.jitter_window_s < 0.0 {
            return Err(ChannelError::BadJitterWindow(self.jitter_window_s));
        }
        Ok(())
    }

    pub fn jitter_window_micros(&self) -> u64 {
        (self.jitter_window_s * 1e6).round() as u64
    }

    /// Time on air for `bytes`, rounded up to whole microseconds.
    pub fn tx_duration_micros(&self, bytes: u64) -> u64 {
        if bytes == 0 {
            return 0;
        }
        let micros = (bytes as u128) * 1_000_000;
        let bw = self.bandwidth_bytes_per_s as u128;
        micros.div_ceil(bw) as u64
    }

    /// Draws a start offset uniform over [0, window) in whole microseconds.
    pub fn draw_jitter_micros<R: Rng>(&self, rng: &mut R) -> u64 {
        let w = self.jitter_window_micros();
        if w == 0 {
            0
        } else {
            rng.random_range(0..w)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxOutcome {
    Delivered,
    Collided,
}

/// One queued transmission inside a single collision domain, with its start
/// already jittered. `src` identifies the sender for energy accounting.
#[derive(Debug, Clone, Copy)]
pub struct PlannedTx {
    pub src: NodeId,
    pub bytes: u64,
    pub start_micros: u64,
    pub duration_micros: u64,
}

/// Resolves one batch sharing a collision domain: every transmission whose
/// half-open interval [start, start+duration) overlaps another's is collided.
/// Zero-duration intervals are empty and never overlap anything.
pub fn resolve_batch(batch: &[PlannedTx], scope: InterferenceScope) -> Vec<TxOutcome> {
    let mut outcomes = vec![TxOutcome::Delivered; batch.len()];
    if scope == InterferenceScope::None || batch.len() < 2 {
        return outcomes;
    }
    let mut order: Vec<usize> = (0..batch.len())
        .filter(|&i| batch[i].duration_micros > 0)
        .collect();
    order.sort_by_key(|&i| (batch[i].start_micros, i));

    let mut cluster: Vec<usize> = Vec::new();
    let mut cluster_end = 0u64;
    let flush = |cluster: &mut Vec<usize>, outcomes: &mut Vec<TxOutcome>| {
        if cluster.len() >= 2 {
            for &i in cluster.iter() {
                outcomes[i] = TxOutcome::Collided;
            }
        }
        cluster.clear();
    };
    for &i in &order {
        let start = batch[i].start_micros;
        let end = start + batch[i].duration_micros;
        if cluster.is_empty() || start < cluster_end {
            cluster.push(i);
            cluster_end = cluster_end.max(end);
        } else {
            flush(&mut cluster, &mut outcomes);
            cluster.push(i);
            cluster_end = end;
        }
    }
    flush(&mut cluster, &mut outcomes);
    outcomes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{stream_rng, StreamId};
    use proptest::prelude::*;

    fn tx(src: u32, start: u64, dur: u64) -> PlannedTx {
        PlannedTx { src: NodeId(src), bytes: dur, start_micros: start, duration_micros: dur }
    }

    #[test]
    fn duration_rounds_up_to_whole_micros() {
        let c = ChannelConfig::default();
        assert_eq!(c.tx_duration_micros(100), 3200, "100 B at 31,250 B/s is exactly 3.2 ms");
        assert_eq!(c.tx_duration_micros(1), 32);
        assert_eq!(c.tx_duration_micros(0), 0);
        let fast = ChannelConfig { bandwidth_bytes_per_s: 3_000_000, ..c };
        assert_eq!(fast.tx_duration_micros(1), 1, "sub-microsecond airtime rounds up");
    }

    #[test]
    fn zero_window_means_no_jitter() {
        let c = ChannelConfig { jitter_window_s: 0.0, ..ChannelConfig::default() };
        let mut rng = stream_rng(1, StreamId::DataJitter);
        for _ in 0..10 {
            assert_eq!(c.draw_jitter_micros(&mut rng), 0);
        }
    }

    #[test]
    fn jitter_stays_inside_the_window() {
        let c = ChannelConfig { jitter_window_s: 1.0, ..ChannelConfig::default() };
        let mut rng = stream_rng(1, StreamId::DataJitter);
        for _ in 0..1000 {
            assert!(c.draw_jitter_micros(&mut rng) < 1_000_000);
        }
    }

    #[test]
    fn jitter_mean_is_half_the_window() {
        let c = ChannelConfig { jitter_window_s: 1.0, ..ChannelConfig::default() };
        let mut rng = stream_rng(42, StreamId::DataJitter);
        let n = 100_000u64;
        let total: u64 = (0..n).map(|_| c.draw_jitter_micros(&mut rng)).sum();
        let mean = total as f64 / n as f64;
        let expected = 500_000.0;
        assert!(
            (mean - expected).abs() / expected < 0.01,
            "mean jitter {mean:.0} us should sit within 1% of {expected:.0} us"
        );
    }

    #[test]
    fn lone_transmission_is_delivered() {
        let out = resolve_batch(&[tx(0, 100, 50)], InterferenceScope::Zone);
        assert_eq!(out, vec![TxOutcome::Delivered]);
    }

    #[test]
    fn overlapping_pair_collides() {
        let out = resolve_batch(&[tx(0, 0, 100), tx(1, 50, 100)], InterferenceScope::Zone);
        assert_eq!(out, vec![TxOutcome::Collided, TxOutcome::Collided]);
    }

    #[test]
    fn disjoint_pair_is_delivered() {
        let out = resolve_batch(&[tx(0, 0, 100), tx(1, 200, 100)], InterferenceScope::Zone);
        assert_eq!(out, vec![TxOutcome::Delivered, TxOutcome::Delivered]);
    }

    #[test]
    fn touching_intervals_do_not_overlap() {
        // [0,100) and [100,200) share only the boundary instant.
        let out = resolve_batch(&[tx(0, 0, 100), tx(1, 100, 100)], InterferenceScope::Zone);
        assert_eq!(out, vec![TxOutcome::Delivered, TxOutcome::Delivered]);
    }

    #[test]
    fn overlap_chains_collide_as_one_cluster() {
        // a overlaps b, b overlaps c, a and c are disjoint: all three lost.
        let out = resolve_batch(
            &[tx(0, 0, 100), tx(1, 90, 100), tx(2, 180, 100)],
            InterferenceScope::Zone,
        );
        assert_eq!(out, vec![TxOutcome::Collided; 3]);
    }

    #[test]
    fn zero_duration_frames_never_collide() {
        let out = resolve_batch(
            &[tx(0, 50, 0), tx(1, 50, 0), tx(2, 0, 200)],
            InterferenceScope::Zone,
        );
        assert_eq!(out, vec![TxOutcome::Delivered; 3]);
    }

    #[test]
    fn interference_none_delivers_everything() {
        let out = resolve_batch(&[tx(0, 0, 100), tx(1, 0, 100)], InterferenceScope::None);
        assert_eq!(out, vec![TxOutcome::Delivered, TxOutcome::Delivered]);
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let bad = ChannelConfig { bandwidth_bytes_per_s: 0, ..ChannelConfig::default() };
        assert_eq!(bad.validate(), Err(ChannelError::ZeroBandwidth));
        let bad = ChannelConfig { jitter_window_s: -0.5, ..ChannelConfig::default() };
        assert!(matches!(bad.validate(), Err(ChannelError::BadJitterWindow(_))));
        assert!(ChannelConfig::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn every_frame_is_delivered_or_collided(
            starts in proptest::collection::vec(0u64..10_000, 0..40),
            dur in 1u64..500,
        ) {
            let batch: Vec<PlannedTx> =
                starts.iter().enumerate().map(|(i, &s)| tx(i as u32, s, dur)).collect();
            let out = resolve_batch(&batch, InterferenceScope::Zone);
            prop_assert_eq!(out.len(), batch.len());
            // A delivered frame must overlap no other frame; a collided frame
            // must overlap at least one other.
            for (i, &o) in out.iter().enumerate() {
                let overlaps = batch.iter().enumerate().any(|(j, other)| {
                    i != j
                        && batch[i].start_micros < other.start_micros + other.duration_micros
                        && other.start_micros < batch[i].start_micros + dur
                });
                prop_assert_eq!(o == TxOutcome::Collided, overlaps,
                    "frame {} overlap state disagrees with its outcome", i);
            }
        }
    }
}
