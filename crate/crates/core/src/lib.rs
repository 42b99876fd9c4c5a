//! Discrete-event simulator for wireless sensor networks that manage a fixed
//! flash storage budget instead of an energy budget.
//!
//! The network is partitioned into square zones sized so that any two nodes in
//! the same zone are within radio range of each other. Four storage protocols
//! are modeled on top of that layout:
//!
//! * `LS`   - every sensor stores its own samples locally
//! * `CLS`  - local storage plus periodic intra-zone coordination that
//!            suppresses redundant samples before they are stored
//! * `CBCS` - per-zone cluster heads, elected each round by available storage,
//!            receive member samples over a contention MAC and store an
//!            aggregated record
//! * `CCS`  - cluster-based storage plus coordination, which suppresses
//!            redundant samples before they are transmitted
//!
//! Runs are deterministic for a given config and seed: time is integer
//! microseconds, energy is integer picojoules, and every random draw comes
//! from a named per-purpose stream derived from the scenario seed.

pub mod aggregation;
pub mod channel;
pub mod deployment;
pub mod domain;
pub mod engine;
pub mod metrics;
pub mod protocols;
pub mod scenario;
pub mod sim;

pub use aggregation::{aggregate, AggregationModel};
pub use channel::{ChannelConfig, InterferenceScope};
pub use deployment::{FieldSpec, ZoneActivity, ZoneGrid};
pub use domain::{DataSample, EnergyModel, SensorNode, StoreOutcome};
pub use metrics::MetricsLog;
pub use protocols::ProtocolKind;
pub use scenario::{ExperimentPreset, ScenarioConfig};
pub use sim::Simulation;
