//! One seed of one scenario, end to end: placement, the round-structured
//! event loop, the lossy member-to-head channel, per-tick metrics, and the
//! final collection phase.
//!
//! Every round boundary first closes the round that just ended (writing any
//! buffered aggregate at the head), then redraws coordination state and
//! re-elects heads for the round that begins. The boundary at the very end of
//! the run only closes. Within an instant, events run in the order they were
//! scheduled, which puts the boundary ahead of the metric tick and the tick
//! ahead of that instant's samples.

use crate::aggregation::{aggregate, scaled_bytes, AggregationModel};
use crate::channel::{resolve_batch, PlannedTx, TxOutcome};
use crate::deployment::{ZoneActivity, ZoneGrid};
use crate::domain::{Energy, EnergyModel, NodeId, RadioDir, SensorNode, StoreOutcome, ZoneId};
use crate::engine::{stream_rng, EventQueue, SimTime, StreamId};
use crate::metrics::{
    binary_coverage, manifold_coverage, run_collection, CollectionReport, MetricsLog, SummaryRow,
    TickRow, ZoneCapability, ZoneTickRow,
};
use crate::protocols::elect;
use crate::scenario::{
    ActivityModel, AggGranularity, AggModelKind, ConfigError, DeployMode, ScenarioConfig,
};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

/// Where every generated data byte ended up. Control traffic (election ads,
/// coordination metadata) costs energy but never enters these totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ledger {
    /// Bytes produced by sampling.
    pub generated: u64,
    /// Source bytes represented by successful stores (pre-aggregation size).
    pub stored_basis: u64,
    /// Bytes dropped by coordination before storing or sending.
    pub suppressed: u64,
    /// Bytes lost to channel collisions.
    pub collided: u64,
    /// Bytes refused because the target flash could not take the write.
    pub rejected: u64,
}

impl Ledger {
    /// Exact conservation: generated = stored basis + suppressed + collided +
    /// rejected, in whole bytes.
    pub fn holds(&self) -> bool {
        self.generated == self.stored_basis + self.suppressed + self.collided + self.rejected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ev {
    RoundBoundary,
    MetricTick,
    Sample(NodeId),
    SlotResolve { zone: ZoneId, resolve_us: u64 },
}

/// Everything one seed's run produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub ticks: Vec<TickRow>,
    pub zone_ticks: Vec<ZoneTickRow>,
    pub summary: SummaryRow,
    pub ledger: Ledger,
    pub per_node_stored: Vec<u64>,
    /// First tick at which each node's own flash fell below one sample.
    pub per_node_first_depleted_s: Vec<Option<f64>>,
    /// Mean first-depletion time; never-depleted nodes count at the run end.
    pub mean_depletion_s: f64,
    /// First tick at which every member of the zone was depleted.
    pub zone_dead_time_s: Vec<Option<f64>>,
    /// Elected head of every zone, one entry per round (empty for protocols
    /// that do not cluster).
    pub ch_rounds: Vec<Vec<Option<NodeId>>>,
    pub collection: CollectionReport,
    /// Storage-phase radio energy, exact picojoules.
    pub radio_pre_pj: u64,
    /// Storage-phase flash energy, exact picojoules.
    pub flash_pre_pj: u64,
    /// Per-node storage-phase energy (flash + radio), exact picojoules.
    pub per_node_pre_pj: Vec<u64>,
}

/// One seed of one validated scenario. Build with [`Simulation::new`], then
/// consume with [`Simulation::run`].
pub struct Simulation {
    cfg: ScenarioConfig,
    seed: u64,
    grid: ZoneGrid,
    nodes: Vec<SensorNode>,
    energy: EnergyModel,
    zone_period_us: Vec<u64>,
    data_jitter: ChaCha12Rng,
    ad_jitter: ChaCha12Rng,
    suppression: ChaCha12Rng,
    coordination: ChaCha12Rng,
    ch_of_zone: Vec<Option<NodeId>>,
    reduction: Vec<f64>,
    round_buffer: Vec<Vec<u64>>,
    packet_written: Vec<bool>,
    batch: Vec<u64>,
    pending: BTreeMap<(u32, u64), Vec<PlannedTx>>,
    ledger: Ledger,
    ch_rounds: Vec<Vec<Option<NodeId>>>,
    first_depleted_us: Vec<Option<u64>>,
    zone_dead_us: Vec<Option<u64>>,
    log: MetricsLog,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let mut grid = ZoneGrid::new(cfg.field)?;
        let mut topology = stream_rng(seed, StreamId::Topology);
        let cap = cfg.scenario.storage_cap_bytes;
        let nodes = match cfg.deployment.mode {
            DeployMode::Uniform => {
                grid.place_uniform(cfg.deployment.nodes.expect("validated"), cap, &mut topology)?
            }
            DeployMode::Biased => grid.place_biased(
                cfg.deployment.zone_counts.as_deref().expect("validated"),
                cap,
                &mut topology,
            )?,
        };
        if cfg.activity.model == ActivityModel::Uneven {
            let mut activity = stream_rng(seed, StreamId::Activity);
            grid.assign_activity(cfg.activity.high_fraction, &mut activity);
        }
        let zone_period_us: Vec<u64> = grid
            .zones
            .iter()
            .map(|z| match z.activity {
                ZoneActivity::High => cfg.high_period_micros(),
                ZoneActivity::Low => cfg.base_period_micros(),
            })
            .collect();
        let zones = grid.zones.len();
        let n = nodes.len();
        Ok(Simulation {
            cfg: cfg.clone(),
            seed,
            energy: EnergyModel::new(cfg.energy.flash_j_per_mb, cfg.energy.radio_multiplier),
            zone_period_us,
            data_jitter: stream_rng(seed, StreamId::DataJitter),
            ad_jitter: stream_rng(seed, StreamId::AdJitter),
            suppression: stream_rng(seed, StreamId::Suppression),
            coordination: stream_rng(seed, StreamId::Coordination),
            grid,
            nodes,
            ch_of_zone: vec![None; zones],
            reduction: vec![0.0; zones],
            round_buffer: vec![Vec::new(); zones],
            packet_written: vec![false; zones],
            batch: vec![0; n],
            pending: BTreeMap::new(),
            ledger: Ledger::default(),
            ch_rounds: Vec::new(),
            first_depleted_us: vec![None; n],
            zone_dead_us: vec![None; zones],
            log: MetricsLog::default(),
        })
    }

    /// Runs the storage phase to the configured end time, then the collection
    /// phase, and returns everything recorded along the way.
    pub fn run(mut self) -> RunResult {
        let sim_end = SimTime::from_micros(self.cfg.sim_end_micros());
        let mut queue: EventQueue<Ev> = EventQueue::new();
        queue.schedule(SimTime::ZERO, Ev::RoundBoundary);
        queue.schedule(SimTime::ZERO, Ev::MetricTick);
        for i in 0..self.nodes.len() {
            queue.schedule(SimTime::ZERO, Ev::Sample(NodeId(i as u32)));
        }
        while let Some((t, ev)) = queue.pop_until(sim_end) {
            match ev {
                Ev::RoundBoundary => self.on_boundary(t, sim_end, &mut queue),
                Ev::MetricTick => self.on_tick(t, sim_end, &mut queue),
                Ev::Sample(n) => self.on_sample(n, t, sim_end, &mut queue),
                Ev::SlotResolve { zone, resolve_us } => self.on_slot(zone, resolve_us),
            }
        }
        queue.finish_at(sim_end);
        self.finish(sim_end)
    }

    fn on_boundary(&mut self, t: SimTime, sim_end: SimTime, queue: &mut EventQueue<Ev>) {
        if t > SimTime::ZERO {
            self.close_round();
        }
        if t >= sim_end {
            return;
        }
        self.open_round(t);
        queue.schedule(t.plus_micros(self.cfg.round_micros()), Ev::RoundBoundary);
    }

    /// Writes each zone's buffered aggregate into its head's flash. Uses the
    /// closing round's reduction draw, which is redrawn only afterwards.
    fn close_round(&mut self) {
        if self.cfg.aggregation.granularity == AggGranularity::Round {
            for z in 0..self.round_buffer.len() {
                if self.round_buffer[z].is_empty() {
                    continue;
                }
                let deliveries = std::mem::take(&mut self.round_buffer[z]);
                let basis: u64 = deliveries.iter().sum();
                let ch =
                    self.ch_of_zone[z].expect("round buffers exist only under an elected head");
                let out = aggregate(self.effective_model(z), &deliveries);
                match self.nodes[ch.0 as usize].try_store(out, &self.energy) {
                    StoreOutcome::Stored => self.ledger.stored_basis += basis,
                    StoreOutcome::Rejected => self.ledger.rejected += basis,
                }
            }
        }
        self.packet_written.fill(false);
    }

    fn open_round(&mut self, t: SimTime) {
        let proto = self.cfg.scenario.protocol;
        if proto.coordinated() && self.cfg.coordination.enabled() {
            let bounds = self.cfg.coordination.bounds();
            let meta = self.cfg.coordination.meta_bytes;
            for z in 0..self.grid.zones.len() {
                if self.grid.zones[z].members.is_empty() {
                    continue;
                }
                self.reduction[z] = bounds.draw(&mut self.coordination);
                // Full-mesh metadata exchange: everyone broadcasts once and
                // hears everyone else. Small enough to be collision-exempt.
                let members = self.grid.zones[z].members.clone();
                let k = members.len() as u64;
                for m in members {
                    let node = &mut self.nodes[m.0 as usize];
                    node.charge_radio_pre(meta, RadioDir::Tx, &self.energy);
                    node.charge_radio_pre((k - 1) * meta, RadioDir::Rx, &self.energy);
                }
            }
        }
        if proto.clustered() {
            let ad = self.cfg.cluster.ad_bytes;
            let duration = self.cfg.channel.tx_duration_micros(ad);
            for z in 0..self.grid.zones.len() {
                if self.grid.zones[z].members.is_empty() {
                    self.ch_of_zone[z] = None;
                    continue;
                }
                let members = self.grid.zones[z].members.clone();
                let ads: Vec<PlannedTx> = members
                    .iter()
                    .map(|&m| PlannedTx {
                        src: m,
                        bytes: ad,
                        start_micros: t.micros()
                            + self.cfg.channel.draw_jitter_micros(&mut self.ad_jitter),
                        duration_micros: duration,
                    })
                    .collect();
                let outcomes = resolve_batch(&ads, self.cfg.channel.interference);
                let delivered_total =
                    outcomes.iter().filter(|&&o| o == TxOutcome::Delivered).count() as u64;
                // Radios are on for the whole election: every member pays to
                // send its ad and to hear every other delivered ad.
                let mut candidates = Vec::new();
                for (i, &m) in members.iter().enumerate() {
                    let own = u64::from(outcomes[i] == TxOutcome::Delivered);
                    let node = &mut self.nodes[m.0 as usize];
                    node.charge_radio_pre(ad, RadioDir::Tx, &self.energy);
                    node.charge_radio_pre((delivered_total - own) * ad, RadioDir::Rx, &self.energy);
                    if own == 1 {
                        candidates.push((m, self.nodes[m.0 as usize].available()));
                    }
                }
                // Collided ads leave their senders out of the running; if no
                // ad survives, the zone runs unclustered for the round.
                self.ch_of_zone[z] = elect(&candidates);
            }
            self.ch_rounds.push(self.ch_of_zone.clone());
        }
    }

    fn on_sample(&mut self, n: NodeId, t: SimTime, sim_end: SimTime, queue: &mut EventQueue<Ev>) {
        let d = self.cfg.scenario.sample_bytes;
        let idx = n.0 as usize;
        let z = self.nodes[idx].zone.0 as usize;
        let period = self.zone_period_us[z];
        let proto = self.cfg.scenario.protocol;
        self.ledger.generated += d;

        let suppressed = proto.coordinated()
            && self.reduction[z] > 0.0
            && self.suppression.random_bool(self.reduction[z]);
        if suppressed {
            self.ledger.suppressed += d;
        }

        match (proto.clustered(), self.ch_of_zone[z]) {
            (false, _) | (true, None) => {
                if !suppressed {
                    self.local_store(n, d);
                }
            }
            (true, Some(ch)) if ch == n => {
                // The head ingests its own samples without the radio.
                if !suppressed {
                    self.head_store(z, ch, d);
                }
            }
            (true, Some(_)) => {
                if !suppressed {
                    self.batch[idx] += d;
                }
                // Even a suppressed instant can be the round's last chance to
                // flush what the batch already holds.
                let batch_cap = d * self.cfg.cluster.member_batch_samples as u64;
                let round_us = self.cfg.round_micros();
                let next_boundary_us = (t.micros() / round_us + 1) * round_us;
                let last_in_round = t.micros() + period >= next_boundary_us;
                if self.batch[idx] > 0 && (self.batch[idx] >= batch_cap || last_in_round) {
                    self.send_batch(n, ZoneId(z as u32), t, queue);
                }
            }
        }

        let next = t.plus_micros(period);
        if next < sim_end {
            queue.schedule(next, Ev::Sample(n));
        }
    }

    /// Queues one member transmission into its zone's contention slot. The
    /// slot resolves once the jitter window plus a full batch's airtime has
    /// passed, which validation keeps inside the sampling period.
    fn send_batch(&mut self, n: NodeId, zone: ZoneId, t: SimTime, queue: &mut EventQueue<Ev>) {
        let bytes = std::mem::take(&mut self.batch[n.0 as usize]);
        let tx = PlannedTx {
            src: n,
            bytes,
            start_micros: t.micros() + self.cfg.channel.draw_jitter_micros(&mut self.data_jitter),
            duration_micros: self.cfg.channel.tx_duration_micros(bytes),
        };
        let full_batch =
            self.cfg.scenario.sample_bytes * self.cfg.cluster.member_batch_samples as u64;
        let resolve_us = t.micros()
            + self.cfg.channel.jitter_window_micros()
            + self.cfg.channel.tx_duration_micros(full_batch);
        let slot = (zone.0, resolve_us);
        let first = !self.pending.contains_key(&slot);
        self.pending.entry(slot).or_default().push(tx);
        if first {
            queue.schedule(SimTime::from_micros(resolve_us), Ev::SlotResolve { zone, resolve_us });
        }
    }

    fn on_slot(&mut self, zone: ZoneId, resolve_us: u64) {
        let Some(slot) = self.pending.remove(&(zone.0, resolve_us)) else {
            return;
        };
        let outcomes = resolve_batch(&slot, self.cfg.channel.interference);
        let z = zone.0 as usize;
        for (tx, outcome) in slot.iter().zip(&outcomes) {
            // The sender keys the radio either way; only delivered frames
            // cost the listening head reception energy.
            self.nodes[tx.src.0 as usize].charge_radio_pre(tx.bytes, RadioDir::Tx, &self.energy);
            match outcome {
                TxOutcome::Collided => self.ledger.collided += tx.bytes,
                TxOutcome::Delivered => {
                    let ch = self.ch_of_zone[z]
                        .expect("data flows only inside rounds with an elected head");
                    self.nodes[ch.0 as usize].charge_radio_pre(tx.bytes, RadioDir::Rx, &self.energy);
                    self.head_store(z, ch, tx.bytes);
                }
            }
        }
    }

    fn local_store(&mut self, n: NodeId, bytes: u64) {
        match self.nodes[n.0 as usize].try_store(bytes, &self.energy) {
            StoreOutcome::Stored => self.ledger.stored_basis += bytes,
            StoreOutcome::Rejected => self.ledger.rejected += bytes,
        }
    }

    /// A head takes delivery of `basis` source bytes: buffered for the round
    /// close, or folded into flash immediately, per the configured
    /// granularity.
    fn head_store(&mut self, z: usize, ch: NodeId, basis: u64) {
        match self.cfg.aggregation.granularity {
            AggGranularity::Round => self.round_buffer[z].push(basis),
            AggGranularity::Sample => match self.effective_model(z) {
                AggregationModel::ConstantRatio { alpha } => {
                    let out = scaled_bytes(alpha, basis);
                    match self.nodes[ch.0 as usize].try_store(out, &self.energy) {
                        StoreOutcome::Stored => self.ledger.stored_basis += basis,
                        StoreOutcome::Rejected => self.ledger.rejected += basis,
                    }
                }
                AggregationModel::OnePacket => {
                    if self.packet_written[z] {
                        // The round's packet already exists; later deliveries
                        // fold in without another write.
                        self.ledger.stored_basis += basis;
                    } else {
                        let d = self.cfg.scenario.sample_bytes;
                        match self.nodes[ch.0 as usize].try_store(d, &self.energy) {
                            StoreOutcome::Stored => {
                                self.packet_written[z] = true;
                                self.ledger.stored_basis += basis;
                            }
                            StoreOutcome::Rejected => self.ledger.rejected += basis,
                        }
                    }
                }
            },
        }
    }

    /// The aggregation law a head applies. Under coordinated suppression the
    /// constant ratio is rescaled onto the thinned inflow - alpha_eff =
    /// min(1, alpha / (1 - reduction)) - so suppression plus aggregation
    /// preserves the end-to-end ratio.
    fn effective_model(&self, z: usize) -> AggregationModel {
        match self.cfg.aggregation.model {
            AggModelKind::OnePacket => AggregationModel::OnePacket,
            AggModelKind::ConstantRatio => {
                let mut alpha = self.cfg.aggregation.alpha;
                if self.cfg.scenario.protocol.coordinated() {
                    alpha = (alpha / (1.0 - self.reduction[z])).min(1.0);
                }
                AggregationModel::ConstantRatio { alpha }
            }
        }
    }

    fn on_tick(&mut self, t: SimTime, sim_end: SimTime, queue: &mut EventQueue<Ev>) {
        let d = self.cfg.scenario.sample_bytes;
        let n = self.nodes.len();
        let mean_storage_bytes =
            self.nodes.iter().map(|x| x.storage_used).sum::<u64>() as f64 / n as f64;

        let mut depleted = 0usize;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.available() < d {
                depleted += 1;
                if self.first_depleted_us[i].is_none() {
                    self.first_depleted_us[i] = Some(t.micros());
                }
            }
        }

        // Coverage looks through each member's storing path: the head's
        // flash while the zone is attached, the member's own otherwise.
        let mut caps = Vec::with_capacity(self.grid.zones.len());
        for (z, zone) in self.grid.zones.iter().enumerate() {
            let head_avail = self.ch_of_zone[z].map(|ch| self.nodes[ch.0 as usize].available());
            let effective_avail = zone
                .members
                .iter()
                .map(|&m| head_avail.unwrap_or_else(|| self.nodes[m.0 as usize].available()))
                .collect();
            caps.push(ZoneCapability { effective_avail });
        }
        let bincov = binary_coverage(&caps, d);
        let cov25 = manifold_coverage(&caps, d, 0.25);
        let cov50 = manifold_coverage(&caps, d, 0.5);
        let cov100 = manifold_coverage(&caps, d, 1.0);

        let mut occupied = 0usize;
        let mut dead = 0usize;
        for (z, zone) in self.grid.zones.iter().enumerate() {
            if zone.members.is_empty() {
                continue;
            }
            occupied += 1;
            let all_depleted =
                zone.members.iter().all(|&m| self.nodes[m.0 as usize].available() < d);
            if all_depleted {
                dead += 1;
                if self.zone_dead_us[z].is_none() {
                    self.zone_dead_us[z] = Some(t.micros());
                }
            }
            let capable = caps[z].effective_avail.iter().filter(|&&a| a >= d).count();
            self.log.zone_ticks.push(ZoneTickRow {
                t_s: t.as_secs_f64(),
                zone: z as u32,
                members: zone.members.len() as u32,
                capable_frac: capable as f64 / zone.members.len() as f64,
                all_depleted,
            });
        }
        let deadzone_frac = if occupied > 0 { dead as f64 / occupied as f64 } else { 0.0 };

        self.log.ticks.push(TickRow {
            t_s: t.as_secs_f64(),
            mean_storage_bytes,
            depleted_frac: depleted as f64 / n as f64,
            bincov,
            cov25,
            cov50,
            cov100,
            deadzone_frac,
        });

        let next = t.plus_micros(self.cfg.tick_micros());
        if next <= sim_end {
            queue.schedule(next, Ev::MetricTick);
        }
    }

    fn finish(mut self, sim_end: SimTime) -> RunResult {
        assert!(self.pending.is_empty(), "every contention slot must resolve inside the run");
        assert!(
            self.round_buffer.iter().all(Vec::is_empty),
            "the final boundary must close the last round"
        );
        assert!(
            self.batch.iter().all(|&b| b == 0),
            "members must flush their batches before each round ends"
        );
        assert!(self.ledger.holds(), "byte conservation violated: {:?}", self.ledger);

        let n = self.nodes.len();
        let sim_end_s = sim_end.as_secs_f64();
        let per_node_first_depleted_s: Vec<Option<f64>> =
            self.first_depleted_us.iter().map(|o| o.map(|us| us as f64 * 1e-6)).collect();
        let mean_depletion_s = per_node_first_depleted_s
            .iter()
            .map(|o| o.unwrap_or(sim_end_s))
            .sum::<f64>()
            / n as f64;
        let zone_dead_time_s: Vec<Option<f64>> =
            self.zone_dead_us.iter().map(|o| o.map(|us| us as f64 * 1e-6)).collect();
        let per_node_stored: Vec<u64> = self.nodes.iter().map(|x| x.storage_used).collect();
        let per_node_pre_pj: Vec<u64> =
            self.nodes.iter().map(|x| x.energy_pre.picojoules()).collect();
        let radio_pre_pj: u64 = self.nodes.iter().map(|x| x.radio_pre.picojoules()).sum();
        let total_pre_pj: u64 = per_node_pre_pj.iter().sum();
        let flash_pre_pj = total_pre_pj - radio_pre_pj;

        let collection = run_collection(
            &mut self.nodes,
            self.cfg.channel.bandwidth_bytes_per_s,
            &self.energy,
        );
        let loss_frac = if self.ledger.generated > 0 {
            self.ledger.collided as f64 / self.ledger.generated as f64
        } else {
            0.0
        };
        let summary = SummaryRow {
            protocol: self.cfg.scenario.protocol,
            density: n as u32,
            seed: self.seed,
            pre_energy_j: Energy::from_picojoules(radio_pre_pj).joules(),
            post_energy_j: collection.post_energy.joules(),
            loss_frac,
            mean_collection_s: collection.mean_collection_s,
            mean_storage_final_bytes: per_node_stored.iter().sum::<u64>() as f64 / n as f64,
        };
        RunResult {
            seed: self.seed,
            ticks: self.log.ticks,
            zone_ticks: self.log.zone_ticks,
            summary,
            ledger: self.ledger,
            per_node_stored,
            per_node_first_depleted_s,
            mean_depletion_s,
            zone_dead_time_s,
            ch_rounds: self.ch_rounds,
            collection,
            radio_pre_pj,
            flash_pre_pj,
            per_node_pre_pj,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::FieldSpec;
    use crate::protocols::ProtocolKind;

    fn single_zone_field() -> FieldSpec {
        FieldSpec { width_m: 70.0, height_m: 70.0, zone_side_m: 70.0, radio_range_m: 100.0 }
    }

    #[test]
    fn ls_keeps_every_sample_on_the_node() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.sim_time_s = 20.0;
        cfg.scenario.storage_cap_bytes = 1_000_000;
        cfg.deployment.nodes = Some(4);
        let run = Simulation::new(&cfg, 1).expect("valid config").run();
        assert_eq!(run.per_node_stored, vec![2000; 4], "20 samples of 100 B per node");
        assert_eq!(run.radio_pre_pj, 0, "local-only storage must never key the radio");
        assert_eq!(run.summary.pre_energy_j, 0.0);
        assert_eq!(run.flash_pre_pj, 8000 * 55_000, "flash cost of 8000 stored bytes");
        assert_eq!(run.ledger.generated, 8000);
        assert_eq!(run.ledger.stored_basis, 8000);
        assert!(run.ledger.holds(), "ledger must balance: {:?}", run.ledger);
        assert_eq!(run.ticks.len(), 21, "ticks at every whole second including both ends");
        assert_eq!(run.summary.mean_storage_final_bytes, 2000.0);
        assert_eq!(run.collection.holders, 4);
        assert!((run.summary.mean_collection_s - 2000.0 / 31_250.0).abs() < 1e-12);
    }

    #[test]
    fn disabled_coordination_collapses_cls_onto_ls() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.sim_time_s = 30.0;
        cfg.deployment.nodes = Some(6);
        let ls = Simulation::new(&cfg, 3).unwrap().run();
        cfg.scenario.protocol = ProtocolKind::Cls;
        cfg.coordination.reduction_min = 0.0;
        cfg.coordination.reduction_max = 0.0;
        let cls = Simulation::new(&cfg, 3).unwrap().run();
        assert_eq!(
            cls.per_node_stored, ls.per_node_stored,
            "a degenerate reduction draw must not change storage"
        );
        assert_eq!(cls.ledger, ls.ledger);
        assert_eq!(cls.radio_pre_pj, 0, "no exchange happens when the draw is pinned to zero");
        assert_eq!(cls.ticks, ls.ticks);
    }

    #[test]
    fn conservation_splits_exactly_under_contention() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.protocol = ProtocolKind::Cbcs;
        cfg.scenario.sim_time_s = 30.0;
        cfg.field = single_zone_field();
        cfg.deployment.mode = crate::scenario::DeployMode::Biased;
        cfg.deployment.nodes = None;
        cfg.deployment.zone_counts = Some(vec![(0, 12)]);
        cfg.aggregation.granularity = AggGranularity::Sample;
        let run = Simulation::new(&cfg, 7).unwrap().run();
        assert!(run.ledger.holds(), "ledger must balance exactly: {:?}", run.ledger);
        assert!(
            run.ledger.collided > 0,
            "eleven members sharing one jitter window must collide sometimes"
        );
        assert_eq!(run.ledger.suppressed, 0, "this protocol never suppresses");
        assert_eq!(run.ledger.generated, 12 * 30 * 100);
    }

    #[test]
    fn identical_seeds_replay_identically() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.protocol = ProtocolKind::Cbcs;
        cfg.scenario.sim_time_s = 30.0;
        cfg.deployment.nodes = Some(20);
        let a = Simulation::new(&cfg, 5).unwrap().run();
        let b = Simulation::new(&cfg, 5).unwrap().run();
        assert_eq!(a.per_node_stored, b.per_node_stored);
        assert_eq!(a.ticks, b.ticks);
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.radio_pre_pj, b.radio_pre_pj);
        let c = Simulation::new(&cfg, 6).unwrap().run();
        assert_ne!(
            a.per_node_stored, c.per_node_stored,
            "a different seed must place and collide differently"
        );
    }

    #[test]
    fn one_packet_round_close_writes_a_single_packet() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.protocol = ProtocolKind::Cbcs;
        cfg.scenario.sim_time_s = 10.0;
        cfg.field = single_zone_field();
        cfg.deployment.mode = crate::scenario::DeployMode::Biased;
        cfg.deployment.nodes = None;
        cfg.deployment.zone_counts = Some(vec![(0, 2)]);
        cfg.aggregation.model = AggModelKind::OnePacket;
        cfg.channel.jitter_window_s = 0.0;
        cfg.cluster.ad_bytes = 0;
        let run = Simulation::new(&cfg, 2).unwrap().run();
        assert_eq!(run.ch_rounds, vec![vec![Some(NodeId(0))]], "ties elect the lowest id");
        assert_eq!(
            run.per_node_stored,
            vec![100, 0],
            "the whole round folds into one sample-sized packet at the head"
        );
        assert_eq!(run.ledger.stored_basis, 2000);
        assert_eq!(run.ledger.collided, 0, "a lone transmitter per slot cannot collide");
        assert!(run.ledger.holds());
    }

    #[test]
    fn coordinated_heads_rescale_the_ratio_onto_the_thinned_inflow() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.protocol = ProtocolKind::Ccs;
        cfg.deployment.nodes = Some(4);
        let mut sim = Simulation::new(&cfg, 1).unwrap();
        sim.reduction[0] = 0.3;
        let AggregationModel::ConstantRatio { alpha } = sim.effective_model(0) else {
            panic!("constant-ratio config must yield a constant-ratio model");
        };
        assert!((alpha - 0.5 / 0.7).abs() < 1e-12, "alpha_eff = alpha / (1 - r), got {alpha}");
        sim.reduction[0] = 0.6;
        let AggregationModel::ConstantRatio { alpha } = sim.effective_model(0) else {
            panic!("constant-ratio config must yield a constant-ratio model");
        };
        assert!((alpha - 1.0).abs() < 1e-12, "the rescaled ratio saturates at 1");
    }
}
