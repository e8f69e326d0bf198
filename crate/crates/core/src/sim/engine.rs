use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::Serialize;
use rand_chacha::ChaCha8Rng;

use crate::channel::{fading_distribution, link_gain, ChannelParams, FadingPool};
use crate::config::{AckFeedback, InterferenceModel, Policy, ScenarioKind, SimConfig};
use crate::energy::{tick_charge, update_residual, EnergyParams, EnergyState};
use crate::error::Result;
use crate::link::{classify_relation, collision_probability, link_sustenance_time, PacketCounters};
use crate::mobility::{self, MobilityParams, MobilityState};
use crate::model::{distance, normalize, NodeId, Position};
use crate::neighbor::{
    expire_records, process_hello, reduce_lst, schedule_next_hello, HelloMessage, NeighborTable,
};
use crate::routing::{
    baseline_greedy, compute_reward, dynamic_discount, dynamic_learning_rate, feasible, select_min_cost,
    select_next_hop, settle_mode, update_q, CandidateState, Constraints, EligibilityTraces, Mode, ModeEvents,
    QTable, RewardInputs,
};

use super::metrics::{EpisodeMetrics, EventRow};
use super::packet::Packet;
use super::rng::{stream, Stream};
use super::scenario::{select_nodes, ScenarioSpec, ScenarioState};
use super::traffic::TrafficGenerator;

/// Everything one UAV carries between slots.
#[derive(Debug, Clone)]
pub struct UavState {
    pub id: NodeId,
    pub position: Position,
    pub prev_position: Position,
    pub mobility: MobilityState,
    pub energy: EnergyState,
    /// Joules removed since the battery was last full.
    pub spent_since_charge: f64,
    pub mode: Mode,
    pub table: NeighborTable,
    /// Senders heard recently, with the slot their entry lapses.
    pub heard: BTreeMap<NodeId, u64>,
    pub q_r: VecDeque<Packet>,
    pub q_t: VecDeque<Packet>,
    pub counters: PacketCounters,
    pub traces: EligibilityTraces,
    /// False while partitioned out of the network.
    pub active: bool,
    /// Forced random relocation pending for the next slot.
    pub relocate: bool,
    pub beta: f64,
    pub gamma: f64,
    mob_rng: ChaCha8Rng,
}

impl UavState {
    /// In the network and not away charging.
    pub fn present(&self) -> bool {
        self.active && !self.energy.charging
    }

    fn speed(&self) -> f64 {
        if !self.present() || self.mobility.is_paused() {
            0.0
        } else {
            self.mobility.speed
        }
    }

    fn spend(&mut self, joules: f64) {
        self.spent_since_charge += update_residual(&mut self.energy, joules, 0.0);
    }
}

/// Snapshot of one routing decision, kept when auditing is enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionAudit {
    pub slot: u64,
    pub node: NodeId,
    pub src: Position,
    pub dst: Position,
    pub candidates: Vec<CandidateState>,
    pub constraints: Constraints,
    pub policy: Policy,
    pub chosen: Option<NodeId>,
    pub n_h: usize,
    pub reward: f64,
    /// Residual energy of the deciding node when it decided.
    pub residual_j: f64,
    /// Records in the neighbor table, before dropping trail and absent nodes.
    pub table_len: usize,
    /// Hops the packet has already taken.
    pub hops: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: Vec<EpisodeMetrics>,
    pub events: Vec<EventRow>,
    pub q_table: QTable,
}

/// Full simulation state.
pub struct World {
    cfg: SimConfig,
    mob: MobilityParams,
    chan: ChannelParams,
    en: EnergyParams,
    constraints: Constraints,
    gcs: Position,
    uavs: Vec<UavState>,
    q: QTable,
    cost: QTable,
    slot: u64,
    traffic: TrafficGenerator,
    scenario: ScenarioSpec,
    scen: ScenarioState,
    expiry_slots: u64,
    hello_bits: f64,
    rng_hello: ChaCha8Rng,
    rng_data: ChaCha8Rng,
    rng_pool: ChaCha8Rng,
    rng_explore: ChaCha8Rng,
    rng_scenario: ChaCha8Rng,
    rng_relocate: ChaCha8Rng,
    cumulative_reward: f64,
    cumulative_l3: u64,
    generated: u64,
    dropped: u64,
    below_threshold_tx: u64,
    events: Vec<EventRow>,
    audit: Option<Vec<DecisionAudit>>,
    spent: EnergySpent,
}

/// Joules spent network-wide, by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergySpent {
    pub hello: f64,
    pub data: f64,
    pub flight: f64,
    /// Ascent, relocation and charging trips.
    pub trips: f64,
}

#[derive(Debug, Clone, Copy)]
struct Decision {
    node: NodeId,
    cand: CandidateState,
    reward: f64,
    was_greedy: bool,
}

#[derive(Default)]
struct SlotTally {
    rewards: Vec<f64>,
    empty: u64,
    l3: u64,
    hellos: u64,
}

impl World {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let mob = MobilityParams::from_config(cfg);
        let chan = ChannelParams::from_config(cfg);
        let en = EnergyParams::from_config(cfg);
        let gcs = cfg.gcs_position();
        let mut placement = stream(cfg.seed, Stream::Placement);
        let mut uavs = Vec::with_capacity(cfg.uav_count as usize);
        for k in 0..cfg.uav_count as usize {
            let id = NodeId::from_index(k);
            let base = mobility::random_location(&mut placement, &mob);
            let mut mobility = MobilityState::at_means(&mob);
            mobility.heading = placement.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let mut table = NeighborTable::new();
            table.next_hello_at = 0;
            let mut u = UavState {
                id,
                position: base,
                prev_position: base,
                mobility,
                energy: EnergyState::from_config(cfg),
                spent_since_charge: 0.0,
                mode: Mode::NeighborDiscovery,
                table,
                heard: BTreeMap::new(),
                q_r: VecDeque::new(),
                q_t: VecDeque::new(),
                counters: PacketCounters::default(),
                traces: EligibilityTraces::new(),
                active: true,
                relocate: false,
                beta: cfg.fixed_beta.unwrap_or(cfg.beta_max),
                gamma: cfg.fixed_gamma.unwrap_or(cfg.gamma_min),
                mob_rng: stream(cfg.seed, Stream::Mobility(id.0)),
            };
            let ascent = flight_energy(&en, &mob, distance(&gcs, &base));
            u.spend(ascent);
            uavs.push(u);
        }
        let n = cfg.uav_count as usize + 1;
        Ok(Self {
            mob,
            chan,
            en,
            constraints: Constraints {
                energy_threshold: cfg.energy_threshold_j,
                coverage_min: cfg.coverage_min,
                collision_threshold: cfg.collision_threshold,
                tx_radius: cfg.tx_radius_m,
            },
            gcs,
            uavs,
            q: QTable::new(n),
            cost: QTable::new(n),
            slot: 0,
            traffic: TrafficGenerator::new(cfg.cbr_rate_bps, cfg.slot_s(), cfg.packet_size_bytes),
            scenario: ScenarioSpec::from_config(cfg),
            scen: ScenarioState::default(),
            expiry_slots: cfg.ms_to_slots(cfg.hello_expiry_ms).max(1),
            hello_bits: cfg.hello_payload_bytes as f64 * 8.0,
            rng_hello: stream(cfg.seed, Stream::HelloChannel),
            rng_data: stream(cfg.seed, Stream::DataChannel),
            rng_pool: stream(cfg.seed, Stream::FadingPool),
            rng_explore: stream(cfg.seed, Stream::Exploration),
            rng_scenario: stream(cfg.seed, Stream::Scenario),
            rng_relocate: stream(cfg.seed, Stream::Relocation),
            cumulative_reward: 0.0,
            cumulative_l3: 0,
            generated: 0,
            dropped: 0,
            below_threshold_tx: 0,
            events: Vec::new(),
            audit: None,
            spent: EnergySpent::default(),
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn uavs(&self) -> &[UavState] {
        &self.uavs
    }

    pub fn uavs_mut(&mut self) -> &mut [UavState] {
        &mut self.uavs
    }

    pub fn gcs(&self) -> Position {
        self.gcs
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    /// Transmissions attempted by a node under the energy threshold; always 0.
    pub fn below_threshold_transmissions(&self) -> u64 {
        self.below_threshold_tx
    }

    pub fn energy_spent(&self) -> EnergySpent {
        self.spent
    }

    pub fn enable_audit(&mut self) {
        self.audit = Some(Vec::new());
    }

    pub fn take_audit(&mut self) -> Vec<DecisionAudit> {
        self.audit.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn take_events(&mut self) -> Vec<EventRow> {
        std::mem::take(&mut self.events)
    }

    fn trace(&mut self, row: EventRow) {
        if self.cfg.trace {
            self.events.push(row);
        }
    }

    fn uav(&self, id: NodeId) -> &UavState {
        &self.uavs[id.index()]
    }

    fn position_of(&self, id: NodeId) -> Position {
        if id.is_gcs() {
            self.gcs
        } else {
            self.uav(id).position
        }
    }

    fn is_present(&self, id: NodeId) -> bool {
        id.is_gcs() || self.uav(id).present()
    }

    /// Advances the world by one episode.
    pub fn step(&mut self) -> EpisodeMetrics {
        let now = self.slot;
        let mut tally = SlotTally::default();
        self.apply_scenario(now);
        self.move_and_charge(now);
        self.enforce_threshold(now);
        self.clean_tables(now);
        tally.hellos = self.hello_phase(now);
        self.enforce_threshold(now);
        for u in self.uavs.iter_mut().filter(|u| u.present()) {
            while let Some(p) = u.q_r.pop_front() {
                u.q_t.push_back(p);
            }
        }
        self.generate(now);
        self.settle_modes(now);
        self.data_phase(now, &mut tally);
        self.enforce_threshold(now);
        self.slot += 1;
        self.snapshot(now, tally)
    }

    fn snapshot(&mut self, episode: u64, tally: SlotTally) -> EpisodeMetrics {
        let reward = if tally.rewards.is_empty() {
            0.0
        } else {
            tally.rewards.iter().sum::<f64>() / tally.rewards.len() as f64
        };
        self.cumulative_reward += reward;
        self.cumulative_l3 += tally.l3;
        let sum = |f: fn(&PacketCounters) -> u64| self.uavs.iter().map(|u| f(&u.counters)).sum::<u64>();
        EpisodeMetrics {
            episode,
            reward,
            cumulative_reward: self.cumulative_reward,
            decisions: tally.rewards.len() as u64,
            empty_decisions: tally.empty,
            total_residual_j: self.uavs.iter().map(|u| u.energy.residual).sum(),
            l3_delivered: tally.l3,
            cumulative_l3_delivered: self.cumulative_l3,
            pac_tx_l2: sum(|c| c.pac_tx_l2),
            ack_l2: sum(|c| c.ack_l2),
            pac_tx_l3: sum(|c| c.pac_tx_l3),
            ack_l3: sum(|c| c.ack_l3),
            generated: self.generated,
            dropped: self.dropped,
            queued: self.uavs.iter().map(|u| (u.q_r.len() + u.q_t.len()) as u64).sum(),
            hellos: tally.hellos,
            active_nodes: self.uavs.iter().filter(|u| u.present()).count() as u64,
            charging_nodes: self.uavs.iter().filter(|u| u.energy.charging).count() as u64,
            fragmented: self.uavs.iter().any(|u| !u.active),
        }
    }

    // -- scenario --

    fn apply_scenario(&mut self, now: u64) {
        if self.scenario.kind == ScenarioKind::None {
            return;
        }
        if !self.scen.started && now >= self.scenario.start_slot {
            self.scen.started = true;
            let spec = self.scenario.clone();
            match spec.kind {
                ScenarioKind::Fragmentation => {
                    self.inject_fragmentation(&spec);
                }
                ScenarioKind::EnergyDepletion => self.inject_depletion(&spec, now),
                ScenarioKind::None => {}
            }
        }
        let due: Vec<NodeId> = self
            .scen
            .pending_rejoins
            .iter()
            .filter(|(slot, _)| *slot <= now)
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        self.scen.pending_rejoins.retain(|(slot, _)| *slot > now);
        for id in due {
            let u = &mut self.uavs[id.index()];
            u.active = true;
            u.mode = Mode::NeighborDiscovery;
            u.table.clear();
            u.heard.clear();
            u.table.next_hello_at = now;
            self.trace(EventRow::new(now, "rejoin", id.0));
        }
    }

    fn eligible_for_selection(&self) -> Vec<(NodeId, f64)> {
        self.uavs
            .iter()
            .filter(|u| u.present())
            .map(|u| (u.id, self.q.max_outgoing(u.id)))
            .collect()
    }

    /// Partitions the selected nodes out of the network and schedules their return.
    pub fn inject_fragmentation(&mut self, spec: &ScenarioSpec) -> Vec<NodeId> {
        let eligible = self.eligible_for_selection();
        let selected = select_nodes(spec.selection, spec.fraction, &eligible, &mut self.rng_scenario);
        if selected.is_empty() {
            tracing::warn!("fragmentation selects no nodes; skipped");
            return selected;
        }
        for &id in &selected {
            self.uavs[id.index()].active = false;
            for other in self.uavs.iter_mut() {
                other.table.remove(id);
                other.heard.remove(&id);
            }
            self.trace(EventRow::new(self.slot, "fragment", id.0));
        }
        let offsets = spec.rejoin_offsets();
        let per_batch = selected.len().div_ceil(offsets.len());
        let end = spec.start_slot.max(self.slot) + spec.duration_slots;
        self.scen.pending_rejoins = selected
            .chunks(per_batch.max(1))
            .zip(offsets)
            .map(|(ids, off)| (end + off, ids.to_vec()))
            .collect();
        self.scen.selected = selected.clone();
        selected
    }

    fn inject_depletion(&mut self, spec: &ScenarioSpec, now: u64) {
        let eligible = self.eligible_for_selection();
        let selected = select_nodes(spec.selection, spec.fraction, &eligible, &mut self.rng_scenario);
        if selected.is_empty() {
            tracing::warn!("energy depletion selects no nodes; skipped");
        }
        for &id in &selected {
            let u = &mut self.uavs[id.index()];
            let cut = (u.energy.residual - spec.depletion_level_j).max(0.0);
            u.spend(cut);
            self.trace(EventRow::new(now, "deplete", id.0));
        }
        self.scen.selected = selected;
    }

    // -- mobility and energy --

    fn move_and_charge(&mut self, now: u64) {
        let dt = self.cfg.slot_s();
        for k in 0..self.uavs.len() {
            let u = &mut self.uavs[k];
            u.prev_position = u.position;
            if !u.active {
                continue;
            }
            if u.energy.charging {
                if tick_charge(&mut u.energy, dt) {
                    let base = mobility::random_location(&mut self.rng_relocate, &self.mob);
                    let trip = flight_energy(&self.en, &self.mob, distance(&u.position, &base));
                    u.spent_since_charge = 0.0;
                    u.spend(trip);
                self.spent.trips += trip;
                    self.spent.trips += trip;
                    u.position = base;
                    u.prev_position = base;
                    u.mode = Mode::NeighborDiscovery;
                    u.table.clear();
                    u.heard.clear();
                    u.table.next_hello_at = now;
                    let id = u.id.0;
                    self.trace(EventRow::new(now, "charge_end", id));
                }
                continue;
            }
            if u.relocate {
                u.relocate = false;
                let target = mobility::random_location(&mut self.rng_relocate, &self.mob);
                let trip = flight_energy(&self.en, &self.mob, distance(&u.position, &target));
                u.spend(trip);
                u.position = target;
                u.table.next_hello_at = u.table.next_hello_at.min(now);
                let id = u.id.0;
                self.trace(EventRow::new(now, "relocate", id));
                continue;
            }
            let (next, moved) = mobility::tick(&u.position, &mut u.mobility, &self.mob, dt, &mut u.mob_rng);
            u.position = next;
            if moved {
                let e = self.en.flight(dt).unwrap_or(0.0);
                u.spend(e);
                self.spent.flight += e;
            }
        }
    }

    fn enforce_threshold(&mut self, now: u64) {
        for k in 0..self.uavs.len() {
            let u = &self.uavs[k];
            if u.present() && u.energy.needs_charge() {
                self.start_charge(k, now);
            }
        }
    }

    fn start_charge(&mut self, k: usize, now: u64) {
        let points = self.cfg.charge_point_list().expect("validated");
        let u = &mut self.uavs[k];
        let cp = points
            .iter()
            .copied()
            .min_by(|a, b| distance(&u.position, a).total_cmp(&distance(&u.position, b)))
            .expect("at least one charge point");
        let d = distance(&u.position, &cp);
        let out = flight_energy(&self.en, &self.mob, d);
        u.spend(out);
        self.spent.trips += out;
        let travel = if self.mob.speed.1 > 0.0 { d / self.mob.speed.1 } else { 0.0 };
        u.position = cp;
        u.energy.start_charge(travel + self.cfg.charge_time_s);
        u.mode = Mode::Charge;
        let lost = (u.q_r.len() + u.q_t.len()) as u64;
        u.q_r.clear();
        u.q_t.clear();
        u.table.clear();
        u.heard.clear();
        u.traces.clear();
        self.dropped += lost;
        let id = u.id;
        for other in self.uavs.iter_mut() {
            other.heard.remove(&id);
        }
        self.trace(EventRow::new(now, "charge_start", id.0).value(lost as f64));
    }

    // -- neighbor discovery --

    fn clean_tables(&mut self, now: u64) {
        let (gcs, radius) = (self.gcs, self.cfg.tx_radius_m);
        for u in self.uavs.iter_mut().filter(|u| u.present()) {
            expire_records(&mut u.table, now);
            u.table.retain_sector(&u.position, &gcs, radius);
            u.heard.retain(|_, until| *until > now);
        }
    }

    fn pair_lst(&self, a: &UavState, b: NodeId) -> Option<f64> {
        let radius = self.cfg.tx_radius_m;
        let (pos, prev, speed) = if b.is_gcs() {
            (self.gcs, self.gcs, 0.0)
        } else {
            let o = self.uav(b);
            if !o.present() {
                return None;
            }
            (o.position, o.prev_position, o.speed())
        };
        let now_d = distance(&a.position, &pos);
        let prev_d = distance(&a.prev_position, &prev);
        link_sustenance_time(now_d, a.speed(), speed, classify_relation(prev_d, now_d), radius)
    }

    fn hello_phase(&mut self, now: u64) -> u64 {
        let threshold = self.cfg.energy_threshold_j;
        let slot_s = self.cfg.slot_s();
        let radius = self.cfg.tx_radius_m;
        let broadcasters: Vec<usize> = (0..self.uavs.len())
            .filter(|&k| {
                let u = &self.uavs[k];
                u.present()
                    && u.energy.residual >= threshold
                    && u.table.next_hello_at <= now
            })
            .collect();
        let mut messages = Vec::with_capacity(broadcasters.len());
        for &k in &broadcasters {
            let u = &self.uavs[k];
            let lst = reduce_lst(u.table.candidates().map(|c| self.pair_lst(u, c)));
            let next = schedule_next_hello(lst, now, slot_s);
            let msg = HelloMessage {
                origin: u.id,
                location: u.position,
                residual_j: u.energy.residual,
                prs_l2: u.counters.l2_ratio(),
                prs_l3: u.counters.l3_ratio(),
                beta: u.beta,
                gamma: u.gamma,
                q_value: self.q.max_outgoing(u.id),
                issued_at: now,
                next_hello_at: next,
            };
            messages.push(msg);
        }
        let cost = self.en.tx(self.hello_bits, radius);
        for (i, &k) in broadcasters.iter().enumerate() {
            let u = &mut self.uavs[k];
            u.table.next_hello_at = messages[i].next_hello_at;
            u.spend(cost);
            self.spent.hello += cost;
            let m = messages[i];
            if self.cfg.trace {
                self.events.push(hello_row(now, &m));
            }
        }

        let positions: Vec<Position> = messages.iter().map(|m| m.location).collect();
        let dist = fading_distribution(self.chan.m);
        let alpha = self.chan.path_loss_exponent;
        for (i, msg) in messages.iter().enumerate() {
            for r in 0..self.uavs.len() {
                let rx = &self.uavs[r];
                if rx.id == msg.origin || !rx.present() || distance(&rx.position, &msg.location) > radius {
                    continue;
                }
                let delivered = self.cfg.ideal_hellos || {
                    let signal = self.rng_hello.sample(dist) * link_gain(&msg.location, &rx.position, alpha);
                    let mut interference = 0.0;
                    for (j, p) in positions.iter().enumerate() {
                        if j != i && messages[j].origin != rx.id {
                            interference += self.rng_hello.sample(dist) * link_gain(p, &rx.position, alpha);
                        }
                    }
                    interference == 0.0 || signal >= self.chan.theta * interference
                };
                if !delivered {
                    continue;
                }
                let gcs = self.gcs;
                let expiry = self.expiry_slots;
                let rx = &mut self.uavs[r];
                process_hello(&mut rx.table, msg, &rx.position, &gcs, radius, expiry);
                let lapse = msg.issued_at.max(msg.next_hello_at) + expiry;
                if rx.heard.insert(msg.origin, lapse).is_none() {
                    rx.table.next_hello_at = rx.table.next_hello_at.min(now + 1);
                }
            }
        }

        let beacon = HelloMessage {
            origin: NodeId::GCS,
            location: self.gcs,
            residual_j: f64::MAX,
            prs_l2: 1.0,
            prs_l3: 1.0,
            beta: 0.0,
            gamma: 0.0,
            q_value: self.cfg.gcs_q_value,
            issued_at: now,
            next_hello_at: now + 1,
        };
        let gcs = self.gcs;
        let expiry = self.expiry_slots;
        for u in self.uavs.iter_mut().filter(|u| u.present()) {
            if distance(&u.position, &gcs) <= radius {
                process_hello(&mut u.table, &beacon, &u.position, &gcs, radius, expiry);
            }
        }
        broadcasters.len() as u64
    }

    // -- traffic and modes --

    fn generate(&mut self, now: u64) {
        let threshold = self.cfg.energy_threshold_j;
        let sources: Vec<NodeId> = self
            .uavs
            .iter()
            .filter(|u| u.present() && u.energy.residual >= threshold)
            .map(|u| u.id)
            .collect();
        let packets = self.traffic.generate(now, &sources);
        self.generated += packets.len() as u64;
        for p in packets {
            self.uavs[p.source.index()].q_t.push_back(p);
        }
    }

    fn settle_modes(&mut self, now: u64) {
        for u in self.uavs.iter_mut().filter(|u| u.active) {
            let ev = ModeEvents {
                residual_j: u.energy.residual,
                threshold_j: u.energy.threshold,
                charged: !u.energy.charging,
                hello_due: u.table.next_hello_at <= now,
                q_r: u.q_r.len(),
                q_t: u.q_t.len(),
                n_h: u.table.len(),
            };
            u.mode = settle_mode(u.mode, &ev);
        }
    }

    // -- data --

    fn coverage(
        &mut self,
        pool: &mut Option<FadingPool>,
        interferers: &[NodeId],
        tx: NodeId,
        rx: NodeId,
    ) -> f64 {
        if interferers.iter().all(|n| *n == tx || *n == rx) {
            return 1.0;
        }
        let pool = pool.get_or_insert_with(|| {
            FadingPool::draw(
                self.uavs.len() + 1,
                self.chan.mc_samples as usize,
                self.chan.m,
                &mut self.rng_pool,
            )
        });
        let others: Vec<(usize, Position)> = interferers
            .iter()
            .filter(|n| **n != tx && **n != rx)
            .map(|n| (n.0 as usize, self.position_of(*n)))
            .collect();
        let txp = self.position_of(tx);
        let rxp = self.position_of(rx);
        pool.coverage((tx.0 as usize, &txp), &rxp, &others, self.chan.path_loss_exponent, self.chan.theta)
    }

    fn hop_succeeds(&mut self, tx: NodeId, rx: NodeId, interferers: &[NodeId]) -> bool {
        let others: Vec<Position> = interferers
            .iter()
            .filter(|n| **n != tx && **n != rx)
            .map(|n| self.position_of(*n))
            .collect();
        let (t, r) = (self.position_of(tx), self.position_of(rx));
        deliver_hop(&t, &r, &others, &self.chan, &mut self.rng_data)
    }

    fn max_q_next(&self, j: NodeId, from: NodeId) -> f64 {
        if j.is_gcs() {
            return self.cfg.gcs_q_value;
        }
        let u = self.uav(j);
        let k = &self.constraints;
        u.table
            .records()
            .filter(|r| r.hello.origin != from && self.is_present(r.hello.origin))
            .filter(|r| r.hello.residual_j > k.energy_threshold)
            .filter(|r| {
                let d = distance(&u.position, &self.position_of(r.hello.origin));
                d <= k.tx_radius && self.collision(d) < k.collision_threshold
            })
            .map(|r| self.q.get(j, r.hello.origin))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |m| m.max(v))))
            .unwrap_or(0.0)
    }

    fn min_cost_next(&self, j: NodeId) -> f64 {
        if j.is_gcs() {
            return 0.0;
        }
        let u = self.uav(j);
        let k = &self.constraints;
        u.table
            .records()
            .filter(|r| self.is_present(r.hello.origin) && r.hello.residual_j > k.energy_threshold)
            .filter(|r| distance(&u.position, &self.position_of(r.hello.origin)) <= k.tx_radius)
            .map(|r| self.cost.get(j, r.hello.origin))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |m| m.min(v))))
            .unwrap_or(self.cfg.hop_cap() as f64)
    }

    fn collision(&self, d: f64) -> f64 {
        collision_probability(d, self.cfg.xi_x_m, self.cfg.xi_y_m, self.cfg.collision_variant)
    }

    fn data_phase(&mut self, now: u64, tally: &mut SlotTally) {
        let mut order: Vec<NodeId> = self
            .uavs
            .iter()
            .filter(|u| u.present() && u.mode == Mode::Transmit && !u.q_t.is_empty())
            .map(|u| u.id)
            .collect();
        if order.is_empty() {
            return;
        }
        let rot = (now as usize) % order.len();
        order.rotate_left(rot);
        let threshold = self.cfg.energy_threshold_j;
        let hop_cap = self.cfg.hop_cap();
        let mut pool: Option<FadingPool> = None;
        let mut relocations: Vec<NodeId> = Vec::new();
        let mut done = vec![false; self.uavs.len()];
        let everyone: Vec<NodeId> = self.uavs.iter().filter(|u| u.present()).map(|u| u.id).collect();

        // Each round sends at most one packet per sender. Senders decide in
        // turn and estimate coverage against the transmissions already
        // committed in this round, as a carrier-sensing radio would; delivery
        // is then tested against everything sent in the round.
        for _ in 0..self.cfg.max_tx_per_slot {
            let mut plan: Vec<Decision> = Vec::new();
            for &i in &order {
                if done[i.index()] {
                    continue;
                }
                let u = self.uav(i);
                if !u.present() || u.mode != Mode::Transmit || u.energy.residual < threshold {
                    done[i.index()] = true;
                    continue;
                }
                while self.uav(i).q_t.front().is_some_and(|p| p.attempts >= hop_cap) {
                    let p = self.uavs[i.index()].q_t.pop_front().expect("nonempty");
                    self.dropped += 1;
                    self.trace(EventRow::new(now, "drop", i.0).packet(p.id));
                }
                if self.uav(i).q_t.is_empty() {
                    done[i.index()] = true;
                    continue;
                }
                let sensed: Vec<NodeId> = match self.cfg.interference {
                    InterferenceModel::Active => plan.iter().map(|d| d.node).collect(),
                    InterferenceModel::All => everyone.clone(),
                };
                match self.decide(i, now, &sensed, &mut pool, &mut relocations, tally) {
                    Some(d) => plan.push(d),
                    None => done[i.index()] = true,
                }
            }
            if plan.is_empty() {
                break;
            }
            let actual: Vec<NodeId> = plan.iter().map(|d| d.node).collect();
            let heard = match self.cfg.interference {
                InterferenceModel::Active => actual.clone(),
                InterferenceModel::All => everyone.clone(),
            };
            for d in plan {
                let keep_going = self.transmit(now, d, &heard, tally);
                if !keep_going {
                    done[d.node.index()] = true;
                }
            }
        }
        for id in relocations {
            self.uavs[id.index()].relocate = true;
        }
    }

    /// Builds the candidate view of `i` for its head packet and picks a next hop.
    /// Records the decision reward; `None` means no usable next hop.
    #[allow(clippy::too_many_arguments)]
    fn decide(
        &mut self,
        i: NodeId,
        now: u64,
        interferers: &[NodeId],
        pool: &mut Option<FadingPool>,
        relocations: &mut Vec<NodeId>,
        tally: &mut SlotTally,
    ) -> Option<Decision> {
        let ui = self.uav(i);
        let src = ui.position;
        let trail = &ui.q_t.front().expect("nonempty").trail;
        let (table_len, hops) = (ui.table.len(), trail.len().saturating_sub(1));
        let records: Vec<(NodeId, f64)> = ui
            .table
            .records()
            .map(|r| (r.hello.origin, r.hello.residual_j))
            .filter(|(id, _)| !trail.contains(id) && self.is_present(*id))
            .collect();
        let mut cands = Vec::with_capacity(records.len());
        for (j, residual_j) in records {
            let pos = self.position_of(j);
            let d = distance(&src, &pos);
            let p_coll = self.collision(d);
            if !j.is_gcs() && p_coll >= self.constraints.collision_threshold {
                relocations.push(j);
            }
            let p_cov = if d <= self.constraints.tx_radius {
                self.coverage(pool, interferers, i, j)
            } else {
                0.0
            };
            let q = match self.cfg.policy {
                Policy::VanillaQ => self.cost.get(i, j),
                _ => self.q.get(i, j),
            };
            cands.push(CandidateState { id: j, position: pos, residual_j, distance: d, p_cov, p_coll, q });
        }

        let k = self.constraints;
        let (choice, n_h, was_greedy) = match self.cfg.policy {
            Policy::Iqmr => {
                let feas: Vec<&CandidateState> = cands.iter().filter(|c| feasible(c, &k)).collect();
                let best = select_next_hop(&src, &self.gcs, &cands, &k);
                let explore =
                    self.cfg.epsilon > 0.0 && !feas.is_empty() && self.rng_explore.random::<f64>() < self.cfg.epsilon;
                if explore {
                    let pick = feas[self.rng_explore.random_range(0..feas.len())];
                    let top = feas.iter().map(|c| c.q).fold(f64::MIN, f64::max);
                    (Some(pick.id), feas.len(), pick.q == top)
                } else {
                    (best, feas.len(), true)
                }
            }
            Policy::Greedy => {
                let n = cands.iter().filter(|c| feasible(c, &k)).count();
                (baseline_greedy(&self.gcs, &cands, &k), n, true)
            }
            Policy::VanillaQ => {
                let usable: Vec<CandidateState> = cands
                    .iter()
                    .filter(|c| c.residual_j > k.energy_threshold && c.distance <= k.tx_radius)
                    .copied()
                    .collect();
                (select_min_cost(&src, &self.gcs, usable.iter()), usable.len(), true)
            }
        };

        let chosen = choice.and_then(|id| cands.iter().find(|c| c.id == id).copied());
        let reward = match &chosen {
            None => 0.0,
            Some(c) => {
                let (l2, l3, e) = if c.id.is_gcs() {
                    (1.0, 1.0, 1.0)
                } else {
                    let rec = self.uav(i).table.get(c.id).expect("candidate from table").hello;
                    (rec.prs_l2, rec.prs_l3, normalize(rec.residual_j, self.cfg.energy_bounds()))
                };
                let inputs =
                    RewardInputs { p_coll: c.p_coll, prs_l3: l3, prs_l2: l2, p_cov: c.p_cov, energy_norm: e, n_h };
                compute_reward(&inputs, &self.cfg.weights())
            }
        };
        let residual_now = self.uav(i).energy.residual;
        if let Some(a) = self.audit.as_mut() {
            a.push(DecisionAudit {
                slot: now,
                node: i,
                src,
                dst: self.gcs,
                candidates: cands,
                constraints: k,
                policy: self.cfg.policy,
                chosen: choice,
                n_h,
                reward,
                residual_j: residual_now,
                table_len,
                hops,
            });
        }
        tally.rewards.push(reward);

        let Some(cand) = chosen else {
            tally.empty += 1;
            let u = &mut self.uavs[i.index()];
            // A fruitless attempt still counts toward the hop cap, so a
            // packet with nowhere to go is eventually dropped.
            u.q_t.front_mut().expect("nonempty").attempts += 1;
            u.mode = Mode::NeighborDiscovery;
            self.trace(EventRow::new(now, "no_next_hop", i.0));
            return None;
        };
        Some(Decision { node: i, cand, reward, was_greedy })
    }

    /// Sends the head packet of `d.node`; returns whether the sender may keep going this slot.
    fn transmit(&mut self, now: u64, d: Decision, heard: &[NodeId], tally: &mut SlotTally) -> bool {
        let (i, c) = (d.node, d.cand);
        let j = c.id;
        if self.uav(i).energy.residual < self.cfg.energy_threshold_j {
            self.below_threshold_tx += 1;
        }
        let e_tx = self.en.tx(self.cfg.packet_size_bytes as f64 * 8.0, c.distance);
        {
            let u = &mut self.uavs[i.index()];
            u.spend(e_tx);
            self.spent.data += e_tx;
            u.counters.pac_tx_l2 += 1;
            let p = u.q_t.front_mut().expect("nonempty");
            if !p.counted_by_holder {
                p.counted_by_holder = true;
                u.counters.pac_tx_l3 += 1;
            }
            p.attempts += 1;
        }
        let delivered = self.hop_succeeds(i, j, heard);

        match self.cfg.policy {
            Policy::Iqmr => {
                let beta = self.cfg.fixed_beta.unwrap_or_else(|| {
                    dynamic_learning_rate(c.p_cov, self.cfg.beta_min, self.cfg.beta_max, self.cfg.learning_rate_variant)
                });
                let gamma = self.cfg.fixed_gamma.unwrap_or_else(|| {
                    dynamic_discount(self.uav(i).table.len(), self.uavs.len(), self.cfg.gamma_min, self.cfg.gamma_max)
                });
                let next = self.max_q_next(j, i);
                let lambda = self.cfg.lambda;
                let u = &mut self.uavs[i.index()];
                update_q(&mut self.q, &mut u.traces, i, j, d.reward, next, beta, gamma, lambda, d.was_greedy);
                u.beta = beta;
                u.gamma = gamma;
            }
            Policy::VanillaQ if delivered => {
                let wait = self.uav(i).q_t.len().saturating_sub(1) as f64 / self.cfg.max_tx_per_slot as f64;
                let t = self.min_cost_next(j);
                let old = self.cost.get(i, j);
                let b = self.cfg.vanilla_beta;
                self.cost.set(i, j, old + b * (1.0 + wait + self.cfg.vanilla_gamma * t - old));
            }
            _ => {}
        }

        self.trace(EventRow::new(now, if delivered { "tx_ok" } else { "tx_fail" }, i.0).peer(j.0).value(d.reward));
        if !delivered {
            return false;
        }
        let mut pkt = {
            let u = &mut self.uavs[i.index()];
            if self.cfg.ack_feedback != AckFeedback::L3Only {
                u.counters.ack_l2 += 1;
            }
            u.q_t.pop_front().expect("nonempty")
        };
        pkt.trail.push(j);
        if j.is_gcs() {
            tally.l3 += 1;
            self.trace(EventRow::new(now, "delivered", i.0).packet(pkt.id).value(pkt.trail.len() as f64 - 1.0));
            if self.cfg.ack_feedback != AckFeedback::L2Only {
                self.propagate_l3_ack(&pkt, heard);
            }
        } else {
            pkt.counted_by_holder = false;
            self.uavs[j.index()].q_r.push_back(pkt);
        }
        !self.uav(i).energy.needs_charge()
    }

    fn propagate_l3_ack(&mut self, pkt: &Packet, interferers: &[NodeId]) {
        for w in (1..pkt.trail.len()).rev() {
            let (tx, rx) = (pkt.trail[w], pkt.trail[w - 1]);
            if !self.is_present(rx) || !self.is_present(tx) {
                break;
            }
            if !self.hop_succeeds(tx, rx, interferers) {
                break;
            }
            self.uavs[rx.index()].counters.ack_l3 += 1;
        }
    }

    /// Checks the per-slot invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let now = self.slot;
        if !self.q.all_finite() {
            return Err("non-finite Q-value".into());
        }
        if self.below_threshold_tx > 0 {
            return Err("transmission below the energy threshold".into());
        }
        for u in &self.uavs {
            if !u.counters.is_consistent() {
                return Err(format!("{}: ack counters exceed transmissions {:?}", u.id, u.counters));
            }
            let e = &u.energy;
            if !(0.0..=e.full).contains(&e.residual) {
                return Err(format!("{}: residual {} outside [0, full]", u.id, e.residual));
            }
            if (u.spent_since_charge + e.residual - e.full).abs() > 1e-6 * e.full {
                return Err(format!("{}: energy not conserved", u.id));
            }
            if u.energy.charging && u.mode != Mode::Charge {
                return Err(format!("{}: charging outside charge mode", u.id));
            }
            if u.present() {
                if u.mode == Mode::Charge {
                    return Err(format!("{}: charge mode while present", u.id));
                }
                if u.energy.residual < e.threshold {
                    return Err(format!("{}: active below threshold", u.id));
                }
                for r in u.table.records() {
                    if r.expires_at < now {
                        return Err(format!("{}: expired record of {}", u.id, r.hello.origin));
                    }
                    if !crate::neighbor::in_candidate_sector(&u.position, &self.gcs, &r.hello.location, self.cfg.tx_radius_m) {
                        return Err(format!("{}: out-of-sector record of {}", u.id, r.hello.origin));
                    }
                }
            }
            if u.position.h < 0.0 {
                return Err(format!("{}: negative altitude", u.id));
            }
            if u.present() && u.position.radial() > self.cfg.network_radius_m + 1e-9 {
                return Err(format!("{}: outside the network cylinder", u.id));
            }
            for p in u.q_r.iter().chain(u.q_t.iter()) {
                if !p.trail_is_acyclic() {
                    return Err(format!("packet {} has a cyclic trail", p.id));
                }
            }
        }
        Ok(())
    }
}

fn hello_row(now: u64, m: &HelloMessage) -> EventRow {
    EventRow {
        x: Some(m.location.x),
        y: Some(m.location.y),
        h: Some(m.location.h),
        residual_j: Some(m.residual_j),
        prs_l2: Some(m.prs_l2),
        prs_l3: Some(m.prs_l3),
        beta: Some(m.beta),
        gamma: Some(m.gamma),
        q_value: Some(m.q_value),
        issued_at: Some(m.issued_at),
        next_hello_at: Some(m.next_hello_at),
        ..EventRow::new(now, "hello", m.origin.0)
    }
}

/// Flight energy for a straight trip of `d` meters at top speed.
fn flight_energy(en: &EnergyParams, mob: &MobilityParams, d: f64) -> f64 {
    if d <= 0.0 || mob.speed.1 <= 0.0 {
        return 0.0;
    }
    let mut tau = d / mob.speed.1;
    if en.eps_payload > 0.0 {
        tau = tau.min(0.999 * en.eps_density / en.eps_payload);
    }
    en.flight(tau).unwrap_or(0.0)
}

/// One hop attempt: delivered iff a fresh SIR sample meets the threshold.
pub fn deliver_hop<R: Rng + ?Sized>(
    tx: &Position,
    rx: &Position,
    interferers: &[Position],
    chan: &ChannelParams,
    rng: &mut R,
) -> bool {
    if interferers.is_empty() {
        return true;
    }
    let dist = fading_distribution(chan.m);
    let fading: Vec<f64> = (0..=interferers.len()).map(|_| rng.sample(dist)).collect();
    crate::channel::sir(tx, rx, interferers, &fading, chan.path_loss_exponent) >= chan.theta
}

pub fn run_episode(world: &mut World) -> EpisodeMetrics {
    world.step()
}

pub fn run_simulation(cfg: &SimConfig) -> Result<Vec<EpisodeMetrics>> {
    Ok(run_simulation_full(cfg)?.metrics)
}

pub fn run_simulation_full(cfg: &SimConfig) -> Result<RunOutput> {
    let mut world = World::new(cfg)?;
    let metrics = (0..cfg.episodes).map(|_| world.step()).collect();
    Ok(RunOutput { metrics, events: world.take_events(), q_table: world.q.clone() })
}
