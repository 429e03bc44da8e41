//! The run loop: agents, gossip, solidification, voting and the attacker,
//! all driven from one event queue in virtual time.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use super::queue::{EventKind, EventQueue};
use super::rng::{stream, RngStream, StreamLabel};
use super::SimTime;
use crate::agents::{honest_issue, issuance_delay, select_parents, BaitAndSwitch, Node};
use crate::config::{ConfigError, SimConfig, WeightTable};
use crate::consensus::heaviest;
use crate::ids::{BlockId, ColorId, ConflictSetId, NodeId};
use crate::ledger::ColorRegistry;
use crate::metrics::{consensus_time, ConfirmationRecord, OpinionChange, RunResult};
use crate::scalar::Scalar;
use crate::srrs::{srrs_vote, CommonCoin};
use crate::tangle::{AttachOutcome, Block, Branch};
use crate::topology::{build_graph, PeerGraph, TopologyError, Transport};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<ConfigError>),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Cheap order-sensitive digest of the processed events.
#[derive(Clone, Copy, Debug)]
struct TraceHasher(u64);

impl Default for TraceHasher {
    fn default() -> Self {
        TraceHasher(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for TraceHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(u64::from(b));
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = (self.0.rotate_left(5) ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }

    fn write_u32(&mut self, x: u32) {
        self.write_u64(u64::from(x));
    }

    fn write_usize(&mut self, x: usize) {
        self.write_u64(x as u64);
    }

    fn write_isize(&mut self, x: isize) {
        self.write_u64(x as u64);
    }
}

/// Honest plain payload whose carrier sits on a colored branch.
#[derive(Clone, Debug)]
struct PayloadTrack {
    issuer: NodeId,
    carrier: BlockId,
    branch: Branch,
    orphaned_since: Option<SimTime>,
}

pub struct Simulator<S: Scalar> {
    config: SimConfig,
    weights: WeightTable<S>,
    weight_vec: Vec<S>,
    graph: PeerGraph,
    transport: Transport,
    queue: EventQueue,
    nodes: Vec<Node<S>>,
    blocks: Vec<Arc<Block>>,
    registry: ColorRegistry,
    coin: CommonCoin,
    issuance_rng: RngStream,
    tip_rng: RngStream,
    request_rng: RngStream,
    adversary: Option<BaitAndSwitch>,
    conflict_start: Option<SimTime>,
    opinion_log: Vec<OpinionChange>,
    honest_confirmed: HashMap<ConflictSetId, ColorId>,
    safety_failure: bool,
    /// Honest nodes currently preferring each color.
    preferred_by: Vec<u32>,
    tracks: HashMap<BlockId, PayloadTrack>,
    tracks_by_color: HashMap<ColorId, Vec<BlockId>>,
    honest_payloads: Vec<(BlockId, SimTime)>,
    reattachments: u64,
    trace: TraceHasher,
    events: u64,
    resolved: bool,
}

impl<S: Scalar> Simulator<S> {
    pub fn new(config: SimConfig, seed: u64) -> Result<Self, SimError> {
        let graph = build_graph(
            config.n,
            config.k,
            config.gamma,
            &mut stream(seed, StreamLabel::Topology),
        )?;
        Self::with_graph(config, seed, graph)
    }

    /// A simulator over a caller-supplied peer graph with `config.n` nodes.
    /// `k` and `gamma` are then unused.
    pub fn with_graph(
        mut config: SimConfig,
        seed: u64,
        graph: PeerGraph,
    ) -> Result<Self, SimError> {
        config.seed = seed;
        let errors = config.validate();
        if !errors.is_empty() {
            return Err(SimError::InvalidConfig(errors));
        }
        assert_eq!(graph.node_count(), config.n, "graph size must match N");
        let weights: WeightTable<S> = config.weights();
        let weight_vec = weights.as_slice().to_vec();
        let transport = Transport::new(
            config.d_min,
            config.d_max,
            config.l,
            stream(seed, StreamLabel::Delay),
            stream(seed, StreamLabel::Loss),
        );
        let theta = S::from_real(config.theta);
        let nodes = (0..config.n)
            .map(|i| {
                let id = NodeId::from_index(i);
                Node::new(id, weights.is_honest(id), config.n, theta)
            })
            .collect();
        let adversary = config
            .adversary()
            .map(|id| BaitAndSwitch::new(id, config.q, config.adv_trigger));
        Ok(Self {
            weights,
            weight_vec,
            graph,
            transport,
            queue: EventQueue::new(),
            nodes,
            blocks: vec![Arc::new(Block::genesis())],
            registry: ColorRegistry::new(),
            coin: CommonCoin::new(seed),
            issuance_rng: stream(seed, StreamLabel::Issuance),
            tip_rng: stream(seed, StreamLabel::TipSelection),
            request_rng: stream(seed, StreamLabel::Requests),
            adversary,
            conflict_start: None,
            opinion_log: Vec::new(),
            honest_confirmed: HashMap::new(),
            safety_failure: false,
            preferred_by: Vec::new(),
            tracks: HashMap::new(),
            tracks_by_color: HashMap::new(),
            honest_payloads: Vec::new(),
            reattachments: 0,
            trace: TraceHasher::default(),
            events: 0,
            resolved: false,
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn graph(&self) -> &PeerGraph {
        &self.graph
    }

    pub fn weights(&self) -> &WeightTable<S> {
        &self.weights
    }

    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }

    pub fn registry(&self) -> &ColorRegistry {
        &self.registry
    }

    pub fn blocks(&self) -> &[Arc<Block>] {
        &self.blocks
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn t_max(&self) -> SimTime {
        SimTime(self.config.t_max)
    }

    fn rate(&self, node: NodeId) -> f64 {
        self.config.bps * self.weights.weight(node).to_real()
    }

    fn schedule_issuance(&mut self, node: NodeId, now: SimTime) {
        let rate = self.rate(node);
        if rate > 0.0 {
            let gap = issuance_delay(rate, &mut self.issuance_rng);
            self.queue
                .schedule(now + gap, EventKind::IssuanceTick { node });
        }
    }

    /// Runs to `t_max` (or early resolution, when enabled) and collects results.
    pub fn run(mut self) -> RunResult {
        self.start();
        while self.step() {}
        self.finish()
    }

    /// Seeds the initial events. Called by [`Simulator::run`].
    pub fn start(&mut self) {
        for i in 0..self.nodes.len() {
            self.schedule_issuance(NodeId::from_index(i), SimTime::ZERO);
        }
        if self.adversary.is_some() {
            self.queue
                .schedule(SimTime(self.config.attack_start), EventKind::AttackStart);
        }
    }

    /// Processes one event; returns `false` once the run is over.
    pub fn step(&mut self) -> bool {
        if self.resolved && self.config.stop_on_resolution {
            return false;
        }
        match self.queue.peek_due() {
            Some(due) if due <= self.t_max() => {}
            _ => return false,
        }
        let event = self.queue.pop().expect("peeked");
        event.hash(&mut self.trace);
        self.events += 1;
        let now = event.due;
        match event.kind {
            EventKind::IssuanceTick { node } => self.on_issuance(node, now),
            EventKind::BlockDelivery { to, from, block } => self.on_delivery(to, from, block, now),
            EventKind::RequestDelivery { to, from, block } => {
                if self.nodes[to.index()].tangle.contains(block) {
                    self.send_block(to, from, block, now);
                }
            }
            EventKind::SolidRequestRetry { node, block } => self.on_request_retry(node, block, now),
            EventKind::AttackStart => self.on_attack_start(now),
            EventKind::AdversaryCheck => self.on_adversary_check(now),
            EventKind::EpochBoundary { set, epoch } => self.on_epoch(set, epoch, now),
            EventKind::ReattachCheck { payload } => self.on_reattach_check(payload, now),
        }
        true
    }

    fn next_block_id(&self) -> BlockId {
        BlockId::from_index(self.blocks.len())
    }

    fn send_block(&mut self, from: NodeId, to: NodeId, block: BlockId, now: SimTime) {
        let tx = self.transport.send(from, to, now);
        if !tx.dropped {
            self.queue
                .schedule(tx.arrive, EventKind::BlockDelivery { to, from, block });
        }
    }

    /// Sends `block` from `node` to every neighbor except `except` and
    /// those already holding it.
    fn gossip(&mut self, node: NodeId, block: BlockId, except: Option<NodeId>, now: SimTime) {
        for i in 0..self.graph.degree(node) {
            let neighbor = self.graph.neighbors(node)[i];
            if Some(neighbor) != except && !self.nodes[neighbor.index()].tangle.contains(block) {
                self.send_block(node, neighbor, block, now);
            }
        }
    }

    /// Issues `block` from its issuer: attach locally, account, gossip.
    fn publish(&mut self, block: Arc<Block>, now: SimTime) {
        self.publish_share(block, now, None);
    }

    /// Like [`Self::publish`]; with `share = Some((part, parts))` the
    /// issuer first hands the block only to neighbors whose position is
    /// `part` modulo `parts`.
    fn publish_share(&mut self, block: Arc<Block>, now: SimTime, share: Option<(usize, usize)>) {
        let issuer = block.issuer.expect("issued blocks have an issuer");
        let id = block.id;
        debug_assert_eq!(id, self.next_block_id());
        self.blocks.push(block.clone());
        let outcome = self.nodes[issuer.index()].tangle.attach(block.clone());
        let AttachOutcome::Solid { solidified } = outcome else {
            unreachable!("issuer references only its own solid blocks");
        };
        self.on_solidified(issuer, &solidified, now);
        if self.nodes[issuer.index()].honest && block.color.is_none() {
            self.track_payload(issuer, &block, now);
        }
        match share {
            Some((part, parts)) if self.graph.degree(issuer) >= parts => {
                for i in (part..self.graph.degree(issuer)).step_by(parts) {
                    let neighbor = self.graph.neighbors(issuer)[i];
                    self.send_block(issuer, neighbor, id, now);
                }
            }
            _ => self.gossip(issuer, id, None, now),
        }
    }

    fn on_issuance(&mut self, node: NodeId, now: SimTime) {
        let id = self.next_block_id();
        let block = honest_issue(
            &self.nodes[node.index()],
            id,
            now,
            self.config.n_p,
            &self.registry,
            &mut self.tip_rng,
        );
        self.publish(block, now);
        self.schedule_issuance(node, now);
    }

    fn on_delivery(&mut self, to: NodeId, from: NodeId, block: BlockId, now: SimTime) {
        let node = &mut self.nodes[to.index()];
        if node.tangle.contains(block) {
            return;
        }
        let outcome = node.tangle.attach(self.blocks[block.index()].clone());
        self.gossip(to, block, Some(from), now);
        match outcome {
            AttachOutcome::Duplicate => {}
            AttachOutcome::Pending { missing } => {
                for parent in missing {
                    if self.nodes[to.index()].requested.insert(parent) {
                        self.queue.schedule(
                            now + self.config.solidification_interval,
                            EventKind::SolidRequestRetry {
                                node: to,
                                block: parent,
                            },
                        );
                    }
                }
            }
            AttachOutcome::Solid { solidified } => self.on_solidified(to, &solidified, now),
        }
    }

    fn on_request_retry(&mut self, node: NodeId, block: BlockId, now: SimTime) {
        if self.nodes[node.index()].tangle.contains(block) {
            self.nodes[node.index()].requested.remove(&block);
            return;
        }
        let neighbors = self.graph.neighbors(node);
        if !neighbors.is_empty() {
            let peer =
                neighbors[rand::Rng::random_range(&mut self.request_rng, 0..neighbors.len())];
            let tx = self.transport.send(node, peer, now);
            if !tx.dropped {
                self.queue.schedule(
                    tx.arrive,
                    EventKind::RequestDelivery {
                        to: peer,
                        from: node,
                        block,
                    },
                );
            }
        }
        self.queue.schedule(
            now + self.config.solidification_interval,
            EventKind::SolidRequestRetry { node, block },
        );
    }

    /// Consensus bookkeeping for blocks that just became solid at `node`.
    fn on_solidified(&mut self, node: NodeId, solidified: &[BlockId], now: SimTime) {
        for &id in solidified {
            let block = self.blocks[id.index()].clone();
            if let Some(color) = block.color {
                let set = self.registry.set_of(color).expect("colors are registered");
                let n = &mut self.nodes[node.index()];
                let before = n.opinions.preferred(set);
                n.opinions.learn(set, color);
                if before.is_none() {
                    self.note_opinion(node, set, None, color, now);
                }
            }
            let n = &mut self.nodes[node.index()];
            let support =
                n.tracker
                    .record_support(&n.tangle, &block, &self.weight_vec, &self.registry, now);
            if support.vote_changes.is_empty() {
                continue;
            }
            let mut touched: Vec<ConflictSetId> = Vec::new();
            for change in &support.vote_changes {
                if self.nodes[node.index()]
                    .tracker
                    .check_color_confirmation(change.to, now)
                {
                    self.on_color_confirmed(node, change.set, change.to, now);
                }
                if !touched.contains(&change.set) {
                    touched.push(change.set);
                }
            }
            for set in touched {
                self.reevaluate(node, set, now);
            }
        }
    }

    fn otv_active(&self, set: ConflictSetId, now: SimTime) -> bool {
        if !self.config.srrs_enabled {
            return true;
        }
        let created = self
            .registry
            .conflict_set(set)
            .map_or(SimTime::ZERO, |s| s.created_at);
        now < created + self.config.d_start
    }

    /// Heaviest-branch opinion update for an honest node.
    fn reevaluate(&mut self, node: NodeId, set: ConflictSetId, now: SimTime) {
        let n = &self.nodes[node.index()];
        if !n.honest || n.opinions.confirmed(set).is_some() || !self.otv_active(set, now) {
            return;
        }
        let current = n.opinions.preferred(set);
        let choice = heaviest(n.opinions.members(set), current, |c| {
            n.tracker.approval_weight(c)
        });
        if let Some(color) = choice {
            if self.nodes[node.index()].opinions.set_preferred(set, color) {
                self.note_opinion(node, set, current, color, now);
            }
        }
    }

    fn on_color_confirmed(
        &mut self,
        node: NodeId,
        set: ConflictSetId,
        color: ColorId,
        now: SimTime,
    ) {
        let n = &mut self.nodes[node.index()];
        let before = n.opinions.preferred(set);
        let pinned = n.opinions.confirm(set, color);
        if !n.honest {
            if let Some(adv) = self.adversary.as_mut() {
                if adv.set == Some(set) {
                    adv.finished = true;
                }
            }
            return;
        }
        if pinned && before != Some(color) {
            self.note_opinion(node, set, before, color, now);
        }
        match self.honest_confirmed.get(&set) {
            Some(&first) if first != color => self.safety_failure = true,
            Some(_) => {}
            None => {
                self.honest_confirmed.insert(set, color);
            }
        }
        if self.config.stop_on_resolution && self.all_resolved() {
            self.resolved = true;
        }
    }

    fn all_resolved(&self) -> bool {
        self.registry.sets().all(|set| {
            let target = self.honest_confirmed.get(&set.id);
            target.is_some()
                && self
                    .nodes
                    .iter()
                    .filter(|n| n.honest)
                    .all(|n| n.opinions.confirmed(set.id) == target.copied())
        })
    }

    /// Logs an honest preference change and updates orphan tracking.
    fn note_opinion(
        &mut self,
        node: NodeId,
        set: ConflictSetId,
        from: Option<ColorId>,
        to: ColorId,
        now: SimTime,
    ) {
        if !self.nodes[node.index()].honest {
            return;
        }
        self.opinion_log.push(OpinionChange {
            at: now,
            node,
            set,
            color: to,
        });
        if self.preferred_by.len() <= to.index() {
            self.preferred_by.resize(to.index() + 1, 0);
        }
        self.preferred_by[to.index()] += 1;
        if self.preferred_by[to.index()] == 1 {
            self.refresh_orphans(to, now);
        }
        if let Some(old) = from {
            self.preferred_by[old.index()] -= 1;
            if self.preferred_by[old.index()] == 0 {
                self.refresh_orphans(old, now);
            }
        }
    }

    fn prefers_nobody(&self, color: ColorId) -> bool {
        self.preferred_by.get(color.index()).copied().unwrap_or(0) == 0
    }

    /// A carrier is orphaned when some color on its branch has no honest
    /// supporter left: then no honest node may reference it.
    fn is_orphaned(&self, branch: &[ColorId]) -> bool {
        branch.iter().any(|&c| self.prefers_nobody(c))
    }

    fn refresh_orphans(&mut self, color: ColorId, now: SimTime) {
        let Some(payloads) = self.tracks_by_color.remove(&color) else {
            return;
        };
        let mut keep = Vec::with_capacity(payloads.len());
        for payload in payloads {
            let Some(track) = self.tracks.get(&payload) else {
                continue;
            };
            if !track.branch.contains(&color) {
                continue;
            }
            let issuer = track.issuer;
            if self.nodes[issuer.index()]
                .tracker
                .payload_confirmed_at(payload)
                .is_some()
            {
                self.tracks.remove(&payload);
                continue;
            }
            keep.push(payload);
            let orphaned = self.is_orphaned(&track.branch);
            let track = self.tracks.get_mut(&payload).unwrap();
            match (orphaned, track.orphaned_since) {
                (true, None) => {
                    track.orphaned_since = Some(now);
                    self.queue.schedule(
                        now + self.config.reattach_interval,
                        EventKind::ReattachCheck { payload },
                    );
                }
                (false, Some(_)) => track.orphaned_since = None,
                _ => {}
            }
        }
        self.tracks_by_color.insert(color, keep);
    }

    fn track_payload(&mut self, issuer: NodeId, block: &Block, now: SimTime) {
        if block.payload == block.id {
            self.honest_payloads.push((block.id, block.issued_at));
        }
        let branch = self.nodes[issuer.index()]
            .tangle
            .branch(block.id)
            .expect("published block is solid")
            .clone();
        if branch.is_empty() {
            self.tracks.remove(&block.payload);
            return;
        }
        for &color in branch.iter() {
            self.tracks_by_color
                .entry(color)
                .or_default()
                .push(block.payload);
        }
        let orphaned = self.is_orphaned(&branch);
        self.tracks.insert(
            block.payload,
            PayloadTrack {
                issuer,
                carrier: block.id,
                branch,
                orphaned_since: orphaned.then_some(now),
            },
        );
        if orphaned {
            self.queue.schedule(
                now + self.config.reattach_interval,
                EventKind::ReattachCheck {
                    payload: block.payload,
                },
            );
        }
    }

    fn on_reattach_check(&mut self, payload: BlockId, now: SimTime) {
        let Some(track) = self.tracks.get(&payload) else {
            return;
        };
        let Some(since) = track.orphaned_since else {
            return;
        };
        if now - since < self.config.reattach_interval {
            return;
        }
        let issuer = track.issuer;
        debug_assert_ne!(track.carrier, BlockId::GENESIS);
        if self.nodes[issuer.index()]
            .tracker
            .payload_confirmed_at(payload)
            .is_some()
        {
            self.tracks.remove(&payload);
            return;
        }
        let id = self.next_block_id();
        let parents = select_parents(
            &self.nodes[issuer.index()].eligible_tips(&self.registry),
            self.config.n_p,
            &mut self.tip_rng,
        );
        let block = Arc::new(Block::with_payload(id, issuer, now, parents, None, payload));
        self.reattachments += 1;
        self.publish(block, now);
    }

    fn on_attack_start(&mut self, now: SimTime) {
        let Some(adv) = self.adversary.as_ref() else {
            return;
        };
        let attacker = adv.node;
        let set = self.registry.next_set_id();
        // the double spend: each half of the attacker's peers gets one side first
        for part in 0..2 {
            self.issue_bait(attacker, set, now, Some((part, 2)));
        }
        self.conflict_start = Some(now);
        self.adversary.as_mut().unwrap().set = Some(set);
        self.queue
            .schedule(now + self.config.d_min.max(1), EventKind::AdversaryCheck);
        if self.config.srrs_enabled {
            self.queue.schedule(
                now + self.config.d_start,
                EventKind::EpochBoundary { set, epoch: 0 },
            );
        }
    }

    /// Issues a new color of `set` on tips outside the conflict and moves the
    /// attacker's preference to it.
    fn issue_bait(
        &mut self,
        attacker: NodeId,
        set: ConflictSetId,
        now: SimTime,
        share: Option<(usize, usize)>,
    ) {
        let color = self.registry.next_color_id();
        let id = self.next_block_id();
        let tips = self.nodes[attacker.index()].neutral_tips(set, &self.registry);
        let parents = select_parents(&tips, self.config.n_p, &mut self.tip_rng);
        let block = Arc::new(Block::new(id, attacker, now, parents, Some(color)));
        self.registry.register_color(color, set, id, now);
        if let Some(adv) = self.adversary.as_mut() {
            adv.colors.push(color);
        }
        self.publish_share(block, now, share);
        self.nodes[attacker.index()]
            .opinions
            .set_preferred(set, color);
    }

    fn on_adversary_check(&mut self, now: SimTime) {
        let Some(adv) = self.adversary.as_ref() else {
            return;
        };
        if !adv.active() {
            return;
        }
        let attacker = adv.node;
        let set = adv.set.expect("active attack has a set");
        let leader = adv.honest_leader(&self.nodes[attacker.index()], &self.weight_vec);
        if adv.should_bait(leader) {
            self.issue_bait(attacker, set, now, None);
        }
        if self.adversary.as_ref().is_some_and(BaitAndSwitch::active) {
            self.queue
                .schedule(now + self.config.d_min.max(1), EventKind::AdversaryCheck);
        }
    }

    fn on_epoch(&mut self, set: ConflictSetId, epoch: u64, now: SimTime) {
        let coin = self.coin.draw(epoch);
        let mut pending = false;
        for i in 0..self.nodes.len() {
            let n = &self.nodes[i];
            if !n.honest || n.opinions.confirmed(set).is_some() {
                continue;
            }
            pending = true;
            if !n.opinions.knows(set) {
                continue;
            }
            let current = n.opinions.preferred(set);
            let vote = srrs_vote(
                n.opinions.members(set),
                |c| n.tracker.approval_weight(c),
                coin,
                self.config.c,
            );
            if let Some(color) = vote {
                let node = NodeId::from_index(i);
                if self.nodes[i].opinions.set_preferred(set, color) {
                    self.note_opinion(node, set, current, color, now);
                }
            }
        }
        if pending {
            self.queue.schedule(
                now + self.config.epoch,
                EventKind::EpochBoundary {
                    set,
                    epoch: epoch + 1,
                },
            );
        }
    }

    /// Gathers the run's measurements.
    pub fn finish(self) -> RunResult {
        let end = self.queue.now();
        let honest: Vec<NodeId> = self.weights.honest_nodes().collect();
        let mut consensus = None;
        let mut liveness_failure = false;
        if let Some(start) = self.conflict_start {
            for set in self.registry.sets() {
                match consensus_time(&self.opinion_log, &honest, set.id, start) {
                    Some(t) => consensus = Some(consensus.map_or(t, |c: u64| c.max(t))),
                    None => liveness_failure = true,
                }
            }
            if liveness_failure {
                consensus = None;
            }
        }
        let mut confirmations = Vec::new();
        for &node in &honest {
            let tracker = &self.nodes[node.index()].tracker;
            confirmations.push(ConfirmationRecord {
                node,
                block: BlockId::GENESIS,
                issued_at: SimTime::ZERO,
                confirmed_at: tracker.payload_confirmed_at(BlockId::GENESIS),
            });
            for &(payload, issued_at) in &self.honest_payloads {
                if tracker.payload_weight(payload) > S::zero() {
                    confirmations.push(ConfirmationRecord {
                        node,
                        block: payload,
                        issued_at,
                        confirmed_at: tracker.payload_confirmed_at(payload),
                    });
                }
            }
        }
        RunResult {
            seed: self.config.seed,
            conflict_start: self.conflict_start,
            consensus_time: consensus,
            liveness_failure,
            safety_failure: self.safety_failure,
            confirmations,
            orphan_reattach_count: self.reattachments,
            colors_issued: self.registry.color_count(),
            blocks_issued: self.blocks.len() - 1,
            end_time: end,
            events_processed: self.events,
            trace_hash: self.trace.finish(),
            opinion_log: self.opinion_log,
            config: self.config,
        }
    }
}

/// Runs one simulation with `f64` weights.
pub fn run(config: &SimConfig, seed: u64) -> Result<RunResult, SimError> {
    Ok(Simulator::<f64>::new(config.clone(), seed)?.run())
}
