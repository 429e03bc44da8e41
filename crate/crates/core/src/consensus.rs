//! Approval-weight accounting, heaviest-branch opinions and confirmation.
//!
//! Two kinds of weight are tracked per node:
//!
//! * Block approval: the distinct issuers with a block in a block's future
//!   cone. Kept as one bitset per block, filled by walking the past cone of
//!   every newly solid block until the issuer's bit is already set (an issuer
//!   supporting a block supports its whole past cone, so the walk can stop
//!   there). Payload approval is the union over all blocks carrying the payload.
//! * Color votes: within a conflict set, each issuer counts only for the color
//!   on its latest block (issuance time, then block id) that sits in some
//!   member's future cone.

use crate::engine::SimTime;
use crate::ids::{BlockId, ColorId, ConflictSetId, NodeId};
use crate::ledger::ColorRegistry;
use crate::scalar::Scalar;
use crate::tangle::{Block, LocalTangle};

const WORD: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vote {
    pub issued_at: SimTime,
    pub block: BlockId,
    pub color: ColorId,
}

impl Vote {
    fn stamp(&self) -> (SimTime, BlockId) {
        (self.issued_at, self.block)
    }
}

/// A change in which color an issuer's weight backs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VoteChange {
    pub set: ConflictSetId,
    pub voter: NodeId,
    pub from: Option<ColorId>,
    pub to: ColorId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Support {
    /// Payloads whose approval weight reached the threshold for the first time.
    pub confirmed_payloads: Vec<BlockId>,
    pub vote_changes: Vec<VoteChange>,
}

#[derive(Clone, Debug)]
pub struct ApprovalTracker<S> {
    words: usize,
    theta: S,
    block_bits: Vec<u64>,
    block_weight: Vec<S>,
    payload_bits: Vec<u64>,
    payload_weight: Vec<S>,
    payload_confirmed: Vec<Option<SimTime>>,
    /// Per conflict set, latest vote per voter.
    votes: Vec<Vec<Option<Vote>>>,
    color_weight: Vec<S>,
    color_confirmed: Vec<Option<SimTime>>,
    stack: Vec<BlockId>,
    saturate: bool,
}

impl<S: Scalar> ApprovalTracker<S> {
    /// Tracker for `node_count` issuers. Genesis counts as confirmed at time zero.
    pub fn new(node_count: usize, theta: S) -> Self {
        let words = node_count.div_ceil(WORD).max(1);
        let mut tracker = Self {
            words,
            theta,
            block_bits: Vec::new(),
            block_weight: Vec::new(),
            payload_bits: Vec::new(),
            payload_weight: Vec::new(),
            payload_confirmed: Vec::new(),
            votes: Vec::new(),
            color_weight: Vec::new(),
            color_confirmed: Vec::new(),
            stack: Vec::new(),
            saturate: false,
        };
        tracker.ensure_block(BlockId::GENESIS);
        tracker.payload_confirmed[0] = Some(SimTime::ZERO);
        tracker
    }

    /// Stops approval walks at blocks already at the threshold. Their past
    /// cones are at the threshold as well, so every confirmation time is
    /// unchanged; only weights above the threshold stop being exact.
    pub fn saturating(mut self) -> Self {
        self.saturate = true;
        self
    }

    pub fn theta(&self) -> S {
        self.theta
    }

    fn ensure_block(&mut self, id: BlockId) {
        let len = id.index() + 1;
        if self.block_weight.len() < len {
            let grow = (len * 3 / 2).max(64);
            self.block_bits.resize(grow * self.words, 0);
            self.block_weight.resize(grow, S::zero());
            self.payload_bits.resize(grow * self.words, 0);
            self.payload_weight.resize(grow, S::zero());
            self.payload_confirmed.resize(grow, None);
        }
    }

    fn ensure_color(&mut self, color: ColorId) {
        if self.color_weight.len() <= color.index() {
            self.color_weight.resize(color.index() + 1, S::zero());
            self.color_confirmed.resize(color.index() + 1, None);
        }
    }

    /// Sets bit `node` of row `row`; returns whether it was newly set.
    fn set_bit(bits: &mut [u64], words: usize, row: usize, node: NodeId) -> bool {
        let slot = &mut bits[row * words + node.index() / WORD];
        let mask = 1u64 << (node.index() % WORD);
        let fresh = *slot & mask == 0;
        *slot |= mask;
        fresh
    }

    /// Accounts for a block that just became solid locally: its issuer now
    /// approves the block's past cone, and its vote moves to the colors on
    /// its branch if the block is newer than the issuer's previous vote.
    pub fn record_support(
        &mut self,
        tangle: &LocalTangle,
        block: &Block,
        weights: &[S],
        registry: &ColorRegistry,
        now: SimTime,
    ) -> Support {
        let mut support = Support::default();
        let Some(issuer) = block.issuer else {
            return support;
        };
        self.record_approval(
            tangle,
            block.id,
            issuer,
            weights[issuer.index()],
            now,
            &mut support,
        );
        if let Some(branch) = tangle.branch(block.id) {
            for &color in branch.iter() {
                if let Some(change) = self.record_vote(registry, block, issuer, color, weights) {
                    support.vote_changes.push(change);
                }
            }
        }
        support
    }

    fn record_approval(
        &mut self,
        tangle: &LocalTangle,
        start: BlockId,
        issuer: NodeId,
        weight: S,
        now: SimTime,
        support: &mut Support,
    ) {
        let mut stack = std::mem::take(&mut self.stack);
        self.ensure_block(start);
        if Self::set_bit(&mut self.block_bits, self.words, start.index(), issuer) {
            stack.push(start);
        }
        while let Some(id) = stack.pop() {
            self.block_weight[id.index()] += weight;
            let block = tangle
                .block(id)
                .expect("past cone of a solid block is present");
            let payload = block.payload;
            self.ensure_block(payload);
            if Self::set_bit(&mut self.payload_bits, self.words, payload.index(), issuer) {
                self.payload_weight[payload.index()] += weight;
                if self.payload_confirmed[payload.index()].is_none()
                    && self.payload_weight[payload.index()] >= self.theta
                {
                    self.payload_confirmed[payload.index()] = Some(now);
                    support.confirmed_payloads.push(payload);
                }
            }
            for &parent in block.parent_set() {
                if self.saturate && self.block_weight[parent.index()] >= self.theta {
                    continue;
                }
                if Self::set_bit(&mut self.block_bits, self.words, parent.index(), issuer) {
                    stack.push(parent);
                }
            }
        }
        self.stack = stack;
    }

    fn record_vote(
        &mut self,
        registry: &ColorRegistry,
        block: &Block,
        issuer: NodeId,
        color: ColorId,
        weights: &[S],
    ) -> Option<VoteChange> {
        let set = registry.set_of(color)?;
        if self.votes.len() <= set.index() {
            self.votes.resize(set.index() + 1, Vec::new());
        }
        let ballots = &mut self.votes[set.index()];
        if ballots.len() < weights.len() {
            ballots.resize(weights.len(), None);
        }
        let vote = Vote {
            issued_at: block.issued_at,
            block: block.id,
            color,
        };
        let previous = ballots[issuer.index()];
        if previous.is_some_and(|p| p.stamp() >= vote.stamp()) {
            return None;
        }
        ballots[issuer.index()] = Some(vote);
        let from = previous.map(|p| p.color);
        if from == Some(color) {
            return None;
        }
        let weight = weights[issuer.index()];
        if let Some(old) = from {
            self.ensure_color(old);
            self.color_weight[old.index()] -= weight;
        }
        self.ensure_color(color);
        self.color_weight[color.index()] += weight;
        Some(VoteChange {
            set,
            voter: issuer,
            from,
            to: color,
        })
    }

    /// Weight of the issuers whose latest vote in the color's set is `color`.
    pub fn approval_weight(&self, color: ColorId) -> S {
        self.color_weight
            .get(color.index())
            .copied()
            .unwrap_or_else(S::zero)
    }

    /// Distinct-issuer weight in the future cone of a single block.
    pub fn block_weight(&self, block: BlockId) -> S {
        self.block_weight
            .get(block.index())
            .copied()
            .unwrap_or_else(S::zero)
    }

    /// Distinct-issuer weight over all carriers of a payload.
    pub fn payload_weight(&self, payload: BlockId) -> S {
        self.payload_weight
            .get(payload.index())
            .copied()
            .unwrap_or_else(S::zero)
    }

    pub fn payload_confirmed_at(&self, payload: BlockId) -> Option<SimTime> {
        self.payload_confirmed
            .get(payload.index())
            .copied()
            .flatten()
    }

    pub fn supports_block(&self, block: BlockId, node: NodeId) -> bool {
        block.index() < self.block_weight.len()
            && self.block_bits[block.index() * self.words + node.index() / WORD]
                & (1u64 << (node.index() % WORD))
                != 0
    }

    pub fn vote_of(&self, set: ConflictSetId, voter: NodeId) -> Option<Vote> {
        self.votes
            .get(set.index())
            .and_then(|b| b.get(voter.index()))
            .copied()
            .flatten()
    }

    /// Weight `voter` contributes across the colors of `set` (zero or its full weight).
    pub fn contributed(&self, set: ConflictSetId, voter: NodeId, weights: &[S]) -> S {
        self.vote_of(set, voter)
            .map_or_else(S::zero, |_| weights[voter.index()])
    }

    /// Records confirmation the first time `color` reaches the threshold.
    /// Returns `true` only on that first crossing.
    pub fn check_color_confirmation(&mut self, color: ColorId, now: SimTime) -> bool {
        self.ensure_color(color);
        if self.color_confirmed[color.index()].is_some() {
            return false;
        }
        if self.color_weight[color.index()] >= self.theta {
            self.color_confirmed[color.index()] = Some(now);
            true
        } else {
            false
        }
    }

    pub fn color_confirmed_at(&self, color: ColorId) -> Option<SimTime> {
        self.color_confirmed.get(color.index()).copied().flatten()
    }
}

/// Heaviest member of a conflict set.
///
/// Exact ties keep `current` when it is among the heaviest, otherwise pick
/// the lowest color id, so the result does not depend on member order.
pub fn heaviest<S: Scalar>(
    members: &[ColorId],
    current: Option<ColorId>,
    weight: impl Fn(ColorId) -> S,
) -> Option<ColorId> {
    let mut best: Option<(S, ColorId)> = None;
    for &color in members {
        let w = weight(color);
        best = match best {
            None => Some((w, color)),
            Some((bw, _)) if w > bw => Some((w, color)),
            Some((bw, bc)) if w == bw && color < bc => Some((bw, color)),
            keep => keep,
        };
    }
    let (top, lowest) = best?;
    match current {
        Some(c) if members.contains(&c) && weight(c) == top => Some(c),
        _ => Some(lowest),
    }
}
