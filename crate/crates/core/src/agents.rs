//! Node agents: local state, honest issuance rules and the Bait-and-Switch
//! adversary's decision logic. The engine owns scheduling and transport;
//! everything here is plain state plus pure decisions.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::consensus::ApprovalTracker;
use crate::engine::rng::RngStream;
use crate::engine::SimTime;
use crate::ids::{BlockId, ColorId, ConflictSetId, NodeId};
use crate::ledger::{ColorRegistry, OpinionState};
use crate::scalar::Scalar;
use crate::tangle::{Block, LocalTangle};

#[derive(Clone, Debug)]
pub struct Node<S> {
    pub id: NodeId,
    pub honest: bool,
    pub tangle: LocalTangle,
    pub opinions: OpinionState,
    pub tracker: ApprovalTracker<S>,
    /// Missing blocks with an outstanding solidification loop.
    pub requested: HashSet<BlockId>,
}

impl<S: Scalar> Node<S> {
    pub fn new(id: NodeId, honest: bool, node_count: usize, theta: S) -> Self {
        Self {
            id,
            honest,
            tangle: LocalTangle::new(),
            opinions: OpinionState::new(),
            tracker: ApprovalTracker::new(node_count, theta).saturating(),
            requested: HashSet::new(),
        }
    }

    /// Tips this node may reference under its current opinions.
    pub fn eligible_tips(&self, registry: &ColorRegistry) -> Vec<BlockId> {
        self.tangle.eligible_tips(&self.opinions, registry)
    }

    /// Tips outside conflict `set` entirely.
    pub fn neutral_tips(&self, set: ConflictSetId, registry: &ColorRegistry) -> Vec<BlockId> {
        let view = self.opinions.without_preference(set);
        self.tangle.eligible_tips(&view, registry)
    }
}

/// Gap to the next issuance for a Poisson process of `rate_per_sec`, in
/// whole milliseconds and never below one.
pub fn issuance_delay(rate_per_sec: f64, rng: &mut RngStream) -> u64 {
    let exp = Exp::new(rate_per_sec / 1000.0).expect("positive issuance rate");
    let ms: f64 = exp.sample(rng);
    (ms.round() as u64).max(1)
}

/// `n_p` parents drawn uniformly with replacement.
pub fn select_parents(eligible: &[BlockId], n_p: usize, rng: &mut RngStream) -> Vec<BlockId> {
    assert!(!eligible.is_empty(), "no referencable block");
    (0..n_p)
        .map(|_| eligible[rng.random_range(0..eligible.len())])
        .collect()
}

/// Builds the next block of `node` on its eligible tips.
pub fn honest_issue<S: Scalar>(
    node: &Node<S>,
    id: BlockId,
    now: SimTime,
    n_p: usize,
    registry: &ColorRegistry,
    rng: &mut RngStream,
) -> Arc<Block> {
    let parents = select_parents(&node.eligible_tips(registry), n_p, rng);
    Arc::new(Block::new(id, node.id, now, parents, None))
}

/// State of the Bait-and-Switch attacker.
///
/// The attack opens with two conflicting colors. Whenever some color backed
/// by honest weight reaches `trigger * q` in the attacker's own view, it
/// issues a fresh conflicting color and moves its whole weight there. It
/// stops once any member of the set is confirmed in its view.
#[derive(Clone, Debug)]
pub struct BaitAndSwitch {
    pub node: NodeId,
    pub q: f64,
    pub trigger: f64,
    pub set: Option<ConflictSetId>,
    pub colors: Vec<ColorId>,
    pub finished: bool,
}

impl BaitAndSwitch {
    pub fn new(node: NodeId, q: f64, trigger: f64) -> Self {
        Self {
            node,
            q,
            trigger,
            set: None,
            colors: Vec::new(),
            finished: false,
        }
    }

    pub fn active(&self) -> bool {
        self.set.is_some() && !self.finished
    }

    pub fn newest(&self) -> Option<ColorId> {
        self.colors.last().copied()
    }

    /// Largest weight any color receives from voters other than the attacker.
    pub fn honest_leader<S: Scalar>(&self, node: &Node<S>, weights: &[S]) -> S {
        let Some(set) = self.set else {
            return S::zero();
        };
        let own = node.tracker.vote_of(set, self.node).map(|v| v.color);
        let mut best = S::zero();
        for &color in node.opinions.members(set) {
            let mut w = node.tracker.approval_weight(color);
            if own == Some(color) {
                w -= weights[self.node.index()];
            }
            if w > best {
                best = w;
            }
        }
        best
    }

    /// Whether the attacker should issue another bait given the honest leader weight.
    pub fn should_bait<S: Scalar>(&self, honest_leader: S) -> bool {
        self.active() && honest_leader >= S::from_real(self.trigger * self.q)
    }
}
