//! Random DAG traces and brute-force reference computations.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tangle_sim::consensus::ApprovalTracker;
use tangle_sim::ledger::ColorRegistry;
use tangle_sim::tangle::{AttachOutcome, Block, LocalTangle};
use tangle_sim::{BlockId, ColorId, ConflictSetId, NodeId, SimTime};

pub const SETS: u32 = 2;
pub const COLORS_PER_SET: usize = 3;

/// A consistent random block DAG with colors and reattached payloads.
#[derive(Clone, Debug)]
pub struct Trace {
    /// Indexed by block id; entry 0 is genesis.
    pub blocks: Vec<Arc<Block>>,
    pub registry: ColorRegistry,
    pub weights: Vec<Rational64>,
}

/// Ancestor sets by plain closure over parent lists, each including the block.
pub fn ancestors(blocks: &[Arc<Block>]) -> Vec<BTreeSet<usize>> {
    let mut anc: Vec<BTreeSet<usize>> = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let mut set = BTreeSet::from([i]);
        for p in &b.parents {
            set.extend(anc[p.index()].iter().copied());
        }
        anc.push(set);
    }
    anc
}

pub fn brute_branch(blocks: &[Arc<Block>], anc: &BTreeSet<usize>) -> Vec<ColorId> {
    let mut colors: Vec<ColorId> = anc.iter().filter_map(|&a| blocks[a].color).collect();
    colors.sort();
    colors.dedup();
    colors
}

impl Trace {
    pub fn generate(seed: u64, len: usize, nodes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<i64> = (0..nodes).map(|_| rng.random_range(1..=20)).collect();
        let total: i64 = raw.iter().sum();
        let weights = raw.iter().map(|&w| Rational64::new(w, total)).collect();

        let mut blocks = vec![Arc::new(Block::genesis())];
        let mut branches: Vec<Vec<ColorId>> = vec![Vec::new()];
        let mut registry = ColorRegistry::new();
        let mut members: Vec<Vec<ColorId>> = vec![Vec::new(); SETS as usize];
        let mut time = 0u64;

        for i in 1..len {
            let id = BlockId::from_index(i);
            let issuer = NodeId::from_index(rng.random_range(0..nodes));
            time += rng.random_range(0..3);

            // the issuer's reality: at most one color per set
            let mut reality: Vec<Option<ColorId>> = members
                .iter()
                .map(|m| {
                    if m.is_empty() || rng.random_bool(0.2) {
                        None
                    } else {
                        Some(m[rng.random_range(0..m.len())])
                    }
                })
                .collect();
            let mut color = None;
            let set = rng.random_range(0..SETS) as usize;
            if rng.random_bool(0.08) && members[set].len() < COLORS_PER_SET {
                let c = registry.next_color_id();
                color = Some(c);
                reality[set] = Some(c);
            }
            let set_of = |c: &ColorId, registry: &ColorRegistry, pending: Option<ColorId>| {
                if Some(*c) == pending {
                    set
                } else {
                    registry.set_of(*c).unwrap().index()
                }
            };
            let candidates: Vec<usize> = (0..i)
                .filter(|&j| {
                    branches[j].iter().all(|c| {
                        let s = set_of(c, &registry, color);
                        reality[s] == Some(*c) && Some(*c) != color
                    })
                })
                .collect();
            let count = rng.random_range(1..=4);
            let parents: Vec<BlockId> = (0..count)
                .map(|_| BlockId::from_index(candidates[rng.random_range(0..candidates.len())]))
                .collect();

            let payload = if color.is_none() && i > 2 && rng.random_bool(0.1) {
                // reattach some earlier plain payload
                let j = rng.random_range(1..i);
                if blocks[j].color.is_none() {
                    blocks[j].payload
                } else {
                    id
                }
            } else {
                id
            };
            let block = Block::with_payload(id, issuer, SimTime(time), parents, color, payload);
            if let Some(c) = color {
                registry.register_color(c, ConflictSetId(set as u32), id, SimTime(time));
                members[set].push(c);
            }
            let mut branch: Vec<ColorId> = block
                .parent_set()
                .iter()
                .flat_map(|p| branches[p.index()].iter().copied())
                .chain(color)
                .collect();
            branch.sort();
            branch.dedup();
            branches.push(branch);
            blocks.push(Arc::new(block));
        }
        Trace {
            blocks,
            registry,
            weights,
        }
    }

    /// Non-genesis blocks in a random delivery order.
    pub fn shuffled_order(&self, seed: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (1..self.blocks.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        order
    }

    /// Delivers the blocks of `order` into a fresh tangle and tracker.
    pub fn replay(
        &self,
        order: &[usize],
        theta: Rational64,
        saturating: bool,
    ) -> (LocalTangle, ApprovalTracker<Rational64>) {
        let mut tangle = LocalTangle::new();
        let mut tracker = ApprovalTracker::new(self.weights.len(), theta);
        if saturating {
            tracker = tracker.saturating();
        }
        for (step, &i) in order.iter().enumerate() {
            if let AttachOutcome::Solid { solidified } = tangle.attach(self.blocks[i].clone()) {
                for id in solidified {
                    let block = tangle.block(id).unwrap().clone();
                    tracker.record_support(
                        &tangle,
                        &block,
                        &self.weights,
                        &self.registry,
                        SimTime(step as u64),
                    );
                }
            }
        }
        (tangle, tracker)
    }

    fn weight(&self, issuers: &BTreeSet<usize>) -> Rational64 {
        issuers.iter().map(|&n| self.weights[n]).sum()
    }

    /// Distinct-issuer weight over the future cone of each block, restricted
    /// to the blocks in `present`.
    pub fn brute_block_weights(&self, present: &BTreeSet<usize>) -> Vec<Rational64> {
        let anc = ancestors(&self.blocks);
        (0..self.blocks.len())
            .map(|x| {
                let issuers: BTreeSet<usize> = present
                    .iter()
                    .filter(|&&y| anc[y].contains(&x))
                    .filter_map(|&y| self.blocks[y].issuer.map(|n| n.index()))
                    .collect();
                self.weight(&issuers)
            })
            .collect()
    }

    /// Issuer weight over the future cones of every carrier of `payload`.
    pub fn brute_payload_weight(&self, present: &BTreeSet<usize>, payload: BlockId) -> Rational64 {
        let anc = ancestors(&self.blocks);
        let issuers: BTreeSet<usize> = present
            .iter()
            .filter(|&&y| {
                anc[y]
                    .iter()
                    .any(|&a| present.contains(&a) && self.blocks[a].payload == payload)
            })
            .filter_map(|&y| self.blocks[y].issuer.map(|n| n.index()))
            .collect();
        self.weight(&issuers)
    }

    /// Latest-vote color weights: each issuer backs the color of `set` on
    /// its newest block (time, then id) whose branch touches `set`.
    pub fn brute_color_weights(
        &self,
        present: &BTreeSet<usize>,
        set: ConflictSetId,
    ) -> Vec<(ColorId, Rational64)> {
        let anc = ancestors(&self.blocks);
        let members: Vec<ColorId> = self
            .registry
            .conflict_set(set)
            .map(|s| s.members.clone())
            .unwrap_or_default();
        let mut latest: Vec<Option<((SimTime, BlockId), ColorId)>> = vec![None; self.weights.len()];
        for &y in present {
            let Some(issuer) = self.blocks[y].issuer else {
                continue;
            };
            let branch = brute_branch(&self.blocks, &anc[y]);
            let Some(&color) = branch.iter().find(|c| members.contains(c)) else {
                continue;
            };
            let stamp = (self.blocks[y].issued_at, self.blocks[y].id);
            let slot = &mut latest[issuer.index()];
            if slot.is_none_or(|(s, _)| stamp > s) {
                *slot = Some((stamp, color));
            }
        }
        members
            .iter()
            .map(|&c| {
                let w = latest
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.is_some_and(|(_, vc)| vc == c))
                    .map(|(n, _)| self.weights[n])
                    .sum();
                (c, w)
            })
            .collect()
    }

    /// Blocks whose whole ancestry lies in `delivered` (genesis always present).
    pub fn brute_solid(&self, delivered: &BTreeSet<usize>) -> BTreeSet<usize> {
        let anc = ancestors(&self.blocks);
        delivered
            .iter()
            .copied()
            .chain([0])
            .filter(|&x| anc[x].iter().all(|a| *a == 0 || delivered.contains(a)))
            .collect()
    }
}
