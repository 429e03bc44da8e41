//! Per-node block DAG: storage, solidity, tips and cone traversal.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::engine::SimTime;
use crate::ids::{BlockId, ColorId, NodeId};
use crate::ledger::{ColorRegistry, OpinionState};

/// Sorted colors found in a block's past cone (the block itself included).
pub type Branch = Arc<[ColorId]>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub id: BlockId,
    /// `None` only for genesis.
    pub issuer: Option<NodeId>,
    pub issued_at: SimTime,
    /// Parent references as drawn, duplicates included.
    pub parents: Vec<BlockId>,
    pub color: Option<ColorId>,
    /// The transaction this block carries: its own id, or the id of the
    /// first carrier when the payload was reattached.
    pub payload: BlockId,
    edges: Box<[BlockId]>,
}

impl Block {
    pub fn new(
        id: BlockId,
        issuer: NodeId,
        issued_at: SimTime,
        parents: Vec<BlockId>,
        color: Option<ColorId>,
    ) -> Self {
        Self::with_payload(id, issuer, issued_at, parents, color, id)
    }

    pub fn with_payload(
        id: BlockId,
        issuer: NodeId,
        issued_at: SimTime,
        parents: Vec<BlockId>,
        color: Option<ColorId>,
        payload: BlockId,
    ) -> Self {
        assert!(!parents.is_empty(), "only genesis may lack parents");
        debug_assert!(parents.iter().all(|&p| p < id), "parents must precede {id}");
        let mut edges = parents.clone();
        edges.sort_unstable();
        edges.dedup();
        Self {
            id,
            issuer: Some(issuer),
            issued_at,
            parents,
            color,
            payload,
            edges: edges.into_boxed_slice(),
        }
    }

    pub fn genesis() -> Self {
        Self {
            id: BlockId::GENESIS,
            issuer: None,
            issued_at: SimTime::ZERO,
            parents: Vec::new(),
            color: None,
            payload: BlockId::GENESIS,
            edges: Box::new([]),
        }
    }

    pub fn is_genesis(&self) -> bool {
        self.id == BlockId::GENESIS
    }

    /// Distinct parents in ascending id order.
    pub fn parent_set(&self) -> &[BlockId] {
        &self.edges
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TangleError {
    #[error("block {0} is not in the local tangle")]
    Unknown(BlockId),
    #[error("block {0} is not solid yet")]
    NotSolid(BlockId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttachOutcome {
    /// The block was already present.
    Duplicate,
    /// Stored, waiting on ancestors. `missing` lists parents that are absent
    /// altogether (parents that are present but pending are not repeated).
    Pending { missing: Vec<BlockId> },
    /// The block and every pending descendant it unblocked, in solidification order.
    Solid { solidified: Vec<BlockId> },
}

#[derive(Clone, Debug)]
struct Entry {
    block: Arc<Block>,
    /// Distinct parents that are not solid yet; zero means solid.
    unresolved: u32,
    children: Vec<BlockId>,
    branch: Option<Branch>,
}

impl Entry {
    fn is_solid(&self) -> bool {
        self.branch.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct LocalTangle {
    entries: Vec<Option<Entry>>,
    tips: BTreeSet<BlockId>,
    waiting: HashMap<BlockId, Vec<BlockId>>,
    solid: usize,
    pending: usize,
    empty: Branch,
}

impl Default for LocalTangle {
    fn default() -> Self {
        Self::new()
    }
}

impl LocalTangle {
    /// A tangle holding only the (solid) genesis block.
    pub fn new() -> Self {
        let empty: Branch = Arc::from(Vec::new());
        let genesis = Entry {
            block: Arc::new(Block::genesis()),
            unresolved: 0,
            children: Vec::new(),
            branch: Some(empty.clone()),
        };
        Self {
            entries: vec![Some(genesis)],
            tips: BTreeSet::from([BlockId::GENESIS]),
            waiting: HashMap::new(),
            solid: 1,
            pending: 0,
            empty,
        }
    }

    fn entry(&self, id: BlockId) -> Option<&Entry> {
        self.entries.get(id.index()).and_then(Option::as_ref)
    }

    fn solid_entry(&self, id: BlockId) -> Result<&Entry, TangleError> {
        let e = self.entry(id).ok_or(TangleError::Unknown(id))?;
        if e.is_solid() {
            Ok(e)
        } else {
            Err(TangleError::NotSolid(id))
        }
    }

    pub fn contains(&self, id: BlockId) -> bool {
        self.entry(id).is_some()
    }

    pub fn is_solid(&self, id: BlockId) -> bool {
        self.entry(id).is_some_and(Entry::is_solid)
    }

    pub fn block(&self, id: BlockId) -> Option<&Arc<Block>> {
        self.entry(id).map(|e| &e.block)
    }

    /// Colors in the past cone of a solid block.
    pub fn branch(&self, id: BlockId) -> Option<&Branch> {
        self.entry(id).and_then(|e| e.branch.as_ref())
    }

    pub fn tips(&self) -> &BTreeSet<BlockId> {
        &self.tips
    }

    pub fn solid_count(&self) -> usize {
        self.solid
    }

    pub fn pending_count(&self) -> usize {
        self.pending
    }

    /// Solid children of a solid block.
    pub fn children(&self, id: BlockId) -> &[BlockId] {
        self.entry(id).map_or(&[], |e| e.children.as_slice())
    }

    /// Solid block ids, ascending.
    pub fn solid_ids(&self) -> impl DoubleEndedIterator<Item = BlockId> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.as_ref().is_some_and(Entry::is_solid))
            .map(|(i, _)| BlockId::from_index(i))
    }

    pub fn attach(&mut self, block: Arc<Block>) -> AttachOutcome {
        let id = block.id;
        if self.contains(id) {
            return AttachOutcome::Duplicate;
        }
        let mut unresolved = 0;
        let mut missing = Vec::new();
        for &parent in block.parent_set() {
            match self.entry(parent) {
                Some(e) if e.is_solid() => {}
                Some(_) => {
                    unresolved += 1;
                    self.waiting.entry(parent).or_default().push(id);
                }
                None => {
                    unresolved += 1;
                    missing.push(parent);
                    self.waiting.entry(parent).or_default().push(id);
                }
            }
        }
        if self.entries.len() <= id.index() {
            self.entries.resize(id.index() + 1, None);
        }
        self.entries[id.index()] = Some(Entry {
            block,
            unresolved,
            children: Vec::new(),
            branch: None,
        });
        if unresolved > 0 {
            self.pending += 1;
            return AttachOutcome::Pending { missing };
        }

        let mut solidified = Vec::new();
        let mut ready = vec![id];
        while let Some(next) = ready.pop() {
            self.solidify(next);
            solidified.push(next);
            if let Some(waiters) = self.waiting.remove(&next) {
                for child in waiters {
                    let e = self.entries[child.index()].as_mut().expect("waiter stored");
                    e.unresolved -= 1;
                    if e.unresolved == 0 {
                        self.pending -= 1;
                        ready.push(child);
                    }
                }
            }
        }
        AttachOutcome::Solid { solidified }
    }

    fn solidify(&mut self, id: BlockId) {
        let block = self.entries[id.index()]
            .as_ref()
            .expect("stored")
            .block
            .clone();
        let branch = self.merge_branches(&block);
        for &parent in block.parent_set() {
            let p = self.entries[parent.index()].as_mut().expect("solid parent");
            p.children.push(id);
            self.tips.remove(&parent);
        }
        self.entries[id.index()].as_mut().expect("stored").branch = Some(branch);
        self.tips.insert(id);
        self.solid += 1;
    }

    fn merge_branches(&self, block: &Block) -> Branch {
        let parent_branch = |p: &BlockId| {
            self.entries[p.index()]
                .as_ref()
                .and_then(|e| e.branch.clone())
        };
        let mut parents = block.parent_set().iter().filter_map(parent_branch);
        let first = parents.next().unwrap_or_else(|| self.empty.clone());
        let mut merged: Option<Vec<ColorId>> = None;
        for other in parents {
            if Arc::ptr_eq(&other, &first) || *other == *first {
                continue;
            }
            merged
                .get_or_insert_with(|| first.to_vec())
                .extend_from_slice(&other);
        }
        if let Some(color) = block.color {
            merged.get_or_insert_with(|| first.to_vec()).push(color);
        }
        match merged {
            None => first,
            Some(mut colors) => {
                colors.sort_unstable();
                colors.dedup();
                Arc::from(colors)
            }
        }
    }

    /// Every block referenced directly or indirectly by `id`, including itself.
    pub fn past_cone(&self, id: BlockId) -> Result<BTreeSet<BlockId>, TangleError> {
        self.solid_entry(id)?;
        let mut cone = BTreeSet::from([id]);
        let mut stack = vec![id];
        while let Some(next) = stack.pop() {
            for &parent in self.entries[next.index()]
                .as_ref()
                .unwrap()
                .block
                .parent_set()
            {
                if cone.insert(parent) {
                    stack.push(parent);
                }
            }
        }
        Ok(cone)
    }

    /// Every solid block referencing `id` directly or indirectly, including itself.
    pub fn future_cone(&self, id: BlockId) -> Result<BTreeSet<BlockId>, TangleError> {
        self.solid_entry(id)?;
        let mut cone = BTreeSet::from([id]);
        let mut stack = vec![id];
        while let Some(next) = stack.pop() {
            for &child in &self.entries[next.index()].as_ref().unwrap().children {
                if cone.insert(child) {
                    stack.push(child);
                }
            }
        }
        Ok(cone)
    }

    /// Tips whose branch `accept` admits. If none qualify, falls back to the
    /// most recent solid block that does (genesis at worst), so the result is
    /// never empty when `accept` admits the empty branch.
    pub fn eligible_tips_by(&self, accept: impl Fn(&[ColorId]) -> bool) -> Vec<BlockId> {
        let tips: Vec<BlockId> = self
            .tips
            .iter()
            .copied()
            .filter(|&t| accept(self.branch(t).expect("tips are solid")))
            .collect();
        if !tips.is_empty() {
            return tips;
        }
        self.solid_ids()
            .rev()
            .find(|&id| accept(self.branch(id).expect("solid")))
            .into_iter()
            .collect()
    }

    /// Tips that do not conflict with `opinions`.
    pub fn eligible_tips(&self, opinions: &OpinionState, registry: &ColorRegistry) -> Vec<BlockId> {
        self.eligible_tips_by(|branch| opinions.admits(branch, registry))
    }

    /// Writes one line per solid block: `id issuer issued_ms parents color`.
    pub fn dump(&self, mut out: impl Write) -> io::Result<()> {
        for id in self.solid_ids() {
            let block = &self.entries[id.index()].as_ref().unwrap().block;
            let issuer = block.issuer.map_or("-".to_string(), |n| n.0.to_string());
            let parents: Vec<String> = block.parents.iter().map(|p| p.0.to_string()).collect();
            let color = block.color.map_or("-".to_string(), |c| c.0.to_string());
            writeln!(
                out,
                "{} {} {} {} {}",
                id.0,
                issuer,
                block.issued_at.as_millis(),
                if parents.is_empty() {
                    "-".into()
                } else {
                    parents.join(",")
                },
                color
            )?;
        }
        Ok(())
    }
}
