//! Min-ordered event queue with a monotone sequence tiebreak.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SimTime;
use crate::ids::{BlockId, ConflictSetId, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// A block (gossip or request reply) arrives at `to`, sent by `from`.
    BlockDelivery {
        to: NodeId,
        from: NodeId,
        block: BlockId,
    },
    /// A solidification request for `block` arrives at `to`, sent by `from`.
    RequestDelivery {
        to: NodeId,
        from: NodeId,
        block: BlockId,
    },
    IssuanceTick {
        node: NodeId,
    },
    EpochBoundary {
        set: ConflictSetId,
        epoch: u64,
    },
    SolidRequestRetry {
        node: NodeId,
        block: BlockId,
    },
    AttackStart,
    AdversaryCheck,
    /// Re-check whether the payload first carried by `payload` is still orphaned.
    ReattachCheck {
        payload: BlockId,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub due: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        (other.due, other.seq).cmp(&(self.due, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
    now: SimTime,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Enqueues `kind` at `due` and returns its sequence number.
    ///
    /// Panics when `due` lies before the current clock.
    pub fn schedule(&mut self, due: SimTime, kind: EventKind) -> u64 {
        assert!(
            due >= self.now,
            "event {kind:?} scheduled at {due}, before current time {}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { due, seq, kind });
        seq
    }

    pub fn peek_due(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.due)
    }

    /// Pops the earliest event and advances the clock to its due time.
    pub fn pop(&mut self) -> Option<Event> {
        let event = self.heap.pop()?;
        debug_assert!(event.due >= self.now);
        self.now = event.due;
        Some(event)
    }
}
