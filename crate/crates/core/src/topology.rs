//! Peer graph construction and the lossy, delayed link model.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use thiserror::Error;

use crate::engine::rng::RngStream;
use crate::engine::SimTime;
use crate::ids::NodeId;

/// Attempts before giving up on drawing a connected graph.
pub const MAX_GRAPH_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("k = {k} must be even and in [2, {n})")]
    BadDegree { n: usize, k: usize },
    #[error("no connected graph after {0} attempts")]
    Disconnected(usize),
}

/// Undirected simple graph over node ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeerGraph {
    adjacency: Vec<Vec<NodeId>>,
}

impl PeerGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut sets = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            assert_ne!(a, b, "self-loop {a}");
            sets[a].insert(NodeId::from_index(b));
            sets[b].insert(NodeId::from_index(a));
        }
        Self {
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.index()]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.index()].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    /// Hop distances from `from`; `None` for unreachable nodes.
    pub fn distances(&self, from: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[from.index()] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()].unwrap();
            for &v in self.neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() == 0 || self.distances(NodeId(0)).iter().all(Option::is_some)
    }

    /// Longest shortest path, or `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for u in 0..self.node_count() {
            for d in self.distances(NodeId::from_index(u)) {
                best = best.max(d?);
            }
        }
        Some(best)
    }
}

/// Watts–Strogatz small world: a ring lattice joining every node to its
/// `k / 2` nearest neighbors on each side, then each lattice edge `(u, v)`
/// is rewired with probability `gamma` to `(u, w)` for a uniformly chosen
/// `w` that is neither `u` nor already adjacent to `u`. Disconnected draws
/// are discarded and redrawn from the same stream.
pub fn build_graph(
    n: usize,
    k: usize,
    gamma: f64,
    rng: &mut RngStream,
) -> Result<PeerGraph, TopologyError> {
    if !k.is_multiple_of(2) || k < 2 || k >= n {
        return Err(TopologyError::BadDegree { n, k });
    }
    for _ in 0..MAX_GRAPH_ATTEMPTS {
        let graph = watts_strogatz(n, k, gamma, rng);
        if graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(TopologyError::Disconnected(MAX_GRAPH_ATTEMPTS))
}

fn watts_strogatz(n: usize, k: usize, gamma: f64, rng: &mut RngStream) -> PeerGraph {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || !rng.random_bool(gamma) {
                continue;
            }
            // a node adjacent to everyone else has nowhere to rewire to
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    PeerGraph {
        adjacency: adj
            .into_iter()
            .map(|s| s.into_iter().map(NodeId::from_index).collect())
            .collect(),
    }
}

/// One hop of the channel model: independent loss with probability `loss`,
/// otherwise uniform integer delay in `[d_min, d_max]` milliseconds.
#[derive(Clone, Debug)]
pub struct Transport {
    d_min: u64,
    d_max: u64,
    loss: f64,
    delay_rng: RngStream,
    loss_rng: RngStream,
    sent: u64,
    dropped: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub from: NodeId,
    pub to: NodeId,
    pub depart: SimTime,
    pub arrive: SimTime,
    pub dropped: bool,
}

impl Transport {
    pub fn new(
        d_min: u64,
        d_max: u64,
        loss: f64,
        delay_rng: RngStream,
        loss_rng: RngStream,
    ) -> Self {
        assert!(d_min <= d_max);
        Self {
            d_min,
            d_max,
            loss,
            delay_rng,
            loss_rng,
            sent: 0,
            dropped: 0,
        }
    }

    pub fn send(&mut self, from: NodeId, to: NodeId, now: SimTime) -> Transmission {
        self.sent += 1;
        let dropped = self.loss > 0.0 && self.loss_rng.random_bool(self.loss);
        if dropped {
            self.dropped += 1;
        }
        let delay = if self.d_min == self.d_max {
            self.d_min
        } else {
            self.delay_rng.random_range(self.d_min..=self.d_max)
        };
        Transmission {
            from,
            to,
            depart: now,
            arrive: now + delay,
            dropped,
        }
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}
