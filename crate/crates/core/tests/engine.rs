use std::collections::HashMap;

use tangle_sim::metrics::{consensus_time, OpinionChange};
use tangle_sim::topology::PeerGraph;
use tangle_sim::{run, BlockId, ColorId, NodeId, Sim, SimConfig, SimTime};

fn small() -> SimConfig {
    SimConfig {
        n: 20,
        k: 4,
        t_max: 8_000,
        q: 0.0,
        ..SimConfig::default()
    }
}

fn attacked() -> SimConfig {
    SimConfig {
        q: 0.2,
        srrs_enabled: true,
        attack_start: 2_000,
        d_start: 2_000,
        epoch: 1_000,
        ..small()
    }
}

#[test]
fn same_seed_same_run() {
    let a = run(&attacked(), 9).unwrap();
    let b = run(&attacked(), 9).unwrap();
    assert_eq!(a.trace_hash, b.trace_hash);
    assert_eq!(a, b);
    let c = run(&attacked(), 10).unwrap();
    assert_ne!(a.trace_hash, c.trace_hash);
}

#[test]
fn no_conflict_means_nothing_to_resolve() {
    let r = run(&small(), 1).unwrap();
    assert_eq!(r.conflict_start, None);
    assert_eq!(r.consensus_time, None);
    assert!(!r.liveness_failure);
    assert!(!r.safety_failure);
    assert_eq!(r.colors_issued, 0);
}

#[test]
fn genesis_is_confirmed_at_zero_everywhere() {
    let r = run(&small(), 2).unwrap();
    let genesis: Vec<_> = r
        .confirmations
        .iter()
        .filter(|c| c.block == BlockId::GENESIS)
        .collect();
    assert_eq!(genesis.len(), 20);
    assert!(genesis
        .iter()
        .all(|c| c.confirmed_at == Some(SimTime::ZERO)));
    // the newest blocks cannot have gathered enough approval yet
    let late = r
        .confirmations
        .iter()
        .filter(|c| c.issued_at.as_millis() + 50 >= 8_000)
        .collect::<Vec<_>>();
    assert!(!late.is_empty());
    assert!(late.iter().all(|c| c.confirmed_at.is_none()));
}

#[test]
fn flooding_reaches_every_node() {
    let mut sim = Sim::new(small(), 3).unwrap();
    sim.start();
    while sim.step() {}
    let diameter = sim.graph().diameter().unwrap() as u64;
    let horizon = 8_000 - diameter * 100;
    let old: Vec<BlockId> = sim
        .blocks()
        .iter()
        .filter(|b| b.issued_at.as_millis() <= horizon)
        .map(|b| b.id)
        .collect();
    assert!(old.len() > 100);
    for node in sim.nodes() {
        for &b in &old {
            assert!(node.tangle.is_solid(b), "{} lacks {b}", node.id);
        }
    }
}

#[test]
fn line_of_three_adds_one_delay_per_hop() {
    let config = SimConfig {
        n: 3,
        k: 2,
        q: 0.0,
        s: 0.0,
        t_max: 2_000,
        ..SimConfig::default()
    };
    let graph = PeerGraph::from_edges(3, [(0, 1), (1, 2)]);
    let mut sim = Sim::with_graph(config, 4, graph).unwrap();
    sim.start();
    let mut arrival: HashMap<(usize, BlockId), SimTime> = HashMap::new();
    while sim.step() {
        let now = sim.now();
        for (i, node) in sim.nodes().iter().enumerate() {
            for b in sim.blocks() {
                if node.tangle.contains(b.id) {
                    arrival.entry((i, b.id)).or_insert(now);
                }
            }
        }
    }
    let mut checked = 0;
    for b in sim.blocks().iter().skip(1) {
        let from = b.issuer.unwrap().index();
        for to in 0..3 {
            if let Some(&t) = arrival.get(&(to, b.id)) {
                let hops = from.abs_diff(to) as u64;
                assert_eq!(t, b.issued_at + 100 * hops, "{} at node {to}", b.id);
                checked += 1;
            }
        }
    }
    assert!(checked > 150);
}

#[test]
fn total_loss_isolates_nodes() {
    let config = SimConfig {
        l: 1.0,
        t_max: 3_000,
        ..small()
    };
    let mut sim = Sim::new(config, 5).unwrap();
    sim.start();
    while sim.step() {}
    for node in sim.nodes() {
        for id in node.tangle.solid_ids().skip(1) {
            assert_eq!(sim.blocks()[id.index()].issuer, Some(node.id));
        }
        assert_eq!(node.tangle.pending_count(), 0);
    }
}

#[test]
fn bait_enters_with_exactly_the_adversary_weight() {
    let config = SimConfig {
        n: 5,
        k: 2,
        s: 0.0,
        q: 0.3,
        // a single honest vote (0.175) is enough to set off a bait
        adv_trigger: 0.5,
        attack_start: 1_000,
        t_max: 10_000,
        ..SimConfig::default()
    };
    let mut sim = Sim::new(config, 6).unwrap();
    sim.start();
    let attacker = NodeId(4);
    let bait = ColorId(2);
    while sim.registry().color_count() < 3 {
        assert!(sim.step(), "no bait was issued");
    }
    let carrier = sim.registry().color(bait).unwrap().carrier;
    assert_eq!(
        sim.nodes()[attacker.index()].tracker.approval_weight(bait),
        0.3
    );
    // the first honest node to see it sees only the attacker's vote
    loop {
        let seen: Vec<_> = sim
            .nodes()
            .iter()
            .filter(|n| n.honest && n.tangle.is_solid(carrier))
            .collect();
        if let Some(n) = seen.first() {
            assert_eq!(n.tracker.approval_weight(bait), 0.3);
            break;
        }
        assert!(sim.step());
    }
}

#[test]
fn attacker_weight_backs_one_color_at_a_time() {
    let mut sim = Sim::new(attacked(), 7).unwrap();
    sim.start();
    let mut steps = 0;
    while sim.step() {
        steps += 1;
        if steps % 500 != 0 {
            continue;
        }
        for set in sim.registry().sets() {
            for node in sim.nodes() {
                let total: f64 = set
                    .members
                    .iter()
                    .map(|&c| node.tracker.approval_weight(c))
                    .sum();
                assert!(total <= 1.0 + 1e-9);
            }
        }
    }
}

#[test]
fn consensus_time_is_stable_after_persisting_the_log() {
    let config = attacked();
    let r = run(&config, 8).unwrap();
    assert!(r.conflict_start.is_some());
    assert_eq!(r.consensus_time.is_some(), !r.liveness_failure);
    let json = serde_json::to_string(&r.opinion_log).unwrap();
    let log: Vec<OpinionChange> = serde_json::from_str(&json).unwrap();
    let honest: Vec<NodeId> = (0..config.n - 1).map(NodeId::from_index).collect();
    let set = r.opinion_log[0].set;
    assert_eq!(
        consensus_time(&log, &honest, set, r.conflict_start.unwrap()),
        r.consensus_time
    );
}

#[test]
fn early_stop_keeps_the_outcome() {
    let full = run(&attacked(), 11).unwrap();
    let early = run(
        &SimConfig {
            stop_on_resolution: true,
            ..attacked()
        },
        11,
    )
    .unwrap();
    assert_eq!(full.liveness_failure, early.liveness_failure);
    if !full.liveness_failure {
        assert_eq!(full.consensus_time, early.consensus_time);
        assert!(early.end_time <= full.end_time);
    }
}

#[test]
fn logged_opinions_end_on_the_pinned_color() {
    // one node confirms an early color from stale votes, the rest settle elsewhere
    let config = SimConfig {
        q: 0.3,
        s: 0.9,
        srrs_enabled: true,
        t_max: 13_000,
        ..SimConfig::default()
    };
    let mut sim = Sim::new(config, 13).unwrap();
    sim.start();
    while sim.step() {}
    let set = tangle_sim::ConflictSetId(0);
    let pinned: Vec<_> = sim
        .nodes()
        .iter()
        .filter(|n| n.honest)
        .filter_map(|n| n.opinions.confirmed(set).map(|c| (n.id, c)))
        .collect();
    let r = sim.finish();
    assert!(r.safety_failure);
    assert!(pinned.len() > 1);
    for (id, color) in pinned {
        let last = r
            .opinion_log
            .iter()
            .rev()
            .find(|c| c.node == id)
            .map(|c| c.color);
        assert_eq!(last, Some(color), "{id}");
    }
}
