mod common;

use std::collections::BTreeSet;

use num_rational::Rational64;
use proptest::prelude::*;

use common::{ancestors, brute_branch, Trace, SETS};
use tangle_sim::config::build_weights;
use tangle_sim::consensus::ApprovalTracker;
use tangle_sim::engine::rng::{stream, StreamLabel};
use tangle_sim::ledger::ColorRegistry;
use tangle_sim::srrs::{min_hash_color, srrs_vote, CoinDraw};
use tangle_sim::tangle::{AttachOutcome, LocalTangle};
use tangle_sim::topology::build_graph;
use tangle_sim::{BlockId, ColorId, ConflictSetId, NodeId, SimTime};

fn theta() -> Rational64 {
    Rational64::new(66, 100)
}

fn solid_set(tangle: &LocalTangle) -> BTreeSet<usize> {
    tangle.solid_ids().map(BlockId::index).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn approval_weight_matches_brute_force(seed in any::<u64>(), len in 2usize..200, nodes in 1usize..12) {
        let trace = Trace::generate(seed, len, nodes);
        let order = trace.shuffled_order(seed);
        let cut = order.len() * 3 / 4;
        let (tangle, tracker) = trace.replay(&order[..cut], theta(), false);
        let present = solid_set(&tangle);

        let blocks = trace.brute_block_weights(&present);
        for &x in &present {
            prop_assert_eq!(tracker.block_weight(BlockId::from_index(x)), blocks[x], "block {}", x);
        }
        for &x in &present {
            let payload = trace.blocks[x].payload;
            prop_assert_eq!(
                tracker.payload_weight(payload),
                trace.brute_payload_weight(&present, payload),
                "payload {}", payload
            );
        }
        for set in 0..SETS {
            for (color, w) in trace.brute_color_weights(&present, ConflictSetId(set)) {
                prop_assert_eq!(tracker.approval_weight(color), w, "color {}", color);
            }
        }
    }

    #[test]
    fn saturating_walk_keeps_confirmations(seed in any::<u64>(), len in 2usize..200, nodes in 1usize..12) {
        let trace = Trace::generate(seed, len, nodes);
        let order = trace.shuffled_order(seed);
        let (_, exact) = trace.replay(&order, theta(), false);
        let (_, fast) = trace.replay(&order, theta(), true);
        for i in 0..trace.blocks.len() {
            let id = BlockId::from_index(i);
            prop_assert_eq!(exact.payload_confirmed_at(id), fast.payload_confirmed_at(id));
            if exact.block_weight(id) < theta() {
                prop_assert_eq!(exact.block_weight(id), fast.block_weight(id));
            }
        }
    }

    #[test]
    fn each_voter_counts_once(seed in any::<u64>(), len in 2usize..200, nodes in 1usize..12) {
        let trace = Trace::generate(seed, len, nodes);
        let order = trace.shuffled_order(seed);
        let (_, tracker) = trace.replay(&order, theta(), false);
        let one = Rational64::from_integer(1);
        for i in 0..trace.blocks.len() {
            prop_assert!(tracker.block_weight(BlockId::from_index(i)) <= one);
        }
        for set in trace.registry.sets() {
            let total: Rational64 = set.members.iter().map(|&c| tracker.approval_weight(c)).sum();
            let voters: Rational64 = (0..nodes)
                .map(|n| tracker.contributed(set.id, NodeId::from_index(n), &trace.weights))
                .sum();
            prop_assert_eq!(total, voters);
            prop_assert!(total <= one);
        }
    }

    #[test]
    fn weights_and_confirmations_only_grow(seed in any::<u64>(), len in 2usize..150, nodes in 1usize..10) {
        let trace = Trace::generate(seed, len, nodes);
        let order = trace.shuffled_order(seed);
        let mut tangle = LocalTangle::new();
        let mut tracker = ApprovalTracker::new(nodes, theta());
        let mut last_weight = vec![Rational64::from_integer(0); trace.blocks.len()];
        let mut confirmed: Vec<Option<SimTime>> = vec![None; trace.blocks.len()];
        let mut colors: Vec<Option<SimTime>> = vec![None; trace.registry.color_count()];
        for (step, &i) in order.iter().enumerate() {
            let now = SimTime(step as u64);
            if let AttachOutcome::Solid { solidified } = tangle.attach(trace.blocks[i].clone()) {
                for id in solidified {
                    let block = tangle.block(id).unwrap().clone();
                    let support = tracker.record_support(&tangle, &block, &trace.weights, &trace.registry, now);
                    for change in support.vote_changes {
                        tracker.check_color_confirmation(change.to, now);
                    }
                }
            }
            for j in 0..trace.blocks.len() {
                let id = BlockId::from_index(j);
                let w = tracker.block_weight(id);
                prop_assert!(w >= last_weight[j]);
                last_weight[j] = w;
                let c = tracker.payload_confirmed_at(id);
                if confirmed[j].is_some() {
                    prop_assert_eq!(c, confirmed[j]);
                }
                confirmed[j] = c;
            }
            for (k, slot) in colors.iter_mut().enumerate() {
                let c = tracker.color_confirmed_at(ColorId::from_index(k));
                if slot.is_some() {
                    prop_assert_eq!(c, *slot);
                }
                *slot = c;
            }
        }
    }

    #[test]
    fn tips_and_solidity_match_recomputation(seed in any::<u64>(), len in 2usize..150, nodes in 1usize..8) {
        let trace = Trace::generate(seed, len, nodes);
        let order = trace.shuffled_order(seed);
        let mut tangle = LocalTangle::new();
        let mut delivered = BTreeSet::new();
        for &i in &order {
            tangle.attach(trace.blocks[i].clone());
            delivered.insert(i);
            let solid = trace.brute_solid(&delivered);
            prop_assert_eq!(&solid_set(&tangle), &solid);
            prop_assert_eq!(tangle.pending_count(), delivered.len() + 1 - solid.len());
            let tips: BTreeSet<usize> = solid
                .iter()
                .copied()
                .filter(|&x| !solid.iter().any(|&y| trace.blocks[y].parents.contains(&BlockId::from_index(x))))
                .collect();
            let got: BTreeSet<usize> = tangle.tips().iter().map(|t| t.index()).collect();
            prop_assert_eq!(got, tips);
        }
    }

    #[test]
    fn cones_and_branches_match_closure(seed in any::<u64>(), len in 2usize..120, nodes in 1usize..8) {
        let trace = Trace::generate(seed, len, nodes);
        let order: Vec<usize> = (1..trace.blocks.len()).collect();
        let (tangle, _) = trace.replay(&order, theta(), false);
        let anc = ancestors(&trace.blocks);
        for x in 0..trace.blocks.len() {
            let id = BlockId::from_index(x);
            let past: BTreeSet<usize> = tangle.past_cone(id).unwrap().into_iter().map(BlockId::index).collect();
            prop_assert_eq!(&past, &anc[x]);
            let future: BTreeSet<usize> = tangle.future_cone(id).unwrap().into_iter().map(BlockId::index).collect();
            let expected: BTreeSet<usize> = (0..trace.blocks.len()).filter(|&y| anc[y].contains(&x)).collect();
            prop_assert_eq!(future, expected);
            prop_assert_eq!(tangle.branch(id).unwrap().to_vec(), brute_branch(&trace.blocks, &anc[x]));
        }
    }

    #[test]
    fn zipf_weights_normalize(n in 2usize..300, s in 0.0f64..3.0, q in 0.0f64..0.34) {
        let w = build_weights::<f64>(n, s, q);
        let total: f64 = w.as_slice().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(w.as_slice().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn watts_strogatz_keeps_degree_budget(seed in any::<u64>(), half in 1usize..5, extra in 1usize..60, gamma in 0.0f64..1.0) {
        let k = 2 * half;
        let n = k + 1 + extra;
        let g = build_graph(n, k, gamma, &mut stream(seed, StreamLabel::Topology)).unwrap();
        prop_assert_eq!(g.edge_count(), n * k / 2);
        prop_assert!(g.is_connected());
        for u in 0..n {
            let u = NodeId::from_index(u);
            prop_assert!(!g.has_edge(u, u));
            for &v in g.neighbors(u) {
                prop_assert!(g.has_edge(v, u));
            }
        }
    }

    #[test]
    fn hash_fallback_agrees_across_views(
        members in 2usize..8,
        u in 0.0f64..1.0,
        views in prop::collection::vec(prop::collection::vec(0.0f64..0.5, 8), 2..20),
    ) {
        // every node sees the members below the coin, with its own weights
        let coin = CoinDraw::from_uniform(0, u);
        let colors: Vec<ColorId> = (0..members as u32).map(ColorId).collect();
        let expected = min_hash_color(&colors, coin, 1000);
        for view in &views {
            let vote = srrs_vote(&colors, |c: ColorId| view[c.index()], coin, 1000);
            prop_assert_eq!(vote, expected);
        }
    }
}

/// Two nodes holding the same symmetric conflict in mirrored local tangles
/// pick the same color through the hash rule.
#[test]
fn scripted_symmetric_views_agree() {
    use std::sync::Arc;
    use tangle_sim::tangle::Block;

    let mut registry = ColorRegistry::new();
    let red = Block::new(
        BlockId(1),
        NodeId(0),
        SimTime(0),
        vec![BlockId::GENESIS],
        Some(ColorId(0)),
    );
    let blue = Block::new(
        BlockId(2),
        NodeId(1),
        SimTime(0),
        vec![BlockId::GENESIS],
        Some(ColorId(1)),
    );
    registry.register_color(ColorId(0), ConflictSetId(0), BlockId(1), SimTime(0));
    registry.register_color(ColorId(1), ConflictSetId(0), BlockId(2), SimTime(0));
    let weights = vec![Rational64::new(1, 4); 4];
    let on_red = Block::new(BlockId(3), NodeId(2), SimTime(1), vec![BlockId(1)], None);
    let on_blue = Block::new(BlockId(4), NodeId(3), SimTime(1), vec![BlockId(2)], None);

    let mut votes = Vec::new();
    // node A has seen everything; node B only the conflict itself
    for blocks in [vec![&red, &blue, &on_red, &on_blue], vec![&blue, &red]] {
        let mut tangle = LocalTangle::new();
        let mut tracker = ApprovalTracker::new(4, theta());
        for b in blocks {
            if let AttachOutcome::Solid { solidified } = tangle.attach(Arc::new(b.clone())) {
                for id in solidified {
                    let block = tangle.block(id).unwrap().clone();
                    tracker.record_support(&tangle, &block, &weights, &registry, SimTime(2));
                }
            }
        }
        let members = [ColorId(0), ColorId(1)];
        for epoch in 0..20 {
            let coin = CoinDraw::from_uniform(epoch, epoch as f64 / 20.0);
            let vote = srrs_vote(&members, |c| tracker.approval_weight(c), coin, 1000);
            votes.push((epoch, vote));
        }
    }
    let (a, b) = votes.split_at(20);
    assert_eq!(a, b);
}
