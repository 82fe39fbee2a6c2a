mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn rebuilt_partitions_match_naive_closure() {
    for seed in 0..400 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rg = random_graph(&mut rng, 20, 4);
        assert!(rg.egraph.is_clean());
        for &ctx in &rg.contexts {
            let got = as_indices(&rg.egraph.partition(ctx).unwrap());
            let want = naive_congruence(&rg, ctx);
            assert_eq!(got, want, "seed {seed}, context {ctx}");
        }
    }
}

#[test]
fn random_graphs_keep_quotient_properties() {
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(5_000 + seed);
        let rg = random_graph(&mut rng, 20, 4);
        let g = &rg.egraph;
        let v = quotient_violations(g.lattice(), |c| g.partition(c).unwrap());
        assert!(v.is_empty(), "seed {seed}: {v:?}");
        for &fine in &rg.contexts {
            for &coarse in &rg.contexts {
                if !g.lattice().leq(fine, coarse).unwrap() {
                    assert!(g.qmap(fine, coarse).is_err());
                    continue;
                }
                let q = g.qmap(fine, coarse).unwrap();
                for i in 0..g.node_count() {
                    let id = ctxsat::NodeId::from_index(i);
                    let image = q.apply(g.find(fine, id).unwrap());
                    assert_eq!(image, Some(g.find(coarse, id).unwrap()), "seed {seed}");
                }
            }
        }
    }
}

#[test]
fn stats_match_a_recount() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(9_000 + seed);
        let rg = random_graph(&mut rng, 20, 4);
        let g = &rg.egraph;
        for &ctx in &rg.contexts {
            let stats = g.stats(ctx).unwrap();
            let classes: std::collections::BTreeSet<_> = g
                .bottom_nodes()
                .iter()
                .map(|(id, _)| g.find(ctx, *id).unwrap())
                .collect();
            let nodes: std::collections::BTreeSet<_> = g
                .bottom_nodes()
                .iter()
                .map(|(id, n)| {
                    let kids: Vec<_> = n
                        .children
                        .iter()
                        .map(|&c| g.find(ctx, c).unwrap())
                        .collect();
                    (g.find(ctx, *id).unwrap(), n.symbol, kids)
                })
                .collect();
            assert_eq!(stats.classes, classes.len(), "seed {seed}");
            assert_eq!(stats.nodes, nodes.len(), "seed {seed}");
        }
    }
}
