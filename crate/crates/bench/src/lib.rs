//! Workloads shared by the benchmarks.

use ctxsat::dsl::{parse_program, Program};
use ctxsat::{corpus, ContextId, LayeredUnionFind, NodeId};

pub fn corpus_programs() -> Vec<(&'static str, Program)> {
    corpus::all()
        .into_iter()
        .map(|(name, src)| (name, parse_program(src).expect("bundled corpus parses")))
        .collect()
}

pub fn nested(k: usize) -> Program {
    parse_program(&corpus::nested_conditional(k)).expect("generated program parses")
}

/// `ids` singletons under a diamond of contexts `l`, `r`, `top` above
/// bottom, with every third id pair merged at one of the four contexts.
pub fn diamond(ids: usize) -> (LayeredUnionFind, [ContextId; 4]) {
    let mut luf = LayeredUnionFind::new();
    let l = luf.declare_context("l", &[]).unwrap();
    let r = luf.declare_context("r", &[]).unwrap();
    let top = luf.declare_context("top", &[l, r]).unwrap();
    let ctxs = [ContextId::BOTTOM, l, r, top];
    let nodes: Vec<NodeId> = (0..ids).map(|_| luf.make_set()).collect();
    for i in (0..ids.saturating_sub(1)).step_by(3) {
        luf.union(ctxs[(i / 3) % 4], nodes[i], nodes[i + 1])
            .unwrap();
    }
    (luf, ctxs)
}
