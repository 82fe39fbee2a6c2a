mod common;

use common::avoids_within;
use ctxsat::dsl::{parse_program, Command, RunOptions, Session};
use ctxsat::{corpus, extract, ContextId, CostModel, Engine, NodeId, UnionCause};

/// Executes everything but `run`, leaving the engine ready to be stepped.
fn prepared(src: &str) -> Engine {
    let mut s = Session::new(RunOptions::default());
    for cmd in parse_program(src).unwrap().commands {
        if !matches!(
            cmd,
            Command::Run(_)
                | Command::CheckEqual { .. }
                | Command::CheckNotEqual { .. }
                | Command::CheckContains { .. }
                | Command::Extract { .. }
        ) {
            s.execute(&cmd).unwrap();
        }
    }
    s.finish().0
}

fn finds(e: &Engine, ctx: ContextId) -> Vec<NodeId> {
    let g = e.egraph();
    (0..g.node_count())
        .map(|i| g.find(ctx, NodeId::from_index(i)).unwrap())
        .collect()
}

#[test]
fn intersections_only_join_what_both_branches_agree_on() {
    let mut sources = vec![corpus::CONDITIONAL.to_string(), corpus::INTRO.to_string()];
    sources.extend((1..=3).map(corpus::nested_conditional));
    let mut checked = 0;
    for src in sources {
        let mut e = prepared(&src);
        for _ in 0..20 {
            let v = e.egraph().version();
            e.apply_scopes().unwrap();
            e.egraph_mut().rebuild();
            e.apply_rules().unwrap();
            e.egraph_mut().rebuild();
            let before: Vec<_> = e
                .conditional_instances()
                .iter()
                .map(|i| (i.gamma, finds(&e, i.then_ctx), finds(&e, i.else_ctx)))
                .collect();
            let logged = e.egraph().union_log().len();
            e.apply_intersections().unwrap();
            for rec in &e.egraph().union_log()[logged..] {
                assert_eq!(rec.cause, UnionCause::Intersection);
                let ok = before.iter().any(|(gamma, t, f)| {
                    *gamma == rec.ctx
                        && t[rec.a.index()] == t[rec.b.index()]
                        && f[rec.a.index()] == f[rec.b.index()]
                });
                assert!(ok, "{rec:?}");
                checked += 1;
            }
            e.egraph_mut().rebuild();
            e.apply_lambda_lifts().unwrap();
            e.apply_enforcer_lifts().unwrap();
            e.egraph_mut().rebuild();
            if e.egraph().version() == v {
                break;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn lifted_terms_avoid_the_binder() {
    let mut e = prepared(corpus::LAMBDA);
    e.run(10).unwrap();
    let g = e.egraph();
    let lifts: Vec<_> = g
        .union_log()
        .iter()
        .filter(|r| r.cause == UnionCause::LambdaLift)
        .collect();
    assert!(!lifts.is_empty());
    for rec in lifts {
        for id in [rec.a, rec.b] {
            assert!(avoids_within(g, rec.ctx, id, "x", 5));
            let t = extract(g, rec.ctx, id, &CostModel::tree_size(), Some("x"))
                .unwrap()
                .term;
            assert!(!t.mentions("x"));
        }
    }
}

#[test]
fn enforcer_lifts_stay_at_the_outer_context() {
    let mut e = prepared(corpus::QUERYPLAN);
    e.run(20).unwrap();
    let g = e.egraph();
    let s = g.context("s").unwrap();
    let lifts: Vec<_> = g
        .union_log()
        .iter()
        .filter(|r| r.cause == UnionCause::Enforcer)
        .collect();
    assert!(!lifts.is_empty());
    // every lift lands at a context not above s; otherwise it would be redundant
    for rec in lifts {
        assert!(!g.lattice().leq(s, rec.ctx).unwrap(), "{rec:?}");
    }
}
