//! End-to-end acceptance run: one line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic;
use std::time::{Duration, Instant};

use common::*;
use ctxsat::assume::compare_assume;
use ctxsat::dsl::{
    parse_program, parse_term, CheckStatus, Command, RunOptions, RunOutput, Session, COMMANDS,
    DEFAULT_RUN_ITERATIONS, RULE_KEYWORDS,
};
use ctxsat::{corpus, ematch, ClassId, ContextId, Engine, NodeId, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const TIME_LIMIT: Duration = Duration::from_secs(10);

const QUERYPLAN_GOLDEN: &str = "(project r.target (merge-join (sort m.target (hash-join (select (eq l.source 100) (rename l edges)) (rename m edges) (on l.target m.source))) (rename r edges) (on m.target r.source)))";

fn fail(msg: impl Into<String>) -> Outcome {
    Err(msg.into())
}

/// Runs a program, calling `observe` before every `run` directive (with
/// iteration 0) and after each of its iterations.
fn run_observed(
    src: &str,
    mut observe: impl FnMut(&Engine, usize),
) -> Result<(Engine, RunOutput), String> {
    let program = parse_program(src).map_err(|e| e.to_string())?;
    let mut session = Session::new(RunOptions::default());
    let start = Instant::now();
    for cmd in &program.commands {
        match cmd {
            Command::Run(n) => {
                observe(session.engine(), 0);
                session
                    .engine_mut()
                    .run_with(n.unwrap_or(DEFAULT_RUN_ITERATIONS), &mut observe)
                    .map_err(|e| e.to_string())?;
            }
            _ => session.execute(cmd).map_err(|e| e.to_string())?,
        }
    }
    if start.elapsed() > TIME_LIMIT {
        return Err(format!("took {:?}", start.elapsed()));
    }
    Ok(session.finish())
}

fn all_checks_pass(out: &RunOutput) -> Result<usize, String> {
    let failed: Vec<&str> = out
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(out.checks.len())
    } else {
        Err(format!("failed checks: {failed:?}"))
    }
}

fn class(engine: &Engine, t: &str) -> Result<ClassId, String> {
    engine
        .egraph()
        .lookup(ContextId::BOTTOM, &parse_term(t).unwrap())
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("{t} is not in the e-graph"))
}

fn intro() -> Outcome {
    let (engine, out) = run_observed(corpus::INTRO, |_, _| {})?;
    let n = all_checks_pass(&out)?;
    let g = engine.egraph();
    let ite = class(&engine, "(if (== x 2) (* x y) y)")?;
    let (then, _) = engine.branch_contexts(ite).ok_or("no branch contexts")?;
    let (xy, shift) = (class(&engine, "(* x y)")?, class(&engine, "(shift y)")?);
    if !g.equiv(then, xy, shift).unwrap() || g.equiv(ContextId::BOTTOM, xy, shift).unwrap() {
        return fail("x*y ~ shift(y) must hold at then and only there");
    }
    Ok(format!("{n} checks"))
}

fn conditional() -> Outcome {
    let mut first = None;
    let term = "(if (> a b) (> a b) (<= a b))";
    let (engine, out) = run_observed(corpus::CONDITIONAL, |e, it| {
        if first.is_none() && it > 0 {
            if let (Ok(t), Ok(c)) = (class(e, term), class(e, "true")) {
                if e.egraph().equiv(ContextId::BOTTOM, t, c).unwrap() {
                    first = Some(it);
                }
            }
        }
    })?;
    let n = all_checks_pass(&out)?;
    let ite = class(&engine, term)?;
    let (then, els) = engine.branch_contexts(ite).ok_or("no branch contexts")?;
    let g = engine.egraph();
    let t = class(&engine, "true")?;
    if !g.equiv(then, class(&engine, "(> a b)")?, t).unwrap()
        || !g.equiv(els, class(&engine, "(<= a b)")?, t).unwrap()
    {
        return fail("branch assumptions missing");
    }
    match first {
        Some(k) if k <= 5 => Ok(format!("{n} checks, ternary = true at iteration {k}")),
        Some(k) => fail(format!("ternary = true only at iteration {k}")),
        None => fail("ternary never equal to true at bot"),
    }
}

fn queryplan() -> Outcome {
    let (engine, out) = run_observed(corpus::QUERYPLAN, |_, _| {})?;
    let n = all_checks_pass(&out)?;
    let g = engine.egraph();
    let s = g.context("s").unwrap();
    let mj = class(
        &engine,
        "(merge-join (rename l edges) (rename m edges) (on l.target m.source))",
    )?;
    let hj = class(
        &engine,
        "(hash-join (rename l edges) (rename m edges) (on l.target m.source))",
    )?;
    if !g.equiv(s, mj, hj).unwrap() || g.equiv(ContextId::BOTTOM, mj, hj).unwrap() {
        return fail("merge-join ~ hash-join must hold at s and not at bot");
    }
    let root = g.roots()[0];
    let golden = g
        .lookup(ContextId::BOTTOM, &parse_term(QUERYPLAN_GOLDEN).unwrap())
        .unwrap();
    if golden != Some(g.find(ContextId::BOTTOM, root).unwrap()) {
        return fail("golden plan is not in the root class");
    }
    match out.extractions.as_slice() {
        [x] if x.result == QUERYPLAN_GOLDEN => {
            Ok(format!("{n} checks, extracted golden at cost {}", x.cost))
        }
        [x] => fail(format!("extracted {}", x.result)),
        _ => fail("expected one extraction"),
    }
}

fn lambda() -> Outcome {
    let (engine, out) = run_observed(corpus::LAMBDA, |_, _| {})?;
    let n = all_checks_pass(&out)?;
    let g = engine.egraph();
    let app = class(&engine, "(app (lam x (+ (var x) 1)) 2)")?;
    if !g
        .equiv(ContextId::BOTTOM, app, class(&engine, "3")?)
        .unwrap()
    {
        return fail("application is not 3 at bot");
    }
    let body = engine.body_context(app).ok_or("no body context")?;
    let plus = class(&engine, "(+ (var x) 1)")?;
    let nodes = g.class_nodes(body, plus).unwrap();
    let f = |t: &str| g.find(body, class(&engine, t).unwrap()).unwrap();
    let plus_sym = g.symbol("+", 2).unwrap();
    let three = g.symbol("3", 0).unwrap();
    let has = |kids: Vec<ClassId>| {
        nodes
            .iter()
            .any(|n| n.symbol == plus_sym && n.children == kids)
    };
    // in the body var x and 2 share a class, so x+1 and 2+1 are one canonical node
    if !has(vec![f("(var x)"), f("1")])
        || !has(vec![f("2"), f("1")])
        || !nodes.iter().any(|n| n.symbol == three)
    {
        return fail(format!("body class nodes: {nodes:?}"));
    }
    match out.extractions.as_slice() {
        [x] if !parse_term(&x.result).unwrap().mentions("x") => {
            Ok(format!("{n} checks, extracted {}", x.result))
        }
        other => fail(format!("extraction {other:?}")),
    }
}

fn lattice_oracle() -> Outcome {
    let cases = 1200;
    let mut declared = 0;
    for seed in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, ops) = random_script(&mut rng);
        let (luf, _) = replay(n, &ops).map_err(|e| format!("seed {seed}: {e}"))?;
        declared += luf.lattice().len();
    }
    Ok(format!("{cases} scripts, {declared} contexts in total"))
}

fn quotients() -> Outcome {
    let mut pairs = 0;
    for seed in 0..1200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, ops) = random_script(&mut rng);
        let (luf, _) = replay(n, &ops)?;
        let v = quotient_violations(luf.lattice(), |c| luf.partition(c).unwrap());
        if !v.is_empty() {
            return fail(format!("script {seed}: {v:?}"));
        }
        pairs += luf
            .lattice()
            .contexts()
            .map(|c| luf.lattice().upset(c).unwrap().len())
            .sum::<usize>();
    }
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rg = random_graph(&mut rng, 20, 4);
        let g = &rg.egraph;
        let v = quotient_violations(g.lattice(), |c| g.partition(c).unwrap());
        if !v.is_empty() {
            return fail(format!("graph {seed}: {v:?}"));
        }
        for &fine in &rg.contexts {
            for &coarse in g.lattice().upset(fine).unwrap().iter() {
                let q = g.qmap(fine, coarse).unwrap();
                for i in 0..g.node_count() {
                    let id = NodeId::from_index(i);
                    if q.apply(g.find(fine, id).unwrap()) != Some(g.find(coarse, id).unwrap()) {
                        return fail(format!("graph {seed}: q is not well defined"));
                    }
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} ordered pairs, 0 violations"))
}

fn congruence() -> Outcome {
    let cases = 250;
    let mut partitions = 0;
    for seed in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rg = random_graph(&mut rng, 20, 4);
        for &ctx in &rg.contexts {
            let got = as_indices(&rg.egraph.partition(ctx).unwrap());
            if got != naive_congruence(&rg, ctx) {
                return fail(format!("graph {seed}, context {ctx}"));
            }
            partitions += 1;
        }
    }
    Ok(format!("{cases} graphs, {partitions} partitions"))
}

fn strategies() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut compared = 0;
    let mut nonempty = 0;
    let mut sources: Vec<(String, String)> = corpus::all()
        .iter()
        .map(|(n, s)| (n.to_string(), s.to_string()))
        .collect();
    sources.push(("nested-3".into(), corpus::nested_conditional(3)));
    for (name, src) in &sources {
        let (engine, _) = run_observed(src, |_, _| {})?;
        let g = engine.egraph();
        for _ in 0..100 {
            let p = random_pattern(&mut rng, g, 3, true);
            for ctx in g.lattice().contexts() {
                let a = match_set(&ematch(g, ctx, &p, Strategy::Materialized).unwrap());
                let b = match_set(&ematch(g, ctx, &p, Strategy::OnTheFly).unwrap());
                if a != b {
                    return fail(format!("{name}: {p} at {}", g.context_name(ctx)));
                }
                compared += 1;
                nonempty += !a.is_empty() as usize;
            }
        }
    }
    Ok(format!(
        "{compared} pattern/context pairs, {nonempty} with matches"
    ))
}

fn assume_series() -> Outcome {
    let mut ratios = Vec::new();
    let mut detail = Vec::new();
    for k in 1..=3 {
        let start = Instant::now();
        let p = parse_program(&corpus::nested_conditional(k)).unwrap();
        let c = compare_assume(&p, &RunOptions::default()).map_err(|e| e.to_string())?;
        if start.elapsed() > TIME_LIMIT {
            return fail(format!("k={k} took {:?}", start.elapsed()));
        }
        if c.layered_nodes > c.assume_nodes {
            return fail(format!(
                "k={k}: layered {} > assume {}",
                c.layered_nodes, c.assume_nodes
            ));
        }
        detail.push(format!("k={k} {}/{}", c.assume_nodes, c.layered_nodes));
        ratios.push(c.ratio());
    }
    if ratios.windows(2).any(|w| w[1] <= w[0]) {
        return fail(format!("ratios not increasing: {ratios:?}"));
    }
    Ok(detail.join(", "))
}

/// Every grammar production. The match has no wildcard arm, so adding a
/// command without listing it here does not compile.
fn production(c: &Command) -> &'static str {
    match c {
        Command::Function { .. } => "function",
        Command::Constants(_) => "constants",
        Command::Context { .. } => "context",
        Command::Term(_) => "term",
        Command::Rule(_) => "rule",
        Command::Scope(_) => "scope",
        Command::Cost { .. } => "cost",
        Command::Run(_) => "run",
        Command::CheckEqual { .. } => "check-equal",
        Command::CheckNotEqual { .. } => "check-not-equal",
        Command::CheckContains { .. } => "check-contains",
        Command::Extract { .. } => "extract",
    }
}

fn monotonicity() -> Outcome {
    let mut sources: Vec<String> = corpus::all().iter().map(|(_, s)| s.to_string()).collect();
    sources.extend((1..=3).map(corpus::nested_conditional));
    let mut snapshots = 0;
    for src in &sources {
        let mut prev: BTreeMap<ContextId, BTreeSet<(ClassId, ClassId)>> = BTreeMap::new();
        let mut shrank = None;
        let (engine, _) = run_observed(src, |e, it| {
            let now = e.equivalence_pairs();
            for (ctx, pairs) in &prev {
                if !now.get(ctx).is_some_and(|n| n.is_superset(pairs)) && shrank.is_none() {
                    shrank = Some((*ctx, it));
                }
            }
            prev = now;
            snapshots += 1;
        })?;
        if let Some((ctx, it)) = shrank {
            return fail(format!(
                "pairs at {} shrank at iteration {it}",
                engine.egraph().context_name(ctx)
            ));
        }
    }
    for p in parse_program(&sources.join("\n")).unwrap().commands.iter() {
        let _ = production(p);
    }
    for k in COMMANDS.iter().chain(RULE_KEYWORDS) {
        if ["count", "size", "card", "classes", "nodes"]
            .iter()
            .any(|b| k.contains(b))
        {
            return fail(format!("keyword {k} observes class sizes"));
        }
    }
    if parse_program("(rule r ?a ?b :when ((count ?a 2)))").is_ok() {
        return fail("a counting guard parsed");
    }
    Ok(format!(
        "{snapshots} snapshots, no shrinking; no counting production"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("intro case", intro),
        ("conditional elimination", conditional),
        ("query plans", queryplan),
        ("lambda", lambda),
        ("lattice-of-relations oracle", lattice_oracle),
        ("order preservation and quotients", quotients),
        ("congruence oracle", congruence),
        ("strategy equivalence", strategies),
        ("assume comparison", assume_series),
        ("monotonicity guard", monotonicity),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
