//! The ASSUME-node baseline: contexts encoded as explicit e-nodes in a single
//! equivalence relation, for size comparison with the layered encoding.
//!
//! A branch `t` of `(if c t e)` becomes `(assume t (and c nil))`, and
//! `(assume e (and (not c) nil))` for the else branch. Assumptions are pushed
//! down through every operator, copying the subterm once per constraint
//! list; a constraint list makes each of its members true (or false, for a
//! negated member). Two branches that agree collapse the conditional.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dsl::{execute, Command, Program, RunOptions, DEFAULT_RUN_ITERATIONS};
use crate::egraph::{ClassId, ENode, UnionCause};
use crate::error::{Error, Result};
use crate::lattice::ContextId;
use crate::rewrite::{Engine, EngineConfig, Rule, RuleScope, ScopeConstruct};
use crate::term::{Pattern, Term};

pub const ASSUME: &str = "assume";
pub const AND: &str = "and";
pub const NIL: &str = "nil";
pub const NOT: &str = "not";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssumeComparison {
    /// Canonical e-nodes of the ASSUME encoding at saturation.
    pub assume_nodes: usize,
    /// Canonical e-nodes at bottom of the layered encoding at saturation.
    pub layered_nodes: usize,
    /// Iterations of the layered run.
    pub iterations: usize,
}

impl AssumeComparison {
    pub fn ratio(&self) -> f64 {
        self.assume_nodes as f64 / self.layered_nodes.max(1) as f64
    }
}

struct Conditional {
    if_symbol: String,
    true_symbol: String,
    false_symbol: String,
}

/// Commands shared by both encodings; checks and extractions are dropped
/// because they may add terms.
fn core_commands(program: &Program) -> Result<(Vec<Command>, Option<Conditional>)> {
    let mut cond = None;
    let mut out = Vec::new();
    for cmd in &program.commands {
        match cmd {
            Command::Scope(ScopeConstruct::Conditional {
                if_symbol,
                true_symbol,
                false_symbol,
            }) => {
                cond = Some(Conditional {
                    if_symbol: if_symbol.clone(),
                    true_symbol: true_symbol.clone(),
                    false_symbol: false_symbol.clone(),
                });
            }
            Command::Scope(ScopeConstruct::Lambda { .. }) => {
                return Err(Error::UnsupportedCorpus(
                    "lambda scopes have no ASSUME encoding".into(),
                ))
            }
            Command::Scope(ScopeConstruct::Enforcer { .. }) | Command::Context { .. } => {
                return Err(Error::UnsupportedCorpus(
                    "only conditional scopes have an ASSUME encoding".into(),
                ))
            }
            Command::Rule(r) if r.scope != RuleScope::Everywhere => {
                return Err(Error::UnsupportedCorpus(format!(
                    "rule `{}` is restricted to a context",
                    r.name
                )))
            }
            Command::CheckEqual { .. }
            | Command::CheckNotEqual { .. }
            | Command::CheckContains { .. }
            | Command::Extract { .. } => continue,
            _ => {}
        }
        out.push(cmd.clone());
    }
    Ok((out, cond))
}

fn encode(t: &Term, cond: Option<&Conditional>) -> Term {
    match cond {
        Some(c) if t.head == c.if_symbol && t.args.len() == 3 => {
            let guard = |p: Term| Term::app(AND, vec![p, Term::leaf(NIL)]);
            let test = t.args[0].clone();
            Term::app(
                &c.if_symbol,
                vec![
                    encode(&test, cond),
                    Term::app(ASSUME, vec![t.args[1].clone(), guard(test.clone())]),
                    Term::app(
                        ASSUME,
                        vec![t.args[2].clone(), guard(Term::app(NOT, vec![test]))],
                    ),
                ],
            )
        }
        _ => Term::app(&t.head, t.args.iter().map(|a| encode(a, cond)).collect()),
    }
}

fn pv(v: &str) -> Pattern {
    Pattern::var(v)
}

fn baseline_rules(engine: &Engine, cond: Option<&Conditional>) -> Vec<Rule> {
    let g = engine.egraph();
    let mut rules = Vec::new();
    let special = [ASSUME, AND];
    for (_, f) in g.symbols() {
        if special.contains(&f.name.as_str()) || cond.is_some_and(|c| c.if_symbol == f.name) {
            continue;
        }
        if f.arity == 0 {
            let literal = f.name.parse::<f64>().is_ok()
                || cond.is_some_and(|c| c.true_symbol == f.name || c.false_symbol == f.name);
            if literal {
                rules.push(Rule::new(
                    format!("assume-literal-{}", f.name),
                    Pattern::app(ASSUME, vec![Pattern::leaf(&f.name), pv("C")]),
                    Pattern::leaf(&f.name),
                ));
            }
            continue;
        }
        let xs: Vec<Pattern> = (0..f.arity).map(|i| pv(&format!("x{i}"))).collect();
        rules.push(Rule::new(
            format!("assume-push-{}-{}", f.name, f.arity),
            Pattern::app(ASSUME, vec![Pattern::app(&f.name, xs.clone()), pv("C")]),
            Pattern::app(
                &f.name,
                xs.into_iter()
                    .map(|x| Pattern::app(ASSUME, vec![x, pv("C")]))
                    .collect(),
            ),
        ));
    }
    if let Some(c) = cond {
        let and = |p: Pattern| Pattern::app(AND, vec![p, pv("C")]);
        let assume = |x: &str, k: Pattern| Pattern::app(ASSUME, vec![pv(x), k]);
        rules.push(Rule::new(
            "assume-push-if",
            Pattern::app(
                ASSUME,
                vec![
                    Pattern::app(&c.if_symbol, vec![pv("c"), pv("t"), pv("e")]),
                    pv("C"),
                ],
            ),
            Pattern::app(
                &c.if_symbol,
                vec![
                    assume("c", pv("C")),
                    assume("t", and(pv("c"))),
                    assume("e", and(Pattern::app(NOT, vec![pv("c")]))),
                ],
            ),
        ));
        rules.push(Rule::new(
            "assume-same-branches",
            Pattern::app(&c.if_symbol, vec![pv("c"), pv("x"), pv("x")]),
            pv("x"),
        ));
    }
    rules
}

/// Adds `assume(c, C)` for every member `c` of every constraint list `C` in
/// use and merges it with true (false for a member `(not c)`).
fn assert_constraints(engine: &mut Engine, cond: &Conditional) -> Result<usize> {
    let g = engine.egraph();
    let bot = ContextId::BOTTOM;
    let assume = g.symbol(ASSUME, 2)?;
    let and = g.symbol(AND, 2)?;
    let not = g.symbol(NOT, 1)?;
    let t = g.symbol(&cond.true_symbol, 0)?;
    let f = g.symbol(&cond.false_symbol, 0)?;
    let view = g.materialize(bot)?;
    let lists: BTreeSet<ClassId> = view
        .table(assume)
        .iter()
        .map(|row| row.children[1])
        .collect();
    let mut facts: Vec<(ClassId, ClassId, bool)> = Vec::new();
    for list in lists {
        let mut seen = BTreeSet::new();
        let mut cur = list;
        while seen.insert(cur) {
            let Some(cell) = view.nodes(cur).iter().find(|n| n.symbol == and) else {
                break;
            };
            let member = cell.children[0];
            match view.nodes(member).iter().find(|n| n.symbol == not) {
                Some(neg) => facts.push((neg.children[0], list, false)),
                None => facts.push((member, list, true)),
            }
            cur = cell.children[1];
        }
    }
    let g = engine.egraph_mut();
    let (tc, fc) = (g.add_node(ENode::leaf(t))?, g.add_node(ENode::leaf(f))?);
    let mut n = 0;
    for (c, list, truth) in facts {
        let a = g.add_node(ENode::new(assume, vec![c, list]))?;
        let m = g.merge_with(bot, a, if truth { tc } else { fc }, UnionCause::Scope)?;
        n += m.changed as usize;
    }
    Ok(n)
}

fn ensure(engine: &mut Engine, name: &str, arity: usize) -> Result<()> {
    let g = engine.egraph_mut();
    match g.symbol(name, arity) {
        Ok(_) => Ok(()),
        Err(Error::UnknownSymbol { .. }) => g.declare_function(name, arity).map(|_| ()),
        Err(e) => Err(Error::UnsupportedCorpus(format!(
            "symbol `{name}` is reserved: {e}"
        ))),
    }
}

/// Runs `program` under both encodings and reports canonical node counts.
pub fn compare_assume(program: &Program, options: &RunOptions) -> Result<AssumeComparison> {
    let (commands, cond) = core_commands(program)?;
    let core = Program { commands };
    let (layered, out) = execute(&core, options)?;
    let layered_nodes = layered.egraph().stats(ContextId::BOTTOM)?.nodes;

    let mut config = EngineConfig::default();
    if let Some(t) = options.materialize_threshold {
        config.materialize_threshold = t;
    }
    let mut engine = Engine::new(config);
    let mut prepared = false;
    for cmd in &core.commands {
        match cmd {
            Command::Function { name, arity } => {
                engine.egraph_mut().declare_function(name, *arity)?;
            }
            Command::Constants(names) => {
                for n in names {
                    engine.egraph_mut().declare_function(n, 0)?;
                }
            }
            Command::Term(t) => {
                if !prepared {
                    for (name, arity) in [(ASSUME, 2), (AND, 2), (NIL, 0), (NOT, 1)] {
                        ensure(&mut engine, name, arity)?;
                    }
                }
                prepared = true;
                engine.egraph_mut().intern(&encode(t, cond.as_ref()))?;
            }
            Command::Rule(r) => engine.add_rule(r.clone())?,
            Command::Run(n) => {
                for (name, arity) in [(ASSUME, 2), (AND, 2), (NIL, 0), (NOT, 1)] {
                    ensure(&mut engine, name, arity)?;
                }
                for r in baseline_rules(&engine, cond.as_ref()) {
                    if engine.rules().all(|x| x.name != r.name) {
                        engine.add_rule(r)?;
                    }
                }
                let max = options.max_iters.or(*n).unwrap_or(DEFAULT_RUN_ITERATIONS);
                engine.egraph_mut().rebuild();
                for _ in 0..max {
                    let v = engine.egraph().version();
                    engine.step()?;
                    if let Some(c) = &cond {
                        assert_constraints(&mut engine, c)?;
                    }
                    engine.egraph_mut().rebuild();
                    if engine.egraph().version() == v {
                        break;
                    }
                }
            }
            _ => {}
        }
    }
    let assume_nodes = engine.egraph().stats(ContextId::BOTTOM)?.nodes;
    Ok(AssumeComparison {
        assume_nodes,
        layered_nodes,
        iterations: out.report.iterations,
    })
}
