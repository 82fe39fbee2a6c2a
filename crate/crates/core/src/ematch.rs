//! Relational e-matching.
//!
//! A pattern (plus any number of equality facts between patterns) compiles to
//! a conjunctive query over function tables: every application node becomes
//! an atom `f(x1, ..., xn) = out`. Queries are answered by backtracking joins
//! against either a materialized canonical view or the bottom store joined
//! with the context's equivalence relation on the fly. Both return the same
//! set of matches.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::egraph::{ClassId, EGraph, Symbol};
use crate::error::Result;
use crate::lattice::ContextId;
use crate::term::Pattern;
use crate::views::{CanonicalView, Row, Strategy};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Atom {
    symbol: Symbol,
    args: Vec<usize>,
    out: usize,
}

/// A compiled conjunctive query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    atoms: Vec<Atom>,
    slots: usize,
    /// Named variables in name order, with their slots.
    named: Vec<(String, usize)>,
    root: usize,
}

/// One answer: a substitution for the pattern variables and the root class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Match {
    pub root: ClassId,
    pub subst: BTreeMap<String, ClassId>,
}

struct Builder<'a> {
    egraph: &'a EGraph,
    atoms: Vec<Atom>,
    parent: Vec<usize>,
    names: BTreeMap<String, usize>,
}

impl Builder<'_> {
    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut s: usize) -> usize {
        while self.parent[s] != s {
            self.parent[s] = self.parent[self.parent[s]];
            s = self.parent[s];
        }
        s
    }

    fn unify(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }

    fn flatten(&mut self, p: &Pattern) -> Result<usize> {
        match p {
            Pattern::Var(v) => {
                if let Some(&s) = self.names.get(v) {
                    return Ok(s);
                }
                let s = self.fresh();
                self.names.insert(v.clone(), s);
                Ok(s)
            }
            Pattern::App { head, args } => {
                let symbol = self.egraph.symbol(head, args.len())?;
                let args = args
                    .iter()
                    .map(|a| self.flatten(a))
                    .collect::<Result<Vec<_>>>()?;
                let out = self.fresh();
                self.atoms.push(Atom { symbol, args, out });
                Ok(out)
            }
        }
    }
}

impl Query {
    /// Compiles `lhs` together with facts `p = q` that must hold of the same
    /// match. The root of the query is the root of `lhs`.
    pub fn compile(egraph: &EGraph, lhs: &Pattern, facts: &[(Pattern, Pattern)]) -> Result<Query> {
        let mut b = Builder {
            egraph,
            atoms: Vec::new(),
            parent: Vec::new(),
            names: BTreeMap::new(),
        };
        let root = b.flatten(lhs)?;
        for (p, q) in facts {
            let (sp, sq) = (b.flatten(p)?, b.flatten(q)?);
            b.unify(sp, sq);
        }
        // renumber slot classes densely
        let mut dense: BTreeMap<usize, usize> = BTreeMap::new();
        let total = b.parent.len();
        let mut canon = vec![0; total];
        for (s, slot) in canon.iter_mut().enumerate() {
            let r = b.find(s);
            let n = dense.len();
            *slot = *dense.entry(r).or_insert(n);
        }
        let atoms = b
            .atoms
            .iter()
            .map(|a| Atom {
                symbol: a.symbol,
                args: a.args.iter().map(|&s| canon[s]).collect(),
                out: canon[a.out],
            })
            .collect();
        let named = b
            .names
            .iter()
            .map(|(n, &s)| (n.clone(), canon[s]))
            .collect();
        Ok(Query {
            atoms,
            slots: dense.len(),
            named,
            root: canon[root],
        })
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.named.iter().map(|(n, _)| n.as_str())
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Greedy join order: prefer atoms whose output is bound (index lookup),
    /// then atoms with more bound arguments, then small nullary tables.
    fn plan(&self) -> Vec<usize> {
        let mut bound = vec![false; self.slots];
        let mut remaining: Vec<usize> = (0..self.atoms.len()).collect();
        let mut order = Vec::with_capacity(self.atoms.len());
        while !remaining.is_empty() {
            let score = |i: usize| {
                let a = &self.atoms[i];
                let mut s = a.args.iter().filter(|&&x| bound[x]).count();
                if bound[a.out] {
                    s += 8;
                }
                if a.args.is_empty() {
                    s += 4;
                }
                s
            };
            let (pos, _) = remaining
                .iter()
                .enumerate()
                .max_by(|(pa, &a), (pb, &b)| score(a).cmp(&score(b)).then(pb.cmp(pa)))
                .unwrap();
            let atom = remaining.remove(pos);
            bound[self.atoms[atom].out] = true;
            for &x in &self.atoms[atom].args {
                bound[x] = true;
            }
            order.push(atom);
        }
        order
    }
}

enum Source<'a> {
    Materialized(Arc<CanonicalView>),
    OnTheFly {
        egraph: &'a EGraph,
        ctx: ContextId,
        base: Arc<CanonicalView>,
    },
}

impl Source<'_> {
    fn rows(&self, symbol: Symbol, out: Option<ClassId>) -> Vec<Row> {
        match self {
            Source::Materialized(view) => match out {
                Some(c) => view.rows_in_class(symbol, c).cloned().collect(),
                None => view.table(symbol).to_vec(),
            },
            Source::OnTheFly { egraph, ctx, base } => {
                let canon = |row: &Row| Row {
                    children: row
                        .children
                        .iter()
                        .map(|&c| egraph.find_unchecked(*ctx, c))
                        .collect(),
                    class: egraph.find_unchecked(*ctx, row.class),
                };
                match out {
                    // join the bottom table with the equivalence relation of ctx
                    Some(c) => egraph
                        .union_find()
                        .base_members(*ctx, c)
                        .into_iter()
                        .flat_map(|m| base.rows_in_class(symbol, m))
                        .map(canon)
                        .collect(),
                    None => base.table(symbol).iter().map(canon).collect(),
                }
            }
        }
    }

    fn classes(&self) -> Vec<ClassId> {
        match self {
            Source::Materialized(view) => view.classes().collect(),
            Source::OnTheFly { egraph, ctx, base } => base
                .classes()
                .map(|c| egraph.find_unchecked(*ctx, c))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        }
    }
}

struct Search<'q, 's> {
    query: &'q Query,
    plan: Vec<usize>,
    source: Source<'s>,
    classes: Option<Vec<ClassId>>,
    found: BTreeSet<(ClassId, Vec<ClassId>)>,
}

impl Search<'_, '_> {
    fn go(&mut self, depth: usize, binding: &mut Vec<Option<ClassId>>) {
        if depth == self.plan.len() {
            return self.finish(binding);
        }
        let atom = &self.query.atoms[self.plan[depth]];
        let rows = self.source.rows(atom.symbol, binding[atom.out]);
        let (args, out) = (atom.args.clone(), atom.out);
        let mut newly: Vec<usize> = Vec::new();
        for row in rows {
            let mut ok = true;
            for (&slot, &val) in args
                .iter()
                .chain([&out])
                .zip(row.children.iter().chain([&row.class]))
            {
                match binding[slot] {
                    Some(b) if b != val => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding[slot] = Some(val);
                        newly.push(slot);
                    }
                }
            }
            if ok {
                self.go(depth + 1, binding);
            }
            for s in newly.drain(..) {
                binding[s] = None;
            }
        }
    }

    /// Variables that appear in no atom range over every class.
    fn finish(&mut self, binding: &mut Vec<Option<ClassId>>) {
        match binding.iter().position(Option::is_none) {
            None => {
                let root = binding[self.query.root].unwrap();
                let vals = self
                    .query
                    .named
                    .iter()
                    .map(|&(_, s)| binding[s].unwrap())
                    .collect();
                self.found.insert((root, vals));
            }
            Some(free) => {
                let classes = self
                    .classes
                    .get_or_insert_with(|| self.source.classes())
                    .clone();
                for c in classes {
                    binding[free] = Some(c);
                    self.finish(binding);
                }
                binding[free] = None;
            }
        }
    }
}

/// Answers a compiled query at `ctx`. Matches are deduplicated modulo the
/// equivalence relation of `ctx` and sorted by canonical ids.
pub fn search(
    egraph: &EGraph,
    ctx: ContextId,
    query: &Query,
    strategy: Strategy,
) -> Result<Vec<Match>> {
    let source = match strategy {
        Strategy::Materialized => Source::Materialized(egraph.materialize(ctx)?),
        Strategy::OnTheFly => Source::OnTheFly {
            egraph,
            ctx,
            base: egraph.materialize(ContextId::BOTTOM)?,
        },
    };
    let mut s = Search {
        query,
        plan: query.plan(),
        source,
        classes: None,
        found: BTreeSet::new(),
    };
    let mut binding = vec![None; query.slots];
    s.go(0, &mut binding);
    Ok(s.found
        .into_iter()
        .map(|(root, vals)| Match {
            root,
            subst: query
                .named
                .iter()
                .map(|(n, _)| n.clone())
                .zip(vals)
                .collect(),
        })
        .collect())
}

/// Matches a single pattern at `ctx`.
pub fn ematch(
    egraph: &EGraph,
    ctx: ContextId,
    pattern: &Pattern,
    strategy: Strategy,
) -> Result<Vec<Match>> {
    let q = Query::compile(egraph, pattern, &[])?;
    search(egraph, ctx, &q, strategy)
}
