//! Cost-based extraction of a concrete term from a class, in a given context.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use ordered_float::OrderedFloat;

use crate::egraph::{ClassId, EGraph, ENode};
use crate::error::{Error, Result};
use crate::lattice::ContextId;
use crate::term::Term;

/// Per-symbol node costs; unlisted symbols cost `default` (1 = tree size).
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    default: f64,
    costs: HashMap<String, f64>,
}

impl Default for CostModel {
    fn default() -> Self {
        Self::tree_size()
    }
}

impl CostModel {
    pub fn tree_size() -> Self {
        CostModel {
            default: 1.0,
            costs: HashMap::new(),
        }
    }

    pub fn set(&mut self, symbol: &str, cost: f64) -> Result<()> {
        if !cost.is_finite() || cost < 0.0 {
            return Err(Error::InvalidCost(symbol.to_string()));
        }
        self.costs.insert(symbol.to_string(), cost);
        Ok(())
    }

    pub fn with(mut self, symbol: &str, cost: f64) -> Result<Self> {
        self.set(symbol, cost)?;
        Ok(self)
    }

    pub fn cost(&self, symbol: &str) -> f64 {
        self.costs.get(symbol).copied().unwrap_or(self.default)
    }

    pub fn term_cost(&self, term: &Term) -> f64 {
        self.cost(&term.head) + term.args.iter().map(|a| self.term_cost(a)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractResult {
    pub term: Term,
    pub cost: f64,
}

type Candidate = Reverse<(OrderedFloat<f64>, String, Vec<ClassId>, ClassId, usize)>;

/// Extracts a minimum-cost term of `class` over the canonical view of `ctx`,
/// never using a node whose symbol is named `forbid`.
///
/// Classes are finalized in cost order (a Knuth-style generalization of
/// Dijkstra), so a node only becomes a candidate once all of its children
/// have a final cost; the chosen derivation is therefore acyclic. Ties go to
/// the lexicographically smaller (symbol name, children ids).
pub fn extract(
    egraph: &EGraph,
    ctx: ContextId,
    class: ClassId,
    model: &CostModel,
    forbid: Option<&str>,
) -> Result<ExtractResult> {
    let root = egraph.find(ctx, class)?;
    let view = egraph.materialize(ctx)?;

    let mut nodes: Vec<(ClassId, &ENode)> = Vec::new();
    for (c, ns) in view.iter() {
        for n in ns {
            if forbid != Some(egraph.symbol_name(n.symbol)) {
                nodes.push((c, n));
            }
        }
    }
    let mut parents: HashMap<ClassId, Vec<usize>> = HashMap::new();
    let mut pending: Vec<usize> = Vec::with_capacity(nodes.len());
    for (i, (_, n)) in nodes.iter().enumerate() {
        let mut kids = n.children.clone();
        kids.sort_unstable();
        kids.dedup();
        for &k in &kids {
            parents.entry(k).or_default().push(i);
        }
        pending.push(kids.len());
    }

    let mut best: HashMap<ClassId, (f64, usize)> = HashMap::new();
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
    let push =
        |heap: &mut BinaryHeap<Candidate>, best: &HashMap<ClassId, (f64, usize)>, i: usize| {
            let (c, n) = nodes[i];
            let name = egraph.symbol_name(n.symbol);
            let cost = model.cost(name) + n.children.iter().map(|k| best[k].0).sum::<f64>();
            heap.push(Reverse((
                OrderedFloat(cost),
                name.to_string(),
                n.children.clone(),
                c,
                i,
            )));
        };
    for (i, _) in pending.iter().enumerate().filter(|(_, &n)| n == 0) {
        push(&mut heap, &best, i);
    }
    while let Some(Reverse((cost, _, _, c, i))) = heap.pop() {
        if best.contains_key(&c) {
            continue;
        }
        best.insert(c, (cost.0, i));
        if c == root {
            break;
        }
        for &p in parents.get(&c).into_iter().flatten() {
            pending[p] -= 1;
            if pending[p] == 0 {
                push(&mut heap, &best, p);
            }
        }
    }

    let &(cost, _) = best.get(&root).ok_or(Error::NoFiniteTerm(root.raw()))?;
    let term = build(egraph, &nodes, &best, root);
    Ok(ExtractResult { term, cost })
}

fn build(
    egraph: &EGraph,
    nodes: &[(ClassId, &ENode)],
    best: &HashMap<ClassId, (f64, usize)>,
    class: ClassId,
) -> Term {
    let (_, node) = nodes[best[&class].1];
    Term::app(
        egraph.symbol_name(node.symbol),
        node.children
            .iter()
            .map(|&k| build(egraph, nodes, best, k))
            .collect(),
    )
}
