//! Canonicalized per-context databases, factoring maps between contexts, and
//! the materialize-or-join strategy choice for e-matching.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::egraph::{ClassId, EGraph, ENode, Stats, Symbol};
use crate::error::{Error, Result};
use crate::lattice::ContextId;

/// One row of a function table: `symbol(children...) = class`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Row {
    pub children: Vec<ClassId>,
    pub class: ClassId,
}

/// The canonical database of one context. Immutable once built.
#[derive(Debug, Clone)]
pub struct CanonicalView {
    context: ContextId,
    version: u64,
    classes: BTreeMap<ClassId, Vec<ENode>>,
    node_class: HashMap<ENode, ClassId>,
    tables: HashMap<Symbol, Vec<Row>>,
    by_class: HashMap<(Symbol, ClassId), Vec<usize>>,
}

impl CanonicalView {
    pub(crate) fn new(
        context: ContextId,
        version: u64,
        classes: BTreeMap<ClassId, BTreeSet<ENode>>,
    ) -> Self {
        let mut node_class = HashMap::new();
        let mut tables: HashMap<Symbol, Vec<Row>> = HashMap::new();
        let mut by_class: HashMap<(Symbol, ClassId), Vec<usize>> = HashMap::new();
        let classes: BTreeMap<ClassId, Vec<ENode>> = classes
            .into_iter()
            .map(|(c, nodes)| (c, nodes.into_iter().collect()))
            .collect();
        for (&class, nodes) in &classes {
            for node in nodes {
                node_class.insert(node.clone(), class);
                let table = tables.entry(node.symbol).or_default();
                by_class
                    .entry((node.symbol, class))
                    .or_default()
                    .push(table.len());
                table.push(Row {
                    children: node.children.clone(),
                    class,
                });
            }
        }
        CanonicalView {
            context,
            version,
            classes,
            node_class,
            tables,
            by_class,
        }
    }

    pub fn context(&self) -> ContextId {
        self.context
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Canonical class ids, ascending.
    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.classes.keys().copied()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_class.len()
    }

    pub fn stats(&self) -> Stats {
        Stats {
            classes: self.class_count(),
            nodes: self.node_count(),
        }
    }

    /// Deduplicated canonical nodes of a canonical class.
    pub fn nodes(&self, class: ClassId) -> &[ENode] {
        self.classes.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, &[ENode])> {
        self.classes.iter().map(|(&c, n)| (c, n.as_slice()))
    }

    /// Class of a node whose children are canonical in this view.
    pub fn lookup(&self, node: &ENode) -> Option<ClassId> {
        self.node_class.get(node).copied()
    }

    pub fn table(&self, symbol: Symbol) -> &[Row] {
        self.tables.get(&symbol).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rows_in_class(&self, symbol: Symbol, class: ClassId) -> impl Iterator<Item = &Row> {
        let table = self.table(symbol);
        self.by_class
            .get(&(symbol, class))
            .into_iter()
            .flatten()
            .map(move |&i| &table[i])
    }
}

/// The factoring map `q` from the classes of a finer context to those of a
/// coarser one, satisfying `find(coarse, a) = q(find(fine, a))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMap {
    pub fine: ContextId,
    pub coarse: ContextId,
    pub map: BTreeMap<ClassId, ClassId>,
}

impl QMap {
    pub fn apply(&self, fine_class: ClassId) -> Option<ClassId> {
        self.map.get(&fine_class).copied()
    }

    /// Fine classes grouped by their image.
    pub fn fibers(&self) -> BTreeMap<ClassId, Vec<ClassId>> {
        let mut out: BTreeMap<ClassId, Vec<ClassId>> = BTreeMap::new();
        for (&f, &c) in &self.map {
            out.entry(c).or_default().push(f);
        }
        out
    }
}

/// How e-matching reads a context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Match against the context's materialized canonical view.
    Materialized,
    /// Match against the bottom store, canonicalizing through the context's
    /// overlay while joining.
    OnTheFly,
}

pub const DEFAULT_MATERIALIZE_THRESHOLD: usize = 16;

impl EGraph {
    pub fn qmap(&self, fine: ContextId, coarse: ContextId) -> Result<QMap> {
        if !self.lattice().leq(fine, coarse)? {
            return Err(Error::NotBelow {
                lo: self.context_name(fine).to_string(),
                hi: self.context_name(coarse).to_string(),
            });
        }
        let view = self.materialize(fine)?;
        let map = view
            .classes()
            .map(|c| (c, self.find_unchecked(coarse, c)))
            .collect();
        Ok(QMap { fine, coarse, map })
    }

    /// Materialize when the context's overlay merges at least `threshold`
    /// bottom classes; otherwise join against the bottom store.
    pub fn choose_strategy(&self, ctx: ContextId, threshold: usize) -> Strategy {
        if self.union_find().overlay_delta(ctx) >= threshold {
            Strategy::Materialized
        } else {
            Strategy::OnTheFly
        }
    }
}
