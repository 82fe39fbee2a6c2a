//! The e-graph: one global, hash-consed node store whose equalities are
//! contextual.
//!
//! Every e-node gets a [`NodeId`] when it is first added, and that id doubles
//! as its class id. Classes are merged in a [`LayeredUnionFind`], so a class
//! id is only canonical relative to a context. The node store is keyed by
//! bottom-canonical children; per-context canonical databases are computed on
//! demand by [`EGraph::materialize`].
//!
//! Like other e-graph implementations, congruence is restored lazily: call
//! [`EGraph::rebuild`] after a batch of merges.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{ContextId, ContextLattice};
use crate::layered::{LayeredUnionFind, Merge, NodeId};
use crate::term::Term;
use crate::views::CanonicalView;

/// Classes are named by the id of one of their nodes.
pub type ClassId = NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Symbol(u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionSymbol {
    pub name: String,
    pub arity: usize,
}

/// A function symbol applied to child classes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ENode {
    pub symbol: Symbol,
    pub children: Vec<ClassId>,
}

impl ENode {
    pub fn new(symbol: Symbol, children: Vec<ClassId>) -> Self {
        ENode { symbol, children }
    }

    pub fn leaf(symbol: Symbol) -> Self {
        ENode {
            symbol,
            children: Vec::new(),
        }
    }
}

/// Why a union was performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnionCause {
    User,
    Rule(String),
    Congruence,
    Scope,
    Intersection,
    LambdaLift,
    Enforcer,
}

/// One union that changed the relation at `ctx`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionRecord {
    pub ctx: ContextId,
    pub a: ClassId,
    pub b: ClassId,
    pub cause: UnionCause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub classes: usize,
    pub nodes: usize,
}

pub struct EGraph {
    symbols: Vec<FunctionSymbol>,
    symbol_index: HashMap<(String, usize), Symbol>,
    uf: LayeredUnionFind,
    nodes: Vec<ENode>,
    memo: HashMap<ENode, NodeId>,
    dirty: BTreeSet<ContextId>,
    roots: Vec<ClassId>,
    log: Vec<UnionRecord>,
    version: u64,
    views: Mutex<HashMap<ContextId, Arc<CanonicalView>>>,
}

impl Default for EGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for EGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EGraph")
            .field("symbols", &self.symbols.len())
            .field("nodes", &self.nodes.len())
            .field("contexts", &self.uf.lattice().len())
            .field("version", &self.version)
            .finish()
    }
}

impl EGraph {
    pub fn new() -> Self {
        EGraph {
            symbols: Vec::new(),
            symbol_index: HashMap::new(),
            uf: LayeredUnionFind::new(),
            nodes: Vec::new(),
            memo: HashMap::new(),
            dirty: BTreeSet::new(),
            roots: Vec::new(),
            log: Vec::new(),
            version: 0,
            views: Mutex::new(HashMap::new()),
        }
    }

    // ---- symbols -------------------------------------------------------

    pub fn declare_function(&mut self, name: &str, arity: usize) -> Result<Symbol> {
        let key = (name.to_string(), arity);
        if self.symbol_index.contains_key(&key) {
            return Err(Error::DuplicateFunction {
                name: name.to_string(),
                arity,
            });
        }
        let sym = Symbol(self.symbols.len() as u32);
        self.symbols.push(FunctionSymbol {
            name: name.to_string(),
            arity,
        });
        self.symbol_index.insert(key, sym);
        Ok(sym)
    }

    pub fn symbol(&self, name: &str, arity: usize) -> Result<Symbol> {
        self.symbol_index
            .get(&(name.to_string(), arity))
            .copied()
            .ok_or_else(|| {
                // report an arity mismatch when the name exists with other arities
                match self.symbols.iter().find(|s| s.name == name) {
                    Some(s) => Error::ArityMismatch {
                        name: name.to_string(),
                        expected: s.arity,
                        got: arity,
                    },
                    None => Error::UnknownSymbol {
                        name: name.to_string(),
                        arity,
                    },
                }
            })
    }

    pub fn symbol_info(&self, sym: Symbol) -> &FunctionSymbol {
        &self.symbols[sym.index()]
    }

    pub fn symbol_name(&self, sym: Symbol) -> &str {
        &self.symbols[sym.index()].name
    }

    pub fn symbols(&self) -> impl Iterator<Item = (Symbol, &FunctionSymbol)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (Symbol(i as u32), s))
    }

    // ---- contexts ------------------------------------------------------

    pub fn declare_context(&mut self, name: &str, covers: &[ContextId]) -> Result<ContextId> {
        let id = self.uf.declare_context(name, covers)?;
        // a context with several covers joins their relations, which can
        // expose new congruences
        self.dirty.insert(id);
        self.version += 1;
        Ok(id)
    }

    pub fn lattice(&self) -> &ContextLattice {
        self.uf.lattice()
    }

    pub fn context(&self, name: &str) -> Result<ContextId> {
        self.uf.lattice().lookup(name)
    }

    pub fn context_name(&self, ctx: ContextId) -> &str {
        self.uf.lattice().name(ctx)
    }

    pub fn union_find(&self) -> &LayeredUnionFind {
        &self.uf
    }

    // ---- nodes ---------------------------------------------------------

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &ENode {
        &self.nodes[id.index()]
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Classes interned through [`EGraph::intern`]: the program's top-level terms.
    pub fn roots(&self) -> &[ClassId] {
        &self.roots
    }

    pub fn union_log(&self) -> &[UnionRecord] {
        &self.log
    }

    fn canonicalize(&self, ctx: ContextId, node: &ENode) -> ENode {
        ENode {
            symbol: node.symbol,
            children: node
                .children
                .iter()
                .map(|&c| self.uf.find_unchecked(ctx, c))
                .collect(),
        }
    }

    /// Adds a node (or finds its existing copy) and returns its bottom class.
    pub fn add_node(&mut self, node: ENode) -> Result<ClassId> {
        let info = self
            .symbols
            .get(node.symbol.index())
            .ok_or_else(|| Error::UnknownSymbol {
                name: format!("#{}", node.symbol.index()),
                arity: node.children.len(),
            })?;
        if info.arity != node.children.len() {
            return Err(Error::ArityMismatch {
                name: info.name.clone(),
                expected: info.arity,
                got: node.children.len(),
            });
        }
        for &c in &node.children {
            if c.index() >= self.nodes.len() {
                return Err(Error::UnknownNode(c.raw()));
            }
        }
        Ok(self.add_node_unchecked(node))
    }

    pub(crate) fn add_node_unchecked(&mut self, node: ENode) -> ClassId {
        let canon = self.canonicalize(ContextId::BOTTOM, &node);
        if let Some(&id) = self.memo.get(&canon) {
            return self.uf.find_unchecked(ContextId::BOTTOM, id);
        }
        let id = self.uf.make_set();
        debug_assert_eq!(id.index(), self.nodes.len());
        self.nodes.push(canon.clone());
        self.memo.insert(canon, id);
        self.version += 1;
        // a new node may be congruent to an old one in some context
        self.dirty.extend(self.uf.lattice().contexts());
        id
    }

    /// Adds a term without marking it as a program root.
    pub fn add_term(&mut self, term: &Term) -> Result<ClassId> {
        let children = term
            .args
            .iter()
            .map(|a| self.add_term(a))
            .collect::<Result<Vec<_>>>()?;
        let sym = self.symbol(&term.head, term.args.len())?;
        Ok(self.add_node_unchecked(ENode::new(sym, children)))
    }

    /// Adds a top-level term and returns its bottom representative.
    pub fn intern(&mut self, term: &Term) -> Result<ClassId> {
        let id = self.add_term(term)?;
        if !self.roots.contains(&id) {
            self.roots.push(id);
        }
        Ok(id)
    }

    /// Looks a term up in the canonical view of `ctx` without adding anything.
    pub fn lookup(&self, ctx: ContextId, term: &Term) -> Result<Option<ClassId>> {
        let view = self.materialize(ctx)?;
        self.lookup_in(&view, term)
    }

    fn lookup_in(&self, view: &CanonicalView, term: &Term) -> Result<Option<ClassId>> {
        let mut children = Vec::with_capacity(term.args.len());
        for a in &term.args {
            match self.lookup_in(view, a)? {
                Some(c) => children.push(c),
                None => return Ok(None),
            }
        }
        let sym = self.symbol(&term.head, term.args.len())?;
        Ok(view.lookup(&ENode::new(sym, children)))
    }

    // ---- equivalence ---------------------------------------------------

    pub fn find(&self, ctx: ContextId, id: ClassId) -> Result<ClassId> {
        self.uf.find(ctx, id)
    }

    pub(crate) fn find_unchecked(&self, ctx: ContextId, id: ClassId) -> ClassId {
        self.uf.find_unchecked(ctx, id)
    }

    pub fn equiv(&self, ctx: ContextId, a: ClassId, b: ClassId) -> Result<bool> {
        self.uf.equiv(ctx, a, b)
    }

    pub fn partition(&self, ctx: ContextId) -> Result<Vec<Vec<ClassId>>> {
        self.uf.partition(ctx)
    }

    /// Asserts `a = b` at `ctx` (and so at every context above it).
    pub fn merge(&mut self, ctx: ContextId, a: ClassId, b: ClassId) -> Result<ClassId> {
        Ok(self.merge_with(ctx, a, b, UnionCause::User)?.root)
    }

    pub fn merge_with(
        &mut self,
        ctx: ContextId,
        a: ClassId,
        b: ClassId,
        cause: UnionCause,
    ) -> Result<Merge> {
        let m = self.uf.union(ctx, a, b)?;
        if m.changed {
            self.version += 1;
            self.dirty.extend(self.uf.lattice().upset(ctx)?);
            self.log.push(UnionRecord { ctx, a, b, cause });
        }
        Ok(m)
    }

    /// Applies `φ(lo) ← φ(lo) ⊔ (φ(c1) ⊓ φ(c2))`.
    pub fn intersect_into(&mut self, lo: ContextId, c1: ContextId, c2: ContextId) -> Result<usize> {
        let before: Vec<ClassId> = (0..self.nodes.len())
            .map(|i| self.uf.find_unchecked(lo, NodeId::from_index(i)))
            .collect();
        let n = self.uf.intersect_into(lo, c1, c2)?;
        if n > 0 {
            self.version += 1;
            self.dirty.extend(self.uf.lattice().upset(lo)?);
            // record one entry per class that got absorbed
            let mut seen = BTreeSet::new();
            for (i, &old) in before.iter().enumerate() {
                let new = self.uf.find_unchecked(lo, NodeId::from_index(i));
                if old != new && seen.insert(old) {
                    self.log.push(UnionRecord {
                        ctx: lo,
                        a: old,
                        b: new,
                        cause: UnionCause::Intersection,
                    });
                }
            }
        }
        Ok(n)
    }

    /// Restores congruence in every context, bottom-up. Returns the number of
    /// unions performed.
    pub fn rebuild(&mut self) -> usize {
        let mut repairs = 0;
        while let Some(ctx) = self.dirty.pop_first() {
            repairs += if ctx.is_bottom() {
                self.repair_bottom()
            } else {
                self.repair_context(ctx)
            };
        }
        self.uf.compress();
        repairs
    }

    /// Re-keys the node store under bottom and merges colliding nodes.
    fn repair_bottom(&mut self) -> usize {
        let mut repairs = 0;
        let mut memo: HashMap<ENode, NodeId> = HashMap::with_capacity(self.memo.len());
        for i in 0..self.nodes.len() {
            let id = NodeId::from_index(i);
            let canon = self.canonicalize(ContextId::BOTTOM, &self.nodes[i]);
            match memo.get(&canon) {
                Some(&other) => {
                    let m = self
                        .merge_with(ContextId::BOTTOM, other, id, UnionCause::Congruence)
                        .expect("node ids are valid");
                    repairs += m.changed as usize;
                }
                None => {
                    memo.insert(canon, id);
                }
            }
        }
        self.memo = memo;
        repairs
    }

    fn repair_context(&mut self, ctx: ContextId) -> usize {
        let mut repairs = 0;
        let mut seen: HashMap<ENode, NodeId> = HashMap::with_capacity(self.memo.len());
        for id in self.bottom_node_ids() {
            let canon = self.canonicalize(ctx, &self.nodes[id.index()]);
            match seen.get(&canon) {
                Some(&other) => {
                    let m = self
                        .merge_with(ctx, other, id, UnionCause::Congruence)
                        .expect("node ids are valid");
                    repairs += m.changed as usize;
                }
                None => {
                    seen.insert(canon, id);
                }
            }
        }
        repairs
    }

    /// Ids of the distinct bottom-canonical nodes, ascending.
    pub(crate) fn bottom_node_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self.memo.values().copied().collect();
        ids.sort_unstable();
        ids
    }

    /// The bottom-canonical node store, ascending by node id.
    pub fn bottom_nodes(&self) -> Vec<(NodeId, ENode)> {
        self.bottom_node_ids()
            .into_iter()
            .map(|id| {
                (
                    id,
                    self.canonicalize(ContextId::BOTTOM, &self.nodes[id.index()]),
                )
            })
            .collect()
    }

    pub fn is_clean(&self) -> bool {
        self.dirty.is_empty()
    }

    // ---- canonical views -----------------------------------------------

    /// The canonicalized database of `ctx`: every node with children replaced
    /// by their `ctx` representatives, deduplicated per class. Cached until
    /// the next mutation.
    pub fn materialize(&self, ctx: ContextId) -> Result<Arc<CanonicalView>> {
        self.uf.lattice().check(ctx)?;
        let mut cache = self.views.lock().expect("view cache poisoned");
        if let Some(v) = cache.get(&ctx) {
            if v.version() == self.version {
                return Ok(Arc::clone(v));
            }
        }
        let view = Arc::new(self.build_view(ctx));
        cache.insert(ctx, Arc::clone(&view));
        Ok(view)
    }

    fn build_view(&self, ctx: ContextId) -> CanonicalView {
        let mut classes: BTreeMap<ClassId, BTreeSet<ENode>> = BTreeMap::new();
        for id in self.bottom_node_ids() {
            let canon = self.canonicalize(ctx, &self.nodes[id.index()]);
            classes
                .entry(self.uf.find_unchecked(ctx, id))
                .or_default()
                .insert(canon);
        }
        CanonicalView::new(ctx, self.version, classes)
    }

    pub fn class_nodes(&self, ctx: ContextId, class: ClassId) -> Result<Vec<ENode>> {
        let rep = self.find(ctx, class)?;
        let view = self.materialize(ctx)?;
        Ok(view.nodes(rep).to_vec())
    }

    pub fn stats(&self, ctx: ContextId) -> Result<Stats> {
        Ok(self.materialize(ctx)?.stats())
    }

    /// Renders a node as `(name c1 c2 ...)` using class ids for children.
    pub fn render_node(&self, node: &ENode) -> String {
        let name = self.symbol_name(node.symbol);
        if node.children.is_empty() {
            return name.to_string();
        }
        let kids: Vec<String> = node.children.iter().map(|c| format!("#{c}")).collect();
        format!("({name} {})", kids.join(" "))
    }
}
