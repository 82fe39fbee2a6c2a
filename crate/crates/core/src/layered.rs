//! A context-annotated union-find.
//!
//! The bottom relation is an ordinary parent forest. Every other context keeps
//! a sparse overlay over bottom representatives: only bottom classes that are
//! merged with something else at that context appear in it. An overlay for
//! context `c` holds the closure of every contextual union recorded at a
//! context `d <= c`, so looking up `find(c, x)` is a bottom lookup followed by
//! one overlay probe.
//!
//! Representatives are always the smallest id of their class, so the
//! observable state does not depend on the order in which unions arrive.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{ContextId, ContextLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Self {
        NodeId(index as u32)
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of a union: the class representative afterwards, and whether the
/// relation at the requested context actually grew.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Merge {
    pub root: NodeId,
    pub changed: bool,
}

/// Partition of bottom representatives for one non-bottom context.
#[derive(Debug, Clone, Default)]
struct Overlay {
    leader: HashMap<NodeId, NodeId>,
    groups: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl Overlay {
    fn find(&self, rep: NodeId) -> NodeId {
        self.leader.get(&rep).copied().unwrap_or(rep)
    }

    fn members(&self, leader: NodeId) -> Vec<NodeId> {
        match self.groups.get(&leader) {
            Some(g) => g.iter().copied().collect(),
            None => vec![leader],
        }
    }

    fn take_group(&mut self, leader: NodeId) -> BTreeSet<NodeId> {
        self.groups
            .remove(&leader)
            .unwrap_or_else(|| BTreeSet::from([leader]))
    }

    fn install(&mut self, group: BTreeSet<NodeId>) {
        if group.len() < 2 {
            for m in &group {
                self.leader.remove(m);
            }
            return;
        }
        let leader = *group.first().unwrap();
        for &m in &group {
            self.leader.insert(m, leader);
        }
        self.groups.insert(leader, group);
    }

    fn union(&mut self, a: NodeId, b: NodeId) -> bool {
        let (la, lb) = (self.find(a), self.find(b));
        if la == lb {
            return false;
        }
        let mut group = self.take_group(la);
        group.extend(self.take_group(lb));
        self.install(group);
        true
    }

    /// `loser` stopped being a bottom representative; it now lives inside
    /// `winner`'s bottom class.
    fn rebase(&mut self, loser: NodeId, winner: NodeId) {
        if !self.leader.contains_key(&loser) {
            return;
        }
        self.union(loser, winner);
        let l = self.find(loser);
        let mut group = self.take_group(l);
        group.remove(&loser);
        self.leader.remove(&loser);
        self.install(group);
    }

    fn delta(&self) -> usize {
        self.groups.values().map(|g| g.len() - 1).sum()
    }
}

/// Realizes an order-preserving map from contexts to equivalence relations on
/// [`NodeId`]s.
#[derive(Debug, Clone, Default)]
pub struct LayeredUnionFind {
    lattice: ContextLattice,
    parent: Vec<NodeId>,
    overlays: Vec<Overlay>,
}

impl LayeredUnionFind {
    pub fn new() -> Self {
        Self::with_lattice(ContextLattice::new())
    }

    pub fn with_lattice(lattice: ContextLattice) -> Self {
        let overlays = vec![Overlay::default(); lattice.len()];
        LayeredUnionFind {
            lattice,
            parent: Vec::new(),
            overlays,
        }
    }

    pub fn lattice(&self) -> &ContextLattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Declares a context; its relation starts as the join of its covers'.
    pub fn declare_context(&mut self, name: &str, covers: &[ContextId]) -> Result<ContextId> {
        let id = self.lattice.declare(name, covers)?;
        let mut overlay = Overlay::default();
        for &c in self.lattice.covers(id) {
            for group in self.overlays[c.index()].groups.values() {
                let mut it = group.iter();
                let first = *it.next().unwrap();
                for &m in it {
                    overlay.union(first, m);
                }
            }
        }
        self.overlays.push(overlay);
        Ok(id)
    }

    pub fn make_set(&mut self) -> NodeId {
        let id = NodeId::from_index(self.parent.len());
        self.parent.push(id);
        id
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if id.index() < self.parent.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(id.raw()))
        }
    }

    fn base_root(&self, mut id: NodeId) -> NodeId {
        while self.parent[id.index()] != id {
            id = self.parent[id.index()];
        }
        id
    }

    fn base_root_compress(&mut self, id: NodeId) -> NodeId {
        let root = self.base_root(id);
        let mut cur = id;
        while self.parent[cur.index()] != root && cur != root {
            let next = self.parent[cur.index()];
            self.parent[cur.index()] = root;
            cur = next;
        }
        root
    }

    /// Points every node directly at its bottom root.
    pub fn compress(&mut self) {
        for i in 0..self.parent.len() {
            let r = self.base_root(NodeId::from_index(i));
            self.parent[i] = r;
        }
    }

    pub fn find(&self, ctx: ContextId, id: NodeId) -> Result<NodeId> {
        self.lattice.check(ctx)?;
        self.check_node(id)?;
        Ok(self.find_unchecked(ctx, id))
    }

    pub(crate) fn find_unchecked(&self, ctx: ContextId, id: NodeId) -> NodeId {
        let r = self.base_root(id);
        if ctx.is_bottom() {
            r
        } else {
            self.overlays[ctx.index()].find(r)
        }
    }

    pub fn equiv(&self, ctx: ContextId, a: NodeId, b: NodeId) -> Result<bool> {
        Ok(self.find(ctx, a)? == self.find(ctx, b)?)
    }

    /// Merges the classes of `a` and `b` at `ctx` and every context above it.
    pub fn union(&mut self, ctx: ContextId, a: NodeId, b: NodeId) -> Result<Merge> {
        self.lattice.check(ctx)?;
        self.check_node(a)?;
        self.check_node(b)?;
        let ra = self.base_root_compress(a);
        let rb = self.base_root_compress(b);
        if ctx.is_bottom() {
            if ra == rb {
                return Ok(Merge {
                    root: ra,
                    changed: false,
                });
            }
            let (winner, loser) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[loser.index()] = winner;
            for overlay in self.overlays.iter_mut().skip(1) {
                overlay.rebase(loser, winner);
            }
            return Ok(Merge {
                root: winner,
                changed: true,
            });
        }
        let changed = self.overlays[ctx.index()].union(ra, rb);
        if changed {
            for up in self.lattice.upset(ctx)? {
                if up != ctx {
                    self.overlays[up.index()].union(ra, rb);
                }
            }
        }
        Ok(Merge {
            root: self.overlays[ctx.index()].find(ra),
            changed,
        })
    }

    /// Replaces the relation at `lo` by `φ(lo) ⊔ (φ(c1) ⊓ φ(c2))`: ids that
    /// agree at both `c1` and `c2` become equal at `lo` (and above).
    /// Returns the number of unions that changed the relation at `lo`.
    pub fn intersect_into(&mut self, lo: ContextId, c1: ContextId, c2: ContextId) -> Result<usize> {
        for c in [c1, c2] {
            if !self.lattice.leq(lo, c)? {
                return Err(Error::NotBelow {
                    lo: self.lattice.name(lo).to_string(),
                    hi: self.lattice.name(c).to_string(),
                });
            }
        }
        // Ids sharing a bottom root share both keys, so bottom roots suffice.
        let mut groups: BTreeMap<(NodeId, NodeId), Vec<NodeId>> = BTreeMap::new();
        for i in 0..self.parent.len() {
            let id = NodeId::from_index(i);
            if self.parent[i] != id {
                continue;
            }
            let key = (self.find_unchecked(c1, id), self.find_unchecked(c2, id));
            groups.entry(key).or_default().push(id);
        }
        let mut count = 0;
        for members in groups.values().filter(|m| m.len() > 1) {
            for &m in &members[1..] {
                if self.union(lo, members[0], m)?.changed {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// The quotient set at `ctx`: blocks sorted by representative, each block sorted.
    pub fn partition(&self, ctx: ContextId) -> Result<Vec<Vec<NodeId>>> {
        self.lattice.check(ctx)?;
        let mut blocks: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for i in 0..self.parent.len() {
            let id = NodeId::from_index(i);
            blocks
                .entry(self.find_unchecked(ctx, id))
                .or_default()
                .push(id);
        }
        Ok(blocks.into_values().collect())
    }

    /// Bottom representatives making up the class of `rep` at `ctx`.
    pub fn base_members(&self, ctx: ContextId, rep: NodeId) -> Vec<NodeId> {
        let r = self.find_unchecked(ctx, rep);
        if ctx.is_bottom() {
            vec![r]
        } else {
            self.overlays[ctx.index()].members(r)
        }
    }

    /// Number of bottom classes merged away at `ctx` beyond the bottom relation.
    pub fn overlay_delta(&self, ctx: ContextId) -> usize {
        if ctx.is_bottom() {
            0
        } else {
            self.overlays[ctx.index()].delta()
        }
    }

    /// Non-trivial overlay groups at `ctx` (bottom representatives), by leader.
    pub fn overlay_groups(&self, ctx: ContextId) -> Vec<Vec<NodeId>> {
        if ctx.is_bottom() {
            return Vec::new();
        }
        self.overlays[ctx.index()]
            .groups
            .values()
            .map(|g| g.iter().copied().collect())
            .collect()
    }
}
