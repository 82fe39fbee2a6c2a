//! Finite context lattices.
//!
//! Contexts are opaque labels. Each one is declared above a set of previously
//! declared contexts (its covers), so declaration order is a topological order
//! and the cover graph is acyclic by construction. Index 0 is always the bottom
//! context, named `bot`.
//!
//! Greatest lower bounds are validated when a context is declared; least upper
//! bounds are only computed on demand.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense index of a declared context. `ContextId::BOTTOM` is index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ContextId(u32);

impl ContextId {
    pub const BOTTOM: ContextId = ContextId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Self {
        ContextId(index as u32)
    }

    pub fn is_bottom(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ctx{}", self.0)
    }
}

pub const BOTTOM_NAME: &str = "bot";

/// Fixed-width bitset over context indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ContextSet(Vec<u64>);

impl ContextSet {
    fn insert(&mut self, i: usize) {
        let word = i / 64;
        if self.0.len() <= word {
            self.0.resize(word + 1, 0);
        }
        self.0[word] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    fn union_with(&mut self, other: &ContextSet) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn intersection(&self, other: &ContextSet) -> ContextSet {
        ContextSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset(&self, other: &ContextSet) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.0.get(i).copied().unwrap_or(0) == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64)
                .filter(move |b| w & (1 << b) != 0)
                .map(move |b| wi * 64 + b)
        })
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    covers: Vec<ContextId>,
    /// Every context `a` with `a <= self`, including itself.
    down: ContextSet,
}

/// A finite lattice of contexts with bottom element `bot`.
#[derive(Debug, Clone)]
pub struct ContextLattice {
    elements: Vec<Element>,
    by_name: HashMap<String, ContextId>,
}

impl Default for ContextLattice {
    fn default() -> Self {
        Self::new()
    }
}

impl ContextLattice {
    /// A lattice containing only `bot`.
    pub fn new() -> Self {
        let mut down = ContextSet::default();
        down.insert(0);
        ContextLattice {
            elements: vec![Element {
                name: BOTTOM_NAME.to_string(),
                covers: Vec::new(),
                down,
            }],
            by_name: HashMap::from([(BOTTOM_NAME.to_string(), ContextId::BOTTOM)]),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Contexts in declaration order, which is a topological order of the cover graph.
    pub fn contexts(&self) -> impl Iterator<Item = ContextId> + '_ {
        (0..self.elements.len()).map(ContextId::from_index)
    }

    pub fn name(&self, c: ContextId) -> &str {
        &self.elements[c.index()].name
    }

    pub fn covers(&self, c: ContextId) -> &[ContextId] {
        &self.elements[c.index()].covers
    }

    pub fn lookup(&self, name: &str) -> Result<ContextId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownContext(name.to_string()))
    }

    pub fn check(&self, c: ContextId) -> Result<()> {
        if c.index() < self.elements.len() {
            Ok(())
        } else {
            Err(Error::UnknownContext(c.to_string()))
        }
    }

    /// Declares a new context strictly above every cover. An empty cover set
    /// means "directly above bottom".
    pub fn declare(&mut self, name: &str, covers: &[ContextId]) -> Result<ContextId> {
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateContext(name.to_string()));
        }
        for &c in covers {
            self.check(c)?;
        }
        let id = ContextId::from_index(self.elements.len());
        let mut covers: Vec<ContextId> = covers.to_vec();
        covers.sort();
        covers.dedup();
        if covers.is_empty() {
            covers.push(ContextId::BOTTOM);
        }
        let mut down = ContextSet::default();
        down.insert(id.index());
        for c in &covers {
            down.union_with(&self.elements[c.index()].down);
        }

        // Only pairs involving the new element can lack a glb: existing
        // down-sets are unchanged and the new element is below nothing.
        for (i, other) in self.elements.iter().enumerate() {
            let lower = down.intersection(&other.down);
            if greatest(&lower, &self.elements, Some(&down), id).is_none() {
                return Err(Error::NotALattice {
                    name: name.to_string(),
                    a: name.to_string(),
                    b: self.elements[i].name.clone(),
                });
            }
        }

        self.elements.push(Element {
            name: name.to_string(),
            covers,
            down,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn leq(&self, a: ContextId, b: ContextId) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.elements[b.index()].down.contains(a.index()))
    }

    /// Greatest lower bound. Always defined: `bot` is a lower bound of every
    /// pair and uniqueness is enforced by [`ContextLattice::declare`].
    pub fn meet(&self, a: ContextId, b: ContextId) -> Result<ContextId> {
        self.check(a)?;
        self.check(b)?;
        let lower = self.elements[a.index()]
            .down
            .intersection(&self.elements[b.index()].down);
        let m = greatest(&lower, &self.elements, None, ContextId::BOTTOM)
            .expect("glb uniqueness is validated at declaration");
        Ok(m)
    }

    /// Least upper bound among declared contexts.
    pub fn join(&self, a: ContextId, b: ContextId) -> Result<ContextId> {
        self.check(a)?;
        self.check(b)?;
        let upper: Vec<ContextId> = self
            .contexts()
            .filter(|&u| {
                let d = &self.elements[u.index()].down;
                d.contains(a.index()) && d.contains(b.index())
            })
            .collect();
        upper
            .iter()
            .copied()
            .find(|&m| {
                upper
                    .iter()
                    .all(|&u| self.elements[u.index()].down.contains(m.index()))
            })
            .ok_or_else(|| Error::NoUpperBound(self.name(a).to_string(), self.name(b).to_string()))
    }

    /// `{ c' | c <= c' }` in declaration order.
    pub fn upset(&self, c: ContextId) -> Result<Vec<ContextId>> {
        self.check(c)?;
        Ok(self
            .contexts()
            .filter(|u| self.elements[u.index()].down.contains(c.index()))
            .collect())
    }

    /// `{ c' | c' <= c }` in declaration order.
    pub fn downset(&self, c: ContextId) -> Result<Vec<ContextId>> {
        self.check(c)?;
        Ok(self.elements[c.index()]
            .down
            .iter()
            .map(ContextId::from_index)
            .collect())
    }
}

/// The element `m` of `set` with `set ⊆ down(m)`, if any. `pending` supplies the
/// down-set of an element that is not yet stored in `elements`.
fn greatest(
    set: &ContextSet,
    elements: &[Element],
    pending: Option<&ContextSet>,
    pending_id: ContextId,
) -> Option<ContextId> {
    set.iter().map(ContextId::from_index).find(|m| {
        let down = match pending {
            Some(d) if *m == pending_id => d,
            _ => &elements[m.index()].down,
        };
        set.is_subset(down)
    })
}
