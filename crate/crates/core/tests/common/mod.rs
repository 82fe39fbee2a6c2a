//! Independent reference models used by the integration and acceptance tests.
//! Nothing here calls into the engine's algorithms; relations are plain
//! boolean matrices closed by brute force.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use ctxsat::{
    ClassId, ContextId, ContextLattice, EGraph, ENode, LayeredUnionFind, NodeId, Pattern,
};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rel = Vec<Vec<bool>>;

pub fn identity(n: usize) -> Rel {
    (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect()
}

pub fn close(r: &mut Rel) {
    let n = r.len();
    for i in 0..n {
        for j in 0..n {
            if r[i][j] {
                r[j][i] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
}

/// Blocks sorted by smallest member, members ascending.
pub fn blocks(r: &Rel) -> Vec<Vec<usize>> {
    let n = r.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let b: Vec<usize> = (0..n).filter(|&j| r[i][j]).collect();
        for &j in &b {
            seen[j] = true;
        }
        out.push(b);
    }
    out
}

pub fn as_indices(p: &[Vec<NodeId>]) -> Vec<Vec<usize>> {
    p.iter()
        .map(|b| b.iter().map(|x| x.index()).collect())
        .collect()
}

/// A finite poset given by cover lists, with `0` as bottom.
#[derive(Debug, Clone)]
pub struct NaivePoset {
    pub down: Vec<BTreeSet<usize>>,
}

impl NaivePoset {
    pub fn new() -> Self {
        NaivePoset {
            down: vec![BTreeSet::from([0])],
        }
    }

    pub fn len(&self) -> usize {
        self.down.len()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.down[b].contains(&a)
    }

    fn down_of(&self, covers: &[usize]) -> BTreeSet<usize> {
        let mut d = BTreeSet::from([self.len()]);
        let covers: Vec<usize> = if covers.is_empty() {
            vec![0]
        } else {
            covers.to_vec()
        };
        for c in covers {
            d.extend(self.down[c].iter().copied());
        }
        d
    }

    /// Whether adding an element above `covers` keeps every pair with a
    /// greatest lower bound.
    pub fn accepts(&self, covers: &[usize]) -> bool {
        let mut down = self.down.clone();
        down.push(self.down_of(covers));
        let n = down.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                let lower: Vec<usize> = (0..n)
                    .filter(|&x| down[a].contains(&x) && down[b].contains(&x))
                    .collect();
                lower
                    .iter()
                    .any(|&m| lower.iter().all(|&x| down[m].contains(&x)))
            })
        })
    }

    pub fn push(&mut self, covers: &[usize]) -> usize {
        let d = self.down_of(covers);
        self.down.push(d);
        self.len() - 1
    }
}

/// Per-context relations: each context holds the closure of everything
/// asserted at or below it.
#[derive(Debug, Clone)]
pub struct NaiveRelations {
    pub poset: NaivePoset,
    pub rel: Vec<Rel>,
    pub n: usize,
}

impl NaiveRelations {
    pub fn new(n: usize) -> Self {
        NaiveRelations {
            poset: NaivePoset::new(),
            rel: vec![identity(n)],
            n,
        }
    }

    pub fn declare(&mut self, covers: &[usize]) -> Option<usize> {
        if !self.poset.accepts(covers) {
            return None;
        }
        let mut r = identity(self.n);
        let cs: Vec<usize> = if covers.is_empty() {
            vec![0]
        } else {
            covers.to_vec()
        };
        for c in cs {
            for i in 0..self.n {
                for j in 0..self.n {
                    r[i][j] |= self.rel[c][i][j];
                }
            }
        }
        close(&mut r);
        self.rel.push(r);
        Some(self.poset.push(covers))
    }

    fn add_above(&mut self, lo: usize, pairs: &Rel) {
        for c in 0..self.poset.len() {
            if self.poset.leq(lo, c) {
                for i in 0..self.n {
                    for j in 0..self.n {
                        self.rel[c][i][j] |= pairs[i][j];
                    }
                }
                close(&mut self.rel[c]);
            }
        }
    }

    pub fn union(&mut self, ctx: usize, a: usize, b: usize) {
        let mut p = identity(self.n);
        p[a][b] = true;
        self.add_above(ctx, &p);
    }

    /// `None` when `lo` is not below both.
    pub fn intersect(&mut self, lo: usize, c1: usize, c2: usize) -> Option<()> {
        if !self.poset.leq(lo, c1) || !self.poset.leq(lo, c2) {
            return None;
        }
        let meet: Rel = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.rel[c1][i][j] && self.rel[c2][i][j])
                    .collect()
            })
            .collect();
        self.add_above(lo, &meet);
        Some(())
    }

    pub fn pairs(&self, ctx: usize) -> usize {
        self.rel[ctx].iter().flatten().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone)]
pub enum Op {
    Declare(Vec<usize>),
    Union(usize, usize, usize),
    Intersect(usize, usize, usize),
}

/// A random script over `n <= 8` ids and up to five contexts.
pub fn random_script(rng: &mut ChaCha8Rng) -> (usize, Vec<Op>) {
    let n = rng.random_range(1..=8);
    let len = rng.random_range(1..=24);
    let mut contexts = 1;
    let mut ops = Vec::new();
    for _ in 0..len {
        match rng.random_range(0..10) {
            0 | 1 if contexts < 5 => {
                let k = rng.random_range(0..=contexts.min(2));
                let covers: Vec<usize> = (0..k).map(|_| rng.random_range(0..contexts)).collect();
                ops.push(Op::Declare(covers));
                contexts += 1;
            }
            2 | 3 => ops.push(Op::Intersect(
                rng.random_range(0..contexts),
                rng.random_range(0..contexts),
                rng.random_range(0..contexts),
            )),
            _ => ops.push(Op::Union(
                rng.random_range(0..contexts),
                rng.random_range(0..n),
                rng.random_range(0..n),
            )),
        }
    }
    (n, ops)
}

/// Replays a script on both models. Declarations the oracle rejects must be
/// rejected by the engine too; context indices in later ops refer to the
/// accepted declarations (out-of-range ones are skipped).
pub fn replay(n: usize, ops: &[Op]) -> Result<(LayeredUnionFind, NaiveRelations), String> {
    let mut luf = LayeredUnionFind::new();
    let ids: Vec<NodeId> = (0..n).map(|_| luf.make_set()).collect();
    let mut oracle = NaiveRelations::new(n);
    let mut ctxs = vec![ContextId::BOTTOM];
    for (step, op) in ops.iter().enumerate() {
        match op {
            Op::Declare(covers) => {
                let covers: Vec<usize> =
                    covers.iter().copied().filter(|&c| c < ctxs.len()).collect();
                let engine_covers: Vec<ContextId> = covers.iter().map(|&c| ctxs[c]).collect();
                let name = format!("c{step}");
                match (
                    luf.declare_context(&name, &engine_covers),
                    oracle.declare(&covers),
                ) {
                    (Ok(c), Some(i)) => {
                        if c.index() != i {
                            return Err(format!("step {step}: context index {} vs {i}", c.index()));
                        }
                        ctxs.push(c);
                    }
                    (Err(_), None) => {}
                    (e, o) => return Err(format!("step {step}: declare {e:?} vs oracle {o:?}")),
                }
            }
            Op::Union(c, a, b) => {
                if *c >= ctxs.len() {
                    continue;
                }
                luf.union(ctxs[*c], ids[*a], ids[*b])
                    .map_err(|e| e.to_string())?;
                oracle.union(*c, *a, *b);
            }
            Op::Intersect(lo, c1, c2) => {
                if [lo, c1, c2].iter().any(|&&c| c >= ctxs.len()) {
                    continue;
                }
                let e = luf.intersect_into(ctxs[*lo], ctxs[*c1], ctxs[*c2]);
                match (e, oracle.intersect(*lo, *c1, *c2)) {
                    (Ok(_), Some(())) | (Err(_), None) => {}
                    (e, o) => return Err(format!("step {step}: intersect {e:?} vs oracle {o:?}")),
                }
            }
        }
        for (i, &c) in ctxs.iter().enumerate() {
            let got = as_indices(&luf.partition(c).map_err(|e| e.to_string())?);
            let want = blocks(&oracle.rel[i]);
            if got != want {
                return Err(format!(
                    "step {step} ({op:?}) context {i}: {got:?} != {want:?}"
                ));
            }
        }
    }
    Ok((luf, oracle))
}

/// Checks order preservation and the quotient properties on every pair
/// `c1 <= c2` of a lattice, given the partitions of each context.
pub fn quotient_violations(
    lattice: &ContextLattice,
    partition: impl Fn(ContextId) -> Vec<Vec<NodeId>>,
) -> Vec<String> {
    let mut out = Vec::new();
    let contexts: Vec<ContextId> = lattice.contexts().collect();
    let parts: BTreeMap<ContextId, Vec<Vec<NodeId>>> =
        contexts.iter().map(|&c| (c, partition(c))).collect();
    let block_of = |c: ContextId| -> BTreeMap<NodeId, usize> {
        parts[&c]
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |&x| (x, i)))
            .collect()
    };
    for &c1 in &contexts {
        for &c2 in &contexts {
            if !lattice.leq(c1, c2).unwrap() {
                continue;
            }
            let (fine, coarse) = (block_of(c1), block_of(c2));
            // order preservation and well-definedness of q: each fine block lands
            // in a single coarse block
            for block in &parts[&c1] {
                let images: BTreeSet<usize> = block.iter().map(|x| coarse[x]).collect();
                if images.len() != 1 {
                    out.push(format!("{c1}<={c2}: fine block {block:?} splits"));
                }
            }
            // coarse blocks are exact unions of fine blocks
            for block in &parts[&c2] {
                let members: BTreeSet<NodeId> = block.iter().copied().collect();
                let covered: BTreeSet<NodeId> = block
                    .iter()
                    .flat_map(|x| parts[&c1][fine[x]].iter().copied())
                    .collect();
                if covered != members {
                    out.push(format!("{c1}<={c2}: coarse block {block:?} is not a union"));
                }
            }
            if parts[&c2].len() > parts[&c1].len() {
                out.push(format!("{c1}<={c2}: more classes above"));
            }
        }
    }
    out
}

/// Function symbols of the random e-graphs: three constants, two unary,
/// one binary.
pub const SIGNATURE: [(&str, usize); 6] =
    [("a", 0), ("b", 0), ("c", 0), ("f", 1), ("h", 1), ("g", 2)];

#[derive(Debug)]
pub struct RandomGraph {
    pub egraph: EGraph,
    pub contexts: Vec<ContextId>,
    /// `(ctx, a, b)` for every asserted merge.
    pub merges: Vec<(ContextId, ClassId, ClassId)>,
}

/// A random e-graph of at most `max_nodes` nodes over up to `max_contexts`
/// contexts (bottom included), with merges interleaved with additions.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, max_contexts: usize) -> RandomGraph {
    let mut g = EGraph::new();
    let syms: Vec<_> = SIGNATURE
        .iter()
        .map(|&(n, a)| g.declare_function(n, a).unwrap())
        .collect();
    let mut contexts = vec![ContextId::BOTTOM];
    let extra = rng.random_range(0..max_contexts);
    for i in 0..extra {
        let k = rng.random_range(0..=contexts.len().min(2));
        let covers: Vec<ContextId> = (0..k).map(|_| *contexts.choose(rng).unwrap()).collect();
        if let Ok(c) = g.declare_context(&format!("k{i}"), &covers) {
            contexts.push(c);
        }
    }
    let mut merges = Vec::new();
    let steps = rng.random_range(1..=3 * max_nodes);
    for _ in 0..steps {
        let n = g.node_count();
        if n >= 2 && rng.random_bool(0.3) {
            let ctx = *contexts.choose(rng).unwrap();
            let a = NodeId::from_index(rng.random_range(0..n));
            let b = NodeId::from_index(rng.random_range(0..n));
            g.merge(ctx, a, b).unwrap();
            merges.push((ctx, a, b));
            if rng.random_bool(0.3) {
                g.rebuild();
            }
            continue;
        }
        if n >= max_nodes {
            continue;
        }
        let s = rng.random_range(0..syms.len());
        let arity = SIGNATURE[s].1;
        if arity > 0 && n == 0 {
            continue;
        }
        let children: Vec<ClassId> = (0..arity)
            .map(|_| NodeId::from_index(rng.random_range(0..n)))
            .collect();
        g.add_node(ENode::new(syms[s], children)).unwrap();
    }
    g.rebuild();
    RandomGraph {
        egraph: g,
        contexts,
        merges,
    }
}

/// Congruence closure at `ctx` by brute-force fixpoint over every stored
/// node: asserted merges at contexts below `ctx`, then repeatedly identify
/// nodes with equal symbols and pairwise equal children.
pub fn naive_congruence(rg: &RandomGraph, ctx: ContextId) -> Vec<Vec<usize>> {
    let g = &rg.egraph;
    let n = g.node_count();
    let mut r = identity(n);
    for &(c, a, b) in &rg.merges {
        if g.lattice().leq(c, ctx).unwrap() {
            r[a.index()][b.index()] = true;
        }
    }
    close(&mut r);
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if r[i][j] {
                    continue;
                }
                let (x, y) = (g.node(NodeId::from_index(i)), g.node(NodeId::from_index(j)));
                if x.symbol == y.symbol
                    && x.children
                        .iter()
                        .zip(&y.children)
                        .all(|(p, q)| r[p.index()][q.index()])
                {
                    r[i][j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        close(&mut r);
    }
    blocks(&r)
}

/// A random pattern over the declared symbols of `g`, at most `depth` deep,
/// drawing variables from `?a ?b ?c` (repeats make it non-linear).
pub fn random_pattern(rng: &mut ChaCha8Rng, g: &EGraph, depth: usize, root: bool) -> Pattern {
    let symbols: Vec<(String, usize)> = g
        .symbols()
        .map(|(_, f)| (f.name.clone(), f.arity))
        .collect();
    let var_chance = if root {
        0.05
    } else if depth == 0 {
        0.8
    } else {
        0.4
    };
    if rng.random_bool(var_chance) {
        return Pattern::var(*["a", "b", "c"].choose(rng).unwrap());
    }
    let pool: Vec<&(String, usize)> = if depth == 0 {
        symbols.iter().filter(|s| s.1 == 0).collect()
    } else {
        symbols.iter().collect()
    };
    let Some((name, arity)) = pool.choose(rng).copied() else {
        return Pattern::var("a");
    };
    let args = (0..*arity)
        .map(|_| random_pattern(rng, g, depth.saturating_sub(1), false))
        .collect();
    Pattern::app(name.clone(), args)
}

/// Every `(root, substitution)` matching `p` at `ctx`, by trying each
/// stored node against each pattern position.
pub fn brute_force_matches(
    g: &EGraph,
    ctx: ContextId,
    p: &Pattern,
) -> BTreeSet<(ClassId, BTreeMap<String, ClassId>)> {
    fn go(
        g: &EGraph,
        ctx: ContextId,
        p: &Pattern,
        class: ClassId,
        subst: BTreeMap<String, ClassId>,
    ) -> Vec<BTreeMap<String, ClassId>> {
        match p {
            Pattern::Var(v) => match subst.get(v) {
                Some(&c) if c != class => vec![],
                Some(_) => vec![subst],
                None => {
                    let mut s = subst;
                    s.insert(v.clone(), class);
                    vec![s]
                }
            },
            Pattern::App { head, args } => {
                let Ok(sym) = g.symbol(head, args.len()) else {
                    return vec![];
                };
                let mut out = Vec::new();
                for i in 0..g.node_count() {
                    let id = NodeId::from_index(i);
                    let node = g.node(id);
                    if node.symbol != sym || g.find(ctx, id).unwrap() != class {
                        continue;
                    }
                    let mut partial = vec![subst.clone()];
                    for (arg, &child) in args.iter().zip(&node.children) {
                        let child = g.find(ctx, child).unwrap();
                        partial = partial
                            .into_iter()
                            .flat_map(|s| go(g, ctx, arg, child, s))
                            .collect();
                    }
                    out.extend(partial);
                }
                out
            }
        }
    }
    let classes: BTreeSet<ClassId> = (0..g.node_count())
        .map(|i| g.find(ctx, NodeId::from_index(i)).unwrap())
        .collect();
    let mut out = BTreeSet::new();
    for c in classes {
        for s in go(g, ctx, p, c, BTreeMap::new()) {
            out.insert((c, s));
        }
    }
    out
}

pub fn match_set(ms: &[ctxsat::Match]) -> BTreeSet<(ClassId, BTreeMap<String, ClassId>)> {
    ms.iter().map(|m| (m.root, m.subst.clone())).collect()
}

/// Whether `class` has a term of depth at most `depth` avoiding `forbid`.
pub fn avoids_within(
    g: &EGraph,
    ctx: ContextId,
    class: ClassId,
    forbid: &str,
    depth: usize,
) -> bool {
    let mut ok: Vec<ClassId> = Vec::new();
    for _ in 0..depth {
        let mut next = ok.clone();
        for i in 0..g.node_count() {
            let id = NodeId::from_index(i);
            let n = g.node(id);
            if g.symbol_name(n.symbol) == forbid {
                continue;
            }
            if n.children
                .iter()
                .all(|&c| ok.contains(&g.find(ctx, c).unwrap()))
            {
                let c = g.find(ctx, id).unwrap();
                if !next.contains(&c) {
                    next.push(c);
                }
            }
        }
        ok = next;
    }
    ok.contains(&g.find(ctx, class).unwrap())
}
