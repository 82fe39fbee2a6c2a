//! Builtin scoping constructs: the contexts they open, the equalities they
//! assert there, and how results flow back out (intersection for
//! conditionals, lifting for lambdas and enforcers).

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::egraph::{ClassId, ENode, Symbol, UnionCause};
use crate::error::{Error, Result};
use crate::extract::extract;
use crate::lattice::ContextId;
use crate::views::CanonicalView;

use super::avoid::avoiding_classes;
use super::Engine;

/// A scoping construct, named by its function symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScopeConstruct {
    /// `if/3` with boolean constants: the then branch sees `cond = true`,
    /// the else branch `cond = false`.
    Conditional {
        if_symbol: String,
        true_symbol: String,
        false_symbol: String,
    },
    /// `app/2` applied to `lam/2`: the body sees `var(binder) = arg`.
    Lambda {
        app_symbol: String,
        lam_symbol: String,
        var_symbol: String,
    },
    /// A property enforcer: argument `child` of `symbol` is interpreted at
    /// `context` joined with the enclosing one.
    Enforcer {
        symbol: String,
        child: usize,
        context: String,
    },
}

#[derive(Debug, Clone)]
pub(crate) enum ResolvedScope {
    Conditional {
        if_sym: Symbol,
        true_sym: Symbol,
        false_sym: Symbol,
    },
    Lambda {
        app_sym: Symbol,
        lam_sym: Symbol,
        var_sym: Symbol,
    },
    Enforcer {
        sym: Symbol,
        child: usize,
        ctx: ContextId,
    },
}

/// The two branch contexts opened for one condition at one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalInstance {
    pub gamma: ContextId,
    pub then_ctx: ContextId,
    pub else_ctx: ContextId,
    pub cond: ClassId,
    /// Classes of the conditional nodes that share these contexts.
    pub if_classes: Vec<ClassId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaSite {
    pub app: ClassId,
    pub body: ClassId,
    /// Name of the binder's symbol, when the binder class has a leaf.
    pub binder: Option<String>,
}

/// The body context opened for one (binder, argument) pair at one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaInstance {
    pub gamma: ContextId,
    pub body_ctx: ContextId,
    pub binder: ClassId,
    pub arg: ClassId,
    pub sites: Vec<LambdaSite>,
}

enum Role {
    If(Symbol, Symbol),
    App(Symbol, Symbol),
    Enforce(usize, ContextId),
}

impl Engine {
    pub fn add_scope(&mut self, construct: ScopeConstruct) -> Result<()> {
        let g = &self.egraph;
        let resolved = match &construct {
            ScopeConstruct::Conditional {
                if_symbol,
                true_symbol,
                false_symbol,
            } => ResolvedScope::Conditional {
                if_sym: g.symbol(if_symbol, 3)?,
                true_sym: g.symbol(true_symbol, 0)?,
                false_sym: g.symbol(false_symbol, 0)?,
            },
            ScopeConstruct::Lambda {
                app_symbol,
                lam_symbol,
                var_symbol,
            } => ResolvedScope::Lambda {
                app_sym: g.symbol(app_symbol, 2)?,
                lam_sym: g.symbol(lam_symbol, 2)?,
                var_sym: g.symbol(var_symbol, 1)?,
            },
            ScopeConstruct::Enforcer {
                symbol,
                child,
                context,
            } => {
                let sym = g
                    .symbols()
                    .find(|(_, f)| &f.name == symbol && f.arity > *child)
                    .map(|(s, _)| s)
                    .ok_or_else(|| {
                        Error::InvalidScope(format!(
                            "`{symbol}` has no declared arity with argument {child}"
                        ))
                    })?;
                ResolvedScope::Enforcer {
                    sym,
                    child: *child,
                    ctx: g.context(context)?,
                }
            }
        };
        let claimed: Vec<Symbol> = self.scopes.iter().filter_map(ResolvedScope::head).collect();
        if let Some(head) = resolved.head() {
            if claimed.contains(&head) {
                return Err(Error::InvalidScope(format!(
                    "`{}` already has a scope construct",
                    g.symbol_name(head)
                )));
            }
        }
        self.scopes.push(resolved);
        self.constructs.push(construct);
        Ok(())
    }

    pub fn conditional_instances(&self) -> &[ConditionalInstance] {
        &self.conditionals
    }

    pub fn lambda_instances(&self) -> &[LambdaInstance] {
        &self.lambdas
    }

    /// Then and else contexts of the first conditional instance opened for
    /// the class of `if_class`.
    pub fn branch_contexts(&self, if_class: ClassId) -> Option<(ContextId, ContextId)> {
        let c = self.egraph.find(ContextId::BOTTOM, if_class).ok()?;
        self.conditionals
            .iter()
            .find(|i| {
                i.if_classes
                    .iter()
                    .any(|&k| self.egraph.find_unchecked(ContextId::BOTTOM, k) == c)
            })
            .map(|i| (i.then_ctx, i.else_ctx))
    }

    /// Body context of the first lambda instance opened for `app_class`.
    pub fn body_context(&self, app_class: ClassId) -> Option<ContextId> {
        let c = self.egraph.find(ContextId::BOTTOM, app_class).ok()?;
        self.lambdas
            .iter()
            .find(|i| {
                i.sites
                    .iter()
                    .any(|s| self.egraph.find_unchecked(ContextId::BOTTOM, s.app) == c)
            })
            .map(|i| i.body_ctx)
    }

    fn role(&self, sym: Symbol) -> Option<Role> {
        self.scopes.iter().find_map(|s| match *s {
            ResolvedScope::Conditional {
                if_sym,
                true_sym,
                false_sym,
            } if if_sym == sym => Some(Role::If(true_sym, false_sym)),
            ResolvedScope::Lambda {
                app_sym,
                lam_sym,
                var_sym,
            } if app_sym == sym => Some(Role::App(lam_sym, var_sym)),
            ResolvedScope::Enforcer { sym: e, child, ctx } if e == sym => {
                Some(Role::Enforce(child, ctx))
            }
            _ => None,
        })
    }

    fn fresh_contexts(
        &mut self,
        prefix: &str,
        suffixes: &[&str],
        cover: ContextId,
    ) -> Result<Vec<ContextId>> {
        loop {
            let n = self.fresh;
            self.fresh += 1;
            let names: Vec<String> = suffixes
                .iter()
                .map(|s| format!("{prefix}{n}.{s}"))
                .collect();
            if names.iter().any(|name| self.egraph.context(name).is_ok()) {
                continue;
            }
            return names
                .iter()
                .map(|name| self.egraph.declare_context(name, &[cover]))
                .collect();
        }
    }

    fn room_for(&self, extra: usize) -> bool {
        let ok = self.egraph.lattice().len() + extra <= self.config.max_contexts;
        if !ok {
            log::warn!("context limit {} reached", self.config.max_contexts);
        }
        ok
    }

    /// Walks the program from its roots, tracking the context each
    /// occurrence sits in, and opens scope contexts for conditionals and
    /// applications found along the way. Returns the number of new scope
    /// instances.
    pub fn apply_scopes(&mut self) -> Result<usize> {
        if self.scopes.is_empty() {
            return Ok(0);
        }
        const BOT: ContextId = ContextId::BOTTOM;
        let mut created = 0;
        let mut pending: Vec<(ContextId, ClassId, ClassId)> = Vec::new();
        let mut views: HashMap<ContextId, Arc<CanonicalView>> = HashMap::new();
        let mut seen: HashSet<(ContextId, ClassId)> = HashSet::new();
        let mut work: VecDeque<(ContextId, ClassId)> =
            self.egraph.roots().iter().map(|&r| (BOT, r)).collect();

        let mut cond_index: HashMap<(ContextId, ClassId), usize> = HashMap::new();
        let mut conds_by_class: HashMap<ClassId, Vec<usize>> = HashMap::new();
        for (i, inst) in self.conditionals.iter().enumerate() {
            let c = self.egraph.find_unchecked(BOT, inst.cond);
            cond_index.entry((inst.gamma, c)).or_insert(i);
            conds_by_class.entry(c).or_default().push(i);
        }
        let mut lam_index: HashMap<(ContextId, ClassId, ClassId), usize> = HashMap::new();
        for (i, inst) in self.lambdas.iter().enumerate() {
            let b = self.egraph.find_unchecked(BOT, inst.binder);
            let a = self.egraph.find_unchecked(BOT, inst.arg);
            lam_index.entry((inst.gamma, b, a)).or_insert(i);
        }

        while let Some((g, c)) = work.pop_front() {
            let rep = self.egraph.find_unchecked(g, c);
            if !seen.insert((g, rep)) {
                continue;
            }
            let view = match views.get(&g) {
                Some(v) => Arc::clone(v),
                None => {
                    let v = self.egraph.materialize(g)?;
                    views.insert(g, Arc::clone(&v));
                    v
                }
            };
            for node in view.nodes(rep) {
                let kids = &node.children;
                match self.role(node.symbol) {
                    Some(Role::If(true_sym, false_sym)) => {
                        let (cn, tn, en) = (kids[0], kids[1], kids[2]);
                        let key = self.egraph.find_unchecked(BOT, cn);
                        // inside a branch of the same test: the outcome is known
                        let t = self.egraph.add_node_unchecked(ENode::leaf(true_sym));
                        let f = self.egraph.add_node_unchecked(ENode::leaf(false_sym));
                        let truth = self.egraph.find_unchecked(g, cn);
                        let mut decided = if truth == self.egraph.find_unchecked(g, t) {
                            Some(tn)
                        } else if truth == self.egraph.find_unchecked(g, f) {
                            Some(en)
                        } else {
                            None
                        };
                        for &i in conds_by_class.get(&key).into_iter().flatten() {
                            let inst = &self.conditionals[i];
                            let lat = self.egraph.lattice();
                            if lat.leq(inst.then_ctx, g)? {
                                decided = Some(tn);
                            } else if lat.leq(inst.else_ctx, g)? {
                                decided = Some(en);
                            }
                        }
                        if let Some(branch) = decided {
                            pending.push((g, rep, branch));
                            work.push_back((g, cn));
                            work.push_back((g, branch));
                            continue;
                        }
                        let idx = match cond_index.get(&(g, key)) {
                            Some(&i) => Some(i),
                            None if self.room_for(2) => {
                                let ctxs = self.fresh_contexts("if", &["then", "else"], g)?;
                                views.insert(ctxs[0], Arc::clone(&view));
                                views.insert(ctxs[1], Arc::clone(&view));
                                self.conditionals.push(ConditionalInstance {
                                    gamma: g,
                                    then_ctx: ctxs[0],
                                    else_ctx: ctxs[1],
                                    cond: key,
                                    if_classes: Vec::new(),
                                });
                                let i = self.conditionals.len() - 1;
                                cond_index.insert((g, key), i);
                                conds_by_class.entry(key).or_default().push(i);
                                created += 1;
                                Some(i)
                            }
                            None => None,
                        };
                        match idx {
                            Some(i) => {
                                let inst = &mut self.conditionals[i];
                                if !inst.if_classes.contains(&rep) {
                                    inst.if_classes.push(rep);
                                }
                                let (then_ctx, else_ctx) = (inst.then_ctx, inst.else_ctx);
                                pending.push((then_ctx, cn, t));
                                pending.push((then_ctx, rep, tn));
                                pending.push((else_ctx, cn, f));
                                pending.push((else_ctx, rep, en));
                                work.push_back((g, cn));
                                work.push_back((then_ctx, tn));
                                work.push_back((else_ctx, en));
                            }
                            None => work.extend(kids.iter().map(|&k| (g, k))),
                        }
                    }
                    Some(Role::App(lam_sym, var_sym)) => {
                        let (fun, arg) = (kids[0], kids[1]);
                        work.push_back((g, fun));
                        work.push_back((g, arg));
                        let arg_key = self.egraph.find_unchecked(BOT, arg);
                        for lam in view.nodes(fun).iter().filter(|n| n.symbol == lam_sym) {
                            let (xb, body) = (lam.children[0], lam.children[1]);
                            let binder_key = self.egraph.find_unchecked(BOT, xb);
                            // already inside a body that binds the same pair
                            let (eg, lat) = (&self.egraph, self.egraph.lattice());
                            let inside = self.lambdas.iter().any(|i| {
                                lat.leq(i.body_ctx, g).unwrap_or(false)
                                    && eg.find_unchecked(g, i.binder) == eg.find_unchecked(g, xb)
                                    && eg.find_unchecked(g, i.arg) == eg.find_unchecked(g, arg)
                            });
                            if inside {
                                work.push_back((g, body));
                                continue;
                            }
                            let idx = match lam_index.get(&(g, binder_key, arg_key)) {
                                Some(&i) => i,
                                None if self.room_for(1) => {
                                    let ctx = self.fresh_contexts("app", &["body"], g)?[0];
                                    views.insert(ctx, Arc::clone(&view));
                                    self.lambdas.push(LambdaInstance {
                                        gamma: g,
                                        body_ctx: ctx,
                                        binder: binder_key,
                                        arg: arg_key,
                                        sites: Vec::new(),
                                    });
                                    let i = self.lambdas.len() - 1;
                                    lam_index.insert((g, binder_key, arg_key), i);
                                    created += 1;
                                    i
                                }
                                None => {
                                    work.push_back((g, body));
                                    continue;
                                }
                            };
                            let binder = view
                                .nodes(xb)
                                .iter()
                                .find(|n| n.children.is_empty())
                                .map(|n| self.egraph.symbol_name(n.symbol).to_string());
                            let var = self
                                .egraph
                                .add_node_unchecked(ENode::new(var_sym, vec![xb]));
                            let inst = &mut self.lambdas[idx];
                            let site = LambdaSite {
                                app: rep,
                                body,
                                binder,
                            };
                            if !inst.sites.contains(&site) {
                                inst.sites.push(site);
                            }
                            let body_ctx = inst.body_ctx;
                            pending.push((body_ctx, var, arg));
                            work.push_back((body_ctx, body));
                        }
                    }
                    Some(Role::Enforce(child, s)) => {
                        let lat = self.egraph.lattice();
                        let inner = if lat.leq(s, g)? {
                            g
                        } else {
                            lat.join(g, s).unwrap_or(g)
                        };
                        for (j, &k) in kids.iter().enumerate() {
                            work.push_back((if j == child { inner } else { g }, k));
                        }
                    }
                    None => work.extend(kids.iter().map(|&k| (g, k))),
                }
            }
        }

        for (ctx, a, b) in pending {
            self.egraph.merge_with(ctx, a, b, UnionCause::Scope)?;
        }
        Ok(created)
    }

    /// Proof by cases: whatever both branches of a conditional agree on
    /// holds in the enclosing context. Returns the number of unions.
    pub fn apply_intersections(&mut self) -> Result<usize> {
        let mut n = 0;
        for i in 0..self.conditionals.len() {
            let inst = &self.conditionals[i];
            let (g, t, e) = (inst.gamma, inst.then_ctx, inst.else_ctx);
            n += self.egraph.intersect_into(g, t, e)?;
        }
        Ok(n)
    }

    /// Equates each application with a binder-free term of its body, when
    /// the body class at the body context has one. Returns the number of
    /// unions.
    pub fn apply_lambda_lifts(&mut self) -> Result<usize> {
        let mut merges = Vec::new();
        let mut cache: HashMap<(ContextId, String), std::collections::BTreeSet<ClassId>> =
            HashMap::new();
        for inst in &self.lambdas {
            for site in &inst.sites {
                let Some(binder) = &site.binder else { continue };
                let key = (inst.body_ctx, binder.clone());
                if !cache.contains_key(&key) {
                    let ok = avoiding_classes(&self.egraph, inst.body_ctx, binder)?;
                    cache.insert(key.clone(), ok);
                }
                let body = self.egraph.find(inst.body_ctx, site.body)?;
                if !cache[&key].contains(&body) {
                    continue;
                }
                let r = extract(&self.egraph, inst.body_ctx, body, &self.cost, Some(binder))?;
                merges.push((inst.gamma, site.app, r.term));
            }
        }
        let mut n = 0;
        for (g, app, term) in merges {
            let t = self.egraph.add_term(&term)?;
            n += self
                .egraph
                .merge_with(g, app, t, UnionCause::LambdaLift)?
                .changed as usize;
        }
        Ok(n)
    }

    /// For an enforcer `e(.., x, ..)` and a context `g` not above the
    /// enforcer's context `s`, inputs equal at `g ⊔ s` give equal outputs at
    /// `g`. Returns the number of unions.
    pub fn apply_enforcer_lifts(&mut self) -> Result<usize> {
        const BOT: ContextId = ContextId::BOTTOM;
        let mut merges: Vec<(ContextId, ClassId, ENode)> = Vec::new();
        for scope in &self.scopes {
            let ResolvedScope::Enforcer { sym, child, ctx: s } = *scope else {
                continue;
            };
            let nodes: Vec<_> = self
                .egraph
                .bottom_nodes()
                .into_iter()
                .filter(|(_, n)| n.symbol == sym)
                .collect();
            if nodes.is_empty() {
                continue;
            }
            let lat = self.egraph.lattice();
            for g in lat.contexts() {
                if lat.leq(s, g)? {
                    continue;
                }
                let Ok(j) = lat.join(g, s) else { continue };
                for (id, node) in &nodes {
                    let x = node.children[child];
                    let here = self.egraph.find_unchecked(BOT, x);
                    let members = self
                        .egraph
                        .union_find()
                        .base_members(j, self.egraph.find_unchecked(j, x));
                    for y in members.into_iter().filter(|&y| y != here) {
                        let mut kids = node.children.clone();
                        kids[child] = y;
                        merges.push((g, *id, ENode::new(sym, kids)));
                    }
                }
            }
        }
        let mut n = 0;
        for (g, id, node) in merges {
            let other = self.egraph.add_node_unchecked(node);
            n += self
                .egraph
                .merge_with(g, id, other, UnionCause::Enforcer)?
                .changed as usize;
        }
        Ok(n)
    }

    /// Equality pairs per context over the current node ids, for
    /// monotonicity checks.
    pub fn equivalence_pairs(
        &self,
    ) -> BTreeMap<ContextId, std::collections::BTreeSet<(ClassId, ClassId)>> {
        let mut out = BTreeMap::new();
        for ctx in self.egraph.lattice().contexts() {
            let mut pairs = std::collections::BTreeSet::new();
            for block in self.egraph.partition(ctx).expect("declared context") {
                for (i, &a) in block.iter().enumerate() {
                    for &b in &block[i + 1..] {
                        pairs.insert((a, b));
                    }
                }
            }
            out.insert(ctx, pairs);
        }
        out
    }
}

impl ResolvedScope {
    fn head(&self) -> Option<Symbol> {
        Some(match *self {
            ResolvedScope::Conditional { if_sym, .. } => if_sym,
            ResolvedScope::Lambda { app_sym, .. } => app_sym,
            ResolvedScope::Enforcer { sym, .. } => sym,
        })
    }
}
