use std::collections::BTreeSet;

use crate::egraph::{ClassId, EGraph, ENode, Symbol};
use crate::ematch::Query;
use crate::error::{Error, Result};
use crate::lattice::ContextId;
use crate::term::Pattern;

/// Where a rule may fire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleScope {
    /// At every context, including bottom.
    Everywhere,
    /// Only at the named context.
    At(String),
    /// At the named context and every context above it.
    AtOrAbove(String),
}

/// `lhs => rhs`, optionally guarded by equalities `p = q` that must hold of
/// the same match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub when: Vec<(Pattern, Pattern)>,
    pub scope: RuleScope,
}

impl Rule {
    pub fn new(name: impl Into<String>, lhs: Pattern, rhs: Pattern) -> Self {
        Rule {
            name: name.into(),
            lhs,
            rhs,
            when: Vec::new(),
            scope: RuleScope::Everywhere,
        }
    }

    pub fn when(mut self, p: Pattern, q: Pattern) -> Self {
        self.when.push((p, q));
        self
    }

    pub fn scoped(mut self, scope: RuleScope) -> Self {
        self.scope = scope;
        self
    }

    /// Variables bound by the query: those of the lhs and of the guards.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut vars = self.lhs.vars();
        for (p, q) in &self.when {
            vars.extend(p.vars());
            vars.extend(q.vars());
        }
        vars
    }

    pub fn check(&self) -> Result<()> {
        let bound = self.bound_vars();
        match self.rhs.vars().into_iter().find(|v| !bound.contains(v)) {
            Some(var) => Err(Error::UnboundRhsVariable {
                rule: self.name.clone(),
                var,
            }),
            None => Ok(()),
        }
    }
}

/// A pattern with its symbols resolved, ready to instantiate.
#[derive(Debug, Clone)]
pub(crate) enum Template {
    Var(String),
    App(Symbol, Vec<Template>),
}

impl Template {
    pub(crate) fn compile(egraph: &EGraph, p: &Pattern) -> Result<Template> {
        Ok(match p {
            Pattern::Var(v) => Template::Var(v.clone()),
            Pattern::App { head, args } => Template::App(
                egraph.symbol(head, args.len())?,
                args.iter()
                    .map(|a| Template::compile(egraph, a))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    pub(crate) fn instantiate(
        &self,
        egraph: &mut EGraph,
        subst: &std::collections::BTreeMap<String, ClassId>,
    ) -> ClassId {
        match self {
            Template::Var(v) => subst[v],
            Template::App(sym, args) => {
                let children = args.iter().map(|a| a.instantiate(egraph, subst)).collect();
                egraph.add_node_unchecked(ENode::new(*sym, children))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledRule {
    pub(crate) rule: Rule,
    pub(crate) query: Query,
    pub(crate) rhs: Template,
    pub(crate) anchor: Option<ContextId>,
}

impl CompiledRule {
    pub(crate) fn new(egraph: &EGraph, rule: Rule) -> Result<Self> {
        rule.check()?;
        let query = Query::compile(egraph, &rule.lhs, &rule.when)?;
        let rhs = Template::compile(egraph, &rule.rhs)?;
        let anchor = match &rule.scope {
            RuleScope::Everywhere => None,
            RuleScope::At(c) | RuleScope::AtOrAbove(c) => Some(egraph.context(c)?),
        };
        Ok(CompiledRule {
            rule,
            query,
            rhs,
            anchor,
        })
    }

    /// Contexts the rule is matched at, in id order.
    pub(crate) fn contexts(&self, egraph: &EGraph) -> Vec<ContextId> {
        match (&self.rule.scope, self.anchor) {
            (RuleScope::At(_), Some(c)) => vec![c],
            (RuleScope::AtOrAbove(_), Some(c)) => egraph.lattice().upset(c).unwrap_or_default(),
            _ => egraph.lattice().contexts().collect(),
        }
    }
}
