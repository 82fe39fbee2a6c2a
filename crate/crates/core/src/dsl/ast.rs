use std::fmt;

use crate::rewrite::{Rule, RuleScope, ScopeConstruct};
use crate::term::Term;

/// A context named in a directive.
#[derive(Debug, Clone, PartialEq)]
pub enum CtxRef {
    Bottom,
    Named(String),
    /// Then branch of the conditional whose term is given.
    Then(Term),
    Else(Term),
    /// Body context of the application whose term is given.
    Body(Term),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Function {
        name: String,
        arity: usize,
    },
    Constants(Vec<String>),
    Context {
        name: String,
        covers: Vec<String>,
    },
    Term(Term),
    Rule(Rule),
    Scope(ScopeConstruct),
    Cost {
        symbol: String,
        cost: f64,
    },
    Run(Option<usize>),
    CheckEqual {
        ctx: CtxRef,
        lhs: Term,
        rhs: Term,
    },
    CheckNotEqual {
        ctx: CtxRef,
        lhs: Term,
        rhs: Term,
    },
    /// The class of `class` at `ctx` has a node for `member`; neither term
    /// is added to the e-graph.
    CheckContains {
        ctx: CtxRef,
        class: Term,
        member: Term,
    },
    Extract {
        ctx: CtxRef,
        term: Term,
        forbid: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub commands: Vec<Command>,
}

impl fmt::Display for CtxRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CtxRef::Bottom => write!(f, "{}", crate::lattice::BOTTOM_NAME),
            CtxRef::Named(n) => write!(f, "{n}"),
            CtxRef::Then(t) => write!(f, "(then {t})"),
            CtxRef::Else(t) => write!(f, "(else {t})"),
            CtxRef::Body(t) => write!(f, "(body {t})"),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Function { name, arity } => write!(f, "(function {name} {arity})"),
            Command::Constants(names) => write!(f, "(constants {})", names.join(" ")),
            Command::Context { name, covers } if covers.is_empty() => write!(f, "(context {name})"),
            Command::Context { name, covers } => {
                write!(f, "(context {name} (covers {}))", covers.join(" "))
            }
            Command::Term(t) => write!(f, "(term {t})"),
            Command::Rule(r) => {
                write!(f, "(rule {} {} {}", r.name, r.lhs, r.rhs)?;
                if !r.when.is_empty() {
                    write!(f, " :when (")?;
                    for (i, (p, q)) in r.when.iter().enumerate() {
                        let sep = if i == 0 { "" } else { " " };
                        write!(f, "{sep}(= {p} {q})")?;
                    }
                    write!(f, ")")?;
                }
                match &r.scope {
                    RuleScope::Everywhere => write!(f, ")"),
                    RuleScope::At(c) => write!(f, " :scope {c})"),
                    RuleScope::AtOrAbove(c) => write!(f, " :scope at-or-above {c})"),
                }
            }
            Command::Scope(ScopeConstruct::Conditional {
                if_symbol,
                true_symbol,
                false_symbol,
            }) => write!(f, "(scope-if {if_symbol} {true_symbol} {false_symbol})"),
            Command::Scope(ScopeConstruct::Lambda {
                app_symbol,
                lam_symbol,
                var_symbol,
            }) => write!(f, "(scope-lambda {app_symbol} {lam_symbol} {var_symbol})"),
            Command::Scope(ScopeConstruct::Enforcer {
                symbol,
                child,
                context,
            }) => write!(f, "(scope-enforcer {symbol} {child} {context})"),
            Command::Cost { symbol, cost } => write!(f, "(cost {symbol} {cost})"),
            Command::Run(None) => write!(f, "(run)"),
            Command::Run(Some(n)) => write!(f, "(run {n})"),
            Command::CheckEqual { ctx, lhs, rhs } => write!(f, "(check-equal {ctx} {lhs} {rhs})"),
            Command::CheckNotEqual { ctx, lhs, rhs } => {
                write!(f, "(check-not-equal {ctx} {lhs} {rhs})")
            }
            Command::CheckContains { ctx, class, member } => {
                write!(f, "(check-contains {ctx} {class} {member})")
            }
            Command::Extract { ctx, term, forbid } => {
                write!(f, "(extract {ctx} {term}")?;
                if let Some(x) = forbid {
                    write!(f, " :forbid {x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.commands {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
