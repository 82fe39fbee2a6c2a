use crate::error::{Error, Result};
use crate::lattice::BOTTOM_NAME;
use crate::rewrite::{Rule, RuleScope, ScopeConstruct};
use crate::term::{Pattern, Term};

use super::ast::{Command, CtxRef, Program};
use super::sexp::{read_all, Sexp};

/// Every command keyword the language accepts.
pub const COMMANDS: &[&str] = &[
    "function",
    "constants",
    "context",
    "term",
    "rule",
    "scope-if",
    "scope-lambda",
    "scope-enforcer",
    "cost",
    "run",
    "check-equal",
    "check-not-equal",
    "check-contains",
    "extract",
];

/// Keywords allowed inside a `rule` form.
pub const RULE_KEYWORDS: &[&str] = &[":when", ":scope"];

pub fn parse_program(src: &str) -> Result<Program> {
    let commands = read_all(src)?
        .iter()
        .map(command)
        .collect::<Result<Vec<_>>>()?;
    Ok(Program { commands })
}

pub fn parse_term(src: &str) -> Result<Term> {
    term(&single(src)?)
}

pub fn parse_pattern(src: &str) -> Result<Pattern> {
    pattern(&single(src)?)
}

fn single(src: &str) -> Result<Sexp> {
    let mut v = read_all(src)?;
    match v.len() {
        1 => Ok(v.pop().unwrap()),
        0 => Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "expected an expression".into(),
        }),
        _ => Err(v[1].syntax("expected a single expression")),
    }
}

fn symbol_atom(e: &Sexp, what: &str) -> Result<String> {
    match e.atom() {
        Some(a) if a.starts_with('?') || a.starts_with(':') => {
            Err(e.syntax(format!("`{a}` is not a valid {what}")))
        }
        Some(a) => Ok(a.to_string()),
        None => Err(e.syntax(format!("expected {what}, found a list"))),
    }
}

fn term(e: &Sexp) -> Result<Term> {
    match e.list() {
        None => Ok(Term::leaf(symbol_atom(e, "symbol")?)),
        Some([]) => Err(e.syntax("empty application")),
        Some([head, args @ ..]) => Ok(Term::app(
            symbol_atom(head, "function symbol")?,
            args.iter().map(term).collect::<Result<_>>()?,
        )),
    }
}

fn pattern(e: &Sexp) -> Result<Pattern> {
    match e.list() {
        None => {
            let a = e.atom().unwrap();
            match a.strip_prefix('?') {
                Some("") => Err(e.syntax("empty pattern variable")),
                Some(v) => Ok(Pattern::var(v)),
                None => Ok(Pattern::leaf(symbol_atom(e, "symbol")?)),
            }
        }
        Some([]) => Err(e.syntax("empty application")),
        Some([head, args @ ..]) => Ok(Pattern::app(
            symbol_atom(head, "function symbol")?,
            args.iter().map(pattern).collect::<Result<_>>()?,
        )),
    }
}

fn ctx_ref(e: &Sexp) -> Result<CtxRef> {
    if let Some(a) = e.atom() {
        let name = symbol_atom(e, "context name")?;
        return Ok(if a == BOTTOM_NAME {
            CtxRef::Bottom
        } else {
            CtxRef::Named(name)
        });
    }
    match e.list().unwrap() {
        [kind, t] => {
            let t = term(t)?;
            match kind.atom() {
                Some("then") => Ok(CtxRef::Then(t)),
                Some("else") => Ok(CtxRef::Else(t)),
                Some("body") => Ok(CtxRef::Body(t)),
                _ => Err(kind.syntax("expected `then`, `else` or `body`")),
            }
        }
        _ => Err(e.syntax("expected a context name or (then|else|body <term>)")),
    }
}

fn natural(e: &Sexp) -> Result<usize> {
    e.atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| e.syntax("expected a natural number"))
}

fn command(e: &Sexp) -> Result<Command> {
    let items = e
        .list()
        .ok_or_else(|| e.syntax("expected a command in parentheses"))?;
    let (head, args) = items
        .split_first()
        .ok_or_else(|| e.syntax("empty command"))?;
    let name = head
        .atom()
        .ok_or_else(|| head.syntax("command name must be a symbol"))?;
    if !COMMANDS.contains(&name) {
        return Err(Error::UnknownCommand {
            name: name.to_string(),
            line: head.line,
            column: head.column,
        });
    }
    let arity = |message: &str| Error::ArityError {
        command: name.to_string(),
        line: e.line,
        column: e.column,
        message: message.to_string(),
    };
    Ok(match (name, args) {
        ("function", [n, a]) => Command::Function {
            name: symbol_atom(n, "function name")?,
            arity: natural(a)?,
        },
        ("function", _) => return Err(arity("expected (function <name> <arity>)")),
        ("constants", names) => Command::Constants(
            names
                .iter()
                .map(|n| symbol_atom(n, "constant name"))
                .collect::<Result<_>>()?,
        ),
        ("context", [n]) => Command::Context {
            name: symbol_atom(n, "context name")?,
            covers: Vec::new(),
        },
        ("context", [n, covers]) => {
            let list = covers
                .list()
                .filter(|l| l.first().and_then(Sexp::atom) == Some("covers"))
                .ok_or_else(|| covers.syntax("expected (covers <context>...)"))?;
            Command::Context {
                name: symbol_atom(n, "context name")?,
                covers: list[1..]
                    .iter()
                    .map(|c| symbol_atom(c, "context name"))
                    .collect::<Result<_>>()?,
            }
        }
        ("context", _) => return Err(arity("expected (context <name> [(covers ...)])")),
        ("term", [t]) => Command::Term(term(t)?),
        ("term", _) => return Err(arity("expected (term <term>)")),
        ("rule", [n, lhs, rhs, rest @ ..]) => Command::Rule(rule(n, lhs, rhs, rest)?),
        ("rule", _) => {
            return Err(arity(
                "expected (rule <name> <lhs> <rhs> [:when (...)] [:scope ...])",
            ))
        }
        ("scope-if", [i, t, f]) => Command::Scope(ScopeConstruct::Conditional {
            if_symbol: symbol_atom(i, "symbol")?,
            true_symbol: symbol_atom(t, "symbol")?,
            false_symbol: symbol_atom(f, "symbol")?,
        }),
        ("scope-if", _) => return Err(arity("expected (scope-if <if> <true> <false>)")),
        ("scope-lambda", [a, l, v]) => Command::Scope(ScopeConstruct::Lambda {
            app_symbol: symbol_atom(a, "symbol")?,
            lam_symbol: symbol_atom(l, "symbol")?,
            var_symbol: symbol_atom(v, "symbol")?,
        }),
        ("scope-lambda", _) => return Err(arity("expected (scope-lambda <app> <lam> <var>)")),
        ("scope-enforcer", [s, i, c]) => Command::Scope(ScopeConstruct::Enforcer {
            symbol: symbol_atom(s, "symbol")?,
            child: natural(i)?,
            context: symbol_atom(c, "context name")?,
        }),
        ("scope-enforcer", _) => {
            return Err(arity(
                "expected (scope-enforcer <symbol> <argument index> <context>)",
            ))
        }
        ("cost", [s, c]) => Command::Cost {
            symbol: symbol_atom(s, "symbol")?,
            cost: c
                .atom()
                .and_then(|a| a.parse::<f64>().ok())
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| c.syntax("expected a non-negative number"))?,
        },
        ("cost", _) => return Err(arity("expected (cost <symbol> <number>)")),
        ("run", []) => Command::Run(None),
        ("run", [n]) => Command::Run(Some(natural(n)?)),
        ("run", _) => return Err(arity("expected (run [<iterations>])")),
        ("check-equal", [c, a, b]) => Command::CheckEqual {
            ctx: ctx_ref(c)?,
            lhs: term(a)?,
            rhs: term(b)?,
        },
        ("check-not-equal", [c, a, b]) => Command::CheckNotEqual {
            ctx: ctx_ref(c)?,
            lhs: term(a)?,
            rhs: term(b)?,
        },
        ("check-contains", [c, a, b]) => Command::CheckContains {
            ctx: ctx_ref(c)?,
            class: term(a)?,
            member: term(b)?,
        },
        ("check-equal" | "check-not-equal" | "check-contains", _) => {
            return Err(arity("expected (<check> <context> <term> <term>)"))
        }
        ("extract", [c, t]) => Command::Extract {
            ctx: ctx_ref(c)?,
            term: term(t)?,
            forbid: None,
        },
        ("extract", [c, t, k, x]) if k.atom() == Some(":forbid") => Command::Extract {
            ctx: ctx_ref(c)?,
            term: term(t)?,
            forbid: Some(symbol_atom(x, "symbol")?),
        },
        ("extract", _) => {
            return Err(arity(
                "expected (extract <context> <term> [:forbid <symbol>])",
            ))
        }
        _ => unreachable!("every keyword is handled"),
    })
}

fn rule(name: &Sexp, lhs: &Sexp, rhs: &Sexp, mut rest: &[Sexp]) -> Result<Rule> {
    let mut r = Rule::new(
        symbol_atom(name, "rule name")?,
        pattern(lhs)?,
        pattern(rhs)?,
    );
    while let Some((k, tail)) = rest.split_first() {
        match (k.atom(), tail) {
            (Some(":when"), [facts, tail @ ..]) => {
                let list = facts
                    .list()
                    .ok_or_else(|| facts.syntax("expected a list of (= <pattern> <pattern>)"))?;
                for fact in list {
                    match fact.list() {
                        Some([eq, p, q]) if eq.atom() == Some("=") => {
                            r.when.push((pattern(p)?, pattern(q)?));
                        }
                        _ => return Err(fact.syntax("expected (= <pattern> <pattern>)")),
                    }
                }
                rest = tail;
            }
            (Some(":scope"), [s, tail @ ..]) => match s.atom() {
                Some("everywhere") => {
                    r.scope = RuleScope::Everywhere;
                    rest = tail;
                }
                Some("at-or-above") => {
                    let (c, tail) = tail
                        .split_first()
                        .ok_or_else(|| s.syntax("expected a context after `at-or-above`"))?;
                    r.scope = RuleScope::AtOrAbove(symbol_atom(c, "context name")?);
                    rest = tail;
                }
                _ => {
                    r.scope = RuleScope::At(symbol_atom(s, "context name")?);
                    rest = tail;
                }
            },
            _ => return Err(k.syntax("expected `:when (...)` or `:scope <scope>`")),
        }
    }
    r.check()?;
    Ok(r)
}
