//! Ground terms and patterns, named by function-symbol strings.

use std::collections::BTreeSet;
use std::fmt;

/// A ground, tree-shaped term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub head: String,
    pub args: Vec<Term>,
}

impl Term {
    pub fn leaf(head: impl Into<String>) -> Self {
        Term {
            head: head.into(),
            args: Vec::new(),
        }
    }

    pub fn app(head: impl Into<String>, args: Vec<Term>) -> Self {
        Term {
            head: head.into(),
            args,
        }
    }

    /// True if `head` occurs anywhere in the term.
    pub fn mentions(&self, head: &str) -> bool {
        self.head == head || self.args.iter().any(|a| a.mentions(head))
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "{}", self.head);
        }
        write!(f, "({}", self.head)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A term with pattern variables (`?x`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Var(String),
    App { head: String, args: Vec<Pattern> },
}

impl Pattern {
    pub fn var(name: impl Into<String>) -> Self {
        Pattern::Var(name.into())
    }

    pub fn leaf(head: impl Into<String>) -> Self {
        Pattern::App {
            head: head.into(),
            args: Vec::new(),
        }
    }

    pub fn app(head: impl Into<String>, args: Vec<Pattern>) -> Self {
        Pattern::App {
            head: head.into(),
            args,
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Pattern::Var(v) => {
                out.insert(v.clone());
            }
            Pattern::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

impl From<&Term> for Pattern {
    fn from(t: &Term) -> Self {
        Pattern::App {
            head: t.head.clone(),
            args: t.args.iter().map(Pattern::from).collect(),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "?{v}"),
            Pattern::App { head, args } if args.is_empty() => write!(f, "{head}"),
            Pattern::App { head, args } => {
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
