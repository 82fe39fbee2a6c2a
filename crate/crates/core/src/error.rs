use thiserror::Error;

/// Errors raised by the lattice, the e-graph, the rewrite engine and the DSL front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("context `{0}` is already declared")]
    DuplicateContext(String),
    #[error("declaring `{name}` breaks glb uniqueness: `{a}` and `{b}` have no unique greatest lower bound")]
    NotALattice { name: String, a: String, b: String },
    #[error("`{0}` and `{1}` have no least upper bound among declared contexts")]
    NoUpperBound(String, String),
    #[error("context `{lo}` is not below `{hi}`")]
    NotBelow { lo: String, hi: String },

    #[error("unknown node id {0}")]
    UnknownNode(u32),

    #[error("unknown function symbol `{name}`/{arity}")]
    UnknownSymbol { name: String, arity: usize },
    #[error("`{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("function `{name}`/{arity} is already declared")]
    DuplicateFunction { name: String, arity: usize },

    #[error("rule `{0}` is already registered")]
    DuplicateRule(String),
    #[error("rule `{rule}`: right-hand side variable `{var}` is not bound by the query")]
    UnboundRhsVariable { rule: String, var: String },
    #[error("invalid scope construct: {0}")]
    InvalidScope(String),

    #[error("no finite term in class {0} under the given constraints")]
    NoFiniteTerm(u32),
    #[error("invalid cost for `{0}`: costs must be finite and non-negative")]
    InvalidCost(String),

    #[error("unsupported corpus: {0}")]
    UnsupportedCorpus(String),

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown command `{name}` at {line}:{column}")]
    UnknownCommand {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("malformed `{command}` at {line}:{column}: {message}")]
    ArityError {
        command: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("command #{index} failed: {source}")]
    Command {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
