//! The s-expression front end.
//!
//! ```text
//! (function * 2)
//! (constants x y 2)
//! (term (* x y))
//! (rule mul2 (* 2 ?y) (shift ?y))
//! (run 10)
//! (check-equal bot (* x y) (* x y))
//! ```

mod ast;
mod exec;
mod parse;
mod sexp;

pub use ast::{Command, CtxRef, Program};
pub use exec::{
    execute, CheckResult, CheckStatus, ExtractionOutput, ReportSummary, RunOptions, RunOutput,
    Session, DEFAULT_RUN_ITERATIONS,
};
pub use parse::{parse_pattern, parse_program, parse_term, COMMANDS, RULE_KEYWORDS};
