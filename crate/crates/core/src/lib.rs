//! Contextual equality saturation.
//!
//! An e-graph whose equivalence relation is indexed by a finite lattice of
//! contexts: equalities asserted at a context hold there and at every context
//! above it. Scoping constructs (conditionals, lambdas, physical-property
//! enforcers) open contexts automatically, and case splits over a
//! conditional's branches feed equalities back down by partition
//! intersection.
//!
//! ```
//! use ctxsat::dsl::{parse_program, execute, RunOptions};
//!
//! let program = parse_program(ctxsat::corpus::INTRO).unwrap();
//! let (_, out) = execute(&program, &RunOptions::default()).unwrap();
//! assert_eq!(out.exit_code(), 0);
//! ```

pub mod assume;
pub mod corpus;
pub mod dot;
pub mod dsl;
pub mod egraph;
pub mod ematch;
pub mod error;
pub mod extract;
pub mod lattice;
pub mod layered;
pub mod rewrite;
pub mod term;
pub mod views;

pub use egraph::{ClassId, EGraph, ENode, FunctionSymbol, Stats, Symbol, UnionCause, UnionRecord};
pub use ematch::{ematch, search, Match, Query};
pub use error::{Error, Result};
pub use extract::{extract, CostModel, ExtractResult};
pub use lattice::{ContextId, ContextLattice, BOTTOM_NAME};
pub use layered::{LayeredUnionFind, Merge, NodeId};
pub use rewrite::{
    avoidable, Engine, EngineConfig, Rule, RuleScope, SaturationReport, ScopeConstruct,
};
pub use term::{Pattern, Term};
pub use views::{CanonicalView, QMap, Row, Strategy, DEFAULT_MATERIALIZE_THRESHOLD};
