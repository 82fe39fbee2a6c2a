//! Rules, scoping constructs and the saturation loop.

mod avoid;
mod rule;
mod scopes;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::egraph::{EGraph, UnionCause};
use crate::ematch::search;
use crate::error::Result;
use crate::extract::CostModel;
use crate::views::DEFAULT_MATERIALIZE_THRESHOLD;

pub use avoid::{avoidable, avoiding_classes};
pub use rule::{Rule, RuleScope};
pub use scopes::{ConditionalInstance, LambdaInstance, LambdaSite, ScopeConstruct};

use rule::CompiledRule;
use scopes::ResolvedScope;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Contexts whose overlay merges at least this many bottom classes are
    /// matched against a materialized view.
    pub materialize_threshold: usize,
    /// Upper bound on the number of contexts; scope instances beyond it are
    /// not opened.
    pub max_contexts: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            materialize_threshold: DEFAULT_MATERIALIZE_THRESHOLD,
            max_contexts: 4096,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SaturationReport {
    pub iterations: usize,
    pub applications: usize,
    pub new_classes: usize,
    /// Unions recorded during the run, keyed by context name.
    pub unions_per_context: BTreeMap<String, usize>,
    pub saturated: bool,
}

#[derive(Debug)]
pub struct Engine {
    egraph: EGraph,
    rules: Vec<CompiledRule>,
    scopes: Vec<ResolvedScope>,
    constructs: Vec<ScopeConstruct>,
    conditionals: Vec<ConditionalInstance>,
    lambdas: Vec<LambdaInstance>,
    fresh: usize,
    cost: CostModel,
    config: EngineConfig,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(EngineConfig::default())
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Self::with_egraph(EGraph::new(), config)
    }

    pub fn with_egraph(egraph: EGraph, config: EngineConfig) -> Self {
        Engine {
            egraph,
            rules: Vec::new(),
            scopes: Vec::new(),
            constructs: Vec::new(),
            conditionals: Vec::new(),
            lambdas: Vec::new(),
            fresh: 0,
            cost: CostModel::tree_size(),
            config,
        }
    }

    pub fn egraph(&self) -> &EGraph {
        &self.egraph
    }

    pub fn egraph_mut(&mut self) -> &mut EGraph {
        &mut self.egraph
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn set_materialize_threshold(&mut self, threshold: usize) {
        self.config.materialize_threshold = threshold;
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost
    }

    pub fn set_cost(&mut self, symbol: &str, cost: f64) -> Result<()> {
        self.cost.set(symbol, cost)
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().map(|r| &r.rule)
    }

    pub fn scope_constructs(&self) -> &[ScopeConstruct] {
        &self.constructs
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<()> {
        if self.rules.iter().any(|r| r.rule.name == rule.name) {
            return Err(crate::Error::DuplicateRule(rule.name));
        }
        let compiled = CompiledRule::new(&self.egraph, rule)?;
        self.rules.push(compiled);
        Ok(())
    }

    /// Matches every rule at each of its contexts, then instantiates and
    /// merges all matches. Returns the number of matches applied.
    pub fn apply_rules(&mut self) -> Result<usize> {
        let mut todo = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            for ctx in r.contexts(&self.egraph) {
                let strategy = self
                    .egraph
                    .choose_strategy(ctx, self.config.materialize_threshold);
                for m in search(&self.egraph, ctx, &r.query, strategy)? {
                    todo.push((i, ctx, m));
                }
            }
        }
        let n = todo.len();
        for (i, ctx, m) in todo {
            let rhs = self.rules[i].rhs.instantiate(&mut self.egraph, &m.subst);
            let cause = UnionCause::Rule(self.rules[i].rule.name.clone());
            self.egraph.merge_with(ctx, m.root, rhs, cause)?;
        }
        Ok(n)
    }

    /// One saturation round. Returns the number of rule applications.
    pub fn step(&mut self) -> Result<usize> {
        self.apply_scopes()?;
        self.egraph.rebuild();
        let applied = self.apply_rules()?;
        self.egraph.rebuild();
        self.apply_intersections()?;
        self.egraph.rebuild();
        self.apply_lambda_lifts()?;
        self.apply_enforcer_lifts()?;
        self.egraph.rebuild();
        Ok(applied)
    }

    pub fn run(&mut self, max_iterations: usize) -> Result<SaturationReport> {
        self.run_with(max_iterations, |_, _| {})
    }

    /// Like [`Engine::run`], calling `observer` after every iteration with
    /// the iteration number (from 1).
    pub fn run_with<F>(
        &mut self,
        max_iterations: usize,
        mut observer: F,
    ) -> Result<SaturationReport>
    where
        F: FnMut(&Engine, usize),
    {
        self.egraph.rebuild();
        let nodes = self.egraph.node_count();
        let logged = self.egraph.union_log().len();
        let mut report = SaturationReport::default();
        for i in 1..=max_iterations {
            let version = self.egraph.version();
            report.applications += self.step()?;
            report.iterations = i;
            observer(self, i);
            if self.egraph.version() == version {
                report.saturated = true;
                break;
            }
        }
        report.new_classes = self.egraph.node_count() - nodes;
        for rec in &self.egraph.union_log()[logged..] {
            *report
                .unions_per_context
                .entry(self.egraph.context_name(rec.ctx).to_string())
                .or_default() += 1;
        }
        log::debug!(
            "run: {} iterations, {} applications, saturated = {}",
            report.iterations,
            report.applications,
            report.saturated
        );
        Ok(report)
    }
}
