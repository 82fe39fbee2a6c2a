use std::collections::BTreeMap;

use serde::Serialize;

use crate::egraph::ClassId;
use crate::error::{Error, Result};
use crate::extract::extract;
use crate::lattice::ContextId;
use crate::rewrite::{Engine, EngineConfig, SaturationReport};
use crate::term::Term;

use super::ast::{Command, CtxRef, Program};

/// Iteration bound of a bare `(run)`.
pub const DEFAULT_RUN_ITERATIONS: usize = 64;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Replaces the bound of every `run` directive.
    pub max_iters: Option<usize>,
    pub materialize_threshold: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionOutput {
    pub context: String,
    pub term: String,
    pub result: String,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub iterations: usize,
    pub saturated: bool,
    pub unions_per_context: BTreeMap<String, usize>,
    pub classes_per_context: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunOutput {
    pub checks: Vec<CheckResult>,
    pub report: ReportSummary,
    pub extractions: Vec<ExtractionOutput>,
    #[serde(skip)]
    pub runs: Vec<SaturationReport>,
}

impl RunOutput {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    /// 0 if every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("output is serializable")
    }
}

/// One engine instance driven command by command.
#[derive(Debug)]
pub struct Session {
    engine: Engine,
    options: RunOptions,
    output: RunOutput,
}

impl Session {
    pub fn new(options: RunOptions) -> Self {
        let mut config = EngineConfig::default();
        if let Some(t) = options.materialize_threshold {
            config.materialize_threshold = t;
        }
        Session {
            engine: Engine::new(config),
            options,
            output: RunOutput::default(),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn output(&self) -> &RunOutput {
        &self.output
    }

    pub fn resolve(&self, ctx: &CtxRef) -> Result<ContextId> {
        let g = self.engine.egraph();
        let class_of = |t: &Term| -> Result<ClassId> {
            g.lookup(ContextId::BOTTOM, t)?
                .ok_or_else(|| Error::UnknownContext(ctx.to_string()))
        };
        let missing = || Error::UnknownContext(ctx.to_string());
        match ctx {
            CtxRef::Bottom => Ok(ContextId::BOTTOM),
            CtxRef::Named(n) => g.context(n),
            CtxRef::Then(t) => Ok(self
                .engine
                .branch_contexts(class_of(t)?)
                .ok_or_else(missing)?
                .0),
            CtxRef::Else(t) => Ok(self
                .engine
                .branch_contexts(class_of(t)?)
                .ok_or_else(missing)?
                .1),
            CtxRef::Body(t) => self.engine.body_context(class_of(t)?).ok_or_else(missing),
        }
    }

    fn class(&mut self, t: &Term) -> Result<ClassId> {
        let c = self.engine.egraph_mut().add_term(t)?;
        self.engine.egraph_mut().rebuild();
        Ok(c)
    }

    fn record(&mut self, cmd: &Command, pass: bool) {
        self.output.checks.push(CheckResult {
            name: cmd.to_string(),
            status: if pass {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        });
    }

    pub fn execute(&mut self, cmd: &Command) -> Result<()> {
        match cmd {
            Command::Function { name, arity } => {
                self.engine.egraph_mut().declare_function(name, *arity)?;
            }
            Command::Constants(names) => {
                for n in names {
                    self.engine.egraph_mut().declare_function(n, 0)?;
                }
            }
            Command::Context { name, covers } => {
                let g = self.engine.egraph_mut();
                let covers = covers
                    .iter()
                    .map(|c| g.context(c))
                    .collect::<Result<Vec<_>>>()?;
                g.declare_context(name, &covers)?;
            }
            Command::Term(t) => {
                self.engine.egraph_mut().intern(t)?;
            }
            Command::Rule(r) => self.engine.add_rule(r.clone())?,
            Command::Scope(s) => self.engine.add_scope(s.clone())?,
            Command::Cost { symbol, cost } => self.engine.set_cost(symbol, *cost)?,
            Command::Run(n) => {
                let n = self
                    .options
                    .max_iters
                    .or(*n)
                    .unwrap_or(DEFAULT_RUN_ITERATIONS);
                let report = self.engine.run(n)?;
                let summary = &mut self.output.report;
                summary.iterations += report.iterations;
                summary.saturated = report.saturated;
                for (k, v) in &report.unions_per_context {
                    *summary.unions_per_context.entry(k.clone()).or_default() += v;
                }
                self.output.runs.push(report);
            }
            Command::CheckEqual { ctx, lhs, rhs } | Command::CheckNotEqual { ctx, lhs, rhs } => {
                let c = self.resolve(ctx)?;
                let (a, b) = (self.class(lhs)?, self.class(rhs)?);
                let eq = self.engine.egraph().equiv(c, a, b)?;
                let want = matches!(cmd, Command::CheckEqual { .. });
                self.record(cmd, eq == want);
            }
            Command::CheckContains { ctx, class, member } => {
                let c = self.resolve(ctx)?;
                let g = self.engine.egraph();
                let pass = match (g.lookup(c, class)?, g.lookup(c, member)?) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                };
                self.record(cmd, pass);
            }
            Command::Extract { ctx, term, forbid } => {
                let c = self.resolve(ctx)?;
                let class = self.class(term)?;
                let r = extract(
                    self.engine.egraph(),
                    c,
                    class,
                    self.engine.cost_model(),
                    forbid.as_deref(),
                )?;
                self.output.extractions.push(ExtractionOutput {
                    context: self.engine.egraph().context_name(c).to_string(),
                    term: term.to_string(),
                    result: r.term.to_string(),
                    cost: r.cost,
                });
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> (Engine, RunOutput) {
        self.engine.egraph_mut().rebuild();
        let g = self.engine.egraph();
        for ctx in g.lattice().contexts() {
            let classes = g.stats(ctx).expect("declared context").classes;
            self.output
                .report
                .classes_per_context
                .insert(g.context_name(ctx).to_string(), classes);
        }
        (self.engine, self.output)
    }
}

/// Runs a program on a fresh engine. Errors carry the index of the failing
/// command.
pub fn execute(program: &Program, options: &RunOptions) -> Result<(Engine, RunOutput)> {
    let mut session = Session::new(options.clone());
    for (index, cmd) in program.commands.iter().enumerate() {
        session.execute(cmd).map_err(|e| Error::Command {
            index,
            source: Box::new(e),
        })?;
    }
    Ok(session.finish())
}
