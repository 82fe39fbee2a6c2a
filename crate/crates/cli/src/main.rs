use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};
use ctxsat::assume::compare_assume;
use ctxsat::dot::to_dot;
use ctxsat::dsl::{execute, parse_program, CheckStatus, Program, RunOptions};
use ctxsat::{corpus, ContextId, Engine, DEFAULT_MATERIALIZE_THRESHOLD};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "ctxsat",
    version,
    about = "Contextual equality saturation over a lattice of contexts"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone)]
struct EngineFlags {
    /// Replace the bound of every `run` directive.
    #[arg(long, value_name = "N")]
    max_iters: Option<usize>,
    /// Overlay size at which e-matching switches to a materialized view.
    #[arg(long, value_name = "N")]
    materialize_threshold: Option<usize>,
}

impl EngineFlags {
    fn options(&self) -> RunOptions {
        RunOptions {
            max_iters: self.max_iters,
            materialize_threshold: self.materialize_threshold,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a program and report its checks.
    Run {
        file: PathBuf,
        #[command(flatten)]
        flags: EngineFlags,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Write a Graphviz rendering of the final e-graph.
        #[arg(long, value_name = "PATH")]
        dump_dot: Option<PathBuf>,
        /// Context whose equalities the DOT file shows.
        #[arg(
            long,
            value_name = "NAME",
            default_value = "bot",
            requires = "dump_dot"
        )]
        context: String,
    },
    /// Compare node counts of the layered and ASSUME encodings.
    CompareAssume {
        file: PathBuf,
        #[command(flatten)]
        flags: EngineFlags,
        #[arg(long)]
        json: bool,
    },
    /// Run a program and print the size of one context's canonical view.
    Stats {
        file: PathBuf,
        #[command(flatten)]
        flags: EngineFlags,
        #[arg(long, value_name = "NAME", default_value = "bot")]
        context: String,
        #[arg(long)]
        json: bool,
    },
    /// Print a program with `k` nested conditionals.
    GenNested { k: usize },
}

fn load(path: &Path) -> Result<Program> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&src).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        println!("{text}");
        Ok(())
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

fn context(engine: &Engine, name: &str) -> Result<ContextId> {
    Ok(engine.egraph().context(name)?)
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Run {
            file,
            flags,
            json,
            dump_dot,
            context: ctx,
        } => {
            let program = load(&file)?;
            let (engine, out) = execute(&program, &flags.options())?;
            let quiet = json.as_deref().is_some_and(|p| p.as_os_str() == "-");
            if !quiet {
                for c in &out.checks {
                    let tag = match c.status {
                        CheckStatus::Pass => "pass",
                        CheckStatus::Fail => "FAIL",
                    };
                    println!("{tag} {}", c.name);
                }
                for x in &out.extractions {
                    println!("extract at {}: {} (cost {})", x.context, x.result, x.cost);
                }
                let r = &out.report;
                println!(
                    "{} iterations, {}",
                    r.iterations,
                    if r.saturated {
                        "saturated"
                    } else {
                        "not saturated"
                    }
                );
            }
            if let Some(path) = json {
                write_out(&path, &out.to_json())?;
            }
            if let Some(path) = dump_dot {
                let c = context(&engine, &ctx)?;
                fs::write(&path, to_dot(engine.egraph(), c)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(out.exit_code() as u8)
        }
        Cmd::CompareAssume { file, flags, json } => {
            let c = compare_assume(&load(&file)?, &flags.options())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&c)?);
            } else {
                println!(
                    "assume {} nodes, layered {} nodes, ratio {:.2}, {} iterations",
                    c.assume_nodes,
                    c.layered_nodes,
                    c.ratio(),
                    c.iterations
                );
            }
            Ok(0)
        }
        Cmd::Stats {
            file,
            flags,
            context: ctx,
            json,
        } => {
            let (engine, _) = execute(&load(&file)?, &flags.options())?;
            let g = engine.egraph();
            let c = context(&engine, &ctx)?;
            let stats = g.stats(c)?;
            let threshold = flags
                .materialize_threshold
                .unwrap_or(DEFAULT_MATERIALIZE_THRESHOLD);
            let delta = g.union_find().overlay_delta(c);
            let strategy = g.choose_strategy(c, threshold);
            if json {
                let v = json!({
                    "context": ctx,
                    "classes": stats.classes,
                    "nodes": stats.nodes,
                    "overlay_delta": delta,
                    "strategy": strategy,
                });
                println!("{}", serde_json::to_string_pretty(&v)?);
            } else {
                println!(
                    "{ctx}: {} classes, {} nodes, overlay delta {delta}, strategy {strategy:?}",
                    stats.classes, stats.nodes
                );
            }
            Ok(0)
        }
        Cmd::GenNested { k } => {
            print!("{}", corpus::nested_conditional(k));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
