//! Graphviz export: bottom classes as clusters, contextual equalities as
//! dashed edges between clusters labelled with the context.

use std::fmt::Write;

use crate::egraph::EGraph;
use crate::error::Result;
use crate::lattice::ContextId;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the bottom e-graph. With `ctx` = bottom every contextual
/// equality is drawn; otherwise only those holding at `ctx`.
pub fn to_dot(egraph: &EGraph, ctx: ContextId) -> Result<String> {
    egraph.lattice().check(ctx)?;
    let view = egraph.materialize(ContextId::BOTTOM)?;
    let mut out = String::new();
    writeln!(out, "digraph egraph {{").unwrap();
    writeln!(out, "  compound=true;").unwrap();
    writeln!(out, "  clusterrank=local;").unwrap();
    for (class, nodes) in view.iter() {
        writeln!(out, "  subgraph cluster_{} {{", class.raw()).unwrap();
        writeln!(out, "    style=dotted; label=\"#{}\";", class.raw()).unwrap();
        for (i, n) in nodes.iter().enumerate() {
            let label = escape(egraph.symbol_name(n.symbol));
            writeln!(out, "    n{}_{i} [label=\"{label}\"];", class.raw()).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for (class, nodes) in view.iter() {
        for (i, n) in nodes.iter().enumerate() {
            for (j, child) in n.children.iter().enumerate() {
                writeln!(
                    out,
                    "  n{}_{i} -> n{}_0 [lhead=cluster_{}, label=\"{j}\"];",
                    class.raw(),
                    child.raw(),
                    child.raw()
                )
                .unwrap();
            }
        }
    }
    let contexts: Vec<ContextId> = if ctx.is_bottom() {
        egraph.lattice().contexts().skip(1).collect()
    } else {
        vec![ctx]
    };
    for c in contexts {
        let name = escape(egraph.context_name(c));
        for group in egraph.union_find().overlay_groups(c) {
            for pair in group.windows(2) {
                writeln!(
                    out,
                    "  n{}_0 -> n{}_0 [ltail=cluster_{}, lhead=cluster_{}, style=dashed, dir=none, label=\"{name}\"];",
                    pair[0].raw(),
                    pair[1].raw(),
                    pair[0].raw(),
                    pair[1].raw()
                )
                .unwrap();
            }
        }
    }
    writeln!(out, "}}").unwrap();
    Ok(out)
}
