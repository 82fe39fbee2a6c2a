use std::collections::BTreeSet;

use crate::egraph::{ClassId, EGraph};
use crate::error::Result;
use crate::lattice::ContextId;

/// Classes at `ctx` that contain at least one finite term never using the
/// symbol named `forbid`. Least fixpoint over the canonical view.
pub fn avoiding_classes(
    egraph: &EGraph,
    ctx: ContextId,
    forbid: &str,
) -> Result<BTreeSet<ClassId>> {
    let view = egraph.materialize(ctx)?;
    let mut ok: BTreeSet<ClassId> = BTreeSet::new();
    loop {
        let before = ok.len();
        for (class, nodes) in view.iter() {
            if ok.contains(&class) {
                continue;
            }
            let found = nodes.iter().any(|n| {
                egraph.symbol_name(n.symbol) != forbid && n.children.iter().all(|c| ok.contains(c))
            });
            if found {
                ok.insert(class);
            }
        }
        if ok.len() == before {
            return Ok(ok);
        }
    }
}

/// True iff the class of `class` at `ctx` contains a term that does not
/// transitively mention `forbid`.
pub fn avoidable(egraph: &EGraph, ctx: ContextId, class: ClassId, forbid: &str) -> Result<bool> {
    let rep = egraph.find(ctx, class)?;
    Ok(avoiding_classes(egraph, ctx, forbid)?.contains(&rep))
}
