//! Stable one-line-per-routine text dump of a compiled module.
//!
//! ```text
//! routine <id> <name> <mode> frame=<bytes> entries=<n> spawns=[callee:ready,...] [...]
//! ```
//!
//! Builtins have mode `builtin`. A task routine has one bracket per spawn
//! group (one per control path that spawns); an activation routine has one
//! bracket per call site. A routine that spawns nothing prints `spawns=[]`.

use std::fmt::Write;

use super::ir::{CallPlan, IrModule, IrRoutine};

pub fn emit_ir(module: &IrModule) -> String {
    let mut out = String::new();
    for r in &module.routines {
        out.push_str(&routine_line(module, r));
        out.push('\n');
    }
    out
}

pub fn routine_line(module: &IrModule, r: &IrRoutine) -> String {
    let mode = r.mode().map_or("builtin", |m| m.name());
    let mut line = format!(
        "routine {} {} {} frame={} entries={} spawns=",
        r.id,
        r.name,
        mode,
        r.frame_bytes,
        r.entry_count()
    );
    let brackets: Vec<String> = if r.groups.is_empty() {
        r.plans.iter().map(|p| bracket(module, std::slice::from_ref(p))).collect()
    } else {
        r.groups.iter().map(|g| bracket(module, &g.plans)).collect()
    };
    if brackets.is_empty() {
        line.push_str("[]");
    } else {
        line.push_str(&brackets.join(" "));
    }
    line
}

fn bracket(module: &IrModule, plans: &[CallPlan]) -> String {
    let mut s = String::from("[");
    for (i, p) in plans.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}:{}", module.get(p.callee).name, p.ready);
    }
    s.push(']');
    s
}

/// Ready flags of every spawn group of `routine`, in group order.
pub fn ready_flags(module: &IrModule, routine: &str) -> Option<Vec<Vec<u64>>> {
    let r = module.lookup(routine)?;
    Some(
        r.groups
            .iter()
            .map(|g| g.plans.iter().map(|p| p.ready.flag().unwrap_or(u64::MAX)).collect())
            .collect(),
    )
}
