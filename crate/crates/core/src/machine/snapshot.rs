//! Text snapshots of a stack, one line per frame from the top down:
//!
//! ```text
//! <offset>: <name>(<ins>;<inouts>;<outs>) entry=<e> ready=<r> len=<L>
//! ```
//!
//! Each section lists `param=value`; references print as `@s<k>+<off>`
//! (stack k), `@h+<off>` (host cells) or `@null`. Activation frames past
//! their first entry append `locals(name=value,...)`. A `_skip` frame with
//! a payload is followed by `<offset>: payload[v,...]`. The snapshot ends
//! with a line `END`.

use std::fmt::Write;

use crate::frontend::ast::Section;
use crate::lowering::ir::*;

use super::refs::ItemRef;
use super::stack::{FrameInfo, FrameStack};

fn value(st: &FrameStack, at: usize, is_ref: bool) -> String {
    let v = st.load(at);
    if is_ref {
        ItemRef(v).to_string()
    } else {
        (v as i64).to_string()
    }
}

fn slot(at: usize, i: usize) -> usize {
    at + HEADER_BYTES + i * CELL_BYTES
}

/// Routine name and rendered parameter list of the frame.
pub fn frame_call(module: &IrModule, st: &FrameStack, f: &FrameInfo) -> (String, String) {
    let Some(r) = module.routines.get(f.routine as usize) else {
        return (format!("?{}", f.routine), String::new());
    };
    let args = match r.kind {
        RoutineKind::Builtin(Builtin::Skip) => format!("n={}", value(st, slot(f.offset, 0), false)),
        RoutineKind::Builtin(Builtin::Thief) => format!("label={}", value(st, slot(f.offset, 0), false)),
        RoutineKind::Builtin(Builtin::Cop) => format!(
            "thief={},label={}",
            value(st, slot(f.offset, 0), true),
            value(st, slot(f.offset, 1), false)
        ),
        _ => {
            let mut s = String::new();
            let mut i = 0;
            for (k, section) in Section::ALL.into_iter().enumerate() {
                if k > 0 {
                    s.push(';');
                }
                for (j, p) in r.sig.section(section).iter().enumerate() {
                    if j > 0 {
                        s.push(',');
                    }
                    let _ = write!(s, "{}={}", p.name, value(st, slot(f.offset, i), r.reg_refs[i]));
                    i += 1;
                }
            }
            s
        }
    };
    (r.name.clone(), args)
}

/// One line per frame (plus payload lines), terminated by `END`.
pub fn snapshot(st: &FrameStack, module: &IrModule) -> String {
    let mut out = String::new();
    let frames = match st.frames() {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(out, "error: {e}\nEND");
            return out;
        }
    };
    for f in &frames {
        let (name, args) = frame_call(module, st, f);
        let _ = write!(out, "{}: {name}({args}) entry={} ready={} len={}", f.offset, f.entry, f.ready, f.len);
        let r = module.routines.get(f.routine as usize);
        match r.map(|r| r.kind) {
            Some(RoutineKind::Code(RoutineMode::Activation)) if f.entry > 0 => {
                let r = r.expect("routine exists");
                let locals: Vec<String> = (r.nparams..r.nregs)
                    .filter(|&i| !r.reg_names[i].contains('$'))
                    .map(|i| format!("{}={}", r.reg_names[i], value(st, slot(f.offset, i), r.reg_refs[i])))
                    .collect();
                let _ = write!(out, " locals({})", locals.join(","));
            }
            _ => {}
        }
        out.push('\n');
        if f.routine == SKIP && f.len > MIN_FRAME_BYTES {
            let cells: Vec<String> = (f.offset + MIN_FRAME_BYTES..f.offset + f.len)
                .step_by(CELL_BYTES)
                .map(|at| value(st, at, false))
                .collect();
            let _ = writeln!(out, "{}: payload[{}]", f.offset + MIN_FRAME_BYTES, cells.join(","));
        }
    }
    out.push_str("END\n");
    out
}
