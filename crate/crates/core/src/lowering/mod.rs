//! Lowering of checked TSIA routines to the frame IR.

pub mod activation;
pub mod emit;
pub mod ir;
pub mod ready;
pub(crate) mod scope;
pub mod task;
#[cfg(test)]
mod tests;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::frontend::ast::{Effects, Signature, Span};
use crate::frontend::validate::CheckedProgram;

use ir::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("{span}: loop in task-mode routine `{routine}` contains a call; use tail recursion or activation mode")]
    LoopContainsCall { routine: String, span: Span },
    #[error("{span}: local array `{name}` of `{routine}` is passed to a recursive call")]
    ArrayEscapes { routine: String, name: String, span: Span },
    #[error("no routine named `{name}` to override")]
    UnknownOverride { name: String },
    #[error("internal lowering error in `{routine}`: {message}")]
    Internal { routine: String, message: String },
}

impl LowerError {
    pub(crate) fn internal(routine: &str, message: String) -> Self {
        LowerError::Internal { routine: routine.to_string(), message }
    }
}

/// All lowering errors of one compilation, in routine order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct LowerErrors(pub Vec<LowerError>);

impl fmt::Display for LowerErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompileMode {
    #[default]
    Task,
    Activation,
    /// Routines alternate between task and activation frames in source
    /// order (first routine task), unless overridden.
    Mixed,
    Direct,
}

impl CompileMode {
    pub fn name(self) -> &'static str {
        match self {
            CompileMode::Task => "task",
            CompileMode::Activation => "activation",
            CompileMode::Mixed => "mixed",
            CompileMode::Direct => "direct",
        }
    }
}

impl std::str::FromStr for CompileMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "task" => Ok(CompileMode::Task),
            "activation" => Ok(CompileMode::Activation),
            "mixed" => Ok(CompileMode::Mixed),
            "direct" => Ok(CompileMode::Direct),
            _ => Err(format!("unknown mode `{s}` (expected task, activation, mixed or direct)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CompileOptions {
    pub mode: CompileMode,
    /// Per-routine frame mode; wins over `mode` (not allowed in direct mode).
    pub overrides: Vec<(String, RoutineMode)>,
}

impl CompileOptions {
    pub fn new(mode: CompileMode) -> Self {
        Self { mode, overrides: Vec::new() }
    }

    pub fn with_override(mut self, routine: &str, mode: RoutineMode) -> Self {
        self.overrides.push((routine.to_string(), mode));
        self
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Callee {
    pub name: String,
    pub sig: Signature,
    pub effects: Effects,
}

/// Routines under construction; continuations are appended as they are
/// generated.
pub(crate) struct Builder {
    pub routines: Vec<Option<IrRoutine>>,
    pub callees: Vec<Callee>,
    pub by_name: HashMap<String, RoutineId>,
    counters: HashMap<String, u32>,
}

impl Builder {
    pub fn callee(&self, name: &str) -> Option<(RoutineId, &Callee)> {
        self.by_name.get(name).map(|&id| (id, &self.callees[id as usize]))
    }

    pub fn reserve(&mut self, name: &str, sig: Signature, effects: Effects) -> RoutineId {
        let id = self.routines.len() as RoutineId;
        self.routines.push(None);
        self.callees.push(Callee { name: name.to_string(), sig, effects });
        self.by_name.insert(name.to_string(), id);
        id
    }

    /// Next continuation name for a user routine, e.g. `c$h1`.
    pub fn continuation_name(&mut self, root: &str) -> String {
        let n = self.counters.entry(root.to_string()).or_insert(0);
        *n += 1;
        format!("{root}$h{n}")
    }
}

fn builtins() -> Vec<IrRoutine> {
    use crate::frontend::ast::{Param, ParamKind};
    let scalar = |name: &str| Param { name: name.to_string(), kind: ParamKind::Scalar, span: Span::default() };
    let ins = |names: &[&str]| Signature { ins: names.iter().map(|n| scalar(n)).collect(), ..Default::default() };
    let prelude = crate::frontend::validate::prelude();
    let find = |name: &str| prelude.iter().find(|r| r.name == name).expect("prelude builtin").clone();
    let putc = find("putc");
    let puti = find("puti");
    vec![
        IrRoutine::builtin_routine(SKIP, "_skip", Builtin::Skip, ins(&["n"]), Effects::default()),
        IrRoutine::builtin_routine(THIEF, "_thief", Builtin::Thief, ins(&["label"]), Effects::default()),
        IrRoutine::builtin_routine(COP, "_cop", Builtin::Cop, ins(&["thief", "label"]), Effects::default()),
        IrRoutine::builtin_routine(PUTC, "putc", Builtin::Putc, putc.sig, putc.effects),
        IrRoutine::builtin_routine(PUTI, "puti", Builtin::Puti, puti.sig, puti.effects),
    ]
}

/// Lowers every routine of a checked program. Output is deterministic for
/// identical input.
pub fn compile_program(checked: &CheckedProgram, options: &CompileOptions) -> Result<IrModule, LowerErrors> {
    let mut builder = Builder {
        routines: Vec::new(),
        callees: Vec::new(),
        by_name: HashMap::new(),
        counters: HashMap::new(),
    };
    for b in builtins() {
        builder.by_name.insert(b.name.clone(), b.id);
        builder.callees.push(Callee { name: b.name.clone(), sig: b.sig.clone(), effects: b.effects.clone() });
        builder.routines.push(Some(b));
    }

    let defs: Vec<_> = checked.definitions().collect();
    let mut errors = Vec::new();
    let mut modes = Vec::with_capacity(defs.len());
    for (i, r) in defs.iter().enumerate() {
        let mode = match options.mode {
            CompileMode::Task => RoutineMode::Task,
            CompileMode::Activation => RoutineMode::Activation,
            CompileMode::Direct => RoutineMode::Direct,
            CompileMode::Mixed if i % 2 == 1 => RoutineMode::Activation,
            CompileMode::Mixed => RoutineMode::Task,
        };
        modes.push(mode);
        builder.reserve(&r.name, r.sig.clone(), r.effects.clone());
    }
    for (name, mode) in &options.overrides {
        match defs.iter().position(|r| &r.name == name) {
            Some(i) if (options.mode == CompileMode::Direct) == (*mode == RoutineMode::Direct) => modes[i] = *mode,
            _ => errors.push(LowerError::UnknownOverride { name: name.clone() }),
        }
    }

    for (r, mode) in defs.iter().zip(&modes) {
        let id = builder.by_name[&r.name];
        let lowered = match mode {
            RoutineMode::Task => task::lower_task(&mut builder, id, r, None),
            RoutineMode::Activation | RoutineMode::Direct => {
                activation::lower_activation(&builder, id, r, *mode)
            }
        };
        match lowered {
            Ok(routine) => builder.routines[id as usize] = Some(routine),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(LowerErrors(errors));
    }

    let mut routines: Vec<IrRoutine> = builder
        .routines
        .into_iter()
        .map(|r| r.expect("every reserved routine is lowered"))
        .collect();
    for r in &mut routines {
        r.frame_bytes = match r.kind {
            RoutineKind::Code(RoutineMode::Task) | RoutineKind::Builtin(_) => frame_bytes_for(r.nparams),
            RoutineKind::Code(_) => frame_bytes_for(r.nregs),
        };
        r.slot_names = match r.kind {
            RoutineKind::Code(RoutineMode::Task) | RoutineKind::Builtin(_) => r.reg_names[..r.nparams].to_vec(),
            RoutineKind::Code(_) => r.reg_names.clone(),
        };
    }
    let sizes: Vec<u32> = routines.iter().map(|r| r.frame_bytes as u32).collect();
    for r in &mut routines {
        for g in &mut r.groups {
            let mut at = 0u32;
            g.offsets = g.plans.iter().map(|p| {
                let off = at;
                at += sizes[p.callee as usize];
                off
            }).collect();
            g.dead_offset = at + HEADER_BYTES as u32 + CELL_BYTES as u32;
            if g.dead_cells > 0 {
                at += (HEADER_BYTES + CELL_BYTES) as u32 + g.dead_cells * CELL_BYTES as u32;
            }
            g.fixed_bytes = at;
        }
    }
    let by_name = builder.by_name;
    Ok(IrModule { routines, by_name })
}
