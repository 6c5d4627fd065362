//! The sequential frame machine.

pub mod direct;
pub mod exec;
pub mod memory;
pub mod refs;
pub mod snapshot;
pub mod stack;
pub mod trace;
#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::AtomicU64;

use thiserror::Error;

use crate::frontend::ast::{ParamKind, Section, Span};
use crate::lowering::ir::IrModule;

pub use exec::{Executor, Step};
pub use memory::Memory;
pub use refs::ItemRef;
pub use snapshot::snapshot;
pub use stack::{FrameStack, DEFAULT_CAPACITY};
pub use trace::{EventKind, Trace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("stack capacity {capacity} must be at least 4096 bytes and a multiple of 8")]
    BadCapacity { capacity: usize },
    #[error("stack overflow: {needed} bytes needed, {available} available")]
    StackOverflow { needed: usize, available: usize },
    #[error("{span}: division by zero in `{routine}`")]
    DivideByZero { routine: String, span: Span },
    #[error("{span}: negative array length {len} in `{routine}`")]
    NegativeArrayLength { routine: String, span: Span, len: i64 },
    #[error("{span}: index {index} out of bounds for array of length {len} in `{routine}`")]
    IndexOutOfBounds { routine: String, span: Span, index: i64, len: i64 },
    #[error("invalid entry {entry} in frame of `{routine}`")]
    InvalidEntry { routine: String, entry: u64 },
    #[error("bad reference {reference}")]
    BadRef { reference: String },
    #[error("malformed stack: {message}")]
    BadFrame { message: String },
    #[error("deadlock: {detail}")]
    Deadlock { detail: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("entry call: {0}")]
    Entry(String),
}

/// The call that seeds a run, e.g. `tfib(36;;k)` or `vsum(0,b;z=5;)`.
/// Ins are integer (or character) literals; inouts are `name=value`; outs
/// are names. Results are reported under these names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryCall {
    pub routine: String,
    pub ins: Vec<i64>,
    pub inouts: Vec<(String, i64)>,
    pub outs: Vec<String>,
}

fn literal(s: &str) -> Result<i64, String> {
    let s = s.trim();
    if let Some(c) = s.strip_prefix('\'').and_then(|r| r.strip_suffix('\'')) {
        let mut chars = c.chars();
        return match (chars.next(), chars.next()) {
            (Some(ch), None) if ch.is_ascii() => Ok(ch as i64),
            _ => Err(format!("bad character literal {s}")),
        };
    }
    s.parse::<i64>().map_err(|_| format!("expected an integer, found `{s}`"))
}

fn result_name(s: &str) -> Result<String, String> {
    let s = s.trim();
    let ok = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(s.to_string())
    } else {
        Err(format!("bad result name `{s}`"))
    }
}

impl FromStr for EntryCall {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let open = s.find('(').ok_or("expected `name(ins;inouts;outs)`")?;
        let inner = s[open + 1..].strip_suffix(')').ok_or("missing closing parenthesis")?;
        let routine = result_name(&s[..open])?;
        let sections: Vec<&str> = inner.split(';').collect();
        if sections.len() > 3 {
            return Err("at most three sections".into());
        }
        let items = |i: usize| -> Vec<&str> {
            sections.get(i).map_or(Vec::new(), |sec| sec.split(',').map(str::trim).filter(|x| !x.is_empty()).collect())
        };
        let ins = items(0).into_iter().map(literal).collect::<Result<_, _>>()?;
        let inouts = items(1)
            .into_iter()
            .map(|it| {
                let (name, v) = it.split_once('=').ok_or_else(|| format!("inout `{it}` needs `name=value`"))?;
                Ok((result_name(name)?, literal(v)?))
            })
            .collect::<Result<_, String>>()?;
        let outs = items(2).into_iter().map(result_name).collect::<Result<_, _>>()?;
        Ok(EntryCall { routine, ins, inouts, outs })
    }
}

impl fmt::Display for EntryCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ins: Vec<String> = self.ins.iter().map(i64::to_string).collect();
        let inouts: Vec<String> = self.inouts.iter().map(|(n, v)| format!("{n}={v}")).collect();
        write!(f, "{}({};{};{})", self.routine, ins.join(","), inouts.join(","), self.outs.join(","))
    }
}

impl EntryCall {
    pub fn result_names(&self) -> impl Iterator<Item = &str> {
        self.inouts.iter().map(|(n, _)| n.as_str()).chain(self.outs.iter().map(String::as_str))
    }

    pub fn host_cells(&self) -> usize {
        self.inouts.len() + self.outs.len()
    }

    /// Checks the call against the routine and returns the entry frame's
    /// id and parameter slots; host cells are initialized in `mem`.
    pub fn seed_slots(&self, module: &IrModule, mem: &Memory) -> Result<(u32, Vec<i64>), RuntimeError> {
        let r = module
            .lookup(&self.routine)
            .ok_or_else(|| RuntimeError::Entry(format!("no routine named `{}`", self.routine)))?;
        let counts = [self.ins.len(), self.inouts.len(), self.outs.len()];
        for (section, found) in Section::ALL.into_iter().zip(counts) {
            let params = r.sig.section(section);
            if params.len() != found {
                return Err(RuntimeError::Entry(format!(
                    "`{}` takes {} {} argument(s), {} given",
                    r.name,
                    params.len(),
                    section.name(),
                    found
                )));
            }
            if let Some(p) = params.iter().find(|p| matches!(p.kind, ParamKind::Array(_))) {
                return Err(RuntimeError::Entry(format!("array parameter `{}` cannot be passed from the entry call", p.name)));
            }
        }
        let mut slots = self.ins.clone();
        for (i, (_, v)) in self.inouts.iter().enumerate() {
            mem.set_host(i, *v);
        }
        slots.extend((0..self.host_cells()).map(|i| mem.host_ref(i).bits()));
        Ok((r.id, slots))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stack_bytes: usize,
    pub trace: bool,
    pub snapshots: bool,
    /// Reference liveness checks; off for benchmarks.
    pub debug_checks: bool,
    /// Check frame tiling and write targets after every step (slow).
    pub full_checks: bool,
    /// Parallel runs only: yield the thread after every frame, so that
    /// workers interleave finely even on a host with fewer cores.
    pub interleave: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { stack_bytes: DEFAULT_CAPACITY, trace: false, snapshots: false, debug_checks: true, full_checks: false, interleave: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunResult {
    /// Inouts then outs, under the entry call's names.
    pub outs: Vec<(String, i64)>,
    pub output: Vec<u8>,
    pub trace: Option<Trace>,
    pub snapshots: Vec<String>,
    /// Peak occupied bytes over all stacks (summed).
    pub peak_bytes: usize,
    /// Frames executed.
    pub steps: u64,
}

impl RunResult {
    pub fn out(&self, name: &str) -> Option<i64> {
        self.outs.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Pushes the entry frame onto stack 0 and runs it to completion.
pub fn run_sequential(module: &IrModule, entry: &EntryCall, opts: &RunOptions) -> Result<RunResult, RuntimeError> {
    let mut mem = Memory::new(1, opts.stack_bytes, entry.host_cells())?;
    mem.ref_checks = opts.debug_checks;
    let (id, slots) = entry.seed_slots(module, &mem)?;
    let st = mem.stack(0);
    st.push_sized(id, module.get(id).frame_bytes, 0, 1, &slots)?;

    let clock = AtomicU64::new(0);
    let mut ex = Executor::new(module, &mem, 0);
    ex.check_writes = opts.full_checks;
    if opts.trace {
        ex = ex.with_trace(0, &clock);
    }
    let mut snapshots = Vec::new();
    let full = opts.full_checks;
    let want = opts.snapshots;
    ex.xtop_with(|ex| {
        if full {
            ex.own_stack().frames().map_err(RuntimeError::Invariant)?;
        }
        if want {
            snapshots.push(snapshot(ex.own_stack(), module));
        }
        Ok(())
    })?;
    let steps = ex.steps;
    let trace = ex.recorder.take().map(|r| Trace::merge([r.events]));
    let outs = entry.result_names().enumerate().map(|(i, n)| (n.to_string(), mem.host(i))).collect();
    Ok(RunResult { outs, output: mem.output(), trace, snapshots, peak_bytes: st.peak_bytes(), steps })
}
