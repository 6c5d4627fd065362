use std::collections::HashMap;
use std::fmt;

use crate::frontend::ast::{BinOp, Effects, Section, Signature, Span};

pub type RoutineId = u32;
pub type Reg = u32;

/// Frame header: routine id, length, entry, ready; slots follow.
pub const HEADER_BYTES: usize = 32;
pub const CELL_BYTES: usize = 8;
/// Every frame has at least one slot, so any frame can be replaced by a
/// thief frame and later by a `_skip` frame of the same length.
pub const MIN_FRAME_BYTES: usize = HEADER_BYTES + CELL_BYTES;

pub const SKIP: RoutineId = 0;
pub const THIEF: RoutineId = 1;
pub const COP: RoutineId = 2;
pub const PUTC: RoutineId = 3;
pub const PUTI: RoutineId = 4;
pub const BUILTIN_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoutineMode {
    /// Task frames: the body runs once and delegates to its spawns.
    Task,
    /// Activation frames: the frame keeps its locals and resumes at entry
    /// points after each call.
    Activation,
    /// Activation bodies run by the direct interpreter on a native-style
    /// call stack; the in-VM baseline for conventional calls.
    Direct,
}

impl RoutineMode {
    pub fn name(self) -> &'static str {
        match self {
            RoutineMode::Task => "task",
            RoutineMode::Activation => "activation",
            RoutineMode::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Skip,
    Thief,
    Cop,
    Putc,
    Puti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutineKind {
    Builtin(Builtin),
    Code(RoutineMode),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(i64),
    Reg(Reg),
    /// Reads the cell a reference register points at.
    Load(Reg),
    /// Reads `base[index]`, checked against the length register.
    Index { base: Reg, len: Reg, index: Box<Expr> },
    /// Reference to `base[offset]`, checked so that `need` cells starting
    /// there lie inside the array.
    Slice { base: Reg, len: Reg, offset: Box<Expr>, need: Box<Expr> },
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Place {
    Reg(Reg),
    Deref(Reg),
    Index { base: Reg, len: Reg, index: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Set(Place, Expr),
    JumpIfZero(Expr, usize),
    Jump(usize),
    /// Allocates `count` zeroed cells: scratch space in task mode, frame
    /// growth in activation mode.
    Alloc { base: Reg, len: Reg, count: Expr },
    /// Task-mode terminator: replace the frame by a group of frames.
    Spawn(u32),
    /// Activation-mode call: save registers, record `resume` as the next
    /// entry, push the callee frame above and yield.
    Call { plan: u32, resume: u32 },
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Value(Expr),
    /// This slot is the home of a pending item; its initial value is the
    /// item's init.
    Home(u32),
    /// Reference to the home of a pending item.
    RefTo(u32),
    /// Reference to one of the caller's own frame slots (activation mode).
    OwnSlot(Reg),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ready {
    One,
    Zero,
    /// Reserved; the analysis only emits static flags.
    Dynamic(Expr),
}

impl Ready {
    pub fn flag(&self) -> Option<u64> {
        match self {
            Ready::One => Some(1),
            Ready::Zero => Some(0),
            Ready::Dynamic(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallPlan {
    pub callee: RoutineId,
    /// One per callee slot, in slot order.
    pub args: Vec<Arg>,
    pub ready: Ready,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemHome {
    Slot { plan: u32, slot: u32 },
    /// A cell in the group's dead-cell `_skip` payload.
    Dead(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupItem {
    pub home: ItemHome,
    pub init: Option<Expr>,
}

/// The frames a task body delegates to on one control path, top to bottom.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Group {
    pub plans: Vec<CallPlan>,
    pub items: Vec<GroupItem>,
    pub dead_cells: u32,
    /// Byte offset of each plan's frame from the group's top.
    pub offsets: Vec<u32>,
    /// Bytes of all plan frames plus the dead-cell frame.
    pub fixed_bytes: u32,
    /// Byte offset of the dead-cell payload from the group's top.
    pub dead_offset: u32,
}

#[derive(Debug, Clone)]
pub struct IrRoutine {
    pub id: RoutineId,
    pub name: String,
    pub kind: RoutineKind,
    pub sig: Signature,
    pub effects: Effects,
    /// Names of the frame slots after the header.
    pub slot_names: Vec<String>,
    pub nparams: usize,
    pub frame_bytes: usize,
    pub nregs: usize,
    pub reg_names: Vec<String>,
    pub reg_refs: Vec<bool>,
    /// Op index of each entry point.
    pub entries: Vec<u32>,
    pub ops: Vec<Op>,
    pub spans: Vec<Span>,
    pub groups: Vec<Group>,
    pub plans: Vec<CallPlan>,
    /// Set for generated continuations.
    pub origin: Option<RoutineId>,
    pub uses_arrays: bool,
}

impl IrRoutine {
    pub fn mode(&self) -> Option<RoutineMode> {
        match self.kind {
            RoutineKind::Code(m) => Some(m),
            RoutineKind::Builtin(_) => None,
        }
    }

    pub fn builtin(&self) -> Option<Builtin> {
        match self.kind {
            RoutineKind::Builtin(b) => Some(b),
            RoutineKind::Code(_) => None,
        }
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub(crate) fn builtin_routine(id: RoutineId, name: &str, builtin: Builtin, sig: Signature, effects: Effects) -> Self {
        let slot_names: Vec<String> = sig.params().map(|(_, p)| p.name.clone()).collect();
        let reg_refs = sig.params().map(|(s, p)| s != Section::In || p.kind.is_array()).collect();
        let nparams = slot_names.len();
        IrRoutine {
            id,
            name: name.to_string(),
            kind: RoutineKind::Builtin(builtin),
            sig,
            effects,
            frame_bytes: frame_bytes_for(nparams),
            reg_names: slot_names.clone(),
            reg_refs,
            slot_names,
            nparams,
            nregs: nparams,
            entries: vec![0],
            ops: Vec::new(),
            spans: Vec::new(),
            groups: Vec::new(),
            plans: Vec::new(),
            origin: None,
            uses_arrays: false,
        }
    }
}

pub fn frame_bytes_for(slots: usize) -> usize {
    (HEADER_BYTES + slots * CELL_BYTES).max(MIN_FRAME_BYTES)
}

/// A compiled program: builtins first, then user routines in source order,
/// then generated continuations in creation order.
#[derive(Debug, Clone)]
pub struct IrModule {
    pub routines: Vec<IrRoutine>,
    pub by_name: HashMap<String, RoutineId>,
}

impl IrModule {
    pub fn get(&self, id: RoutineId) -> &IrRoutine {
        &self.routines[id as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<&IrRoutine> {
        self.by_name.get(name).map(|&id| self.get(id))
    }

    pub fn user_routines(&self) -> impl Iterator<Item = &IrRoutine> {
        self.routines[BUILTIN_COUNT..].iter()
    }
}

impl fmt::Display for Ready {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ready::One => f.write_str("1"),
            Ready::Zero => f.write_str("0"),
            Ready::Dynamic(_) => f.write_str("?"),
        }
    }
}
