//! The frame executor: runs the topmost frame of one stack.

use std::sync::atomic::AtomicU64;

use crate::frontend::ast::Span;
use crate::lowering::ir::*;

use super::memory::Memory;
use super::refs::ItemRef;
use super::snapshot::frame_call;
use super::stack::{FrameStack, ENTRY, LENGTH, READY};
use super::trace::{EventKind, Recorder};
use super::RuntimeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Ran,
    Empty,
    /// The top frame is a thief or cop at this offset; the scheduler runs it.
    Scheduler(usize),
}

/// Evaluation failure before the routine and position are attached.
#[derive(Debug)]
pub(crate) enum Fault {
    DivideByZero,
    OutOfBounds { index: i64, len: i64 },
    NegativeLength(i64),
    Runtime(Box<RuntimeError>),
}

impl Fault {
    pub(crate) fn at(self, routine: &IrRoutine, pc: usize) -> RuntimeError {
        let span = routine.spans.get(pc).copied().unwrap_or_default();
        fault_error(self, &routine.name, span)
    }
}

pub(crate) fn fault_error(fault: Fault, routine: &str, span: Span) -> RuntimeError {
    let routine = routine.to_string();
    match fault {
        Fault::DivideByZero => RuntimeError::DivideByZero { routine, span },
        Fault::OutOfBounds { index, len } => RuntimeError::IndexOutOfBounds { routine, span, index, len },
        Fault::NegativeLength(len) => RuntimeError::NegativeArrayLength { routine, span, len },
        Fault::Runtime(e) => *e,
    }
}

/// Read access to every cell space an expression may reference.
pub(crate) struct View<'a> {
    pub mem: &'a Memory,
    pub scratch: &'a [i64],
    pub direct: &'a [i64],
}

impl View<'_> {
    #[inline]
    pub fn read(&self, r: ItemRef) -> Result<i64, Fault> {
        let bad = || Fault::Runtime(Box::new(RuntimeError::BadRef { reference: r.to_string() }));
        match r.space() {
            ItemRef::SCRATCH => self.scratch.get(r.offset() / 8).copied().ok_or_else(bad),
            ItemRef::DIRECT => self.direct.get(r.offset() / 8).copied().ok_or_else(bad),
            _ => self.mem.read_ref(r).map_err(|e| Fault::Runtime(Box::new(e))),
        }
    }
}

/// `eval` with the common operand shapes handled inline.
#[inline(always)]
pub(crate) fn eval_fast(e: &Expr, regs: &[i64], view: &View) -> Result<i64, Fault> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Reg(r) => Ok(regs[*r as usize]),
        Expr::Bin(op, a, b) => {
            let x = match &**a {
                Expr::Reg(r) => regs[*r as usize],
                Expr::Const(c) => *c,
                a => eval(a, regs, view)?,
            };
            let y = match &**b {
                Expr::Reg(r) => regs[*r as usize],
                Expr::Const(c) => *c,
                b => eval(b, regs, view)?,
            };
            op.apply(x, y).ok_or(Fault::DivideByZero)
        }
        _ => eval(e, regs, view),
    }
}

pub(crate) fn eval(e: &Expr, regs: &[i64], view: &View) -> Result<i64, Fault> {
    Ok(match e {
        Expr::Const(c) => *c,
        Expr::Reg(r) => regs[*r as usize],
        Expr::Load(r) => view.read(ItemRef::from_bits(regs[*r as usize]))?,
        Expr::Index { base, len, index } => {
            let i = eval(index, regs, view)?;
            let n = regs[*len as usize];
            if i < 0 || i >= n {
                return Err(Fault::OutOfBounds { index: i, len: n });
            }
            view.read(ItemRef::from_bits(regs[*base as usize]).add_cells(i))?
        }
        Expr::Slice { base, len, offset, need } => {
            let k = eval(offset, regs, view)?;
            let need = eval(need, regs, view)?;
            let n = regs[*len as usize];
            if need < 0 {
                return Err(Fault::NegativeLength(need));
            }
            if k < 0 || k > n || need > n - k {
                return Err(Fault::OutOfBounds { index: k.saturating_add(need), len: n });
            }
            if need == 0 {
                ItemRef::null().bits()
            } else {
                ItemRef::from_bits(regs[*base as usize]).add_cells(k).bits()
            }
        }
        Expr::Neg(a) => eval(a, regs, view)?.wrapping_neg(),
        Expr::Bin(op, a, b) => {
            let x = eval(a, regs, view)?;
            let y = eval(b, regs, view)?;
            op.apply(x, y).ok_or(Fault::DivideByZero)?
        }
    })
}

/// Executes frames of one stack. Reuses its buffers across frames.
pub struct Executor<'m> {
    pub module: &'m IrModule,
    pub mem: &'m Memory,
    pub stack: usize,
    pub recorder: Option<Recorder<'m>>,
    /// Frames executed so far.
    pub steps: u64,
    /// Check that no reference write lands in a ready frame.
    pub check_writes: bool,
    regs: Vec<i64>,
    scratch: Vec<i64>,
    /// Local arrays of the running task body: (first scratch cell, length).
    allocs: Vec<(usize, usize)>,
    staged: Vec<i64>,
    homes: Vec<usize>,
    /// Arrays moving to `_skip` payloads: (first scratch cell, length, group-relative offset).
    moved: Vec<(usize, usize, usize)>,
    pub(crate) dstack: Vec<i64>,
}

impl<'m> Executor<'m> {
    pub fn new(module: &'m IrModule, mem: &'m Memory, stack: usize) -> Self {
        Executor {
            module,
            mem,
            stack,
            recorder: None,
            steps: 0,
            check_writes: false,
            regs: Vec::new(),
            scratch: Vec::new(),
            allocs: Vec::new(),
            staged: Vec::new(),
            homes: Vec::new(),
            moved: Vec::new(),
            dstack: Vec::new(),
        }
    }

    pub fn with_trace(mut self, worker: usize, clock: &'m AtomicU64) -> Self {
        self.recorder = Some(Recorder::new(worker, clock));
        self
    }

    pub fn own_stack(&self) -> &'m FrameStack {
        self.mem.stack(self.stack)
    }

    pub(crate) fn record(&mut self, kind: EventKind) {
        if let Some(r) = &mut self.recorder {
            r.record(kind);
        }
    }

    fn effect(&mut self, token: &str, value: i64, bytes: &[u8]) {
        self.mem.emit(bytes);
        if self.recorder.is_some() {
            self.record(EventKind::Effect { token: token.to_string(), value });
        }
    }

    /// Runs the topmost frame at its entry until it pops, replaces itself,
    /// or (activation frames) yields to a call.
    pub fn exec_top(&mut self) -> Result<Step, RuntimeError> {
        let st = self.own_stack();
        let off = st.cursor();
        if off >= st.capacity() {
            return Ok(Step::Empty);
        }
        let module = self.module;
        let rid = st.load_routine(off);
        let r = module
            .routines
            .get(rid as usize)
            .ok_or_else(|| RuntimeError::BadFrame { message: format!("unknown routine id {rid} at offset {off}") })?;
        let len = st.load(off + LENGTH) as usize;
        if let RoutineKind::Builtin(Builtin::Thief | Builtin::Cop) = r.kind {
            return Ok(Step::Scheduler(off));
        }
        self.steps += 1;
        if self.recorder.is_some() {
            let frame = st.frame(off);
            let kind = EventKind::Exec {
                stack: self.stack,
                offset: off,
                routine: r.name.clone(),
                entry: frame.entry,
                args: frame_call(module, st, &frame).1,
            };
            self.record(kind);
        }
        match r.kind {
            RoutineKind::Builtin(Builtin::Skip) => st.set_cursor(off + len),
            RoutineKind::Builtin(Builtin::Putc) => {
                let v = st.load(off + HEADER_BYTES) as i64;
                self.effect("stdout", v, &[v as u8]);
                st.set_cursor(off + len);
            }
            RoutineKind::Builtin(Builtin::Puti) => {
                let v = st.load(off + HEADER_BYTES) as i64;
                self.effect("stdout", v, format!("{v}\n").as_bytes());
                st.set_cursor(off + len);
            }
            RoutineKind::Builtin(_) => unreachable!("scheduler frames handled above"),
            RoutineKind::Code(RoutineMode::Direct) => {
                let args: Vec<i64> =
                    (0..r.nparams).map(|i| st.load(off + HEADER_BYTES + i * CELL_BYTES) as i64).collect();
                self.run_direct(r, &args)?;
                st.set_cursor(off + len);
            }
            RoutineKind::Code(mode) => self.run_body(r, mode, off, len)?,
        }
        Ok(Step::Ran)
    }

    /// Runs frames until the stack is empty.
    pub fn xtop(&mut self) -> Result<(), RuntimeError> {
        self.xtop_with(|_| Ok(()))
    }

    /// As `xtop`, calling `before` ahead of every frame execution.
    pub fn xtop_with(
        &mut self,
        mut before: impl FnMut(&Executor<'m>) -> Result<(), RuntimeError>,
    ) -> Result<(), RuntimeError> {
        loop {
            if self.own_stack().is_empty() {
                return Ok(());
            }
            before(self)?;
            match self.exec_top()? {
                Step::Ran => {}
                Step::Empty => return Ok(()),
                Step::Scheduler(off) => {
                    return Err(RuntimeError::BadFrame {
                        message: format!("scheduler frame at offset {off} in a sequential run"),
                    })
                }
            }
        }
    }

    fn view(&self) -> View<'_> {
        View { mem: self.mem, scratch: &self.scratch, direct: &self.dstack }
    }

    pub(crate) fn write(&mut self, r: ItemRef, value: i64) -> Result<(), Fault> {
        let bad = || Fault::Runtime(Box::new(RuntimeError::BadRef { reference: r.to_string() }));
        match r.space() {
            ItemRef::SCRATCH => *self.scratch.get_mut(r.offset() / 8).ok_or_else(bad)? = value,
            ItemRef::DIRECT => *self.dstack.get_mut(r.offset() / 8).ok_or_else(bad)? = value,
            _ => {
                if self.check_writes && r.is_stack() {
                    self.check_write_target(r).map_err(|e| Fault::Runtime(Box::new(e)))?;
                }
                self.mem.write_ref(r, value).map_err(|e| Fault::Runtime(Box::new(e)))?;
            }
        }
        Ok(())
    }

    fn check_write_target(&self, r: ItemRef) -> Result<(), RuntimeError> {
        let st = self.mem.stack(r.space() as usize);
        let frames = st.frames().map_err(RuntimeError::Invariant)?;
        let off = r.offset();
        match frames.iter().find(|f| f.offset <= off && off < f.offset + f.len) {
            Some(f) if f.ready == 0 => Ok(()),
            // the running frame's own array zone
            Some(f) if st.id() == self.stack && f.offset == st.cursor() => Ok(()),
            Some(f) => Err(RuntimeError::Invariant(format!(
                "write through {r} into ready frame {} at s{}+{}",
                self.module.get(f.routine).name,
                st.id(),
                f.offset
            ))),
            None => Err(RuntimeError::BadRef { reference: r.to_string() }),
        }
    }

    fn run_body(&mut self, r: &'m IrRoutine, mode: RoutineMode, off: usize, len: usize) -> Result<(), RuntimeError> {
        let st = self.own_stack();
        let (nload, mut pc) = match mode {
            RoutineMode::Task => (r.nparams, 0),
            _ => {
                let entry = st.load(off + ENTRY);
                match r.entries.get(entry as usize) {
                    Some(&pc) => (r.nregs, pc as usize),
                    None => return Err(RuntimeError::InvalidEntry { routine: r.name.clone(), entry }),
                }
            }
        };
        self.regs.clear();
        self.regs.extend((0..nload).map(|i| st.load(off + HEADER_BYTES + i * CELL_BYTES) as i64));
        self.regs.resize(r.nregs, 0);
        if r.uses_arrays {
            self.scratch.clear();
            self.allocs.clear();
        }
        let (mut cur_off, mut cur_len) = (off, len);

        loop {
            match &r.ops[pc] {
                Op::Set(place, e) => {
                    let v = eval(e, &self.regs, &self.view()).map_err(|f| f.at(r, pc))?;
                    match place {
                        Place::Reg(reg) => self.regs[*reg as usize] = v,
                        Place::Deref(reg) => {
                            let target = ItemRef::from_bits(self.regs[*reg as usize]);
                            self.write(target, v).map_err(|f| f.at(r, pc))?;
                        }
                        Place::Index { base, len, index } => {
                            let i = eval(index, &self.regs, &self.view()).map_err(|f| f.at(r, pc))?;
                            let n = self.regs[*len as usize];
                            if i < 0 || i >= n {
                                return Err(Fault::OutOfBounds { index: i, len: n }.at(r, pc));
                            }
                            let target = ItemRef::from_bits(self.regs[*base as usize]).add_cells(i);
                            self.write(target, v).map_err(|f| f.at(r, pc))?;
                        }
                    }
                    pc += 1;
                }
                Op::JumpIfZero(e, target) => {
                    let v = eval(e, &self.regs, &self.view()).map_err(|f| f.at(r, pc))?;
                    pc = if v == 0 { *target } else { pc + 1 };
                }
                Op::Jump(target) => pc = *target,
                Op::Alloc { base, len: len_reg, count } => {
                    let n = eval(count, &self.regs, &self.view()).map_err(|f| f.at(r, pc))?;
                    if n < 0 {
                        return Err(Fault::NegativeLength(n).at(r, pc));
                    }
                    let n = n as usize;
                    let array = if mode == RoutineMode::Task {
                        let start = self.scratch.len();
                        self.scratch.resize(start + n, 0);
                        self.allocs.push((start, n));
                        ItemRef::new(ItemRef::SCRATCH, start * CELL_BYTES)
                    } else {
                        let bytes = n * CELL_BYTES;
                        if cur_off < bytes {
                            return Err(RuntimeError::StackOverflow { needed: bytes, available: cur_off });
                        }
                        let new_off = cur_off - bytes;
                        let slots_end = HEADER_BYTES + r.nregs * CELL_BYTES;
                        let entry = st.load(cur_off + ENTRY);
                        let ready = st.load(cur_off + READY);
                        for at in (new_off + slots_end..cur_off + slots_end).step_by(CELL_BYTES) {
                            st.store(at, 0);
                        }
                        cur_len += bytes;
                        st.write_header(new_off, r.id, cur_len, entry, ready);
                        cur_off = new_off;
                        st.set_cursor(cur_off);
                        ItemRef::stack(self.stack, cur_off + slots_end)
                    };
                    self.regs[*base as usize] = array.bits();
                    self.regs[*len_reg as usize] = n as i64;
                    pc += 1;
                }
                Op::Spawn(g) => return self.spawn(r, &r.groups[*g as usize], off, len, pc),
                Op::Call { plan, resume } => {
                    for (i, v) in self.regs.iter().enumerate() {
                        st.store(cur_off + HEADER_BYTES + i * CELL_BYTES, *v as u64);
                    }
                    st.store(cur_off + ENTRY, *resume as u64);
                    st.store(cur_off + READY, 0);
                    return self.call(r, &r.plans[*plan as usize], cur_off, pc);
                }
                Op::Return => {
                    st.set_cursor(cur_off + cur_len);
                    return Ok(());
                }
            }
        }
    }

    /// Stages every plan argument, returning the staged values.
    fn stage_args(&mut self, r: &IrRoutine, plans: &[CallPlan], own_off: usize, pc: usize) -> Result<(), RuntimeError> {
        for plan in plans {
            for arg in &plan.args {
                let v = match arg {
                    Arg::Value(e) => eval(e, &self.regs, &self.view()).map_err(|f| f.at(r, pc))?,
                    Arg::Home(item) => self.staged[*item as usize],
                    Arg::RefTo(_) => 0,
                    Arg::OwnSlot(reg) => {
                        ItemRef::stack(self.stack, own_off + HEADER_BYTES + *reg as usize * CELL_BYTES).bits()
                    }
                };
                self.staged.push(v);
            }
        }
        Ok(())
    }

    /// Activation call: the callee frame goes directly above the caller.
    fn call(&mut self, r: &IrRoutine, plan: &CallPlan, cur_off: usize, pc: usize) -> Result<(), RuntimeError> {
        self.staged.clear();
        self.stage_args(r, std::slice::from_ref(plan), cur_off, pc)?;
        let callee = self.module.get(plan.callee);
        let st = self.own_stack();
        let fb = callee.frame_bytes;
        if cur_off < fb {
            return Err(RuntimeError::StackOverflow { needed: fb, available: cur_off });
        }
        let at = cur_off - fb;
        write_frame(st, at, callee, plan.ready.flag().unwrap_or(0), &self.staged, |_, v| v);
        st.set_cursor(at);
        Ok(())
    }

    /// Task terminator: replace the frame at `off` by the group's frames,
    /// with any local arrays and unconsumed items in `_skip` frames below.
    fn spawn(&mut self, r: &IrRoutine, g: &Group, off: usize, len: usize, pc: usize) -> Result<(), RuntimeError> {
        let module = self.module;
        self.staged.clear();
        for item in &g.items {
            let v = match &item.init {
                Some(e) => eval(e, &self.regs, &self.view()).map_err(|f| f.at(r, pc))?,
                None => 0,
            };
            self.staged.push(v);
        }
        let nitems = g.items.len();
        self.stage_args(r, &g.plans, off, pc)?;

        self.moved.clear();
        let mut extra = 0usize;
        if r.uses_arrays && !self.allocs.is_empty() {
            let mut used = vec![false; self.allocs.len()];
            let mut k = nitems;
            for plan in &g.plans {
                let callee = module.get(plan.callee);
                for (slot, arg) in plan.args.iter().enumerate() {
                    if matches!(arg, Arg::Value(_)) && callee.reg_refs[slot] {
                        let v = ItemRef::from_bits(self.staged[k]);
                        if v.space() == ItemRef::SCRATCH {
                            let cell = v.offset() / CELL_BYTES;
                            let i = self.allocs.partition_point(|&(start, _)| start <= cell) - 1;
                            used[i] = true;
                        }
                    }
                    k += 1;
                }
            }
            for (i, &(start, n)) in self.allocs.iter().enumerate() {
                if used[i] {
                    self.moved.push((start, n, g.fixed_bytes as usize + extra));
                    extra += MIN_FRAME_BYTES + n * CELL_BYTES;
                }
            }
        }

        let st = self.own_stack();
        let total = g.fixed_bytes as usize + extra;
        let bottom = off + len;
        if bottom < total {
            return Err(RuntimeError::StackOverflow { needed: total, available: bottom });
        }
        let top = bottom - total;

        for &(start, n, rel) in &self.moved {
            let at = top + rel;
            st.store(at + HEADER_BYTES, (n * CELL_BYTES) as u64);
            for (i, v) in self.scratch[start..start + n].iter().enumerate() {
                st.store(at + MIN_FRAME_BYTES + i * CELL_BYTES, *v as u64);
            }
            st.write_header(at, SKIP, MIN_FRAME_BYTES + n * CELL_BYTES, 0, 0);
        }
        if g.dead_cells > 0 {
            let at = top + g.dead_offset as usize - MIN_FRAME_BYTES;
            let bytes = g.dead_cells as usize * CELL_BYTES;
            st.store(at + HEADER_BYTES, bytes as u64);
            st.write_header(at, SKIP, MIN_FRAME_BYTES + bytes, 0, 0);
        }
        self.homes.clear();
        for (i, item) in g.items.iter().enumerate() {
            let home = match item.home {
                ItemHome::Slot { plan, slot } => {
                    top + g.offsets[plan as usize] as usize + HEADER_BYTES + slot as usize * CELL_BYTES
                }
                ItemHome::Dead(k) => {
                    let at = top + g.dead_offset as usize + k as usize * CELL_BYTES;
                    st.store(at, self.staged[i] as u64);
                    at
                }
            };
            self.homes.push(home);
        }

        let mut k = nitems;
        let moved = &self.moved;
        let relocate = |v: i64| -> i64 {
            let r = ItemRef::from_bits(v);
            if moved.is_empty() || r.space() != ItemRef::SCRATCH {
                return v;
            }
            let cell = r.offset() / CELL_BYTES;
            let &(start, _, rel) = moved
                .iter()
                .find(|&&(start, n, _)| start <= cell && cell < start + n)
                .expect("referenced arrays are moved");
            ItemRef::stack(st.id(), top + rel + MIN_FRAME_BYTES + (cell - start) * CELL_BYTES).bits()
        };
        for (p, plan) in g.plans.iter().enumerate() {
            let callee = module.get(plan.callee);
            let args = &mut self.staged[k..k + plan.args.len()];
            for (slot, arg) in plan.args.iter().enumerate() {
                if let Arg::RefTo(item) = arg {
                    args[slot] = ItemRef::stack(self.stack, self.homes[*item as usize]).bits();
                }
            }
            let at = top + g.offsets[p] as usize;
            let refs = &callee.reg_refs;
            write_frame(st, at, callee, plan.ready.flag().unwrap_or(0), args, |slot, v| {
                if refs[slot] {
                    relocate(v)
                } else {
                    v
                }
            });
            k += plan.args.len();
        }
        st.set_cursor(top);
        Ok(())
    }
}

/// Writes a fresh frame for `callee` at `at`; slots past `args` are zero.
fn write_frame(
    st: &FrameStack,
    at: usize,
    callee: &IrRoutine,
    ready: u64,
    args: &[i64],
    map: impl Fn(usize, i64) -> i64,
) {
    let fb = callee.frame_bytes;
    for (slot, v) in args.iter().enumerate() {
        st.store(at + HEADER_BYTES + slot * CELL_BYTES, map(slot, *v) as u64);
    }
    for slot in args.len()..(fb - HEADER_BYTES) / CELL_BYTES {
        st.store(at + HEADER_BYTES + slot * CELL_BYTES, 0);
    }
    st.write_header(at, callee.id, fb, 0, ready);
}
