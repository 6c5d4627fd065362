//! Parallel execution. Each worker owns a stack and runs its own xtop
//! loop. A `_thief` frame on top of a stack steals the bottommost ready
//! frame of a randomly chosen other stack, leaving a thief of the same
//! length there as a barrier, and pushes a `_cop` below the stolen copy on
//! its own stack. When the cop reaches the top it turns its thief into a
//! `_skip`, which lifts the barrier.
//!
//! Every structural change to a stack happens under that stack's guard.
//! The owner holds its guard while executing a frame; a thief only
//! try-locks a victim and picks another one when the guard is busy. No
//! thread ever holds two guards at once.

mod victim;

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use crate::lowering::ir::*;
use crate::machine::stack::{FrameStack, LENGTH, READY};
use crate::machine::trace::{EventKind, Trace, TraceEvent};
use crate::machine::{
    run_sequential, EntryCall, Executor, ItemRef, Memory, RunOptions, RunResult, RuntimeError,
};

pub use victim::VictimPicker;

/// Failed steal attempts between polls of the thief's own frame.
pub const POLL_INTERVAL: u64 = 64;
/// `_cop(thief, label)`.
pub const COP_BYTES: usize = HEADER_BYTES + 2 * CELL_BYTES;
/// No worker executing and no progress for this long means no frame can
/// ever become ready again.
const DEADLOCK_AFTER: Duration = Duration::from_secs(2);

struct Shared<'m> {
    module: &'m IrModule,
    mem: &'m Memory,
    workers: usize,
    abort: AtomicBool,
    error: Mutex<Option<RuntimeError>>,
    /// Frames executed, steals and cop firings, over all workers.
    progress: AtomicU64,
    /// Workers currently outside their steal loop.
    busy: AtomicUsize,
    labels: AtomicU64,
    /// Serializes every step in full-check mode so that checks can walk
    /// other stacks.
    global: Option<Mutex<()>>,
    interleave: bool,
}

impl Shared<'_> {
    fn fail(&self, e: RuntimeError) {
        let mut slot = self.error.lock().expect("error slot");
        if slot.is_none() {
            *slot = Some(e);
        }
        self.abort.store(true, Ordering::SeqCst);
    }

    fn aborted(&self) -> bool {
        self.abort.load(Ordering::Relaxed)
    }

    fn serial(&self) -> Option<MutexGuard<'_, ()>> {
        self.global.as_ref().map(|m| m.lock().unwrap_or_else(|p| p.into_inner()))
    }

    fn check_tiling(&self) -> Result<(), RuntimeError> {
        for st in &self.mem.stacks {
            st.frames().map_err(RuntimeError::Invariant)?;
        }
        Ok(())
    }
}

/// Runs `entry` on `workers` stacks. Worker 0 starts with the entry frame
/// above one bootstrap `_cop` per other worker; every other worker starts
/// with the paired bootstrap `_thief`. One worker runs sequentially.
pub fn run_parallel(
    module: &IrModule,
    entry: &EntryCall,
    workers: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult, RuntimeError> {
    if workers == 0 {
        return Err(RuntimeError::Entry("at least one worker is needed".into()));
    }
    if workers == 1 {
        return run_sequential(module, entry, opts);
    }
    let mut mem = Memory::new(workers, opts.stack_bytes, entry.host_cells())?;
    mem.ref_checks = opts.debug_checks;
    let (id, slots) = entry.seed_slots(module, &mem)?;
    bootstrap(&mem)?;
    mem.stack(0).push_sized(id, module.get(id).frame_bytes, 0, 1, &slots)?;

    let (events, steps) = drive(module, &mem, seed, opts)?;
    let outs = entry.result_names().enumerate().map(|(i, n)| (n.to_string(), mem.host(i))).collect();
    Ok(RunResult {
        outs,
        output: mem.output(),
        trace: opts.trace.then(|| Trace::merge(events)),
        snapshots: Vec::new(),
        peak_bytes: mem.stacks.iter().map(FrameStack::peak_bytes).sum(),
        steps,
    })
}

/// Places the bootstrap thief on every stack but the first and its cop at
/// the bottom of the first.
fn bootstrap(mem: &Memory) -> Result<(), RuntimeError> {
    let n = mem.stacks.len();
    for w in (1..n).rev() {
        let thief = mem.stack(w).push_frame(THIEF, 0, 0, &[w as i64])?;
        mem.stack(0).push_sized(COP, COP_BYTES, 0, 0, &[ItemRef::stack(w, thief).bits(), w as i64])?;
    }
    Ok(())
}

/// Runs one thread per stack of `mem` until every stack is empty.
fn drive(
    module: &IrModule,
    mem: &Memory,
    seed: u64,
    opts: &RunOptions,
) -> Result<(Vec<Vec<TraceEvent>>, u64), RuntimeError> {
    let workers = mem.stacks.len();
    let sh = Shared {
        module,
        mem,
        workers,
        abort: AtomicBool::new(false),
        error: Mutex::new(None),
        progress: AtomicU64::new(0),
        busy: AtomicUsize::new(workers),
        labels: AtomicU64::new(workers as u64),
        global: opts.full_checks.then(|| Mutex::new(())),
        interleave: opts.interleave,
    };
    let clock = AtomicU64::new(0);
    let results: Vec<(Vec<TraceEvent>, u64)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (sh, clock) = (&sh, &clock);
                s.spawn(move || {
                    let mut ex = Executor::new(sh.module, sh.mem, w);
                    ex.check_writes = opts.full_checks;
                    if opts.trace {
                        ex = ex.with_trace(w, clock);
                    }
                    let mut picker = VictimPicker::new(seed, w, sh.workers);
                    if let Err(e) = worker_loop(sh, &mut ex, &mut picker) {
                        sh.fail(e);
                    }
                    sh.busy.fetch_sub(1, Ordering::SeqCst);
                    (ex.recorder.take().map(|r| r.events).unwrap_or_default(), ex.steps)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
    });
    if let Some(e) = sh.error.into_inner().expect("error slot") {
        return Err(e);
    }
    let steps = results.iter().map(|r| r.1).sum();
    Ok((results.into_iter().map(|r| r.0).collect(), steps))
}

fn worker_loop(sh: &Shared, ex: &mut Executor, picker: &mut VictimPicker) -> Result<(), RuntimeError> {
    let st = ex.own_stack();
    loop {
        if sh.aborted() {
            return Ok(());
        }
        let serial = sh.serial();
        st.lock();
        if st.is_empty() {
            st.unlock();
            return Ok(());
        }
        let off = st.cursor();
        match st.load_routine(off) {
            THIEF => {
                st.unlock();
                drop(serial);
                sh.busy.fetch_sub(1, Ordering::SeqCst);
                let r = steal_loop(sh, ex, picker, off);
                sh.busy.fetch_add(1, Ordering::SeqCst);
                r?;
            }
            COP => {
                let r = fire_cop(sh, ex, off);
                st.unlock();
                r?;
            }
            _ => {
                let r = ex.exec_top();
                st.unlock();
                r?;
                sh.progress.fetch_add(1, Ordering::Relaxed);
                if serial.is_some() {
                    sh.check_tiling()?;
                }
                drop(serial);
                if sh.interleave {
                    std::thread::yield_now();
                }
            }
        }
    }
}

/// Turns the cop's thief into a `_skip` of the same length and pops the
/// cop. The skip's slot is written before the routine word is published.
fn fire_cop(sh: &Shared, ex: &mut Executor, off: usize) -> Result<(), RuntimeError> {
    let st = ex.own_stack();
    let thief = ItemRef(st.load(off + HEADER_BYTES));
    let bad = || RuntimeError::Invariant(format!("cop at s{}+{off} points at {thief}, not a thief", st.id()));
    if !thief.is_stack() || thief.space() as usize >= sh.workers {
        return Err(bad());
    }
    let ts = sh.mem.stack(thief.space() as usize);
    let at = thief.offset();
    if !ts.contains_cell(at) || ts.load_routine(at) != THIEF {
        return Err(bad());
    }
    let len = ts.load(at + LENGTH) as usize;
    // Recorded first so that the victim's later events sort after it.
    if ex.recorder.is_some() {
        ex.record(EventKind::CopFire { stack: ts.id(), offset: at, len });
    }
    ts.store(at + HEADER_BYTES, (len - MIN_FRAME_BYTES) as u64);
    ts.publish_routine(at, SKIP);
    st.set_cursor(off + COP_BYTES);
    sh.progress.fetch_add(1, Ordering::Relaxed);
    Ok(())
}

/// Steals until something was stolen or the worker's own thief at `own`
/// has been turned into a `_skip`.
fn steal_loop(sh: &Shared, ex: &mut Executor, picker: &mut VictimPicker, own: usize) -> Result<(), RuntimeError> {
    let st = ex.own_stack();
    let mut attempts = 0u64;
    let mut seen = (sh.progress.load(Ordering::Relaxed), Instant::now());
    let mut victim = 0;
    loop {
        if sh.aborted() {
            return Ok(());
        }
        if attempts.is_multiple_of(POLL_INTERVAL) {
            if st.load_routine(own) != THIEF {
                return Ok(());
            }
            if attempts > 0 && ex.recorder.is_some() {
                ex.record(EventKind::ThiefRetry { victim });
            }
            let p = sh.progress.load(Ordering::Relaxed);
            if p != seen.0 {
                seen = (p, Instant::now());
            } else if sh.busy.load(Ordering::SeqCst) == 0 && seen.1.elapsed() > DEADLOCK_AFTER {
                return Err(RuntimeError::Deadlock { detail: deadlock_report(sh) });
            }
        }
        victim = picker.next_victim();
        if try_steal(sh, ex, victim)? {
            return Ok(());
        }
        attempts += 1;
        std::thread::yield_now();
    }
}

fn deadlock_report(sh: &Shared) -> String {
    let tops: Vec<String> = sh
        .mem
        .stacks
        .iter()
        .map(|st| {
            if st.is_empty() {
                format!("s{}: empty", st.id())
            } else {
                let f = st.frame(st.cursor());
                let name = sh.module.routines.get(f.routine as usize).map_or("?", |r| r.name.as_str());
                format!("s{}: top {name} at {}", st.id(), f.offset)
            }
        })
        .collect();
    format!("no ready frame on any stack; {}", tops.join(", "))
}

/// One steal attempt against `victim`. Returns whether a frame was stolen.
fn try_steal(sh: &Shared, ex: &mut Executor, victim: usize) -> Result<bool, RuntimeError> {
    let serial = sh.serial();
    let vs = sh.mem.stack(victim);
    if !vs.try_lock() {
        return Ok(false);
    }
    let trace = ex.recorder.is_some();
    let found = bottommost_ready(vs, trace);
    let (at, frames) = match found {
        Ok((Some(at), frames)) => (at, frames),
        Ok((None, _)) => {
            vs.unlock();
            return Ok(false);
        }
        Err(e) => {
            vs.unlock();
            return Err(RuntimeError::Invariant(e));
        }
    };
    let len = vs.load(at + LENGTH) as usize;
    let cells: Vec<u64> = (0..len / CELL_BYTES).map(|i| vs.load(at + i * CELL_BYTES)).collect();
    let label = sh.labels.fetch_add(1, Ordering::Relaxed);
    if trace {
        let routine = sh.module.routines.get(cells[0] as usize).map_or("?".into(), |r| r.name.clone());
        ex.record(EventKind::Steal { victim, offset: at, len, routine, frames });
    }
    vs.store(at + HEADER_BYTES, label);
    vs.write_header(at, THIEF, len, 0, 0);
    vs.unlock();

    let st = ex.own_stack();
    st.lock();
    let pushed = st
        .push_sized(COP, COP_BYTES, 0, 0, &[ItemRef::stack(victim, at).bits(), label as i64])
        .and_then(|_| st.push_copy(&cells));
    st.unlock();
    drop(serial);
    pushed?;
    sh.progress.fetch_add(1, Ordering::Relaxed);
    Ok(true)
}

/// Bottommost ready frame, if any, and the listed (offset, ready) pairs.
type Scan = (Option<usize>, Vec<(usize, u64)>);

/// Offset of the bottommost frame with ready = 1, walking from the top.
/// With `list`, also returns every frame's (offset, ready).
fn bottommost_ready(st: &FrameStack, list: bool) -> Result<Scan, String> {
    let mut off = st.cursor();
    let mut found = None;
    let mut frames = Vec::new();
    while off < st.capacity() {
        let len = st.load(off + LENGTH) as usize;
        if len < MIN_FRAME_BYTES || !len.is_multiple_of(CELL_BYTES) || off + len > st.capacity() {
            return Err(format!("stack {}: bad frame length {len} at {off}", st.id()));
        }
        let ready = st.load(off + READY);
        if ready == 1 {
            found = Some(off);
        }
        if list {
            frames.push((off, ready));
        }
        off += len;
    }
    Ok((found, frames))
}

#[cfg(test)]
mod tests;
