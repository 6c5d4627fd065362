//! Execution traces: `event <worker> <time> <kind> <payload...>` lines.
//!
//! `time` counts the worker's own events, so it strictly increases per
//! worker. Events of a parallel run are merged by a global sequence
//! number taken when each event is recorded.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// A frame about to execute; `args` is its rendered slot list.
    Exec { stack: usize, offset: usize, routine: String, entry: u64, args: String },
    Effect { token: String, value: i64 },
    /// `frames` lists the victim's frames (offset, ready) before the steal.
    Steal { victim: usize, offset: usize, len: usize, routine: String, frames: Vec<(usize, u64)> },
    CopFire { stack: usize, offset: usize, len: usize },
    ThiefRetry { victim: usize },
    Snapshot { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: u64,
    pub worker: usize,
    pub time: u64,
    pub kind: EventKind,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {} {} ", self.worker, self.time)?;
        match &self.kind {
            EventKind::Exec { stack, offset, routine, entry, args } => {
                write!(f, "exec s{stack}+{offset} {routine}({args}) entry={entry}")
            }
            EventKind::Effect { token, value } => write!(f, "effect {token} {value}"),
            EventKind::Steal { victim, offset, len, routine, frames } => {
                write!(f, "steal victim={victim} offset={offset} len={len} routine={routine} frames=")?;
                for (i, (off, ready)) in frames.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{off}:{ready}")?;
                }
                Ok(())
            }
            EventKind::CopFire { stack, offset, len } => write!(f, "cop-fire s{stack}+{offset} len={len}"),
            EventKind::ThiefRetry { victim } => write!(f, "thief-retry victim={victim}"),
            EventKind::Snapshot { index } => write!(f, "snapshot {index}"),
        }
    }
}

/// Per-worker event recorder.
#[derive(Debug)]
pub struct Recorder<'c> {
    pub worker: usize,
    time: u64,
    clock: &'c AtomicU64,
    pub events: Vec<TraceEvent>,
}

impl<'c> Recorder<'c> {
    pub fn new(worker: usize, clock: &'c AtomicU64) -> Self {
        Recorder { worker, time: 0, clock, events: Vec::new() }
    }

    pub fn record(&mut self, kind: EventKind) {
        let seq = self.clock.fetch_add(1, Ordering::Relaxed);
        self.events.push(TraceEvent { seq, worker: self.worker, time: self.time, kind });
        self.time += 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn merge(parts: impl IntoIterator<Item = Vec<TraceEvent>>) -> Self {
        let mut events: Vec<TraceEvent> = parts.into_iter().flatten().collect();
        events.sort_by_key(|e| e.seq);
        Trace { events }
    }

    /// Effect values in trace order.
    pub fn effects(&self) -> Vec<(String, i64)> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Effect { token, value } => Some((token.clone(), *value)),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
