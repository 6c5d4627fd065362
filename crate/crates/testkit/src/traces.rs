//! Invariants checked on a recorded trace of a parallel run.
//!
//! - per worker, event times strictly increase;
//! - a stolen frame had ready = 1 and no frame below it on the victim did;
//! - the thief left behind has exactly the stolen frame's length, read off
//!   the victim's frame list (offsets tile up to the stack's capacity);
//! - no frame below a live thief executes (the barrier), and every cop
//!   dissolves exactly one live thief, with none left at the end.
//!
//! Tiling after every step and the ban on writes into ready frames are
//! checked by the machine itself in full-check mode.

use std::collections::HashMap;

use taskframe::lowering::ir::MIN_FRAME_BYTES;
use taskframe::machine::{EventKind, Trace};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceStats {
    pub execs: usize,
    pub steals: usize,
    pub cop_fires: usize,
}

/// Checks `trace` of a run on `workers` stacks of `capacity` bytes.
pub fn check_trace(trace: &Trace, workers: usize, capacity: usize) -> Result<TraceStats, String> {
    let mut stats = TraceStats::default();
    let mut last_time: HashMap<usize, u64> = HashMap::new();
    // live thieves per stack: offset -> length
    let mut thieves: Vec<HashMap<usize, usize>> = vec![HashMap::new(); workers];
    for live in thieves.iter_mut().skip(1) {
        live.insert(capacity - MIN_FRAME_BYTES, MIN_FRAME_BYTES);
    }
    for e in &trace.events {
        if let Some(&t) = last_time.get(&e.worker) {
            if e.time <= t {
                return Err(format!("worker {} time went from {t} to {}", e.worker, e.time));
            }
        }
        last_time.insert(e.worker, e.time);
        match &e.kind {
            EventKind::Exec { stack, offset, routine, .. } => {
                stats.execs += 1;
                let live = thieves.get(*stack).ok_or_else(|| format!("exec on unknown stack {stack}"))?;
                if let Some((t, _)) = live.iter().find(|(t, _)| **t < *offset) {
                    return Err(format!("{routine} at s{stack}+{offset} ran below the live thief at {t}"));
                }
            }
            EventKind::Steal { victim, offset, len, routine, frames } => {
                stats.steals += 1;
                if *victim == e.worker {
                    return Err(format!("worker {victim} stole from itself"));
                }
                let i = frames
                    .iter()
                    .position(|(off, _)| off == offset)
                    .ok_or_else(|| format!("stolen {routine} at {offset} is not a frame of s{victim}"))?;
                if frames[i].1 != 1 {
                    return Err(format!("stolen {routine} at s{victim}+{offset} was not ready"));
                }
                if let Some((off, _)) = frames[i + 1..].iter().find(|(_, r)| *r == 1) {
                    return Err(format!("stole {routine} at s{victim}+{offset} but ready frame at {off} is lower"));
                }
                if frames.windows(2).any(|p| p[1].0 < p[0].0 + MIN_FRAME_BYTES) {
                    return Err(format!("frames of s{victim} do not tile: {frames:?}"));
                }
                let end = frames.get(i + 1).map_or(capacity, |f| f.0);
                if end - offset != *len {
                    return Err(format!("thief of length {len} replaced {routine} of length {}", end - offset));
                }
                thieves[*victim].insert(*offset, *len);
            }
            EventKind::CopFire { stack, offset, len } => {
                stats.cop_fires += 1;
                match thieves.get_mut(*stack).and_then(|live| live.remove(offset)) {
                    Some(l) if l == *len => {}
                    Some(l) => return Err(format!("cop saw length {len} for a thief of length {l}")),
                    None => return Err(format!("cop fired at s{stack}+{offset}, where no thief lives")),
                }
            }
            EventKind::Effect { .. } | EventKind::ThiefRetry { .. } | EventKind::Snapshot { .. } => {}
        }
    }
    if let Some((s, live)) = thieves.iter().enumerate().find(|(_, l)| !l.is_empty()) {
        return Err(format!("thieves left on s{s} at {:?}", live.keys().collect::<Vec<_>>()));
    }
    Ok(stats)
}
