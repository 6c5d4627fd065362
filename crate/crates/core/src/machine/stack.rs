//! Byte-addressed frame stacks growing downward.
//!
//! Frame header: routine id at +0, length at +8, entry at +16, ready at
//! +24; slots from +32. Every cell is 8 bytes.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use super::RuntimeError;
use crate::lowering::ir::{CELL_BYTES, HEADER_BYTES, MIN_FRAME_BYTES};

pub const ROUTINE: usize = 0;
pub const LENGTH: usize = 8;
pub const ENTRY: usize = 16;
pub const READY: usize = 24;

pub const DEFAULT_CAPACITY: usize = 2_000_000;
pub const MIN_CAPACITY: usize = 4096;

#[derive(Debug)]
pub struct FrameStack {
    id: usize,
    cells: Box<[AtomicU64]>,
    cursor: AtomicUsize,
    low_water: AtomicUsize,
    guard: AtomicBool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameInfo {
    pub offset: usize,
    pub routine: u32,
    pub len: usize,
    pub entry: u64,
    pub ready: u64,
}

impl FrameStack {
    /// An empty stack of `capacity` bytes.
    pub fn new(id: usize, capacity: usize) -> Result<Self, RuntimeError> {
        if capacity < MIN_CAPACITY || !capacity.is_multiple_of(CELL_BYTES) {
            return Err(RuntimeError::BadCapacity { capacity });
        }
        let cells = (0..capacity / CELL_BYTES).map(|_| AtomicU64::new(0)).collect();
        Ok(FrameStack {
            id,
            cells,
            cursor: AtomicUsize::new(capacity),
            low_water: AtomicUsize::new(capacity),
            guard: AtomicBool::new(false),
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn capacity(&self) -> usize {
        self.cells.len() * CELL_BYTES
    }

    pub fn cursor(&self) -> usize {
        self.cursor.load(Ordering::Acquire)
    }

    pub fn set_cursor(&self, cursor: usize) {
        self.cursor.store(cursor, Ordering::Release);
        self.low_water.fetch_min(cursor, Ordering::Relaxed);
    }

    pub fn is_empty(&self) -> bool {
        self.cursor() == self.capacity()
    }

    /// Largest number of bytes ever occupied.
    pub fn peak_bytes(&self) -> usize {
        self.capacity() - self.low_water.load(Ordering::Relaxed)
    }

    pub fn reset_peak(&self) {
        self.low_water.store(self.cursor(), Ordering::Relaxed);
    }

    #[inline]
    pub fn load(&self, offset: usize) -> u64 {
        self.cells[offset / CELL_BYTES].load(Ordering::Relaxed)
    }

    #[inline]
    pub fn store(&self, offset: usize, value: u64) {
        self.cells[offset / CELL_BYTES].store(value, Ordering::Relaxed)
    }

    /// Routine word, read so that a cop's preceding writes are visible.
    #[inline]
    pub fn load_routine(&self, offset: usize) -> u32 {
        self.cells[offset / CELL_BYTES].load(Ordering::Acquire) as u32
    }

    /// Publishes a routine word after the frame's other cells.
    pub fn publish_routine(&self, offset: usize, routine: u32) {
        self.cells[offset / CELL_BYTES].store(routine as u64, Ordering::Release)
    }

    pub(crate) fn cell(&self, offset: usize) -> &AtomicU64 {
        &self.cells[offset / CELL_BYTES]
    }

    pub fn contains_cell(&self, offset: usize) -> bool {
        offset.is_multiple_of(CELL_BYTES) && offset < self.capacity()
    }

    pub fn frame(&self, offset: usize) -> FrameInfo {
        FrameInfo {
            offset,
            routine: self.load_routine(offset + ROUTINE),
            len: self.load(offset + LENGTH) as usize,
            entry: self.load(offset + ENTRY),
            ready: self.load(offset + READY),
        }
    }

    pub fn write_header(&self, offset: usize, routine: u32, len: usize, entry: u64, ready: u64) {
        self.store(offset + LENGTH, len as u64);
        self.store(offset + ENTRY, entry);
        self.store(offset + READY, ready);
        self.store(offset + ROUTINE, routine as u64);
    }

    /// Pushes a frame holding `slots` (at least one slot's worth of bytes).
    /// Returns the new top offset.
    pub fn push_frame(&self, routine: u32, entry: u64, ready: u64, slots: &[i64]) -> Result<usize, RuntimeError> {
        let len = (HEADER_BYTES + slots.len() * CELL_BYTES).max(MIN_FRAME_BYTES);
        self.push_sized(routine, len, entry, ready, slots)
    }

    /// As `push_frame` with an explicit length; cells past `slots` are zeroed.
    pub fn push_sized(
        &self,
        routine: u32,
        len: usize,
        entry: u64,
        ready: u64,
        slots: &[i64],
    ) -> Result<usize, RuntimeError> {
        let cursor = self.cursor();
        if cursor < len {
            return Err(RuntimeError::StackOverflow { needed: len, available: cursor });
        }
        let off = cursor - len;
        for i in 0..(len - HEADER_BYTES) / CELL_BYTES {
            self.store(off + HEADER_BYTES + i * CELL_BYTES, slots.get(i).copied().unwrap_or(0) as u64);
        }
        self.write_header(off, routine, len, entry, ready);
        self.set_cursor(off);
        Ok(off)
    }

    /// Pushes a copy of a whole frame, header included. The routine word
    /// is written last.
    pub fn push_copy(&self, cells: &[u64]) -> Result<usize, RuntimeError> {
        let len = cells.len() * CELL_BYTES;
        let cursor = self.cursor();
        if cursor < len {
            return Err(RuntimeError::StackOverflow { needed: len, available: cursor });
        }
        let off = cursor - len;
        for (i, v) in cells.iter().enumerate().skip(1) {
            self.store(off + i * CELL_BYTES, *v);
        }
        self.store(off + ROUTINE, cells[0]);
        self.set_cursor(off);
        Ok(off)
    }

    /// Walks the occupied region top to bottom, checking that frame
    /// lengths tile it exactly.
    pub fn frames(&self) -> Result<Vec<FrameInfo>, String> {
        self.frames_from(self.cursor())
    }

    pub fn frames_from(&self, mut off: usize) -> Result<Vec<FrameInfo>, String> {
        let mut out = Vec::new();
        while off < self.capacity() {
            let f = self.frame(off);
            if f.len < MIN_FRAME_BYTES || !f.len.is_multiple_of(CELL_BYTES) || off + f.len > self.capacity() {
                return Err(format!("stack {}: bad frame length {} at {}", self.id, f.len, off));
            }
            off += f.len;
            out.push(f);
        }
        Ok(out)
    }

    /// Spin-free attempt to take the stack's exclusion guard.
    pub fn try_lock(&self) -> bool {
        self.guard.compare_exchange(false, true, Ordering::Acquire, Ordering::Relaxed).is_ok()
    }

    /// Takes the guard, yielding the thread while another holder has it.
    pub fn lock(&self) {
        while !self.try_lock() {
            std::hint::spin_loop();
            std::thread::yield_now();
        }
    }

    pub fn unlock(&self) {
        self.guard.store(false, Ordering::Release);
    }
}
