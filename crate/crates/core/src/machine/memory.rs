//! Cells reachable through item references: every worker's stack plus the
//! host cells of the entry call, and the shared output stream.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use super::refs::ItemRef;
use super::stack::FrameStack;
use super::RuntimeError;

#[derive(Debug)]
pub struct Memory {
    pub stacks: Vec<FrameStack>,
    host: Box<[AtomicU64]>,
    output: Mutex<Vec<u8>>,
    /// Reject references below a stack's cursor (into popped frames).
    pub ref_checks: bool,
}

impl Memory {
    pub fn new(stacks: usize, capacity: usize, host_cells: usize) -> Result<Self, RuntimeError> {
        Ok(Memory {
            stacks: (0..stacks).map(|i| FrameStack::new(i, capacity)).collect::<Result<_, _>>()?,
            host: (0..host_cells).map(|_| AtomicU64::new(0)).collect(),
            output: Mutex::new(Vec::new()),
            ref_checks: true,
        })
    }

    pub fn stack(&self, id: usize) -> &FrameStack {
        &self.stacks[id]
    }

    pub fn host_ref(&self, cell: usize) -> ItemRef {
        ItemRef::new(ItemRef::HOST, cell * 8)
    }

    pub fn host(&self, cell: usize) -> i64 {
        self.host[cell].load(Ordering::Acquire) as i64
    }

    pub fn set_host(&self, cell: usize, value: i64) {
        self.host[cell].store(value as u64, Ordering::Release)
    }

    fn locate(&self, r: ItemRef) -> Result<&AtomicU64, RuntimeError> {
        let bad = || RuntimeError::BadRef { reference: r.to_string() };
        match r.space() {
            ItemRef::HOST => {
                if !r.offset().is_multiple_of(8) {
                    return Err(bad());
                }
                self.host.get(r.offset() / 8).ok_or_else(bad)
            }
            s if (s as usize) < self.stacks.len() => {
                let st = &self.stacks[s as usize];
                if !st.contains_cell(r.offset()) || (self.ref_checks && r.offset() < st.cursor()) {
                    return Err(bad());
                }
                Ok(st.cell(r.offset()))
            }
            _ => Err(bad()),
        }
    }

    pub fn read_ref(&self, r: ItemRef) -> Result<i64, RuntimeError> {
        Ok(self.locate(r)?.load(Ordering::Relaxed) as i64)
    }

    pub fn write_ref(&self, r: ItemRef, value: i64) -> Result<(), RuntimeError> {
        self.locate(r)?.store(value as u64, Ordering::Relaxed);
        Ok(())
    }

    pub fn emit(&self, bytes: &[u8]) {
        self.output.lock().expect("output lock").extend_from_slice(bytes);
    }

    pub fn output(&self) -> Vec<u8> {
        self.output.lock().expect("output lock").clone()
    }
}
