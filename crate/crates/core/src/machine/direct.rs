//! Direct execution of activation code on a contiguous call stack of
//! cells, without frame headers or an executor loop. This is the in-VM
//! stand-in for conventional compiled calls.

use crate::lowering::ir::*;

use super::exec::{eval_fast as eval, Executor, Fault, View};
use super::refs::ItemRef;
use super::RuntimeError;

struct DirectFrame<'a> {
    routine: &'a IrRoutine,
    pc: usize,
    base: usize,
}

impl<'m> Executor<'m> {
    /// Runs `entry` with the given parameter values to completion. The
    /// call stack is bounded by the size of the executor's own stack.
    pub(crate) fn run_direct(&mut self, entry: &'m IrRoutine, args: &[i64]) -> Result<(), RuntimeError> {
        let module = self.module;
        let limit = self.own_stack().capacity() / CELL_BYTES;
        let overflow = |needed: usize| RuntimeError::StackOverflow { needed: needed * CELL_BYTES, available: limit * CELL_BYTES };
        let mut dstack = std::mem::take(&mut self.dstack);
        dstack.clear();
        dstack.extend_from_slice(args);
        dstack.resize(entry.nregs, 0);
        let mut frames = vec![DirectFrame { routine: entry, pc: entry.entries[0] as usize, base: 0 }];
        let result = (|| -> Result<(), RuntimeError> {
            'frames: while let Some(frame) = frames.last_mut() {
                let r = frame.routine;
                let base = frame.base;
                let mut pc = frame.pc;
                loop {
                    let view = View { mem: self.mem, scratch: &[], direct: &dstack };
                    let regs = &dstack[base..base + r.nregs];
                    match &r.ops[pc] {
                        Op::Set(place, e) => {
                            let v = eval(e, regs, &view).map_err(|f| f.at(r, pc))?;
                            let target = match place {
                                Place::Reg(reg) => {
                                    dstack[base + *reg as usize] = v;
                                    pc += 1;
                                    continue;
                                }
                                Place::Deref(reg) => ItemRef::from_bits(regs[*reg as usize]),
                                Place::Index { base: b, len, index } => {
                                    let i = eval(index, regs, &view).map_err(|f| f.at(r, pc))?;
                                    let n = regs[*len as usize];
                                    if i < 0 || i >= n {
                                        return Err(Fault::OutOfBounds { index: i, len: n }.at(r, pc));
                                    }
                                    ItemRef::from_bits(regs[*b as usize]).add_cells(i)
                                }
                            };
                            match target.space() {
                                ItemRef::DIRECT => match dstack.get_mut(target.offset() / CELL_BYTES) {
                                    Some(cell) => *cell = v,
                                    None => return Err(RuntimeError::BadRef { reference: target.to_string() }),
                                },
                                _ => self.mem.write_ref(target, v)?,
                            }
                            pc += 1;
                        }
                        Op::JumpIfZero(e, target) => {
                            let v = eval(e, regs, &view).map_err(|f| f.at(r, pc))?;
                            pc = if v == 0 { *target } else { pc + 1 };
                        }
                        Op::Jump(target) => pc = *target,
                        Op::Alloc { base: b, len, count } => {
                            let n = eval(count, regs, &view).map_err(|f| f.at(r, pc))?;
                            if n < 0 {
                                return Err(Fault::NegativeLength(n).at(r, pc));
                            }
                            let start = dstack.len();
                            if start + n as usize > limit {
                                return Err(overflow(start + n as usize));
                            }
                            dstack.resize(start + n as usize, 0);
                            dstack[base + *b as usize] = ItemRef::new(ItemRef::DIRECT, start * CELL_BYTES).bits();
                            dstack[base + *len as usize] = n;
                            pc += 1;
                        }
                        Op::Call { plan, resume } => {
                            let plan = &r.plans[*plan as usize];
                            // Arguments go straight above the live frames;
                            // builtins read them from there and drop them.
                            let start = dstack.len();
                            for arg in &plan.args {
                                let v = match arg {
                                    Arg::Value(e) => {
                                        let view = View { mem: self.mem, scratch: &[], direct: &dstack };
                                        eval(e, &dstack[base..base + r.nregs], &view).map_err(|f| f.at(r, pc))?
                                    }
                                    Arg::OwnSlot(reg) => {
                                        ItemRef::new(ItemRef::DIRECT, (base + *reg as usize) * CELL_BYTES).bits()
                                    }
                                    Arg::Home(_) | Arg::RefTo(_) => {
                                        return Err(RuntimeError::BadFrame {
                                            message: format!("task argument in direct routine `{}`", r.name),
                                        })
                                    }
                                };
                                dstack.push(v);
                            }
                            pc = r.entries[*resume as usize] as usize;
                            let callee = module.get(plan.callee);
                            match callee.kind {
                                RoutineKind::Builtin(Builtin::Putc) => {
                                    let v = dstack[start];
                                    dstack.truncate(start);
                                    self.mem.emit(&[v as u8]);
                                    self.direct_effect(v);
                                }
                                RoutineKind::Builtin(Builtin::Puti) => {
                                    let v = dstack[start];
                                    dstack.truncate(start);
                                    self.mem.emit(format!("{v}\n").as_bytes());
                                    self.direct_effect(v);
                                }
                                RoutineKind::Code(RoutineMode::Direct) => {
                                    let end = start + callee.nregs;
                                    if end > limit {
                                        return Err(overflow(end));
                                    }
                                    while dstack.len() < end {
                                        dstack.push(0);
                                    }
                                    frames.last_mut().expect("caller frame").pc = pc;
                                    self.steps += 1;
                                    frames.push(DirectFrame {
                                        routine: callee,
                                        pc: callee.entries[0] as usize,
                                        base: start,
                                    });
                                    continue 'frames;
                                }
                                _ => {
                                    return Err(RuntimeError::BadFrame {
                                        message: format!("direct routine `{}` calls `{}`", r.name, callee.name),
                                    })
                                }
                            }
                        }
                        Op::Spawn(_) => {
                            return Err(RuntimeError::BadFrame {
                                message: format!("spawn in direct routine `{}`", r.name),
                            })
                        }
                        Op::Return => {
                            dstack.truncate(base);
                            frames.pop();
                            continue 'frames;
                        }
                    }
                }
            }
            Ok(())
        })();
        self.dstack = dstack;
        result
    }

    fn direct_effect(&mut self, value: i64) {
        if self.recorder.is_some() {
            self.record(super::trace::EventKind::Effect { token: "stdout".to_string(), value });
        }
    }
}
