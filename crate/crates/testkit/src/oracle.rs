//! A direct recursive interpreter over the checked AST. It shares nothing
//! with lowering or the frame machine beyond the parser, so it serves as
//! the reference for outs and effect order.
//!
//! Variables live in one flat store. Scalars are single cells, arrays are
//! (base, length) views; inout and out arguments pass the caller's cells.
//! Fresh cells start at zero.

use std::collections::HashMap;

use taskframe::frontend::ast::{AssignOp, Block, Call, Expr, ParamKind, Routine, Section, Stmt};
use taskframe::frontend::CheckedProgram;
use taskframe::machine::EntryCall;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    DivideByZero(String),
    OutOfBounds(String),
    NegativeLength(String),
    /// The step budget ran out.
    Budget,
    Entry(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleResult {
    /// Inouts then outs, under the entry call's names.
    pub outs: Vec<(String, i64)>,
    pub output: Vec<u8>,
    pub effects: Vec<(String, i64)>,
    /// Calls made, the entry included.
    pub calls: u64,
}

#[derive(Debug, Clone, Copy)]
enum Var {
    Scalar(usize),
    Array { base: usize, len: usize },
}

struct Interp<'p> {
    routines: HashMap<&'p str, &'p Routine>,
    store: Vec<i64>,
    result: OracleResult,
    budget: u64,
}

type Env = Vec<(String, Var)>;

fn lookup(env: &Env, name: &str) -> Var {
    env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v).expect("validated name")
}

impl<'p> Interp<'p> {
    fn tick(&mut self) -> Result<(), OracleError> {
        if self.budget == 0 {
            return Err(OracleError::Budget);
        }
        self.budget -= 1;
        Ok(())
    }

    fn alloc(&mut self, n: usize) -> usize {
        let base = self.store.len();
        self.store.resize(base + n, 0);
        base
    }

    fn cell(&self, env: &Env, name: &str, index: Option<i64>) -> Result<usize, OracleError> {
        match (lookup(env, name), index) {
            (Var::Scalar(c), None) => Ok(c),
            (Var::Array { base, len }, Some(i)) => {
                if i < 0 || i as usize >= len {
                    return Err(OracleError::OutOfBounds(format!("{name}[{i}] of length {len}")));
                }
                Ok(base + i as usize)
            }
            _ => unreachable!("validated access to {name}"),
        }
    }

    fn eval(&self, env: &Env, e: &Expr) -> Result<i64, OracleError> {
        Ok(match e {
            Expr::Int(v, _) => *v,
            Expr::Var(name, _) => self.store[self.cell(env, name, None)?],
            Expr::Index(name, i, _) => {
                let i = self.eval(env, i)?;
                self.store[self.cell(env, name, Some(i))?]
            }
            Expr::Neg(a, _) => self.eval(env, a)?.wrapping_neg(),
            Expr::Bin(op, a, b, span) => {
                let (x, y) = (self.eval(env, a)?, self.eval(env, b)?);
                op.apply(x, y).ok_or_else(|| OracleError::DivideByZero(span.to_string()))?
            }
        })
    }

    fn length(&self, env: &Env, e: &Expr) -> Result<usize, OracleError> {
        let n = self.eval(env, e)?;
        usize::try_from(n).map_err(|_| OracleError::NegativeLength(format!("{n} at {}", e.span())))
    }

    fn block(&mut self, env: &mut Env, block: &Block) -> Result<(), OracleError> {
        let mark = env.len();
        for s in &block.stmts {
            self.stmt(env, s)?;
        }
        env.truncate(mark);
        Ok(())
    }

    fn stmt(&mut self, env: &mut Env, s: &Stmt) -> Result<(), OracleError> {
        self.tick()?;
        match s {
            Stmt::Decl { name, init, .. } => {
                let v = match init {
                    Some(e) => self.eval(env, e)?,
                    None => 0,
                };
                let c = self.alloc(1);
                self.store[c] = v;
                env.push((name.clone(), Var::Scalar(c)));
            }
            Stmt::ArrayDecl { name, len, .. } => {
                let len = self.length(env, len)?;
                let base = self.alloc(len);
                env.push((name.clone(), Var::Array { base, len }));
            }
            Stmt::Assign { target, op, value, .. } => {
                let v = self.eval(env, value)?;
                let index = match &target.index {
                    Some(i) => Some(self.eval(env, i)?),
                    None => None,
                };
                let c = self.cell(env, &target.name, index)?;
                self.store[c] = match op {
                    AssignOp::Set => v,
                    AssignOp::Add => self.store[c].wrapping_add(v),
                    AssignOp::Sub => self.store[c].wrapping_sub(v),
                    AssignOp::Mul => self.store[c].wrapping_mul(v),
                };
            }
            Stmt::If { cond, then, els, .. } => {
                if self.eval(env, cond)? != 0 {
                    self.block(env, then)?;
                } else if let Some(b) = els {
                    self.block(env, b)?;
                }
            }
            Stmt::While { cond, body, .. } => {
                while self.eval(env, cond)? != 0 {
                    self.tick()?;
                    self.block(env, body)?;
                }
            }
            Stmt::Block(b) => self.block(env, b)?,
            Stmt::Call(call) => self.call(env, call)?,
        }
        Ok(())
    }

    /// An array argument `a` or `a[k]` for a parameter of length `need`.
    fn slice(&self, env: &Env, arg: &Expr, need: usize) -> Result<Var, OracleError> {
        let (name, k) = match arg {
            Expr::Var(name, _) => (name, 0),
            Expr::Index(name, k, _) => (name, self.eval(env, k)?),
            _ => unreachable!("validated array argument"),
        };
        let Var::Array { base, len } = lookup(env, name) else { unreachable!("validated array") };
        if k < 0 || k as usize > len || need > len - k as usize {
            return Err(OracleError::OutOfBounds(format!("{need} cells of {name} from {k}, length {len}")));
        }
        Ok(Var::Array { base: base + k as usize, len: need })
    }

    fn call(&mut self, env: &Env, call: &Call) -> Result<(), OracleError> {
        self.result.calls += 1;
        if matches!(call.callee.as_str(), "putc" | "puti") {
            let v = self.eval(env, &call.ins[0])?;
            if call.callee == "putc" {
                self.result.output.push(v as u8);
            } else {
                self.result.output.extend(format!("{v}\n").bytes());
            }
            self.result.effects.push(("stdout".to_string(), v));
            return Ok(());
        }
        let r = self.routines[call.callee.as_str()];
        let mut callee_env: Env = Vec::new();
        for (section, p) in r.sig.params() {
            let i = r.sig.section(section).iter().position(|q| q.name == p.name).expect("param");
            let arg = &call.section(section)[i];
            let var = match (&p.kind, section) {
                (ParamKind::Scalar, Section::In) => {
                    let v = self.eval(env, arg)?;
                    let c = self.alloc(1);
                    self.store[c] = v;
                    Var::Scalar(c)
                }
                (ParamKind::Scalar, _) => {
                    let (name, index) = match arg {
                        Expr::Var(name, _) => (name, None),
                        Expr::Index(name, i, _) => (name, Some(self.eval(env, i)?)),
                        _ => unreachable!("validated scalar item"),
                    };
                    Var::Scalar(self.cell(env, name, index)?)
                }
                (ParamKind::Array(len), _) => {
                    // lengths are evaluated over the callee's own ins
                    let need = self.length(&callee_env, len)?;
                    self.slice(env, arg, need)?
                }
            };
            callee_env.push((p.name.clone(), var));
        }
        self.tick()?;
        self.block(&mut callee_env, r.body.as_ref().expect("definition"))
    }
}

/// Runs `entry` over the checked program with at most `budget` steps.
pub fn run_oracle(checked: &CheckedProgram, entry: &EntryCall, budget: u64) -> Result<OracleResult, OracleError> {
    let routines: HashMap<&str, &Routine> = checked.definitions().map(|r| (r.name.as_str(), r)).collect();
    let r = *routines
        .get(entry.routine.as_str())
        .ok_or_else(|| OracleError::Entry(format!("no routine `{}`", entry.routine)))?;
    let counts = [entry.ins.len(), entry.inouts.len(), entry.outs.len()];
    for (s, n) in Section::ALL.into_iter().zip(counts) {
        if r.sig.section(s).len() != n || r.sig.section(s).iter().any(|p| p.kind.is_array()) {
            return Err(OracleError::Entry(format!("entry does not match `{}`", r.name)));
        }
    }
    let mut it = Interp { routines, store: Vec::new(), result: OracleResult::default(), budget };
    let mut env: Env = Vec::new();
    for (name, v) in entry.ins.iter().enumerate().map(|(i, v)| (format!("$in{i}"), *v)).chain(entry.inouts.iter().cloned()) {
        let c = it.alloc(1);
        it.store[c] = v;
        env.push((name, Var::Scalar(c)));
    }
    for name in &entry.outs {
        let c = it.alloc(1);
        env.push((name.clone(), Var::Scalar(c)));
    }
    let var = |name: &str| Expr::var(name);
    let call = Call {
        callee: entry.routine.clone(),
        ins: (0..entry.ins.len()).map(|i| var(&format!("$in{i}"))).collect(),
        inouts: entry.inouts.iter().map(|(n, _)| var(n)).collect(),
        outs: entry.outs.iter().map(|n| var(n)).collect(),
        span: Default::default(),
    };
    it.call(&env, &call)?;
    let outs = entry
        .result_names()
        .map(|n| (n.to_string(), it.store[it.cell(&env, n, None).expect("result cell")]))
        .collect();
    it.result.outs = outs;
    Ok(it.result)
}
