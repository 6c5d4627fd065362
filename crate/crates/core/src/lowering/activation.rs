//! Activation-frame lowering: one entry point per call site.
//!
//! Every register lives in a frame slot. A call saves the registers, records
//! the entry to resume at, writes the callee frame above and yields; the
//! frame stays on the stack until its last entry returns.

use crate::frontend::ast::{self, ParamKind, Routine, Section, Span, Stmt};
use crate::frontend::validate::substitute_ins;

use super::ir::*;
use super::scope::{bind_params, len_name, lower_array_arg, lower_assign, lower_expr, Env, Regs, Var};
use super::{Builder, LowerError};

pub(crate) fn lower_activation(
    builder: &Builder,
    id: RoutineId,
    routine: &Routine,
    mode: RoutineMode,
) -> Result<IrRoutine, LowerError> {
    let mut l = Lowerer {
        name: &routine.name,
        builder,
        regs: Regs::default(),
        env: Env::default(),
        ops: Vec::new(),
        spans: Vec::new(),
        plans: Vec::new(),
        entries: vec![0],
        uses_arrays: false,
    };
    for op in bind_params(&routine.name, &routine.sig, &mut l.regs, &mut l.env)? {
        l.emit(op, routine.span);
    }
    let body = routine.body.as_ref().expect("definition has a body");
    l.block(&body.stmts)?;
    l.emit(Op::Return, routine.span);

    let nparams = routine.sig.len();
    Ok(IrRoutine {
        id,
        name: routine.name.clone(),
        kind: RoutineKind::Code(mode),
        sig: routine.sig.clone(),
        effects: routine.effects.clone(),
        slot_names: Vec::new(),
        nparams,
        frame_bytes: 0,
        nregs: l.regs.count(),
        reg_names: l.regs.names,
        reg_refs: l.regs.refs,
        entries: l.entries,
        ops: l.ops,
        spans: l.spans,
        groups: Vec::new(),
        plans: l.plans,
        origin: None,
        uses_arrays: l.uses_arrays,
    })
}

struct Lowerer<'a> {
    name: &'a str,
    builder: &'a Builder,
    regs: Regs,
    env: Env,
    ops: Vec<Op>,
    spans: Vec<Span>,
    plans: Vec<CallPlan>,
    entries: Vec<u32>,
    uses_arrays: bool,
}

impl<'a> Lowerer<'a> {
    fn emit(&mut self, op: Op, span: Span) -> usize {
        self.ops.push(op);
        self.spans.push(span);
        self.ops.len() - 1
    }

    fn patch(&mut self, at: usize) {
        let target = self.ops.len();
        match &mut self.ops[at] {
            Op::JumpIfZero(_, t) | Op::Jump(t) => *t = target,
            _ => unreachable!("patching a non-jump"),
        }
    }

    fn expr(&self, e: &ast::Expr) -> Result<Expr, LowerError> {
        lower_expr(self.name, &self.env, e)
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), LowerError> {
        let scope = self.env.len();
        for stmt in stmts {
            self.stmt(stmt)?;
        }
        self.env.truncate(scope);
        Ok(())
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<(), LowerError> {
        match stmt {
            Stmt::Decl { name, init, span } => {
                let value = match init {
                    Some(e) => self.expr(e)?,
                    None => Expr::Const(0),
                };
                let reg = self.regs.alloc(name);
                self.emit(Op::Set(Place::Reg(reg), value), *span);
                self.env.bind(name, Var::Scalar { reg });
            }
            Stmt::ArrayDecl { name, len, span } => {
                let count = self.expr(len)?;
                let base = self.regs.alloc_ref(name);
                let len = self.regs.alloc(&len_name(name));
                self.emit(Op::Alloc { base, len, count }, *span);
                self.env.bind(name, Var::Array { base, len, section: None });
                self.uses_arrays = true;
            }
            Stmt::Assign { target, op, value, span } => {
                let op = lower_assign(self.name, &self.env, target, *op, value)?;
                self.emit(op, *span);
            }
            Stmt::If { cond, then, els, span } => {
                let cond = self.expr(cond)?;
                let branch = self.emit(Op::JumpIfZero(cond, 0), *span);
                self.block(&then.stmts)?;
                match els {
                    Some(els) => {
                        let skip = self.emit(Op::Jump(0), *span);
                        self.patch(branch);
                        self.block(&els.stmts)?;
                        self.patch(skip);
                    }
                    None => self.patch(branch),
                }
            }
            Stmt::While { cond, body, span } => {
                let top = self.ops.len();
                let cond = self.expr(cond)?;
                let exit = self.emit(Op::JumpIfZero(cond, 0), *span);
                self.block(&body.stmts)?;
                self.emit(Op::Jump(top), *span);
                self.patch(exit);
            }
            Stmt::Call(call) => {
                let plan = self.plan(call)?;
                self.plans.push(plan);
                let resume = self.entries.len() as u32;
                self.emit(Op::Call { plan: self.plans.len() as u32 - 1, resume }, call.span);
                self.entries.push(self.ops.len() as u32);
            }
            Stmt::Block(b) => self.block(&b.stmts)?,
        }
        Ok(())
    }

    fn plan(&self, call: &ast::Call) -> Result<CallPlan, LowerError> {
        let (callee, info) = self
            .builder
            .callee(&call.callee)
            .ok_or_else(|| LowerError::internal(self.name, format!("unknown callee `{}`", call.callee)))?;
        let mut args = Vec::with_capacity(info.sig.len());
        for section in Section::ALL {
            for (param, arg) in info.sig.section(section).iter().zip(call.section(section)) {
                let lowered = match (&param.kind, section) {
                    (ParamKind::Array(len), _) => {
                        let need = self.expr(&substitute_ins(len, &info.sig, &call.ins))?;
                        Arg::Value(lower_array_arg(self.name, &self.env, arg, need)?)
                    }
                    (ParamKind::Scalar, Section::In) => Arg::Value(self.expr(arg)?),
                    (ParamKind::Scalar, _) => self.scalar_ref(arg)?,
                };
                args.push(lowered);
            }
        }
        Ok(CallPlan { callee, args, ready: Ready::One, span: call.span })
    }

    fn scalar_ref(&self, arg: &ast::Expr) -> Result<Arg, LowerError> {
        match arg {
            ast::Expr::Var(name, _) => match self.env.lookup(name) {
                Some(Var::Scalar { reg }) => Ok(Arg::OwnSlot(*reg)),
                Some(Var::Ref { reg, .. }) => Ok(Arg::Value(Expr::Reg(*reg))),
                _ => Err(LowerError::internal(self.name, format!("`{name}` is not a scalar item"))),
            },
            ast::Expr::Index(..) => {
                Ok(Arg::Value(lower_array_arg(self.name, &self.env, arg, Expr::Const(1))?))
            }
            _ => Err(LowerError::internal(self.name, "scalar reference argument".to_string())),
        }
    }
}
