//! Task-frame lowering and continuation splitting.
//!
//! A task body runs to completion and then replaces its frame with the
//! frames of the calls it made (a spawn group). Code after a call runs
//! before the callee does, so the body may only do so while it does not
//! touch items the spawned calls produce or consume. At the first statement
//! that would, the rest of the body becomes a generated routine
//! (`name$hK`) whose frame is spawned last; its ins carry the locals it
//! needs, and pending outputs are wired straight into its slots.
//!
//! An `if` containing calls forks the lowering: each branch is lowered
//! together with the statements that follow the `if`, so every control
//! path ends in its own spawn group.

use std::collections::{HashMap, HashSet};

use crate::frontend::ast::{
    self, stmts_mention, AssignOp, Block, Effects, Param, ParamKind, Routine, Section, Signature, Span, Stmt,
};
use crate::frontend::validate::substitute_ins;

use super::ir::*;
use super::ready::{self, Access, Part, Resource, SliceKey};
use super::scope::{bind_params, len_name, lower_array_arg, lower_assign, lower_expr, Env, Regs, Var};
use super::{Builder, LowerError};

pub(crate) fn lower_task(
    builder: &mut Builder,
    id: RoutineId,
    routine: &Routine,
    origin: Option<RoutineId>,
) -> Result<IrRoutine, LowerError> {
    let root = match origin {
        Some(o) => builder.callees[o as usize].name.clone(),
        None => routine.name.clone(),
    };
    let mut l = Lowerer {
        builder,
        name: routine.name.clone(),
        root,
        root_id: origin.unwrap_or(id),
        effects: routine.effects.clone(),
        regs: Regs::default(),
        ops: Vec::new(),
        spans: Vec::new(),
        groups: Vec::new(),
        uses_arrays: false,
        span: routine.span,
    };
    let mut path = Path::default();
    for op in bind_params(&routine.name, &routine.sig, &mut l.regs, &mut path.env)? {
        l.emit(op, routine.span);
    }
    let body = routine.body.as_ref().expect("definition has a body");
    let scope = path.env.len();
    l.lower_path(vec![Work { stmts: &body.stmts, scope }], path)?;

    Ok(IrRoutine {
        id,
        name: routine.name.clone(),
        kind: RoutineKind::Code(RoutineMode::Task),
        sig: routine.sig.clone(),
        effects: routine.effects.clone(),
        slot_names: Vec::new(),
        nparams: routine.sig.len(),
        frame_bytes: 0,
        nregs: l.regs.count(),
        reg_names: l.regs.names,
        reg_refs: l.regs.refs,
        entries: vec![0],
        ops: l.ops,
        spans: l.spans,
        groups: l.groups,
        plans: Vec::new(),
        origin,
        uses_arrays: l.uses_arrays,
    })
}

/// Remaining statements of one enclosing block.
#[derive(Clone, Copy)]
struct Work<'s> {
    stmts: &'s [Stmt],
    /// Environment length to restore when the block ends.
    scope: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Episode {
    /// Spawned calls write the item; the parent no longer knows its value.
    Pending(u32),
    /// As `Pending`, and a spawned call's in slot is already its home.
    Consumed(u32),
}

#[derive(Debug, Clone)]
struct ItemDraft {
    init: Option<Expr>,
    consumer: Option<(u32, u32)>,
}

#[derive(Debug, Clone)]
struct Draft {
    callee: RoutineId,
    args: Vec<Arg>,
    access: Access,
    span: Span,
}

#[derive(Debug, Clone, Copy, Default)]
struct ArrayUse {
    read: bool,
    write: bool,
}

/// Lowering state along one control path.
#[derive(Debug, Clone, Default)]
struct Path {
    env: Env,
    plans: Vec<Draft>,
    items: Vec<ItemDraft>,
    scalars: HashMap<Reg, Episode>,
    refs: HashSet<Reg>,
    arrays: HashMap<Reg, ArrayUse>,
    versions: HashMap<Reg, u32>,
}

impl Path {
    fn bump(&mut self, reg: Reg) {
        *self.versions.entry(reg).or_insert(0) += 1;
    }

    /// True if evaluating `e` in the parent reads a value a spawned call
    /// may still write.
    fn reads_pending(&self, e: &ast::Expr) -> bool {
        let mut hit = false;
        e.visit_names(&mut |name| {
            hit |= match self.env.lookup(name) {
                Some(Var::Scalar { reg }) => self.scalars.contains_key(reg),
                Some(Var::Ref { reg, .. }) => self.refs.contains(reg),
                Some(Var::Array { base, .. }) => self.arrays.get(base).is_some_and(|u| u.write),
                None => false,
            }
        });
        hit
    }

    fn slice_key(&self, e: &ast::Expr) -> SliceKey {
        let mut versions = Vec::new();
        e.visit_names(&mut |name| {
            let v = match self.env.lookup(name) {
                Some(Var::Scalar { reg }) => self.versions.get(reg).copied().unwrap_or(0),
                _ => 0,
            };
            versions.push((name.to_string(), v));
        });
        SliceKey { expr: e.clone(), versions }
    }
}

struct Lowerer<'b> {
    builder: &'b mut Builder,
    name: String,
    root: String,
    root_id: RoutineId,
    effects: Effects,
    regs: Regs,
    ops: Vec<Op>,
    spans: Vec<Span>,
    groups: Vec<Group>,
    uses_arrays: bool,
    span: Span,
}

enum Check {
    Split,
    /// In-argument positions that become homes of pending items.
    Homes(Vec<(usize, u32)>),
}

impl<'b> Lowerer<'b> {
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

    fn expr(&self, path: &Path, e: &ast::Expr) -> Result<Expr, LowerError> {
        lower_expr(&self.name, &path.env, e)
    }

    /// Evaluates `e` now into a fresh register, so later parent writes do
    /// not change what the spawned frame receives.
    fn capture(&mut self, e: Expr, span: Span) -> Expr {
        if let Expr::Const(_) = e {
            return e;
        }
        let tmp = match e {
            Expr::Slice { .. } => self.regs.alloc_ref("$t"),
            _ => self.regs.alloc("$t"),
        };
        self.emit(Op::Set(Place::Reg(tmp), e), span);
        Expr::Reg(tmp)
    }

    fn lower_path<'s>(&mut self, mut work: Vec<Work<'s>>, mut path: Path) -> Result<(), LowerError> {
        loop {
            while let Some(top) = work.last() {
                if !top.stmts.is_empty() {
                    break;
                }
                path.env.truncate(top.scope);
                work.pop();
            }
            let Some(top) = work.last() else {
                return self.finish(path);
            };
            let stmts = top.stmts;
            let rest = &stmts[1..];
            let stmt = &stmts[0];
            match stmt {
                Stmt::Block(b) => {
                    work.last_mut().expect("inside a block").stmts = rest;
                    let scope = path.env.len();
                    work.push(Work { stmts: &b.stmts, scope });
                }
                Stmt::While { span, .. } if stmt.contains_call() => {
                    return Err(LowerError::LoopContainsCall { routine: self.root.clone(), span: *span });
                }
                Stmt::If { cond, then, els, span } if stmt.contains_call() => {
                    if path.reads_pending(cond) {
                        return self.split(work, path);
                    }
                    work.last_mut().expect("inside a block").stmts = rest;
                    let c = self.expr(&path, cond)?;
                    let branch = self.emit(Op::JumpIfZero(c, 0), *span);
                    let scope = path.env.len();
                    let mut then_work = work.clone();
                    then_work.push(Work { stmts: &then.stmts, scope });
                    self.lower_path(then_work, path.clone())?;
                    self.patch(branch);
                    if let Some(els) = els {
                        work.push(Work { stmts: &els.stmts, scope });
                    }
                }
                Stmt::Call(call) => match self.check_call(&path, call, &work)? {
                    Check::Split => return self.split(work, path),
                    Check::Homes(homes) => {
                        work.last_mut().expect("inside a block").stmts = rest;
                        self.emit_call(&mut path, call, &homes, false)?;
                    }
                },
                _ => {
                    if self.stmt_conflicts(&path, stmt, true) {
                        return self.split(work, path);
                    }
                    work.last_mut().expect("inside a block").stmts = rest;
                    self.plain_stmt(&mut path, stmt, true)?;
                }
            }
        }
    }

    /// True if `name` appears after the current statement on this path.
    fn mentioned_later(work: &[Work<'_>], name: &str) -> bool {
        let (top, outer) = work.split_last().expect("inside a block");
        stmts_mention(top.stmts.get(1..).unwrap_or(&[]), name) || outer.iter().any(|w| stmts_mention(w.stmts, name))
    }

    fn check_call(&self, path: &Path, call: &ast::Call, work: &[Work<'_>]) -> Result<Check, LowerError> {
        let (_, info) = self
            .builder
            .callee(&call.callee)
            .ok_or_else(|| LowerError::internal(&self.name, format!("unknown callee `{}`", call.callee)))?;
        let occurrences = |name: &str| call.args().filter(|(_, a)| a.mentions(name)).count();
        let mut homes = Vec::new();
        for (i, (param, arg)) in info.sig.ins.iter().zip(&call.ins).enumerate() {
            match &param.kind {
                ParamKind::Scalar => {
                    if let ast::Expr::Var(name, _) = arg {
                        if let Some(Var::Scalar { reg }) = path.env.lookup(name) {
                            match path.scalars.get(reg) {
                                Some(Episode::Pending(item)) => {
                                    if occurrences(name) > 1 || Self::mentioned_later(work, name) {
                                        return Ok(Check::Split);
                                    }
                                    homes.push((i, *item));
                                    continue;
                                }
                                Some(Episode::Consumed(_)) => return Ok(Check::Split),
                                None => {}
                            }
                        }
                    }
                    if path.reads_pending(arg) {
                        return Ok(Check::Split);
                    }
                }
                ParamKind::Array(len) => {
                    if array_arg_reads_pending(path, arg) {
                        return Ok(Check::Split);
                    }
                    if path.reads_pending(&substitute_ins(len, &info.sig, &call.ins)) {
                        return Ok(Check::Split);
                    }
                }
            }
        }
        for section in [Section::Inout, Section::Out] {
            for (param, arg) in info.sig.section(section).iter().zip(call.section(section)) {
                match (&param.kind, arg) {
                    (ParamKind::Scalar, ast::Expr::Var(name, _)) => {
                        if let Some(Var::Scalar { reg }) = path.env.lookup(name) {
                            if section == Section::Inout
                                && matches!(path.scalars.get(reg), Some(Episode::Consumed(_)))
                            {
                                return Ok(Check::Split);
                            }
                        }
                    }
                    (ParamKind::Scalar, ast::Expr::Index(_, index, _)) => {
                        if path.reads_pending(index) {
                            return Ok(Check::Split);
                        }
                    }
                    (ParamKind::Array(len), _) => {
                        if array_arg_reads_pending(path, arg)
                            || path.reads_pending(&substitute_ins(len, &info.sig, &call.ins))
                        {
                            return Ok(Check::Split);
                        }
                    }
                    _ => return Err(LowerError::internal(&self.name, "bad reference argument".to_string())),
                }
            }
        }
        Ok(Check::Homes(homes))
    }

    fn emit_call(
        &mut self,
        path: &mut Path,
        call: &ast::Call,
        homes: &[(usize, u32)],
        generated: bool,
    ) -> Result<(), LowerError> {
        let (callee, info) = self
            .builder
            .callee(&call.callee)
            .map(|(id, c)| (id, c.clone()))
            .ok_or_else(|| LowerError::internal(&self.name, format!("unknown callee `{}`", call.callee)))?;
        let plan = path.plans.len() as u32;
        let recursive = !generated && (callee == self.root_id || call.callee == self.root);
        let mut args = Vec::with_capacity(info.sig.len());
        let mut access = Access::default();
        for (i, (param, arg)) in info.sig.ins.iter().zip(&call.ins).enumerate() {
            if let Some(&(_, item)) = homes.iter().find(|(at, _)| *at == i) {
                path.items[item as usize].consumer = Some((plan, i as u32));
                let Some(Var::Scalar { reg }) = path.env.lookup(arg.base_name().unwrap_or("")).cloned() else {
                    return Err(LowerError::internal(&self.name, "home without a scalar".to_string()));
                };
                path.scalars.insert(reg, Episode::Consumed(item));
                args.push(Arg::Home(item));
                access.reads.push(Resource::Item(item));
            } else {
                match &param.kind {
                    ParamKind::Scalar => {
                        let e = self.expr(path, arg)?;
                        args.push(Arg::Value(self.capture(e, call.span)));
                    }
                    ParamKind::Array(len) => {
                        let (value, base, part) = self.array_arg(path, arg, len, &info.sig, call, recursive)?;
                        args.push(Arg::Value(value));
                        path.arrays.entry(base).or_default().read = true;
                        access.reads.push(Resource::Array(base, part));
                    }
                }
            }
        }

        for section in [Section::Inout, Section::Out] {
            let reads = section == Section::Inout;
            for (param, arg) in info.sig.section(section).iter().zip(call.section(section)) {
                match (&param.kind, arg) {
                    (ParamKind::Scalar, ast::Expr::Var(name, _)) => match path.env.lookup(name).cloned() {
                        Some(Var::Scalar { reg }) => {
                            let item = match (section, path.scalars.get(&reg)) {
                                (Section::Inout, Some(Episode::Pending(item))) => *item,
                                (Section::Inout, _) => {
                                    let init = self.capture(Expr::Reg(reg), call.span);
                                    path.items.push(ItemDraft { init: Some(init), consumer: None });
                                    path.items.len() as u32 - 1
                                }
                                _ => {
                                    path.items.push(ItemDraft { init: None, consumer: None });
                                    path.items.len() as u32 - 1
                                }
                            };
                            path.scalars.insert(reg, Episode::Pending(item));
                            path.bump(reg);
                            args.push(Arg::RefTo(item));
                            if reads {
                                access.reads.push(Resource::Item(item));
                            }
                            access.writes.push(Resource::Item(item));
                        }
                        Some(Var::Ref { reg, .. }) => {
                            path.refs.insert(reg);
                            args.push(Arg::Value(Expr::Reg(reg)));
                            if reads {
                                access.reads.push(Resource::Param(reg));
                            }
                            access.writes.push(Resource::Param(reg));
                        }
                        _ => return Err(LowerError::internal(&self.name, format!("`{name}` is not a scalar item"))),
                    },
                    (ParamKind::Scalar, ast::Expr::Index(name, _, _)) => {
                        let base = self.array_base(path, name)?;
                        self.check_escape(path, name, recursive, call.span)?;
                        let e = lower_array_arg(&self.name, &path.env, arg, Expr::Const(1))?;
                        args.push(Arg::Value(self.capture(e, call.span)));
                        path.arrays.entry(base).or_default().write = true;
                        if reads {
                            access.reads.push(Resource::Array(base, Part::Whole));
                        }
                        access.writes.push(Resource::Array(base, Part::Whole));
                    }
                    (ParamKind::Array(len), _) => {
                        let (value, base, part) = self.array_arg(path, arg, len, &info.sig, call, recursive)?;
                        args.push(Arg::Value(value));
                        path.arrays.entry(base).or_default().write = true;
                        if reads {
                            access.reads.push(Resource::Array(base, part.clone()));
                        }
                        access.writes.push(Resource::Array(base, part));
                    }
                    _ => return Err(LowerError::internal(&self.name, "bad reference argument".to_string())),
                }
            }
        }

        for (section, token) in info.effects.tokens() {
            let r = Resource::Effect(token.to_string());
            if section != Section::Out {
                access.reads.push(r.clone());
            }
            if section != Section::In {
                access.writes.push(r);
            }
        }
        path.plans.push(Draft { callee, args, access, span: call.span });
        Ok(())
    }

    fn array_base(&self, path: &Path, name: &str) -> Result<Reg, LowerError> {
        match path.env.lookup(name) {
            Some(Var::Array { base, .. }) => Ok(*base),
            _ => Err(LowerError::internal(&self.name, format!("`{name}` is not an array"))),
        }
    }

    fn check_escape(&self, path: &Path, name: &str, recursive: bool, span: Span) -> Result<(), LowerError> {
        if recursive && matches!(path.env.lookup(name), Some(Var::Array { section: None, .. })) {
            return Err(LowerError::ArrayEscapes { routine: self.root.clone(), name: name.to_string(), span });
        }
        Ok(())
    }

    fn array_arg(
        &mut self,
        path: &Path,
        arg: &ast::Expr,
        len: &ast::Expr,
        sig: &Signature,
        call: &ast::Call,
        recursive: bool,
    ) -> Result<(Expr, Reg, Part), LowerError> {
        let name = arg.base_name().unwrap_or("");
        let base = self.array_base(path, name)?;
        self.check_escape(path, name, recursive, call.span)?;
        let need_ast = substitute_ins(len, sig, &call.ins);
        let part = match arg {
            ast::Expr::Index(_, k, _) => Part::Suffix(path.slice_key(k)),
            _ => Part::Prefix(path.slice_key(&need_ast)),
        };
        let need = self.expr(path, &need_ast)?;
        let slice = lower_array_arg(&self.name, &path.env, arg, need)?;
        Ok((self.capture(slice, call.span), base, part))
    }

    /// Conflict check for a statement without calls. Outside nested control
    /// flow, a plain `=` to a pending local starts a new version of it.
    fn stmt_conflicts(&self, path: &Path, stmt: &Stmt, top: bool) -> bool {
        match stmt {
            Stmt::Decl { init, .. } => init.as_ref().is_some_and(|e| path.reads_pending(e)),
            Stmt::ArrayDecl { len, .. } => path.reads_pending(len),
            Stmt::Assign { target, op, value, .. } => {
                if path.reads_pending(value) {
                    return true;
                }
                if let Some(index) = &target.index {
                    if path.reads_pending(index) {
                        return true;
                    }
                }
                match path.env.lookup(&target.name) {
                    Some(Var::Scalar { reg }) => {
                        path.scalars.contains_key(reg) && !(top && *op == AssignOp::Set)
                    }
                    Some(Var::Ref { reg, .. }) => path.refs.contains(reg),
                    Some(Var::Array { base, .. }) => {
                        path.arrays.get(base).is_some_and(|u| u.read || u.write)
                    }
                    None => false,
                }
            }
            Stmt::If { cond, then, els, .. } => {
                path.reads_pending(cond)
                    || self.block_conflicts(path, then)
                    || els.as_ref().is_some_and(|b| self.block_conflicts(path, b))
            }
            Stmt::While { cond, body, .. } => path.reads_pending(cond) || self.block_conflicts(path, body),
            Stmt::Block(b) => self.block_conflicts(path, b),
            Stmt::Call(_) => true,
        }
    }

    fn block_conflicts(&self, path: &Path, block: &Block) -> bool {
        block.stmts.iter().any(|s| self.stmt_conflicts(path, s, false))
    }

    /// Lowers a statement that contains no calls.
    fn plain_stmt(&mut self, path: &mut Path, stmt: &Stmt, top: bool) -> Result<(), LowerError> {
        match stmt {
            Stmt::Decl { name, init, span } => {
                let value = match init {
                    Some(e) => self.expr(path, e)?,
                    None => Expr::Const(0),
                };
                let reg = self.regs.alloc(name);
                self.emit(Op::Set(Place::Reg(reg), value), *span);
                path.env.bind(name, Var::Scalar { reg });
            }
            Stmt::ArrayDecl { name, len, span } => {
                let count = self.expr(path, len)?;
                let base = self.regs.alloc_ref(name);
                let len = self.regs.alloc(&len_name(name));
                self.emit(Op::Alloc { base, len, count }, *span);
                path.env.bind(name, Var::Array { base, len, section: None });
                self.uses_arrays = true;
            }
            Stmt::Assign { target, op, value, span } => {
                let lowered = lower_assign(&self.name, &path.env, target, *op, value)?;
                self.emit(lowered, *span);
                if let Some(Var::Scalar { reg }) = path.env.lookup(&target.name).cloned() {
                    if top {
                        path.scalars.remove(&reg);
                    }
                    path.bump(reg);
                }
            }
            Stmt::If { cond, then, els, span } => {
                let c = self.expr(path, cond)?;
                let branch = self.emit(Op::JumpIfZero(c, 0), *span);
                self.plain_block(path, then)?;
                match els {
                    Some(els) => {
                        let skip = self.emit(Op::Jump(0), *span);
                        self.patch(branch);
                        self.plain_block(path, els)?;
                        self.patch(skip);
                    }
                    None => self.patch(branch),
                }
            }
            Stmt::While { cond, body, span } => {
                let head = self.ops.len();
                let c = self.expr(path, cond)?;
                let exit = self.emit(Op::JumpIfZero(c, 0), *span);
                self.plain_block(path, body)?;
                self.emit(Op::Jump(head), *span);
                self.patch(exit);
            }
            Stmt::Block(b) => self.plain_block(path, b)?,
            Stmt::Call(_) => unreachable!("plain statements contain no calls"),
        }
        Ok(())
    }

    fn plain_block(&mut self, path: &mut Path, block: &Block) -> Result<(), LowerError> {
        let scope = path.env.len();
        for stmt in &block.stmts {
            self.plain_stmt(path, stmt, false)?;
        }
        path.env.truncate(scope);
        Ok(())
    }

    /// Moves the current statement and everything after it on this path
    /// into a generated routine spawned as the last frame of the group.
    fn split(&mut self, work: Vec<Work<'_>>, mut path: Path) -> Result<(), LowerError> {
        let (top, outer) = work.split_last().expect("inside a block");
        let mut body: Vec<Stmt> = top.stmts.to_vec();
        for w in outer.iter().rev() {
            let mut wrapped = vec![Stmt::Block(Block::new(body))];
            wrapped.extend_from_slice(w.stmts);
            body = wrapped;
        }
        let span = body.first().map(Stmt::span).unwrap_or(self.span);

        let mut lens = Vec::new();
        let mut scalars = Vec::new();
        let mut in_arrays = Vec::new();
        let mut inouts = Vec::new();
        let mut outs = Vec::new();
        let param = |name: &str, kind: ParamKind| Param { name: name.to_string(), kind, span };
        let arg = |name: &str| ast::Expr::Var(name.to_string(), span);
        for (name, var) in path.env.visible() {
            if !stmts_mention(&body, name) {
                continue;
            }
            match var {
                Var::Scalar { .. } => scalars.push(param(name, ParamKind::Scalar)),
                Var::Ref { section, .. } => {
                    let p = param(name, ParamKind::Scalar);
                    if *section == Section::Out { outs.push(p) } else { inouts.push(p) }
                }
                Var::Array { section, .. } => {
                    let ln = len_name(name);
                    lens.push(param(&ln, ParamKind::Scalar));
                    let p = param(name, ParamKind::Array(arg(&ln)));
                    match section {
                        Some(Section::In) => in_arrays.push(p),
                        Some(Section::Out) => outs.push(p),
                        _ => inouts.push(p),
                    }
                }
            }
        }
        let mut ins = lens;
        ins.extend(scalars);
        ins.extend(in_arrays);
        let sig = Signature { ins, inouts, outs };
        let call = ast::Call {
            callee: String::new(),
            ins: sig.ins.iter().map(|p| arg(&p.name)).collect(),
            inouts: sig.inouts.iter().map(|p| arg(&p.name)).collect(),
            outs: sig.outs.iter().map(|p| arg(&p.name)).collect(),
            span,
        };

        let name = self.builder.continuation_name(&self.root);
        let routine = Routine {
            name: name.clone(),
            sig: sig.clone(),
            effects: self.effects.clone(),
            body: Some(Block::new(body)),
            span,
        };
        let id = self.builder.reserve(&name, sig, self.effects.clone());
        let lowered = lower_task(self.builder, id, &routine, Some(self.root_id))?;
        self.builder.routines[id as usize] = Some(lowered);

        let call = ast::Call { callee: name, ..call };
        let end = [Work { stmts: &[], scope: path.env.len() }];
        match self.check_call(&path, &call, &end)? {
            Check::Homes(homes) => self.emit_call(&mut path, &call, &homes, true)?,
            Check::Split => {
                return Err(LowerError::internal(&self.name, "continuation call conflicts".to_string()))
            }
        }
        self.finish(path)
    }

    /// Ends a control path: spawn its group, or pop if it made no calls.
    fn finish(&mut self, path: Path) -> Result<(), LowerError> {
        if path.plans.is_empty() {
            self.emit(Op::Return, self.span);
            return Ok(());
        }
        let flags = ready::analyze(&path.plans.iter().map(|d| d.access.clone()).collect::<Vec<_>>());
        let mut dead_cells = 0;
        let items = path
            .items
            .into_iter()
            .map(|item| {
                let home = match item.consumer {
                    Some((plan, slot)) => ItemHome::Slot { plan, slot },
                    None => {
                        dead_cells += 1;
                        ItemHome::Dead(dead_cells - 1)
                    }
                };
                GroupItem { home, init: item.init }
            })
            .collect();
        let plans = path
            .plans
            .into_iter()
            .zip(flags)
            .map(|(d, ready)| CallPlan {
                callee: d.callee,
                args: d.args,
                ready: if ready { Ready::One } else { Ready::Zero },
                span: d.span,
            })
            .collect();
        self.groups.push(Group { plans, items, dead_cells, ..Group::default() });
        let group = self.groups.len() as u32 - 1;
        self.emit(Op::Spawn(group), self.span);
        Ok(())
    }
}

fn array_arg_reads_pending(path: &Path, arg: &ast::Expr) -> bool {
    match arg {
        ast::Expr::Index(_, k, _) => path.reads_pending(k),
        _ => false,
    }
}
