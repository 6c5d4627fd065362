//! Variable bindings and expression lowering shared by both frame modes.

use crate::frontend::ast::{self, ParamKind, Section, Signature};

use super::ir::{Expr, Op, Place, Reg};
use super::LowerError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Var {
    /// A value held in a register: local or in-parameter.
    Scalar { reg: Reg },
    /// A scalar inout/out parameter; the register holds a reference.
    Ref { reg: Reg, section: Section },
    /// `section` is `None` for local arrays.
    Array { base: Reg, len: Reg, section: Option<Section> },
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Env {
    bindings: Vec<(String, Var)>,
}

impl Env {
    pub fn lookup(&self, name: &str) -> Option<&Var> {
        self.bindings.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn bind(&mut self, name: &str, var: Var) {
        if let Var::Array { len, .. } = var {
            self.bindings.push((len_name(name), Var::Scalar { reg: len }));
        }
        self.bindings.push((name.to_string(), var));
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn truncate(&mut self, len: usize) {
        self.bindings.truncate(len);
    }

    /// Visible bindings, innermost last, with shadowed entries removed.
    pub fn visible(&self) -> Vec<(&str, &Var)> {
        let mut out: Vec<(&str, &Var)> = Vec::new();
        for (name, var) in &self.bindings {
            out.retain(|(n, _)| n != name);
            out.push((name, var));
        }
        out
    }
}

/// Hidden binding holding an array's length.
pub(crate) fn len_name(array: &str) -> String {
    format!("{array}$len")
}

#[derive(Debug, Default)]
pub(crate) struct Regs {
    pub names: Vec<String>,
    /// Registers holding item references rather than integers.
    pub refs: Vec<bool>,
}

impl Regs {
    pub fn alloc(&mut self, name: &str) -> Reg {
        self.names.push(name.to_string());
        self.refs.push(false);
        (self.names.len() - 1) as Reg
    }

    pub fn alloc_ref(&mut self, name: &str) -> Reg {
        let reg = self.alloc(name);
        self.refs[reg as usize] = true;
        reg
    }

    pub fn count(&self) -> usize {
        self.names.len()
    }
}

/// Allocates parameter registers (one per slot, in slot order) and binds
/// them. Returns the prologue computing array lengths.
pub(crate) fn bind_params(
    routine: &str,
    sig: &Signature,
    regs: &mut Regs,
    env: &mut Env,
) -> Result<Vec<Op>, LowerError> {
    let mut arrays = Vec::new();
    for (section, p) in sig.params() {
        let reg = if section == Section::In && p.kind == ParamKind::Scalar {
            regs.alloc(&p.name)
        } else {
            regs.alloc_ref(&p.name)
        };
        match &p.kind {
            ParamKind::Scalar if section == Section::In => env.bind(&p.name, Var::Scalar { reg }),
            ParamKind::Scalar => env.bind(&p.name, Var::Ref { reg, section }),
            ParamKind::Array(len) => arrays.push((p.name.clone(), reg, section, len.clone())),
        }
    }
    let mut prologue = Vec::new();
    for (name, base, section, len_expr) in arrays {
        let len = regs.alloc(&len_name(&name));
        prologue.push(Op::Set(Place::Reg(len), lower_expr(routine, env, &len_expr)?));
        env.bind(&name, Var::Array { base, len, section: Some(section) });
    }
    Ok(prologue)
}

pub(crate) fn lower_expr(routine: &str, env: &Env, e: &ast::Expr) -> Result<Expr, LowerError> {
    Ok(match e {
        ast::Expr::Int(v, _) => Expr::Const(*v),
        ast::Expr::Var(name, _) => match env.lookup(name) {
            Some(Var::Scalar { reg }) => Expr::Reg(*reg),
            Some(Var::Ref { reg, .. }) => Expr::Load(*reg),
            _ => return Err(LowerError::internal(routine, format!("`{name}` is not a scalar"))),
        },
        ast::Expr::Index(name, index, _) => match env.lookup(name) {
            Some(Var::Array { base, len, .. }) => Expr::Index {
                base: *base,
                len: *len,
                index: Box::new(lower_expr(routine, env, index)?),
            },
            _ => return Err(LowerError::internal(routine, format!("`{name}` is not an array"))),
        },
        ast::Expr::Neg(inner, _) => Expr::Neg(Box::new(lower_expr(routine, env, inner)?)),
        ast::Expr::Bin(op, a, b, _) => Expr::Bin(
            *op,
            Box::new(lower_expr(routine, env, a)?),
            Box::new(lower_expr(routine, env, b)?),
        ),
    })
}

/// Lowers an assignment target; compound operators read the target first.
pub(crate) fn lower_assign(
    routine: &str,
    env: &Env,
    target: &ast::LValue,
    op: ast::AssignOp,
    value: &ast::Expr,
) -> Result<Op, LowerError> {
    let rhs = lower_expr(routine, env, value)?;
    let (place, current) = match (&target.index, env.lookup(&target.name)) {
        (None, Some(Var::Scalar { reg })) => (Place::Reg(*reg), Expr::Reg(*reg)),
        (None, Some(Var::Ref { reg, .. })) => (Place::Deref(*reg), Expr::Load(*reg)),
        (Some(index), Some(Var::Array { base, len, .. })) => {
            let index = lower_expr(routine, env, index)?;
            (
                Place::Index { base: *base, len: *len, index: index.clone() },
                Expr::Index { base: *base, len: *len, index: Box::new(index) },
            )
        }
        _ => return Err(LowerError::internal(routine, format!("bad assignment to `{}`", target.name))),
    };
    let value = match op.bin_op() {
        None => rhs,
        Some(bin) => Expr::Bin(bin, Box::new(current), Box::new(rhs)),
    };
    Ok(Op::Set(place, value))
}

/// Lowers `a` or `a[k]` passed for an array parameter needing `need` cells.
pub(crate) fn lower_array_arg(
    routine: &str,
    env: &Env,
    arg: &ast::Expr,
    need: Expr,
) -> Result<Expr, LowerError> {
    let (name, offset) = match arg {
        ast::Expr::Var(name, _) => (name, Expr::Const(0)),
        ast::Expr::Index(name, k, _) => (name, lower_expr(routine, env, k)?),
        _ => return Err(LowerError::internal(routine, "array argument".to_string())),
    };
    match env.lookup(name) {
        Some(Var::Array { base, len, .. }) => Ok(Expr::Slice {
            base: *base,
            len: *len,
            offset: Box::new(offset),
            need: Box::new(need),
        }),
        _ => Err(LowerError::internal(routine, format!("`{name}` is not an array"))),
    }
}
