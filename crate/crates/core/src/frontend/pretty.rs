use std::fmt::Write;

use super::ast::*;

/// Renders a program as TSIA source. Binary expressions are fully
/// parenthesized, so the output reparses to the same tree.
pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    for (i, routine) in program.routines.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        routine_to(&mut out, routine);
    }
    out
}

pub fn routine_to(out: &mut String, r: &Routine) {
    out.push_str(&r.name);
    signature_to(out, &r.sig);
    if !r.effects.is_empty() {
        let _ = write!(
            out,
            "({};{};{})",
            r.effects.ins.join(", "),
            r.effects.inouts.join(", "),
            r.effects.outs.join(", ")
        );
    }
    match &r.body {
        Some(body) => {
            out.push(' ');
            block_to(out, body, 0);
            out.push('\n');
        }
        None => out.push_str(";\n"),
    }
}

pub fn signature_to(out: &mut String, sig: &Signature) {
    out.push('(');
    for (i, section) in Section::ALL.into_iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        for (j, p) in sig.section(section).iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            } else if i > 0 {
                out.push(' ');
            }
            out.push_str("int ");
            out.push_str(&p.name);
            if let ParamKind::Array(len) = &p.kind {
                out.push('[');
                expr_to(out, len);
                out.push(']');
            }
        }
    }
    out.push(')');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn block_to(out: &mut String, block: &Block, depth: usize) {
    if block.stmts.is_empty() {
        out.push_str("{ }");
        return;
    }
    out.push_str("{\n");
    for stmt in &block.stmts {
        indent(out, depth + 1);
        stmt_to(out, stmt, depth + 1);
        out.push('\n');
    }
    indent(out, depth);
    out.push('}');
}

fn stmt_to(out: &mut String, stmt: &Stmt, depth: usize) {
    match stmt {
        Stmt::Decl { name, init, .. } => {
            let _ = write!(out, "int {name}");
            if let Some(e) = init {
                out.push_str(" = ");
                expr_to(out, e);
            }
            out.push(';');
        }
        Stmt::ArrayDecl { name, len, .. } => {
            let _ = write!(out, "int {name}[");
            expr_to(out, len);
            out.push_str("];");
        }
        Stmt::Assign { target, op, value, .. } => {
            out.push_str(&target.name);
            if let Some(i) = &target.index {
                out.push('[');
                expr_to(out, i);
                out.push(']');
            }
            let _ = write!(out, " {} ", op.symbol());
            expr_to(out, value);
            out.push(';');
        }
        Stmt::If { cond, then, els, .. } => {
            out.push_str("if (");
            expr_to(out, cond);
            out.push_str(") ");
            block_to(out, then, depth);
            if let Some(b) = els {
                out.push_str(" else ");
                block_to(out, b, depth);
            }
        }
        Stmt::While { cond, body, .. } => {
            out.push_str("while (");
            expr_to(out, cond);
            out.push_str(") ");
            block_to(out, body, depth);
        }
        Stmt::Call(call) => {
            call_to(out, call);
            out.push(';');
        }
        Stmt::Block(b) => block_to(out, b, depth),
    }
}

pub fn call_to(out: &mut String, call: &Call) {
    out.push_str(&call.callee);
    out.push('(');
    for (i, section) in Section::ALL.into_iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        for (j, e) in call.section(section).iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            expr_to(out, e);
        }
    }
    out.push(')');
}

pub fn expr_to(out: &mut String, expr: &Expr) {
    match expr {
        Expr::Int(v, _) if *v < 0 => {
            // only reachable for i64::MIN-style literals built by hand
            let _ = write!(out, "(0 - {})", v.unsigned_abs());
        }
        Expr::Int(v, _) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var(name, _) => out.push_str(name),
        Expr::Index(name, index, _) => {
            out.push_str(name);
            out.push('[');
            expr_to(out, index);
            out.push(']');
        }
        Expr::Neg(inner, _) => {
            out.push_str("(-");
            expr_to(out, inner);
            out.push(')');
        }
        Expr::Bin(op, a, b, _) => {
            out.push('(');
            expr_to(out, a);
            let _ = write!(out, " {} ", op.symbol());
            expr_to(out, b);
            out.push(')');
        }
    }
}

pub fn expr_string(expr: &Expr) -> String {
    let mut s = String::new();
    expr_to(&mut s, expr);
    s
}
