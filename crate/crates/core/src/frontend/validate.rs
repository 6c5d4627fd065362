use std::collections::HashMap;

use super::ast::*;
use super::error::ValidateError;
use super::parser::parse;
use super::token::tokenize;

/// Source of the implicit prelude. Builtins have no body; the machine
/// implements them.
pub const PRELUDE: &str = "putc(int c;;)(;stdout;)\nputi(int v;;)(;stdout;)\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutineInfo {
    pub name: String,
    pub sig: Signature,
    pub effects: Effects,
    pub builtin: bool,
}

/// A program that passed validation. Implicit declarations have been made
/// explicit, so the routines are ready for lowering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckedProgram {
    pub program: Program,
    /// Prelude builtins first, then user routines in definition order.
    pub table: Vec<RoutineInfo>,
}

impl CheckedProgram {
    pub fn info(&self, name: &str) -> Option<&RoutineInfo> {
        self.table.iter().find(|r| r.name == name)
    }

    /// User routines that have a body, in source order.
    pub fn definitions(&self) -> impl Iterator<Item = &Routine> {
        self.program.routines.iter().filter(|r| r.body.is_some())
    }
}

pub fn prelude() -> Vec<RoutineInfo> {
    let program = parse(&tokenize(PRELUDE).expect("prelude lexes")).expect("prelude parses");
    program
        .routines
        .into_iter()
        .map(|r| RoutineInfo { name: r.name, sig: r.sig, effects: r.effects, builtin: true })
        .collect()
}

/// Checks name resolution, arities, kinds, array lengths, aliasing and
/// effect propagation. Pure: the input is not modified.
pub fn validate(program: &Program) -> Result<CheckedProgram, ValidateError> {
    let mut table = prelude();
    let builtin_count = table.len();

    for r in &program.routines {
        if r.name.starts_with('_') {
            return Err(ValidateError::ReservedName { name: r.name.clone(), span: r.span });
        }
        check_signature(r)?;
    }

    // definitions first, so prototypes can be matched against them
    for r in program.routines.iter().filter(|r| r.body.is_some()) {
        if table.iter().any(|t| t.name == r.name) {
            return Err(ValidateError::DuplicateName { name: r.name.clone(), span: r.span });
        }
        table.push(RoutineInfo {
            name: r.name.clone(),
            sig: r.sig.clone(),
            effects: r.effects.clone(),
            builtin: false,
        });
    }
    for r in program.routines.iter().filter(|r| r.body.is_none()) {
        match table.iter().find(|t| t.name == r.name) {
            Some(t) if t.sig.shape_eq(&r.sig) && t.effects == r.effects => {}
            Some(_) => {
                return Err(ValidateError::DuplicateName { name: r.name.clone(), span: r.span })
            }
            None => return Err(ValidateError::MissingBody { name: r.name.clone(), span: r.span }),
        }
    }
    debug_assert!(table[..builtin_count].iter().all(|t| t.builtin));

    let index: HashMap<&str, usize> =
        table.iter().enumerate().map(|(i, t)| (t.name.as_str(), i)).collect();
    let mut routines = Vec::with_capacity(program.routines.len());
    for r in &program.routines {
        let mut out = r.clone();
        if let Some(body) = &r.body {
            let mut checker = BodyChecker { routine: r, table: &table, index: &index, scopes: Vec::new() };
            checker.push_params();
            out.body = Some(checker.block(body)?);
        }
        routines.push(out);
    }
    Ok(CheckedProgram { program: Program { routines }, table })
}

fn check_signature(r: &Routine) -> Result<(), ValidateError> {
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for (_, p) in r.sig.params() {
        if seen.insert(&p.name, ()).is_some() {
            return Err(ValidateError::DuplicateName { name: p.name.clone(), span: p.span });
        }
    }
    for (section, p) in r.sig.params() {
        let ParamKind::Array(len) = &p.kind else { continue };
        // ins may only use earlier ins; other sections may use any scalar in
        let allowed: Vec<&str> = match section {
            Section::In => r
                .sig
                .ins
                .iter()
                .take_while(|q| q.name != p.name)
                .filter(|q| !q.kind.is_array())
                .map(|q| q.name.as_str())
                .collect(),
            _ => r.sig.ins.iter().filter(|q| !q.kind.is_array()).map(|q| q.name.as_str()).collect(),
        };
        let mut ok = true;
        check_len_expr(len, &allowed, &mut ok);
        if !ok {
            return Err(ValidateError::BadArrayLength { param: p.name.clone(), span: p.span });
        }
    }
    let mut tokens: HashMap<&str, ()> = HashMap::new();
    for (_, t) in r.effects.tokens() {
        if tokens.insert(t, ()).is_some() {
            return Err(ValidateError::DuplicateName { name: t.to_string(), span: r.span });
        }
    }
    Ok(())
}

fn check_len_expr(e: &Expr, allowed: &[&str], ok: &mut bool) {
    match e {
        Expr::Int(..) => {}
        Expr::Var(name, _) => *ok &= allowed.contains(&name.as_str()),
        Expr::Index(..) => *ok = false,
        Expr::Neg(inner, _) => check_len_expr(inner, allowed, ok),
        Expr::Bin(_, a, b, _) => {
            check_len_expr(a, allowed, ok);
            check_len_expr(b, allowed, ok);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Scalar { writable: bool },
    Array { writable: bool },
}

struct BodyChecker<'a> {
    routine: &'a Routine,
    table: &'a [RoutineInfo],
    index: &'a HashMap<&'a str, usize>,
    scopes: Vec<Vec<(String, VarKind)>>,
}

impl<'a> BodyChecker<'a> {
    fn push_params(&mut self) {
        let mut scope = Vec::new();
        for (section, p) in self.routine.sig.params() {
            let writable = section != Section::In;
            let kind = match p.kind {
                ParamKind::Scalar => VarKind::Scalar { writable },
                ParamKind::Array(_) => VarKind::Array { writable },
            };
            scope.push((p.name.clone(), kind));
        }
        self.scopes.push(scope);
    }

    fn lookup(&self, name: &str) -> Option<VarKind> {
        self.scopes.iter().rev().flat_map(|s| s.iter().rev()).find(|(n, _)| n == name).map(|(_, k)| *k)
    }

    fn declare(&mut self, name: &str, kind: VarKind, span: Span) -> Result<(), ValidateError> {
        if self.lookup(name).is_some() {
            return Err(ValidateError::DuplicateName { name: name.to_string(), span });
        }
        self.scopes.last_mut().expect("scope").push((name.to_string(), kind));
        Ok(())
    }

    fn block(&mut self, block: &Block) -> Result<Block, ValidateError> {
        self.scopes.push(Vec::new());
        let mut stmts = Vec::with_capacity(block.stmts.len());
        for stmt in &block.stmts {
            self.stmt(stmt, &mut stmts)?;
        }
        self.scopes.pop();
        Ok(Block { stmts })
    }

    fn stmt(&mut self, stmt: &Stmt, out: &mut Vec<Stmt>) -> Result<(), ValidateError> {
        match stmt {
            Stmt::Decl { name, init, span } => {
                if let Some(e) = init {
                    self.value(e)?;
                }
                self.declare(name, VarKind::Scalar { writable: true }, *span)?;
            }
            Stmt::ArrayDecl { name, len, span } => {
                self.value(len)?;
                self.declare(name, VarKind::Array { writable: true }, *span)?;
            }
            Stmt::Assign { target, value, .. } => {
                self.value(value)?;
                let kind = self.var(&target.name, target.span)?;
                match (&target.index, kind) {
                    (None, VarKind::Scalar { writable: true }) => {}
                    (Some(i), VarKind::Array { writable: true }) => self.value(i)?,
                    (None, VarKind::Array { .. }) => {
                        return Err(ValidateError::ArrayAsValue {
                            name: target.name.clone(),
                            span: target.span,
                        })
                    }
                    (Some(_), VarKind::Scalar { .. }) => {
                        return Err(ValidateError::NotAnArray {
                            name: target.name.clone(),
                            span: target.span,
                        })
                    }
                    _ => {
                        return Err(ValidateError::ReadOnly {
                            name: target.name.clone(),
                            span: target.span,
                        })
                    }
                }
            }
            Stmt::If { cond, then, els, span } => {
                self.value(cond)?;
                let then = self.block(then)?;
                let els = match els {
                    Some(b) => Some(self.block(b)?),
                    None => None,
                };
                out.push(Stmt::If { cond: cond.clone(), then, els, span: *span });
                return Ok(());
            }
            Stmt::While { cond, body, span } => {
                self.value(cond)?;
                let body = self.block(body)?;
                out.push(Stmt::While { cond: cond.clone(), body, span: *span });
                return Ok(());
            }
            Stmt::Block(b) => {
                out.push(Stmt::Block(self.block(b)?));
                return Ok(());
            }
            Stmt::Call(call) => {
                let call = self.call(call, out)?;
                out.push(Stmt::Call(call));
                return Ok(());
            }
        }
        out.push(stmt.clone());
        Ok(())
    }

    fn var(&self, name: &str, span: Span) -> Result<VarKind, ValidateError> {
        self.lookup(name)
            .ok_or_else(|| ValidateError::UndeclaredVariable { name: name.to_string(), span })
    }

    /// Checks a scalar-valued expression.
    fn value(&self, e: &Expr) -> Result<(), ValidateError> {
        match e {
            Expr::Int(..) => Ok(()),
            Expr::Var(name, span) => match self.var(name, *span)? {
                VarKind::Scalar { .. } => Ok(()),
                VarKind::Array { .. } => {
                    Err(ValidateError::ArrayAsValue { name: name.clone(), span: *span })
                }
            },
            Expr::Index(name, index, span) => match self.var(name, *span)? {
                VarKind::Array { .. } => self.value(index),
                VarKind::Scalar { .. } => {
                    Err(ValidateError::NotAnArray { name: name.clone(), span: *span })
                }
            },
            Expr::Neg(inner, _) => self.value(inner),
            Expr::Bin(_, a, b, _) => {
                self.value(a)?;
                self.value(b)
            }
        }
    }

    fn call(&mut self, call: &Call, out: &mut Vec<Stmt>) -> Result<Call, ValidateError> {
        let Some(&idx) = self.index.get(call.callee.as_str()) else {
            return Err(ValidateError::UndefinedRoutine { name: call.callee.clone(), span: call.span });
        };
        let info = &self.table[idx];
        for section in Section::ALL {
            let (expected, found) = (info.sig.section(section).len(), call.section(section).len());
            if expected != found {
                return Err(ValidateError::ArityMismatch {
                    callee: call.callee.clone(),
                    section,
                    expected,
                    found,
                    span: call.span,
                });
            }
        }

        let mismatch = |param: &Param, detail: &str, span: Span| ValidateError::KindMismatch {
            callee: call.callee.clone(),
            param: param.name.clone(),
            detail: detail.to_string(),
            span,
        };

        for (param, arg) in info.sig.ins.iter().zip(&call.ins) {
            match &param.kind {
                ParamKind::Scalar => self.value(arg)?,
                ParamKind::Array(_) => self.array_arg(arg, false).map_err(|e| match e {
                    Some(err) => err,
                    None => mismatch(param, "expected an array or array slice", arg.span()),
                })?,
            }
        }

        let mut call = call.clone();
        for section in [Section::Inout, Section::Out] {
            for (i, param) in info.sig.section(section).iter().enumerate() {
                let arg = call.section(section)[i].clone();
                let span = arg.span();
                match &param.kind {
                    ParamKind::Scalar => {
                        if section == Section::Out {
                            if let Expr::Var(name, span) = &arg {
                                if self.lookup(name).is_none() {
                                    self.declare(name, VarKind::Scalar { writable: true }, *span)?;
                                    out.push(Stmt::Decl { name: name.clone(), init: None, span: *span });
                                    continue;
                                }
                            }
                        }
                        match &arg {
                            Expr::Var(name, span) => match self.var(name, *span)? {
                                VarKind::Scalar { writable: true } => {}
                                VarKind::Scalar { writable: false } => {
                                    return Err(ValidateError::ReadOnly { name: name.clone(), span: *span })
                                }
                                VarKind::Array { .. } => {
                                    return Err(mismatch(param, "expected a scalar item", *span))
                                }
                            },
                            Expr::Index(name, index, span) => match self.var(name, *span)? {
                                VarKind::Array { writable: true } => self.value(index)?,
                                VarKind::Array { writable: false } => {
                                    return Err(ValidateError::ReadOnly { name: name.clone(), span: *span })
                                }
                                VarKind::Scalar { .. } => {
                                    return Err(ValidateError::NotAnArray { name: name.clone(), span: *span })
                                }
                            },
                            _ => return Err(mismatch(param, "expected a variable or array cell", span)),
                        }
                    }
                    ParamKind::Array(len) => {
                        if section == Section::Out {
                            let implicit = match &arg {
                                Expr::Var(name, span) if self.lookup(name).is_none() => {
                                    let len = substitute_ins(len, &info.sig, &call.ins);
                                    Some((name.clone(), len, *span))
                                }
                                Expr::Index(name, len, span) if self.lookup(name).is_none() => {
                                    Some((name.clone(), (**len).clone(), *span))
                                }
                                _ => None,
                            };
                            if let Some((name, len, span)) = implicit {
                                self.value(&len)?;
                                self.declare(&name, VarKind::Array { writable: true }, span)?;
                                out.push(Stmt::ArrayDecl { name: name.clone(), len, span });
                                call.section_mut(section)[i] = Expr::Var(name, span);
                                continue;
                            }
                        }
                        self.array_arg(&arg, true).map_err(|e| match e {
                            Some(err) => err,
                            None => mismatch(param, "expected an array or array slice", span),
                        })?;
                    }
                }
            }
        }

        // written bases must be distinct, and must not also be read as arrays
        let mut written: Vec<&str> = Vec::new();
        for arg in call.inouts.iter().chain(&call.outs) {
            let name = arg.base_name().expect("checked above");
            if written.contains(&name) {
                return Err(ValidateError::AliasedArgument { name: name.to_string(), span: arg.span() });
            }
            written.push(name);
        }
        for (param, arg) in info.sig.ins.iter().zip(&call.ins) {
            if param.kind.is_array() {
                let name = arg.base_name().expect("checked above");
                if written.contains(&name) {
                    return Err(ValidateError::AliasedArgument { name: name.to_string(), span: arg.span() });
                }
            }
        }

        let mine = &self.routine.effects;
        for (section, token) in info.effects.tokens() {
            let has = |s: Section| mine.section(s).iter().any(|t| t == token);
            let covered = match section {
                Section::In => has(Section::In) || has(Section::Inout),
                Section::Inout => has(Section::Inout),
                Section::Out => has(Section::Out) || has(Section::Inout),
            };
            if !covered {
                return Err(ValidateError::EffectNotPropagated {
                    routine: self.routine.name.clone(),
                    token: token.to_string(),
                    span: call.span,
                });
            }
        }
        Ok(call)
    }

    /// Checks `a` or `a[k]` naming an array. `Err(None)` means the argument
    /// has the wrong shape.
    fn array_arg(&self, arg: &Expr, write: bool) -> Result<(), Option<ValidateError>> {
        let (name, offset, span) = match arg {
            Expr::Var(name, span) => (name, None, *span),
            Expr::Index(name, k, span) => (name, Some(k), *span),
            _ => return Err(None),
        };
        match self.var(name, span).map_err(Some)? {
            VarKind::Array { writable } => {
                if write && !writable {
                    return Err(Some(ValidateError::ReadOnly { name: name.clone(), span }));
                }
            }
            VarKind::Scalar { .. } => return Err(None),
        }
        if let Some(k) = offset {
            self.value(k).map_err(Some)?;
        }
        Ok(())
    }
}

/// Rewrites a callee's length expression in terms of the caller's in
/// arguments.
pub fn substitute_ins(len: &Expr, sig: &Signature, ins: &[Expr]) -> Expr {
    len.substitute(&|name| {
        sig.ins.iter().position(|p| p.name == name).map(|i| ins[i].clone())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(src: &str) -> Result<CheckedProgram, ValidateError> {
        validate(&parse(&tokenize(src).unwrap()).unwrap())
    }

    const FIG2A: &str = "
        a(int x;; int y) { y=2*x; }
        b(;int x;) { x=x+3; }
        c(int x;; int y) { if (x>0) a(x;;y); else y=-1; }
        d(;;int v) { int w=4; b(;w;) c(w;;v); }
    ";

    #[test]
    fn fig2a_ok() {
        let checked = check(FIG2A).unwrap();
        assert_eq!(checked.definitions().count(), 4);
    }

    #[test]
    fn effect_must_propagate() {
        let err = check("putab(;;) { putc('a';;); putc('b';;); }").unwrap_err();
        assert!(matches!(err, ValidateError::EffectNotPropagated { ref routine, ref token, .. }
            if routine == "putab" && token == "stdout"));
        check("putab(;;)(;stdout;) { putc('a';;); putc('b';;); }").unwrap();
    }

    #[test]
    fn arity() {
        let err = check("a(int x;; int y) { y=2*x; } m(;;) { a(1;;); }").unwrap_err();
        assert!(matches!(err, ValidateError::ArityMismatch { section: Section::Out, expected: 1, found: 0, .. }));
    }

    #[test]
    fn implicit_out_declarations() {
        let src = "
            tadd(int x, int y;; int z) { z=x+y; }
            vseq(int n, int m;; int a[n]) { if (n>0) { a[0]=m; vseq(n-1,m+1;;a[1]); } }
            f(int n;; int z) { tadd(n, 1;; w); vseq(n+1, 0;; v); tadd(w, v[0];; z); }
        ";
        let checked = check(src).unwrap();
        let f = checked.program.routine("f").unwrap();
        let stmts = &f.body.as_ref().unwrap().stmts;
        assert!(matches!(&stmts[0], Stmt::Decl { name, init: None, .. } if name == "w"));
        let Stmt::ArrayDecl { name, len, .. } = &stmts[2] else { panic!("{:?}", stmts[2]) };
        assert_eq!(name, "v");
        assert!(matches!(len, Expr::Bin(BinOp::Add, ..)));
        // validating the output again is a no-op
        assert_eq!(validate(&checked.program).unwrap(), checked);
    }

    #[test]
    fn errors() {
        assert!(matches!(check("f(;;) { g(;;); }"), Err(ValidateError::UndefinedRoutine { .. })));
        assert!(matches!(check("f(;;) { x = 1; }"), Err(ValidateError::UndeclaredVariable { .. })));
        assert!(matches!(check("f(;;) {} f(;;) {}"), Err(ValidateError::DuplicateName { .. })));
        assert!(matches!(check("f(int x;;) { x = 1; }"), Err(ValidateError::ReadOnly { .. })));
        assert!(matches!(check("f(int a[m], int m;;) { }"), Err(ValidateError::BadArrayLength { .. })));
        assert!(matches!(check("_f(;;) { }"), Err(ValidateError::ReservedName { .. })));
        assert!(matches!(
            check("g(;int x, int y;) { } f(;int x;) { g(;x,x;); }"),
            Err(ValidateError::AliasedArgument { .. })
        ));
        assert!(matches!(check("f(;;) { int x; int x; }"), Err(ValidateError::DuplicateName { .. })));
        assert!(matches!(check("p(;;);"), Err(ValidateError::MissingBody { .. })));
    }

    #[test]
    fn prototypes_match_definitions() {
        check("putc(char c;;)(;stdout;) m(;;)(;stdout;) { putc('c';;); }").unwrap();
        assert!(check("putc(char c, char d;;)(;stdout;)").is_err());
    }
}
