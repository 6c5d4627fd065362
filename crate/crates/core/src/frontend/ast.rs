use std::fmt;

/// Source position. Two spans always compare equal so that `==` on AST
/// nodes is structural.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub offset: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(offset: usize, line: u32, col: u32) -> Self {
        Self { offset, line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Section {
    In,
    Inout,
    Out,
}

impl Section {
    pub const ALL: [Section; 3] = [Section::In, Section::Inout, Section::Out];

    pub fn name(self) -> &'static str {
        match self {
            Section::In => "in",
            Section::Inout => "inout",
            Section::Out => "out",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub routines: Vec<Routine>,
}

impl Program {
    pub fn routine(&self, name: &str) -> Option<&Routine> {
        self.routines.iter().find(|r| r.name == name && r.body.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routine {
    pub name: String,
    pub sig: Signature,
    pub effects: Effects,
    /// `None` for a prototype.
    pub body: Option<Block>,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub ins: Vec<Param>,
    pub inouts: Vec<Param>,
    pub outs: Vec<Param>,
}

impl Signature {
    pub fn section(&self, section: Section) -> &[Param] {
        match section {
            Section::In => &self.ins,
            Section::Inout => &self.inouts,
            Section::Out => &self.outs,
        }
    }

    pub fn section_mut(&mut self, section: Section) -> &mut Vec<Param> {
        match section {
            Section::In => &mut self.ins,
            Section::Inout => &mut self.inouts,
            Section::Out => &mut self.outs,
        }
    }

    /// All parameters in slot order (ins, inouts, outs) with their section.
    pub fn params(&self) -> impl Iterator<Item = (Section, &Param)> {
        Section::ALL.into_iter().flat_map(move |s| self.section(s).iter().map(move |p| (s, p)))
    }

    pub fn len(&self) -> usize {
        self.ins.len() + self.inouts.len() + self.outs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same arity, kinds and length expressions, ignoring parameter names
    /// other than those used inside length expressions.
    pub fn shape_eq(&self, other: &Signature) -> bool {
        Section::ALL.into_iter().all(|s| {
            let (a, b) = (self.section(s), other.section(s));
            a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.kind == q.kind)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamKind {
    Scalar,
    /// Length expression over earlier in-parameters.
    Array(Expr),
}

impl ParamKind {
    pub fn is_array(&self) -> bool {
        matches!(self, ParamKind::Array(_))
    }
}

/// Nonlocal effect tokens, sectioned like a signature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Effects {
    pub ins: Vec<String>,
    pub inouts: Vec<String>,
    pub outs: Vec<String>,
}

impl Effects {
    pub fn section(&self, section: Section) -> &[String] {
        match section {
            Section::In => &self.ins,
            Section::Inout => &self.inouts,
            Section::Out => &self.outs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ins.is_empty() && self.inouts.is_empty() && self.outs.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = (Section, &str)> {
        Section::ALL
            .into_iter()
            .flat_map(move |s| self.section(s).iter().map(move |t| (s, t.as_str())))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

impl Block {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Self { stmts }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Decl { name: String, init: Option<Expr>, span: Span },
    ArrayDecl { name: String, len: Expr, span: Span },
    Assign { target: LValue, op: AssignOp, value: Expr, span: Span },
    If { cond: Expr, then: Block, els: Option<Block>, span: Span },
    While { cond: Expr, body: Block, span: Span },
    Call(Call),
    Block(Block),
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Decl { span, .. }
            | Stmt::ArrayDecl { span, .. }
            | Stmt::Assign { span, .. }
            | Stmt::If { span, .. }
            | Stmt::While { span, .. } => *span,
            Stmt::Call(call) => call.span,
            Stmt::Block(block) => block.stmts.first().map(Stmt::span).unwrap_or_default(),
        }
    }

    /// True if a call appears anywhere inside this statement.
    pub fn contains_call(&self) -> bool {
        match self {
            Stmt::Call(_) => true,
            Stmt::If { then, els, .. } => {
                block_contains_call(then) || els.as_ref().is_some_and(block_contains_call)
            }
            Stmt::While { body, .. } => block_contains_call(body),
            Stmt::Block(b) => block_contains_call(b),
            _ => false,
        }
    }
}

pub fn block_contains_call(block: &Block) -> bool {
    block.stmts.iter().any(Stmt::contains_call)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LValue {
    pub name: String,
    pub index: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
        }
    }

    pub fn bin_op(self) -> Option<BinOp> {
        match self {
            AssignOp::Set => None,
            AssignOp::Add => Some(BinOp::Add),
            AssignOp::Sub => Some(BinOp::Sub),
            AssignOp::Mul => Some(BinOp::Mul),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub callee: String,
    pub ins: Vec<Expr>,
    pub inouts: Vec<Expr>,
    pub outs: Vec<Expr>,
    pub span: Span,
}

impl Call {
    pub fn section(&self, section: Section) -> &[Expr] {
        match section {
            Section::In => &self.ins,
            Section::Inout => &self.inouts,
            Section::Out => &self.outs,
        }
    }

    pub fn section_mut(&mut self, section: Section) -> &mut Vec<Expr> {
        match section {
            Section::In => &mut self.ins,
            Section::Inout => &mut self.inouts,
            Section::Out => &mut self.outs,
        }
    }

    pub fn args(&self) -> impl Iterator<Item = (Section, &Expr)> {
        Section::ALL.into_iter().flat_map(move |s| self.section(s).iter().map(move |e| (s, e)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }

    /// Wrapping 64-bit semantics; `None` on division or remainder by zero.
    #[inline]
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        Some(match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
            BinOp::Div => {
                if b == 0 {
                    return None;
                }
                a.wrapping_div(b)
            }
            BinOp::Rem => {
                if b == 0 {
                    return None;
                }
                a.wrapping_rem(b)
            }
            BinOp::Lt => (a < b) as i64,
            BinOp::Le => (a <= b) as i64,
            BinOp::Gt => (a > b) as i64,
            BinOp::Ge => (a >= b) as i64,
            BinOp::Eq => (a == b) as i64,
            BinOp::Ne => (a != b) as i64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64, Span),
    Var(String, Span),
    Index(String, Box<Expr>, Span),
    Neg(Box<Expr>, Span),
    Bin(BinOp, Box<Expr>, Box<Expr>, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Int(_, s) | Expr::Var(_, s) | Expr::Index(_, _, s) | Expr::Neg(_, s) => *s,
            Expr::Bin(_, _, _, s) => *s,
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string(), Span::default())
    }

    /// Name of the variable this expression is rooted at, for `x` and `x[i]`.
    pub fn base_name(&self) -> Option<&str> {
        match self {
            Expr::Var(name, _) | Expr::Index(name, _, _) => Some(name),
            _ => None,
        }
    }

    /// Calls `f` on every variable name read by this expression, including
    /// array bases.
    pub fn visit_names(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Int(..) => {}
            Expr::Var(name, _) => f(name),
            Expr::Index(name, index, _) => {
                f(name);
                index.visit_names(f);
            }
            Expr::Neg(inner, _) => inner.visit_names(f),
            Expr::Bin(_, a, b, _) => {
                a.visit_names(f);
                b.visit_names(f);
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.visit_names(&mut |n| found |= n == name);
        found
    }

    /// Replaces every `Var(name)` for which `f` returns an expression.
    pub fn substitute(&self, f: &impl Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Int(..) => self.clone(),
            Expr::Var(name, _) => f(name).unwrap_or_else(|| self.clone()),
            Expr::Index(name, index, span) => {
                Expr::Index(name.clone(), Box::new(index.substitute(f)), *span)
            }
            Expr::Neg(inner, span) => Expr::Neg(Box::new(inner.substitute(f)), *span),
            Expr::Bin(op, a, b, span) => {
                Expr::Bin(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f)), *span)
            }
        }
    }
}

/// Calls `f` on every identifier appearing in `stmts`: variables read or
/// written, declared names, and call arguments. Routine names are skipped.
pub fn visit_stmt_names(stmts: &[Stmt], f: &mut impl FnMut(&str)) {
    for stmt in stmts {
        match stmt {
            Stmt::Decl { name, init, .. } => {
                f(name);
                if let Some(e) = init {
                    e.visit_names(f);
                }
            }
            Stmt::ArrayDecl { name, len, .. } => {
                f(name);
                len.visit_names(f);
            }
            Stmt::Assign { target, value, .. } => {
                f(&target.name);
                if let Some(i) = &target.index {
                    i.visit_names(f);
                }
                value.visit_names(f);
            }
            Stmt::If { cond, then, els, .. } => {
                cond.visit_names(f);
                visit_stmt_names(&then.stmts, f);
                if let Some(b) = els {
                    visit_stmt_names(&b.stmts, f);
                }
            }
            Stmt::While { cond, body, .. } => {
                cond.visit_names(f);
                visit_stmt_names(&body.stmts, f);
            }
            Stmt::Call(call) => {
                for (_, arg) in call.args() {
                    arg.visit_names(f);
                }
            }
            Stmt::Block(b) => visit_stmt_names(&b.stmts, f),
        }
    }
}

pub fn stmts_mention(stmts: &[Stmt], name: &str) -> bool {
    let mut found = false;
    visit_stmt_names(stmts, &mut |n| found |= n == name);
    found
}
