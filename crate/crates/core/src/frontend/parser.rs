use super::ast::*;
use super::error::ParseError;
use super::token::{Token, TokenKind};

/// Parses a token sequence into a program.
pub fn parse(tokens: &[Token]) -> Result<Program, ParseError> {
    let mut parser = Parser { tokens, pos: 0 };
    let mut routines = Vec::new();
    while !parser.at_end() {
        routines.push(parser.routine()?);
    }
    Ok(Program { routines })
}

/// Parses a single expression, e.g. an entry-call argument.
pub fn parse_expr(tokens: &[Token]) -> Result<Expr, ParseError> {
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if !parser.at_end() {
        return Err(parser.unexpected(&["end of input"]));
    }
    Ok(expr)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, ahead: usize) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos + ahead).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        match self.tokens.get(self.pos) {
            Some(t) => t.span,
            None => self.tokens.last().map(|t| t.span).unwrap_or_default(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().map_or("end of input".to_string(), |k| k.to_string()),
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.unexpected(&[&kind.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                self.pos += 1;
                Ok(name.clone())
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn routine(&mut self) -> Result<Routine, ParseError> {
        let span = self.span();
        let name = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let mut sig = Signature::default();
        for (i, section) in Section::ALL.into_iter().enumerate() {
            *sig.section_mut(section) = self.params()?;
            if i < 2 {
                self.expect(TokenKind::Semi)?;
            }
        }
        self.expect(TokenKind::RParen)?;

        let mut effects = Effects::default();
        if self.eat(&TokenKind::LParen) {
            effects.ins = self.tokens_list()?;
            self.expect(TokenKind::Semi)?;
            effects.inouts = self.tokens_list()?;
            self.expect(TokenKind::Semi)?;
            effects.outs = self.tokens_list()?;
            self.expect(TokenKind::RParen)?;
        }

        let body = match self.peek() {
            Some(TokenKind::LBrace) => Some(self.block()?),
            Some(TokenKind::Semi) => {
                self.pos += 1;
                None
            }
            Some(TokenKind::Ident(_)) | None => None,
            _ => return Err(self.unexpected(&["`{`", "`;`", "routine"])),
        };
        Ok(Routine { name, sig, effects, body, span })
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        let mut params = Vec::new();
        if !matches!(self.peek(), Some(TokenKind::KwInt | TokenKind::KwChar)) {
            return Ok(params);
        }
        loop {
            let span = self.span();
            if !(self.eat(&TokenKind::KwInt) || self.eat(&TokenKind::KwChar)) {
                return Err(self.unexpected(&["`int`", "`char`"]));
            }
            let name = self.ident()?;
            let kind = if self.eat(&TokenKind::LBracket) {
                let len = self.expr()?;
                self.expect(TokenKind::RBracket)?;
                ParamKind::Array(len)
            } else {
                ParamKind::Scalar
            };
            params.push(Param { name, kind, span });
            if !self.eat(&TokenKind::Comma) {
                return Ok(params);
            }
        }
    }

    fn tokens_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut names = Vec::new();
        if !matches!(self.peek(), Some(TokenKind::Ident(_))) {
            return Ok(names);
        }
        loop {
            names.push(self.ident()?);
            if !self.eat(&TokenKind::Comma) {
                return Ok(names);
            }
        }
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        self.expect(TokenKind::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&TokenKind::RBrace) {
            if self.at_end() {
                return Err(self.unexpected(&["`}`"]));
            }
            stmts.push(self.stmt()?);
        }
        Ok(Block { stmts })
    }

    /// A statement used as an `if`/`while` body is always wrapped in a block.
    fn body(&mut self) -> Result<Block, ParseError> {
        match self.stmt()? {
            Stmt::Block(b) => Ok(b),
            other => Ok(Block { stmts: vec![other] }),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::KwInt | TokenKind::KwChar) => {
                self.pos += 1;
                let name = self.ident()?;
                let stmt = if self.eat(&TokenKind::LBracket) {
                    let len = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    Stmt::ArrayDecl { name, len, span }
                } else if self.eat(&TokenKind::Assign) {
                    Stmt::Decl { name, init: Some(self.expr()?), span }
                } else {
                    Stmt::Decl { name, init: None, span }
                };
                self.expect(TokenKind::Semi)?;
                Ok(stmt)
            }
            Some(TokenKind::KwIf) => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let then = self.body()?;
                let els = if self.eat(&TokenKind::KwElse) { Some(self.body()?) } else { None };
                Ok(Stmt::If { cond, then, els, span })
            }
            Some(TokenKind::KwWhile) => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let body = self.body()?;
                Ok(Stmt::While { cond, body, span })
            }
            Some(TokenKind::LBrace) => Ok(Stmt::Block(self.block()?)),
            Some(TokenKind::Semi) => {
                self.pos += 1;
                Ok(Stmt::Block(Block::default()))
            }
            Some(TokenKind::Ident(_)) if self.peek_at(1) == Some(&TokenKind::LParen) => {
                let call = self.call()?;
                self.eat(&TokenKind::Semi);
                Ok(Stmt::Call(call))
            }
            Some(TokenKind::Ident(_)) => {
                let name = self.ident()?;
                let index = if self.eat(&TokenKind::LBracket) {
                    let index = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    Some(index)
                } else {
                    None
                };
                let op = match self.peek() {
                    Some(TokenKind::Assign) => AssignOp::Set,
                    Some(TokenKind::PlusAssign) => AssignOp::Add,
                    Some(TokenKind::MinusAssign) => AssignOp::Sub,
                    Some(TokenKind::StarAssign) => AssignOp::Mul,
                    _ => return Err(self.unexpected(&["`=`", "`+=`", "`-=`", "`*=`", "`(`"])),
                };
                self.pos += 1;
                let value = self.expr()?;
                self.expect(TokenKind::Semi)?;
                Ok(Stmt::Assign { target: LValue { name, index, span }, op, value, span })
            }
            _ => Err(self.unexpected(&["statement"])),
        }
    }

    fn call(&mut self) -> Result<Call, ParseError> {
        let span = self.span();
        let callee = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let ins = self.args()?;
        self.expect(TokenKind::Semi)?;
        let inouts = self.args()?;
        self.expect(TokenKind::Semi)?;
        let outs = self.args()?;
        self.expect(TokenKind::RParen)?;
        Ok(Call { callee, ins, inouts, outs, span })
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if matches!(self.peek(), Some(TokenKind::Semi | TokenKind::RParen)) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if !self.eat(&TokenKind::Comma) {
                return Ok(args);
            }
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.relational()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::EqEq) => BinOp::Eq,
                Some(TokenKind::Ne) => BinOp::Ne,
                _ => return Ok(lhs),
            };
            let span = self.span();
            self.pos += 1;
            let rhs = self.relational()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), span);
        }
    }

    fn relational(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Lt) => BinOp::Lt,
                Some(TokenKind::Le) => BinOp::Le,
                Some(TokenKind::Gt) => BinOp::Gt,
                Some(TokenKind::Ge) => BinOp::Ge,
                _ => return Ok(lhs),
            };
            let span = self.span();
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), span);
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.span();
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), span);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                Some(TokenKind::Percent) => BinOp::Rem,
                _ => return Ok(lhs),
            };
            let span = self.span();
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), span);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        if self.eat(&TokenKind::Minus) {
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner), span));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::Int(v)) => {
                self.pos += 1;
                Ok(Expr::Int(*v, span))
            }
            Some(TokenKind::Ident(name)) => {
                self.pos += 1;
                let name = name.clone();
                if self.eat(&TokenKind::LBracket) {
                    let index = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    Ok(Expr::Index(name, Box::new(index), span))
                } else {
                    Ok(Expr::Var(name, span))
                }
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }
}
