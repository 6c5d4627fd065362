use std::fmt;

use super::ast::Span;
use super::error::LexError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    KwInt,
    KwChar,
    KwIf,
    KwElse,
    KwWhile,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(name) => return write!(f, "identifier `{name}`"),
            TokenKind::Int(v) => return write!(f, "integer {v}"),
            TokenKind::KwInt => "`int`",
            TokenKind::KwChar => "`char`",
            TokenKind::KwIf => "`if`",
            TokenKind::KwElse => "`else`",
            TokenKind::KwWhile => "`while`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Semi => "`;`",
            TokenKind::Comma => "`,`",
            TokenKind::Assign => "`=`",
            TokenKind::PlusAssign => "`+=`",
            TokenKind::MinusAssign => "`-=`",
            TokenKind::StarAssign => "`*=`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Slash => "`/`",
            TokenKind::Percent => "`%`",
            TokenKind::Lt => "`<`",
            TokenKind::Le => "`<=`",
            TokenKind::Gt => "`>`",
            TokenKind::Ge => "`>=`",
            TokenKind::EqEq => "`==`",
            TokenKind::Ne => "`!=`",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Splits TSIA source into tokens. Character literals such as `'a'` are
/// returned as [`TokenKind::Int`].
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self { src: text.as_bytes(), text, pos: 0, line: 1, col: 1 }
    }

    fn span(&self) -> Span {
        Span::new(self.pos, self.line, self.col)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            // count chars, not UTF-8 continuation bytes
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, at: Span, message: impl Into<String>) -> LexError {
        LexError { span: at, message: message.into() }
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'/'), Some(b'/')) => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let start = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.error(start, "unterminated comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut tokens = Vec::new();
        loop {
            self.skip_trivia()?;
            let span = self.span();
            let Some(c) = self.peek() else { break };
            let kind = if c.is_ascii_alphabetic() || c == b'_' {
                self.ident()
            } else if c.is_ascii_digit() {
                self.number(span)?
            } else if c == b'\'' {
                self.char_literal(span)?
            } else {
                self.punct(span)?
            };
            tokens.push(Token { kind, span });
        }
        Ok(tokens)
    }

    fn ident(&mut self) -> TokenKind {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        match &self.text[start..self.pos] {
            "int" => TokenKind::KwInt,
            "char" => TokenKind::KwChar,
            "if" => TokenKind::KwIf,
            "else" => TokenKind::KwElse,
            "while" => TokenKind::KwWhile,
            word => TokenKind::Ident(word.to_string()),
        }
    }

    fn number(&mut self, span: Span) -> Result<TokenKind, LexError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == b'_') {
            return Err(self.error(span, "malformed number"));
        }
        self.text[start..self.pos]
            .parse::<i64>()
            .map(TokenKind::Int)
            .map_err(|_| self.error(span, "integer literal out of range"))
    }

    fn char_literal(&mut self, span: Span) -> Result<TokenKind, LexError> {
        self.bump();
        let value = match self.bump() {
            Some(b'\\') => match self.bump() {
                Some(b'n') => b'\n',
                Some(b't') => b'\t',
                Some(b'r') => b'\r',
                Some(b'0') => 0,
                Some(b'\\') => b'\\',
                Some(b'\'') => b'\'',
                _ => return Err(self.error(span, "unknown escape in character literal")),
            },
            Some(b'\'') | Some(b'\n') | None => {
                return Err(self.error(span, "empty or unterminated character literal"))
            }
            Some(c) if c.is_ascii() => c,
            Some(_) => return Err(self.error(span, "non-ASCII character literal")),
        };
        if self.bump() != Some(b'\'') {
            return Err(self.error(span, "unterminated character literal"));
        }
        Ok(TokenKind::Int(i64::from(value)))
    }

    fn punct(&mut self, span: Span) -> Result<TokenKind, LexError> {
        let c = self.bump().expect("caller checked for input");
        let next = self.peek();
        let two = |lexer: &mut Self, kind| {
            lexer.bump();
            Ok(kind)
        };
        match (c, next) {
            (b'+', Some(b'=')) => two(self, TokenKind::PlusAssign),
            (b'-', Some(b'=')) => two(self, TokenKind::MinusAssign),
            (b'*', Some(b'=')) => two(self, TokenKind::StarAssign),
            (b'<', Some(b'=')) => two(self, TokenKind::Le),
            (b'>', Some(b'=')) => two(self, TokenKind::Ge),
            (b'=', Some(b'=')) => two(self, TokenKind::EqEq),
            (b'!', Some(b'=')) => two(self, TokenKind::Ne),
            (b'(', _) => Ok(TokenKind::LParen),
            (b')', _) => Ok(TokenKind::RParen),
            (b'{', _) => Ok(TokenKind::LBrace),
            (b'}', _) => Ok(TokenKind::RBrace),
            (b'[', _) => Ok(TokenKind::LBracket),
            (b']', _) => Ok(TokenKind::RBracket),
            (b';', _) => Ok(TokenKind::Semi),
            (b',', _) => Ok(TokenKind::Comma),
            (b'=', _) => Ok(TokenKind::Assign),
            (b'+', _) => Ok(TokenKind::Plus),
            (b'-', _) => Ok(TokenKind::Minus),
            (b'*', _) => Ok(TokenKind::Star),
            (b'/', _) => Ok(TokenKind::Slash),
            (b'%', _) => Ok(TokenKind::Percent),
            (b'<', _) => Ok(TokenKind::Lt),
            (b'>', _) => Ok(TokenKind::Gt),
            _ => {
                let shown = self.text[span.offset..].chars().next().unwrap_or('?');
                Err(self.error(span, format!("illegal character {shown:?}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn assignment_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds("y=2*x;"),
            vec![Ident("y".into()), Assign, Int(2), Star, Ident("x".into()), Semi]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  // nothing\n /* here */ ").unwrap().is_empty());
    }

    #[test]
    fn routine_a_has_seventeen_tokens() {
        let toks = tokenize("a(int x;; int y) { y=2*x; }").unwrap();
        assert_eq!(toks.len(), 17);
        assert_eq!(toks.last().unwrap().kind, TokenKind::RBrace);
    }

    #[test]
    fn char_literals_are_ints() {
        assert_eq!(kinds("'a' '\\n'"), vec![TokenKind::Int(97), TokenKind::Int(10)]);
    }

    #[test]
    fn positions() {
        let toks = tokenize("f\n  (x)").unwrap();
        assert_eq!((toks[1].span.line, toks[1].span.col), (2, 3));
        assert!(toks.windows(2).all(|w| w[0].span.offset < w[1].span.offset));
    }

    #[test]
    fn errors() {
        let err = tokenize("a = 1 # 2").unwrap_err();
        assert_eq!(err.span.col, 7);
        let err = tokenize("x /* never closed").unwrap_err();
        assert!(err.message.contains("unterminated"));
        assert!(tokenize("'ab'").is_err());
    }
}
