use thiserror::Error;

use super::ast::{Section, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidateError {
    #[error("{span}: `{name}` is defined more than once")]
    DuplicateName { name: String, span: Span },
    #[error("{span}: call to undefined routine `{name}`")]
    UndefinedRoutine { name: String, span: Span },
    #[error("{span}: `{callee}` takes {expected} {} argument(s), got {found}", section.name())]
    ArityMismatch { callee: String, section: Section, expected: usize, found: usize, span: Span },
    #[error("{span}: argument for `{param}` of `{callee}` has the wrong kind: {detail}")]
    KindMismatch { callee: String, param: String, detail: String, span: Span },
    #[error("{span}: `{name}` is not declared")]
    UndeclaredVariable { name: String, span: Span },
    #[error("{span}: `{routine}` uses effect `{token}` without declaring it")]
    EffectNotPropagated { routine: String, token: String, span: Span },
    #[error("{span}: length of array `{param}` may only use earlier scalar ins")]
    BadArrayLength { param: String, span: Span },
    #[error("{span}: `{name}` is read-only here")]
    ReadOnly { name: String, span: Span },
    #[error("{span}: `{name}` is passed more than once where it may be written")]
    AliasedArgument { name: String, span: Span },
    #[error("{span}: names starting with `_` are reserved (`{name}`)")]
    ReservedName { name: String, span: Span },
    #[error("{span}: `{name}` is an array and cannot be used as a value")]
    ArrayAsValue { name: String, span: Span },
    #[error("{span}: `{name}` is not an array")]
    NotAnArray { name: String, span: Span },
    #[error("{span}: routine `{name}` is declared but never defined")]
    MissingBody { name: String, span: Span },
}

impl ValidateError {
    pub fn span(&self) -> Span {
        match self {
            ValidateError::DuplicateName { span, .. }
            | ValidateError::UndefinedRoutine { span, .. }
            | ValidateError::ArityMismatch { span, .. }
            | ValidateError::KindMismatch { span, .. }
            | ValidateError::UndeclaredVariable { span, .. }
            | ValidateError::EffectNotPropagated { span, .. }
            | ValidateError::BadArrayLength { span, .. }
            | ValidateError::ReadOnly { span, .. }
            | ValidateError::AliasedArgument { span, .. }
            | ValidateError::ReservedName { span, .. }
            | ValidateError::ArrayAsValue { span, .. }
            | ValidateError::NotAnArray { span, .. }
            | ValidateError::MissingBody { span, .. } => *span,
        }
    }
}

/// Any error produced before lowering.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Validate(#[from] ValidateError),
}
