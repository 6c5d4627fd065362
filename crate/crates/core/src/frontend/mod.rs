//! Lexing, parsing and static checking of TSIA source.

pub mod ast;
pub mod error;
pub mod parser;
pub mod pretty;
pub mod token;
pub mod validate;

pub use ast::{Program, Section, Span};
pub use error::{FrontendError, LexError, ParseError, ValidateError};
pub use validate::{validate, CheckedProgram, RoutineInfo};

/// Tokenizes, parses and validates `source`.
pub fn check_source(source: &str) -> Result<CheckedProgram, FrontendError> {
    let tokens = token::tokenize(source)?;
    let program = parser::parse(&tokens)?;
    Ok(validate(&program)?)
}
