//! Front end for the MJ mini-language: lexer, parser, type checker and
//! canonical formatter.
//!
//! MJ is a small Java-like language: classes with typed fields and methods,
//! static dispatch, `if`/`else`, `for`, `while`, `break`, `return`, plus a
//! fixed builtin library (`List`, `Buffer`, `Math`, `print`, `readInput`).
//! The grammar is documented in `docs/mj-grammar`. `float` is IEEE 754
//! binary64, `int` is wrapping 32-bit.

pub mod ast;
pub mod format;
mod lexer;
pub mod library;
mod parser;
pub mod typeck;
pub mod types;

pub use ast::{Pos, Program};
pub use format::format_program;
pub use parser::parse_program;
pub use typeck::{type_check, TypeError, TypedProgram};
pub use types::{ClassId, SemType};

/// Parse failure: either the source contained no classes at all, or a
/// syntax error with its position and what was expected.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    Empty,
    Syntax { pos: Pos, message: String },
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseError::Empty => write!(f, "source contains no classes"),
            ParseError::Syntax { pos, message } => write!(f, "{pos}: {message}"),
        }
    }
}

impl std::error::Error for ParseError {}

/// Parse and type-check in one step.
pub fn frontend(source: &str) -> Result<TypedProgram, FrontendError> {
    let program = parse_program(source).map_err(FrontendError::Parse)?;
    type_check(program).map_err(FrontendError::Type)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrontendError {
    Parse(ParseError),
    Type(TypeError),
}

impl std::fmt::Display for FrontendError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrontendError::Parse(e) => write!(f, "{e}"),
            FrontendError::Type(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for FrontendError {}
