//! Arithmetic expressions over the coordinates x, y, z.
//!
//! Five binary operators (`+ - * / ^`), unary minus, and the functions
//! `sin cos exp ln sqrt abs`. All arithmetic is `f64`.

mod ast;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{BinOp, Expr, Func, Var};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("lex error at byte {position}: {message}")]
    Lex { position: usize, message: String },
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("evaluation error in '{node}': {message}")]
    Eval { node: String, message: String },
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(&tokenize(s)?)
    }
}
