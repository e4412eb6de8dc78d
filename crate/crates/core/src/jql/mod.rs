//! The JQL subset: AST, parser, canonical printer, evaluator and linter.

mod ast;
mod eval;
mod field;
mod lexer;
mod lint;
mod parser;
mod printer;
mod time;

use thiserror::Error;

pub use ast::*;
pub use eval::{evaluate, validate, EvalError};
pub use field::{Domain, Field};
pub use lint::{lint, LintCode, LintContext, LintFinding, StatusLanguage};
pub use parser::parse_jql;
pub use printer::print_jql;
pub use time::{Clock, DateOperand};

pub(crate) use eval::sort_items;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown field `{name}` at byte {offset}")]
    UnknownField { offset: usize, name: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownField { offset, .. }
            | ParseError::UnknownFunction { offset, .. } => *offset,
        }
    }
}
