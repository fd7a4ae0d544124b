//! The `#`-statement input language: lexer, parser and printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod unparse;

pub use ast::*;
pub use parser::{parse, parse_formula};
pub use unparse::{unparse, unparse_formula, unparse_term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{}:{}: expected {}, found {found}", span.line, span.col, expected_list(.expected))]
    Syntax {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
    #[error("{}:{}: duplicate control rule name \"{name}\"", span.line, span.col)]
    DuplicateRuleName { span: Span, name: String },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. } | ParseError::DuplicateRuleName { span, .. } => *span,
        }
    }
}

fn expected_list(v: &[String]) -> String {
    match v.len() {
        0 => "valid input".to_string(),
        1 => v[0].clone(),
        _ => format!("one of {}", v.join(", ")),
    }
}
