//! The dataflow term language: terms, values, program files and the
//! flatten / CSE-reform pair used to move between tee'd programs and trees.

mod program;
mod term;
mod value;

pub use program::{flatten, parse_program, reform_cse, ProgramFile};
pub use term::{is_reserved, is_valid_name, parse_term, print_term, Op, Symbol, Term};
pub use value::Value;

use crate::sexp::{Pos, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown operator `{name}` at {pos}")]
    UnknownOperator { pos: Pos, name: String },
    #[error("`{op}` at {pos} takes {expected} arguments, found {found}")]
    Arity {
        pos: Pos,
        op: Op,
        expected: usize,
        found: usize,
    },
    #[error("invalid name `{name}` at {pos}")]
    InvalidName { pos: Pos, name: String },
    #[error("malformed form at {pos}: {msg}")]
    Malformed { pos: Pos, msg: String },
    #[error("misplaced diamond structure at {pos}: {msg}")]
    Structure { pos: Pos, msg: String },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String },
    #[error("def `{name}` refers to itself")]
    CyclicReference { name: String },
    #[error("`{name}` is used before its def")]
    ForwardReference { name: String },
}
