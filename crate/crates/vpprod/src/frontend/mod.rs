//! A small recursive procedure language, its statement alphabet and run grammars.

pub mod ast;
mod compile;
pub mod interp;
mod parse;
mod property;

pub use ast::{BinOp, Expr, Proc, Program, Stmt, Type, Var};
pub use compile::{
    ast_runs, build_system, call_text, copies_system, make_copies, ret_text, to_vpg, Component, LetterSem,
    System,
};
pub use interp::{eval, interpret, StackMode, Valuation, Value};
pub use parse::{parse, reachable_procs};
pub use property::HyperProperty;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared identifier `{name}`")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("{line}:{col}: type error: {msg}")]
    Type { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Semantic(String),
}

/// Sources shipped with the crate.
pub mod fixtures {
    pub const DIV: &str = include_str!("../../fixtures/div.rp");
    pub const ACKERMANN: &str = include_str!("../../fixtures/ackermann.rp");
    pub const FGH: &str = include_str!("../../fixtures/fgh.rp");
    pub const MONOTONICITY: &str = include_str!("../../fixtures/monotonicity.prop");
    pub const SCALING: &str = include_str!("../../fixtures/scaling.prop");
    pub const DISTRIBUTIVITY: &str = include_str!("../../fixtures/distributivity.prop");

    pub const PROGRAMS: [(&str, &str, &str); 3] = [("div", DIV, "div"), ("ackermann", ACKERMANN, "ack"), ("fgh", FGH, "f")];
}
