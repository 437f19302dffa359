//! Product-program constructions: sleep sets, the greedy product, and direct grammars.

mod direct;
mod eval;
mod expr;
mod product;
mod sleepset;
mod words;

pub use direct::{concat_vpg, lockstep_vpg, nested_concat_vpg};
pub use eval::{evaluate, letter_resolver, reverse_vpg, Evaluation, Mode, NodeStats, Product, Resolver};
pub use expr::{Node, ReductionExpr};
pub use product::{optimized_product, ProductStats};
pub use sleepset::{generic_lex_reduction, sleepset_vpa};
pub use words::{
    concat_words, lockstep_words, nested_concat_words, nested_concat_words_n, right_aligned,
};

use std::sync::Arc;

use thiserror::Error;

use crate::orders::{OrderAutomaton, OrderError};
use crate::vpl::{Vpa, VplError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("parse error at {0}: {1}")]
    Parse(usize, String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("component `{0}` occurs more than once")]
    DuplicateLeaf(String),
    #[error("no input named `{0}`")]
    UnknownLeaf(String),
    #[error("cannot resolve excluded name `{0}`")]
    UnknownExclude(String),
    #[error("word `{0}` is not well-matched")]
    IllMatched(String),
    #[error("order is not uniform with respect to the component automata")]
    NonUniform,
    #[error("component automata must be normalized (final states without outgoing transitions)")]
    NotNormalized,
    #[error("parts do not match the order's groups")]
    PartsMismatch,
    #[error("alphabet has {0} letters; sleep sets support at most 128")]
    TooManyLetters(usize),
    #[error("product has {0} states, above the bound {1}")]
    BoundViolated(usize, u128),
    #[error("{0} is not supported in direct mode")]
    Unsupported(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Vpl(#[from] VplError),
}

/// Part `i` must read exactly the components of group `i`, over the order's alphabet.
pub(crate) fn check_parts(o: &OrderAutomaton, parts: &[Vpa]) -> Result<(), ReductionError> {
    if parts.len() != o.groups.len() {
        return Err(ReductionError::PartsMismatch);
    }
    for (p, g) in parts.iter().zip(&o.groups) {
        if &p.comps != g || !(Arc::ptr_eq(&p.alphabet, o.alphabet()) || *p.alphabet == **o.alphabet()) {
            return Err(ReductionError::PartsMismatch);
        }
    }
    Ok(())
}
