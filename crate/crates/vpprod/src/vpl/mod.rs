//! Visibly pushdown alphabets, automata and grammars.

mod alphabet;
pub(crate) mod ops;
mod vpa;
mod vpg;

pub use alphabet::{
    is_well_matched, is_well_nested, matching_of, mirror_word, project, project_set, Alphabet,
    End, Kind, Letter, MatchingRelation, Sym, Word,
};
pub use ops::{vpa_intersect, vpa_to_vpg, vpg_to_vpa, wn_shuffle};
pub use vpa::{Trans, Vpa, BOTTOM};
pub use vpg::{Rhs, Vpg};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VplError {
    #[error("duplicate letter `{0}`")]
    DuplicateLetter(String),
    #[error("letter `{0}` needs a component index >= 1")]
    BadComponent(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("automata are over different alphabets")]
    AlphabetMismatch,
    #[error("component sets overlap: {0:?}")]
    OverlappingComponents(Vec<usize>),
    #[error("component sets differ: {0:?} vs {1:?}")]
    ComponentMismatch(Vec<usize>, Vec<usize>),
    #[error("letter `{0}` is a {1}, expected a {2}")]
    WrongKind(String, &'static str, &'static str),
    #[error("call transitions cannot push the bottom symbol")]
    PushBottom,
    #[error("letter `{0}` is outside the automaton's components")]
    ForeignLetter(String),
    #[error("{0}")]
    Invalid(String),
}

use std::collections::BTreeSet;

pub(crate) fn comps_vec(c: &BTreeSet<usize>) -> Vec<usize> {
    c.iter().copied().collect()
}
