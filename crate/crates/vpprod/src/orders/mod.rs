//! Visibly pushdown contextual orders.

mod canonical;
mod transform;

pub use canonical::{concat_order, dec, lockstep_order, nested_concat_order, roundrobin_order};
pub use transform::{
    coherence_repair, exclude_letters, is_coherent, is_uniform, is_uniform_enabled, Excluded,
};

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::vpl::{Alphabet, Sym, Vpa, VplError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("speed vector {0:?} must have one positive entry per group ({1} groups)")]
    BadSpeed(Vec<usize>, usize),
    #[error("round-robin needs exactly two groups, got {0}")]
    RoundRobinArity(usize),
    #[error("groups must be nonempty and disjoint")]
    BadGroups,
    #[error("letter `{0}` is not a call or return and cannot be excluded")]
    ExcludeInternal(String),
    #[error("excluded letters must be closed under matching: `{0}` and `{1}` can match but only one is excluded")]
    ExcludeUnmatched(String, String),
    #[error("component {0} has no internal letter to stand in for excluded letters")]
    NoInternalImage(usize),
    #[error("undefined transition in order automaton")]
    Undefined,
    #[error(transparent)]
    Vpl(#[from] VplError),
}

/// Strict total order on the letters of an alphabet, stored as ranks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearOrder {
    rank: Vec<usize>,
}

impl LinearOrder {
    /// Letters in `seq` come first, in that order; any remaining letters follow by id.
    pub fn from_sequence(seq: &[Sym], alphabet_len: usize) -> Self {
        let mut rank = vec![usize::MAX; alphabet_len];
        let mut next = 0;
        for &s in seq {
            if rank[s] == usize::MAX {
                rank[s] = next;
                next += 1;
            }
        }
        for r in rank.iter_mut() {
            if *r == usize::MAX {
                *r = next;
                next += 1;
            }
        }
        LinearOrder { rank }
    }

    pub fn rank(&self, s: Sym) -> usize {
        self.rank[s]
    }

    pub fn less(&self, a: Sym, b: Sym) -> bool {
        self.rank[a] < self.rank[b]
    }

    pub fn sequence(&self) -> Vec<Sym> {
        let mut v: Vec<Sym> = (0..self.rank.len()).collect();
        v.sort_by_key(|&s| self.rank[s]);
        v
    }

    /// Minimum of a nonempty set of letters.
    pub fn min_of(&self, letters: impl IntoIterator<Item = Sym>) -> Option<Sym> {
        letters.into_iter().min_by_key(|&s| self.rank[s])
    }

    pub fn show(&self, alphabet: &Alphabet, restrict: &BTreeSet<usize>) -> String {
        self.sequence()
            .into_iter()
            .filter(|&s| restrict.contains(&alphabet.component(s)))
            .map(|s| alphabet.name(s).to_string())
            .collect::<Vec<_>>()
            .join(" < ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloOrdering {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl From<Ordering> for CloOrdering {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => CloOrdering::Less,
            Ordering::Equal => CloOrdering::Equal,
            Ordering::Greater => CloOrdering::Greater,
        }
    }
}

/// Complete deterministic automaton with a linear order on letters per state.
#[derive(Clone, Debug)]
pub struct OrderAutomaton {
    pub vpa: Vpa,
    pub ord: Vec<LinearOrder>,
    /// The merged components scheduled by this order; letters of different groups commute.
    pub groups: Vec<BTreeSet<usize>>,
}

impl OrderAutomaton {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.vpa.alphabet
    }

    /// Index of the group containing letter `s`.
    pub fn group_of(&self, s: Sym) -> usize {
        group_index(&self.groups, self.vpa.alphabet.component(s))
    }

    pub fn state_at(&self, context: &[Sym]) -> Result<usize, OrderError> {
        self.vpa.run_det(context).ok_or(OrderError::Undefined)
    }

    pub fn order_at(&self, context: &[Sym]) -> Result<&LinearOrder, OrderError> {
        Ok(&self.ord[self.state_at(context)?])
    }

    /// Contextual lexicographic comparison: a proper prefix is smaller, otherwise the first
    /// differing letters are compared under the order reached on the common prefix.
    pub fn clo_compare(&self, u: &[Sym], v: &[Sym]) -> CloOrdering {
        let common = u.iter().zip(v).take_while(|(a, b)| a == b).count();
        if common == u.len() && common == v.len() {
            return CloOrdering::Equal;
        }
        if common == u.len() {
            return CloOrdering::Less;
        }
        if common == v.len() {
            return CloOrdering::Greater;
        }
        match self.order_at(&u[..common]) {
            Ok(o) => o.rank(u[common]).cmp(&o.rank(v[common])).into(),
            Err(_) => CloOrdering::Incomparable,
        }
    }

    pub fn num_states(&self) -> usize {
        self.vpa.num_states()
    }

    /// One line per state with its order; used in dumps.
    pub fn dump(&self) -> String {
        let mut s = self.vpa.dump();
        let comps = &self.vpa.comps;
        for (q, o) in self.ord.iter().enumerate() {
            s.push_str(&format!("ord {q} {}\n", o.show(&self.vpa.alphabet, comps)));
        }
        s
    }
}

impl fmt::Display for OrderAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

pub(crate) fn group_index(groups: &[BTreeSet<usize>], comp: usize) -> usize {
    groups
        .iter()
        .position(|g| g.contains(&comp))
        .unwrap_or(usize::MAX)
}

pub(crate) fn check_groups(groups: &[BTreeSet<usize>]) -> Result<BTreeSet<usize>, OrderError> {
    let mut all = BTreeSet::new();
    for g in groups {
        if g.is_empty() {
            return Err(OrderError::BadGroups);
        }
        for &c in g {
            if !all.insert(c) {
                return Err(OrderError::BadGroups);
            }
        }
    }
    if all.is_empty() {
        return Err(OrderError::BadGroups);
    }
    Ok(all)
}

/// Singleton groups `{1}, …, {n}`.
pub fn singleton_groups(n: usize) -> Vec<BTreeSet<usize>> {
    (1..=n).map(|i| [i].into_iter().collect()).collect()
}
