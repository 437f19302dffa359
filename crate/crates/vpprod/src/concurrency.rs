//! Tail- and head-independence of components, decided by inclusion in a fixed visibly pushdown
//! language, and the resulting soundness verdict for the well-nested shuffle.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::vpl::{vpa_intersect, Alphabet, Kind, Sym, Trans, Vpa, VplError, Word, BOTTOM};

pub use crate::oracle::Side;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConcurrencyError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown letter `{name}`")]
    UnknownLetter { line: usize, name: String },
    #[error("`{0}` is a call or return; only internal letters can be dependent")]
    NotInternal(String),
    #[error(transparent)]
    Vpl(#[from] VplError),
}

/// Internal letters that do not commute with some letter of another component. Everything
/// else, calls and returns included, is independent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndependenceSpec {
    dep: BTreeSet<Sym>,
}

impl IndependenceSpec {
    pub fn all_independent() -> Self {
        Self::default()
    }

    pub fn new(alphabet: &Alphabet, dep: impl IntoIterator<Item = Sym>) -> Result<Self, ConcurrencyError> {
        let dep: BTreeSet<Sym> = dep.into_iter().collect();
        if let Some(&s) = dep.iter().find(|&&s| alphabet.kind(s) != Kind::Int) {
            return Err(ConcurrencyError::NotInternal(alphabet.name(s).to_string()));
        }
        Ok(IndependenceSpec { dep })
    }

    /// One `dep <letter>` or `indep <letter>` per line; `#` starts a comment line.
    /// Unlisted letters are independent.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, ConcurrencyError> {
        let mut dep = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, name) = line.split_once(char::is_whitespace).ok_or_else(|| ConcurrencyError::Syntax {
                line: i + 1,
                msg: format!("expected `dep <letter>` or `indep <letter>`, found `{line}`"),
            })?;
            let name = name.trim();
            let s = alphabet.lookup(name).ok_or_else(|| ConcurrencyError::UnknownLetter {
                line: i + 1,
                name: name.to_string(),
            })?;
            match tag {
                "dep" => {
                    dep.insert(s);
                }
                "indep" => {
                    dep.remove(&s);
                }
                _ => {
                    return Err(ConcurrencyError::Syntax {
                        line: i + 1,
                        msg: format!("unknown tag `{tag}`"),
                    })
                }
            }
        }
        Self::new(alphabet, dep)
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.dep.iter().map(|&s| format!("dep {}\n", alphabet.name(s))).collect()
    }

    pub fn dep(&self) -> &BTreeSet<Sym> {
        &self.dep
    }

    pub fn is_dep(&self, s: Sym) -> bool {
        self.dep.contains(&s)
    }

    /// Independent letters of `comps`.
    pub fn indep(&self, alphabet: &Alphabet, comps: &BTreeSet<usize>) -> BTreeSet<Sym> {
        alphabet.syms_in(comps).into_iter().filter(|s| !self.dep.contains(s)).collect()
    }
}

/// Deterministic complete automaton for the tail language `X → Y | aX | cYrX | cXrY` over the
/// letters of `comps`, read on well-matched words.
///
/// A live state is a mode (dependent letters allowed or not) and whether the current frame has
/// read a dependent letter. Calls push the caller's state and enter a clean frame. Returning
/// from a frame that read a dependent letter forbids them for the rest of the run, and marks the
/// caller's frame as having read one.
pub fn max_tail_independent_vpa(alphabet: Arc<Alphabet>, comps: &BTreeSet<usize>, spec: &IndependenceSpec) -> Vpa {
    let mut v = Vpa::new(alphabet.clone(), comps.clone());
    // state index 2 * forbidden + dirty; 4 is dead
    for f in ["allow", "forbid"] {
        for d in ["clean", "dirty"] {
            v.add_state(format!("{f}.{d}"));
        }
    }
    let dead = v.add_state("dead");
    for q in 0..4 {
        v.add_stack(v.states[q].clone());
    }
    let sym = |q: usize| q + 1;
    let letters = v.letters();
    for q in 0..4 {
        let forbidden = q / 2;
        for &a in &letters {
            match alphabet.kind(a) {
                Kind::Int if spec.is_dep(a) => {
                    let to = if forbidden == 1 { dead } else { 1 };
                    v.out[q].push(Trans::Int { a, to });
                }
                Kind::Int => v.out[q].push(Trans::Int { a, to: q }),
                Kind::Call => v.out[q].push(Trans::Call {
                    a,
                    to: 2 * forbidden,
                    push: sym(q),
                }),
                Kind::Ret => {
                    v.out[q].push(Trans::Ret { a, pop: BOTTOM, to: dead });
                    for caller in 0..4 {
                        let to = if q % 2 == 1 { 3 } else { caller };
                        v.out[q].push(Trans::Ret { a, pop: sym(caller), to });
                    }
                }
            }
        }
    }
    add_dead_loops(&mut v, dead);
    v.initial.insert(0);
    v.finals.extend(0..4);
    v.complete = true;
    v
}

/// Deterministic complete automaton for the head language `X → Y | Xa | XcYr | YcXr`.
///
/// A live state records whether a dependent letter has been read and whether one may still be
/// read. A call opened after a dependent letter forbids them until its return.
pub fn max_head_independent_vpa(alphabet: Arc<Alphabet>, comps: &BTreeSet<usize>, spec: &IndependenceSpec) -> Vpa {
    let mut v = Vpa::new(alphabet.clone(), comps.clone());
    // state index 2 * seen + allowed; 4 is dead
    for s in ["fresh", "seen"] {
        for a in ["forbid", "allow"] {
            v.add_state(format!("{s}.{a}"));
        }
    }
    let dead = v.add_state("dead");
    v.add_stack("forbid");
    v.add_stack("allow");
    let letters = v.letters();
    for q in 0..4 {
        let (seen, allowed) = (q / 2, q % 2);
        for &a in &letters {
            match alphabet.kind(a) {
                Kind::Int if spec.is_dep(a) => {
                    let to = if allowed == 1 { 3 } else { dead };
                    v.out[q].push(Trans::Int { a, to });
                }
                Kind::Int => v.out[q].push(Trans::Int { a, to: q }),
                Kind::Call => v.out[q].push(Trans::Call {
                    a,
                    to: 2 * seen + (allowed & (1 - seen)),
                    push: 1 + allowed,
                }),
                Kind::Ret => {
                    v.out[q].push(Trans::Ret { a, pop: BOTTOM, to: dead });
                    for al in 0..2 {
                        v.out[q].push(Trans::Ret { a, pop: 1 + al, to: 2 * seen + al });
                    }
                }
            }
        }
    }
    add_dead_loops(&mut v, dead);
    v.initial.insert(1);
    v.finals.extend(0..4);
    v.complete = true;
    v
}

fn add_dead_loops(v: &mut Vpa, dead: usize) {
    for a in v.letters() {
        match v.alphabet.kind(a) {
            Kind::Int => v.out[dead].push(Trans::Int { a, to: dead }),
            Kind::Call => v.out[dead].push(Trans::Call { a, to: dead, push: 1 }),
            Kind::Ret => {
                for g in 0..v.num_stack() {
                    v.out[dead].push(Trans::Ret { a, pop: g, to: dead });
                }
            }
        }
    }
}

pub fn max_independent_vpa(alphabet: Arc<Alphabet>, comps: &BTreeSet<usize>, spec: &IndependenceSpec, side: Side) -> Vpa {
    match side {
        Side::Tail => max_tail_independent_vpa(alphabet, comps, spec),
        Side::Head => max_head_independent_vpa(alphabet, comps, spec),
    }
}

/// Complement of a deterministic automaton: complete it, then swap final and non-final states.
pub fn complement(a: &Vpa) -> Vpa {
    debug_assert!(a.is_deterministic());
    let mut c = a.complete();
    c.finals = (0..c.num_states()).filter(|q| !c.finals.contains(q)).collect();
    c
}

/// A well-matched run of `p` outside the maximal language for `side`, if any.
pub fn independence_violation(p: &Vpa, spec: &IndependenceSpec, side: Side) -> Result<Option<Word>, ConcurrencyError> {
    let max = max_independent_vpa(p.alphabet.clone(), &p.comps, spec, side);
    let bad = vpa_intersect(p, &complement(&max))?;
    Ok(bad.well_matched_witness())
}

pub fn is_tail_independent(p: &Vpa, spec: &IndependenceSpec) -> Result<bool, ConcurrencyError> {
    Ok(independence_violation(p, spec, Side::Tail)?.is_none())
}

pub fn is_head_independent(p: &Vpa, spec: &IndependenceSpec) -> Result<bool, ConcurrencyError> {
    Ok(independence_violation(p, spec, Side::Head)?.is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Tail,
    Head,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentVerdict {
    /// Component indices the automaton reads.
    pub comps: Vec<usize>,
    /// A run violating tail-independence, if one exists.
    pub tail_witness: Option<Word>,
    pub head_witness: Option<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub sound: bool,
    pub direction: Direction,
    pub components: Vec<ComponentVerdict>,
}

/// The well-nested shuffle is a sound sequentialization when every component is
/// tail-independent, or every component is head-independent. Tail wins when both hold.
pub fn wn_shuffle_soundness_report(components: &[Vpa], spec: &IndependenceSpec) -> Result<SoundnessReport, ConcurrencyError> {
    let mut out = Vec::new();
    for p in components {
        out.push(ComponentVerdict {
            comps: p.comps.iter().copied().collect(),
            tail_witness: independence_violation(p, spec, Side::Tail)?,
            head_witness: independence_violation(p, spec, Side::Head)?,
        });
    }
    let direction = if out.iter().all(|c| c.tail_witness.is_none()) {
        Direction::Tail
    } else if out.iter().all(|c| c.head_witness.is_none()) {
        Direction::Head
    } else {
        Direction::None
    };
    Ok(SoundnessReport {
        sound: direction != Direction::None,
        direction,
        components: out,
    })
}
