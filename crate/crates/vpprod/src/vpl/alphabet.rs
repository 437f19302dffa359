use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::VplError;

/// Index of a letter inside its [`Alphabet`].
pub type Sym = usize;
pub type Word = Vec<Sym>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Call,
    Ret,
    Int,
}

impl Kind {
    pub fn tag(self) -> &'static str {
        match self {
            Kind::Call => "call",
            Kind::Ret => "ret",
            Kind::Int => "int",
        }
    }

    /// Calls and returns swap under word reversal.
    pub fn mirrored(self) -> Kind {
        match self {
            Kind::Call => Kind::Ret,
            Kind::Ret => Kind::Call,
            Kind::Int => Kind::Int,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub name: String,
    pub kind: Kind,
    /// Component index, starting at 1.
    pub component: usize,
    /// Opaque handle interpreted by the frontend and the encoders.
    pub payload: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<Letter>,
    index: HashMap<String, Sym>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(
        &mut self,
        name: &str,
        kind: Kind,
        component: usize,
        payload: usize,
    ) -> Result<Sym, VplError> {
        if component == 0 {
            return Err(VplError::BadComponent(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(VplError::DuplicateLetter(name.to_string()));
        }
        let id = self.letters.len();
        self.letters.push(Letter {
            name: name.to_string(),
            kind,
            component,
            payload,
        });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Builds an alphabet from `(name, kind, component)` triples; payloads are the positions.
    pub fn from_spec(spec: &[(&str, Kind, usize)]) -> Result<Self, VplError> {
        let mut a = Alphabet::new();
        for (i, (n, k, c)) in spec.iter().enumerate() {
            a.add(n, *k, *c, i)?;
        }
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter(&self, s: Sym) -> &Letter {
        &self.letters[s]
    }

    pub fn kind(&self, s: Sym) -> Kind {
        self.letters[s].kind
    }

    pub fn component(&self, s: Sym) -> usize {
        self.letters[s].component
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.letters[s].name
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.index.get(name).copied()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn syms(&self) -> impl Iterator<Item = Sym> {
        0..self.letters.len()
    }

    pub fn components(&self) -> BTreeSet<usize> {
        self.letters.iter().map(|l| l.component).collect()
    }

    /// Letters whose component lies in `comps`, ascending by id.
    pub fn syms_in(&self, comps: &BTreeSet<usize>) -> Vec<Sym> {
        self.syms()
            .filter(|&s| comps.contains(&self.component(s)))
            .collect()
    }

    pub fn syms_of_kind(&self, comps: &BTreeSet<usize>, kind: Kind) -> Vec<Sym> {
        self.syms_in(comps)
            .into_iter()
            .filter(|&s| self.kind(s) == kind)
            .collect()
    }

    /// Same letters with calls and returns swapped.
    pub fn mirrored(&self) -> Alphabet {
        let mut a = self.clone();
        for l in &mut a.letters {
            l.kind = l.kind.mirrored();
        }
        a
    }

    /// Parses a word where every character is a single-letter name ("([()])").
    pub fn chars(&self, text: &str) -> Result<Word, VplError> {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                self.lookup(&c.to_string())
                    .ok_or_else(|| VplError::UnknownLetter(c.to_string()))
            })
            .collect()
    }

    /// Parses a word given as a list of letter names.
    pub fn word(&self, names: &[&str]) -> Result<Word, VplError> {
        names
            .iter()
            .map(|n| self.lookup(n).ok_or_else(|| VplError::UnknownLetter(n.to_string())))
            .collect()
    }

    pub fn show(&self, w: &[Sym]) -> String {
        let single = w.iter().all(|&s| self.name(s).chars().count() == 1);
        let parts: Vec<&str> = w.iter().map(|&s| self.name(s)).collect();
        if single {
            parts.concat()
        } else {
            parts.join(" · ")
        }
    }
}

/// One endpoint of a matched pair; positions are 1-based as in the usual notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    NegInf,
    At(usize),
    PosInf,
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            End::NegInf => write!(f, "-inf"),
            End::At(i) => write!(f, "{i}"),
            End::PosInf => write!(f, "+inf"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchingRelation {
    pub pairs: BTreeSet<(End, End)>,
}

impl MatchingRelation {
    /// Partner of the 1-based position `i`, if it is a call or return.
    pub fn partner(&self, i: usize) -> Option<End> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == End::At(i) {
                Some(b)
            } else if b == End::At(i) {
                Some(a)
            } else {
                None
            }
        })
    }
}

pub fn matching_of(alpha: &Alphabet, word: &[Sym]) -> MatchingRelation {
    let mut stack: Vec<usize> = Vec::new();
    let mut pairs = BTreeSet::new();
    for (i, &s) in word.iter().enumerate() {
        let pos = i + 1;
        match alpha.kind(s) {
            Kind::Call => stack.push(pos),
            Kind::Ret => match stack.pop() {
                Some(c) => {
                    pairs.insert((End::At(c), End::At(pos)));
                }
                None => {
                    pairs.insert((End::NegInf, End::At(pos)));
                }
            },
            Kind::Int => {}
        }
    }
    for c in stack {
        pairs.insert((End::At(c), End::PosInf));
    }
    MatchingRelation { pairs }
}

pub fn is_well_matched(alpha: &Alphabet, word: &[Sym]) -> bool {
    let mut depth: usize = 0;
    for &s in word {
        match alpha.kind(s) {
            Kind::Call => depth += 1,
            Kind::Ret => {
                if depth == 0 {
                    return false;
                }
                depth -= 1;
            }
            Kind::Int => {}
        }
    }
    depth == 0
}

/// Every matched call/return pair lies inside a single component.
pub fn is_well_nested(alpha: &Alphabet, word: &[Sym]) -> bool {
    let mut stack: Vec<Sym> = Vec::new();
    for &s in word {
        match alpha.kind(s) {
            Kind::Call => stack.push(s),
            Kind::Ret => {
                if let Some(c) = stack.pop() {
                    if alpha.component(c) != alpha.component(s) {
                        return false;
                    }
                }
            }
            Kind::Int => {}
        }
    }
    true
}

/// Projection onto the letters of one component.
pub fn project(alpha: &Alphabet, word: &[Sym], comp: usize) -> Word {
    word.iter()
        .copied()
        .filter(|&s| alpha.component(s) == comp)
        .collect()
}

/// Projection onto a set of components.
pub fn project_set(alpha: &Alphabet, word: &[Sym], comps: &BTreeSet<usize>) -> Word {
    word.iter()
        .copied()
        .filter(|&s| comps.contains(&alpha.component(s)))
        .collect()
}

/// Reverses a word; read over the mirrored alphabet it is well-matched iff the input is.
pub fn mirror_word(word: &[Sym]) -> Word {
    word.iter().rev().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyck2() -> Alphabet {
        Alphabet::from_spec(&[
            ("(", Kind::Call, 1),
            (")", Kind::Ret, 1),
            ("[", Kind::Call, 2),
            ("]", Kind::Ret, 2),
        ])
        .unwrap()
    }

    fn stack_oracle(alpha: &Alphabet, w: &[Sym]) -> BTreeSet<(End, End)> {
        // independent recomputation: scan each return leftwards for the nearest unmatched call
        let mut matched = vec![false; w.len()];
        let mut out = BTreeSet::new();
        for j in 0..w.len() {
            if alpha.kind(w[j]) != Kind::Ret {
                continue;
            }
            let mut k = j;
            let mut found = None;
            while k > 0 {
                k -= 1;
                if alpha.kind(w[k]) == Kind::Call && !matched[k] {
                    found = Some(k);
                    break;
                }
            }
            match found {
                Some(k) => {
                    matched[k] = true;
                    matched[j] = true;
                    out.insert((End::At(k + 1), End::At(j + 1)));
                }
                None => {
                    matched[j] = true;
                    out.insert((End::NegInf, End::At(j + 1)));
                }
            }
        }
        for k in 0..w.len() {
            if alpha.kind(w[k]) == Kind::Call && !matched[k] {
                out.insert((End::At(k + 1), End::PosInf));
            }
        }
        out
    }

    #[test]
    fn balanced_matching() {
        let a = dyck2();
        let m = matching_of(&a, &a.chars("([()])").unwrap());
        let want: BTreeSet<_> = [(1, 6), (2, 5), (3, 4)]
            .iter()
            .map(|&(i, j)| (End::At(i), End::At(j)))
            .collect();
        assert_eq!(m.pairs, want);
    }

    #[test]
    fn pending_calls() {
        let a = dyck2();
        let m = matching_of(&a, &a.chars("((").unwrap());
        let want: BTreeSet<_> = [(End::At(1), End::PosInf), (End::At(2), End::PosInf)]
            .into_iter()
            .collect();
        assert_eq!(m.pairs, want);
    }

    #[test]
    fn crossing_brackets_match_by_stack() {
        let a = dyck2();
        let w = a.chars("([(]))").unwrap();
        let m = matching_of(&a, &w);
        assert_eq!(m.pairs, stack_oracle(&a, &w));
        let want: BTreeSet<_> = [(1, 6), (2, 5), (3, 4)]
            .iter()
            .map(|&(i, j)| (End::At(i), End::At(j)))
            .collect();
        assert_eq!(m.pairs, want);
        assert_eq!(m.partner(4), Some(End::At(3)));
    }

    #[test]
    fn nestedness_examples() {
        let a = dyck2();
        assert!(is_well_nested(&a, &a.chars("([()])").unwrap()));
        assert!(!is_well_nested(&a, &a.chars("([(]))").unwrap()));
        assert!(is_well_nested(&a, &[]));
        assert!(is_well_matched(&a, &[]));
        assert!(!is_well_matched(&a, &a.chars(")(").unwrap()));
    }

    #[test]
    fn pending_return() {
        let a = dyck2();
        let m = matching_of(&a, &a.chars(")").unwrap());
        assert_eq!(m.partner(1), Some(End::NegInf));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut a = Alphabet::new();
        a.add("x", Kind::Int, 1, 0).unwrap();
        assert!(a.add("x", Kind::Int, 2, 0).is_err());
        assert!(a.add("y", Kind::Int, 0, 0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn matching_agrees_with_scan(w in proptest::collection::vec(0usize..4, 0..12)) {
                let a = dyck2();
                prop_assert_eq!(matching_of(&a, &w).pairs, stack_oracle(&a, &w));
            }

            #[test]
            fn well_nested_iff_pairs_respect_components(w in proptest::collection::vec(0usize..4, 0..12)) {
                let a = dyck2();
                let m = matching_of(&a, &w);
                let by_def = m.pairs.iter().all(|&(i, j)| match (i, j) {
                    (End::At(i), End::At(j)) => a.component(w[i - 1]) == a.component(w[j - 1]),
                    _ => true,
                });
                prop_assert_eq!(is_well_nested(&a, &w), by_def);
            }
        }
    }
}
