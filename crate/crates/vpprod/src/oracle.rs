//! Brute-force reference implementations at bounded size.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::orders::{group_index, CloOrdering, OrderAutomaton};
use crate::vpl::{Alphabet, Kind, Sym, Word};

pub use crate::frontend::interp::{interpret, StackMode};


/// Default cap on the number of interleavings enumerated for one instance.
pub const DEFAULT_CAP: u64 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration needs {needed} interleavings, above the cap of {cap}")]
    CapExceeded { needed: u128, cap: u64 },
}

fn multinomial(lens: &[usize]) -> u128 {
    let mut total: u128 = 1;
    let mut n: u128 = 0;
    for &l in lens {
        for k in 1..=l as u128 {
            n += 1;
            total = total * n / k;
        }
    }
    total
}

/// All interleavings of the given words.
pub fn enumerate_shuffle(words: &[Word], cap: u64) -> Result<BTreeSet<Word>, OracleError> {
    let lens: Vec<usize> = words.iter().map(|w| w.len()).collect();
    let needed = multinomial(&lens);
    if needed > cap as u128 {
        return Err(OracleError::CapExceeded { needed, cap });
    }
    let mut out = BTreeSet::new();
    let mut pos = vec![0usize; words.len()];
    let mut cur = Vec::with_capacity(lens.iter().sum());
    interleave(words, &mut pos, &mut cur, &mut |w| {
        out.insert(w.to_vec());
    });
    Ok(out)
}

fn interleave(words: &[Word], pos: &mut Vec<usize>, cur: &mut Word, emit: &mut impl FnMut(&[Sym])) {
    let mut any = false;
    for i in 0..words.len() {
        if pos[i] < words[i].len() {
            any = true;
            cur.push(words[i][pos[i]]);
            pos[i] += 1;
            interleave(words, pos, cur, emit);
            pos[i] -= 1;
            cur.pop();
        }
    }
    if !any {
        emit(cur);
    }
}

/// Every matched call/return pair lies inside one group.
pub fn is_well_nested_groups(alphabet: &Alphabet, word: &[Sym], groups: &[BTreeSet<usize>]) -> bool {
    let mut stack: Vec<usize> = Vec::new();
    for &s in word {
        let g = group_index(groups, alphabet.component(s));
        match alphabet.kind(s) {
            Kind::Call => stack.push(g),
            Kind::Ret => {
                if let Some(h) = stack.pop() {
                    if h != g {
                        return false;
                    }
                }
            }
            Kind::Int => {}
        }
    }
    true
}

/// Projection onto each group.
pub fn projections(alphabet: &Alphabet, word: &[Sym], groups: &[BTreeSet<usize>]) -> Vec<Word> {
    groups
        .iter()
        .map(|g| {
            word.iter()
                .copied()
                .filter(|&s| g.contains(&alphabet.component(s)))
                .collect()
        })
        .collect()
}

/// Equivalence classes under full cross-group commutation: the fibers of the projection tuple.
pub fn classes(
    alphabet: &Alphabet,
    lang: &BTreeSet<Word>,
    groups: &[BTreeSet<usize>],
) -> BTreeMap<Vec<Word>, BTreeSet<Word>> {
    let mut out: BTreeMap<Vec<Word>, BTreeSet<Word>> = BTreeMap::new();
    for w in lang {
        out.entry(projections(alphabet, w, groups))
            .or_default()
            .insert(w.clone());
    }
    out
}

/// Compares two words of one class under `o`, after mapping letters through `image` if given.
pub fn compare(o: &OrderAutomaton, image: Option<&[Sym]>, u: &[Sym], v: &[Sym]) -> CloOrdering {
    match image {
        None => o.clo_compare(u, v),
        Some(f) => {
            let fu: Word = u.iter().map(|&s| f[s]).collect();
            let fv: Word = v.iter().map(|&s| f[s]).collect();
            match o.clo_compare(&fu, &fv) {
                CloOrdering::Equal if u != v => CloOrdering::Incomparable,
                c => c,
            }
        }
    }
}

/// The members of `class` not dominated by another member.
pub fn minimal_members(o: &OrderAutomaton, image: Option<&[Sym]>, class: &BTreeSet<Word>) -> BTreeSet<Word> {
    class
        .iter()
        .filter(|u| {
            !class
                .iter()
                .any(|v| v != *u && compare(o, image, v, u) == CloOrdering::Less)
        })
        .cloned()
        .collect()
}

/// Per class of `lang`, keeps exactly the minimal members. With `wn_only`, words that are not
/// well-nested over the order's groups are discarded first.
pub fn ref_reduction(
    o: &OrderAutomaton,
    lang: &BTreeSet<Word>,
    wn_only: bool,
    image: Option<&[Sym]>,
) -> BTreeSet<Word> {
    let al = o.alphabet().clone();
    let filtered: BTreeSet<Word> = lang
        .iter()
        .filter(|w| !wn_only || is_well_nested_groups(&al, w, &o.groups))
        .cloned()
        .collect();
    let mut out = BTreeSet::new();
    for (_, class) in classes(&al, &filtered, &o.groups) {
        out.extend(minimal_members(o, image, &class));
    }
    out
}

/// Bounded shuffle of per-group languages: all interleavings of tuples whose total length is
/// at most `max_len`. Each tuple is one class.
pub fn shuffle_classes(
    langs: &[BTreeSet<Word>],
    max_len: usize,
    cap: u64,
) -> Result<Vec<BTreeSet<Word>>, OracleError> {
    let mut tuples: Vec<Vec<Word>> = vec![vec![]];
    for l in langs {
        let mut next = Vec::new();
        for t in &tuples {
            let used: usize = t.iter().map(|w| w.len()).sum();
            for w in l {
                if used + w.len() <= max_len {
                    let mut t2 = t.clone();
                    t2.push(w.clone());
                    next.push(t2);
                }
            }
        }
        tuples = next;
    }
    let total: u128 = tuples
        .iter()
        .map(|t| multinomial(&t.iter().map(|w| w.len()).collect::<Vec<_>>()))
        .sum();
    if total > cap as u128 {
        return Err(OracleError::CapExceeded { needed: total, cap });
    }
    tuples
        .iter()
        .map(|t| enumerate_shuffle(t, cap))
        .collect()
}

/// `red(L₁ ⫛ ⋯ ⫛ Lₙ)` (or over `∥` when `wn_only` is false), bounded by `max_len`.
pub fn ref_reduction_of_shuffle(
    o: &OrderAutomaton,
    langs: &[BTreeSet<Word>],
    max_len: usize,
    wn_only: bool,
    image: Option<&[Sym]>,
    cap: u64,
) -> Result<BTreeSet<Word>, OracleError> {
    let al = o.alphabet().clone();
    let mut out = BTreeSet::new();
    for class in shuffle_classes(langs, max_len, cap)? {
        let class: BTreeSet<Word> = class
            .into_iter()
            .filter(|w| !wn_only || is_well_nested_groups(&al, w, &o.groups))
            .collect();
        out.extend(minimal_members(o, image, &class));
    }
    Ok(out)
}

/// Bounded well-nested shuffle, as a plain set.
pub fn wn_shuffle_words(
    alphabet: &Alphabet,
    langs: &[BTreeSet<Word>],
    groups: &[BTreeSet<usize>],
    max_len: usize,
    cap: u64,
) -> Result<BTreeSet<Word>, OracleError> {
    let mut out = BTreeSet::new();
    for class in shuffle_classes(langs, max_len, cap)? {
        out.extend(
            class
                .into_iter()
                .filter(|w| is_well_nested_groups(alphabet, w, groups)),
        );
    }
    Ok(out)
}

/// All words over the letters of `comps` up to `max_len`.
pub fn all_words(alphabet: &Alphabet, comps: &BTreeSet<usize>, max_len: usize) -> BTreeSet<Word> {
    let letters = alphabet.syms_in(comps);
    let mut out = BTreeSet::new();
    let mut frontier: Vec<Word> = vec![vec![]];
    out.insert(vec![]);
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &a in &letters {
                let mut v = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Which side of a run may hold dependent letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Dependent letters before the unmatched-return suffix.
    Tail,
    /// Dependent letters after the unmatched-call prefix.
    Head,
}

/// Matching position of every call and return; `None` if `word` is not well-matched.
fn partners(alphabet: &Alphabet, word: &[Sym]) -> Option<Vec<usize>> {
    let mut m = vec![usize::MAX; word.len()];
    let mut open = Vec::new();
    for (i, &s) in word.iter().enumerate() {
        match alphabet.kind(s) {
            Kind::Call => open.push(i),
            Kind::Ret => {
                let j = open.pop()?;
                m[i] = j;
                m[j] = i;
            }
            Kind::Int => {}
        }
    }
    open.is_empty().then_some(m)
}

/// Explicit split search: is there `word = uv` with every dependent letter in `u` (tail) or
/// `v` (head), calls in `u` and returns in `v` except pairs enclosing only independent letters?
pub fn split_exists(alphabet: &Alphabet, word: &[Sym], dep: &BTreeSet<Sym>, side: Side) -> bool {
    let Some(m) = partners(alphabet, word) else { return false };
    let n = word.len();
    let clean = |i: usize, j: usize| (i.min(j) + 1..i.max(j)).all(|p| !dep.contains(&word[p]));
    (0..=n).any(|s| {
        let free = match side {
            Side::Tail => s..n,
            Side::Head => 0..s,
        };
        free.clone().all(|p| !dep.contains(&word[p]))
            && (0..n).all(|p| match alphabet.kind(word[p]) {
                Kind::Call => p < s || clean(p, m[p]),
                Kind::Ret => p >= s || clean(p, m[p]),
                Kind::Int => true,
            })
    })
}

/// Membership in `X → Y | aX | cYrX | cXrY` (tail) or `X → Y | Xa | XcYr | YcXr` (head), where
/// `Y` derives the well-matched words without dependent letters. Cubic interval recursion.
pub fn in_independence_grammar(alphabet: &Alphabet, word: &[Sym], dep: &BTreeSet<Sym>, side: Side) -> bool {
    let Some(mut m) = partners(alphabet, word) else { return false };
    let mut w = word.to_vec();
    let mut kinds: Vec<Kind> = w.iter().map(|&s| alphabet.kind(s)).collect();
    if side == Side::Head {
        // mirror: the head grammar read right to left is the tail grammar
        let n = w.len();
        w.reverse();
        kinds.reverse();
        kinds.iter_mut().for_each(|k| *k = k.mirrored());
        m = m.iter().rev().map(|&j| if j == usize::MAX { j } else { n - 1 - j }).collect();
    }
    let n = w.len();
    let mut y = vec![vec![false; n + 1]; n + 1];
    let mut x = vec![vec![false; n + 1]; n + 1];
    for i in (0..=n).rev() {
        for j in i..=n {
            if i == j {
                y[i][j] = true;
                x[i][j] = true;
                continue;
            }
            match kinds[i] {
                Kind::Int => {
                    y[i][j] = !dep.contains(&w[i]) && y[i + 1][j];
                    x[i][j] = y[i][j] || x[i + 1][j];
                }
                Kind::Call => {
                    let r = m[i];
                    if r < j {
                        y[i][j] = y[i + 1][r] && y[r + 1][j];
                        x[i][j] = y[i][j] || (y[i + 1][r] && x[r + 1][j]) || (x[i + 1][r] && y[r + 1][j]);
                    }
                }
                Kind::Ret => {}
            }
        }
    }
    x[0][n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::{roundrobin_order, singleton_groups};
    use std::sync::Arc;

    fn parens() -> Arc<Alphabet> {
        Arc::new(
            Alphabet::from_spec(&[
                ("(", Kind::Call, 1),
                (")", Kind::Ret, 1),
                ("a", Kind::Int, 1),
                ("b", Kind::Int, 1),
                ("[", Kind::Call, 2),
                ("]", Kind::Ret, 2),
                ("x", Kind::Int, 2),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn three_interleavings() {
        let al = parens();
        let s = enumerate_shuffle(&[al.chars("ab").unwrap(), al.chars("x").unwrap()], 100).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn cap_refuses() {
        let al = parens();
        let w = al.chars("aaaaaaaaaa").unwrap();
        let v = al.chars("xxxxxxxxxx").unwrap();
        assert!(matches!(
            enumerate_shuffle(&[w, v], 100),
            Err(OracleError::CapExceeded { needed: 184756, .. })
        ));
    }

    #[test]
    fn class_of_two_calls() {
        let al = parens();
        let l: BTreeSet<Word> = ["([", "[("].iter().map(|w| al.chars(w).unwrap()).collect();
        let c = classes(&al, &l, &singleton_groups(2));
        assert_eq!(c.len(), 1);
        assert_eq!(c.values().next().unwrap(), &l);
    }

    #[test]
    fn roundrobin_keeps_alpha() {
        let al = parens();
        let o = roundrobin_order(&al, &singleton_groups(2)).unwrap();
        let langs = [
            [al.chars("(())").unwrap()].into_iter().collect(),
            [al.chars("[]").unwrap()].into_iter().collect(),
        ];
        let r = ref_reduction_of_shuffle(&o, &langs, 6, true, None, DEFAULT_CAP).unwrap();
        let want: BTreeSet<Word> = [al.chars("([()])").unwrap()].into_iter().collect();
        assert_eq!(r, want);
    }

    #[test]
    fn singleton_classes_are_kept() {
        let al = parens();
        let o = roundrobin_order(&al, &singleton_groups(2)).unwrap();
        let l: BTreeSet<Word> = ["(a)", "[x]", ""].iter().map(|w| al.chars(w).unwrap()).collect();
        assert_eq!(ref_reduction(&o, &l, false, None), l);
    }

    #[test]
    fn class_counts_follow_multinomials() {
        let al = parens();
        let l1: BTreeSet<Word> = ["ab", "a(b)"].iter().map(|w| al.chars(w).unwrap()).collect();
        let l2: BTreeSet<Word> = ["x", "[x]"].iter().map(|w| al.chars(w).unwrap()).collect();
        let classes = shuffle_classes(&[l1.clone(), l2.clone()], 10, DEFAULT_CAP).unwrap();
        assert_eq!(classes.len(), 4);
        let total: usize = classes.iter().map(|c| c.len()).sum();
        // C(3,1) + C(5,2) + C(5,1) + C(7,3)
        assert_eq!(total, 3 + 10 + 5 + 35);
    }

    /// Closure of adjacent swaps of letters from different groups.
    fn swap_closure(al: &Alphabet, w: &Word, groups: &[BTreeSet<usize>]) -> BTreeSet<Word> {
        let mut seen: BTreeSet<Word> = [w.clone()].into_iter().collect();
        let mut todo = vec![w.clone()];
        while let Some(u) = todo.pop() {
            for i in 0..u.len().saturating_sub(1) {
                let (a, b) = (u[i], u[i + 1]);
                if group_index(groups, al.component(a)) != group_index(groups, al.component(b)) {
                    let mut v = u.clone();
                    v.swap(i, i + 1);
                    if seen.insert(v.clone()) {
                        todo.push(v);
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn fibers_are_swap_classes() {
        let al = parens();
        let g = singleton_groups(2);
        let comps: BTreeSet<usize> = [1, 2].into_iter().collect();
        let words = all_words(&al, &comps, 4);
        let c = classes(&al, &words, &g);
        for w in words.iter().filter(|w| w.len() == 4).take(300) {
            let fiber = &c[&projections(&al, w, &g)];
            assert_eq!(&swap_closure(&al, w, &g), fiber);
        }
    }

    #[test]
    fn independence_oracles() {
        let al = parens();
        let dep: BTreeSet<Sym> = ["a", "b"].iter().map(|n| al.lookup(n).unwrap()).collect();
        let w = |t: &str| al.chars(t).unwrap();
        for side in [Side::Tail, Side::Head] {
            assert!(split_exists(&al, &w("(a)"), &dep, side));
            assert!(in_independence_grammar(&al, &w("(a)"), &dep, side));
            assert!(!split_exists(&al, &w("(a"), &dep, side));
        }
        assert!(!split_exists(&al, &w("(a)b"), &dep, Side::Tail));
        assert!(!in_independence_grammar(&al, &w("(a)b"), &dep, Side::Tail));
        assert!(split_exists(&al, &w("(a)b"), &dep, Side::Head));
        assert!(in_independence_grammar(&al, &w("(a)b"), &dep, Side::Head));
        assert!(!in_independence_grammar(&al, &w("a(b)"), &dep, Side::Head));
        assert!(in_independence_grammar(&al, &w("a(b)"), &dep, Side::Tail));
        assert!(in_independence_grammar(&al, &w("(a(b))"), &dep, Side::Tail));
        let none = BTreeSet::new();
        assert!(in_independence_grammar(&al, &w("(a)b(a)"), &none, Side::Tail));
    }
}
