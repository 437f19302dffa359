//! Seeded random instances for property tests and the acceptance harness.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::vpl::{Alphabet, Kind, Rhs, Trans, Vpa, Vpg};

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Letters per component: one call/return pair and `ints` internals.
/// Component `i` uses `(`,`)` / `[`,`]` / `{`,`}` and internals `a b` / `x y` / `u v`.
pub fn bracket_alphabet(ints: &[usize]) -> Alphabet {
    const CALLS: [(&str, &str); 3] = [("(", ")"), ("[", "]"), ("{", "}")];
    const INTS: [[&str; 2]; 3] = [["a", "b"], ["x", "y"], ["u", "v"]];
    let mut al = Alphabet::new();
    for (i, &k) in ints.iter().enumerate() {
        let comp = i + 1;
        let (c, r) = CALLS[i];
        al.add(c, Kind::Call, comp, 0).unwrap();
        al.add(r, Kind::Ret, comp, 0).unwrap();
        for name in INTS[i].iter().take(k) {
            al.add(name, Kind::Int, comp, 0).unwrap();
        }
    }
    al
}

/// Random well-matched grammar over the letters of `comp`, with at most `max_nts` nonterminals.
/// The result is trimmed and may have an empty language.
pub fn random_vpg(rng: &mut Rng8, alphabet: &Arc<Alphabet>, comp: usize, max_nts: usize) -> Vpg {
    let comps: BTreeSet<usize> = [comp].into_iter().collect();
    let calls = alphabet.syms_of_kind(&comps, Kind::Call);
    let rets = alphabet.syms_of_kind(&comps, Kind::Ret);
    let ints = alphabet.syms_of_kind(&comps, Kind::Int);
    let mut g = Vpg::new(alphabet.clone(), comps);
    let n = rng.gen_range(1..=max_nts);
    for i in 0..n {
        g.add_nt(format!("G{comp}_{i}"));
    }
    for x in 0..n {
        let k = rng.gen_range(1..=3);
        for _ in 0..k {
            let roll = rng.gen_range(0..10);
            let rhs = if roll < 3 {
                Rhs::Eps
            } else if roll < 6 && !ints.is_empty() {
                Rhs::Int(ints[rng.gen_range(0..ints.len())], rng.gen_range(0..n))
            } else if !calls.is_empty() {
                Rhs::Call(
                    calls[rng.gen_range(0..calls.len())],
                    rng.gen_range(0..n),
                    rets[rng.gen_range(0..rets.len())],
                    rng.gen_range(0..n),
                )
            } else {
                Rhs::Eps
            };
            g.add(x, rhs).unwrap();
        }
    }
    g.starts.insert(0);
    if rng.gen_bool(0.3) && n > 1 {
        g.starts.insert(rng.gen_range(1..n));
    }
    g.trim()
}

/// Random grammar with a nonempty language containing at least one non-empty word.
pub fn random_nonempty_vpg(
    rng: &mut Rng8,
    alphabet: &Arc<Alphabet>,
    comp: usize,
    max_nts: usize,
    max_len: usize,
) -> Vpg {
    loop {
        let g = random_vpg(rng, alphabet, comp, max_nts);
        if g.enumerate(max_len).iter().any(|w| !w.is_empty()) {
            return g;
        }
    }
}

/// Random (possibly non-deterministic) automaton over the letters of `comps`.
pub fn random_vpa(
    rng: &mut Rng8,
    alphabet: &Arc<Alphabet>,
    comps: &BTreeSet<usize>,
    states: usize,
    stack: usize,
    density: f64,
) -> Vpa {
    let mut v = Vpa::new(alphabet.clone(), comps.clone());
    for i in 0..states {
        v.add_state(format!("s{i}"));
    }
    for i in 0..stack {
        v.add_stack(format!("g{i}"));
    }
    for q in 0..states {
        for a in alphabet.syms_in(comps) {
            for to in 0..states {
                if !rng.gen_bool(density) {
                    continue;
                }
                let t = match alphabet.kind(a) {
                    Kind::Int => Trans::Int { a, to },
                    Kind::Call => Trans::Call {
                        a,
                        to,
                        push: rng.gen_range(1..=stack),
                    },
                    Kind::Ret => Trans::Ret {
                        a,
                        pop: rng.gen_range(0..=stack),
                        to,
                    },
                };
                if !v.out[q].contains(&t) {
                    v.out[q].push(t);
                }
            }
        }
    }
    v.initial.insert(0);
    for q in 0..states {
        if rng.gen_bool(0.4) {
            v.finals.insert(q);
        }
    }
    v
}

/// Random word over the letters of `comps`.
pub fn random_word(rng: &mut Rng8, alphabet: &Alphabet, comps: &BTreeSet<usize>, len: usize) -> Vec<usize> {
    let letters = alphabet.syms_in(comps);
    (0..len)
        .map(|_| letters[rng.gen_range(0..letters.len())])
        .collect()
}

/// Random well-matched word over the letters of `comps` with at most `max_len` letters.
/// Needs at least one internal letter when calls exist, so every length is reachable.
pub fn random_well_matched_word(rng: &mut Rng8, alphabet: &Alphabet, comps: &BTreeSet<usize>, max_len: usize) -> Vec<usize> {
    let calls = alphabet.syms_of_kind(comps, Kind::Call);
    let rets = alphabet.syms_of_kind(comps, Kind::Ret);
    let ints = alphabet.syms_of_kind(comps, Kind::Int);
    let len = rng.gen_range(0..=max_len);
    let mut w = Vec::with_capacity(len);
    let mut open = 0usize;
    for i in 0..len {
        let left = len - i;
        let can_call = !calls.is_empty() && open + 2 <= left;
        let can_int = !ints.is_empty() && open < left;
        let choice = if open == left || (!can_call && !can_int) {
            0
        } else {
            let mut opts = Vec::new();
            if open > 0 {
                opts.push(0);
            }
            if can_call {
                opts.push(1);
            }
            if can_int {
                opts.push(2);
            }
            opts[rng.gen_range(0..opts.len())]
        };
        match choice {
            0 if open > 0 => {
                open -= 1;
                w.push(rets[rng.gen_range(0..rets.len())]);
            }
            0 => break,
            1 => {
                open += 1;
                w.push(calls[rng.gen_range(0..calls.len())]);
            }
            _ => w.push(ints[rng.gen_range(0..ints.len())]),
        }
    }
    w
}
