//! Lex reductions through sleep sets.

use std::collections::VecDeque;

use super::ReductionError;
use crate::orders::{coherence_repair, OrderAutomaton};
use crate::vpl::ops::Interner;
use crate::vpl::{vpa_intersect, wn_shuffle, Trans, Vpa};

/// Automaton for the lex-minimal words of `Σ̃*` under `o`. A state pairs an order state with
/// the set of letters that may not be read next; only reachable states are built.
pub fn sleepset_vpa(o: &OrderAutomaton) -> Result<Vpa, ReductionError> {
    let al = o.alphabet().clone();
    if al.len() > 128 {
        return Err(ReductionError::TooManyLetters(al.len()));
    }
    let letters = o.vpa.letters();
    let mut v = Vpa::new(al.clone(), o.vpa.comps.clone());
    v.stack = o.vpa.stack.clone();
    let mut st: Interner<(u128, usize)> = Interner::new();
    let mut queue = VecDeque::new();
    for &q in &o.vpa.initial {
        let (id, fresh) = st.intern((0, q));
        if fresh {
            queue.push_back(id);
        }
        v.initial.insert(id);
    }
    let mut out: Vec<Vec<Trans>> = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (sleep, s) = st.keys[id];
        let lo = &o.ord[s];
        let mut ts = Vec::new();
        for t in &o.vpa.out[s] {
            let a = t.letter();
            if sleep >> a & 1 == 1 {
                continue;
            }
            let ga = o.group_of(a);
            let mut next: u128 = 0;
            for &b in &letters {
                if o.group_of(b) != ga && (lo.less(b, a) || sleep >> b & 1 == 1) {
                    next |= 1 << b;
                }
            }
            let (to, fresh) = st.intern((next, t.target()));
            if fresh {
                queue.push_back(to);
            }
            ts.push(match *t {
                Trans::Int { a, .. } => Trans::Int { a, to },
                Trans::Call { a, push, .. } => Trans::Call { a, to, push },
                Trans::Ret { a, pop, .. } => Trans::Ret { a, pop, to },
            });
        }
        if out.len() <= id {
            out.resize(id + 1, Vec::new());
        }
        out[id] = ts;
    }
    out.resize(st.keys.len(), Vec::new());
    for &(sleep, s) in &st.keys {
        let names: Vec<&str> = letters
            .iter()
            .filter(|&&b| sleep >> b & 1 == 1)
            .map(|&b| al.name(b))
            .collect();
        let q = v.add_state(format!("{}{{{}}}", o.vpa.states[s], names.join(",")));
        v.finals.insert(q);
    }
    v.out = out;
    Ok(v)
}

/// `red(P₁ ⫛ ⋯ ⫛ Pₙ)` as the sleep-set automaton of the repaired order intersected with the
/// well-nested shuffle. Part `i` must read exactly the components of group `i`.
pub fn generic_lex_reduction(o: &OrderAutomaton, parts: &[Vpa]) -> Result<Vpa, ReductionError> {
    super::check_parts(o, parts)?;
    let sleep = sleepset_vpa(&coherence_repair(o))?;
    let shuffle = wn_shuffle(parts)?;
    Ok(vpa_intersect(&sleep, &shuffle)?.trim_states())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_words, ref_reduction};
    use crate::orders::{concat_order, roundrobin_order, singleton_groups, LinearOrder};
    use crate::vpl::{Alphabet, Kind};
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn ints() -> Arc<Alphabet> {
        Arc::new(Alphabet::from_spec(&[("a", Kind::Int, 1), ("b", Kind::Int, 2)]).unwrap())
    }

    #[test]
    fn constant_order_blocks_dominated_swaps() {
        let al = ints();
        let o = concat_order(&al, &singleton_groups(2)).unwrap();
        let s = sleepset_vpa(&o).unwrap();
        let comps: BTreeSet<usize> = [1, 2].into_iter().collect();
        for w in all_words(&al, &comps, 6) {
            let has_ba = w.windows(2).any(|p| p == [1, 0]);
            assert_eq!(s.accepts(&w), !has_ba, "{}", al.show(&w));
        }
    }

    #[test]
    fn roundrobin_minimal_word() {
        let al = Arc::new(
            Alphabet::from_spec(&[
                ("(", Kind::Call, 1),
                (")", Kind::Ret, 1),
                ("[", Kind::Call, 2),
                ("]", Kind::Ret, 2),
            ])
            .unwrap(),
        );
        let o = roundrobin_order(&al, &singleton_groups(2)).unwrap();
        let s = sleepset_vpa(&o).unwrap();
        assert!(s.accepts(&al.chars("([()])").unwrap()));
        assert!(!s.accepts(&al.chars("(([]))").unwrap()));
    }

    #[test]
    fn sleepset_matches_oracle_on_all_words() {
        let al = Arc::new(
            Alphabet::from_spec(&[
                ("(", Kind::Call, 1),
                (")", Kind::Ret, 1),
                ("a", Kind::Int, 1),
                ("[", Kind::Call, 2),
                ("]", Kind::Ret, 2),
                ("x", Kind::Int, 2),
            ])
            .unwrap(),
        );
        let comps: BTreeSet<usize> = [1, 2].into_iter().collect();
        let words = all_words(&al, &comps, 6);
        for o in [
            roundrobin_order(&al, &singleton_groups(2)).unwrap(),
            crate::orders::lockstep_order(&al, &singleton_groups(2), &[1, 1]).unwrap(),
        ] {
            let s = sleepset_vpa(&o).unwrap();
            let want = ref_reduction(&o, &words, false, None);
            let got: BTreeSet<_> = words.iter().filter(|w| s.accepts(w)).cloned().collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn single_component_is_unchanged() {
        let al = ints();
        let g: Vec<BTreeSet<usize>> = vec![[1, 2].into_iter().collect()];
        let mut o = concat_order(&al, &g).unwrap();
        o.ord[0] = LinearOrder::from_sequence(&[1, 0], 2);
        let s = sleepset_vpa(&o).unwrap();
        let comps: BTreeSet<usize> = [1, 2].into_iter().collect();
        assert!(all_words(&al, &comps, 5).iter().all(|w| s.accepts(w)));
    }
}
