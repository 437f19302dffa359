use std::collections::BTreeSet;
use std::sync::Arc;

use super::{check_groups, group_index, LinearOrder, OrderAutomaton, OrderError};
use crate::vpl::{Alphabet, Kind, Sym, Trans, Vpa};

/// Builds a complete deterministic automaton that pushes its current state on every call.
/// `ret(q, popped, r)` receives `None` when the bottom symbol is popped.
fn weakly_hierarchical(
    alphabet: &Arc<Alphabet>,
    comps: &BTreeSet<usize>,
    labels: Vec<String>,
    init: usize,
    int: impl Fn(usize, Sym) -> usize,
    call: impl Fn(usize, Sym) -> usize,
    ret: impl Fn(usize, Option<usize>, Sym) -> usize,
) -> Vpa {
    let mut v = Vpa::new(alphabet.clone(), comps.clone());
    let n = labels.len();
    for l in &labels {
        let q = v.add_state(l.clone());
        v.finals.insert(q);
    }
    for l in &labels {
        v.add_stack(l.clone());
    }
    v.initial.insert(init);
    let letters = v.letters();
    for q in 0..n {
        for &a in &letters {
            match alphabet.kind(a) {
                Kind::Int => v.out[q].push(Trans::Int { a, to: int(q, a) }),
                Kind::Call => v.out[q].push(Trans::Call {
                    a,
                    to: call(q, a),
                    push: q + 1,
                }),
                Kind::Ret => {
                    v.out[q].push(Trans::Ret {
                        a,
                        pop: 0,
                        to: ret(q, None, a),
                    });
                    for p in 0..n {
                        v.out[q].push(Trans::Ret {
                            a,
                            pop: p + 1,
                            to: ret(q, Some(p), a),
                        });
                    }
                }
            }
        }
    }
    v.complete = true;
    v
}

/// Letters of group `g` with the given kinds, ascending by id.
fn block(alphabet: &Alphabet, group: &BTreeSet<usize>, kinds: &[Kind]) -> Vec<Sym> {
    alphabet
        .syms()
        .filter(|&s| group.contains(&alphabet.component(s)) && kinds.contains(&alphabet.kind(s)))
        .collect()
}

fn returns_by_group(alphabet: &Alphabet, groups: &[BTreeSet<usize>]) -> Vec<Sym> {
    groups
        .iter()
        .flat_map(|g| block(alphabet, g, &[Kind::Ret]))
        .collect()
}

/// Σ₁ < ⋯ < Σₙ at a single state.
pub fn concat_order(
    alphabet: &Arc<Alphabet>,
    groups: &[BTreeSet<usize>],
) -> Result<OrderAutomaton, OrderError> {
    let comps = check_groups(groups)?;
    let vpa = weakly_hierarchical(alphabet, &comps, vec!["*".into()], 0, |_, _| 0, |_, _| 0, |_, _, _| 0);
    let seq: Vec<Sym> = groups
        .iter()
        .flat_map(|g| block(alphabet, g, &[Kind::Call, Kind::Ret, Kind::Int]))
        .collect();
    Ok(OrderAutomaton {
        vpa,
        ord: vec![LinearOrder::from_sequence(&seq, alphabet.len())],
        groups: groups.to_vec(),
    })
}

/// Internals and calls of group 1 < ⋯ < internals and calls of group n < all returns.
pub fn nested_concat_order(
    alphabet: &Arc<Alphabet>,
    groups: &[BTreeSet<usize>],
) -> Result<OrderAutomaton, OrderError> {
    let comps = check_groups(groups)?;
    let vpa = weakly_hierarchical(alphabet, &comps, vec!["*".into()], 0, |_, _| 0, |_, _| 0, |_, _, _| 0);
    let mut seq: Vec<Sym> = groups
        .iter()
        .flat_map(|g| block(alphabet, g, &[Kind::Call, Kind::Int]))
        .collect();
    seq.extend(returns_by_group(alphabet, groups));
    Ok(OrderAutomaton {
        vpa,
        ord: vec![LinearOrder::from_sequence(&seq, alphabet.len())],
        groups: groups.to_vec(),
    })
}

/// Modulo decrement of the helper vector.
pub fn dec(s: &[usize], t: &[usize]) -> Vec<usize> {
    match t.iter().position(|&x| x > 0) {
        None => {
            let mut r = s.to_vec();
            r[0] -= 1;
            r
        }
        Some(i) => {
            let mut r = vec![0; i];
            r.push(t[i] - 1);
            r.extend_from_slice(&t[i + 1..]);
            r
        }
    }
}

/// The s⃗-lockstep order: states are the helper vectors plus a state ⋆.
pub fn lockstep_order(
    alphabet: &Arc<Alphabet>,
    groups: &[BTreeSet<usize>],
    speeds: &[usize],
) -> Result<OrderAutomaton, OrderError> {
    let comps = check_groups(groups)?;
    let n = groups.len();
    if speeds.len() != n || speeds.iter().any(|&x| x == 0) {
        return Err(OrderError::BadSpeed(speeds.to_vec(), n));
    }
    let mut vecs: Vec<Vec<usize>> = vec![vec![]];
    for &si in speeds {
        let mut next = Vec::new();
        for v in &vecs {
            for x in 0..=si {
                let mut w = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        vecs = next;
    }
    let star = vecs.len();
    let index = |t: &[usize]| vecs.iter().position(|v| v == t).unwrap();
    let mut labels: Vec<String> = vecs
        .iter()
        .map(|v| format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    labels.push("*".into());
    let grp = |a: Sym| group_index(groups, alphabet.component(a));
    let call = |q: usize, c: Sym| -> usize {
        if q == star {
            return star;
        }
        let t = &vecs[q];
        let i = grp(c);
        let mut r = vec![0; i];
        if t[i] == 0 {
            r.push(speeds[i] - 1);
            r.extend_from_slice(&speeds[i + 1..]);
        } else {
            r.push(t[i] - 1);
            r.extend_from_slice(&t[i + 1..]);
        }
        index(&r)
    };
    let ret = |_q: usize, popped: Option<usize>, r: Sym| -> usize {
        match popped {
            Some(p) if p != star && vecs[p][grp(r)] == 0 => p,
            _ => star,
        }
    };
    let vpa = weakly_hierarchical(alphabet, &comps, labels, index(&vec![0; n]), |q, _| q, call, ret);
    let rets = returns_by_group(alphabet, groups);
    let mut ord = Vec::new();
    for t in &vecs {
        let j = t.iter().position(|&x| x > 0).unwrap_or(0);
        let mut seq: Vec<Sym> = groups
            .iter()
            .flat_map(|g| block(alphabet, g, &[Kind::Int]))
            .collect();
        for k in (j..n).chain(0..j) {
            seq.extend(block(alphabet, &groups[k], &[Kind::Call]));
        }
        seq.extend(rets.iter().copied());
        ord.push(LinearOrder::from_sequence(&seq, alphabet.len()));
    }
    let seq: Vec<Sym> = groups
        .iter()
        .flat_map(|g| block(alphabet, g, &[Kind::Call, Kind::Ret, Kind::Int]))
        .collect();
    ord.push(LinearOrder::from_sequence(&seq, alphabet.len()));
    Ok(OrderAutomaton {
        vpa,
        ord,
        groups: groups.to_vec(),
    })
}

/// Two-group round-robin order. The state records the group of the last pending call (0 for none)
/// and whether that call was the last letter read. Internals of a group sit just before its calls.
pub fn roundrobin_order(
    alphabet: &Arc<Alphabet>,
    groups: &[BTreeSet<usize>],
) -> Result<OrderAutomaton, OrderError> {
    let comps = check_groups(groups)?;
    if groups.len() != 2 {
        return Err(OrderError::RoundRobinArity(groups.len()));
    }
    // states: (k, fresh) for k in 0..=2, encoded as 2k + fresh
    let labels: Vec<String> = (0..6)
        .map(|q| format!("({},{})", q / 2, if q % 2 == 1 { "fresh" } else { "seen" }))
        .collect();
    let grp = |a: Sym| group_index(groups, alphabet.component(a));
    let int = |q: usize, _a: Sym| (q / 2) * 2;
    let call = |_q: usize, c: Sym| (grp(c) + 1) * 2 + 1;
    let ret = |_q: usize, popped: Option<usize>, _r: Sym| match popped {
        Some(p) => (p / 2) * 2,
        None => 0,
    };
    let vpa = weakly_hierarchical(alphabet, &comps, labels, 0, int, call, ret);
    let part = |g: usize, kinds: &[Kind]| block(alphabet, &groups[g], kinds);
    let (ints1, calls1, rets1) = (part(0, &[Kind::Int]), part(0, &[Kind::Call]), part(0, &[Kind::Ret]));
    let (ints2, calls2, rets2) = (part(1, &[Kind::Int]), part(1, &[Kind::Call]), part(1, &[Kind::Ret]));
    let cat = |parts: &[&Vec<Sym>]| -> LinearOrder {
        let seq: Vec<Sym> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        LinearOrder::from_sequence(&seq, alphabet.len())
    };
    let default = cat(&[&ints1, &calls1, &ints2, &calls2, &rets2, &rets1]);
    let ord = (0..6)
        .map(|q| match (q / 2, q % 2 == 1) {
            (1, true) => cat(&[&ints2, &calls2, &ints1, &calls1, &rets1, &rets2]),
            (1, false) => cat(&[&rets1, &ints1, &calls1, &ints2, &calls2, &rets2]),
            (2, false) => cat(&[&rets2, &ints2, &calls2, &ints1, &calls1, &rets1]),
            _ => default.clone(),
        })
        .collect();
    Ok(OrderAutomaton {
        vpa,
        ord,
        groups: groups.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::{singleton_groups, CloOrdering};

    fn parens() -> Arc<Alphabet> {
        Arc::new(
            Alphabet::from_spec(&[
                ("(", Kind::Call, 1),
                (")", Kind::Ret, 1),
                ("[", Kind::Call, 2),
                ("]", Kind::Ret, 2),
            ])
            .unwrap(),
        )
    }

    fn show(o: &OrderAutomaton, ctx: &str) -> String {
        let al = o.alphabet().clone();
        let w = al.chars(ctx).unwrap();
        o.order_at(&w).unwrap().show(&al, &o.vpa.comps)
    }

    #[test]
    fn roundrobin_table() {
        let al = parens();
        let o = roundrobin_order(&al, &singleton_groups(2)).unwrap();
        assert!(o.vpa.check_complete() && o.vpa.is_deterministic());
        assert_eq!(show(&o, "[]("), "[ < ( < ) < ]");
        assert_eq!(show(&o, ""), "( < [ < ] < )");
        assert_eq!(show(&o, "(()"), ") < ( < [ < ]");
        assert_eq!(show(&o, "([]"), ") < ( < [ < ]");
        assert_eq!(show(&o, "[[]"), "] < [ < ( < )");
        assert_eq!(show(&o, "(["), "( < [ < ] < )");
    }

    #[test]
    fn roundrobin_prefers_alternation() {
        let al = parens();
        let o = roundrobin_order(&al, &singleton_groups(2)).unwrap();
        let alpha = al.chars("([()])").unwrap();
        let beta = al.chars("(([]))").unwrap();
        let gamma = al.chars("([(]))").unwrap();
        assert_eq!(o.clo_compare(&alpha, &beta), CloOrdering::Less);
        assert_eq!(o.clo_compare(&alpha, &gamma), CloOrdering::Less);
        assert_eq!(o.clo_compare(&alpha, &alpha), CloOrdering::Equal);
        assert_eq!(o.clo_compare(&beta, &alpha), CloOrdering::Greater);
    }

    #[test]
    fn single_state_orders() {
        let al = parens();
        let c = concat_order(&al, &singleton_groups(2)).unwrap();
        let nc = nested_concat_order(&al, &singleton_groups(2)).unwrap();
        assert_eq!(nc.num_states(), 1);
        assert_eq!(c.num_states(), 1);
        assert_eq!(show(&c, "(["), "( < ) < [ < ]");
        assert_eq!(show(&nc, "(["), "( < [ < ) < ]");
        assert_eq!(show(&nc, ""), show(&nc, "((]"));
    }

    #[test]
    fn dec_cases() {
        assert_eq!(dec(&[2, 1], &[0, 0]), vec![1, 1]);
        assert_eq!(dec(&[2, 1], &[1, 1]), vec![0, 1]);
        assert_eq!(dec(&[2, 1], &[0, 1]), vec![0, 0]);
    }

    #[test]
    fn lockstep_transitions() {
        let al = parens();
        let o = lockstep_order(&al, &singleton_groups(2), &[1, 1]).unwrap();
        assert!(o.vpa.check_complete() && o.vpa.is_deterministic());
        let st = |w: &str| o.vpa.states[o.state_at(&al.chars(w).unwrap()).unwrap()].clone();
        assert_eq!(st(""), "(0,0)");
        assert_eq!(st("("), "(0,1)");
        assert_eq!(st("(["), "(0,0)");
        assert_eq!(st("([]"), "*");
        assert_eq!(st("([])"), "(0,0)");
        assert_eq!(show(&o, "("), "[ < ( < ) < ]");
        assert_eq!(show(&o, ""), "( < [ < ) < ]");
        assert_eq!(show(&o, "([]"), "( < ) < [ < ]");
        assert!(lockstep_order(&al, &singleton_groups(2), &[1, 0]).is_err());
        assert!(lockstep_order(&al, &singleton_groups(2), &[1]).is_err());
    }

    #[test]
    fn constant_orders_ignore_context() {
        let al = parens();
        let o = concat_order(&al, &singleton_groups(2)).unwrap();
        for w in ["", "(", "([", "([])", "]]"] {
            assert_eq!(show(&o, w), "( < ) < [ < ]");
        }
    }

    #[test]
    fn order_at_is_deterministic() {
        let al = parens();
        let o = lockstep_order(&al, &singleton_groups(2), &[2, 1]).unwrap();
        let w = al.chars("(([").unwrap();
        assert_eq!(o.order_at(&w).unwrap(), o.order_at(&w).unwrap());
    }
}
