use std::collections::{BTreeMap, BTreeSet};

use super::{group_index, LinearOrder, OrderAutomaton, OrderError};
use crate::vpl::{Kind, Sym, Trans, Vpa, BOTTOM};

/// Coherent version of `o`: while the last pending call belongs to group k, returns of the
/// other groups are moved behind every other letter (keeping their relative order).
pub fn coherence_repair(o: &OrderAutomaton) -> OrderAutomaton {
    let al = o.vpa.alphabet.clone();
    let n = o.groups.len();
    let ns = o.vpa.num_states();
    let ng = o.vpa.num_stack();
    let sid = |s: usize, k: usize| s * (n + 1) + k;
    // stack symbol (γ, k) for γ != ⊥
    let gid = |g: usize, k: usize| 1 + (g - 1) * (n + 1) + k;
    let mut v = Vpa::new(al.clone(), o.vpa.comps.clone());
    for s in 0..ns {
        for k in 0..=n {
            let q = v.add_state(format!("{}|{}", o.vpa.states[s], k));
            v.finals.insert(q);
        }
    }
    for g in 1..ng {
        for k in 0..=n {
            v.add_stack(format!("{}|{}", o.vpa.stack[g], k));
        }
    }
    for &s in &o.vpa.initial {
        v.initial.insert(sid(s, 0));
    }
    for s in 0..ns {
        for k in 0..=n {
            let q = sid(s, k);
            for t in &o.vpa.out[s] {
                let nt = match *t {
                    Trans::Int { a, to } => Trans::Int { a, to: sid(to, k) },
                    Trans::Call { a, to, push } => Trans::Call {
                        a,
                        to: sid(to, o.group_of(a) + 1),
                        push: gid(push, k),
                    },
                    Trans::Ret { a, pop, to } => {
                        if pop == BOTTOM {
                            Trans::Ret { a, pop: BOTTOM, to: sid(to, 0) }
                        } else {
                            for kp in 0..=n {
                                v.out[q].push(Trans::Ret {
                                    a,
                                    pop: gid(pop, kp),
                                    to: sid(to, kp),
                                });
                            }
                            continue;
                        }
                    }
                };
                v.out[q].push(nt);
            }
        }
    }
    v.complete = true;
    let mut ord = Vec::new();
    for s in 0..ns {
        for k in 0..=n {
            if k == 0 {
                ord.push(o.ord[s].clone());
                continue;
            }
            let seq = o.ord[s].sequence();
            let demoted = |a: Sym| al.kind(a) == Kind::Ret && o.group_of(a) != k - 1;
            let mut re: Vec<Sym> = seq.iter().copied().filter(|&a| !demoted(a)).collect();
            re.extend(seq.iter().copied().filter(|&a| demoted(a)));
            ord.push(LinearOrder::from_sequence(&re, al.len()));
        }
    }
    OrderAutomaton {
        vpa: v,
        ord,
        groups: o.groups.clone(),
    }
}

/// Result of [`exclude_letters`]: the new order and the letter map `f`
/// (identity except on excluded letters, which map to an internal of their component).
#[derive(Clone, Debug)]
pub struct Excluded {
    pub order: OrderAutomaton,
    pub image: Vec<Sym>,
}

/// Treats the `excluded` calls and returns like internals when scheduling.
/// `pairs` lists the call/return pairs that can match in the component languages.
pub fn exclude_letters(
    o: &OrderAutomaton,
    excluded: &BTreeSet<Sym>,
    pairs: &BTreeSet<(Sym, Sym)>,
) -> Result<Excluded, OrderError> {
    let al = o.vpa.alphabet.clone();
    for &x in excluded {
        if al.kind(x) == Kind::Int {
            return Err(OrderError::ExcludeInternal(al.name(x).to_string()));
        }
    }
    for &(c, r) in pairs {
        if excluded.contains(&c) != excluded.contains(&r) {
            return Err(OrderError::ExcludeUnmatched(
                al.name(c).to_string(),
                al.name(r).to_string(),
            ));
        }
    }
    let mut image: Vec<Sym> = al.syms().collect();
    for &x in excluded {
        let comp = al.component(x);
        let stand_in = al
            .syms()
            .find(|&s| al.component(s) == comp && al.kind(s) == Kind::Int)
            .ok_or(OrderError::NoInternalImage(comp))?;
        image[x] = stand_in;
    }
    let mut v = o.vpa.clone();
    let star = v.add_stack("*");
    let int_target = |q: usize, a: Sym| -> usize {
        o.vpa.out[q]
            .iter()
            .find_map(|t| match *t {
                Trans::Int { a: b, to } if b == a => Some(to),
                _ => None,
            })
            .unwrap_or(q)
    };
    let bottom_target = |q: usize, a: Sym| -> usize {
        o.vpa.out[q]
            .iter()
            .find_map(|t| match *t {
                Trans::Ret { a: b, pop, to } if b == a && pop == BOTTOM => Some(to),
                _ => None,
            })
            .unwrap_or(q)
    };
    for q in 0..v.num_states() {
        let mut ts: Vec<Trans> = Vec::new();
        for t in &o.vpa.out[q] {
            let a = t.letter();
            if !excluded.contains(&a) {
                ts.push(*t);
            }
        }
        for a in v.letters() {
            match al.kind(a) {
                Kind::Call if excluded.contains(&a) => ts.push(Trans::Call {
                    a,
                    to: int_target(q, image[a]),
                    push: star,
                }),
                Kind::Ret if excluded.contains(&a) => {
                    for g in 0..v.num_stack() {
                        ts.push(Trans::Ret {
                            a,
                            pop: g,
                            to: int_target(q, image[a]),
                        });
                    }
                }
                Kind::Ret => ts.push(Trans::Ret {
                    a,
                    pop: star,
                    to: bottom_target(q, a),
                }),
                _ => {}
            }
        }
        v.out[q] = ts;
    }
    v.complete = true;
    let ord = o
        .ord
        .iter()
        .map(|lo| {
            let mut seq: Vec<Sym> = al.syms().collect();
            seq.sort_by_key(|&a| (lo.rank(image[a]), !excluded.contains(&a), a));
            LinearOrder::from_sequence(&seq, al.len())
        })
        .collect();
    Ok(Excluded {
        order: OrderAutomaton {
            vpa: v,
            ord,
            groups: o.groups.clone(),
        },
        image,
    })
}

fn consistent(o: &LinearOrder, a: &BTreeSet<Sym>, b: &BTreeSet<Sym>) -> bool {
    if a.is_empty() || b.is_empty() {
        return true;
    }
    let (amin, amax) = (
        a.iter().map(|&s| o.rank(s)).min().unwrap(),
        a.iter().map(|&s| o.rank(s)).max().unwrap(),
    );
    let (bmin, bmax) = (
        b.iter().map(|&s| o.rank(s)).min().unwrap(),
        b.iter().map(|&s| o.rank(s)).max().unwrap(),
    );
    amax < bmin || bmax < amin
}

fn check_pairs(o: &OrderAutomaton, sets: &[Vec<BTreeSet<Sym>>]) -> bool {
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            for a in &sets[i] {
                for b in &sets[j] {
                    if !o.ord.iter().all(|lo| consistent(lo, a, b)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// For all order states and state pairs from different components, outgoing letters of one
/// state all rank below the outgoing letters of the other.
pub fn is_uniform(o: &OrderAutomaton, parts: &[Vpa]) -> bool {
    let sets: Vec<Vec<BTreeSet<Sym>>> = parts
        .iter()
        .map(|p| (0..p.num_states()).map(|q| p.outgoing_letters(q)).collect())
        .collect();
    check_pairs(o, &sets)
}

/// Like [`is_uniform`], but compares only letters that can be enabled together:
/// returns are grouped by the stack symbol they pop, since only one top is visible at a time.
pub fn is_uniform_enabled(o: &OrderAutomaton, parts: &[Vpa]) -> bool {
    let sets: Vec<Vec<BTreeSet<Sym>>> = parts
        .iter()
        .map(|p| {
            let mut out = Vec::new();
            for q in 0..p.num_states() {
                let mut plain = BTreeSet::new();
                let mut by_pop: BTreeMap<usize, BTreeSet<Sym>> = BTreeMap::new();
                for t in &p.out[q] {
                    match *t {
                        Trans::Ret { a, pop, .. } => {
                            by_pop.entry(pop).or_default().insert(a);
                        }
                        _ => {
                            plain.insert(t.letter());
                        }
                    }
                }
                for rs in by_pop.values() {
                    out.push(plain.union(rs).copied().collect());
                }
                out.push(plain);
            }
            out
        })
        .collect();
    check_pairs(o, &sets)
}

/// Coherence, checked literally over reachable (order state, last pending group) pairs:
/// letters of the group owning the last pending call precede returns of other groups.
pub fn is_coherent(o: &OrderAutomaton, contexts: &[Vec<Sym>]) -> bool {
    let al = o.vpa.alphabet.clone();
    contexts.iter().all(|u| {
        let mut stack = Vec::new();
        for &a in u {
            match al.kind(a) {
                Kind::Call => stack.push(a),
                Kind::Ret => {
                    stack.pop();
                }
                Kind::Int => {}
            }
        }
        let Some(&last) = stack.last() else {
            return true;
        };
        let k = group_index(&o.groups, al.component(last));
        let lo = match o.order_at(u) {
            Ok(lo) => lo,
            Err(_) => return false,
        };
        let mine: Vec<Sym> = al
            .syms()
            .filter(|&s| group_index(&o.groups, al.component(s)) == k)
            .collect();
        let others: Vec<Sym> = al
            .syms()
            .filter(|&s| {
                al.kind(s) == Kind::Ret && {
                    let g = group_index(&o.groups, al.component(s));
                    g != k && g != usize::MAX
                }
            })
            .collect();
        mine.iter().all(|&a| others.iter().all(|&r| lo.less(a, r)))
    })
}
