//! Greedy product for uniform orders under full commutativity.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::ReductionError;
use crate::orders::{is_uniform_enabled, OrderAutomaton};
use crate::vpl::ops::Interner;
use crate::vpl::{Trans, Vpa, BOTTOM};

/// Reachable state count of one product next to its size bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductStats {
    pub states: usize,
    pub part_states: Vec<usize>,
    pub order_states: usize,
    pub stack_symbols: usize,
    pub bound: u128,
}

impl ProductStats {
    pub fn within_bound(&self) -> bool {
        (self.states as u128) <= self.bound
    }
}

/// State: part states, order state, tagged top of the conceptual stack (0 is ⊥).
type Key = (Vec<usize>, usize, usize);

/// `red(P₁ ⫛ ⋯ ⫛ Pₙ)` for an order that is uniform w.r.t. the parts. Parts must be
/// normalized (homogeneous states, final states without outgoing transitions).
/// At each state only the part owning the least enabled letter moves.
pub fn optimized_product(o: &OrderAutomaton, parts: &[Vpa]) -> Result<(Vpa, ProductStats), ReductionError> {
    super::check_parts(o, parts)?;
    for p in parts {
        if (0..p.num_states()).any(|q| p.finals.contains(&q) && !p.out[q].is_empty()) {
            return Err(ReductionError::NotNormalized);
        }
    }
    if !is_uniform_enabled(o, parts) {
        return Err(ReductionError::NonUniform);
    }
    let a = &o.vpa;
    if !a.is_deterministic() || !a.check_complete() {
        return Err(ReductionError::Order(crate::orders::OrderError::Undefined));
    }
    let al = a.alphabet.clone();

    // tagged stack symbols of the parts: (part, γ) -> id, ⊥ = 0
    let mut tags: Interner<(usize, usize)> = Interner::new();
    tags.intern((usize::MAX, BOTTOM));
    for (i, p) in parts.iter().enumerate() {
        for g in 1..p.num_stack() {
            tags.intern((i, g));
        }
    }
    let a_step = |q: usize, letter: usize, pop: Option<usize>| -> Option<(usize, usize)> {
        a.out[q].iter().find_map(|t| match (*t, pop) {
            (Trans::Int { a: b, to }, None) if b == letter => Some((to, BOTTOM)),
            (Trans::Call { a: b, to, push }, None) if b == letter => Some((to, push)),
            (Trans::Ret { a: b, pop: g, to }, Some(p)) if b == letter && g == p => Some((to, BOTTOM)),
            _ => None,
        })
    };

    let mut v = Vpa::new(al.clone(), a.comps.clone());
    let mut st: Interner<Key> = Interner::new();
    // stack symbols (pushed tag, order stack symbol, previous tag); ⊥ = 0
    let mut gam: Interner<(usize, usize, usize)> = Interner::new();
    gam.intern((0, BOTTOM, 0));
    let mut by_tag: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    // states waiting for stack symbols with a given pushed tag: (state, part, transitions)
    let mut waiting: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut out: Vec<Vec<Trans>> = Vec::new();
    let mut queue = VecDeque::new();

    let mut inits: Vec<Vec<usize>> = vec![vec![]];
    for p in parts {
        inits = inits
            .into_iter()
            .flat_map(|pre| {
                p.initial.iter().map(move |&q| {
                    let mut t = pre.clone();
                    t.push(q);
                    t
                })
            })
            .collect();
    }
    for &qa in &a.initial {
        for t in &inits {
            let (id, fresh) = st.intern((t.clone(), qa, 0));
            if fresh {
                queue.push_back(id);
            }
            v.initial.insert(id);
        }
    }

    // returns of the owner from `state` popping symbol `g`
    let ret_moves = |st: &mut Interner<Key>,
                     queue: &mut VecDeque<usize>,
                     state: usize,
                     g: usize,
                     gkey: (usize, usize, usize)|
     -> Vec<Trans> {
        let (qs, qa, top) = st.keys[state].clone();
        let (i, gi) = tags.keys[top];
        let mut ts = Vec::new();
        for t in &parts[i].out[qs[i]] {
            if let Trans::Ret { a: r, pop, to } = *t {
                if pop != gi {
                    continue;
                }
                let Some((qa2, _)) = a_step(qa, r, Some(gkey.1)) else {
                    continue;
                };
                let mut q2 = qs.clone();
                q2[i] = to;
                let (id, fresh) = st.intern((q2, qa2, gkey.2));
                if fresh {
                    queue.push_back(id);
                }
                ts.push(Trans::Ret { a: r, pop: g, to: id });
            }
        }
        ts
    };

    while let Some(id) = queue.pop_front() {
        if out.len() < st.keys.len() {
            out.resize(st.keys.len(), Vec::new());
        }
        let (qs, qa, top) = st.keys[id].clone();
        let lo = &o.ord[qa];
        let (top_part, top_g) = tags.keys[top];
        let mut best: Option<(usize, usize)> = None;
        for (i, p) in parts.iter().enumerate() {
            for t in &p.out[qs[i]] {
                let enabled = match *t {
                    Trans::Ret { pop, .. } => top != 0 && top_part == i && pop == top_g,
                    _ => true,
                };
                if enabled {
                    let r = lo.rank(t.letter());
                    if best.is_none_or(|(br, _)| r < br) {
                        best = Some((r, i));
                    }
                }
            }
        }
        let Some((_, i)) = best else {
            continue;
        };
        let mut ts = Vec::new();
        let mut returns = false;
        for t in &parts[i].out[qs[i]] {
            match *t {
                Trans::Int { a: x, to } => {
                    let Some((qa2, _)) = a_step(qa, x, None) else { continue };
                    let mut q2 = qs.clone();
                    q2[i] = to;
                    let (nid, fresh) = st.intern((q2, qa2, top));
                    if fresh {
                        queue.push_back(nid);
                    }
                    ts.push(Trans::Int { a: x, to: nid });
                }
                Trans::Call { a: c, to, push } => {
                    let Some((qa2, ga)) = a_step(qa, c, None) else { continue };
                    let tag = tags.ids[&(i, push)];
                    let (g, gfresh) = gam.intern((tag, ga, top));
                    let mut q2 = qs.clone();
                    q2[i] = to;
                    let (nid, fresh) = st.intern((q2, qa2, tag));
                    if fresh {
                        queue.push_back(nid);
                    }
                    ts.push(Trans::Call { a: c, to: nid, push: g });
                    if gfresh {
                        by_tag.entry(tag).or_default().push(g);
                        for &w in waiting.get(&tag).map(|v| v.as_slice()).unwrap_or(&[]) {
                            let extra = ret_moves(&mut st, &mut queue, w, g, gam.keys[g]);
                            if out.len() < st.keys.len() {
                                out.resize(st.keys.len(), Vec::new());
                            }
                            out[w].extend(extra);
                        }
                    }
                }
                Trans::Ret { .. } => returns = true,
            }
        }
        if returns && top != 0 && top_part == i {
            waiting.entry(top).or_default().push(id);
            for &g in by_tag.get(&top).map(|v| v.as_slice()).unwrap_or(&[]) {
                ts.extend(ret_moves(&mut st, &mut queue, id, g, gam.keys[g]));
            }
        }
        if out.len() < st.keys.len() {
            out.resize(st.keys.len(), Vec::new());
        }
        out[id].extend(ts);
    }
    out.resize(st.keys.len(), Vec::new());

    for (qs, qa, top) in &st.keys {
        let names: Vec<&str> = qs.iter().enumerate().map(|(i, &q)| parts[i].states[q].as_str()).collect();
        let top_name = if *top == 0 {
            "⊥".to_string()
        } else {
            let (i, g) = tags.keys[*top];
            format!("{}:{}", i + 1, parts[i].stack[g])
        };
        let q = v.add_state(format!("({})|{}|{}", names.join(","), a.states[*qa], top_name));
        if qs.iter().enumerate().all(|(i, q)| parts[i].finals.contains(q)) {
            v.finals.insert(q);
        }
    }
    for &(tag, ga, prev) in gam.keys.iter().skip(1) {
        let show = |t: usize| {
            if t == 0 {
                "⊥".to_string()
            } else {
                let (i, g) = tags.keys[t];
                format!("{}:{}", i + 1, parts[i].stack[g])
            }
        };
        v.add_stack(format!("<{},{},{}>", show(tag), a.stack[ga], show(prev)));
    }
    v.out = out;
    for ts in &mut v.out {
        ts.sort();
        ts.dedup();
    }

    let part_states: Vec<usize> = parts.iter().map(|p| p.num_states()).collect();
    let stack_symbols = tags.keys.len();
    let bound = part_states.iter().map(|&x| x as u128).product::<u128>()
        * a.num_states() as u128
        * stack_symbols as u128;
    let stats = ProductStats {
        states: v.num_states(),
        part_states,
        order_states: a.num_states(),
        stack_symbols,
        bound,
    };
    if !stats.within_bound() {
        return Err(ReductionError::BoundViolated(stats.states, stats.bound));
    }
    Ok((v, stats))
}
