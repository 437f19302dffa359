use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

use super::{comps_vec, Rhs, Trans, Vpa, Vpg, VplError, BOTTOM};

/// Dense interning of product states or stack symbols.
pub(crate) struct Interner<K> {
    pub ids: HashMap<K, usize>,
    pub keys: Vec<K>,
}

impl<K: Clone + Eq + Hash> Interner<K> {
    pub fn new() -> Self {
        Interner {
            ids: HashMap::new(),
            keys: Vec::new(),
        }
    }

    /// Returns the id and whether the key is new.
    pub fn intern(&mut self, k: K) -> (usize, bool) {
        if let Some(&i) = self.ids.get(&k) {
            return (i, false);
        }
        let i = self.keys.len();
        self.keys.push(k.clone());
        self.ids.insert(k, i);
        (i, true)
    }
}

fn same_alphabet(a: &Vpa, b: &Vpa) -> bool {
    Arc::ptr_eq(&a.alphabet, &b.alphabet) || a.alphabet == b.alphabet
}

/// Well-nested shuffle of automata over disjoint component sets.
/// Only the reachable part of the product is built.
pub fn wn_shuffle(parts: &[Vpa]) -> Result<Vpa, VplError> {
    let first = parts
        .first()
        .ok_or_else(|| VplError::Invalid("shuffle of zero automata".into()))?;
    let mut comps = BTreeSet::new();
    for p in parts {
        if !same_alphabet(first, p) {
            return Err(VplError::AlphabetMismatch);
        }
        let overlap: Vec<usize> = comps.intersection(&p.comps).copied().collect();
        if !overlap.is_empty() {
            return Err(VplError::OverlappingComponents(overlap));
        }
        comps.extend(p.comps.iter().copied());
    }
    let al = first.alphabet.clone();
    let mut v = Vpa::new(al.clone(), comps);
    // stack symbol (i, γ) for γ != ⊥ of part i
    let mut gam: Interner<(usize, usize)> = Interner::new();
    gam.intern((usize::MAX, BOTTOM));
    let mut st: Interner<Vec<usize>> = Interner::new();
    let mut queue = VecDeque::new();
    let mut inits: Vec<Vec<usize>> = vec![vec![]];
    for p in parts {
        let mut next = Vec::new();
        for pre in &inits {
            for &q in &p.initial {
                let mut t = pre.clone();
                t.push(q);
                next.push(t);
            }
        }
        inits = next;
    }
    for t in inits {
        let (id, fresh) = st.intern(t);
        if fresh {
            queue.push_back(id);
        }
        v.initial.insert(id);
    }
    let mut out: Vec<Vec<Trans>> = Vec::new();
    while let Some(id) = queue.pop_front() {
        let tuple = st.keys[id].clone();
        let mut ts = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            for t in &p.out[tuple[i]] {
                let mut nt = tuple.clone();
                nt[i] = t.target();
                let (to, fresh) = st.intern(nt);
                if fresh {
                    queue.push_back(to);
                }
                ts.push(match *t {
                    Trans::Int { a, .. } => Trans::Int { a, to },
                    Trans::Call { a, push, .. } => Trans::Call {
                        a,
                        to,
                        push: gam.intern((i, push)).0,
                    },
                    Trans::Ret { a, pop, .. } => {
                        let pop = if pop == BOTTOM {
                            BOTTOM
                        } else {
                            gam.intern((i, pop)).0
                        };
                        Trans::Ret { a, pop, to }
                    }
                });
            }
        }
        if out.len() <= id {
            out.resize(id + 1, Vec::new());
        }
        out[id] = ts;
    }
    out.resize(st.keys.len(), Vec::new());
    for (id, tuple) in st.keys.iter().enumerate() {
        let label: Vec<&str> = tuple
            .iter()
            .enumerate()
            .map(|(i, &q)| parts[i].states[q].as_str())
            .collect();
        v.add_state(format!("({})", label.join(",")));
        if tuple
            .iter()
            .enumerate()
            .all(|(i, q)| parts[i].finals.contains(q))
        {
            v.finals.insert(id);
        }
    }
    v.out = out;
    for (i, g) in gam.keys.iter().skip(1) {
        v.add_stack(format!("{}:{}", i + 1, parts[*i].stack[*g]));
    }
    v.complete = false;
    Ok(v)
}

/// Product automaton for `L(A) ∩ L(B)`; paired stack symbols are interned, (⊥,⊥) is ⊥.
pub fn vpa_intersect(a: &Vpa, b: &Vpa) -> Result<Vpa, VplError> {
    if !same_alphabet(a, b) {
        return Err(VplError::AlphabetMismatch);
    }
    if a.comps != b.comps {
        return Err(VplError::ComponentMismatch(comps_vec(&a.comps), comps_vec(&b.comps)));
    }
    let mut v = Vpa::new(a.alphabet.clone(), a.comps.clone());
    let mut gam: Interner<(usize, usize)> = Interner::new();
    gam.intern((BOTTOM, BOTTOM));
    let mut st: Interner<(usize, usize)> = Interner::new();
    let mut queue = VecDeque::new();
    for &p in &a.initial {
        for &q in &b.initial {
            let (id, fresh) = st.intern((p, q));
            if fresh {
                queue.push_back(id);
            }
            v.initial.insert(id);
        }
    }
    let mut out: Vec<Vec<Trans>> = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (p, q) = st.keys[id];
        let mut ts = Vec::new();
        for ta in &a.out[p] {
            for tb in &b.out[q] {
                if ta.letter() != tb.letter() {
                    continue;
                }
                let mut go = |to: (usize, usize)| {
                    let (t, fresh) = st.intern(to);
                    if fresh {
                        queue.push_back(t);
                    }
                    t
                };
                match (*ta, *tb) {
                    (Trans::Int { a: x, to: pa }, Trans::Int { to: pb, .. }) => {
                        ts.push(Trans::Int { a: x, to: go((pa, pb)) })
                    }
                    (
                        Trans::Call { a: x, to: pa, push: ga },
                        Trans::Call { to: pb, push: gb, .. },
                    ) => {
                        let to = go((pa, pb));
                        ts.push(Trans::Call {
                            a: x,
                            to,
                            push: gam.intern((ga, gb)).0,
                        })
                    }
                    (
                        Trans::Ret { a: x, pop: ga, to: pa },
                        Trans::Ret { pop: gb, to: pb, .. },
                    ) => {
                        if (ga == BOTTOM) != (gb == BOTTOM) {
                            continue;
                        }
                        let to = go((pa, pb));
                        ts.push(Trans::Ret {
                            a: x,
                            pop: gam.intern((ga, gb)).0,
                            to,
                        })
                    }
                    _ => {}
                }
            }
        }
        if out.len() <= id {
            out.resize(id + 1, Vec::new());
        }
        out[id] = ts;
    }
    out.resize(st.keys.len(), Vec::new());
    for (id, &(p, q)) in st.keys.iter().enumerate() {
        v.add_state(format!("({},{})", a.states[p], b.states[q]));
        if a.finals.contains(&p) && b.finals.contains(&q) {
            v.finals.insert(id);
        }
    }
    v.out = out;
    for &(ga, gb) in gam.keys.iter().skip(1) {
        v.add_stack(format!("({},{})", a.stack[ga], b.stack[gb]));
    }
    Ok(v)
}

/// Grammar of the well-matched runs of `a`: `X(p,q)` derives the words leading from `p` to `q`
/// with the stack unchanged. The result is trimmed.
pub fn vpa_to_vpg(a: &Vpa) -> Vpg {
    // returns popping γ, by stack symbol: (from, letter, to)
    let mut rets: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); a.num_stack()];
    for (s, ts) in a.out.iter().enumerate() {
        for t in ts {
            if let Trans::Ret { a: r, pop, to } = *t {
                if pop != BOTTOM {
                    rets[pop].push((s, r, to));
                }
            }
        }
    }
    let mut g = Vpg::new(a.alphabet.clone(), a.comps.clone());
    let mut nts: Interner<(usize, usize)> = Interner::new();
    let mut queue = VecDeque::new();
    fn intern(
        a: &Vpa,
        g: &mut Vpg,
        nts: &mut Interner<(usize, usize)>,
        queue: &mut VecDeque<usize>,
        k: (usize, usize),
    ) -> usize {
        let (id, fresh) = nts.intern(k);
        if fresh {
            g.add_nt(format!("X[{},{}]", a.states[k.0], a.states[k.1]));
            queue.push_back(id);
        }
        id
    }
    for &p in &a.initial {
        for &q in &a.finals {
            let s = intern(a, &mut g, &mut nts, &mut queue, (p, q));
            g.starts.insert(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        let (p, q) = nts.keys[x];
        let mut rhs = Vec::new();
        if p == q {
            rhs.push(Rhs::Eps);
        }
        for t in &a.out[p] {
            match *t {
                Trans::Int { a: l, to } => {
                    let y = intern(a, &mut g, &mut nts, &mut queue, (to, q));
                    rhs.push(Rhs::Int(l, y));
                }
                Trans::Call { a: c, to, push } => {
                    for &(s, r, s2) in &rets[push] {
                        let y = intern(a, &mut g, &mut nts, &mut queue, (to, s));
                        let z = intern(a, &mut g, &mut nts, &mut queue, (s2, q));
                        rhs.push(Rhs::Call(c, y, r, z));
                    }
                }
                Trans::Ret { .. } => {}
            }
        }
        rhs.dedup();
        g.prods[x] = rhs;
    }
    g.trim()
}

/// Reads a grammar as an automaton. States are `(X, top)` and `(X, inside)`; a call pushes
/// the pair (return letter, continuation) together with the caller's mode.
pub fn vpg_to_vpa(g: &Vpg) -> Vpa {
    let mut v = Vpa::new(g.alphabet.clone(), g.comps.clone());
    let n = g.num_nts();
    for inside in [false, true] {
        for x in 0..n {
            let tag = if inside { "in" } else { "top" };
            v.add_state(format!("{}/{}", g.names[x], tag));
        }
    }
    let state = |x: usize, inside: bool| if inside { n + x } else { x };
    let mut gam: Interner<(usize, usize, bool)> = Interner::new();
    gam.intern((usize::MAX, usize::MAX, false));
    for x in 0..n {
        for r in &g.prods[x] {
            if let Rhs::Call(_, _, rr, z) = *r {
                for f in [false, true] {
                    gam.intern((rr, z, f));
                }
            }
        }
    }
    for &(rr, z, f) in gam.keys.iter().skip(1) {
        let tag = if f { "in" } else { "top" };
        v.add_stack(format!("{}.{}/{}", g.alphabet.name(rr), g.names[z], tag));
    }
    for inside in [false, true] {
        for x in 0..n {
            let q = state(x, inside);
            for r in &g.prods[x] {
                match *r {
                    Rhs::Eps => {
                        if inside {
                            for (gid, &(rr, z, f)) in gam.keys.iter().enumerate().skip(1) {
                                v.out[q].push(Trans::Ret {
                                    a: rr,
                                    pop: gid,
                                    to: state(z, f),
                                });
                            }
                        } else {
                            v.finals.insert(q);
                        }
                    }
                    Rhs::Int(a, y) => v.out[q].push(Trans::Int {
                        a,
                        to: state(y, inside),
                    }),
                    Rhs::Call(c, y, rr, z) => {
                        let push = gam.ids[&(rr, z, inside)];
                        v.out[q].push(Trans::Call {
                            a: c,
                            to: state(y, true),
                            push,
                        });
                    }
                }
            }
        }
    }
    for &s in &g.starts {
        v.initial.insert(state(s, false));
    }
    v.trim_states()
}
