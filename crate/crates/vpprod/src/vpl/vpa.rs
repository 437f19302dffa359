use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use super::{comps_vec, is_well_matched, Alphabet, Kind, Sym, VplError, Word};

/// Stack symbol 0 is always the bottom symbol.
pub const BOTTOM: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trans {
    Int { a: Sym, to: usize },
    Call { a: Sym, to: usize, push: usize },
    Ret { a: Sym, pop: usize, to: usize },
}

impl Trans {
    pub fn letter(&self) -> Sym {
        match *self {
            Trans::Int { a, .. } | Trans::Call { a, .. } | Trans::Ret { a, .. } => a,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Trans::Int { to, .. } | Trans::Call { to, .. } | Trans::Ret { to, .. } => to,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vpa {
    pub alphabet: Arc<Alphabet>,
    /// Components whose letters this automaton reads.
    pub comps: BTreeSet<usize>,
    pub states: Vec<String>,
    /// Stack alphabet labels; index [`BOTTOM`] is the bottom symbol.
    pub stack: Vec<String>,
    pub initial: BTreeSet<usize>,
    pub finals: BTreeSet<usize>,
    pub out: Vec<Vec<Trans>>,
    pub complete: bool,
}

impl Vpa {
    pub fn new(alphabet: Arc<Alphabet>, comps: BTreeSet<usize>) -> Self {
        Vpa {
            alphabet,
            comps,
            states: Vec::new(),
            stack: vec!["⊥".to_string()],
            initial: BTreeSet::new(),
            finals: BTreeSet::new(),
            out: Vec::new(),
            complete: false,
        }
    }

    pub fn add_state(&mut self, label: impl Into<String>) -> usize {
        self.states.push(label.into());
        self.out.push(Vec::new());
        self.complete = false;
        self.states.len() - 1
    }

    pub fn add_stack(&mut self, label: impl Into<String>) -> usize {
        self.stack.push(label.into());
        self.complete = false;
        self.stack.len() - 1
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_stack(&self) -> usize {
        self.stack.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.out.iter().map(|v| v.len()).sum()
    }

    pub fn letters(&self) -> Vec<Sym> {
        self.alphabet.syms_in(&self.comps)
    }

    fn check_letter(&self, a: Sym, want: Kind) -> Result<(), VplError> {
        let l = self.alphabet.letter(a);
        if !self.comps.contains(&l.component) {
            return Err(VplError::ForeignLetter(l.name.clone()));
        }
        if l.kind != want {
            return Err(VplError::WrongKind(l.name.clone(), l.kind.tag(), want.tag()));
        }
        Ok(())
    }

    fn push_trans(&mut self, from: usize, t: Trans) {
        if !self.out[from].contains(&t) {
            self.out[from].push(t);
            self.complete = false;
        }
    }

    pub fn add_int(&mut self, from: usize, a: Sym, to: usize) -> Result<(), VplError> {
        self.check_letter(a, Kind::Int)?;
        self.push_trans(from, Trans::Int { a, to });
        Ok(())
    }

    pub fn add_call(&mut self, from: usize, a: Sym, to: usize, push: usize) -> Result<(), VplError> {
        self.check_letter(a, Kind::Call)?;
        if push == BOTTOM {
            return Err(VplError::PushBottom);
        }
        self.push_trans(from, Trans::Call { a, to, push });
        Ok(())
    }

    pub fn add_ret(&mut self, from: usize, a: Sym, pop: usize, to: usize) -> Result<(), VplError> {
        self.check_letter(a, Kind::Ret)?;
        self.push_trans(from, Trans::Ret { a, pop, to });
        Ok(())
    }

    /// Successor configurations of `(q, stack)` on `a`. The stack holds non-bottom symbols only.
    pub fn step(&self, q: usize, stack: &[usize], a: Sym) -> Vec<(usize, Vec<usize>)> {
        let top = stack.last().copied().unwrap_or(BOTTOM);
        let mut res = Vec::new();
        for t in &self.out[q] {
            match *t {
                Trans::Int { a: b, to } if b == a => res.push((to, stack.to_vec())),
                Trans::Call { a: b, to, push } if b == a => {
                    let mut s = stack.to_vec();
                    s.push(push);
                    res.push((to, s));
                }
                Trans::Ret { a: b, pop, to } if b == a && pop == top => {
                    let mut s = stack.to_vec();
                    s.pop();
                    res.push((to, s));
                }
                _ => {}
            }
        }
        res
    }

    fn configs_after(&self, word: &[Sym]) -> BTreeSet<(usize, Vec<usize>)> {
        let mut cur: BTreeSet<(usize, Vec<usize>)> =
            self.initial.iter().map(|&q| (q, Vec::new())).collect();
        for &a in word {
            if !self.comps.contains(&self.alphabet.component(a)) {
                return BTreeSet::new();
            }
            let mut next = BTreeSet::new();
            for (q, s) in &cur {
                next.extend(self.step(*q, s, a));
            }
            cur = next;
            if cur.is_empty() {
                break;
            }
        }
        cur
    }

    /// Linear acceptance: some run ends in a final state, whatever the stack holds.
    pub fn accepts(&self, word: &[Sym]) -> bool {
        self.configs_after(word)
            .iter()
            .any(|(q, _)| self.finals.contains(q))
    }

    /// Acceptance restricted to well-matched words.
    pub fn accepts_well_matched(&self, word: &[Sym]) -> bool {
        is_well_matched(&self.alphabet, word) && self.accepts(word)
    }

    pub fn is_deterministic(&self) -> bool {
        if self.initial.len() != 1 {
            return false;
        }
        self.out.iter().all(|ts| {
            let mut seen = BTreeSet::new();
            ts.iter().all(|t| {
                let key = match *t {
                    Trans::Int { a, .. } | Trans::Call { a, .. } => (a, usize::MAX),
                    Trans::Ret { a, pop, .. } => (a, pop),
                };
                seen.insert(key)
            })
        })
    }

    /// Whether every state has a successor on every letter (and stack top, for returns).
    pub fn check_complete(&self) -> bool {
        let letters = self.letters();
        (0..self.num_states()).all(|q| {
            letters.iter().all(|&a| match self.alphabet.kind(a) {
                Kind::Ret => (0..self.num_stack()).all(|g| {
                    self.out[q]
                        .iter()
                        .any(|t| matches!(*t, Trans::Ret { a: b, pop, .. } if b == a && pop == g))
                }),
                _ => self.out[q].iter().any(|t| t.letter() == a),
            })
        })
    }

    /// Runs a deterministic automaton; `None` if some step is undefined.
    pub fn run_det(&self, word: &[Sym]) -> Option<usize> {
        let mut q = *self.initial.iter().next()?;
        let mut stack: Vec<usize> = Vec::new();
        for &a in word {
            let top = stack.last().copied().unwrap_or(BOTTOM);
            let t = self.out[q].iter().find(|t| match **t {
                Trans::Ret { a: b, pop, .. } => b == a && pop == top,
                _ => t.letter() == a,
            })?;
            match *t {
                Trans::Int { to, .. } => q = to,
                Trans::Call { to, push, .. } => {
                    stack.push(push);
                    q = to;
                }
                Trans::Ret { to, .. } => {
                    stack.pop();
                    q = to;
                }
            }
        }
        Some(q)
    }

    /// Adds one non-final sink state (and a sink stack symbol when the stack alphabet is only bottom).
    pub fn complete(&self) -> Vpa {
        if self.complete || self.check_complete() {
            let mut c = self.clone();
            c.complete = true;
            return c;
        }
        let mut v = self.clone();
        let sink = v.add_state("sink");
        let push_sym = if v.num_stack() == 1 {
            v.add_stack("sink")
        } else {
            1
        };
        let letters = v.letters();
        for q in 0..v.num_states() {
            for &a in &letters {
                match v.alphabet.kind(a) {
                    Kind::Int => {
                        if !v.out[q].iter().any(|t| t.letter() == a) {
                            v.out[q].push(Trans::Int { a, to: sink });
                        }
                    }
                    Kind::Call => {
                        if !v.out[q].iter().any(|t| t.letter() == a) {
                            v.out[q].push(Trans::Call {
                                a,
                                to: sink,
                                push: push_sym,
                            });
                        }
                    }
                    Kind::Ret => {
                        for g in 0..v.num_stack() {
                            let has = v.out[q].iter().any(
                                |t| matches!(*t, Trans::Ret { a: b, pop, .. } if b == a && pop == g),
                            );
                            if !has {
                                v.out[q].push(Trans::Ret { a, pop: g, to: sink });
                            }
                        }
                    }
                }
            }
        }
        v.complete = true;
        v
    }

    /// States from which a final state is reachable in the transition graph (stack ignored).
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (q, ts) in self.out.iter().enumerate() {
            for t in ts {
                rev[t.target()].push(q);
            }
        }
        let mut good = vec![false; n];
        let mut queue: VecDeque<usize> = self.finals.iter().copied().collect();
        for &f in &self.finals {
            good[f] = true;
        }
        while let Some(q) = queue.pop_front() {
            for &p in &rev[q] {
                if !good[p] {
                    good[p] = true;
                    queue.push_back(p);
                }
            }
        }
        good
    }

    /// Shortest graph distance to a final state, ignoring the stack.
    fn distance_to_final(&self) -> Vec<usize> {
        let n = self.num_states();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (q, ts) in self.out.iter().enumerate() {
            for t in ts {
                rev[t.target()].push(q);
            }
        }
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &f in &self.finals {
            dist[f] = 0;
            queue.push_back(f);
        }
        while let Some(q) = queue.pop_front() {
            for &p in &rev[q] {
                if dist[p] == usize::MAX {
                    dist[p] = dist[q] + 1;
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// All accepted words of length at most `max_len`.
    pub fn enumerate(&self, max_len: usize) -> BTreeSet<Word> {
        self.enumerate_filtered(max_len, false)
    }

    /// All accepted well-matched words of length at most `max_len`.
    pub fn enumerate_well_matched(&self, max_len: usize) -> BTreeSet<Word> {
        self.enumerate_filtered(max_len, true)
    }

    fn enumerate_filtered(&self, max_len: usize, wm: bool) -> BTreeSet<Word> {
        let dist = self.distance_to_final();
        let letters = self.letters();
        let mut res = BTreeSet::new();
        let start: BTreeSet<(usize, Vec<usize>)> = self
            .initial
            .iter()
            .filter(|&&q| dist[q] <= max_len)
            .map(|&q| (q, Vec::new()))
            .collect();
        let mut word = Vec::new();
        self.enum_rec(&start, &mut word, max_len, wm, &dist, &letters, &mut res);
        res
    }

    #[allow(clippy::too_many_arguments)]
    fn enum_rec(
        &self,
        cur: &BTreeSet<(usize, Vec<usize>)>,
        word: &mut Word,
        max_len: usize,
        wm: bool,
        dist: &[usize],
        letters: &[Sym],
        res: &mut BTreeSet<Word>,
    ) {
        let accepted = cur
            .iter()
            .any(|(q, s)| self.finals.contains(q) && (!wm || s.is_empty()));
        if accepted && (!wm || is_well_matched(&self.alphabet, word)) {
            res.insert(word.clone());
        }
        if word.len() == max_len {
            return;
        }
        let left = max_len - word.len() - 1;
        for &a in letters {
            let mut next = BTreeSet::new();
            for (q, s) in cur {
                for (p, s2) in self.step(*q, s, a) {
                    let need = if wm { dist[p].max(s2.len()) } else { dist[p] };
                    if need <= left {
                        next.insert((p, s2));
                    }
                }
            }
            if !next.is_empty() {
                word.push(a);
                self.enum_rec(&next, word, max_len, wm, dist, letters, res);
                word.pop();
            }
        }
    }

    /// Keeps only states reachable from an initial state and co-reachable to a final one.
    pub fn trim_states(&self) -> Vpa {
        let n = self.num_states();
        let mut reach = vec![false; n];
        let mut queue: VecDeque<usize> = self.initial.iter().copied().collect();
        for &q in &self.initial {
            reach[q] = true;
        }
        while let Some(q) = queue.pop_front() {
            for t in &self.out[q] {
                let p = t.target();
                if !reach[p] {
                    reach[p] = true;
                    queue.push_back(p);
                }
            }
        }
        let co = self.coreachable();
        let keep: Vec<bool> = (0..n).map(|q| reach[q] && co[q]).collect();
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[bool]) -> Vpa {
        let mut map = vec![usize::MAX; self.num_states()];
        let mut v = Vpa::new(self.alphabet.clone(), self.comps.clone());
        v.stack = self.stack.clone();
        for q in 0..self.num_states() {
            if keep[q] {
                map[q] = v.add_state(self.states[q].clone());
            }
        }
        for q in 0..self.num_states() {
            if !keep[q] {
                continue;
            }
            for t in &self.out[q] {
                if keep[t.target()] {
                    let to = map[t.target()];
                    let nt = match *t {
                        Trans::Int { a, .. } => Trans::Int { a, to },
                        Trans::Call { a, push, .. } => Trans::Call { a, to, push },
                        Trans::Ret { a, pop, .. } => Trans::Ret { a, pop, to },
                    };
                    v.out[map[q]].push(nt);
                }
            }
        }
        v.initial = self.initial.iter().filter(|&&q| keep[q]).map(|&q| map[q]).collect();
        v.finals = self.finals.iter().filter(|&&q| keep[q]).map(|&q| map[q]).collect();
        v
    }

    /// Reverses every run: initial and final states swap, calls and returns swap roles.
    /// The result lives over the mirrored alphabet; returns popping bottom have no counterpart
    /// and are dropped, so only well-matched words survive the round trip.
    pub fn reversed(&self, mirrored: Arc<Alphabet>) -> Vpa {
        let mut v = Vpa::new(mirrored, self.comps.clone());
        v.stack = self.stack.clone();
        for s in &self.states {
            v.add_state(s.clone());
        }
        for (q, ts) in self.out.iter().enumerate() {
            for t in ts {
                match *t {
                    Trans::Int { a, to } => v.out[to].push(Trans::Int { a, to: q }),
                    Trans::Call { a, to, push } => v.out[to].push(Trans::Ret { a, pop: push, to: q }),
                    Trans::Ret { a, pop, to } => {
                        if pop != BOTTOM {
                            v.out[to].push(Trans::Call { a, to: q, push: pop });
                        }
                    }
                }
            }
        }
        v.initial = self.finals.clone();
        v.finals = self.initial.clone();
        v
    }

    /// Sorted line-oriented dump; see `docs/formats.md`.
    pub fn dump(&self) -> String {
        let al = &self.alphabet;
        let mut s = String::new();
        let _ = writeln!(s, "vpa comps {:?}", comps_vec(&self.comps));
        for (q, l) in self.states.iter().enumerate() {
            let mut flags = String::new();
            if self.initial.contains(&q) {
                flags.push_str(" initial");
            }
            if self.finals.contains(&q) {
                flags.push_str(" final");
            }
            let _ = writeln!(s, "state {q} {l}{flags}");
        }
        for (g, l) in self.stack.iter().enumerate() {
            let _ = writeln!(s, "stack {g} {l}");
        }
        let mut lines = Vec::new();
        for (q, ts) in self.out.iter().enumerate() {
            for t in ts {
                lines.push(match *t {
                    Trans::Int { a, to } => format!("int {q} {} {to}", al.name(a)),
                    Trans::Call { a, to, push } => {
                        format!("call {q} {} {to} push {push}", al.name(a))
                    }
                    Trans::Ret { a, pop, to } => format!("ret {q} {} pop {pop} {to}", al.name(a)),
                });
            }
        }
        lines.sort();
        for l in lines {
            s.push_str(&l);
            s.push('\n');
        }
        s
    }

    /// Universal automaton for well-matched words over `comps` (one state, one stack symbol).
    pub fn universal_well_matched(alphabet: Arc<Alphabet>, comps: BTreeSet<usize>) -> Vpa {
        let mut v = Vpa::new(alphabet, comps);
        let q = v.add_state("u");
        let g = v.add_stack("u");
        v.initial.insert(q);
        v.finals.insert(q);
        for a in v.letters() {
            let t = match v.alphabet.kind(a) {
                Kind::Int => Trans::Int { a, to: q },
                Kind::Call => Trans::Call { a, to: q, push: g },
                Kind::Ret => Trans::Ret { a, pop: g, to: q },
            };
            v.out[q].push(t);
        }
        v
    }

    /// Number of distinct letters on outgoing transitions, grouped by kind.
    pub fn outgoing_kinds(&self, q: usize) -> BTreeSet<Kind> {
        self.out[q]
            .iter()
            .map(|t| self.alphabet.kind(t.letter()))
            .collect()
    }

    pub fn outgoing_letters(&self, q: usize) -> BTreeSet<Sym> {
        self.out[q].iter().map(|t| t.letter()).collect()
    }

    /// Splits final states that have outgoing transitions and states whose outgoing
    /// letters mix kinds, so that every state is homogeneous and finals are dead ends.
    /// Only well-matched behaviour is preserved exactly (the run languages here are well-matched).
    pub fn normalize(&self) -> Vpa {
        // copy (q, kind) for each kind present, plus (q, end) for finals
        let mut v = Vpa::new(self.alphabet.clone(), self.comps.clone());
        v.stack = self.stack.clone();
        let mut copies: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut end_copy: BTreeMap<usize, usize> = BTreeMap::new();
        let mut kind_copy: BTreeMap<(usize, Kind), usize> = BTreeMap::new();
        for q in 0..self.num_states() {
            let kinds = self.outgoing_kinds(q);
            let mut cs = Vec::new();
            for k in kinds {
                let id = v.add_state(format!("{}/{}", self.states[q], k.tag()));
                kind_copy.insert((q, k), id);
                cs.push(id);
            }
            if self.finals.contains(&q) {
                let id = v.add_state(format!("{}/end", self.states[q]));
                end_copy.insert(q, id);
                v.finals.insert(id);
                cs.push(id);
            }
            copies.insert(q, cs);
        }
        for (q, ts) in self.out.iter().enumerate() {
            for t in ts {
                let k = self.alphabet.kind(t.letter());
                let from = kind_copy[&(q, k)];
                for &to in &copies[&t.target()] {
                    let nt = match *t {
                        Trans::Int { a, .. } => Trans::Int { a, to },
                        Trans::Call { a, push, .. } => Trans::Call { a, to, push },
                        Trans::Ret { a, pop, .. } => Trans::Ret { a, pop, to },
                    };
                    v.out[from].push(nt);
                }
            }
        }
        for &q in &self.initial {
            v.initial.extend(copies[&q].iter().copied());
        }
        v.trim_states()
    }

    /// Every state has outgoing letters of at most one kind and finals have none.
    /// Some accepted well-matched word, found by saturating well-matched summaries `(p, q)`
    /// from the initial states and call targets; `None` if there is none. Breadth-first, so
    /// short words come first, though minimality is not guaranteed.
    pub fn well_matched_witness(&self) -> Option<Word> {
        let n = self.num_states();
        // q --c/γ--> x, indexed by x
        let mut calls_into: Vec<Vec<(usize, Sym, usize)>> = vec![Vec::new(); n];
        for (q, ts) in self.out.iter().enumerate() {
            for t in ts {
                if let Trans::Call { a, to, push } = *t {
                    calls_into[to].push((q, a, push));
                }
            }
        }
        let mut s = Summaries {
            words: HashMap::new(),
            by_start: vec![Vec::new(); n],
            by_end: vec![Vec::new(); n],
            queue: VecDeque::new(),
        };
        for p in self.initial.iter().copied().chain((0..n).filter(|&x| !calls_into[x].is_empty())) {
            s.add(p, p, Vec::new());
        }
        let mut best: Option<Word> = None;
        while let Some((p, q)) = s.queue.pop_front() {
            let w = s.words[&(p, q)].clone();
            if self.initial.contains(&p) && self.finals.contains(&q) && best.as_ref().is_none_or(|b| w.len() < b.len()) {
                best = Some(w.clone());
            }
            let mut found: Vec<(usize, usize, Word)> = Vec::new();
            let wrap = |outer: &[Sym], c: Sym, inner: &[Sym], r: Sym| {
                let mut v = outer.to_vec();
                v.push(c);
                v.extend_from_slice(inner);
                v.push(r);
                v
            };
            for t in &self.out[q] {
                match *t {
                    Trans::Int { a, to } => {
                        let mut v = w.clone();
                        v.push(a);
                        found.push((p, to, v));
                    }
                    Trans::Call { a: c, to: x, push } => {
                        for &y in &s.by_start[x] {
                            for rt in &self.out[y] {
                                if let Trans::Ret { a: r, pop, to: z } = *rt {
                                    if pop == push {
                                        found.push((p, z, wrap(&w, c, &s.words[&(x, y)], r)));
                                    }
                                }
                            }
                        }
                    }
                    Trans::Ret { .. } => {}
                }
            }
            // (p, q) as the body of a call
            for &(q0, c, g) in &calls_into[p] {
                for rt in &self.out[q] {
                    let Trans::Ret { a: r, pop, to: z } = *rt else { continue };
                    if pop != g {
                        continue;
                    }
                    for &p0 in &s.by_end[q0] {
                        found.push((p0, z, wrap(&s.words[&(p0, q0)], c, &w, r)));
                    }
                }
            }
            found.sort();
            for (a, b, v) in found {
                s.add(a, b, v);
            }
        }
        best
    }

    pub fn is_normalized(&self) -> bool {
        (0..self.num_states()).all(|q| {
            let k = self.outgoing_kinds(q);
            k.len() <= 1 && (!self.finals.contains(&q) || k.is_empty())
        })
    }
}

struct Summaries {
    words: HashMap<(usize, usize), Word>,
    by_start: Vec<Vec<usize>>,
    by_end: Vec<Vec<usize>>,
    queue: VecDeque<(usize, usize)>,
}

impl Summaries {
    fn add(&mut self, p: usize, q: usize, w: Word) {
        if let std::collections::hash_map::Entry::Vacant(e) = self.words.entry((p, q)) {
            e.insert(w);
            self.by_start[p].push(q);
            self.by_end[q].push(p);
            self.queue.push_back((p, q));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vpl::{Alphabet, Kind};

    pub(crate) fn dyck_alpha() -> Arc<Alphabet> {
        Arc::new(
            Alphabet::from_spec(&[
                ("(", Kind::Call, 1),
                (")", Kind::Ret, 1),
                ("a", Kind::Int, 1),
                ("[", Kind::Call, 2),
                ("]", Kind::Ret, 2),
                ("b", Kind::Int, 2),
            ])
            .unwrap(),
        )
    }

    fn comps(c: &[usize]) -> BTreeSet<usize> {
        c.iter().copied().collect()
    }

    /// (^n a )^n over component 1.
    fn nest_a(al: &Arc<Alphabet>) -> Vpa {
        let mut v = Vpa::new(al.clone(), comps(&[1]));
        let p = v.add_state("p");
        let q = v.add_state("q");
        let g = v.add_stack("g");
        v.initial.insert(p);
        v.finals.insert(q);
        let (o, c, a) = (al.lookup("(").unwrap(), al.lookup(")").unwrap(), al.lookup("a").unwrap());
        v.add_call(p, o, p, g).unwrap();
        v.add_int(p, a, q).unwrap();
        v.add_ret(q, c, g, q).unwrap();
        v
    }

    #[test]
    fn accepts_nesting() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        assert!(v.accepts(&al.chars("((a))").unwrap()));
        assert!(v.accepts(&al.chars("((a)").unwrap()));
        assert!(!v.accepts_well_matched(&al.chars("((a)").unwrap()));
        assert!(!v.accepts(&al.chars("(a))").unwrap()));
        assert!(!v.accepts(&al.chars("(b)").unwrap()));
    }

    #[test]
    fn empty_word_without_initial_final() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        assert!(!v.accepts(&[]));
    }

    #[test]
    fn cannot_push_bottom() {
        let al = dyck_alpha();
        let mut v = Vpa::new(al.clone(), comps(&[1]));
        let p = v.add_state("p");
        assert_eq!(v.add_call(p, 0, p, BOTTOM), Err(VplError::PushBottom));
        assert!(v.add_int(p, 0, p).is_err());
        assert!(v.add_int(p, 5, p).is_err());
    }

    #[test]
    fn completion_of_empty_automaton() {
        let al = dyck_alpha();
        let mut v = Vpa::new(al.clone(), comps(&[1]));
        let p = v.add_state("p");
        v.initial.insert(p);
        v.finals.insert(p);
        let c = v.complete();
        assert_eq!(c.num_states(), 2);
        assert!(c.complete && c.check_complete());
        assert_eq!(c.enumerate(4), v.enumerate(4));
        assert_eq!(c.complete(), c);
    }

    #[test]
    fn completion_keeps_language() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        let c = v.complete();
        assert!(c.check_complete());
        assert_eq!(c.num_states(), v.num_states() + 1);
        assert_eq!(c.enumerate(7), v.enumerate(7));
    }

    #[test]
    fn enumeration_matches_definition() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        let got = v.enumerate_well_matched(7);
        let want: BTreeSet<Word> = ["a", "(a)", "((a))", "(((a)))"]
            .iter()
            .map(|w| al.chars(w).unwrap())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn reverse_mirrors_language() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        let m = Arc::new(al.mirrored());
        let r = v.reversed(m.clone());
        for w in v.enumerate_well_matched(7) {
            let rw: Word = w.iter().rev().copied().collect();
            assert!(r.accepts(&rw));
        }
    }

    #[test]
    fn normalize_splits_mixed_states() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        assert!(!v.is_normalized());
        let n = v.normalize();
        assert!(n.is_normalized());
        assert_eq!(n.enumerate_well_matched(7), v.enumerate_well_matched(7));
    }

    #[test]
    fn dump_is_sorted_and_stable() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        let d = v.dump();
        assert_eq!(d, v.clone().dump());
        assert!(d.contains("call 0 ( 0 push 1"));
        assert!(d.contains("ret 1 ) pop 1 1"));
    }

    #[test]
    fn witness_agrees_with_enumeration() {
        let al = dyck_alpha();
        let v = nest_a(&al);
        assert_eq!(v.well_matched_witness(), Some(al.chars("a").unwrap()));
        let mut rng = crate::gen::rng(7);
        for _ in 0..300 {
            let r = crate::gen::random_vpa(&mut rng, &al, &comps(&[1, 2]), 3, 2, 0.15);
            let w = r.well_matched_witness();
            let e = r.enumerate_well_matched(6);
            if let Some(w) = &w {
                assert!(r.accepts_well_matched(w));
                if w.len() <= 6 {
                    assert!(!e.is_empty());
                }
            }
            if let Some(shortest) = e.iter().map(|u| u.len()).min() {
                assert!(w.is_some_and(|w| w.len() >= shortest));
            }
        }
    }
}
