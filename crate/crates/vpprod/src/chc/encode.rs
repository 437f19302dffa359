//! Horn-clause encodings of nested-word automata and grammars under the single-stack product
//! semantics: a call or return of component `k` carries every other component's variables over.

use std::collections::{BTreeMap, BTreeSet};

use super::{App, ChcError, ChcSystem, Clause};
use crate::frontend::{build_system, make_copies, Expr, HyperProperty, LetterSem, Program, System, Type};
use crate::reductions::concat_vpg;
use crate::vpl::{Kind, Rhs, Sym, Trans, Vpa, Vpg, BOTTOM};

#[derive(Clone, Debug)]
pub struct EncodeOptions {
    /// Return-address ghost in the automaton encoding.
    pub ghost_return: bool,
    /// Variables every component reads and writes in place; calls and returns of any
    /// component carry them over like another component's variables.
    pub shared: BTreeSet<String>,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            ghost_return: true,
            shared: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct NwaInfo {
    pub states: usize,
    /// Internal, call and (return, matching call) transitions.
    pub transitions: usize,
    /// Caller states with more than one outgoing call, each adding `calls - 1` hierarchical states.
    pub split_states: usize,
    pub splits: usize,
}

const GHOST: &str = "%old";
const RA: &str = "%ra";

type Frame = BTreeMap<String, String>;

struct Cb {
    vars: BTreeMap<String, Type>,
    body: Vec<App>,
    cons: Vec<String>,
}

impl Cb {
    fn new() -> Self {
        Cb {
            vars: BTreeMap::new(),
            body: Vec::new(),
            cons: Vec::new(),
        }
    }

    fn fresh(&mut self, slot: &str, ty: Type, ver: usize) -> String {
        let n = format!("{slot}.{ver}");
        self.vars.insert(n.clone(), ty);
        n
    }

    fn frame(&mut self, slots: &[(String, Type)], ver: usize) -> Frame {
        slots.iter().map(|(s, t)| (s.clone(), self.fresh(s, *t, ver))).collect()
    }

    fn done(self, head: Option<App>) -> Clause {
        Clause {
            vars: self.vars,
            body: self.body,
            constraints: self.cons,
            head,
        }
    }
}

fn term(e: &Expr, f: &Frame) -> String {
    e.smt(&|v: &str| f.get(v).cloned().unwrap_or_else(|| v.to_string()))
}

/// `t` with its free program variables bound to the frame's terms.
fn bind(t: &str, f: &Frame) -> String {
    let used: BTreeSet<&str> = t
        .split(|c: char| c == '(' || c == ')' || c.is_whitespace())
        .filter(|s| f.contains_key(*s))
        .collect();
    if used.is_empty() {
        return t.to_string();
    }
    let bs: Vec<String> = used.iter().map(|v| format!("({v} {})", f[*v])).collect();
    format!("(let ({}) {t})", bs.join(" "))
}

/// Effect of an internal letter on a frame; assumptions go to `cons`.
fn apply(sem: &LetterSem, f: &Frame, cons: &mut Vec<String>) -> Frame {
    let mut g = f.clone();
    match sem {
        LetterSem::Assign(x, e) => {
            g.insert(x.clone(), term(e, f));
        }
        LetterSem::Store(a, i, e) => {
            g.insert(a.clone(), format!("(store {} {} {})", f[a], term(i, f), term(e, f)));
        }
        LetterSem::Assume(c) => cons.push(term(c, f)),
        LetterSem::Return(outs, es) => {
            for (o, e) in outs.iter().zip(es) {
                g.insert(o.clone(), term(e, f));
            }
        }
        LetterSem::Call { .. } | LetterSem::Ret { .. } => unreachable!("not an internal letter"),
    }
    g
}

fn app(pred: usize, frames: &[&Frame], order: &[(String, Type)]) -> App {
    App {
        pred,
        args: frames
            .iter()
            .flat_map(|f| order.iter().map(|(s, _)| f[s].clone()))
            .collect(),
    }
}

struct Enc<'a> {
    sys: &'a System,
    opts: &'a EncodeOptions,
    /// Program variables in scope, sorted.
    vars: Vec<(String, Type)>,
    /// Name predicates by nonterminal name alone, so grammars of one program share them.
    by_name: bool,
}

impl<'a> Enc<'a> {
    fn new(sys: &'a System, opts: &'a EncodeOptions, vars: BTreeMap<String, Type>) -> Self {
        Enc {
            sys,
            opts,
            vars: vars.into_iter().collect(),
            by_name: false,
        }
    }

    fn in_scope(&self, v: &str) -> bool {
        self.vars.iter().any(|(n, _)| n == v)
    }

    /// Variables a call or return of component `k` treats as frame-local.
    fn own(&self, k: usize) -> Vec<(String, Type)> {
        self.sys
            .component(k)
            .vars
            .iter()
            .filter(|(v, _)| !self.opts.shared.contains(*v) && self.in_scope(v))
            .map(|(v, t)| (v.clone(), *t))
            .collect()
    }

    fn ghosts_of(&self, k: usize) -> Vec<(String, Type)> {
        let c = self.sys.component(k);
        self.own(k)
            .into_iter()
            .filter(|(v, _)| c.params.contains(v))
            .map(|(v, t)| (format!("{v}{GHOST}"), t))
            .collect()
    }

    /// Matching call and return letters of one component and procedure.
    fn check_pair(&self, c: Sym, r: Sym) -> Result<usize, String> {
        let al = &self.sys.alphabet;
        let k = al.component(c);
        match (self.sys.sem(c), self.sys.sem(r)) {
            (LetterSem::Call { proc: p, .. }, LetterSem::Ret { proc: q, .. }) if p == q && al.component(r) == k => Ok(k),
            _ => Err(format!("`{}` is closed by `{}`", al.name(c), al.name(r))),
        }
    }

    /// Callee entry frame: component `k`'s own slots fresh at `ver`, parameters bound.
    fn enter(&self, cb: &mut Cb, k: usize, call: Sym, caller: &Frame, ver: usize, ghosts: bool) -> Frame {
        let LetterSem::Call { params, args, .. } = self.sys.sem(call) else { unreachable!() };
        let mut f = caller.clone();
        for (v, t) in self.own(k) {
            f.insert(v.clone(), cb.fresh(&v, t, ver));
        }
        if ghosts {
            for (g, t) in self.ghosts_of(k) {
                f.insert(g.clone(), cb.fresh(&g, t, ver));
            }
        }
        for (p, a) in params.iter().zip(args) {
            let v = term(a, caller);
            if ghosts && f.contains_key(&format!("{p}{GHOST}")) {
                f.insert(format!("{p}{GHOST}"), v.clone());
            }
            f.insert(p.clone(), v);
        }
        f
    }

    /// Frame after returning: component `k`'s own slots from `caller`, targets from the
    /// callee outputs, everything else from `callee`.
    fn leave(&self, k: usize, ret: Sym, caller: &Frame, callee: &Frame, ghosts: bool) -> Frame {
        let LetterSem::Ret { outputs, targets, .. } = self.sys.sem(ret) else { unreachable!() };
        let mut f = callee.clone();
        for (v, _) in self.own(k) {
            f.insert(v.clone(), caller[&v].clone());
        }
        if ghosts {
            for (g, _) in self.ghosts_of(k) {
                f.insert(g.clone(), caller[&g].clone());
            }
        }
        for (t, o) in targets.iter().zip(outputs) {
            f.insert(t.clone(), callee[o].clone());
        }
        f
    }

    // grammar encoding

    fn vpg_pred(&self, s: &mut ChcSystem, prefix: &str, g: &Vpg, x: usize) -> usize {
        let sorts: Vec<Type> = self.vars.iter().chain(&self.vars).map(|(_, t)| *t).collect();
        let label = if self.by_name {
            format!("P:{prefix}{}", g.names[x])
        } else {
            format!("P:{prefix}{x}:{}", g.names[x])
        };
        s.pred("P", &label, &sorts)
    }

    fn vpg_clauses(&self, s: &mut ChcSystem, prefix: &str, g: &Vpg) -> Result<(), ChcError> {
        let slots = &self.vars;
        for (x, rhss) in g.prods.iter().enumerate() {
            for rhs in rhss {
                let mut cb = Cb::new();
                let f0 = cb.frame(slots, 0);
                let head_pred = self.vpg_pred(s, prefix, g, x);
                let end = match *rhs {
                    Rhs::Eps => f0.clone(),
                    Rhs::Int(a, y) => {
                        let f1 = apply(self.sys.sem(a), &f0, &mut cb.cons);
                        let end = cb.frame(slots, 1);
                        let p = self.vpg_pred(s, prefix, g, y);
                        cb.body.push(app(p, &[&f1, &end], slots));
                        end
                    }
                    Rhs::Call(c, y, r, z) => {
                        let k = self.check_pair(c, r).map_err(ChcError::IllMatched)?;
                        let f1 = self.enter(&mut cb, k, c, &f0, 1, false);
                        let f2 = cb.frame(slots, 2);
                        let f3 = self.leave(k, r, &f0, &f2, false);
                        let f4 = cb.frame(slots, 4);
                        let py = self.vpg_pred(s, prefix, g, y);
                        let pz = self.vpg_pred(s, prefix, g, z);
                        cb.body.push(app(py, &[&f1, &f2], slots));
                        cb.body.push(app(pz, &[&f3, &f4], slots));
                        f4
                    }
                };
                s.add(cb.done(Some(app(head_pred, &[&f0, &end], slots))));
            }
        }
        Ok(())
    }
}

fn check_property(sys: &System, prop: &HyperProperty) -> Result<(), ChcError> {
    prop.check(&sys.vars())?;
    Ok(())
}

/// One predicate `P_L(X, X')` per nonterminal, one clause per production, and
/// `P_S(X, X') ∧ pre(X) ∧ ¬post(X') ⇒ false` per start symbol.
pub fn encode_vpg(sys: &System, g: &Vpg, prop: &HyperProperty, opts: &EncodeOptions) -> Result<ChcSystem, ChcError> {
    check_property(sys, prop)?;
    let enc = Enc::new(sys, opts, sys.vars());
    let mut s = ChcSystem::new();
    enc.vpg_clauses(&mut s, "", g)?;
    for &st in &g.starts {
        let mut cb = Cb::new();
        let f0 = cb.frame(&enc.vars, 0);
        let f1 = cb.frame(&enc.vars, 1);
        let p = enc.vpg_pred(&mut s, "", g, st);
        cb.body.push(app(p, &[&f0, &f1], &enc.vars));
        cb.cons.push(bind(&prop.pre, &f0));
        cb.cons.push(format!("(not {})", bind(&prop.post, &f1)));
        s.add(cb.done(None));
    }
    Ok(s)
}

/// One predicate `I_q(ghosts, vars, r)` per state. The return address `r` is the index of the
/// call transition that opened the frame (`-1` at the bottom); this is the state-splitting
/// that makes every hierarchical state have a single outgoing call.
pub fn encode_nwa(sys: &System, a: &Vpa, prop: &HyperProperty, opts: &EncodeOptions) -> Result<(ChcSystem, NwaInfo), ChcError> {
    check_property(sys, prop)?;
    let enc = Enc::new(sys, opts, sys.vars());
    let mut slots: Vec<(String, Type)> = Vec::new();
    for k in 1..=sys.components.len() {
        slots.extend(enc.ghosts_of(k));
    }
    slots.sort();
    slots.extend(enc.vars.iter().cloned());
    if opts.ghost_return {
        slots.push((RA.to_string(), Type::Int));
    }
    let sorts: Vec<Type> = slots.iter().map(|(_, t)| *t).collect();
    let mut s = ChcSystem::new();
    let pred = |s: &mut ChcSystem, q: usize| s.pred("I", &format!("I:{q}:{}", a.states[q]), &sorts);
    let with_ra = |mut f: Frame, r: String| {
        if opts.ghost_return {
            f.insert(RA.to_string(), r);
        }
        f
    };

    let mut calls = Vec::new();
    for (q, ts) in a.out.iter().enumerate() {
        for t in ts {
            if let Trans::Call { a: c, to, push } = *t {
                calls.push((q, c, to, push));
            }
        }
    }
    let mut info = NwaInfo {
        states: a.num_states(),
        ..Default::default()
    };
    for q in 0..a.num_states() {
        let n = calls.iter().filter(|c| c.0 == q).count();
        if n > 1 {
            info.split_states += 1;
            info.splits += n - 1;
        }
    }

    for (q, ts) in a.out.iter().enumerate() {
        for t in ts {
            match *t {
                Trans::Int { a: l, to } => {
                    let mut cb = Cb::new();
                    let f0 = cb.frame(&slots, 0);
                    let f1 = apply(sys.sem(l), &f0, &mut cb.cons);
                    let (pq, pt) = (pred(&mut s, q), pred(&mut s, to));
                    cb.body.push(app(pq, &[&f0], &slots));
                    s.add(cb.done(Some(app(pt, &[&f1], &slots))));
                    info.transitions += 1;
                }
                Trans::Call { .. } => {}
                Trans::Ret { a: r, pop, to } => {
                    if pop == BOTTOM {
                        continue;
                    }
                    for (ti, &(qc, c, _, push)) in calls.iter().enumerate() {
                        if push != pop {
                            continue;
                        }
                        let k = enc.check_pair(c, r).map_err(|m| {
                            ChcError::ReturnMatch(format!(
                                "return `{}` from state {} matches call at state {}: {m}",
                                sys.alphabet.name(r),
                                a.states[q],
                                a.states[qc]
                            ))
                        })?;
                        let LetterSem::Call { params, args, .. } = sys.sem(c) else { unreachable!() };
                        let mut cb = Cb::new();
                        let callee = with_ra(cb.frame(&slots, 0), ti.to_string());
                        let caller = cb.frame(&slots, 1);
                        let (pq, pc, pt) = (pred(&mut s, q), pred(&mut s, qc), pred(&mut s, to));
                        cb.body.push(app(pq, &[&callee], &slots));
                        cb.body.push(app(pc, &[&caller], &slots));
                        for (p, e) in params.iter().zip(args) {
                            if let Some(g) = callee.get(&format!("{p}{GHOST}")) {
                                cb.cons.push(format!("(= {g} {})", term(e, &caller)));
                            }
                        }
                        let mut next = enc.leave(k, r, &caller, &callee, true);
                        if opts.ghost_return {
                            next.insert(RA.to_string(), caller[RA].clone());
                        }
                        s.add(cb.done(Some(app(pt, &[&next], &slots))));
                        info.transitions += 1;
                    }
                }
            }
        }
    }
    for (ti, &(q, c, to, _)) in calls.iter().enumerate() {
        let k = sys.alphabet.component(c);
        if sys.alphabet.kind(c) != Kind::Call {
            continue;
        }
        let mut cb = Cb::new();
        let f0 = cb.frame(&slots, 0);
        let f1 = with_ra(enc.enter(&mut cb, k, c, &f0, 1, true), ti.to_string());
        let (pq, pt) = (pred(&mut s, q), pred(&mut s, to));
        cb.body.push(app(pq, &[&f0], &slots));
        s.add(cb.done(Some(app(pt, &[&f1], &slots))));
        info.transitions += 1;
    }
    let bottom = "(- 1)".to_string();
    for &q in &a.initial {
        let mut cb = Cb::new();
        let f = with_ra(cb.frame(&slots, 0), bottom.clone());
        cb.cons.push(bind(&prop.pre, &f));
        let p = pred(&mut s, q);
        s.add(cb.done(Some(app(p, &[&f], &slots))));
    }
    for &q in &a.finals {
        let mut cb = Cb::new();
        let f = with_ra(cb.frame(&slots, 0), bottom.clone());
        let p = pred(&mut s, q);
        cb.body.push(app(p, &[&f], &slots));
        cb.cons.push(format!("(not {})", bind(&prop.post, &f)));
        s.add(cb.done(None));
    }
    Ok((s, info))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// The grammar of `P₁ ; … ; P_k`.
    SeqComposition,
    /// One summary per procedure of the original program, applied `k` times.
    DirectNoCopies,
    /// One summary per procedure of each copy.
    DirectCopies,
}

impl std::str::FromStr for Baseline {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "seq" => Ok(Baseline::SeqComposition),
            "direct-nocopies" => Ok(Baseline::DirectNoCopies),
            "direct-copies" => Ok(Baseline::DirectCopies),
            _ => Err(format!("unknown baseline `{s}` (expected seq, direct-nocopies or direct-copies)")),
        }
    }
}

impl std::fmt::Display for Baseline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Baseline::SeqComposition => "seq",
            Baseline::DirectNoCopies => "direct-nocopies",
            Baseline::DirectCopies => "direct-copies",
        })
    }
}

/// System of `k` copies where copy `i` runs `entries[i-1]`.
pub fn copies_with_entries(p: &Program, entries: &[String]) -> Result<System, ChcError> {
    let parts: Vec<(Program, String)> = make_copies(p, entries.len())
        .into_iter()
        .zip(entries)
        .enumerate()
        .map(|(i, (q, e))| (q, format!("{e}_{}", i + 1)))
        .collect();
    Ok(build_system(&parts)?)
}

/// Standard encodings without a product: sequential composition, or summaries related by the
/// property clause `⋀ᵢ P_{Sᵢ}(Xᵢ, Xᵢ') ∧ pre ∧ ¬post ⇒ false`.
pub fn encode_baseline(
    p: &Program,
    entries: &[String],
    prop: &HyperProperty,
    variant: Baseline,
) -> Result<ChcSystem, ChcError> {
    if entries.len() != prop.k {
        return Err(ChcError::Config(format!(
            "property has {} copies but {} entries were given",
            prop.k,
            entries.len()
        )));
    }
    let sys = copies_with_entries(p, entries)?;
    check_property(&sys, prop)?;
    let opts = EncodeOptions::default();
    if variant == Baseline::SeqComposition {
        let gs = sys.grammars();
        let mut g = gs.last().unwrap().clone();
        for h in gs.iter().rev().skip(1) {
            g = concat_vpg(h, &g).map_err(|e| ChcError::IllMatched(e.to_string()))?;
        }
        return encode_vpg(&sys, &g, prop, &opts);
    }
    let mut s = ChcSystem::new();
    let mut cb = Cb::new();
    let mut pre = Frame::new();
    let mut post = Frame::new();
    match variant {
        Baseline::DirectCopies => {
            for c in &sys.components {
                let enc = Enc::new(&sys, &opts, c.vars.clone());
                let prefix = format!("{}:", c.index);
                enc.vpg_clauses(&mut s, &prefix, &c.grammar)?;
                let (f0, f1) = (cb.frame(&enc.vars, 0), cb.frame(&enc.vars, 1));
                for &st in &c.grammar.starts {
                    let pr = enc.vpg_pred(&mut s, &prefix, &c.grammar, st);
                    cb.body.push(app(pr, &[&f0, &f1], &enc.vars));
                }
                pre.extend(f0);
                post.extend(f1);
            }
        }
        Baseline::DirectNoCopies => {
            let mut all = BTreeMap::new();
            for q in &p.procs {
                for v in q.vars() {
                    all.insert(v.name.clone(), v.ty);
                }
            }
            let mut seen = BTreeSet::new();
            for (i, e) in entries.iter().enumerate() {
                let orig = build_system(&[(p.clone(), e.clone())])?;
                let mut enc = Enc::new(&orig, &opts, all.clone());
                enc.by_name = true;
                let g = &orig.component(1).grammar;
                let mut part = ChcSystem::new();
                std::mem::swap(&mut part, &mut s);
                let before = part.clauses.len();
                enc.vpg_clauses(&mut part, "", g)?;
                let fresh: Vec<Clause> = part.clauses.split_off(before);
                for c in fresh {
                    if seen.insert(part.render_clause(&c)) {
                        part.clauses.push(c);
                    }
                }
                std::mem::swap(&mut part, &mut s);
                // copy i's variables play the summary's arguments
                let renamed: Vec<(String, Type)> = enc.vars.iter().map(|(v, t)| (format!("{v}_{}", i + 1), *t)).collect();
                let (f0, f1) = (cb.frame(&renamed, 0), cb.frame(&renamed, 1));
                let st = *g.starts.iter().next().unwrap();
                let pr = enc.vpg_pred(&mut s, "", g, st);
                cb.body.push(App {
                    pred: pr,
                    args: renamed
                        .iter()
                        .map(|(v, _)| f0[v].clone())
                        .chain(renamed.iter().map(|(v, _)| f1[v].clone()))
                        .collect(),
                });
                pre.extend(f0);
                post.extend(f1);
            }
        }
        Baseline::SeqComposition => unreachable!(),
    }
    cb.cons.push(bind(&prop.pre, &pre));
    cb.cons.push(format!("(not {})", bind(&prop.post, &post)));
    s.add(cb.done(None));
    Ok(s)
}
