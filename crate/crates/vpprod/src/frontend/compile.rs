//! Statement alphabets and run grammars of programs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::ast::{Expr, Proc, Program, Stmt, Type, Var};
use super::parse::reachable_procs;
use super::FrontendError;
use crate::vpl::{Alphabet, Kind, Rhs, Sym, Vpa, Vpg, Word};

/// What a letter does to the top frame (and, for calls and returns, the frame below).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LetterSem {
    Assign(String, Expr),
    Store(String, Expr, Expr),
    Assume(Expr),
    /// Simultaneous assignment of the procedure outputs.
    Return(Vec<String>, Vec<Expr>),
    Call {
        proc: String,
        /// Procedure name before copy renaming.
        base: String,
        params: Vec<String>,
        args: Vec<Expr>,
    },
    Ret {
        proc: String,
        base: String,
        outputs: Vec<String>,
        targets: Vec<String>,
    },
}

impl LetterSem {
    pub fn kind(&self) -> Kind {
        match self {
            LetterSem::Call { .. } => Kind::Call,
            LetterSem::Ret { .. } => Kind::Ret,
            _ => Kind::Int,
        }
    }

    /// Variables written in the top frame by an internal letter.
    pub fn writes(&self) -> Vec<String> {
        match self {
            LetterSem::Assign(x, _) | LetterSem::Store(x, ..) => vec![x.clone()],
            LetterSem::Return(outs, _) => outs.clone(),
            _ => Vec::new(),
        }
    }
}

/// One component: a renamed program and its run grammar from the entry wrapper.
#[derive(Clone, Debug)]
pub struct Component {
    pub index: usize,
    pub program: Program,
    pub entry: String,
    pub grammar: Vpg,
    /// Every variable of the component with its type, sorted by name.
    pub vars: BTreeMap<String, Type>,
    /// Every variable that is a parameter of some procedure.
    pub params: BTreeSet<String>,
}

impl Component {
    pub fn entry_proc(&self) -> &Proc {
        self.program.proc(&self.entry).unwrap()
    }
}

/// Components over one shared statement alphabet; a letter's payload indexes `sems`.
#[derive(Clone, Debug)]
pub struct System {
    pub alphabet: Arc<Alphabet>,
    pub sems: Vec<LetterSem>,
    pub components: Vec<Component>,
}

impl System {
    pub fn sem(&self, s: Sym) -> &LetterSem {
        &self.sems[self.alphabet.letter(s).payload]
    }

    pub fn component(&self, i: usize) -> &Component {
        &self.components[i - 1]
    }

    /// All variables of all components.
    pub fn vars(&self) -> BTreeMap<String, Type> {
        self.components.iter().flat_map(|c| c.vars.clone()).collect()
    }

    pub fn grammars(&self) -> Vec<Vpg> {
        self.components.iter().map(|c| c.grammar.clone()).collect()
    }

    pub fn to_vpa(&self, i: usize) -> Vpa {
        crate::vpl::vpg_to_vpa(&self.component(i).grammar)
    }

    /// Call and return letters of procedure `name`, given with or without the copy suffix.
    pub fn proc_letters(&self, name: &str) -> Option<BTreeSet<Sym>> {
        let out: BTreeSet<Sym> = self
            .alphabet
            .syms()
            .filter(|&s| match self.sem(s) {
                LetterSem::Call { proc, base, .. } | LetterSem::Ret { proc, base, .. } => proc == name || base == name,
                _ => false,
            })
            .collect();
        (!out.is_empty()).then_some(out)
    }

    /// Letter of a statement text in component `comp`.
    pub fn letter(&self, text: &str) -> Option<Sym> {
        self.alphabet.lookup(text)
    }
}

/// `k` copies with variables and procedures suffixed `_1` … `_k`.
pub fn make_copies(p: &Program, k: usize) -> Vec<Program> {
    (1..=k).map(|i| rename(p, &format!("_{i}"))).collect()
}

fn rename(p: &Program, suffix: &str) -> Program {
    let f = |v: &str| format!("{v}{suffix}");
    let vars = |vs: &[Var]| -> Vec<Var> {
        vs.iter()
            .map(|v| Var {
                name: f(&v.name),
                ty: v.ty,
            })
            .collect()
    };
    fn body(b: &[Stmt], f: &impl Fn(&str) -> String) -> Vec<Stmt> {
        b.iter()
            .map(|s| match s {
                Stmt::Assign(x, e) => Stmt::Assign(f(x), e.rename(f)),
                Stmt::Store(a, i, e) => Stmt::Store(f(a), i.rename(f), e.rename(f)),
                Stmt::Assume(c) => Stmt::Assume(c.rename(f)),
                Stmt::If(c, t, e) => Stmt::If(c.rename(f), body(t, f), body(e, f)),
                Stmt::Call { targets, proc, args } => Stmt::Call {
                    targets: targets.iter().map(|t| f(t)).collect(),
                    proc: f(proc),
                    args: args.iter().map(|a| a.rename(f)).collect(),
                },
                Stmt::Return(es) => Stmt::Return(es.iter().map(|e| e.rename(f)).collect()),
            })
            .collect()
    }
    Program {
        procs: p
            .procs
            .iter()
            .map(|q| Proc {
                name: f(&q.name),
                params: vars(&q.params),
                outputs: vars(&q.outputs),
                locals: vars(&q.locals),
                body: body(&q.body, &f),
            })
            .collect(),
    }
}

fn list(es: &[Expr]) -> String {
    es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}

/// Letter texts. Calls and returns are named after the procedure and the call site's arguments
/// and targets.
pub fn call_text(proc: &str, args: &[Expr]) -> String {
    format!("call {proc}({})", list(args))
}

pub fn ret_text(proc: &str, targets: &[String]) -> String {
    match targets.len() {
        0 => format!("ret {proc}"),
        1 => format!("ret {proc} -> {}", targets[0]),
        _ => format!("ret {proc} -> ({})", targets.join(", ")),
    }
}

struct Letters {
    alphabet: Alphabet,
    sems: Vec<LetterSem>,
}

impl Letters {
    fn intern(&mut self, text: String, sem: LetterSem, comp: usize) -> Result<Sym, FrontendError> {
        if let Some(s) = self.alphabet.lookup(&text) {
            let l = self.alphabet.letter(s);
            if l.component != comp || self.sems[l.payload] != sem {
                return Err(FrontendError::Semantic(format!(
                    "letter `{text}` is shared between components; rename the copies"
                )));
            }
            return Ok(s);
        }
        let id = self.sems.len();
        self.sems.push(sem.clone());
        self.alphabet
            .add(&text, sem.kind(), comp, id)
            .map_err(|e| FrontendError::Semantic(e.to_string()))
    }
}

struct RawGrammar {
    names: Vec<String>,
    prods: Vec<Vec<Rhs>>,
    start: usize,
}

impl RawGrammar {
    fn nt(&mut self, name: String) -> usize {
        self.names.push(name);
        self.prods.push(Vec::new());
        self.names.len() - 1
    }
}

struct Compiler<'a> {
    prog: &'a Program,
    comp: usize,
    letters: &'a mut Letters,
    g: RawGrammar,
    entry_nt: BTreeMap<String, usize>,
    end_nt: BTreeMap<String, usize>,
    counter: BTreeMap<String, usize>,
}

impl Compiler<'_> {
    fn fresh(&mut self, proc: &str) -> usize {
        let k = self.counter.entry(proc.to_string()).or_insert(0);
        *k += 1;
        let name = format!("{proc}.{k}");
        self.g.nt(name)
    }

    fn int(&mut self, proc: &str, text: String, sem: LetterSem, cont: usize) -> Result<usize, FrontendError> {
        let a = self.letters.intern(text, sem, self.comp)?;
        let x = self.fresh(proc);
        self.g.prods[x].push(Rhs::Int(a, cont));
        Ok(x)
    }

    fn call_letters(&mut self, proc: &str, targets: &[String], args: &[Expr]) -> Result<(Sym, Sym), FrontendError> {
        let callee = self.prog.proc(proc).unwrap();
        let base = strip_copy(proc, self.comp);
        let c = self.letters.intern(
            call_text(proc, args),
            LetterSem::Call {
                proc: proc.to_string(),
                base: base.clone(),
                params: callee.params.iter().map(|v| v.name.clone()).collect(),
                args: args.to_vec(),
            },
            self.comp,
        )?;
        let r = self.letters.intern(
            ret_text(proc, targets),
            LetterSem::Ret {
                proc: proc.to_string(),
                base,
                outputs: callee.outputs.iter().map(|v| v.name.clone()).collect(),
                targets: targets.to_vec(),
            },
            self.comp,
        )?;
        Ok((c, r))
    }

    /// Nonterminal deriving the runs of `body` followed by `cont`.
    fn seq(&mut self, p: &Proc, body: &[Stmt], mut cont: usize) -> Result<usize, FrontendError> {
        for s in body.iter().rev() {
            cont = self.stmt(p, s, cont)?;
        }
        Ok(cont)
    }

    fn stmt(&mut self, p: &Proc, s: &Stmt, cont: usize) -> Result<usize, FrontendError> {
        let name = p.name.as_str();
        match s {
            Stmt::Assign(x, e) => self.int(name, s.text(), LetterSem::Assign(x.clone(), e.clone()), cont),
            Stmt::Store(a, i, e) => self.int(name, s.text(), LetterSem::Store(a.clone(), i.clone(), e.clone()), cont),
            Stmt::Assume(c) => self.int(name, s.text(), LetterSem::Assume(c.clone()), cont),
            Stmt::Return(es) => {
                let end = self.end_nt[name];
                if es.is_empty() {
                    return Ok(end);
                }
                let outs = p.outputs.iter().map(|v| v.name.clone()).collect();
                self.int(name, s.text(), LetterSem::Return(outs, es.clone()), end)
            }
            Stmt::If(c, t, e) => {
                let tx = self.seq(p, t, cont)?;
                let ex = self.seq(p, e, cont)?;
                let at = self.letters.intern(assume_text(c), LetterSem::Assume(c.clone()), self.comp)?;
                let neg = c.negate();
                let af = self.letters.intern(assume_text(&neg), LetterSem::Assume(neg), self.comp)?;
                let x = self.fresh(name);
                self.g.prods[x].push(Rhs::Int(at, tx));
                self.g.prods[x].push(Rhs::Int(af, ex));
                Ok(x)
            }
            Stmt::Call { targets, proc, args } => {
                let (c, r) = self.call_letters(proc, targets, args)?;
                let x = self.fresh(name);
                let y = self.entry_nt[proc.as_str()];
                self.g.prods[x].push(Rhs::Call(c, y, r, cont));
                Ok(x)
            }
        }
    }
}

fn assume_text(c: &Expr) -> String {
    format!("assume {c}")
}

fn strip_copy(name: &str, comp: usize) -> String {
    name.strip_suffix(&format!("_{comp}")).unwrap_or(name).to_string()
}

fn compile_component(
    prog: &Program,
    entry: &str,
    comp: usize,
    letters: &mut Letters,
) -> Result<RawGrammar, FrontendError> {
    let ep = prog
        .proc(entry)
        .ok_or_else(|| FrontendError::Semantic(format!("unknown entry procedure `{entry}`")))?;
    let procs = reachable_procs(prog, entry);
    let mut c = Compiler {
        prog,
        comp,
        letters,
        g: RawGrammar {
            names: Vec::new(),
            prods: Vec::new(),
            start: 0,
        },
        entry_nt: BTreeMap::new(),
        end_nt: BTreeMap::new(),
        counter: BTreeMap::new(),
    };
    let start = c.g.nt(format!("S.{entry}"));
    c.g.start = start;
    let done = c.g.nt(format!("E.{entry}"));
    c.g.prods[done].push(Rhs::Eps);
    for p in &procs {
        let x = c.g.nt(p.clone());
        c.entry_nt.insert(p.clone(), x);
        let e = c.g.nt(format!("{p}.end"));
        c.g.prods[e].push(Rhs::Eps);
        c.end_nt.insert(p.clone(), e);
    }
    for name in &procs {
        let p = prog.proc(name).unwrap();
        let x = c.seq(p, &p.body, c.end_nt[name.as_str()])?;
        let rhs = c.g.prods[x].clone();
        let entry_x = c.entry_nt[name.as_str()];
        c.g.prods[entry_x] = rhs;
    }
    // the entry is called with every parameter passed by name and outputs returned by name
    let args: Vec<Expr> = ep.params.iter().map(|v| Expr::Var(v.name.clone())).collect();
    let targets: Vec<String> = ep.outputs.iter().map(|v| v.name.clone()).collect();
    let (cl, rl) = c.call_letters(entry, &targets, &args)?;
    let y = c.entry_nt[entry];
    c.g.prods[start].push(Rhs::Call(cl, y, rl, done));
    Ok(c.g)
}

fn var_table(prog: &Program, procs: &BTreeSet<String>) -> Result<(BTreeMap<String, Type>, BTreeSet<String>), FrontendError> {
    let mut vars = BTreeMap::new();
    let mut params = BTreeSet::new();
    for name in procs {
        let p = prog.proc(name).unwrap();
        for v in p.vars() {
            if let Some(t) = vars.insert(v.name.clone(), v.ty) {
                if t != v.ty {
                    return Err(FrontendError::Semantic(format!(
                        "variable `{}` has types {t} and {} in different procedures",
                        v.name, v.ty
                    )));
                }
            }
        }
        params.extend(p.params.iter().map(|v| v.name.clone()));
    }
    Ok((vars, params))
}

/// Builds one component per `(program, entry)`; component `i` (from 1) reads the letters of
/// the `i`-th program. Programs must use disjoint names (see [`make_copies`]).
pub fn build_system(parts: &[(Program, String)]) -> Result<System, FrontendError> {
    let mut letters = Letters {
        alphabet: Alphabet::new(),
        sems: Vec::new(),
    };
    let mut raws = Vec::new();
    let mut seen_vars: BTreeMap<String, usize> = BTreeMap::new();
    for (i, (p, entry)) in parts.iter().enumerate() {
        let raw = compile_component(p, entry, i + 1, &mut letters)?;
        let (vars, params) = var_table(p, &reachable_procs(p, entry))?;
        for v in vars.keys() {
            if let Some(j) = seen_vars.insert(v.clone(), i + 1) {
                return Err(FrontendError::Semantic(format!(
                    "variable `{v}` appears in components {j} and {}",
                    i + 1
                )));
            }
        }
        raws.push((raw, vars, params));
    }
    let alphabet = Arc::new(letters.alphabet);
    let mut components = Vec::new();
    for (i, ((p, entry), (raw, vars, params))) in parts.iter().zip(raws).enumerate() {
        let mut g = Vpg::new(alphabet.clone(), [i + 1].into_iter().collect());
        for n in &raw.names {
            g.add_nt(n.clone());
        }
        for (x, ps) in raw.prods.iter().enumerate() {
            for r in ps {
                g.add(x, *r).map_err(|e| FrontendError::Semantic(e.to_string()))?;
            }
        }
        g.starts.insert(raw.start);
        components.push(Component {
            index: i + 1,
            program: p.clone(),
            entry: entry.clone(),
            grammar: g.trim(),
            vars,
            params,
        });
    }
    Ok(System {
        alphabet,
        sems: letters.sems,
        components,
    })
}

/// Single-component system of `entry` under its own names.
pub fn to_vpg(p: &Program, entry: &str) -> Result<System, FrontendError> {
    build_system(&[(p.clone(), entry.to_string())])
}

/// `k` renamed copies of `p`, component `i` running `entry_i`.
pub fn copies_system(p: &Program, entry: &str, k: usize) -> Result<System, FrontendError> {
    let parts: Vec<(Program, String)> = make_copies(p, k)
        .into_iter()
        .enumerate()
        .map(|(i, q)| (q, format!("{entry}_{}", i + 1)))
        .collect();
    build_system(&parts)
}

/// Syntactic runs of component `comp` with at most `max_len` letters, by walking the AST.
pub fn ast_runs(sys: &System, comp: usize, max_len: usize) -> Result<Vec<Word>, FrontendError> {
    enum Item<'a> {
        Stmt(&'a Proc, &'a Stmt),
        Emit(Sym),
        End,
    }
    let c = sys.component(comp);
    let prog = &c.program;
    let ep = c.entry_proc();
    let lookup = |t: String| -> Result<Sym, FrontendError> {
        sys.letter(&t)
            .ok_or_else(|| FrontendError::Semantic(format!("no letter for `{t}`")))
    };
    fn body_items<'a>(p: &'a Proc, body: &'a [Stmt], items: &mut Vec<Item<'a>>) {
        for s in body.iter().rev() {
            items.push(Item::Stmt(p, s));
        }
    }
    let args: Vec<Expr> = ep.params.iter().map(|v| Expr::Var(v.name.clone())).collect();
    let targets: Vec<String> = ep.outputs.iter().map(|v| v.name.clone()).collect();
    let mut items = vec![Item::Emit(lookup(ret_text(&ep.name, &targets))?), Item::End];
    body_items(ep, &ep.body, &mut items);
    let first = lookup(call_text(&ep.name, &args))?;

    fn pending(items: &[Item]) -> usize {
        items.iter().filter(|i| matches!(i, Item::Emit(_))).count()
    }

    fn go<'a>(
        prog: &'a Program,
        sys: &System,
        mut items: Vec<Item<'a>>,
        word: &mut Word,
        max_len: usize,
        out: &mut Vec<Word>,
    ) -> Result<(), FrontendError> {
        if word.len() + pending(&items) > max_len {
            return Ok(());
        }
        let lookup = |t: String| -> Result<Sym, FrontendError> {
            sys.letter(&t)
                .ok_or_else(|| FrontendError::Semantic(format!("no letter for `{t}`")))
        };
        let Some(item) = items.pop() else {
            out.push(word.clone());
            return Ok(());
        };
        let n = word.len();
        match item {
            Item::End => go(prog, sys, items, word, max_len, out)?,
            Item::Emit(s) => {
                word.push(s);
                go(prog, sys, items, word, max_len, out)?;
            }
            Item::Stmt(p, s) => match s {
                Stmt::Assign(..) | Stmt::Store(..) | Stmt::Assume(_) => {
                    word.push(lookup(s.text())?);
                    go(prog, sys, items, word, max_len, out)?;
                }
                Stmt::Return(es) => {
                    if !es.is_empty() {
                        word.push(lookup(s.text())?);
                    }
                    while let Some(i) = items.pop() {
                        if matches!(i, Item::End) {
                            break;
                        }
                    }
                    go(prog, sys, items, word, max_len, out)?;
                }
                Stmt::If(c, t, e) => {
                    for (cond, branch) in [(c.clone(), t), (c.negate(), e)] {
                        let mut next: Vec<Item> = items.iter().map(copy_item).collect();
                        body_items(p, branch, &mut next);
                        word.push(lookup(assume_text(&cond))?);
                        go(prog, sys, next, word, max_len, out)?;
                        word.truncate(n);
                    }
                }
                Stmt::Call { targets, proc, args } => {
                    let callee = prog.proc(proc).unwrap();
                    word.push(lookup(call_text(proc, args))?);
                    items.push(Item::Emit(lookup(ret_text(proc, targets))?));
                    items.push(Item::End);
                    body_items(callee, &callee.body, &mut items);
                    go(prog, sys, items, word, max_len, out)?;
                }
            },
        }
        word.truncate(n);
        Ok(())
    }
    fn copy_item<'a>(i: &Item<'a>) -> Item<'a> {
        match i {
            Item::Stmt(p, s) => Item::Stmt(p, s),
            Item::Emit(s) => Item::Emit(*s),
            Item::End => Item::End,
        }
    }
    let mut out = Vec::new();
    if max_len >= 2 {
        let mut word = vec![first];
        go(prog, sys, items, &mut word, max_len, &mut out)?;
    }
    out.sort();
    out.dedup();
    Ok(out)
}
