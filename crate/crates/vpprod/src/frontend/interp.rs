//! Concrete semantics of runs: one shared stack of union frames, or one stack per component.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{BinOp, Expr, Type};
use super::compile::{LetterSem, System};
use crate::vpl::Sym;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    /// Sparse array; absent indices read as 0.
    Arr(BTreeMap<i64, i64>),
}

impl Value {
    pub fn default_of(t: Type) -> Value {
        match t {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
            Type::IntArray => Value::Arr(BTreeMap::new()),
        }
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(n) => *n,
            Value::Bool(b) => *b as i64,
            Value::Arr(_) => 0,
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Int(n) => *n != 0,
            Value::Arr(_) => false,
        }
    }
}

pub type Valuation = BTreeMap<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StackMode {
    /// One stack whose frames hold every component's variables.
    Single,
    /// One stack per component.
    Multi,
}

pub fn eval(e: &Expr, nu: &Valuation) -> Value {
    match e {
        Expr::Int(n) => Value::Int(*n),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Var(v) => nu.get(v).cloned().unwrap_or(Value::Int(0)),
        Expr::Neg(x) => Value::Int(eval(x, nu).as_int().wrapping_neg()),
        Expr::Not(x) => Value::Bool(!eval(x, nu).as_bool()),
        Expr::Select(a, i) => {
            let i = eval(i, nu).as_int();
            match eval(a, nu) {
                Value::Arr(m) => Value::Int(m.get(&i).copied().unwrap_or(0)),
                _ => Value::Int(0),
            }
        }
        Expr::Bin(op, a, b) => {
            let (x, y) = (eval(a, nu), eval(b, nu));
            let (i, j) = (x.as_int(), y.as_int());
            match op {
                BinOp::Add => Value::Int(i.wrapping_add(j)),
                BinOp::Sub => Value::Int(i.wrapping_sub(j)),
                BinOp::Mul => Value::Int(i.wrapping_mul(j)),
                // Euclidean, as in SMT-LIB; division by zero yields 0
                BinOp::Div => Value::Int(if j == 0 { 0 } else { i.div_euclid(j) }),
                BinOp::Mod => Value::Int(if j == 0 { 0 } else { i.rem_euclid(j) }),
                BinOp::Lt => Value::Bool(i < j),
                BinOp::Le => Value::Bool(i <= j),
                BinOp::Gt => Value::Bool(i > j),
                BinOp::Ge => Value::Bool(i >= j),
                BinOp::Eq => Value::Bool(x == y),
                BinOp::Ne => Value::Bool(x != y),
                BinOp::And => Value::Bool(x.as_bool() && y.as_bool()),
                BinOp::Or => Value::Bool(x.as_bool() || y.as_bool()),
            }
        }
    }
}

/// Applies an internal letter to a frame; `None` when an assumption fails.
fn internal(sem: &LetterSem, nu: &mut Valuation) -> Option<()> {
    match sem {
        LetterSem::Assign(x, e) => {
            let v = eval(e, nu);
            nu.insert(x.clone(), v);
        }
        LetterSem::Store(a, i, e) => {
            let (i, v) = (eval(i, nu).as_int(), eval(e, nu).as_int());
            let mut m = match nu.get(a) {
                Some(Value::Arr(m)) => m.clone(),
                _ => BTreeMap::new(),
            };
            m.insert(i, v);
            nu.insert(a.clone(), Value::Arr(m));
        }
        LetterSem::Assume(c) => {
            if !eval(c, nu).as_bool() {
                return None;
            }
        }
        LetterSem::Return(outs, es) => {
            let vals: Vec<Value> = es.iter().map(|e| eval(e, nu)).collect();
            for (o, v) in outs.iter().zip(vals) {
                nu.insert(o.clone(), v);
            }
        }
        LetterSem::Call { .. } | LetterSem::Ret { .. } => unreachable!(),
    }
    Some(())
}

/// Fresh frame of component `comp` entered by `sem`: parameters bound, the rest at defaults.
fn callee_frame(sys: &System, comp: usize, sem: &LetterSem, caller: &Valuation) -> Valuation {
    let LetterSem::Call { params, args, .. } = sem else { unreachable!() };
    let mut nu: Valuation = sys
        .component(comp)
        .vars
        .iter()
        .map(|(v, t)| (v.clone(), Value::default_of(*t)))
        .collect();
    for (p, a) in params.iter().zip(args) {
        nu.insert(p.clone(), eval(a, caller));
    }
    nu
}

/// Caller frame after returning with `sem` from `callee`.
fn returned(sem: &LetterSem, caller: &Valuation, callee: &Valuation) -> Valuation {
    let LetterSem::Ret { outputs, targets, .. } = sem else { unreachable!() };
    let mut nu = caller.clone();
    for (t, o) in targets.iter().zip(outputs) {
        nu.insert(t.clone(), callee.get(o).cloned().unwrap_or(Value::Int(0)));
    }
    nu
}

fn restrict(sys: &System, comp: usize, nu: &Valuation) -> Valuation {
    sys.component(comp)
        .vars
        .iter()
        .map(|(v, t)| (v.clone(), nu.get(v).cloned().unwrap_or(Value::default_of(*t))))
        .collect()
}

/// Top-frame valuations reachable by `run` from the single frame `init` (missing variables
/// read as defaults). Letter semantics are deterministic, so the result has at most one
/// element; it is empty when an assumption fails or a return has no pending call.
pub fn interpret(sys: &System, run: &[Sym], init: &Valuation, mode: StackMode) -> BTreeSet<Valuation> {
    let full: Valuation = sys
        .vars()
        .into_iter()
        .map(|(v, t)| (v.clone(), init.get(&v).cloned().unwrap_or(Value::default_of(t))))
        .collect();
    let res = match mode {
        StackMode::Single => single(sys, run, full),
        StackMode::Multi => multi(sys, run, full),
    };
    res.into_iter().collect()
}

fn single(sys: &System, run: &[Sym], init: Valuation) -> Option<Valuation> {
    let mut stack = vec![init];
    for &a in run {
        let sem = sys.sem(a);
        let k = sys.alphabet.component(a);
        match sem {
            LetterSem::Call { .. } => {
                let top = stack.last().unwrap();
                let mut nu = top.clone();
                nu.extend(callee_frame(sys, k, sem, top));
                stack.push(nu);
            }
            LetterSem::Ret { .. } => {
                if stack.len() < 2 {
                    return None;
                }
                let top = stack.pop().unwrap();
                let below = stack.pop().unwrap();
                // component k resumes the caller frame; everything else comes from the top
                let mine = returned(sem, &restrict(sys, k, &below), &top);
                let mut nu = top;
                nu.extend(mine);
                stack.push(nu);
            }
            _ => internal(sem, stack.last_mut().unwrap())?,
        }
    }
    stack.pop()
}

fn multi(sys: &System, run: &[Sym], init: Valuation) -> Option<Valuation> {
    let mut stacks: Vec<Vec<Valuation>> = sys
        .components
        .iter()
        .map(|c| vec![restrict(sys, c.index, &init)])
        .collect();
    for &a in run {
        let sem = sys.sem(a);
        let k = sys.alphabet.component(a);
        let st = &mut stacks[k - 1];
        match sem {
            LetterSem::Call { .. } => {
                let nu = callee_frame(sys, k, sem, st.last().unwrap());
                st.push(nu);
            }
            LetterSem::Ret { .. } => {
                if st.len() < 2 {
                    return None;
                }
                let top = st.pop().unwrap();
                let below = st.pop().unwrap();
                st.push(returned(sem, &below, &top));
            }
            _ => internal(sem, st.last_mut().unwrap())?,
        }
    }
    Some(stacks.into_iter().flat_map(|mut s| s.pop().unwrap()).collect())
}

/// Integer valuation from `(name, value)` pairs.
pub fn ints(pairs: &[(&str, i64)]) -> Valuation {
    pairs.iter().map(|(k, v)| (k.to_string(), Value::Int(*v))).collect()
}
