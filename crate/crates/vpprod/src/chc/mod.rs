//! Constrained Horn clauses for product programs, their SMT-LIB form, and a solver driver.

mod encode;
mod solve;
mod term;


pub use encode::{copies_with_entries, encode_baseline, encode_nwa, encode_vpg, Baseline, EncodeOptions, NwaInfo};
pub use solve::{default_solvers, portfolio, solve, PortfolioResult, SolveOutcome, SolverSpec, Status};
pub use term::eval_term;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::frontend::{FrontendError, Type};

#[derive(Debug, Error)]
pub enum ChcError {
    #[error("return-match condition broken: {0}")]
    ReturnMatch(String),
    #[error("grammar is not well-matched: {0}")]
    IllMatched(String),
    #[error("property: {0}")]
    Property(#[from] FrontendError),
    #[error("solver configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pred {
    pub name: String,
    /// Structural identity the name is hashed from.
    pub label: String,
    pub sorts: Vec<Type>,
}

/// `pred(args)` with SMT-LIB terms as arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct App {
    pub pred: usize,
    pub args: Vec<String>,
}

/// `forall vars. body ∧ constraints ⇒ head`; no head means `false`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Clause {
    pub vars: BTreeMap<String, Type>,
    pub body: Vec<App>,
    pub constraints: Vec<String>,
    pub head: Option<App>,
}

#[derive(Clone, Debug, Default)]
pub struct ChcSystem {
    pub preds: Vec<Pred>,
    pub clauses: Vec<Clause>,
    by_label: HashMap<String, usize>,
    names: BTreeSet<String>,
}

fn short_hash(s: &str) -> String {
    let d = Sha256::digest(s.as_bytes());
    d.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

impl ChcSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Predicate for `label`, declared on first use. Names are `prefix_<hash of label>`.
    pub fn pred(&mut self, prefix: &str, label: &str, sorts: &[Type]) -> usize {
        if let Some(&i) = self.by_label.get(label) {
            return i;
        }
        let base = format!("{prefix}_{}", short_hash(label));
        let mut name = base.clone();
        let mut n = 2;
        while self.names.contains(&name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.names.insert(name.clone());
        self.preds.push(Pred {
            name,
            label: label.to_string(),
            sorts: sorts.to_vec(),
        });
        self.by_label.insert(label.to_string(), self.preds.len() - 1);
        self.preds.len() - 1
    }

    pub fn add(&mut self, c: Clause) {
        self.clauses.push(c);
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_preds(&self) -> usize {
        self.preds.len()
    }

    /// Property clauses: those without a head.
    pub fn num_queries(&self) -> usize {
        self.clauses.iter().filter(|c| c.head.is_none()).count()
    }

    fn app(&self, a: &App) -> String {
        let p = &self.preds[a.pred];
        if a.args.is_empty() {
            p.name.clone()
        } else {
            format!("({} {})", p.name, a.args.join(" "))
        }
    }

    pub fn render_clause(&self, c: &Clause) -> String {
        let mut parts: Vec<String> = c.body.iter().map(|a| self.app(a)).collect();
        parts.extend(c.constraints.iter().cloned());
        let head = c.head.as_ref().map_or("false".to_string(), |h| self.app(h));
        let imp = match parts.len() {
            0 => head,
            1 => format!("(=> {} {head})", parts[0]),
            _ => format!("(=> (and {}) {head})", parts.join(" ")),
        };
        if c.vars.is_empty() {
            imp
        } else {
            let vs: Vec<String> = c.vars.iter().map(|(v, t)| format!("({v} {})", t.smt())).collect();
            format!("(forall ({}) {imp})", vs.join(" "))
        }
    }

    /// SMT-LIB text: declarations sorted by name, clauses sorted by text, duplicates dropped.
    pub fn to_smtlib(&self) -> String {
        let mut out = String::from("(set-logic HORN)\n");
        let mut decls: Vec<&Pred> = self.preds.iter().collect();
        decls.sort_by(|a, b| a.name.cmp(&b.name));
        for p in decls {
            let sorts: Vec<&str> = p.sorts.iter().map(|t| t.smt()).collect();
            let _ = writeln!(out, "(declare-fun {} ({}) Bool)", p.name, sorts.join(" "));
        }
        let clauses: BTreeSet<String> = self.clauses.iter().map(|c| self.render_clause(c)).collect();
        for c in clauses {
            let _ = writeln!(out, "(assert {c})");
        }
        out.push_str("(check-sat)\n");
        out
    }

    pub fn emit(&self, path: &Path) -> Result<(), ChcError> {
        std::fs::write(path, self.to_smtlib())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sorted_and_deduplicated() {
        let mut s = ChcSystem::new();
        let p = s.pred("I", "b", &[Type::Int]);
        let q = s.pred("I", "a", &[]);
        assert_eq!(s.pred("I", "b", &[Type::Int]), p);
        let x: BTreeMap<String, Type> = [("x".to_string(), Type::Int)].into();
        let fact = Clause {
            vars: x.clone(),
            constraints: vec!["(> x 0)".into()],
            head: Some(App { pred: p, args: vec!["x".into()] }),
            ..Default::default()
        };
        s.add(fact.clone());
        s.add(fact);
        s.add(Clause {
            body: vec![App { pred: q, args: vec![] }],
            ..Default::default()
        });
        let text = s.to_smtlib();
        let pn = &s.preds[p].name;
        let qn = &s.preds[q].name;
        assert!(text.starts_with("(set-logic HORN)\n"));
        assert!(text.ends_with("(check-sat)\n"));
        assert!(text.contains(&format!("(declare-fun {pn} (Int) Bool)")));
        assert!(text.contains(&format!("(assert (forall ((x Int)) (=> (> x 0) ({pn} x))))")));
        assert!(text.contains(&format!("(assert (=> {qn} false))")));
        assert_eq!(text.matches("(assert").count(), 2);
        assert_eq!(s.num_queries(), 1);
    }

    #[test]
    fn names_are_stable_hashes() {
        let mut a = ChcSystem::new();
        let mut b = ChcSystem::new();
        a.pred("P", "x", &[]);
        let i = a.pred("P", "y", &[]);
        let j = b.pred("P", "y", &[]);
        assert_eq!(a.preds[i].name, b.preds[j].name);
        assert_eq!(a.preds[i].name.len(), 2 + 12);
    }
}
