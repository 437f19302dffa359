//! Bottom-up evaluation of reduction expressions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use super::expr::{Node, ReductionExpr};
use super::{
    concat_vpg, generic_lex_reduction, lockstep_vpg, nested_concat_vpg, optimized_product, ProductStats,
    ReductionError,
};
use crate::orders::{concat_order, exclude_letters, lockstep_order, nested_concat_order, OrderAutomaton};
use crate::vpl::{vpa_to_vpg, vpg_to_vpa, Alphabet, Kind, Rhs, Sym, Vpa, Vpg, Word};

/// Which construction builds the product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Sleep-set automaton of the repaired order intersected with the well-nested shuffle.
    Generic,
    /// Greedy product automaton.
    Aut,
    /// Greedy product converted to a grammar.
    Vpg,
    /// Grammar built directly from the component grammars.
    Direct,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" => Ok(Mode::Generic),
            "aut" => Ok(Mode::Aut),
            "vpg" => Ok(Mode::Vpg),
            "direct" => Ok(Mode::Direct),
            _ => Err(format!("unknown mode `{s}` (expected generic, aut, vpg or direct)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Generic => "generic",
            Mode::Aut => "aut",
            Mode::Vpg => "vpg",
            Mode::Direct => "direct",
        })
    }
}

#[derive(Clone, Debug)]
pub enum Product {
    Automaton(Vpa),
    Grammar(Vpg),
}

impl Product {
    pub fn to_vpg(&self) -> Vpg {
        match self {
            Product::Automaton(a) => vpa_to_vpg(a),
            Product::Grammar(g) => g.clone(),
        }
    }

    pub fn to_vpa(&self) -> Vpa {
        match self {
            Product::Automaton(a) => a.clone(),
            Product::Grammar(g) => vpg_to_vpa(g),
        }
    }

    /// Well-matched words of length at most `max_len`.
    pub fn enumerate(&self, max_len: usize) -> BTreeSet<Word> {
        match self {
            Product::Automaton(a) => a.enumerate_well_matched(max_len),
            Product::Grammar(g) => g.enumerate(max_len),
        }
    }

    pub fn accepts(&self, w: &[Sym]) -> bool {
        match self {
            Product::Automaton(a) => a.accepts_well_matched(w),
            Product::Grammar(g) => vpg_to_vpa(g).accepts_well_matched(w),
        }
    }

    pub fn dump(&self) -> String {
        match self {
            Product::Automaton(a) => a.dump(),
            Product::Grammar(g) => g.dump(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeStats {
    pub node: String,
    #[serde(flatten)]
    pub product: ProductStats,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub product: Product,
    /// One entry per greedy product built.
    pub stats: Vec<NodeStats>,
}

/// Maps an excluded name to the letters it denotes.
pub type Resolver<'a> = dyn Fn(&str) -> Option<BTreeSet<Sym>> + 'a;

/// Resolves excluded names as letter names.
pub fn letter_resolver(al: &Alphabet) -> impl Fn(&str) -> Option<BTreeSet<Sym>> + '_ {
    move |n| al.lookup(n).map(|s| [s].into_iter().collect())
}

/// Grammar of the mirrored words of `g`, over `target` (the mirrored alphabet).
pub fn reverse_vpg(g: &Vpg, target: &Arc<Alphabet>) -> Vpg {
    vpa_to_vpg(&vpg_to_vpa(g).reversed(target.clone()))
}

struct Ctx<'a> {
    inputs: &'a BTreeMap<String, Vpg>,
    al: Arc<Alphabet>,
    mirrored: Arc<Alphabet>,
    resolve: &'a Resolver<'a>,
    mode: Mode,
    stats: Vec<NodeStats>,
}

/// Builds the product program for `expr` from one grammar per leaf.
pub fn evaluate(
    expr: &ReductionExpr,
    inputs: &BTreeMap<String, Vpg>,
    mode: Mode,
    resolve: &Resolver<'_>,
) -> Result<Evaluation, ReductionError> {
    expr.validate()?;
    let leaves = expr.leaves();
    for l in &leaves {
        if !inputs.contains_key(l) {
            return Err(ReductionError::UnknownLeaf(l.clone()));
        }
    }
    let al = inputs[&leaves[0]].alphabet.clone();
    let mut ctx = Ctx {
        inputs,
        mirrored: Arc::new(al.mirrored()),
        al,
        resolve,
        mode,
        stats: Vec::new(),
    };
    let product = match mode {
        Mode::Direct => Product::Grammar(ctx.direct(expr)?),
        Mode::Aut | Mode::Generic => Product::Automaton(ctx.automaton(expr)?),
        Mode::Vpg => Product::Grammar(vpa_to_vpg(&ctx.automaton(expr)?)),
    };
    Ok(Evaluation {
        product,
        stats: ctx.stats,
    })
}

fn call_pairs(gs: &[Vpg]) -> BTreeSet<(Sym, Sym)> {
    gs.iter()
        .flat_map(|g| g.prods.iter().flatten())
        .filter_map(|r| match *r {
            Rhs::Call(c, _, rr, _) => Some((c, rr)),
            _ => None,
        })
        .collect()
}

fn node_order(
    e: &ReductionExpr,
    al: &Arc<Alphabet>,
    groups: &[BTreeSet<usize>],
) -> Result<OrderAutomaton, ReductionError> {
    Ok(match &e.node {
        Node::Concat(_) => concat_order(al, groups)?,
        Node::NestedConcat(_) => nested_concat_order(al, groups)?,
        Node::Lockstep(s, _) => lockstep_order(al, groups, s)?,
        Node::Leaf(_) => unreachable!("leaves have no order"),
    })
}

impl Ctx<'_> {
    fn excluded(&self, e: &ReductionExpr, comps: &BTreeSet<usize>) -> Result<BTreeSet<Sym>, ReductionError> {
        let mut out = BTreeSet::new();
        for n in &e.exclude {
            let set = (self.resolve)(n).ok_or_else(|| ReductionError::UnknownExclude(n.clone()))?;
            out.extend(
                set.into_iter()
                    .filter(|&s| comps.contains(&self.al.component(s)) && self.al.kind(s) != Kind::Int),
            );
        }
        Ok(out)
    }

    fn automaton(&mut self, e: &ReductionExpr) -> Result<Vpa, ReductionError> {
        if let Node::Leaf(n) = &e.node {
            return Ok(vpg_to_vpa(&self.inputs[n].trim()));
        }
        let kids: Vec<Vpa> = e
            .children()
            .iter()
            .map(|c| self.automaton(c))
            .collect::<Result<_, _>>()?;
        let groups: Vec<BTreeSet<usize>> = kids.iter().map(|k| k.comps.clone()).collect();
        let comps: BTreeSet<usize> = groups.iter().flatten().copied().collect();
        let excluded = self.excluded(e, &comps)?;
        let al = if e.right_aligned { self.mirrored.clone() } else { self.al.clone() };
        let grammars: Vec<Vpg> = kids
            .iter()
            .map(|k| {
                if e.right_aligned {
                    vpa_to_vpg(&k.reversed(al.clone()))
                } else {
                    vpa_to_vpg(k)
                }
            })
            .collect();
        let key = |r: &Rhs| match *r {
            Rhs::Call(c, ..) if excluded.contains(&c) => Some(Kind::Int),
            _ => r.kind(),
        };
        let parts: Vec<Vpa> = grammars
            .iter()
            .map(|g| vpg_to_vpa(&g.uniformize_with(key)))
            .collect();
        let base = node_order(e, &al, &groups)?;
        let order = if excluded.is_empty() {
            base
        } else {
            exclude_letters(&base, &excluded, &call_pairs(&grammars))?.order
        };
        let product = match self.mode {
            Mode::Generic => generic_lex_reduction(&order, &parts)?,
            _ => {
                let (p, stats) = optimized_product(&order, &parts)?;
                self.stats.push(NodeStats {
                    node: e.to_string(),
                    product: stats,
                });
                p.trim_states()
            }
        };
        Ok(if e.right_aligned {
            product.reversed(self.al.clone()).trim_states()
        } else {
            product
        })
    }

    fn direct(&mut self, e: &ReductionExpr) -> Result<Vpg, ReductionError> {
        if let Node::Leaf(n) = &e.node {
            return Ok(self.inputs[n].trim().uniformize());
        }
        if !e.exclude.is_empty() {
            return Err(ReductionError::Unsupported("exclude".into()));
        }
        let kids: Vec<Vpg> = e
            .children()
            .iter()
            .map(|c| self.direct(c))
            .collect::<Result<_, _>>()?;
        let gs: Vec<Vpg> = if e.right_aligned {
            kids.iter()
                .map(|g| reverse_vpg(g, &self.mirrored).uniformize())
                .collect()
        } else {
            kids
        };
        let fold = |f: fn(&Vpg, &Vpg) -> Result<Vpg, ReductionError>| -> Result<Vpg, ReductionError> {
            let mut acc = gs.last().unwrap().clone();
            for g in gs.iter().rev().skip(1) {
                acc = f(g, &acc.uniformize())?;
            }
            Ok(acc)
        };
        let out = match &e.node {
            Node::Concat(_) => fold(concat_vpg)?,
            Node::NestedConcat(_) => fold(nested_concat_vpg)?,
            Node::Lockstep(s, _) => {
                let refs: Vec<&Vpg> = gs.iter().collect();
                lockstep_vpg(s, &refs)?
            }
            Node::Leaf(_) => unreachable!(),
        };
        let out = if e.right_aligned {
            reverse_vpg(&out, &self.al)
        } else {
            out
        };
        Ok(out.uniformize())
    }
}
