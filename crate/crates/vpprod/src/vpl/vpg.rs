use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use super::{comps_vec, Alphabet, Kind, Sym, VplError, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rhs {
    Eps,
    Int(Sym, usize),
    Call(Sym, usize, Sym, usize),
}

impl Rhs {
    pub fn kind(&self) -> Option<Kind> {
        match self {
            Rhs::Eps => None,
            Rhs::Int(..) => Some(Kind::Int),
            Rhs::Call(..) => Some(Kind::Call),
        }
    }

    pub fn nonterminals(&self) -> Vec<usize> {
        match *self {
            Rhs::Eps => vec![],
            Rhs::Int(_, y) => vec![y],
            Rhs::Call(_, y, _, z) => vec![y, z],
        }
    }

    pub fn map(&self, f: impl Fn(usize) -> usize) -> Rhs {
        match *self {
            Rhs::Eps => Rhs::Eps,
            Rhs::Int(a, y) => Rhs::Int(a, f(y)),
            Rhs::Call(c, y, r, z) => Rhs::Call(c, f(y), r, f(z)),
        }
    }
}

/// Well-matched visibly pushdown grammar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vpg {
    pub alphabet: Arc<Alphabet>,
    pub comps: BTreeSet<usize>,
    pub names: Vec<String>,
    pub prods: Vec<Vec<Rhs>>,
    pub starts: BTreeSet<usize>,
}

impl Vpg {
    pub fn new(alphabet: Arc<Alphabet>, comps: BTreeSet<usize>) -> Self {
        Vpg {
            alphabet,
            comps,
            names: Vec::new(),
            prods: Vec::new(),
            starts: BTreeSet::new(),
        }
    }

    pub fn add_nt(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.prods.push(Vec::new());
        self.names.len() - 1
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn num_nts(&self) -> usize {
        self.names.len()
    }

    pub fn num_prods(&self) -> usize {
        self.prods.iter().map(|p| p.len()).sum()
    }

    fn check(&self, a: Sym, want: Kind) -> Result<(), VplError> {
        let l = self.alphabet.letter(a);
        if !self.comps.contains(&l.component) {
            return Err(VplError::ForeignLetter(l.name.clone()));
        }
        if l.kind != want {
            return Err(VplError::WrongKind(l.name.clone(), l.kind.tag(), want.tag()));
        }
        Ok(())
    }

    pub fn add(&mut self, x: usize, rhs: Rhs) -> Result<(), VplError> {
        match rhs {
            Rhs::Eps => {}
            Rhs::Int(a, _) => self.check(a, Kind::Int)?,
            Rhs::Call(c, _, r, _) => {
                self.check(c, Kind::Call)?;
                self.check(r, Kind::Ret)?;
            }
        }
        if !self.prods[x].contains(&rhs) {
            self.prods[x].push(rhs);
        }
        Ok(())
    }

    /// Every nonterminal's right-hand sides all start with a call, all with an internal, or are all ε.
    pub fn is_uniform(&self) -> bool {
        self.prods.iter().all(|ps| {
            let kinds: BTreeSet<Option<Kind>> = ps.iter().map(|r| r.kind()).collect();
            kinds.len() <= 1
        })
    }

    pub fn productive(&self) -> Vec<bool> {
        let n = self.num_nts();
        let mut prod = vec![false; n];
        loop {
            let mut changed = false;
            for x in 0..n {
                if prod[x] {
                    continue;
                }
                if self.prods[x]
                    .iter()
                    .any(|r| r.nonterminals().iter().all(|&y| prod[y]))
                {
                    prod[x] = true;
                    changed = true;
                }
            }
            if !changed {
                return prod;
            }
        }
    }

    /// Removes non-generating symbols, then symbols unreachable from a start.
    /// An empty language keeps a single start symbol without productions.
    pub fn trim(&self) -> Vpg {
        let prod = self.productive();
        let n = self.num_nts();
        let mut reach = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in &self.starts {
            if prod[s] {
                reach[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            for r in &self.prods[x] {
                let ys = r.nonterminals();
                if ys.iter().all(|&y| prod[y]) {
                    for y in ys {
                        if !reach[y] {
                            reach[y] = true;
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
        let mut g = Vpg::new(self.alphabet.clone(), self.comps.clone());
        let mut map = vec![usize::MAX; n];
        for x in 0..n {
            if reach[x] {
                map[x] = g.add_nt(self.names[x].clone());
            }
        }
        for x in 0..n {
            if !reach[x] {
                continue;
            }
            for r in &self.prods[x] {
                if r.nonterminals().iter().all(|&y| reach[y]) {
                    g.prods[map[x]].push(r.map(|y| map[y]));
                }
            }
        }
        g.starts = self
            .starts
            .iter()
            .filter(|&&s| reach[s])
            .map(|&s| map[s])
            .collect();
        if g.starts.is_empty() {
            let s = g.add_nt("empty");
            g.starts.insert(s);
        }
        g
    }

    /// Splits mixed nonterminals into one copy per production kind; occurrences expand to all copies.
    pub fn uniformize(&self) -> Vpg {
        self.uniformize_with(|r| r.kind())
    }

    /// Like [`Vpg::uniformize`], with the kind of a right-hand side given by `key`.
    pub fn uniformize_with(&self, key: impl Fn(&Rhs) -> Option<Kind>) -> Vpg {
        let uniform = self.prods.iter().all(|ps| {
            let kinds: BTreeSet<Option<Kind>> = ps.iter().map(&key).collect();
            kinds.len() <= 1
        });
        if uniform {
            return self.clone();
        }
        let n = self.num_nts();
        let mut g = Vpg::new(self.alphabet.clone(), self.comps.clone());
        let mut variants: Vec<Vec<(usize, Option<Kind>)>> = vec![Vec::new(); n];
        for x in 0..n {
            let kinds: BTreeSet<Option<Kind>> = self.prods[x].iter().map(&key).collect();
            if kinds.len() <= 1 {
                let k = kinds.into_iter().next().flatten();
                variants[x].push((g.add_nt(self.names[x].clone()), k));
            } else {
                for k in kinds {
                    let tag = k.map(|k| k.tag()).unwrap_or("eps");
                    variants[x].push((g.add_nt(format!("{}#{}", self.names[x], tag)), k));
                }
            }
        }
        for x in 0..n {
            for r in &self.prods[x] {
                let target = variants[x]
                    .iter()
                    .find(|(_, k)| *k == key(r))
                    .map(|(v, _)| *v)
                    .unwrap_or(variants[x][0].0);
                match *r {
                    Rhs::Eps => g.prods[target].push(Rhs::Eps),
                    Rhs::Int(a, y) => {
                        for &(vy, _) in &variants[y] {
                            g.prods[target].push(Rhs::Int(a, vy));
                        }
                    }
                    Rhs::Call(c, y, rr, z) => {
                        for &(vy, _) in &variants[y] {
                            for &(vz, _) in &variants[z] {
                                g.prods[target].push(Rhs::Call(c, vy, rr, vz));
                            }
                        }
                    }
                }
            }
        }
        for &s in &self.starts {
            g.starts.extend(variants[s].iter().map(|(v, _)| *v));
        }
        for ps in &mut g.prods {
            let mut seen = BTreeSet::new();
            ps.retain(|r| seen.insert(*r));
        }
        g
    }

    /// Words of length at most `max_len` derivable from each nonterminal, indexed by length.
    fn tables(&self, max_len: usize) -> Vec<Vec<BTreeSet<Word>>> {
        let n = self.num_nts();
        let mut w: Vec<Vec<BTreeSet<Word>>> = vec![vec![BTreeSet::new(); max_len + 1]; n];
        for len in 0..=max_len {
            for x in 0..n {
                let mut acc = BTreeSet::new();
                for r in &self.prods[x] {
                    match *r {
                        Rhs::Eps => {
                            if len == 0 {
                                acc.insert(Vec::new());
                            }
                        }
                        Rhs::Int(a, y) => {
                            if len >= 1 {
                                for v in &w[y][len - 1] {
                                    let mut u = Vec::with_capacity(len);
                                    u.push(a);
                                    u.extend_from_slice(v);
                                    acc.insert(u);
                                }
                            }
                        }
                        Rhs::Call(c, y, rr, z) => {
                            if len >= 2 {
                                for i in 0..=len - 2 {
                                    let (wy, wz) = (&w[y][i], &w[z][len - 2 - i]);
                                    if wy.is_empty() || wz.is_empty() {
                                        continue;
                                    }
                                    for u in wy {
                                        for v in wz {
                                            let mut t = Vec::with_capacity(len);
                                            t.push(c);
                                            t.extend_from_slice(u);
                                            t.push(rr);
                                            t.extend_from_slice(v);
                                            acc.insert(t);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                w[x][len] = acc;
            }
        }
        w
    }

    /// Exactly the words of the language with length at most `max_len`.
    pub fn enumerate(&self, max_len: usize) -> BTreeSet<Word> {
        let t = self.tables(max_len);
        let mut res = BTreeSet::new();
        for &s in &self.starts {
            for set in &t[s] {
                res.extend(set.iter().cloned());
            }
        }
        res
    }

    /// Sorted line-oriented dump; see `docs/formats.md`.
    pub fn dump(&self) -> String {
        let al = &self.alphabet;
        let mut s = String::new();
        let _ = writeln!(s, "vpg comps {:?}", comps_vec(&self.comps));
        let mut starts: Vec<&str> = self.starts.iter().map(|&x| self.names[x].as_str()).collect();
        starts.sort();
        for st in starts {
            let _ = writeln!(s, "start {st}");
        }
        let mut lines = Vec::new();
        for (x, ps) in self.prods.iter().enumerate() {
            let lhs = &self.names[x];
            for r in ps {
                lines.push(match *r {
                    Rhs::Eps => format!("{lhs} -> ε"),
                    Rhs::Int(a, y) => format!("{lhs} -> <{}> {}", al.name(a), self.names[y]),
                    Rhs::Call(c, y, rr, z) => format!(
                        "{lhs} -> <{}> {} <{}> {}",
                        al.name(c),
                        self.names[y],
                        al.name(rr),
                        self.names[z]
                    ),
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

    /// Parses the production syntax of [`Vpg::dump`]; letters must already be in `alphabet`.
    pub fn parse(text: &str, alphabet: Arc<Alphabet>) -> Result<Vpg, VplError> {
        let mut comps = BTreeSet::new();
        let mut g = Vpg::new(alphabet.clone(), BTreeSet::new());
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut pending: Vec<(usize, Rhs)> = Vec::new();
        let mut nt = |g: &mut Vpg, n: &str| -> usize {
            if let Some(&i) = ids.get(n) {
                i
            } else {
                let i = g.add_nt(n);
                ids.insert(n.to_string(), i);
                i
            }
        };
        let letter = |tok: &str| -> Result<Sym, VplError> {
            let inner = tok
                .strip_prefix('<')
                .and_then(|t| t.strip_suffix('>'))
                .ok_or_else(|| VplError::Invalid(format!("expected <letter>, found `{tok}`")))?;
            alphabet
                .lookup(inner)
                .ok_or_else(|| VplError::UnknownLetter(inner.to_string()))
        };
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("vpg ") {
                continue;
            }
            if let Some(s) = line.strip_prefix("start ") {
                let x = nt(&mut g, s.trim());
                g.starts.insert(x);
                continue;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| VplError::Invalid(format!("bad production `{line}`")))?;
            let x = nt(&mut g, lhs.trim());
            let toks = split_tokens(rhs.trim());
            let r = match toks.len() {
                1 if toks[0] == "ε" || toks[0] == "eps" => Rhs::Eps,
                2 => Rhs::Int(letter(&toks[0])?, nt(&mut g, &toks[1])),
                4 => Rhs::Call(
                    letter(&toks[0])?,
                    nt(&mut g, &toks[1]),
                    letter(&toks[2])?,
                    nt(&mut g, &toks[3]),
                ),
                _ => return Err(VplError::Invalid(format!("bad production `{line}`"))),
            };
            for a in match r {
                Rhs::Eps => vec![],
                Rhs::Int(a, _) => vec![a],
                Rhs::Call(c, _, rr, _) => vec![c, rr],
            } {
                comps.insert(alphabet.component(a));
            }
            pending.push((x, r));
        }
        g.comps = comps;
        for (x, r) in pending {
            g.add(x, r)?;
        }
        if g.starts.is_empty() && g.num_nts() > 0 {
            g.starts.insert(0);
        }
        Ok(g)
    }

    /// Renames nonterminals to `prefix` + index, in a canonical breadth-first order from the starts.
    pub fn canonical_names(&self) -> BTreeMap<usize, String> {
        let mut order = BTreeMap::new();
        let mut queue: VecDeque<usize> = self.starts.iter().copied().collect();
        let mut seen: BTreeSet<usize> = self.starts.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            let k = order.len();
            order.insert(x, format!("N{k}"));
            let mut ps = self.prods[x].clone();
            ps.sort();
            for r in ps {
                for y in r.nonterminals() {
                    if seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
        }
        order
    }
}

/// Splits on whitespace but keeps `<...>` groups (which may contain spaces) intact.
fn split_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for ch in s.chars() {
        match ch {
            '<' => {
                depth += 1;
                cur.push(ch);
            }
            '>' if depth > 0 => {
                depth -= 1;
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vpl::Alphabet;

    fn alpha() -> Arc<Alphabet> {
        Arc::new(
            Alphabet::from_spec(&[
                ("c", Kind::Call, 1),
                ("r", Kind::Ret, 1),
                ("a", Kind::Int, 1),
                ("b", Kind::Int, 1),
            ])
            .unwrap(),
        )
    }

    fn g1() -> Vpg {
        Vpg::parse(
            "start S\nS -> <a> S\nS -> <c> S <r> T\nS -> ε\nT -> <b> T\nT -> ε\nU -> <a> U\nU -> ε\n",
            alpha(),
        )
        .unwrap()
    }

    #[test]
    fn parse_and_dump_round_trip() {
        let g = g1();
        let d = g.dump();
        let h = Vpg::parse(&d, g.alphabet.clone()).unwrap();
        assert_eq!(h.dump(), d);
        assert_eq!(g.enumerate(6), h.enumerate(6));
    }

    #[test]
    fn trim_drops_unreachable() {
        let g = g1();
        assert!(g.lookup("U").is_some());
        let t = g.trim();
        assert!(t.lookup("U").is_none());
        assert_eq!(t.enumerate(7), g.enumerate(7));
    }

    #[test]
    fn trim_drops_unproductive() {
        let mut g = g1();
        let x = g.add_nt("X");
        let s = g.lookup("S").unwrap();
        let a = g.alphabet.lookup("a").unwrap();
        g.add(x, Rhs::Int(a, x)).unwrap();
        g.add(s, Rhs::Int(a, x)).unwrap();
        let t = g.trim();
        assert!(t.lookup("X").is_none());
        assert_eq!(t.enumerate(6), g.enumerate(6));
    }

    #[test]
    fn empty_language_trims_to_bare_start() {
        let mut g = Vpg::new(alpha(), [1].into_iter().collect());
        let x = g.add_nt("X");
        let a = g.alphabet.lookup("a").unwrap();
        g.add(x, Rhs::Int(a, x)).unwrap();
        g.starts.insert(x);
        let t = g.trim();
        assert_eq!(t.num_nts(), 1);
        assert_eq!(t.num_prods(), 0);
        assert!(t.enumerate(5).is_empty());
    }

    #[test]
    fn uniformize_splits_mixed() {
        let g = g1().trim();
        assert!(!g.is_uniform());
        let u = g.uniformize();
        assert!(u.is_uniform());
        assert_eq!(u.enumerate(8), g.enumerate(8));
        assert_eq!(u.uniformize(), u);
    }

    #[test]
    fn enumerate_by_hand() {
        let g = g1();
        let al = &g.alphabet;
        let got = g.enumerate(3);
        let want: BTreeSet<Word> = ["", "a", "aa", "aaa", "cr", "acr", "cra", "crb", "car"]
            .iter()
            .map(|w| al.chars(w).unwrap())
            .collect();
        // "cra" is not derivable: after the return only T (b*) follows
        let want: BTreeSet<Word> = want
            .into_iter()
            .filter(|w| *w != al.chars("cra").unwrap())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn rejects_wrong_kinds() {
        let mut g = Vpg::new(alpha(), [1].into_iter().collect());
        let x = g.add_nt("X");
        let c = g.alphabet.lookup("c").unwrap();
        assert!(g.add(x, Rhs::Int(c, x)).is_err());
    }
}
