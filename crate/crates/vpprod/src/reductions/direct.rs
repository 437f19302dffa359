//! Queue-driven grammar constructions for concatenation, nested concatenation and lockstep.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::ReductionError;
use crate::orders::dec;
use crate::vpl::ops::Interner;
use crate::vpl::{Rhs, Vpg};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Plain(usize),
    Cat(usize, usize),
    Nc(usize, usize),
    Ls(Vec<usize>, Vec<usize>, Vec<usize>),
}

/// The union of the input grammars, extended on demand with helpers `U → c Z r E` and `E → ε`.
struct Pool {
    g: Vpg,
    offsets: Vec<usize>,
    helpers: HashMap<(usize, usize, usize), usize>,
    eps: Option<usize>,
}

impl Pool {
    fn new(parts: &[&Vpg]) -> Result<Pool, ReductionError> {
        let first = parts.first().ok_or(ReductionError::Arity("no operands".into()))?;
        let mut comps = BTreeSet::new();
        for p in parts {
            if !p.is_uniform() {
                return Err(ReductionError::NonUniform);
            }
            if p.alphabet != first.alphabet {
                return Err(crate::vpl::VplError::AlphabetMismatch.into());
            }
            let overlap: Vec<usize> = comps.intersection(&p.comps).copied().collect();
            if !overlap.is_empty() {
                return Err(crate::vpl::VplError::OverlappingComponents(overlap).into());
            }
            comps.extend(p.comps.iter().copied());
        }
        let mut g = Vpg::new(first.alphabet.clone(), comps);
        let mut offsets = Vec::new();
        for p in parts {
            let off = g.num_nts();
            offsets.push(off);
            for name in &p.names {
                g.add_nt(name.clone());
            }
            for (x, rs) in p.prods.iter().enumerate() {
                g.prods[off + x] = rs.iter().map(|r| r.map(|y| y + off)).collect();
            }
        }
        Ok(Pool {
            g,
            offsets,
            helpers: HashMap::new(),
            eps: None,
        })
    }

    fn starts(&self, parts: &[&Vpg], i: usize) -> Vec<usize> {
        parts[i].starts.iter().map(|&s| s + self.offsets[i]).collect()
    }

    fn eps(&mut self) -> usize {
        if let Some(e) = self.eps {
            return e;
        }
        let e = self.g.add_nt("E");
        self.g.prods[e].push(Rhs::Eps);
        self.eps = Some(e);
        e
    }

    fn helper(&mut self, c: usize, z: usize, r: usize) -> usize {
        if let Some(&u) = self.helpers.get(&(c, z, r)) {
            return u;
        }
        let e = self.eps();
        let name = format!("{}'", self.g.names[z]);
        let u = self.g.add_nt(name);
        self.g.prods[u].push(Rhs::Call(c, z, r, e));
        self.helpers.insert((c, z, r), u);
        u
    }
}

struct Builder {
    pool: Pool,
    keys: Interner<Key>,
    out: Vpg,
    queue: VecDeque<usize>,
}

impl Builder {
    fn new(parts: &[&Vpg]) -> Result<Self, ReductionError> {
        let pool = Pool::new(parts)?;
        let out = Vpg::new(pool.g.alphabet.clone(), pool.g.comps.clone());
        Ok(Builder {
            pool,
            keys: Interner::new(),
            out,
            queue: VecDeque::new(),
        })
    }

    /// Lockstep symbols drop `E` entries; a single remaining entry is the plain symbol.
    fn normalize(&mut self, k: Key) -> Key {
        match k {
            Key::Ls(s, t, ys) => {
                let e = self.pool.eps;
                let keep: Vec<usize> = (0..ys.len()).filter(|&i| Some(ys[i]) != e).collect();
                let keep = if keep.is_empty() { vec![0] } else { keep };
                if keep.len() == 1 {
                    return Key::Plain(ys[keep[0]]);
                }
                let pick = |v: &[usize]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
                Key::Ls(pick(&s), pick(&t), pick(&ys))
            }
            k => k,
        }
    }

    fn sym(&mut self, k: Key) -> usize {
        let k = self.normalize(k);
        let (id, fresh) = self.keys.intern(k.clone());
        if fresh {
            let name = self.name(&k);
            self.out.add_nt(name);
            self.queue.push_back(id);
        }
        id
    }

    fn name(&self, k: &Key) -> String {
        let n = |x: usize| self.pool.g.names[x].clone();
        let v = |xs: &[usize]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match k {
            Key::Plain(x) => n(*x),
            Key::Cat(a, b) => format!("[{};{}]", n(*a), n(*b)),
            Key::Nc(a, b) => format!("[{},{}]", n(*a), n(*b)),
            Key::Ls(s, t, ys) => format!(
                "[({}),({}),{}]",
                v(s),
                v(t),
                ys.iter().map(|&y| n(y)).collect::<Vec<_>>().join("×")
            ),
        }
    }

    fn plain(&mut self, r: Rhs) -> Rhs {
        match r {
            Rhs::Eps => Rhs::Eps,
            Rhs::Int(a, y) => Rhs::Int(a, self.sym(Key::Plain(y))),
            Rhs::Call(c, y, rr, z) => {
                let y = self.sym(Key::Plain(y));
                Rhs::Call(c, y, rr, self.sym(Key::Plain(z)))
            }
        }
    }

    fn run(mut self) -> Vpg {
        while let Some(id) = self.queue.pop_front() {
            let k = self.keys.keys[id].clone();
            let rhs = self.productions(&k);
            for r in rhs {
                if !self.out.prods[id].contains(&r) {
                    self.out.prods[id].push(r);
                }
            }
        }
        self.out.trim()
    }

    fn productions(&mut self, k: &Key) -> Vec<Rhs> {
        let g = &self.pool.g;
        match k.clone() {
            Key::Plain(x) => {
                let rs = g.prods[x].clone();
                rs.into_iter().map(|r| self.plain(r)).collect()
            }
            Key::Cat(y1, w2) => {
                let (r1, r2) = (g.prods[y1].clone(), g.prods[w2].clone());
                let mut out = Vec::new();
                for r in r1 {
                    match r {
                        Rhs::Eps => {
                            for a in &r2 {
                                out.push(self.plain(*a));
                            }
                        }
                        Rhs::Int(a, z) => out.push(Rhs::Int(a, self.sym(Key::Cat(z, w2)))),
                        Rhs::Call(c, z, rr, w) => {
                            let z = self.sym(Key::Plain(z));
                            out.push(Rhs::Call(c, z, rr, self.sym(Key::Cat(w, w2))));
                        }
                    }
                }
                out
            }
            Key::Nc(y1, w2) => {
                let (r1, r2) = (g.prods[y1].clone(), g.prods[w2].clone());
                let mut out = Vec::new();
                for r in r1 {
                    match r {
                        Rhs::Eps => {
                            for a in &r2 {
                                out.push(self.plain(*a));
                            }
                        }
                        Rhs::Int(a, z) => out.push(Rhs::Int(a, self.sym(Key::Nc(z, w2)))),
                        Rhs::Call(c, z, rr, w) => {
                            let z = self.sym(Key::Nc(z, w2));
                            out.push(Rhs::Call(c, z, rr, self.sym(Key::Plain(w))));
                        }
                    }
                }
                out
            }
            Key::Ls(s, t, ys) => {
                let lists: Vec<Vec<Rhs>> = ys.iter().map(|&y| g.prods[y].clone()).collect();
                let mut out = Vec::new();
                let mut idx = vec![0usize; ys.len()];
                if lists.iter().any(|l| l.is_empty()) {
                    return out;
                }
                loop {
                    let alphas: Vec<Rhs> = idx.iter().enumerate().map(|(i, &j)| lists[i][j]).collect();
                    let r = self.ls_product(s.clone(), t.clone(), ys.clone(), alphas);
                    if !out.contains(&r) {
                        out.push(r);
                    }
                    // next tuple
                    let mut i = 0;
                    loop {
                        if i == idx.len() {
                            return out;
                        }
                        idx[i] += 1;
                        if idx[i] < lists[i].len() {
                            break;
                        }
                        idx[i] = 0;
                        i += 1;
                    }
                }
            }
        }
    }

    fn ls_product(&mut self, s: Vec<usize>, t: Vec<usize>, ys: Vec<usize>, alphas: Vec<Rhs>) -> Rhs {
        if ys.len() == 1 {
            return self.plain(alphas[0]);
        }
        if let Some(j) = alphas.iter().position(|a| *a == Rhs::Eps) {
            let drop = |v: &[usize]| -> Vec<usize> {
                v.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x).collect()
            };
            let mut a2 = alphas.clone();
            a2.remove(j);
            return self.ls_product(drop(&s), drop(&t), drop(&ys), a2);
        }
        if let Some(i) = alphas.iter().position(|a| matches!(a, Rhs::Int(..))) {
            let Rhs::Int(a, z) = alphas[i] else { unreachable!() };
            let mut y2 = ys.clone();
            y2[i] = z;
            return Rhs::Int(a, self.sym(Key::Ls(s, t, y2)));
        }
        let calls: Vec<(usize, usize, usize, usize)> = alphas
            .iter()
            .map(|a| match *a {
                Rhs::Call(c, z, r, w) => (c, z, r, w),
                _ => unreachable!("uniform grammars leave only calls here"),
            })
            .collect();
        let t2 = dec(&s, &t);
        match t.iter().position(|&x| x > 0) {
            None => {
                let mut zs = vec![calls[0].1];
                for &(c, z, r, _) in &calls[1..] {
                    zs.push(self.pool.helper(c, z, r));
                }
                let ws: Vec<usize> = calls.iter().map(|x| x.3).collect();
                let (c1, _, r1, _) = calls[0];
                let inner = self.sym(Key::Ls(s.clone(), t2, zs));
                let after = self.sym(Key::Ls(s, t, ws));
                Rhs::Call(c1, inner, r1, after)
            }
            Some(m) => {
                let (cm, zm, rm, wm) = calls[m];
                let mut zs = ys.clone();
                zs[m] = zm;
                let inner = self.sym(Key::Ls(s, t2, zs));
                Rhs::Call(cm, inner, rm, self.sym(Key::Plain(wm)))
            }
        }
    }
}

/// Grammar for `L(G₁) ; L(G₂)`.
pub fn concat_vpg(g1: &Vpg, g2: &Vpg) -> Result<Vpg, ReductionError> {
    let parts = [g1, g2];
    let mut b = Builder::new(&parts)?;
    for x in b.pool.starts(&parts, 0) {
        for y in b.pool.starts(&parts, 1) {
            let s = b.sym(Key::Cat(x, y));
            b.out.starts.insert(s);
        }
    }
    Ok(b.run())
}

/// Grammar for `{u ⊕ v : u ∈ L(G₁), v ∈ L(G₂)}`. Inputs must be uniform.
pub fn nested_concat_vpg(g1: &Vpg, g2: &Vpg) -> Result<Vpg, ReductionError> {
    let parts = [g1, g2];
    let mut b = Builder::new(&parts)?;
    for x in b.pool.starts(&parts, 0) {
        for y in b.pool.starts(&parts, 1) {
            let s = b.sym(Key::Nc(x, y));
            b.out.starts.insert(s);
        }
    }
    Ok(b.run())
}

/// Grammar for the s⃗-lockstep of the inputs. Inputs must be uniform.
pub fn lockstep_vpg(speeds: &[usize], parts: &[&Vpg]) -> Result<Vpg, ReductionError> {
    if speeds.len() != parts.len() || speeds.iter().any(|&x| x == 0) {
        return Err(ReductionError::Arity(format!(
            "{} speeds for {} grammars",
            speeds.len(),
            parts.len()
        )));
    }
    let mut b = Builder::new(parts)?;
    let mut combos: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..parts.len() {
        let st = b.pool.starts(parts, i);
        combos = combos
            .into_iter()
            .flat_map(|c| {
                st.iter().map(move |&x| {
                    let mut c = c.clone();
                    c.push(x);
                    c
                })
            })
            .collect();
    }
    for ys in combos {
        let s = b.sym(Key::Ls(speeds.to_vec(), vec![0; speeds.len()], ys));
        b.out.starts.insert(s);
    }
    Ok(b.run())
}
