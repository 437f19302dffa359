//! Reduction expressions and their surface syntax.

use std::collections::BTreeSet;
use std::fmt;

use super::ReductionError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf(String),
    Concat(Vec<ReductionExpr>),
    NestedConcat(Vec<ReductionExpr>),
    Lockstep(Vec<usize>, Vec<ReductionExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionExpr {
    pub node: Node,
    pub right_aligned: bool,
    /// Names resolved to call/return letters at evaluation time.
    pub exclude: Vec<String>,
}

impl ReductionExpr {
    pub fn leaf(name: &str) -> Self {
        Self::plain(Node::Leaf(name.to_string()))
    }

    pub fn plain(node: Node) -> Self {
        ReductionExpr {
            node,
            right_aligned: false,
            exclude: Vec::new(),
        }
    }

    pub fn concat(children: Vec<ReductionExpr>) -> Self {
        Self::plain(Node::Concat(children))
    }

    pub fn nested(children: Vec<ReductionExpr>) -> Self {
        Self::plain(Node::NestedConcat(children))
    }

    pub fn lockstep(speeds: &[usize], children: Vec<ReductionExpr>) -> Self {
        Self::plain(Node::Lockstep(speeds.to_vec(), children))
    }

    pub fn children(&self) -> &[ReductionExpr] {
        match &self.node {
            Node::Leaf(_) => &[],
            Node::Concat(c) | Node::NestedConcat(c) | Node::Lockstep(_, c) => c,
        }
    }

    /// Leaf names from left to right.
    pub fn leaves(&self) -> Vec<String> {
        match &self.node {
            Node::Leaf(n) => vec![n.clone()],
            _ => self.children().iter().flat_map(|c| c.leaves()).collect(),
        }
    }

    /// Arity, speed and single-occurrence checks.
    pub fn validate(&self) -> Result<(), ReductionError> {
        let leaves = self.leaves();
        let mut seen = BTreeSet::new();
        for l in &leaves {
            if !seen.insert(l) {
                return Err(ReductionError::DuplicateLeaf(l.clone()));
            }
        }
        self.validate_node()
    }

    fn validate_node(&self) -> Result<(), ReductionError> {
        match &self.node {
            Node::Leaf(n) => {
                if self.right_aligned || !self.exclude.is_empty() {
                    return Err(ReductionError::Arity(format!("modifier on leaf {n}")));
                }
            }
            Node::Concat(c) | Node::NestedConcat(c) => {
                if c.len() < 2 {
                    return Err(ReductionError::Arity(format!("{} needs two operands", self.op_name())));
                }
            }
            Node::Lockstep(s, c) => {
                if s.len() != c.len() || c.len() < 2 {
                    return Err(ReductionError::Arity(format!(
                        "{} speeds for {} operands",
                        s.len(),
                        c.len()
                    )));
                }
                if s.iter().any(|&x| x == 0) {
                    return Err(ReductionError::Arity("speeds must be positive".into()));
                }
            }
        }
        self.children().iter().try_for_each(|c| c.validate_node())
    }

    pub fn op_name(&self) -> &'static str {
        match self.node {
            Node::Leaf(_) => "leaf",
            Node::Concat(_) => "concat",
            Node::NestedConcat(_) => "nested_concatenation",
            Node::Lockstep(..) => "lockstep",
        }
    }

    pub fn parse(text: &str) -> Result<ReductionExpr, ReductionError> {
        let mut p = Parser {
            toks: lex(text)?,
            pos: 0,
            end: text.len(),
        };
        let e = p.expr()?;
        if let Some(t) = p.toks.get(p.pos) {
            return Err(ReductionError::Parse(t.at, format!("unexpected `{}`", t.text)));
        }
        e.validate()?;
        Ok(e)
    }
}

impl fmt::Display for ReductionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.right_aligned {
            f.write_str("right_aligned: ")?;
        }
        let list = |c: &[ReductionExpr]| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let ex = if self.exclude.is_empty() {
            String::new()
        } else {
            format!(", exclude=[{}]", self.exclude.join(","))
        };
        match &self.node {
            Node::Leaf(n) => f.write_str(n),
            Node::Concat(c) => write!(f, "concat({}{ex})", list(c)),
            Node::NestedConcat(c) => write!(f, "nested_concatenation({}{ex})", list(c)),
            Node::Lockstep(s, c) => {
                let s: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                write!(f, "({})-lockstep({}{ex})", s.join(","), list(c))
            }
        }
    }
}

struct Tok {
    text: String,
    at: usize,
}

fn lex(text: &str) -> Result<Vec<Tok>, ReductionError> {
    let mut toks = Vec::new();
    let b: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < b.len() {
        let (at, c) = b[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let mut j = i;
            while j < b.len() && (b[j].1.is_alphanumeric() || b[j].1 == '_' || b[j].1 == '.') {
                j += 1;
            }
            toks.push(Tok {
                text: b[i..j].iter().map(|x| x.1).collect(),
                at,
            });
            i = j;
        } else if "(),[]=:-".contains(c) {
            toks.push(Tok {
                text: c.to_string(),
                at,
            });
            i += 1;
        } else {
            return Err(ReductionError::Parse(at, format!("unexpected character `{c}`")));
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.text.as_str())
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.at).unwrap_or(self.end)
    }

    fn expect(&mut self, s: &str) -> Result<(), ReductionError> {
        if self.peek() == Some(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ReductionError::Parse(
                self.at(),
                format!("expected `{s}`, found {}", self.peek().map(|t| format!("`{t}`")).unwrap_or("end".into())),
            ))
        }
    }

    fn ident(&mut self) -> Result<String, ReductionError> {
        match self.peek() {
            Some(t) if t.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') => {
                let t = t.to_string();
                self.pos += 1;
                Ok(t)
            }
            _ => Err(ReductionError::Parse(self.at(), "expected identifier".into())),
        }
    }

    fn expr(&mut self) -> Result<ReductionExpr, ReductionError> {
        let mut e = self.primary()?;
        while self.peek() == Some("with") {
            self.pos += 1;
            if self.peek() != Some("exclude") {
                return Err(ReductionError::Parse(self.at(), "expected `exclude`".into()));
            }
            self.pos += 1;
            e.exclude.extend(self.exclude_list()?);
        }
        Ok(e)
    }

    fn exclude_list(&mut self) -> Result<Vec<String>, ReductionError> {
        self.expect("=")?;
        self.expect("[")?;
        let mut out = vec![self.ident()?];
        while self.peek() == Some(",") {
            self.pos += 1;
            out.push(self.ident()?);
        }
        self.expect("]")?;
        Ok(out)
    }

    /// Operands, with an optional trailing `exclude=[..]`.
    fn args(&mut self) -> Result<(Vec<ReductionExpr>, Vec<String>), ReductionError> {
        self.expect("(")?;
        let mut out = Vec::new();
        let mut exclude = Vec::new();
        loop {
            if self.peek() == Some("exclude") && self.toks.get(self.pos + 1).map(|t| t.text.as_str()) == Some("=") {
                self.pos += 1;
                exclude.extend(self.exclude_list()?);
            } else {
                out.push(self.expr()?);
            }
            if self.peek() == Some(",") {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.expect(")")?;
        Ok((out, exclude))
    }

    fn primary(&mut self) -> Result<ReductionExpr, ReductionError> {
        match self.peek() {
            Some("(") => {
                self.pos += 1;
                let mut speeds = Vec::new();
                loop {
                    let at = self.at();
                    let t = self.peek().unwrap_or("").to_string();
                    let v: usize = t
                        .parse()
                        .map_err(|_| ReductionError::Parse(at, format!("expected speed, found `{t}`")))?;
                    speeds.push(v);
                    self.pos += 1;
                    if self.peek() == Some(",") {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect(")")?;
                self.expect("-")?;
                self.expect("lockstep")?;
                let (c, ex) = self.args()?;
                let mut e = ReductionExpr::lockstep(&speeds, c);
                e.exclude = ex;
                Ok(e)
            }
            Some("right_aligned") => {
                self.pos += 1;
                self.expect(":")?;
                let mut e = self.expr()?;
                e.right_aligned = true;
                Ok(e)
            }
            Some("concat") | Some("nested_concatenation")
                if self.toks.get(self.pos + 1).map(|t| t.text.as_str()) == Some("(") =>
            {
                let nested = self.peek() == Some("nested_concatenation");
                self.pos += 1;
                let (c, ex) = self.args()?;
                let mut e = if nested {
                    ReductionExpr::nested(c)
                } else {
                    ReductionExpr::concat(c)
                };
                e.exclude = ex;
                Ok(e)
            }
            _ => Ok(ReductionExpr::leaf(&self.ident()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_distributivity_expression() {
        let e = ReductionExpr::parse("(1,1)-lockstep(P3, nested_concatenation(P1,P2))").unwrap();
        let want = ReductionExpr::lockstep(
            &[1, 1],
            vec![
                ReductionExpr::leaf("P3"),
                ReductionExpr::nested(vec![ReductionExpr::leaf("P1"), ReductionExpr::leaf("P2")]),
            ],
        );
        assert_eq!(e, want);
        assert_eq!(e.to_string(), "(1,1)-lockstep(P3, nested_concatenation(P1, P2))");
        assert_eq!(ReductionExpr::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn leaves_and_modifiers() {
        assert_eq!(ReductionExpr::parse("P1").unwrap(), ReductionExpr::leaf("P1"));
        let e = ReductionExpr::parse("right_aligned: (2,1)-lockstep(P1,P2)").unwrap();
        assert!(e.right_aligned);
        let e = ReductionExpr::parse("(1,1)-lockstep(P1,P2, exclude=[h])").unwrap();
        assert_eq!(e.exclude, vec!["h".to_string()]);
        let e2 = ReductionExpr::parse("(1,1)-lockstep(P1,P2) with exclude=[h]").unwrap();
        assert_eq!(e, e2);
        assert_eq!(ReductionExpr::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ReductionExpr::parse("(1,1)-lockstep(P1)"),
            Err(ReductionError::Arity(_))
        ));
        assert!(matches!(
            ReductionExpr::parse("concat(P1,P1)"),
            Err(ReductionError::DuplicateLeaf(_))
        ));
        assert!(matches!(
            ReductionExpr::parse("(0,1)-lockstep(P1,P2)"),
            Err(ReductionError::Arity(_))
        ));
        match ReductionExpr::parse("concat(P1,,P2)") {
            Err(ReductionError::Parse(at, _)) => assert_eq!(at, 10),
            other => panic!("{other:?}"),
        }
        assert!(matches!(ReductionExpr::parse(""), Err(ReductionError::Parse(0, _))));
    }
}
