//! Hyperproperties: `copies`, `pre` and `post` lines with SMT-LIB terms over renamed variables.

use std::collections::BTreeMap;

use super::ast::Type;
use super::FrontendError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperProperty {
    pub k: usize,
    pub pre: String,
    pub post: String,
}

const BUILTINS: &[&str] = &[
    "and", "or", "not", "=>", "=", "distinct", "ite", "<", "<=", ">", ">=", "+", "-", "*", "div", "mod", "abs",
    "true", "false", "select", "store",
];

impl HyperProperty {
    /// Reads `copies: k`, `pre: t` and `post: t` lines; `;` also separates lines. Blank lines and
    /// lines starting with `#` are skipped. A missing `pre` defaults to `true`.
    pub fn parse(text: &str) -> Result<HyperProperty, FrontendError> {
        let mut k = None;
        let mut pre = None;
        let mut post = None;
        for line in text.split(['\n', ';']) {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line
                .split_once(':')
                .ok_or_else(|| FrontendError::Semantic(format!("property line `{line}` has no `key:`")))?;
            let val = val.trim().to_string();
            let slot = match key.trim() {
                "copies" => {
                    let n: usize = val
                        .parse()
                        .map_err(|_| FrontendError::Semantic(format!("bad copy count `{val}`")))?;
                    if n == 0 {
                        return Err(FrontendError::Semantic("copy count must be at least 1".into()));
                    }
                    k = Some(n);
                    continue;
                }
                "pre" => &mut pre,
                "post" => &mut post,
                other => return Err(FrontendError::Semantic(format!("unknown property key `{other}`"))),
            };
            balanced(&val)?;
            *slot = Some(val);
        }
        Ok(HyperProperty {
            k: k.ok_or_else(|| FrontendError::Semantic("property has no `copies:` line".into()))?,
            pre: pre.unwrap_or_else(|| "true".into()),
            post: post.ok_or_else(|| FrontendError::Semantic("property has no `post:` line".into()))?,
        })
    }

    /// Every symbol in `pre`/`post` is a builtin or a key of `vars`.
    pub fn check(&self, vars: &BTreeMap<String, Type>) -> Result<(), FrontendError> {
        for (what, t) in [("pre", &self.pre), ("post", &self.post)] {
            for s in symbols(t) {
                if !BUILTINS.contains(&s) && !vars.contains_key(s) {
                    return Err(FrontendError::Semantic(format!("{what} mentions unknown symbol `{s}`")));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!("copies: {}\npre: {}\npost: {}\n", self.k, self.pre, self.post)
    }
}

fn balanced(t: &str) -> Result<(), FrontendError> {
    let mut depth = 0i64;
    for c in t.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            break;
        }
    }
    if depth != 0 || t.is_empty() {
        return Err(FrontendError::Semantic(format!("unbalanced or empty term `{t}`")));
    }
    Ok(())
}

/// Non-numeric atoms of an s-expression.
fn symbols(t: &str) -> impl Iterator<Item = &str> {
    t.split(|c: char| c == '(' || c == ')' || c.is_whitespace())
        .filter(|s| !s.is_empty() && !s.starts_with(|c: char| c.is_ascii_digit()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::fixtures;

    #[test]
    fn parses_fixtures() {
        let p = HyperProperty::parse(fixtures::MONOTONICITY).unwrap();
        assert_eq!(p.k, 2);
        assert_eq!(p.post, "(<= q_1 q_2)");
        assert_eq!(HyperProperty::parse(&p.to_text()).unwrap(), p);
        assert_eq!(HyperProperty::parse(fixtures::DISTRIBUTIVITY).unwrap().k, 3);
        let inline = HyperProperty::parse("copies: 1; post: (>= q 0)").unwrap();
        assert_eq!(inline.pre, "true");
    }

    #[test]
    fn rejects_bad_properties() {
        assert!(HyperProperty::parse("pre: true\npost: true").is_err());
        assert!(HyperProperty::parse("copies: 0\npost: true").is_err());
        assert!(HyperProperty::parse("copies: 1\npost: (< x").is_err());
        assert!(HyperProperty::parse("copies: 1\nfoo: x").is_err());
        let p = HyperProperty::parse("copies: 1\npost: (< x y)").unwrap();
        let vars: BTreeMap<String, Type> = [("x".to_string(), Type::Int)].into();
        assert!(p.check(&vars).is_err());
        let vars: BTreeMap<String, Type> = [("x".to_string(), Type::Int), ("y".to_string(), Type::Int)].into();
        assert!(p.check(&vars).is_ok());
    }
}
