//! Evaluation of ground SMT-LIB terms under a valuation.

use crate::frontend::{Valuation, Value};

enum Sx {
    Atom(String),
    List(Vec<Sx>),
}

fn parse(tokens: &[String], pos: &mut usize) -> Option<Sx> {
    let t = tokens.get(*pos)?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut xs = Vec::new();
            while tokens.get(*pos)? != ")" {
                xs.push(parse(tokens, pos)?);
            }
            *pos += 1;
            Some(Sx::List(xs))
        }
        ")" => None,
        _ => Some(Sx::Atom(t.clone())),
    }
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn int(v: Value) -> Option<i64> {
    match v {
        Value::Int(n) => Some(n),
        _ => None,
    }
}

fn boolean(v: Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(b),
        _ => None,
    }
}

fn ev(x: &Sx, nu: &Valuation) -> Option<Value> {
    match x {
        Sx::Atom(a) => match a.as_str() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => a.parse::<i64>().ok().map(Value::Int).or_else(|| nu.get(a).cloned()),
        },
        Sx::List(xs) => {
            let Sx::Atom(op) = xs.first()? else { return None };
            let args = &xs[1..];
            let ints = || args.iter().map(|a| ev(a, nu).and_then(int)).collect::<Option<Vec<i64>>>();
            let bools = || args.iter().map(|a| ev(a, nu).and_then(boolean)).collect::<Option<Vec<bool>>>();
            let chain = |f: fn(i64, i64) -> bool| ints().map(|v| Value::Bool(v.windows(2).all(|w| f(w[0], w[1]))));
            match op.as_str() {
                "and" => bools().map(|v| Value::Bool(v.into_iter().all(|b| b))),
                "or" => bools().map(|v| Value::Bool(v.into_iter().any(|b| b))),
                "not" => bools().map(|v| Value::Bool(!v[0])),
                "=>" => bools().map(|v| Value::Bool(!v[0] || v[1])),
                "=" => {
                    let vs: Vec<Value> = args.iter().map(|a| ev(a, nu)).collect::<Option<_>>()?;
                    Some(Value::Bool(vs.windows(2).all(|w| w[0] == w[1])))
                }
                "distinct" => {
                    let vs: Vec<Value> = args.iter().map(|a| ev(a, nu)).collect::<Option<_>>()?;
                    Some(Value::Bool((0..vs.len()).all(|i| (i + 1..vs.len()).all(|j| vs[i] != vs[j]))))
                }
                "ite" => {
                    if boolean(ev(&args[0], nu)?)? {
                        ev(&args[1], nu)
                    } else {
                        ev(&args[2], nu)
                    }
                }
                "<" => chain(|a, b| a < b),
                "<=" => chain(|a, b| a <= b),
                ">" => chain(|a, b| a > b),
                ">=" => chain(|a, b| a >= b),
                "+" => ints().map(|v| Value::Int(v.into_iter().fold(0i64, i64::wrapping_add))),
                "*" => ints().map(|v| Value::Int(v.into_iter().fold(1i64, i64::wrapping_mul))),
                "-" => ints().map(|v| match v.len() {
                    1 => Value::Int(v[0].wrapping_neg()),
                    _ => Value::Int(v[1..].iter().fold(v[0], |a, b| a.wrapping_sub(*b))),
                }),
                "div" => ints().map(|v| Value::Int(if v[1] == 0 { 0 } else { v[0].div_euclid(v[1]) })),
                "mod" => ints().map(|v| Value::Int(if v[1] == 0 { 0 } else { v[0].rem_euclid(v[1]) })),
                "abs" => ints().map(|v| Value::Int(v[0].wrapping_abs())),
                "select" => match (ev(&args[0], nu)?, int(ev(&args[1], nu)?)?) {
                    (Value::Arr(m), i) => Some(Value::Int(m.get(&i).copied().unwrap_or(0))),
                    _ => None,
                },
                "store" => match (ev(&args[0], nu)?, int(ev(&args[1], nu)?)?, int(ev(&args[2], nu)?)?) {
                    (Value::Arr(mut m), i, v) => {
                        m.insert(i, v);
                        Some(Value::Arr(m))
                    }
                    _ => None,
                },
                _ => None,
            }
        }
    }
}

/// Value of `term`; `None` on a parse error, an unknown symbol or a sort clash.
pub fn eval_term(term: &str, nu: &Valuation) -> Option<Value> {
    let toks = tokenize(term);
    let mut pos = 0;
    let x = parse(&toks, &mut pos)?;
    if pos != toks.len() {
        return None;
    }
    ev(&x, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::interp::ints;

    #[test]
    fn evaluates_terms() {
        let nu = ints(&[("x", 7), ("y", -2)]);
        let b = |t: &str| eval_term(t, &nu);
        assert_eq!(b("(and (> x 0) (<= y x))"), Some(Value::Bool(true)));
        assert_eq!(b("(div x y)"), Some(Value::Int(-3)));
        assert_eq!(b("(mod y 3)"), Some(Value::Int(1)));
        assert_eq!(b("(- x y 1)"), Some(Value::Int(8)));
        assert_eq!(b("(- y)"), Some(Value::Int(2)));
        assert_eq!(b("(ite (= x 7) 1 2)"), Some(Value::Int(1)));
        assert_eq!(b("(=> false (< x 0))"), Some(Value::Bool(true)));
        assert_eq!(b("(>= x (* 2 y))"), Some(Value::Bool(true)));
        assert_eq!(b("z"), None);
        assert_eq!(b("(+ x"), None);
        assert_eq!(b("(and x)"), None);
    }
}
