//! Recursive-descent parser for the procedure language (grammar in `docs/formats.md`).

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{BinOp, Expr, Proc, Program, Stmt, Type, Var};
use super::FrontendError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    Num(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMS: [&str; 25] = [
    ":=", "<=", ">=", "==", "!=", "&&", "||", "(", ")", "{", "}", "[", "]", ",", ";", ":", "+", "-", "*", "/", "%",
    "<", ">", "!", "=",
];

fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            out.push(Token {
                tok: Tok::Id(chars[i..j].iter().collect()),
                line,
                col,
            });
            col += j - i;
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text.parse().map_err(|_| FrontendError::Syntax {
                line,
                col,
                msg: format!("integer literal `{text}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Num(n),
                line,
                col,
            });
            col += j - i;
            i = j;
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym = SYMS.iter().find(|s| rest.starts_with(**s)).ok_or(FrontendError::Syntax {
            line: start.0,
            col: start.1,
            msg: format!("unexpected character `{c}`"),
        })?;
        out.push(Token {
            tok: Tok::Sym(sym),
            line,
            col,
        });
        i += sym.len();
        col += sym.len();
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct CallSite {
    line: usize,
    col: usize,
    caller: String,
    proc: String,
    args: Vec<Type>,
    targets: Vec<Type>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: BTreeMap<String, Type>,
    calls: Vec<CallSite>,
    current: String,
}

const KEYWORDS: [&str; 11] = [
    "proc", "returns", "var", "if", "else", "assume", "return", "skip", "true", "false", "while",
];

type R<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> R<T> {
        let t = &self.toks[self.pos];
        Err(FrontendError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Id(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Id(x) if x == s)
    }

    fn sym(&mut self, s: &str) -> R<()> {
        if self.is_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn kw(&mut self, s: &str) -> R<()> {
        if self.is_kw(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> R<String> {
        match self.peek().clone() {
            Tok::Id(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn ty(&mut self) -> R<Type> {
        if self.is_kw("int") {
            self.pos += 1;
            if self.is_sym("[") {
                self.pos += 1;
                self.sym("]")?;
                return Ok(Type::IntArray);
            }
            Ok(Type::Int)
        } else if self.is_kw("bool") {
            self.pos += 1;
            Ok(Type::Bool)
        } else {
            self.err(format!("expected a type, found {}", self.describe()))
        }
    }

    fn declare(&mut self, v: &Var, at: (usize, usize)) -> R<()> {
        if self.scope.insert(v.name.clone(), v.ty).is_some() {
            return Err(FrontendError::Semantic(format!(
                "{}:{}: `{}` declared twice in `{}`",
                at.0, at.1, v.name, self.current
            )));
        }
        Ok(())
    }

    fn var_decls(&mut self, close: &str) -> R<Vec<Var>> {
        let mut out = Vec::new();
        if self.is_sym(close) {
            return Ok(out);
        }
        loop {
            let at = self.here();
            let name = self.ident()?;
            self.sym(":")?;
            let v = Var { name, ty: self.ty()? };
            self.declare(&v, at)?;
            out.push(v);
            if self.is_sym(",") {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn program(&mut self) -> R<Program> {
        let mut prog = Program::default();
        if matches!(self.peek(), Tok::Eof) {
            return self.err("empty program");
        }
        while !matches!(self.peek(), Tok::Eof) {
            let at = self.here();
            let p = self.proc()?;
            if prog.proc(&p.name).is_some() {
                return Err(FrontendError::Semantic(format!(
                    "{}:{}: procedure `{}` defined twice",
                    at.0, at.1, p.name
                )));
            }
            prog.procs.push(p);
        }
        Ok(prog)
    }

    fn proc(&mut self) -> R<Proc> {
        if self.is_kw("while") {
            return self.err("loops are not supported; use recursion");
        }
        self.kw("proc")?;
        let name = self.ident()?;
        self.current = name.clone();
        self.scope.clear();
        self.sym("(")?;
        let params = self.var_decls(")")?;
        self.sym(")")?;
        let mut outputs = Vec::new();
        if self.is_kw("returns") {
            self.pos += 1;
            self.sym("(")?;
            outputs = self.var_decls(")")?;
            self.sym(")")?;
        }
        self.sym("{")?;
        let mut locals = Vec::new();
        let body = self.stmts(&mut locals)?;
        self.sym("}")?;
        Ok(Proc {
            name,
            params,
            outputs,
            locals,
            body,
        })
    }

    fn stmts(&mut self, locals: &mut Vec<Var>) -> R<Vec<Stmt>> {
        let mut out = Vec::new();
        while !self.is_sym("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.err("expected `}`, found end of input");
            }
            if self.is_kw("var") {
                self.pos += 1;
                let at = self.here();
                let name = self.ident()?;
                self.sym(":")?;
                let v = Var { name, ty: self.ty()? };
                self.declare(&v, at)?;
                locals.push(v.clone());
                if self.is_sym(":=") {
                    self.pos += 1;
                    let e = self.typed_expr(v.ty)?;
                    out.push(Stmt::Assign(v.name, e));
                }
                self.sym(";")?;
                continue;
            }
            if let Some(s) = self.stmt(locals)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    fn block(&mut self, locals: &mut Vec<Var>) -> R<Vec<Stmt>> {
        self.sym("{")?;
        let b = self.stmts(locals)?;
        self.sym("}")?;
        Ok(b)
    }

    fn var_type(&self, name: &str, at: (usize, usize)) -> R<Type> {
        self.scope.get(name).copied().ok_or(FrontendError::Undeclared {
            line: at.0,
            col: at.1,
            name: name.to_string(),
        })
    }

    fn stmt(&mut self, locals: &mut Vec<Var>) -> R<Option<Stmt>> {
        let at = self.here();
        if self.is_kw("while") {
            return self.err("loops are not supported; use recursion");
        }
        if self.is_kw("skip") {
            self.pos += 1;
            self.sym(";")?;
            return Ok(None);
        }
        if self.is_kw("if") {
            self.pos += 1;
            self.sym("(")?;
            let c = self.typed_expr(Type::Bool)?;
            self.sym(")")?;
            let t = self.block(locals)?;
            let e = if self.is_kw("else") {
                self.pos += 1;
                if self.is_kw("if") {
                    self.stmt(locals)?.into_iter().collect()
                } else {
                    self.block(locals)?
                }
            } else {
                Vec::new()
            };
            return Ok(Some(Stmt::If(c, t, e)));
        }
        if self.is_kw("assume") {
            self.pos += 1;
            let c = self.typed_expr(Type::Bool)?;
            self.sym(";")?;
            return Ok(Some(Stmt::Assume(c)));
        }
        if self.is_kw("return") {
            self.pos += 1;
            let mut es = Vec::new();
            if !self.is_sym(";") {
                loop {
                    es.push(self.expr()?.0);
                    if self.is_sym(",") {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.sym(";")?;
            return Ok(Some(Stmt::Return(es)));
        }
        if self.is_sym("(") {
            // (x, y) := f(..);
            self.pos += 1;
            let mut targets = Vec::new();
            loop {
                targets.push(self.ident()?);
                if self.is_sym(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.sym(")")?;
            self.sym(":=")?;
            let s = self.call(targets, at)?;
            self.sym(";")?;
            return Ok(Some(s));
        }
        let name = self.ident()?;
        let s = if self.is_sym("(") {
            self.pos -= 1;
            self.call(Vec::new(), at)?
        } else if self.is_sym("[") {
            let ty = self.var_type(&name, at)?;
            if ty != Type::IntArray {
                return Err(type_err(at, format!("`{name}` is not an array")));
            }
            self.pos += 1;
            let i = self.typed_expr(Type::Int)?;
            self.sym("]")?;
            self.sym(":=")?;
            let e = self.typed_expr(Type::Int)?;
            Stmt::Store(name, i, e)
        } else {
            self.sym(":=")?;
            if matches!(self.peek(), Tok::Id(_)) && matches!(self.peek_at(1), Tok::Sym("(")) {
                self.call(vec![name], at)?
            } else {
                let ty = self.var_type(&name, at)?;
                let e = self.typed_expr(ty)?;
                Stmt::Assign(name, e)
            }
        };
        self.sym(";")?;
        Ok(Some(s))
    }

    fn call(&mut self, targets: Vec<String>, at: (usize, usize)) -> R<Stmt> {
        let mut target_tys = Vec::new();
        for t in &targets {
            target_tys.push(self.var_type(t, at)?);
        }
        let proc = self.ident()?;
        self.sym("(")?;
        let mut args = Vec::new();
        let mut arg_tys = Vec::new();
        if !self.is_sym(")") {
            loop {
                let (e, t) = self.expr()?;
                args.push(e);
                arg_tys.push(t);
                if self.is_sym(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.sym(")")?;
        self.calls.push(CallSite {
            line: at.0,
            col: at.1,
            caller: self.current.clone(),
            proc: proc.clone(),
            args: arg_tys,
            targets: target_tys,
        });
        Ok(Stmt::Call { targets, proc, args })
    }

    fn typed_expr(&mut self, want: Type) -> R<Expr> {
        let at = self.here();
        let (e, t) = self.expr()?;
        if t != want {
            return Err(type_err(at, format!("expected {want}, found {t} in `{e}`")));
        }
        Ok(e)
    }

    fn expr(&mut self) -> R<(Expr, Type)> {
        self.binary(1)
    }

    fn binary(&mut self, min: u8) -> R<(Expr, Type)> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym(s) => match *s {
                    "+" => BinOp::Add,
                    "-" => BinOp::Sub,
                    "*" => BinOp::Mul,
                    "/" => BinOp::Div,
                    "%" => BinOp::Mod,
                    "<" => BinOp::Lt,
                    "<=" => BinOp::Le,
                    ">" => BinOp::Gt,
                    ">=" => BinOp::Ge,
                    "==" => BinOp::Eq,
                    "!=" => BinOp::Ne,
                    "&&" => BinOp::And,
                    "||" => BinOp::Or,
                    _ => break,
                },
                _ => break,
            };
            if op.prec() < min {
                break;
            }
            let at = self.here();
            self.pos += 1;
            let next = if op.prec() == 3 { 4 } else { op.prec() + 1 };
            let rhs = self.binary(next)?;
            let ty = match op.prec() {
                1 | 2 => {
                    expect_ty(at, &lhs, Type::Bool)?;
                    expect_ty(at, &rhs, Type::Bool)?;
                    Type::Bool
                }
                3 => {
                    if matches!(op, BinOp::Eq | BinOp::Ne) {
                        if lhs.1 != rhs.1 || lhs.1 == Type::IntArray {
                            return Err(type_err(at, format!("cannot compare {} with {}", lhs.1, rhs.1)));
                        }
                    } else {
                        expect_ty(at, &lhs, Type::Int)?;
                        expect_ty(at, &rhs, Type::Int)?;
                    }
                    Type::Bool
                }
                _ => {
                    expect_ty(at, &lhs, Type::Int)?;
                    expect_ty(at, &rhs, Type::Int)?;
                    Type::Int
                }
            };
            lhs = (Expr::bin(op, lhs.0, rhs.0), ty);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> R<(Expr, Type)> {
        let at = self.here();
        if self.is_sym("-") {
            self.pos += 1;
            let e = self.unary()?;
            expect_ty(at, &e, Type::Int)?;
            return Ok((
                match e.0 {
                    Expr::Int(n) => Expr::Int(-n),
                    x => Expr::Neg(Box::new(x)),
                },
                Type::Int,
            ));
        }
        if self.is_sym("!") {
            self.pos += 1;
            let e = self.unary()?;
            expect_ty(at, &e, Type::Bool)?;
            return Ok((Expr::Not(Box::new(e.0)), Type::Bool));
        }
        let mut e = self.atom()?;
        while self.is_sym("[") {
            let at = self.here();
            self.pos += 1;
            if e.1 != Type::IntArray {
                return Err(type_err(at, format!("`{}` is not an array", e.0)));
            }
            let i = self.typed_expr(Type::Int)?;
            self.sym("]")?;
            e = (Expr::Select(Box::new(e.0), Box::new(i)), Type::Int);
        }
        Ok(e)
    }

    fn atom(&mut self) -> R<(Expr, Type)> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.pos += 1;
                Ok((Expr::Int(n), Type::Int))
            }
            Tok::Id(s) if s == "true" || s == "false" => {
                self.pos += 1;
                Ok((Expr::Bool(s == "true"), Type::Bool))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Tok::Id(_) => {
                let name = self.ident()?;
                if self.is_sym("(") {
                    return Err(FrontendError::Syntax {
                        line: at.0,
                        col: at.1,
                        msg: format!("call to `{name}` inside an expression; assign it with `x := {name}(..)`"),
                    });
                }
                let ty = self.var_type(&name, at)?;
                Ok((Expr::Var(name), ty))
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }
}

fn type_err(at: (usize, usize), msg: String) -> FrontendError {
    FrontendError::Type {
        line: at.0,
        col: at.1,
        msg,
    }
}

fn expect_ty(at: (usize, usize), e: &(Expr, Type), want: Type) -> R<()> {
    if e.1 != want {
        return Err(type_err(at, format!("expected {want}, found {} in `{}`", e.1, e.0)));
    }
    Ok(())
}

/// Parses and checks a program: declarations before use, types, and call signatures.
pub fn parse(src: &str) -> Result<Program, FrontendError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        scope: BTreeMap::new(),
        calls: Vec::new(),
        current: String::new(),
    };
    let prog = p.program()?;
    for c in &p.calls {
        let callee = prog.proc(&c.proc).ok_or_else(|| FrontendError::Semantic(format!(
            "{}:{}: `{}` calls unknown procedure `{}`",
            c.line, c.col, c.caller, c.proc
        )))?;
        let want: Vec<Type> = callee.params.iter().map(|v| v.ty).collect();
        let outs: Vec<Type> = callee.outputs.iter().map(|v| v.ty).collect();
        if want != c.args {
            return Err(type_err(
                (c.line, c.col),
                format!("`{}` expects {} argument(s) of types {:?}", c.proc, want.len(), want),
            ));
        }
        if !c.targets.is_empty() && outs != c.targets {
            return Err(type_err(
                (c.line, c.col),
                format!("`{}` returns {} value(s) of types {:?}", c.proc, outs.len(), outs),
            ));
        }
    }
    check_returns(&prog)?;
    Ok(prog)
}

fn check_returns(prog: &Program) -> Result<(), FrontendError> {
    fn walk(p: &Proc, body: &[Stmt], types: &BTreeMap<&str, Type>) -> Result<(), FrontendError> {
        for s in body {
            match s {
                Stmt::Return(es) => {
                    if es.len() != p.outputs.len() && !es.is_empty() {
                        return Err(FrontendError::Semantic(format!(
                            "`{}` returns {} value(s), found `{}`",
                            p.name,
                            p.outputs.len(),
                            s.text()
                        )));
                    }
                    for (e, o) in es.iter().zip(&p.outputs) {
                        if expr_type(e, types) != Some(o.ty) {
                            return Err(FrontendError::Semantic(format!(
                                "`{}`: `{}` does not match output `{}: {}`",
                                p.name,
                                s.text(),
                                o.name,
                                o.ty
                            )));
                        }
                    }
                }
                Stmt::If(_, t, e) => {
                    walk(p, t, types)?;
                    walk(p, e, types)?;
                }
                _ => {}
            }
        }
        Ok(())
    }
    for p in &prog.procs {
        let types: BTreeMap<&str, Type> = p.vars().map(|v| (v.name.as_str(), v.ty)).collect();
        walk(p, &p.body, &types)?;
    }
    Ok(())
}

pub(crate) fn expr_type(e: &Expr, types: &BTreeMap<&str, Type>) -> Option<Type> {
    Some(match e {
        Expr::Int(_) | Expr::Neg(_) | Expr::Select(..) => Type::Int,
        Expr::Bool(_) | Expr::Not(_) => Type::Bool,
        Expr::Var(v) => *types.get(v.as_str())?,
        Expr::Bin(op, ..) => {
            if op.prec() >= 4 {
                Type::Int
            } else {
                Type::Bool
            }
        }
    })
}

/// Names of all procedures reachable from `entry` by calls.
pub fn reachable_procs(prog: &Program, entry: &str) -> BTreeSet<String> {
    fn calls(body: &[Stmt], out: &mut Vec<String>) {
        for s in body {
            match s {
                Stmt::Call { proc, .. } => out.push(proc.clone()),
                Stmt::If(_, t, e) => {
                    calls(t, out);
                    calls(e, out);
                }
                _ => {}
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut todo = vec![entry.to_string()];
    while let Some(p) = todo.pop() {
        if !seen.insert(p.clone()) {
            continue;
        }
        if let Some(pr) = prog.proc(&p) {
            let mut v = Vec::new();
            calls(&pr.body, &mut v);
            todo.extend(v);
        }
    }
    seen
}
