use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    IntArray,
}

impl Type {
    pub fn smt(self) -> &'static str {
        match self {
            Type::Int => "Int",
            Type::Bool => "Bool",
            Type::IntArray => "(Array Int Int)",
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "int",
            Type::Bool => "bool",
            Type::IntArray => "int[]",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn prec(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    fn negated(self) -> Option<BinOp> {
        Some(match self {
            BinOp::Lt => BinOp::Ge,
            BinOp::Le => BinOp::Gt,
            BinOp::Gt => BinOp::Le,
            BinOp::Ge => BinOp::Lt,
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// `a[i]`
    Select(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Logical negation, flipping comparisons instead of wrapping them.
    pub fn negate(&self) -> Expr {
        match self {
            Expr::Bin(op, a, b) if op.negated().is_some() => Expr::Bin(op.negated().unwrap(), a.clone(), b.clone()),
            Expr::Not(e) => (**e).clone(),
            Expr::Bool(b) => Expr::Bool(!b),
            e => Expr::Not(Box::new(e.clone())),
        }
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.rename(f))),
            Expr::Not(e) => Expr::Not(Box::new(e.rename(f))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.rename(f), b.rename(f)),
            Expr::Select(a, i) => Expr::Select(Box::new(a.rename(f)), Box::new(i.rename(f))),
        }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(e) | Expr::Not(e) => e.vars(out),
            Expr::Bin(_, a, b) | Expr::Select(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// SMT-LIB term; `var` maps program variables to SMT symbols.
    pub fn smt(&self, var: &impl Fn(&str) -> String) -> String {
        match self {
            Expr::Int(n) if *n < 0 => format!("(- {})", -(*n as i128)),
            Expr::Int(n) => n.to_string(),
            Expr::Bool(b) => b.to_string(),
            Expr::Var(v) => var(v),
            Expr::Neg(e) => format!("(- {})", e.smt(var)),
            Expr::Not(e) => format!("(not {})", e.smt(var)),
            Expr::Select(a, i) => format!("(select {} {})", a.smt(var), i.smt(var)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.smt(var), b.smt(var));
                match op {
                    BinOp::Ne => format!("(not (= {a} {b}))"),
                    _ => {
                        let o = match op {
                            BinOp::Div => "div",
                            BinOp::Mod => "mod",
                            BinOp::Eq => "=",
                            BinOp::And => "and",
                            BinOp::Or => "or",
                            o => o.symbol(),
                        };
                        format!("({o} {a} {b})")
                    }
                }
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, 6)
            }
            Expr::Not(e) => {
                f.write_str("!")?;
                e.fmt_prec(f, 6)
            }
            Expr::Select(a, i) => {
                a.fmt_prec(f, 7)?;
                write!(f, "[{i}]")
            }
            Expr::Bin(op, a, b) => {
                let p = op.prec();
                let paren = p < min;
                if paren {
                    f.write_str("(")?;
                }
                // left-associative; comparisons do not chain
                let left = if p == 3 { p + 1 } else { p };
                let right = p + 1;
                a.fmt_prec(f, left)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, right)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign(String, Expr),
    /// `a[i] := e`
    Store(String, Expr, Expr),
    Assume(Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    Call {
        targets: Vec<String>,
        proc: String,
        args: Vec<Expr>,
    },
    Return(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proc {
    pub name: String,
    pub params: Vec<Var>,
    pub outputs: Vec<Var>,
    pub locals: Vec<Var>,
    pub body: Vec<Stmt>,
}

impl Proc {
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.params.iter().chain(&self.outputs).chain(&self.locals)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub procs: Vec<Proc>,
}

impl Program {
    pub fn proc(&self, name: &str) -> Option<&Proc> {
        self.procs.iter().find(|p| p.name == name)
    }
}

fn var_list(vs: &[Var]) -> String {
    vs.iter()
        .map(|v| format!("{}: {}", v.name, v.ty))
        .collect::<Vec<_>>()
        .join(", ")
}

fn exprs(es: &[Expr]) -> String {
    es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_block(f: &mut fmt::Formatter<'_>, body: &[Stmt], depth: usize) -> fmt::Result {
    for s in body {
        write_stmt(f, s, depth)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    match s {
        Stmt::If(c, t, e) => {
            writeln!(f, "{pad}if ({c}) {{")?;
            write_block(f, t, depth + 1)?;
            if e.is_empty() {
                writeln!(f, "{pad}}}")
            } else {
                writeln!(f, "{pad}}} else {{")?;
                write_block(f, e, depth + 1)?;
                writeln!(f, "{pad}}}")
            }
        }
        s => writeln!(f, "{pad}{};", Stmt::text(s)),
    }
}

impl Stmt {
    /// Single-line source text of a non-branching statement, without the semicolon.
    pub fn text(&self) -> String {
        match self {
            Stmt::Assign(x, e) => format!("{x} := {e}"),
            Stmt::Store(a, i, e) => format!("{a}[{i}] := {e}"),
            Stmt::Assume(c) => format!("assume {c}"),
            Stmt::Call { targets, proc, args } => match targets.len() {
                0 => format!("{proc}({})", exprs(args)),
                1 => format!("{} := {proc}({})", targets[0], exprs(args)),
                _ => format!("({}) := {proc}({})", targets.join(", "), exprs(args)),
            },
            Stmt::Return(es) if es.is_empty() => "return".into(),
            Stmt::Return(es) => format!("return {}", exprs(es)),
            Stmt::If(c, ..) => format!("if ({c})"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.procs.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "proc {}({})", p.name, var_list(&p.params))?;
            if !p.outputs.is_empty() {
                write!(f, " returns ({})", var_list(&p.outputs))?;
            }
            writeln!(f, " {{")?;
            for v in &p.locals {
                writeln!(f, "  var {}: {};", v.name, v.ty)?;
            }
            write_block(f, &p.body, 1)?;
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
