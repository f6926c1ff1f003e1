//! A small imperative language with counters, symbols and named arrays.

use std::fmt;

mod check;
mod desugar;
mod interp;
mod parse;

pub use check::{typecheck, SimperType, TypeEnv, TypeError};
pub use desugar::desugar;
pub use interp::{interpret, ExecOutcome, ExecResult, InterpError, Interpreter, SimperValue};
pub use parse::{parse_simper, SimperParseError};

/// Built-in word under test.
pub const INPUT: &str = "input";
/// Built-in length of [`INPUT`].
pub const LEN: &str = "n";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Var(String),
    Index(String, Vec<Value>),
    Nat(u64),
    Sym(String),
    /// `array[d1,...](fill)`
    Array(Vec<Value>, Box<Value>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LValue {
    pub name: String,
    pub indices: Vec<Value>,
}

impl LValue {
    pub fn var(name: impl Into<String>) -> Self {
        LValue {
            name: name.into(),
            indices: Vec::new(),
        }
    }

    pub fn index(name: impl Into<String>, indices: Vec<Value>) -> Self {
        LValue {
            name: name.into(),
            indices,
        }
    }

    pub fn to_value(&self) -> Value {
        if self.indices.is_empty() {
            Value::Var(self.name.clone())
        } else {
            Value::Index(self.name.clone(), self.indices.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cond {
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Eq(Value, Value),
    Neq(Value, Value),
}

impl Cond {
    pub fn and(a: Cond, b: Cond) -> Cond {
        Cond::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Cond, b: Cond) -> Cond {
        Cond::Or(Box::new(a), Box::new(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Label(String),
    Goto(String),
    Assign(LValue, Value),
    If(Cond, Vec<Stmt>, Option<Vec<Stmt>>),
    Inc(LValue),
    Dec(LValue),
    Halt,
    While(Cond, Vec<Stmt>),
    Switch(Value, Vec<(Value, Vec<Stmt>)>),
}

impl Stmt {
    pub fn is_sugar(&self) -> bool {
        matches!(self, Stmt::While(..) | Stmt::Switch(..))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn new(body: Vec<Stmt>) -> Self {
        Program { body }
    }

    /// Every statement, depth first, blocks included.
    pub fn walk(&self) -> Vec<&Stmt> {
        fn go<'a>(b: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
            for s in b {
                out.push(s);
                match s {
                    Stmt::If(_, t, e) => {
                        go(t, out);
                        if let Some(e) = e {
                            go(e, out);
                        }
                    }
                    Stmt::While(_, b) => go(b, out),
                    Stmt::Switch(_, arms) => arms.iter().for_each(|(_, b)| go(b, out)),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        go(&self.body, &mut out);
        out
    }

    pub fn is_core(&self) -> bool {
        self.walk().iter().all(|s| !s.is_sugar())
    }

    /// Symbol literals in order of first appearance.
    pub fn sym_literals(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |v: &Value| {
            v.visit(&mut |v| {
                if let Value::Sym(s) = v {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
            })
        };
        for s in self.walk() {
            match s {
                Stmt::Assign(l, v) => {
                    l.indices.iter().for_each(&mut add);
                    add(v);
                }
                Stmt::Inc(l) | Stmt::Dec(l) => l.indices.iter().for_each(&mut add),
                Stmt::If(c, ..) | Stmt::While(c, _) => c.values().into_iter().for_each(&mut add),
                Stmt::Switch(v, arms) => {
                    add(v);
                    arms.iter().for_each(|(a, _)| add(a));
                }
                Stmt::Label(_) | Stmt::Goto(_) | Stmt::Halt => {}
            }
        }
        out
    }

    /// Rough text size: one unit per statement, value node and condition node.
    pub fn size(&self) -> usize {
        let mut n = 0;
        for s in self.walk() {
            n += 1;
            match s {
                Stmt::Assign(l, v) => {
                    n += l.indices.iter().chain([v]).map(Value::size).sum::<usize>()
                }
                Stmt::Inc(l) | Stmt::Dec(l) => {
                    n += l.indices.iter().map(Value::size).sum::<usize>()
                }
                Stmt::If(c, ..) | Stmt::While(c, _) => n += c.size(),
                Stmt::Switch(v, arms) => {
                    n += v.size() + arms.iter().map(|(a, _)| a.size()).sum::<usize>()
                }
                _ => {}
            }
        }
        n
    }
}

impl Value {
    pub fn visit(&self, f: &mut impl FnMut(&Value)) {
        f(self);
        match self {
            Value::Index(_, ix) => ix.iter().for_each(|v| v.visit(f)),
            Value::Array(dims, fill) => {
                dims.iter().for_each(|v| v.visit(f));
                fill.visit(f);
            }
            _ => {}
        }
    }

    fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl Cond {
    /// Operand values, left to right.
    pub fn values(&self) -> Vec<&Value> {
        match self {
            Cond::And(a, b) | Cond::Or(a, b) => {
                let mut v = a.values();
                v.extend(b.values());
                v
            }
            Cond::Eq(x, y) | Cond::Neq(x, y) => vec![x, y],
        }
    }

    fn size(&self) -> usize {
        match self {
            Cond::And(a, b) | Cond::Or(a, b) => 1 + a.size() + b.size(),
            Cond::Eq(x, y) | Cond::Neq(x, y) => 1 + x.size() + y.size(),
        }
    }
}

fn list(f: &mut fmt::Formatter<'_>, vs: &[Value]) -> fmt::Result {
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(x) => f.write_str(x),
            Value::Index(x, ix) => {
                write!(f, "{x}[")?;
                list(f, ix)?;
                f.write_str("]")
            }
            Value::Nat(n) => write!(f, "{n}"),
            Value::Sym(s) => write!(f, "\"{s}\""),
            Value::Array(dims, fill) => {
                f.write_str("array[")?;
                list(f, dims)?;
                write!(f, "]({fill})")
            }
        }
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_value())
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::And(a, b) => {
                let wrap = |c: &Cond| matches!(c, Cond::Or(..));
                if wrap(a) {
                    write!(f, "({a})")?
                } else {
                    write!(f, "{a}")?
                }
                f.write_str(" && ")?;
                if wrap(b) || matches!(**b, Cond::And(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Cond::Or(a, b) => {
                write!(f, "{a} || ")?;
                if matches!(**b, Cond::Or(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Cond::Eq(x, y) => write!(f, "{x} == {y}"),
            Cond::Neq(x, y) => write!(f, "{x} != {y}"),
        }
    }
}

fn block(f: &mut fmt::Formatter<'_>, body: &[Stmt], depth: usize) -> fmt::Result {
    f.write_str("{\n")?;
    for s in body {
        stmt(f, s, depth + 1)?;
    }
    write!(f, "{:w$}}}", "", w = 2 * depth)
}

fn stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    write!(f, "{:w$}", "", w = 2 * depth)?;
    match s {
        Stmt::Label(l) => write!(f, "{l}:")?,
        Stmt::Goto(l) => write!(f, "goto {l}")?,
        Stmt::Assign(l, v) => write!(f, "{l} := {v}")?,
        Stmt::Inc(l) => write!(f, "++{l}")?,
        Stmt::Dec(l) => write!(f, "--{l}")?,
        Stmt::Halt => f.write_str("halt")?,
        Stmt::If(c, t, e) => {
            write!(f, "if {c} ")?;
            block(f, t, depth)?;
            if let Some(e) = e {
                f.write_str(" else ")?;
                block(f, e, depth)?;
            }
        }
        Stmt::While(c, b) => {
            write!(f, "while {c} ")?;
            block(f, b, depth)?;
        }
        Stmt::Switch(v, arms) => {
            writeln!(f, "switch {v} {{")?;
            for (a, b) in arms {
                write!(f, "{:w$}{a} ", "", w = 2 * depth + 2)?;
                block(f, b, depth + 1)?;
                f.write_str("\n")?;
            }
            write!(f, "{:w$}}}", "", w = 2 * depth)?;
        }
    }
    f.write_str("\n")
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        stmt(f, self, 0)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.body.iter().try_for_each(|s| stmt(f, s, 0))
    }
}

/// One-line summary of a statement, used in diagnostics.
pub(crate) fn head(s: &Stmt) -> String {
    match s {
        Stmt::If(c, ..) => format!("if {c}"),
        Stmt::While(c, _) => format!("while {c}"),
        Stmt::Switch(v, _) => format!("switch {v}"),
        other => other.to_string().trim_end().to_string(),
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub const SPECIALIZED: &str = include_str!("../fixtures/ambig_specialized.simper");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_reparses() {
        let p = parse_simper(fixtures::SPECIALIZED).unwrap();
        let again = parse_simper(&p.to_string()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn parenthesised_or_survives_printing() {
        let p = parse_simper("x := 0 if (x == 1 || x == 0) && x != 2 { halt }").unwrap();
        let text = p.to_string();
        assert!(text.contains("(x == 1 || x == 0) && x != 2"), "{text}");
        assert_eq!(parse_simper(&text).unwrap(), p);
    }

    #[test]
    fn literals_in_first_appearance_order() {
        let p = parse_simper(fixtures::SPECIALIZED).unwrap();
        assert_eq!(p.sym_literals(), ["a", "b", "c", "d"]);
    }
}
