use std::collections::HashSet;
use std::fmt;

use super::{CompileError, Layout};
use crate::simper::{Cond, LValue, Program, SimperType, Stmt, TypeEnv, Value, INPUT, LEN};

/// Straight-line instructions over named zones. Index, dimension and
/// counter operands of `Read`, `Write` and `NewArray` are consumed: the
/// machine counts them down to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ir {
    Label(String),
    Jump(String),
    JumpIf {
        a: String,
        b: String,
        eq: bool,
        target: String,
    },
    SetNat(String, u64),
    SetSym(String, String),
    Copy(String, String),
    Read(String, String, Vec<String>),
    Write(String, Vec<String>, String),
    NewArray(String, Vec<String>, String),
    Inc(String),
    Dec(String),
    Halt,
}

impl fmt::Display for Ir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ir::Label(l) => write!(f, "{l}:"),
            Ir::Jump(l) => write!(f, "  jump {l}"),
            Ir::JumpIf { a, b, eq, target } => {
                write!(
                    f,
                    "  if {a} {} {b} jump {target}",
                    if *eq { "==" } else { "!=" }
                )
            }
            Ir::SetNat(x, n) => write!(f, "  {x} := {n}"),
            Ir::SetSym(x, s) => write!(f, "  {x} := {s:?}"),
            Ir::Copy(x, y) => write!(f, "  {x} := {y}"),
            Ir::Read(x, a, ix) => write!(f, "  {x} := {a}[{}]", ix.join(",")),
            Ir::Write(a, ix, y) => write!(f, "  {a}[{}] := {y}", ix.join(",")),
            Ir::NewArray(x, d, v) => write!(f, "  {x} := array[{}]({v})", d.join(",")),
            Ir::Inc(x) => write!(f, "  ++{x}"),
            Ir::Dec(x) => write!(f, "  --{x}"),
            Ir::Halt => write!(f, "  halt"),
        }
    }
}

fn is_temp(x: &str) -> bool {
    x.starts_with('$')
}

struct Lower<'a> {
    env: &'a TypeEnv,
    out: Vec<Ir>,
    temps: usize,
    labels: usize,
}

impl Lower<'_> {
    fn temp(&mut self, kind: char) -> String {
        self.temps += 1;
        format!("${kind}{}", self.temps - 1)
    }

    fn label(&mut self) -> String {
        self.labels += 1;
        format!("$c{}", self.labels - 1)
    }

    fn elem(&self, a: &str) -> Result<SimperType, CompileError> {
        match self.env.get(a) {
            Some(SimperType::Array(_, e)) => Ok((**e).clone()),
            _ => Err(CompileError::Unsupported(format!("`{a}` is not an array"))),
        }
    }

    /// A zone holding the value of `v`, left intact.
    fn operand(&mut self, v: &Value) -> Result<String, CompileError> {
        Ok(match v {
            Value::Var(x) => x.clone(),
            Value::Nat(n) => {
                let t = self.temp('t');
                self.out.push(Ir::SetNat(t.clone(), *n));
                t
            }
            Value::Sym(s) => {
                let u = self.temp('u');
                self.out.push(Ir::SetSym(u.clone(), s.clone()));
                u
            }
            Value::Index(a, ix) => {
                let t = self.temp(if self.elem(a)? == SimperType::Nat {
                    't'
                } else {
                    'u'
                });
                let ix = self.consumable(ix, true)?;
                self.out.push(Ir::Read(t.clone(), a.clone(), ix));
                t
            }
            Value::Array(..) => {
                return Err(CompileError::Unsupported(format!(
                    "array literal `{v}` as an operand"
                )))
            }
        })
    }

    /// Zones the machine may count down. Temporaries are used as they are
    /// when `consume` allows it, anything else goes through a fresh copy.
    fn consumable(&mut self, vs: &[Value], consume: bool) -> Result<Vec<String>, CompileError> {
        vs.iter()
            .map(|v| {
                let x = self.operand(v)?;
                if consume && is_temp(&x) {
                    return Ok(x);
                }
                let i = self.temp('i');
                self.out.push(Ir::Copy(i.clone(), x));
                Ok(i)
            })
            .collect()
    }

    fn cond(&mut self, c: &Cond, yes: &str, no: &str) -> Result<(), CompileError> {
        match c {
            Cond::And(a, b) => {
                let mid = self.label();
                self.cond(a, &mid, no)?;
                self.out.push(Ir::Label(mid));
                self.cond(b, yes, no)
            }
            Cond::Or(a, b) => {
                let mid = self.label();
                self.cond(a, yes, &mid)?;
                self.out.push(Ir::Label(mid));
                self.cond(b, yes, no)
            }
            Cond::Eq(x, y) | Cond::Neq(x, y) => {
                let eq = matches!(c, Cond::Eq(..));
                let (a, b) = (self.operand(x)?, self.operand(y)?);
                if a == b {
                    self.out
                        .push(Ir::Jump(if eq { yes } else { no }.to_string()));
                } else {
                    self.out.push(Ir::JumpIf {
                        a,
                        b,
                        eq,
                        target: yes.to_string(),
                    });
                    self.out.push(Ir::Jump(no.to_string()));
                }
                Ok(())
            }
        }
    }

    fn assign(&mut self, l: &LValue, v: &Value) -> Result<(), CompileError> {
        if !l.indices.is_empty() {
            let y = self.operand(v)?;
            let ix = self.consumable(&l.indices, true)?;
            self.out.push(Ir::Write(l.name.clone(), ix, y));
            return Ok(());
        }
        let x = l.name.clone();
        match v {
            Value::Var(y) if *y == x => {}
            Value::Var(y) => self.out.push(Ir::Copy(x, y.clone())),
            Value::Nat(n) => self.out.push(Ir::SetNat(x, *n)),
            Value::Sym(s) => self.out.push(Ir::SetSym(x, s.clone())),
            Value::Index(a, ix) => {
                let ix = self.consumable(ix, true)?;
                self.out.push(Ir::Read(x, a.clone(), ix));
            }
            Value::Array(dims, fill) => {
                let dims = self.consumable(dims, true)?;
                let fill = self.operand(fill)?;
                self.out.push(Ir::NewArray(x, dims, fill));
            }
        }
        Ok(())
    }

    fn step(&mut self, l: &LValue, up: bool) -> Result<(), CompileError> {
        let op = |x: String| if up { Ir::Inc(x) } else { Ir::Dec(x) };
        if l.indices.is_empty() {
            self.out.push(op(l.name.clone()));
            return Ok(());
        }
        let t = self.temp('t');
        let read = self.consumable(&l.indices, false)?;
        self.out.push(Ir::Read(t.clone(), l.name.clone(), read));
        self.out.push(op(t.clone()));
        let write = self.consumable(&l.indices, true)?;
        self.out.push(Ir::Write(l.name.clone(), write, t));
        Ok(())
    }

    fn block(&mut self, body: &[Stmt]) -> Result<(), CompileError> {
        for s in body {
            self.temps = 0;
            match s {
                Stmt::Label(l) => self.out.push(Ir::Label(l.clone())),
                Stmt::Goto(l) => self.out.push(Ir::Jump(l.clone())),
                Stmt::Halt => self.out.push(Ir::Halt),
                Stmt::Assign(l, v) => self.assign(l, v)?,
                Stmt::Inc(l) => self.step(l, true)?,
                Stmt::Dec(l) => self.step(l, false)?,
                Stmt::If(c, t, e) => {
                    let (yes, no, end) = (self.label(), self.label(), self.label());
                    self.cond(c, &yes, &no)?;
                    self.out.push(Ir::Label(yes));
                    self.block(t)?;
                    self.out.push(Ir::Jump(end.clone()));
                    self.out.push(Ir::Label(no));
                    if let Some(e) = e {
                        self.block(e)?;
                    }
                    self.out.push(Ir::Label(end));
                }
                Stmt::While(..) | Stmt::Switch(..) => {
                    return Err(CompileError::Unsupported(
                        "sugar must be removed first".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Lowers a desugared program whose indices are all variables.
pub fn lower(p: &Program, env: &TypeEnv) -> Result<Vec<Ir>, CompileError> {
    let mut l = Lower {
        env,
        out: Vec::new(),
        temps: 0,
        labels: 0,
    };
    l.block(&p.body)?;
    Ok(l.out)
}

fn mentions(ir: &Ir) -> Vec<&String> {
    match ir {
        Ir::Label(_) | Ir::Jump(_) | Ir::Halt => vec![],
        Ir::JumpIf { a, b, .. } => vec![a, b],
        Ir::SetNat(x, _) | Ir::SetSym(x, _) | Ir::Inc(x) | Ir::Dec(x) => vec![x],
        Ir::Copy(x, y) => vec![x, y],
        Ir::Read(x, a, ix) => [x, a].into_iter().chain(ix).collect(),
        Ir::Write(a, ix, y) => [a].into_iter().chain(ix).chain([y]).collect(),
        Ir::NewArray(x, d, v) => [x].into_iter().chain(d).chain([v]).collect(),
    }
}

/// Zones: the input, its length, scalars by first mention, then arrays.
pub(super) fn layout(ir: &[Ir], env: &TypeEnv, p: &Program) -> Layout {
    let ty = |x: &str| -> SimperType {
        if let Some(t) = env.get(x) {
            return t.clone();
        }
        if x.starts_with("$u") {
            SimperType::Sym
        } else {
            SimperType::Nat
        }
    };
    let mut seen: HashSet<&str> = [INPUT, LEN].into();
    let mut scalars = Vec::new();
    let mut arrays = Vec::new();
    for x in ir.iter().flat_map(mentions) {
        if seen.insert(x) {
            let t = ty(x);
            if t.is_scalar() {
                scalars.push((x.clone(), t));
            } else {
                arrays.push((x.clone(), t));
            }
        }
    }
    let mut zones = vec![
        (INPUT.to_string(), SimperType::array(1, SimperType::Sym)),
        (LEN.to_string(), SimperType::Nat),
    ];
    zones.extend(scalars);
    zones.extend(arrays);
    let max_dim = zones
        .iter()
        .filter_map(|(_, t)| {
            if let SimperType::Array(k, _) = t {
                Some(*k as usize)
            } else {
                None
            }
        })
        .max()
        .unwrap_or(1);
    let mut syms = p.sym_literals();
    syms.sort();
    syms.dedup();
    Layout {
        zones,
        syms,
        max_dim,
    }
}
