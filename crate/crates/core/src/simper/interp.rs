use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use super::{Cond, LValue, Program, Stmt, Value, INPUT, LEN};

/// Runtime value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SimperValue {
    Nat(u64),
    Sym(String),
    /// Row-major elements; `elems.len()` is the product of `dims`.
    Array {
        dims: Vec<usize>,
        elems: Vec<SimperValue>,
    },
}

impl fmt::Display for SimperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn nest(f: &mut fmt::Formatter<'_>, dims: &[usize], elems: &[SimperValue]) -> fmt::Result {
            let Some((&d, rest)) = dims.split_first() else {
                return write!(f, "{}", elems[0]);
            };
            let stride: usize = rest.iter().product();
            f.write_str("(")?;
            for i in 0..d {
                if i > 0 {
                    f.write_str(",")?;
                }
                nest(f, rest, &elems[i * stride..(i + 1) * stride])?;
            }
            f.write_str(")")
        }
        match self {
            SimperValue::Nat(n) => write!(f, "{n}"),
            SimperValue::Sym(s) => write!(f, "\"{s}\""),
            SimperValue::Array { dims, elems } => nest(f, dims, elems),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecOutcome {
    Halted,
    StuckEnd,
    OutOfFuel,
    RuntimeError(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecResult {
    pub outcome: ExecOutcome,
    pub steps: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpError {
    #[error("`{0}` must be desugared before interpretation")]
    Sugar(String),
    #[error("`goto {0}` has no matching label")]
    UnknownLabel(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    Nat(u64),
    Sym(u32),
}

#[derive(Clone, Debug)]
struct Arr {
    dims: Vec<usize>,
    data: Vec<Scalar>,
}

#[derive(Clone, Debug)]
enum Rt {
    Unset,
    Scalar(Scalar),
    Arr(Arr),
}

#[derive(Clone, Debug)]
enum CVal {
    Var(usize),
    Index(usize, Vec<CVal>),
    Const(Scalar),
    Array(Vec<CVal>, Box<CVal>),
}

#[derive(Clone, Debug)]
enum CCond {
    And(Box<CCond>, Box<CCond>),
    Or(Box<CCond>, Box<CCond>),
    Eq(CVal, CVal, bool),
}

#[derive(Clone, Debug)]
enum Ix {
    Nop,
    /// Internal jump over an else block; free.
    Skip(usize),
    Goto(usize),
    /// Falls through when the condition holds, else jumps.
    Branch(CCond, usize),
    Assign(usize, Vec<CVal>, CVal),
    Inc(usize, Vec<CVal>),
    Dec(usize, Vec<CVal>),
    Halt,
}

/// A core program resolved to slots and jump targets, ready to run many times.
#[derive(Clone, Debug)]
pub struct Interpreter {
    code: Vec<Ix>,
    names: Vec<String>,
    syms: Vec<String>,
    sym_ix: HashMap<String, u32>,
    input: usize,
    len: usize,
}

struct Lower<'a> {
    slots: HashMap<&'a str, usize>,
    names: Vec<String>,
    syms: Vec<String>,
    sym_ix: HashMap<String, u32>,
    labels: HashMap<&'a str, usize>,
    code: Vec<Ix>,
    gotos: Vec<(usize, &'a str)>,
}

impl<'a> Lower<'a> {
    fn slot(&mut self, x: &'a str) -> usize {
        if let Some(&s) = self.slots.get(x) {
            return s;
        }
        self.names.push(x.to_string());
        self.slots.insert(x, self.names.len() - 1);
        self.names.len() - 1
    }

    fn sym(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.sym_ix.get(s) {
            return i;
        }
        self.syms.push(s.to_string());
        self.sym_ix
            .insert(s.to_string(), self.syms.len() as u32 - 1);
        self.syms.len() as u32 - 1
    }

    fn value(&mut self, v: &'a Value) -> CVal {
        match v {
            Value::Var(x) => CVal::Var(self.slot(x)),
            Value::Index(x, ix) => {
                let s = self.slot(x);
                CVal::Index(s, ix.iter().map(|v| self.value(v)).collect())
            }
            Value::Nat(n) => CVal::Const(Scalar::Nat(*n)),
            Value::Sym(s) => CVal::Const(Scalar::Sym(self.sym(s))),
            Value::Array(dims, fill) => CVal::Array(
                dims.iter().map(|v| self.value(v)).collect(),
                Box::new(self.value(fill)),
            ),
        }
    }

    fn lvalue(&mut self, l: &'a LValue) -> (usize, Vec<CVal>) {
        (
            self.slot(&l.name),
            l.indices.iter().map(|v| self.value(v)).collect(),
        )
    }

    fn cond(&mut self, c: &'a Cond) -> CCond {
        match c {
            Cond::And(a, b) => CCond::And(Box::new(self.cond(a)), Box::new(self.cond(b))),
            Cond::Or(a, b) => CCond::Or(Box::new(self.cond(a)), Box::new(self.cond(b))),
            Cond::Eq(x, y) => CCond::Eq(self.value(x), self.value(y), true),
            Cond::Neq(x, y) => CCond::Eq(self.value(x), self.value(y), false),
        }
    }

    fn block(&mut self, body: &'a [Stmt]) -> Result<(), InterpError> {
        for s in body {
            match s {
                Stmt::Label(l) => {
                    self.labels.insert(l, self.code.len());
                    self.code.push(Ix::Nop);
                }
                Stmt::Goto(l) => {
                    self.gotos.push((self.code.len(), l));
                    self.code.push(Ix::Goto(usize::MAX));
                }
                Stmt::Assign(l, v) => {
                    let (x, ix) = self.lvalue(l);
                    let v = self.value(v);
                    self.code.push(Ix::Assign(x, ix, v));
                }
                Stmt::Inc(l) => {
                    let (x, ix) = self.lvalue(l);
                    self.code.push(Ix::Inc(x, ix));
                }
                Stmt::Dec(l) => {
                    let (x, ix) = self.lvalue(l);
                    self.code.push(Ix::Dec(x, ix));
                }
                Stmt::Halt => self.code.push(Ix::Halt),
                Stmt::If(c, t, e) => {
                    let c = self.cond(c);
                    let at = self.code.len();
                    self.code.push(Ix::Nop);
                    self.block(t)?;
                    match e {
                        None => self.code[at] = Ix::Branch(c, self.code.len()),
                        Some(e) => {
                            let skip = self.code.len();
                            self.code.push(Ix::Nop);
                            self.code[at] = Ix::Branch(c, self.code.len());
                            self.block(e)?;
                            self.code[skip] = Ix::Skip(self.code.len());
                        }
                    }
                }
                Stmt::While(..) | Stmt::Switch(..) => {
                    return Err(InterpError::Sugar(super::head(s)))
                }
            }
        }
        Ok(())
    }
}

struct Machine<'a> {
    it: &'a Interpreter,
    slots: Vec<Rt>,
    extra_syms: Vec<String>,
}

type Fault = String;

impl Machine<'_> {
    fn scalar(&self, v: &CVal) -> Result<Scalar, Fault> {
        match v {
            CVal::Const(c) => Ok(*c),
            CVal::Var(x) => match &self.slots[*x] {
                Rt::Scalar(s) => Ok(*s),
                Rt::Unset => Err(format!("`{}` read before assignment", self.it.names[*x])),
                Rt::Arr(_) => Err(format!("`{}` is an array", self.it.names[*x])),
            },
            CVal::Index(x, ix) => {
                let off = self.offset(*x, ix)?;
                let Rt::Arr(a) = &self.slots[*x] else {
                    unreachable!()
                };
                Ok(a.data[off])
            }
            CVal::Array(..) => Err("array literal used as a scalar".into()),
        }
    }

    fn nat(&self, v: &CVal) -> Result<u64, Fault> {
        match self.scalar(v)? {
            Scalar::Nat(n) => Ok(n),
            Scalar::Sym(_) => Err("symbol used as a number".into()),
        }
    }

    fn offset(&self, x: usize, ix: &[CVal]) -> Result<usize, Fault> {
        let name = &self.it.names[x];
        let Rt::Arr(a) = &self.slots[x] else {
            return Err(format!("`{name}` indexed before assignment"));
        };
        if a.dims.len() != ix.len() {
            return Err(format!("`{name}` has {} dimensions", a.dims.len()));
        }
        let mut off = 0usize;
        for (d, v) in a.dims.iter().zip(ix) {
            let i = self.nat(v)?;
            if i >= *d as u64 {
                return Err(format!("index {i} out of bounds for `{name}` (extent {d})"));
            }
            off = off * d + i as usize;
        }
        Ok(off)
    }

    fn rvalue(&self, v: &CVal) -> Result<(Rt, u64), Fault> {
        match v {
            CVal::Var(x) => match &self.slots[*x] {
                Rt::Unset => Err(format!("`{}` read before assignment", self.it.names[*x])),
                r => Ok((r.clone(), 1)),
            },
            CVal::Array(dims, fill) => {
                let dims = dims
                    .iter()
                    .map(|d| {
                        self.nat(d).and_then(|n| {
                            usize::try_from(n).map_err(|_| "extent too large".to_string())
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let fill = self.scalar(fill)?;
                let size = dims
                    .iter()
                    .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                    .filter(|&s| s <= 1 << 28)
                    .ok_or("array literal too large")?;
                Ok((
                    Rt::Arr(Arr {
                        dims,
                        data: vec![fill; size],
                    }),
                    size.max(1) as u64,
                ))
            }
            other => Ok((Rt::Scalar(self.scalar(other)?), 1)),
        }
    }

    fn cond(&self, c: &CCond) -> Result<bool, Fault> {
        match c {
            CCond::And(a, b) => Ok(self.cond(a)? && self.cond(b)?),
            CCond::Or(a, b) => Ok(self.cond(a)? || self.cond(b)?),
            CCond::Eq(x, y, eq) => Ok((self.scalar(x)? == self.scalar(y)?) == *eq),
        }
    }

    fn store(&mut self, x: usize, ix: &[CVal], v: Rt) -> Result<(), Fault> {
        if ix.is_empty() {
            self.slots[x] = v;
            return Ok(());
        }
        let off = self.offset(x, ix)?;
        let Rt::Scalar(s) = v else {
            return Err("array stored into an element".into());
        };
        let Rt::Arr(a) = &mut self.slots[x] else {
            unreachable!()
        };
        a.data[off] = s;
        Ok(())
    }

    fn bump(&mut self, x: usize, ix: &[CVal], up: bool) -> Result<(), Fault> {
        let n = if ix.is_empty() {
            self.nat(&CVal::Var(x))?
        } else {
            self.nat(&CVal::Index(x, ix.to_vec()))?
        };
        let n = if up {
            n.checked_add(1).ok_or("counter overflow")?
        } else {
            n.saturating_sub(1)
        };
        self.store(x, ix, Rt::Scalar(Scalar::Nat(n)))
    }

    fn export(&self, r: &Rt) -> Option<SimperValue> {
        let sc = |s: &Scalar| match *s {
            Scalar::Nat(n) => SimperValue::Nat(n),
            Scalar::Sym(i) => {
                let k = i as usize;
                let lits = &self.it.syms;
                SimperValue::Sym(if k < lits.len() {
                    lits[k].clone()
                } else {
                    self.extra_syms[k - lits.len()].clone()
                })
            }
        };
        match r {
            Rt::Unset => None,
            Rt::Scalar(s) => Some(sc(s)),
            Rt::Arr(a) => Some(SimperValue::Array {
                dims: a.dims.clone(),
                elems: a.data.iter().map(sc).collect(),
            }),
        }
    }
}

impl Interpreter {
    pub fn new(p: &Program) -> Result<Self, InterpError> {
        let mut lw = Lower {
            slots: HashMap::new(),
            names: Vec::new(),
            syms: Vec::new(),
            sym_ix: HashMap::new(),
            labels: HashMap::new(),
            code: Vec::new(),
            gotos: Vec::new(),
        };
        let input = lw.slot(INPUT);
        let len = lw.slot(LEN);
        lw.block(&p.body)?;
        for (at, l) in std::mem::take(&mut lw.gotos) {
            let target = *lw
                .labels
                .get(l)
                .ok_or_else(|| InterpError::UnknownLabel(l.to_string()))?;
            lw.code[at] = Ix::Goto(target);
        }
        Ok(Interpreter {
            code: lw.code,
            names: lw.names,
            syms: lw.syms,
            sym_ix: lw.sym_ix,
            input,
            len,
        })
    }

    pub fn run<S: AsRef<str>>(&self, input: &[S], fuel: u64) -> ExecResult {
        self.run_env(input, fuel).0
    }

    /// Also returns the final value of every assigned variable.
    pub fn run_env<S: AsRef<str>>(
        &self,
        input: &[S],
        fuel: u64,
    ) -> (ExecResult, BTreeMap<String, SimperValue>) {
        let mut m = Machine {
            it: self,
            slots: vec![Rt::Unset; self.names.len()],
            extra_syms: Vec::new(),
        };
        let mut extra: HashMap<&str, u32> = HashMap::new();
        let mut word = Vec::with_capacity(input.len());
        for s in input {
            let s = s.as_ref();
            let id = match self.sym_ix.get(s) {
                Some(&i) => i,
                None => *extra.entry(s).or_insert_with(|| {
                    m.extra_syms.push(s.to_string());
                    (self.syms.len() + m.extra_syms.len() - 1) as u32
                }),
            };
            word.push(Scalar::Sym(id));
        }
        m.slots[self.input] = Rt::Arr(Arr {
            dims: vec![word.len()],
            data: word,
        });
        m.slots[self.len] = Rt::Scalar(Scalar::Nat(input.len() as u64));

        let mut pc = 0;
        let mut steps = 0u64;
        let outcome = loop {
            let Some(ix) = self.code.get(pc) else {
                break ExecOutcome::StuckEnd;
            };
            let cost = u64::from(!matches!(ix, Ix::Skip(_)));
            if steps + cost > fuel {
                break ExecOutcome::OutOfFuel;
            }
            let r: Result<usize, Fault> = match ix {
                Ix::Nop => Ok(pc + 1),
                Ix::Skip(t) | Ix::Goto(t) => Ok(*t),
                Ix::Branch(c, t) => m.cond(c).map(|b| if b { pc + 1 } else { *t }),
                Ix::Assign(x, lix, v) => match m.rvalue(v) {
                    Ok((_, size)) if steps + size > fuel => break ExecOutcome::OutOfFuel,
                    Ok((r, size)) => {
                        steps += size - 1;
                        m.store(*x, lix, r).map(|_| pc + 1)
                    }
                    Err(e) => Err(e),
                },
                Ix::Inc(x, lix) => m.bump(*x, lix, true).map(|_| pc + 1),
                Ix::Dec(x, lix) => m.bump(*x, lix, false).map(|_| pc + 1),
                Ix::Halt => {
                    steps += 1;
                    break ExecOutcome::Halted;
                }
            };
            steps += cost;
            match r {
                Ok(next) => pc = next,
                Err(e) => break ExecOutcome::RuntimeError(e),
            }
        };
        let env = self
            .names
            .iter()
            .zip(&m.slots)
            .filter_map(|(x, r)| Some((x.clone(), m.export(r)?)))
            .collect();
        (ExecResult { outcome, steps }, env)
    }
}

/// Runs a desugared program on `input` for at most `fuel` cost units.
pub fn interpret<S: AsRef<str>>(
    p: &Program,
    input: &[S],
    fuel: u64,
) -> Result<ExecResult, InterpError> {
    Ok(Interpreter::new(p)?.run(input, fuel))
}
