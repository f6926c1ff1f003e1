//! Compiles Simper programs into extended Turing machines.
//!
//! The tape holds one zone per variable, `zl_x ... zr_x`. Numbers are binary
//! with the least significant bit first, symbols are single letters, and an
//! array of dimension `k` is a run of `dl_{k-1} ... dr_{k-1}` groups nesting
//! down to `dl_0 element dr_0`.

use std::collections::HashMap;

use thiserror::Error;

use crate::reduction::mangle;
use crate::simper::{
    desugar, typecheck, Cond, LValue, Program, SimperType, SimperValue, Stmt, TypeEnv, TypeError,
    Value,
};
use crate::turing::{ExtendedTM, Letter, LetterId, TmConfig, TmParseError};

mod codegen;
mod lower;

pub use lower::{lower, Ir};

pub const BIT0: &str = "b0";
pub const BIT1: &str = "b1";
pub const MARK_DN: &str = "mark_dn";
pub const MARK_UP: &str = "mark_up";
pub const MARK_POS: &str = "mark_pos";

pub fn zone_open(var: &str) -> String {
    format!("zl_{var}")
}

pub fn zone_close(var: &str) -> String {
    format!("zr_{var}")
}

pub fn dim_open(k: usize) -> String {
    format!("dl_{k}")
}

pub fn dim_close(k: usize) -> String {
    format!("dr_{k}")
}

/// Letter for a symbol value: the symbol itself when it is plain
/// alphanumeric and not a bit, otherwise an escaped form behind `s_`.
pub fn sym_letter(sym: &str) -> String {
    let plain = !sym.is_empty() && sym.bytes().all(|b| b.is_ascii_alphanumeric());
    if plain && sym != BIT0 && sym != BIT1 {
        sym.to_string()
    } else {
        format!("s_{}", mangle(sym))
    }
}

fn unmangle(s: &str) -> Option<String> {
    let b = s.as_bytes();
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'_' {
            let hex = s.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(b[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

fn letter_sym(l: &str) -> Option<String> {
    match l.strip_prefix("s_") {
        Some(rest) => unmangle(rest),
        None if !l.is_empty()
            && l.bytes().all(|b| b.is_ascii_alphanumeric())
            && l != BIT0
            && l != BIT1 =>
        {
            Some(l.to_string())
        }
        None => None,
    }
}

fn nat_bits(mut n: u64) -> Vec<bool> {
    let mut bits = vec![n & 1 == 1];
    n >>= 1;
    while n > 0 {
        bits.push(n & 1 == 1);
        n >>= 1;
    }
    bits
}

/// Tape representation of a value.
pub fn rep(v: &SimperValue) -> Vec<Letter> {
    fn go(v: &SimperValue, out: &mut Vec<Letter>) {
        match v {
            SimperValue::Nat(n) => out.extend(
                nat_bits(*n)
                    .into_iter()
                    .map(|b| Letter::new(if b { BIT1 } else { BIT0 })),
            ),
            SimperValue::Sym(s) => out.push(Letter::new(sym_letter(s))),
            SimperValue::Array { dims, elems } => nest(dims, elems, out),
        }
    }
    fn nest(dims: &[usize], elems: &[SimperValue], out: &mut Vec<Letter>) {
        let Some((&d, rest)) = dims.split_first() else {
            return go(&elems[0], out);
        };
        let stride: usize = rest.iter().product();
        let level = rest.len();
        for i in 0..d {
            out.push(Letter::new(dim_open(level)));
            nest(rest, &elems[i * stride..(i + 1) * stride], out);
            out.push(Letter::new(dim_close(level)));
        }
    }
    let mut out = Vec::new();
    go(v, &mut out);
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("malformed {ty} at letter {at}: {msg}")]
    Malformed { ty: String, at: usize, msg: String },
}

/// Inverse of [`rep`] at a known type.
///
/// Extents are read off the groups, so an array whose outer extent is zero
/// decodes with zero inner extents too.
pub fn decode_rep(letters: &[Letter], t: &SimperType) -> Result<SimperValue, DecodeError> {
    let names: Vec<&str> = letters.iter().map(Letter::as_str).collect();
    let err = |at: usize, msg: &str| DecodeError::Malformed {
        ty: t.to_string(),
        at,
        msg: msg.to_string(),
    };
    let scalar = |ls: &[&str], base: usize, t: &SimperType| -> Result<SimperValue, DecodeError> {
        match t {
            SimperType::Nat => {
                if ls.is_empty() || ls.len() > 64 {
                    return Err(err(base, "bad number width"));
                }
                let mut n = 0u64;
                for (i, l) in ls.iter().enumerate() {
                    match *l {
                        BIT0 => {}
                        BIT1 => n |= 1 << i,
                        _ => return Err(err(base + i, "expected a bit")),
                    }
                }
                if ls.len() > 1 && ls[ls.len() - 1] == BIT0 {
                    return Err(err(base + ls.len() - 1, "trailing zero"));
                }
                Ok(SimperValue::Nat(n))
            }
            SimperType::Sym => match ls {
                [l] => letter_sym(l)
                    .map(SimperValue::Sym)
                    .ok_or_else(|| err(base, "not a symbol letter")),
                _ => Err(err(base, "a symbol is one letter")),
            },
            _ => Err(err(base, "arrays hold scalars")),
        }
    };
    match t {
        SimperType::Array(k, elem) => {
            // Split a run of groups at `level` into their contents.
            fn groups(ls: &[&str], base: usize, level: usize) -> Option<Vec<(usize, usize)>> {
                let (open, close) = (dim_open(level), dim_close(level));
                let mut out = Vec::new();
                let mut i = 0;
                while i < ls.len() {
                    if ls[i] != open {
                        return None;
                    }
                    let end = (i + 1..ls.len()).find(|&j| ls[j] == close)?;
                    out.push((base + i + 1, base + end));
                    i = end + 1;
                }
                Some(out)
            }
            let k = *k as usize;
            let mut spans = vec![(0, names.len())];
            let mut dims = Vec::with_capacity(k);
            for level in (0..k).rev() {
                let mut next = Vec::new();
                let mut extent = None;
                for &(a, b) in &spans {
                    let g = groups(&names[a..b], a, level)
                        .ok_or_else(|| err(a, "bad group structure"))?;
                    if *extent.get_or_insert(g.len()) != g.len() {
                        return Err(err(a, "ragged array"));
                    }
                    next.extend(g);
                }
                dims.push(extent.unwrap_or(0));
                spans = next;
            }
            let elems = spans
                .iter()
                .map(|&(a, b)| scalar(&names[a..b], a, elem))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SimperValue::Array { dims, elems })
        }
        _ => scalar(&names, 0, t),
    }
}

struct Hoist {
    next_aux: usize,
    next_label: usize,
}

impl Hoist {
    fn aux(&mut self) -> String {
        self.next_aux += 1;
        format!("$n{}", self.next_aux - 1)
    }

    fn label(&mut self) -> String {
        self.next_label += 1;
        format!("$p{}", self.next_label - 1)
    }

    /// Rewrites every index inside `v` into a variable, emitting the
    /// assignments that compute them into `pre`.
    fn value(&mut self, v: &Value, pre: &mut Vec<Stmt>) -> Value {
        match v {
            Value::Index(a, ix) => Value::Index(a.clone(), self.indices(ix, pre)),
            Value::Array(dims, fill) => Value::Array(
                dims.iter().map(|d| self.value(d, pre)).collect(),
                Box::new(self.value(fill, pre)),
            ),
            other => other.clone(),
        }
    }

    fn indices(&mut self, ix: &[Value], pre: &mut Vec<Stmt>) -> Vec<Value> {
        ix.iter()
            .map(|e| match e {
                Value::Var(_) => e.clone(),
                _ => {
                    let inner = self.value(e, pre);
                    let x = self.aux();
                    pre.push(Stmt::Assign(LValue::var(&x), inner));
                    Value::Var(x)
                }
            })
            .collect()
    }

    fn lvalue(&mut self, l: &LValue, pre: &mut Vec<Stmt>) -> LValue {
        LValue {
            name: l.name.clone(),
            indices: self.indices(&l.indices, pre),
        }
    }

    fn cond(&mut self, c: &Cond, pre: &mut Vec<Stmt>) -> Cond {
        match c {
            Cond::And(a, b) => Cond::and(self.cond(a, pre), self.cond(b, pre)),
            Cond::Or(a, b) => Cond::or(self.cond(a, pre), self.cond(b, pre)),
            Cond::Eq(x, y) => Cond::Eq(self.value(x, pre), self.value(y, pre)),
            Cond::Neq(x, y) => Cond::Neq(self.value(x, pre), self.value(y, pre)),
        }
    }

    /// Conditional jumps that evaluate `c` atom by atom, each atom preceded
    /// by its own hoisted assignments, so short-circuiting still guards them.
    fn jumps(&mut self, c: &Cond, yes: &str, no: &str, out: &mut Vec<Stmt>) {
        match c {
            Cond::And(a, b) => {
                let mid = self.label();
                self.jumps(a, &mid, no, out);
                out.push(Stmt::Label(mid));
                self.jumps(b, yes, no, out);
            }
            Cond::Or(a, b) => {
                let mid = self.label();
                self.jumps(a, yes, &mid, out);
                out.push(Stmt::Label(mid));
                self.jumps(b, yes, no, out);
            }
            atom => {
                self.next_aux = 0;
                let atom = self.cond(atom, out);
                out.push(Stmt::If(atom, vec![Stmt::Goto(yes.to_string())], None));
                out.push(Stmt::Goto(no.to_string()));
            }
        }
    }

    fn block(&mut self, body: &[Stmt]) -> Vec<Stmt> {
        let mut out = Vec::with_capacity(body.len());
        for s in body {
            self.next_aux = 0;
            match s {
                Stmt::Assign(l, v) => {
                    let v = self.value(v, &mut out);
                    let l = self.lvalue(l, &mut out);
                    out.push(Stmt::Assign(l, v));
                }
                Stmt::Inc(l) => {
                    let l = self.lvalue(l, &mut out);
                    out.push(Stmt::Inc(l));
                }
                Stmt::Dec(l) => {
                    let l = self.lvalue(l, &mut out);
                    out.push(Stmt::Dec(l));
                }
                Stmt::If(c, t, e) => {
                    let mut pre = Vec::new();
                    let hoisted = self.cond(c, &mut pre);
                    let atoms = c.values().len() / 2;
                    let t = self.block(t);
                    let e = e.as_ref().map(|e| self.block(e));
                    if pre.is_empty() || atoms == 1 {
                        out.extend(pre);
                        out.push(Stmt::If(hoisted, t, e));
                    } else {
                        let (yes, no, end) = (self.label(), self.label(), self.label());
                        self.jumps(c, &yes, &no, &mut out);
                        out.push(Stmt::Label(yes));
                        out.extend(t);
                        out.push(Stmt::Goto(end.clone()));
                        out.push(Stmt::Label(no));
                        out.extend(e.unwrap_or_default());
                        out.push(Stmt::Label(end));
                    }
                }
                Stmt::While(c, b) => out.push(Stmt::While(c.clone(), self.block(b))),
                Stmt::Switch(v, arms) => out.push(Stmt::Switch(
                    v.clone(),
                    arms.iter()
                        .map(|(a, b)| (a.clone(), self.block(b)))
                        .collect(),
                )),
                other => out.push(other.clone()),
            }
        }
        out
    }
}

/// Replaces every index expression that is not a plain variable by a fresh
/// `$n` auxiliary assigned just before its use, innermost first. Conditions
/// whose later atoms need such assignments are unfolded into jumps so that
/// short-circuit evaluation still guards them.
pub fn preprocess_array_accesses(p: &Program) -> Program {
    Program {
        body: Hoist {
            next_aux: 0,
            next_label: 0,
        }
        .block(&p.body),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

/// Tape zones in order, with the type each zone holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub zones: Vec<(String, SimperType)>,
    pub syms: Vec<String>,
    pub max_dim: usize,
}

impl Layout {
    pub fn zone(&self, var: &str) -> Option<usize> {
        self.zones.iter().position(|(x, _)| x == var)
    }

    /// Letters in alphabet order: bits, symbols, zone markers, dimension
    /// markers, cursors.
    pub fn alphabet(&self) -> Vec<Letter> {
        let mut out = vec![Letter::new(BIT0), Letter::new(BIT1)];
        out.extend(self.syms.iter().map(|s| Letter::new(sym_letter(s))));
        for (x, _) in &self.zones {
            out.push(Letter::new(zone_open(x)));
            out.push(Letter::new(zone_close(x)));
        }
        for k in 0..self.max_dim {
            out.push(Letter::new(dim_open(k)));
            out.push(Letter::new(dim_close(k)));
        }
        out.extend([MARK_DN, MARK_UP, MARK_POS].map(Letter::new));
        out
    }
}

/// A compiled program with its tape layout.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub tm: ExtendedTM,
    pub layout: Layout,
    pub env: TypeEnv,
}

impl Compiled {
    /// Letters for a word; every symbol must occur in the program.
    pub fn encode_input<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<LetterId>, TmParseError> {
        let names: Vec<String> = word.iter().map(|s| sym_letter(s.as_ref())).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.tm.word(&refs)
    }

    /// Splits a tape into its zones; fails unless the tape is exactly the
    /// expected zone sequence, allowing cursor marks inside zones.
    pub fn zones_of(&self, cfg: &TmConfig) -> Result<Vec<Vec<Letter>>, String> {
        let m = &self.tm;
        let mut cells: Vec<&str> = cfg.left.iter().map(|&l| m.letter(l).as_str()).collect();
        if let crate::turing::Cell::Letter(l) = cfg.current {
            cells.push(m.letter(l).as_str());
        }
        cells.extend(cfg.right_rev.iter().rev().map(|&l| m.letter(l).as_str()));
        let mut out = Vec::new();
        if self.layout.zones.is_empty() {
            return Ok(out);
        }
        let mut i = 0;
        for (x, _) in &self.layout.zones {
            let (open, close) = (zone_open(x), zone_close(x));
            if cells.get(i) != Some(&open.as_str()) {
                return Err(format!("expected {open} at cell {i}"));
            }
            let end = (i + 1..cells.len())
                .find(|&j| cells[j] == close)
                .ok_or(format!("{close} missing"))?;
            let inner: Vec<Letter> = cells[i + 1..end]
                .iter()
                .filter(|c| ![MARK_DN, MARK_UP, MARK_POS].contains(c))
                .map(|c| Letter::new(*c))
                .collect();
            if inner
                .iter()
                .any(|l| l.as_str().starts_with("zl_") || l.as_str().starts_with("zr_"))
            {
                return Err(format!("zone {x} overlaps another"));
            }
            out.push(inner);
            i = end + 1;
        }
        if i != cells.len() {
            return Err(format!(
                "{} stray cells after the last zone",
                cells.len() - i
            ));
        }
        Ok(out)
    }

    /// Values of all assigned zones on a tape.
    pub fn decode_tape(&self, cfg: &TmConfig) -> Result<HashMap<String, SimperValue>, String> {
        let zones = self.zones_of(cfg)?;
        let mut out = HashMap::new();
        for ((x, t), z) in self.layout.zones.iter().zip(zones) {
            if z.is_empty() && t.is_scalar() {
                continue;
            }
            out.insert(
                x.clone(),
                decode_rep(&z, t).map_err(|e| format!("{x}: {e}"))?,
            );
        }
        Ok(out)
    }
}

/// Front end shared by [`compile`] and [`compile_full`].
fn prepare(p: &Program) -> Result<(Program, TypeEnv), CompileError> {
    let core = if p.is_core() { p.clone() } else { desugar(p) };
    let env = typecheck(&core)?;
    let pre = preprocess_array_accesses(&core);
    Ok((pre, env))
}

pub fn compile_full(p: &Program) -> Result<Compiled, CompileError> {
    compile_for(p, &[] as &[&str])
}

/// Like [`compile_full`], with extra input symbols the program never names.
pub fn compile_for<S: AsRef<str>>(p: &Program, inputs: &[S]) -> Result<Compiled, CompileError> {
    let (pre, env) = prepare(p)?;
    let ir = lower(&pre, &env)?;
    let mut layout = lower::layout(&ir, &env, &pre);
    if ir
        .iter()
        .all(|i| matches!(i, Ir::Label(_) | Ir::Jump(_) | Ir::Halt))
    {
        layout.zones.clear();
    }
    for s in inputs {
        if !layout.syms.iter().any(|x| x == s.as_ref()) {
            layout.syms.push(s.as_ref().to_string());
        }
    }
    let tm = codegen::generate(&ir, &layout);
    Ok(Compiled { tm, layout, env })
}

/// Desugars if needed, type checks, hoists indices, lowers and assembles.
pub fn compile(p: &Program) -> Result<ExtendedTM, CompileError> {
    compile_full(p).map(|c| c.tm)
}

#[cfg(test)]
mod tests;
