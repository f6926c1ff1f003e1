use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::{head, Cond, LValue, Program, Stmt, Value, INPUT, LEN};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SimperType {
    Nat,
    Sym,
    Bool,
    Array(u32, Box<SimperType>),
}

impl SimperType {
    pub fn array(dim: u32, elem: SimperType) -> Self {
        SimperType::Array(dim, Box::new(elem))
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, SimperType::Nat | SimperType::Sym)
    }
}

impl fmt::Display for SimperType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimperType::Nat => f.write_str("nat"),
            SimperType::Sym => f.write_str("sym"),
            SimperType::Bool => f.write_str("bool"),
            SimperType::Array(n, t) => write!(f, "array {n} {t}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("in `{at}`: {rule} rule needs {expected}, found {found}")]
    Mismatch {
        rule: &'static str,
        at: String,
        expected: String,
        found: String,
    },
    #[error("variable `{0}` is used but never assigned")]
    Unassigned(String),
    #[error("in `{at}`: `{name}` is read-only")]
    ReadOnly { name: String, at: String },
    #[error("`goto {0}` has no matching label")]
    UnknownLabel(String),
    #[error("in `{at}`: equality is only defined on nat and sym, found {found}")]
    NonScalarEquality { at: String, found: String },
    #[error("in `{at}`: array elements must be nat or sym, found {found}")]
    NestedArray { at: String, found: String },
    #[error("the type of `{0}` is never determined")]
    Unresolved(String),
}

/// One type per variable, built-ins included.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    pub vars: BTreeMap<String, SimperType>,
}

impl TypeEnv {
    pub fn get(&self, name: &str) -> Option<&SimperType> {
        self.vars.get(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Nat,
    Sym,
    Array(u32, Box<Ty>),
    Meta(usize),
}

struct Checker {
    subst: Vec<Option<Ty>>,
    vars: BTreeMap<String, usize>,
    /// Types that must end up nat or sym, with the rule that demands it.
    scalar: Vec<(Ty, String, bool)>,
}

impl Checker {
    fn fresh(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Meta(self.subst.len() - 1)
    }

    fn var(&mut self, name: &str) -> Ty {
        if let Some(&m) = self.vars.get(name) {
            return Ty::Meta(m);
        }
        let t = self.fresh();
        let Ty::Meta(m) = t else { unreachable!() };
        self.vars.insert(name.to_string(), m);
        t
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match t {
            Ty::Meta(m) => match &self.subst[*m] {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            Ty::Array(n, e) => Ty::Array(*n, Box::new(self.resolve(e))),
            _ => t.clone(),
        }
    }

    fn occurs(&self, m: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Meta(k) => k == m,
            Ty::Array(_, e) => self.occurs(m, &e),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty, rule: &'static str, at: &str) -> Result<(), TypeError> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        let mismatch = |c: &Checker| TypeError::Mismatch {
            rule,
            at: at.to_string(),
            expected: c.show(&a),
            found: c.show(&b),
        };
        match (&a, &b) {
            (Ty::Meta(x), Ty::Meta(y)) if x == y => Ok(()),
            (Ty::Meta(x), t) | (t, Ty::Meta(x)) => {
                if self.occurs(*x, t) {
                    return Err(mismatch(self));
                }
                self.subst[*x] = Some(t.clone());
                Ok(())
            }
            (Ty::Nat, Ty::Nat) | (Ty::Sym, Ty::Sym) => Ok(()),
            (Ty::Array(n, e), Ty::Array(k, f)) if n == k => self.unify(e, f, rule, at),
            _ => Err(mismatch(self)),
        }
    }

    fn show(&self, t: &Ty) -> String {
        match self.resolve(t) {
            Ty::Nat => "nat".into(),
            Ty::Sym => "sym".into(),
            Ty::Array(n, e) => format!("array {n} {}", self.show(&e)),
            Ty::Meta(_) => "an unknown type".into(),
        }
    }

    fn index(&mut self, name: &str, ix: &[Value], at: &str) -> Result<Ty, TypeError> {
        for v in ix {
            let t = self.value(v, at)?;
            self.unify(&Ty::Nat, &t, "index", at)?;
        }
        let elem = self.fresh();
        let arr = self.var(name);
        self.unify(
            &Ty::Array(ix.len() as u32, Box::new(elem.clone())),
            &arr,
            "index",
            at,
        )?;
        Ok(elem)
    }

    fn value(&mut self, v: &Value, at: &str) -> Result<Ty, TypeError> {
        match v {
            Value::Var(x) => Ok(self.var(x)),
            Value::Index(x, ix) => self.index(x, ix, at),
            Value::Nat(_) => Ok(Ty::Nat),
            Value::Sym(_) => Ok(Ty::Sym),
            Value::Array(dims, fill) => {
                for d in dims {
                    let t = self.value(d, at)?;
                    self.unify(&Ty::Nat, &t, "array literal", at)?;
                }
                let t = self.value(fill, at)?;
                self.scalar.push((t.clone(), at.to_string(), false));
                Ok(Ty::Array(dims.len() as u32, Box::new(t)))
            }
        }
    }

    fn lvalue(&mut self, l: &LValue, at: &str) -> Result<Ty, TypeError> {
        if l.name == INPUT || l.name == LEN {
            return Err(TypeError::ReadOnly {
                name: l.name.clone(),
                at: at.to_string(),
            });
        }
        if l.indices.is_empty() {
            Ok(self.var(&l.name))
        } else {
            self.index(&l.name, &l.indices, at)
        }
    }

    fn cond(&mut self, c: &Cond, at: &str) -> Result<(), TypeError> {
        match c {
            Cond::And(a, b) | Cond::Or(a, b) => {
                self.cond(a, at)?;
                self.cond(b, at)
            }
            Cond::Eq(x, y) | Cond::Neq(x, y) => {
                let (tx, ty) = (self.value(x, at)?, self.value(y, at)?);
                self.unify(&tx, &ty, "equality", at)?;
                self.scalar.push((tx, at.to_string(), true));
                Ok(())
            }
        }
    }

    fn stmts(&mut self, body: &[Stmt]) -> Result<(), TypeError> {
        for s in body {
            let at = head(s);
            match s {
                Stmt::Label(_) | Stmt::Goto(_) | Stmt::Halt => {}
                Stmt::Assign(l, v) => {
                    let tl = self.lvalue(l, &at)?;
                    let tv = self.value(v, &at)?;
                    self.unify(&tl, &tv, "assignment", &at)?;
                }
                Stmt::Inc(l) | Stmt::Dec(l) => {
                    let rule = if matches!(s, Stmt::Inc(_)) {
                        "increment"
                    } else {
                        "decrement"
                    };
                    let t = self.lvalue(l, &at)?;
                    self.unify(&Ty::Nat, &t, rule, &at)?;
                }
                Stmt::If(c, t, e) => {
                    self.cond(c, &at)?;
                    self.stmts(t)?;
                    if let Some(e) = e {
                        self.stmts(e)?;
                    }
                }
                Stmt::While(c, b) => {
                    self.cond(c, &at)?;
                    self.stmts(b)?;
                }
                Stmt::Switch(v, arms) => {
                    let tv = self.value(v, &at)?;
                    self.scalar.push((tv.clone(), at.clone(), true));
                    for (a, b) in arms {
                        let ta = self.value(a, &at)?;
                        self.unify(&tv, &ta, "switch", &at)?;
                        self.stmts(b)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(&self, t: &Ty) -> Option<SimperType> {
        match self.resolve(t) {
            Ty::Nat => Some(SimperType::Nat),
            Ty::Sym => Some(SimperType::Sym),
            Ty::Array(n, e) => Some(SimperType::array(n, self.finish(&e)?)),
            Ty::Meta(_) => None,
        }
    }
}

/// Infers one type per variable and checks every statement against it.
pub fn typecheck(p: &Program) -> Result<TypeEnv, TypeError> {
    let mut ck = Checker {
        subst: Vec::new(),
        vars: BTreeMap::new(),
        scalar: Vec::new(),
    };
    let input = ck.var(INPUT);
    ck.unify(&input, &Ty::Array(1, Box::new(Ty::Sym)), "built-in", INPUT)?;
    let len = ck.var(LEN);
    ck.unify(&len, &Ty::Nat, "built-in", LEN)?;
    ck.stmts(&p.body)?;

    let mut labels = HashSet::new();
    let mut assigned: HashSet<&str> = [INPUT, LEN].into_iter().collect();
    for s in p.walk() {
        match s {
            Stmt::Label(l) => {
                labels.insert(l.as_str());
            }
            Stmt::Assign(l, _) => {
                assigned.insert(l.name.as_str());
            }
            _ => {}
        }
    }
    for s in p.walk() {
        if let Stmt::Goto(l) = s {
            if !labels.contains(l.as_str()) {
                return Err(TypeError::UnknownLabel(l.clone()));
            }
        }
    }
    if let Some(x) = ck.vars.keys().find(|x| !assigned.contains(x.as_str())) {
        return Err(TypeError::Unassigned(x.clone()));
    }

    for (t, at, equality) in &ck.scalar {
        match ck.finish(t) {
            Some(t) if t.is_scalar() => {}
            Some(t) if *equality => {
                return Err(TypeError::NonScalarEquality {
                    at: at.clone(),
                    found: t.to_string(),
                })
            }
            Some(t) => {
                return Err(TypeError::NestedArray {
                    at: at.clone(),
                    found: t.to_string(),
                })
            }
            None => {}
        }
    }
    let mut env = TypeEnv::default();
    for (x, &m) in &ck.vars {
        let t = ck
            .finish(&Ty::Meta(m))
            .ok_or_else(|| TypeError::Unresolved(x.clone()))?;
        env.vars.insert(x.clone(), t);
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simper::fixtures::SPECIALIZED;
    use crate::simper::parse_simper;

    fn check(src: &str) -> Result<TypeEnv, TypeError> {
        typecheck(&parse_simper(src).unwrap())
    }

    #[test]
    fn specialized_parser_types() {
        let env = check(SPECIALIZED).unwrap();
        for x in ["i", "a", "b", "c", "d", "n"] {
            assert_eq!(env.get(x), Some(&SimperType::Nat), "{x}");
        }
        assert_eq!(
            env.get("input"),
            Some(&SimperType::array(1, SimperType::Sym))
        );
    }

    #[test]
    fn three_dimensional_table() {
        let env = check(
            "sn := n ++sn T := array[sn,sn,15](0) i := 0 T[i,i,3] := 1 if T[0,n,0] == 1 { halt }",
        )
        .unwrap();
        assert_eq!(env.get("T"), Some(&SimperType::array(3, SimperType::Nat)));
    }

    #[test]
    fn increment_needs_nat() {
        let e = check("x := \"a\" ++x").unwrap_err();
        assert!(
            matches!(
                e,
                TypeError::Mismatch {
                    rule: "increment",
                    ..
                }
            ),
            "{e}"
        );
        let e = check("x := \"a\" --x").unwrap_err();
        assert!(
            matches!(
                e,
                TypeError::Mismatch {
                    rule: "decrement",
                    ..
                }
            ),
            "{e}"
        );
    }

    #[test]
    fn assignment_types_must_agree() {
        let e = check("x := 0 x := \"a\"").unwrap_err();
        assert!(
            matches!(
                e,
                TypeError::Mismatch {
                    rule: "assignment",
                    ..
                }
            ),
            "{e}"
        );
    }

    #[test]
    fn use_before_any_assignment() {
        assert_eq!(
            check("if y == 0 { halt }").unwrap_err(),
            TypeError::Unassigned("y".into())
        );
        assert_eq!(check("++z").unwrap_err(), TypeError::Unassigned("z".into()));
    }

    #[test]
    fn builtins_are_read_only() {
        assert!(matches!(
            check("n := 3").unwrap_err(),
            TypeError::ReadOnly { .. }
        ));
        assert!(matches!(
            check("input[0] := \"a\"").unwrap_err(),
            TypeError::ReadOnly { .. }
        ));
        assert!(matches!(
            check("++n").unwrap_err(),
            TypeError::ReadOnly { .. }
        ));
    }

    #[test]
    fn condition_operands_agree() {
        let e = check("x := 0 if x == \"a\" { halt }").unwrap_err();
        assert!(
            matches!(
                e,
                TypeError::Mismatch {
                    rule: "equality",
                    ..
                }
            ),
            "{e}"
        );
    }

    #[test]
    fn array_equality_rejected() {
        let e = check("x := array[2](0) y := x if x == y { halt }").unwrap_err();
        assert!(matches!(e, TypeError::NonScalarEquality { .. }), "{e}");
    }

    #[test]
    fn nested_arrays_rejected() {
        let e = check("x := array[2](array[2](0))").unwrap_err();
        assert!(matches!(e, TypeError::NestedArray { .. }), "{e}");
    }

    #[test]
    fn indices_are_nat() {
        let e = check("x := array[2](0) y := x[\"a\"]").unwrap_err();
        assert!(
            matches!(e, TypeError::Mismatch { rule: "index", .. }),
            "{e}"
        );
        let e = check("x := array[2](0) y := x[0,0]").unwrap_err();
        assert!(
            matches!(e, TypeError::Mismatch { rule: "index", .. }),
            "{e}"
        );
    }

    #[test]
    fn switch_arms_share_the_scrutinee_type() {
        assert!(check("switch input[0] { \"a\" { halt } }").is_ok());
        let e = check("switch input[0] { 1 { halt } }").unwrap_err();
        assert!(
            matches!(e, TypeError::Mismatch { rule: "switch", .. }),
            "{e}"
        );
    }

    #[test]
    fn unknown_label() {
        assert_eq!(
            check("goto nowhere").unwrap_err(),
            TypeError::UnknownLabel("nowhere".into())
        );
    }

    #[test]
    fn occurs_check() {
        assert!(check("x := array[1](0) x := array[1](x)").is_err());
    }

    #[test]
    fn copy_chain_resolves() {
        let env = check("x := y y := z z := 3").unwrap();
        assert_eq!(env.get("x"), Some(&SimperType::Nat));
    }

    #[test]
    fn unresolved_type() {
        assert_eq!(
            check("x := y y := x").unwrap_err(),
            TypeError::Unresolved("x".into())
        );
    }
}
