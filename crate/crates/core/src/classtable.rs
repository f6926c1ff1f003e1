//! Class tables restricted to arity-1 classes over the single arity-0 class `Z`,
//! with every type argument in contravariant position.
//!
//! A rule `C x <: D1 ... Dk x` rewrites the head class `C` of a tower into
//! `D1` and pushes `D2 ... Dk` in front of the remaining tower. A rule ending
//! in `Z` instead of `x` discards the remaining tower.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Name of the unique arity-0 class.
pub const Z: &str = "Z";

/// Interned class. Id 0 is always `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u32);

impl ClassId {
    pub const Z: ClassId = ClassId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// `C x <: D1 ... Dk x`
    Var,
    /// `C x <: D1 ... Dk Z`
    Ground,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InheritanceRule {
    pub lhs: ClassId,
    pub rhs: Vec<ClassId>,
    pub tail: Tail,
}

impl InheritanceRule {
    /// The class the rule rewrites the head into; `Z` for `C x <: Z`.
    pub fn head(&self) -> ClassId {
        self.rhs.first().copied().unwrap_or(ClassId::Z)
    }
}

/// A tower `C1 C2 ... Cm Z`. Only the arity-1 part is stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TypeTower {
    pub classes: Vec<String>,
}

impl TypeTower {
    pub fn z() -> Self {
        TypeTower {
            classes: Vec::new(),
        }
    }

    pub fn new<I, S>(classes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TypeTower {
            classes: classes.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses `C1 C2 ... Z`. The trailing `Z` is mandatory and must be the only `Z`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.split_last() {
            Some((&last, init)) if last == Z => {
                let mut classes = Vec::with_capacity(init.len());
                for (i, w) in init.iter().enumerate() {
                    if *w == Z {
                        return Err(ParseError::syntax(1, i + 1, "Z may only terminate a tower"));
                    }
                    check_class_name(w).map_err(|m| ParseError::syntax(1, i + 1, m))?;
                    classes.push((*w).to_string());
                }
                Ok(TypeTower { classes })
            }
            _ => Err(ParseError::syntax(1, 1, "a tower must end in Z")),
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_z(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_z()
    }
}

impl fmt::Display for TypeTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.classes {
            write!(f, "{c} ")?;
        }
        f.write_str(Z)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtypeQuery {
    pub subtype: TypeTower,
    pub supertype: TypeTower,
}

impl SubtypeQuery {
    /// Parses two towers, e.g. `Qr E E Z  L N L N E E Z`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let Some(split) = words.iter().position(|w| *w == Z) else {
            return Err(ParseError::syntax(
                1,
                1,
                "query needs two towers ending in Z",
            ));
        };
        let sub = TypeTower::parse(&words[..=split].join(" "))?;
        let sup = TypeTower::parse(&words[split + 1..].join(" "))?;
        Ok(SubtypeQuery {
            subtype: sub,
            supertype: sup,
        })
    }
}

impl fmt::Display for SubtypeQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  <:  {}", self.subtype, self.supertype)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: second rule for arc {lhs} -> {head}")]
    DuplicateArc {
        line: usize,
        lhs: String,
        head: String,
    },
    #[error("line {line}: rule `{lhs} x <: x` is a trivial cycle")]
    TrivialCycle { line: usize, lhs: String },
}

impl ParseError {
    fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}

fn check_class_name(name: &str) -> Result<(), String> {
    let mut chars = name.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(format!("invalid class name `{name}`"));
    }
    if name == "x" {
        return Err("`x` is reserved for the type variable".into());
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ClassTable {
    names: Vec<String>,
    index: HashMap<String, ClassId>,
    rules: Vec<InheritanceRule>,
}

impl Default for ClassTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for ClassTable {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.rules == other.rules
    }
}

impl Eq for ClassTable {}

impl ClassTable {
    pub fn new() -> Self {
        let mut index = HashMap::new();
        index.insert(Z.to_string(), ClassId::Z);
        ClassTable {
            names: vec![Z.to_string()],
            index,
            rules: Vec::new(),
        }
    }

    /// Registers `name` (if new) and returns its id.
    pub fn intern(&mut self, name: &str) -> ClassId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = ClassId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<ClassId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: ClassId) -> &str {
        &self.names[id.index()]
    }

    /// Number of interned ids, including `Z`.
    pub fn id_count(&self) -> usize {
        self.names.len()
    }

    /// Arity-1 classes in registration order.
    pub fn classes(&self) -> impl Iterator<Item = (ClassId, &str)> {
        self.names
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, n)| (ClassId(i as u32), n.as_str()))
    }

    pub fn class_count(&self) -> usize {
        self.names.len() - 1
    }

    pub fn rules(&self) -> &[InheritanceRule] {
        &self.rules
    }

    /// Appends a rule, enforcing the single-arc and non-trivial invariants.
    pub fn push_rule(&mut self, rule: InheritanceRule) -> Result<(), ParseError> {
        self.push_rule_at(rule, 0)
    }

    fn push_rule_at(&mut self, rule: InheritanceRule, line: usize) -> Result<(), ParseError> {
        if rule.tail == Tail::Var && rule.rhs.is_empty() {
            return Err(ParseError::TrivialCycle {
                line,
                lhs: self.name(rule.lhs).to_string(),
            });
        }
        let head = rule.head();
        if self
            .rules
            .iter()
            .any(|r| r.lhs == rule.lhs && r.head() == head)
        {
            return Err(ParseError::DuplicateArc {
                line,
                lhs: self.name(rule.lhs).to_string(),
                head: self.name(head).to_string(),
            });
        }
        self.rules.push(rule);
        Ok(())
    }

    /// Appends a rule without the duplicate-arc scan. Callers guarantee the invariant.
    pub(crate) fn push_rule_unchecked(&mut self, rule: InheritanceRule) {
        debug_assert!(!(rule.tail == Tail::Var && rule.rhs.is_empty()));
        self.rules.push(rule);
    }

    /// Convenience used by generators and tests: `rule("Ql", &["L","N","Ql","L","N"], Tail::Var)`.
    pub fn add_rule(&mut self, lhs: &str, rhs: &[&str], tail: Tail) -> Result<(), ParseError> {
        let known = self.names.len();
        let lhs = self.intern(lhs);
        let rhs = rhs.iter().map(|c| self.intern(c)).collect();
        let pushed = self.push_rule(InheritanceRule { lhs, rhs, tail });
        if pushed.is_err() {
            // A refused rule leaves no classes behind.
            for name in self.names.drain(known..) {
                self.index.remove(&name);
            }
        }
        pushed
    }

    pub fn tower_ids(&mut self, tower: &TypeTower) -> Vec<ClassId> {
        tower.classes.iter().map(|c| self.intern(c)).collect()
    }

    pub fn tower_from_ids(&self, ids: &[ClassId]) -> TypeTower {
        TypeTower {
            classes: ids.iter().map(|&c| self.name(c).to_string()).collect(),
        }
    }

    pub fn render_rule(&self, rule: &InheritanceRule) -> String {
        let mut s = format!("{} x <:", self.name(rule.lhs));
        for &c in &rule.rhs {
            s.push(' ');
            s.push_str(self.name(c));
        }
        s.push_str(match rule.tail {
            Tail::Var => " x",
            Tail::Ground => " Z",
        });
        s
    }
}

pub fn parse_class_table(text: &str) -> Result<ClassTable, ParseError> {
    let mut ct = ClassTable::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let words: Vec<(usize, &str)> = word_columns(body);
        let col = |i: usize| words.get(i).map(|w| w.0).unwrap_or(body.len() + 1);
        if words.len() < 4 {
            return Err(ParseError::syntax(
                line,
                col(0),
                "expected `C x <: ... x` or `C x <: ... Z`",
            ));
        }
        let lhs = words[0].1;
        check_class_name(lhs).map_err(|m| ParseError::syntax(line, col(0), m))?;
        if lhs == Z {
            return Err(ParseError::syntax(
                line,
                col(0),
                "Z has arity 0 and cannot head a rule",
            ));
        }
        if words[1].1 != "x" {
            return Err(ParseError::syntax(
                line,
                col(1),
                "expected type variable `x`",
            ));
        }
        if words[2].1 != "<:" {
            return Err(ParseError::syntax(line, col(2), "expected `<:`"));
        }
        let (last_col, last) = words[words.len() - 1];
        let tail = match last {
            "x" => Tail::Var,
            Z => Tail::Ground,
            _ => {
                return Err(ParseError::syntax(
                    line,
                    last_col,
                    "rule must end in `x` or `Z`",
                ))
            }
        };
        let mut rhs_names = Vec::new();
        for &(c, w) in &words[3..words.len() - 1] {
            if w == Z || w == "x" {
                return Err(ParseError::syntax(
                    line,
                    c,
                    format!("`{w}` may only end a rule"),
                ));
            }
            check_class_name(w).map_err(|m| ParseError::syntax(line, c, m))?;
            rhs_names.push(w);
        }
        let lhs = ct.intern(lhs);
        let rhs = rhs_names.iter().map(|w| ct.intern(w)).collect();
        ct.push_rule_at(InheritanceRule { lhs, rhs, tail }, line)?;
    }
    Ok(ct)
}

fn word_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn serialize_class_table(ct: &ClassTable) -> String {
    let mut out = String::new();
    for r in &ct.rules {
        out.push_str(&ct.render_rule(r));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub well_formed: bool,
    pub deterministic: bool,
    pub acyclic: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    fn ok() -> Self {
        ValidationReport {
            well_formed: true,
            deterministic: true,
            acyclic: true,
            diagnostics: vec![],
        }
    }

    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn merge(mut self, other: ValidationReport) -> Self {
        self.well_formed &= other.well_formed;
        self.deterministic &= other.deterministic;
        self.acyclic &= other.acyclic;
        self.diagnostics.extend(other.diagnostics);
        self
    }
}

/// Every `Var`-tailed rule must have an odd number of classes on the right.
pub fn validate_well_formed(ct: &ClassTable) -> ValidationReport {
    let mut report = ValidationReport::ok();
    for r in &ct.rules {
        if r.tail == Tail::Var && r.rhs.len() % 2 == 0 {
            report.well_formed = false;
            report.diagnostics.push(Diagnostic {
                subject: ct.render_rule(r),
                message: format!("right-hand side has even length {}", r.rhs.len()),
            });
        }
    }
    report
}

/// Arcs `lhs -> head` indexed by source id; one arc per rule.
#[derive(Clone, Debug)]
pub struct InheritanceGraph {
    pub succ: Vec<Vec<ClassId>>,
}

impl InheritanceGraph {
    pub fn arcs(&self) -> impl Iterator<Item = (ClassId, ClassId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().map(move |&b| (ClassId(a as u32), b)))
    }

    pub fn arc_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    fn preds(&self) -> Vec<Vec<ClassId>> {
        let mut preds = vec![Vec::new(); self.succ.len()];
        for (a, b) in self.arcs() {
            preds[b.index()].push(a);
        }
        preds
    }
}

pub fn inheritance_graph(ct: &ClassTable) -> InheritanceGraph {
    let mut succ = vec![Vec::new(); ct.id_count()];
    for r in &ct.rules {
        let h = r.head();
        let out: &mut Vec<ClassId> = &mut succ[r.lhs.index()];
        if !out.contains(&h) {
            out.push(h);
        }
    }
    InheritanceGraph { succ }
}

/// Checks that the inheritance graph is acyclic and that no two distinct walks
/// share both endpoints.
///
/// Two walks from `u` to `v` differ for the last time at some node `w` that they
/// enter through different arcs, so it suffices to look, for every node with
/// several in-arcs, for a common ancestor of two of its predecessors.
pub fn validate_deterministic(ct: &ClassTable) -> ValidationReport {
    let g = inheritance_graph(ct);
    let mut report = ValidationReport::ok();

    if let Some(cycle) = find_cycle(&g) {
        report.acyclic = false;
        report.deterministic = false;
        let names: Vec<&str> = cycle.iter().map(|&c| ct.name(c)).collect();
        report.diagnostics.push(Diagnostic {
            subject: names.join(" -> "),
            message: "inheritance graph has a cycle".into(),
        });
        return report;
    }

    let preds = g.preds();
    let n = g.succ.len();
    // label[v] = index of the first in-arc of `w` from which v was reached.
    let mut label: Vec<u32> = vec![u32::MAX; n];
    let mut stamp: Vec<u32> = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for w in 0..n {
        let ins = &preds[w];
        if ins.len() < 2 {
            continue;
        }
        let mut clash = None;
        'arcs: for (k, &p) in ins.iter().enumerate() {
            queue.clear();
            queue.push_back(p);
            while let Some(v) = queue.pop_front() {
                let vi = v.index();
                if stamp[vi] == w as u32 {
                    if label[vi] != k as u32 {
                        clash = Some(v);
                        break 'arcs;
                    }
                    continue;
                }
                stamp[vi] = w as u32;
                label[vi] = k as u32;
                queue.extend(preds[vi].iter().copied());
            }
        }
        if let Some(u) = clash {
            report.deterministic = false;
            report.diagnostics.push(Diagnostic {
                subject: format!("{} -> {}", ct.name(u), ct.name(ClassId(w as u32))),
                message: "two distinct walks share these endpoints".into(),
            });
        }
    }
    report
}

fn find_cycle(g: &InheritanceGraph) -> Option<Vec<ClassId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = g.succ.len();
    let mut mark = vec![Mark::New; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = g.succ[v].get(*next) {
                *next += 1;
                let wi = w.index();
                match mark[wi] {
                    Mark::New => {
                        mark[wi] = Mark::Open;
                        parent[wi] = v;
                        stack.push((wi, 0));
                    }
                    Mark::Open => {
                        let mut back = vec![ClassId(wi as u32)];
                        let mut cur = v;
                        while cur != wi {
                            back.push(ClassId(cur as u32));
                            cur = parent[cur];
                        }
                        back.push(ClassId(wi as u32));
                        back.reverse();
                        return Some(back);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

pub fn validate(ct: &ClassTable) -> ValidationReport {
    validate_well_formed(ct).merge(validate_deterministic(ct))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE1: &str = "\
Ql x <: L N Ql L N x
Qr x <: L N Qr L N x
Ql x <: E Qlr N x
Qr x <: E Qrl N x
E x <: Qlr N Qr E E x
E x <: Qrl N Ql E E x
";

    #[test]
    fn parses_var_rule() {
        let ct = parse_class_table("Ql x <: L N Ql L N x").unwrap();
        let r = &ct.rules()[0];
        assert_eq!(ct.name(r.lhs), "Ql");
        let rhs: Vec<&str> = r.rhs.iter().map(|&c| ct.name(c)).collect();
        assert_eq!(rhs, ["L", "N", "Ql", "L", "N"]);
        assert_eq!(r.tail, Tail::Var);
    }

    #[test]
    fn parses_ground_rule() {
        let ct = parse_class_table("QwlH x <: E E Z").unwrap();
        let r = &ct.rules()[0];
        assert_eq!(r.rhs.len(), 2);
        assert_eq!(r.tail, Tail::Ground);
    }

    #[test]
    fn empty_text_is_empty_table() {
        let ct = parse_class_table("").unwrap();
        assert_eq!(ct.class_count(), 0);
        assert!(ct.rules().is_empty());
        assert_eq!(serialize_class_table(&ct), "");
        assert_eq!(inheritance_graph(&ct).arc_count(), 0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let ct = parse_class_table("# header\n\nA x <: B x   # trailing\n").unwrap();
        assert_eq!(ct.rules().len(), 1);
    }

    #[test]
    fn rejects_trivial_cycle() {
        let err = parse_class_table("A x <: x").unwrap_err();
        assert!(matches!(err, ParseError::TrivialCycle { line: 1, .. }));
    }

    #[test]
    fn rejects_duplicate_arc() {
        let err = parse_class_table("A x <: B C D x\nA x <: B x").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateArc { line: 2, .. }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_class_table("A x <: B x\nA y <: B x").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                col: 3,
                msg: "expected type variable `x`".into()
            }
        );
        assert!(parse_class_table("A x <: B Q").is_err());
        assert!(parse_class_table("Z x <: B x").is_err());
        assert!(parse_class_table("A x <: 9B x").is_err());
    }

    #[test]
    fn example_round_trip() {
        let ct = parse_class_table(EXAMPLE1).unwrap();
        assert_eq!(ct.rules().len(), 6);
        assert_eq!(serialize_class_table(&ct), EXAMPLE1);
        assert_eq!(parse_class_table(&serialize_class_table(&ct)).unwrap(), ct);
    }

    #[test]
    fn example_graph_arcs() {
        let ct = parse_class_table(EXAMPLE1).unwrap();
        let g = inheritance_graph(&ct);
        let mut arcs: Vec<(String, String)> = g
            .arcs()
            .map(|(a, b)| (ct.name(a).to_string(), ct.name(b).to_string()))
            .collect();
        arcs.sort();
        let mut want: Vec<(String, String)> = [
            ("Ql", "L"),
            ("Ql", "E"),
            ("Qr", "L"),
            ("Qr", "E"),
            ("E", "Qlr"),
            ("E", "Qrl"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        want.sort();
        assert_eq!(arcs, want);
    }

    #[test]
    fn well_formedness() {
        let ct = parse_class_table("Ql x <: L N Ql L N x").unwrap();
        assert!(validate_well_formed(&ct).well_formed);
        let ct = parse_class_table("A x <: B C x\nQ x <: E E Z").unwrap();
        let rep = validate_well_formed(&ct);
        assert!(!rep.well_formed);
        assert_eq!(rep.diagnostics.len(), 1);
        assert_eq!(rep.diagnostics[0].subject, "A x <: B C x");
    }

    #[test]
    fn two_cycle_is_reported() {
        let ct = parse_class_table("A x <: B x\nB x <: A x").unwrap();
        let rep = validate_deterministic(&ct);
        assert!(!rep.acyclic);
        assert!(!rep.deterministic);
        let subj = &rep.diagnostics[0].subject;
        assert!(subj == "A -> B -> A" || subj == "B -> A -> B", "{subj}");
    }

    #[test]
    fn diamond_is_nondeterministic() {
        let ct = parse_class_table("A x <: B x\nA x <: C x\nB x <: D x\nC x <: D x").unwrap();
        let rep = validate_deterministic(&ct);
        assert!(rep.acyclic);
        assert!(!rep.deterministic);
        assert_eq!(rep.diagnostics[0].subject, "A -> D");
    }

    #[test]
    fn example_is_deterministic() {
        let ct = parse_class_table(EXAMPLE1).unwrap();
        assert!(validate(&ct).is_ok());
    }

    #[test]
    fn tower_and_query_parsing() {
        let q = SubtypeQuery::parse("Qr E E Z  L N L N L N E E Z").unwrap();
        assert_eq!(q.subtype.classes, ["Qr", "E", "E"]);
        assert_eq!(q.supertype.len(), 8);
        assert!(SubtypeQuery::parse("Z Z").unwrap().subtype.is_z());
        assert!(TypeTower::parse("A Z B Z").is_err());
        assert!(TypeTower::parse("A B").is_err());
    }
}
