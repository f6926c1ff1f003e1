//! Context-free grammars, their normal form for table parsing, a direct
//! membership oracle, and a generator of table parsers written in Simper.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::simper::{Cond, LValue, Program, Stmt, Value, LEN};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T(String),
    N(String),
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::T(s) | Symbol::N(s) => s,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::T(t) => write!(f, "'{t}'"),
            Symbol::N(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Production {
    pub lhs: String,
    pub rhs: Vec<Symbol>,
}

impl Production {
    pub fn new(lhs: &str, rhs: Vec<Symbol>) -> Self {
        Production {
            lhs: lhs.to_string(),
            rhs,
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    pub start: String,
    /// First-appearance order.
    pub terminals: Vec<String>,
    /// First-appearance order, start first.
    pub nonterminals: Vec<String>,
    pub productions: Vec<Production>,
}

impl Grammar {
    pub fn new(start: &str, productions: Vec<Production>) -> Self {
        let mut g = Grammar {
            start: start.to_string(),
            terminals: Vec::new(),
            nonterminals: Vec::new(),
            productions,
        };
        g.reindex();
        g
    }

    fn reindex(&mut self) {
        let mut terms = Vec::new();
        let mut nts = vec![self.start.clone()];
        for p in &self.productions {
            if !nts.contains(&p.lhs) {
                nts.push(p.lhs.clone());
            }
            for s in &p.rhs {
                let (list, name) = match s {
                    Symbol::T(t) => (&mut terms, t),
                    Symbol::N(n) => (&mut nts, n),
                };
                if !list.contains(name) {
                    list.push(name.clone());
                }
            }
        }
        self.terminals = terms;
        self.nonterminals = nts;
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start: {}", self.start)?;
        self.productions.iter().try_for_each(|p| writeln!(f, "{p}"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `start:` line")]
    MissingStart,
}

fn nonterminal_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn terminal_name(s: &str) -> bool {
    !s.is_empty() && !s.contains(['"', '\'']) && !s.chars().any(char::is_whitespace)
}

/// Reads `start: S` plus lines `A -> 'a' B | ` where an empty alternative is ε.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut start = None;
    let mut prods = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| GrammarError::Syntax { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(s) = body.strip_prefix("start:") {
            let s = s.trim();
            if !nonterminal_name(s) {
                return Err(err(format!("bad start symbol `{s}`")));
            }
            start = Some(s.to_string());
            continue;
        }
        let (lhs, rhs) = body
            .split_once("->")
            .ok_or_else(|| err("expected `A -> ...`".into()))?;
        let lhs = lhs.trim();
        if !nonterminal_name(lhs) {
            return Err(err(format!("bad nonterminal `{lhs}`")));
        }
        for alt in rhs.split('|') {
            let mut syms = Vec::new();
            for tok in alt.split_whitespace() {
                if let Some(t) = tok.strip_prefix('\'').and_then(|t| t.strip_suffix('\'')) {
                    if !terminal_name(t) {
                        return Err(err(format!("bad terminal `{tok}`")));
                    }
                    syms.push(Symbol::T(t.to_string()));
                } else if nonterminal_name(tok) {
                    syms.push(Symbol::N(tok.to_string()));
                } else {
                    return Err(err(format!("bad symbol `{tok}`")));
                }
            }
            prods.push(Production::new(lhs, syms));
        }
    }
    let start = start.ok_or(GrammarError::MissingStart)?;
    Ok(Grammar::new(&start, prods))
}

/// `|Σ|` plus, for every production, one more than its length.
pub fn grammar_size(g: &Grammar) -> usize {
    g.terminals.len() + g.productions.iter().map(|p| p.rhs.len() + 1).sum::<usize>()
}

fn fresh_name(base: &str, taken: &mut BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

/// Splits long right-hand sides from the right: `A -> x1 x2 ... xn` becomes
/// `A -> x1 A'` and `A' -> x2 ... xn`, repeatedly.
pub fn binarize(g: &Grammar) -> Grammar {
    let mut taken: BTreeSet<String> = g.nonterminals.iter().cloned().collect();
    let mut out = Vec::with_capacity(g.productions.len());
    for p in &g.productions {
        let mut lhs = p.lhs.clone();
        let mut rhs = p.rhs.as_slice();
        while rhs.len() > 2 {
            let fresh = fresh_name(&p.lhs, &mut taken);
            out.push(Production {
                lhs,
                rhs: vec![rhs[0].clone(), Symbol::N(fresh.clone())],
            });
            lhs = fresh;
            rhs = &rhs[1..];
        }
        out.push(Production {
            lhs,
            rhs: rhs.to_vec(),
        });
    }
    let mut b = Grammar {
        start: g.start.clone(),
        terminals: Vec::new(),
        nonterminals: Vec::new(),
        productions: out,
    };
    b.reindex();
    b
}

/// Least fixed point: `A` is nullable when some production of `A` has only
/// nullable nonterminals on its right.
pub fn nullable_set(g: &Grammar) -> BTreeSet<String> {
    let mut set = BTreeSet::new();
    loop {
        let before = set.len();
        for p in &g.productions {
            if !set.contains(&p.lhs)
                && p.rhs
                    .iter()
                    .all(|s| matches!(s, Symbol::N(n) if set.contains(n)))
            {
                set.insert(p.lhs.clone());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// Binary and unary productions over symbol numbers, ready for table parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessedGrammar {
    /// Index is the symbol's number: nonterminals first (start is 0), then terminals.
    pub symbols: Vec<Symbol>,
    pub nonterminal_count: usize,
    pub binary: Vec<(usize, usize, usize)>,
    pub unary: Vec<(usize, usize)>,
    pub nullable_start: bool,
}

impl PreprocessedGrammar {
    pub fn number(&self, s: &Symbol) -> Option<usize> {
        self.symbols.iter().position(|t| t == s)
    }

    pub fn terminals(&self) -> impl Iterator<Item = (usize, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Symbol::T(t) => Some((i, t.as_str())),
                Symbol::N(_) => None,
            })
    }

    pub fn binary_productions(&self) -> Vec<Production> {
        let n = |i: usize| self.symbols[i].name().to_string();
        self.binary
            .iter()
            .map(|&(a, b, c)| Production {
                lhs: n(a),
                rhs: vec![self.symbols[b].clone(), self.symbols[c].clone()],
            })
            .collect()
    }

    pub fn unary_productions(&self) -> Vec<Production> {
        self.unary
            .iter()
            .map(|&(a, b)| Production {
                lhs: self.symbols[a].name().to_string(),
                rhs: vec![self.symbols[b].clone()],
            })
            .collect()
    }

    /// Membership through the normal form, ε included via `nullable_start`.
    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        if word.is_empty() {
            return self.nullable_start;
        }
        let prods: Vec<Production> = self
            .binary_productions()
            .into_iter()
            .chain(self.unary_productions())
            .collect();
        let g = Grammar::new(self.symbols[0].name(), prods);
        reference_cyk(&g, word)
    }
}

/// Drops nullable symbols in every way, removes ε-productions, and numbers
/// the symbols. Expects a binarized grammar.
pub fn eliminate_epsilon(g: &Grammar) -> PreprocessedGrammar {
    let nullable = nullable_set(g);
    let is_nullable = |s: &Symbol| matches!(s, Symbol::N(n) if nullable.contains(n));
    let mut prods: Vec<Production> = Vec::new();
    let push = |p: Production, prods: &mut Vec<Production>| {
        let self_loop = p.rhs.len() == 1 && p.rhs[0] == Symbol::N(p.lhs.clone());
        if !p.rhs.is_empty() && !self_loop && !prods.contains(&p) {
            prods.push(p);
        }
    };
    for p in &g.productions {
        assert!(
            p.rhs.len() <= 2,
            "eliminate_epsilon expects a binarized grammar"
        );
        push(p.clone(), &mut prods);
        if p.rhs.len() == 2 {
            for keep in 0..2 {
                if is_nullable(&p.rhs[1 - keep]) {
                    push(
                        Production {
                            lhs: p.lhs.clone(),
                            rhs: vec![p.rhs[keep].clone()],
                        },
                        &mut prods,
                    );
                }
            }
        }
    }

    let mut symbols: Vec<Symbol> = g.nonterminals.iter().cloned().map(Symbol::N).collect();
    symbols.extend(g.terminals.iter().cloned().map(Symbol::T));
    let ix: HashMap<&Symbol, usize> = symbols.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let nt = |n: &str| ix[&Symbol::N(n.to_string())];
    let mut binary = Vec::new();
    let mut unary = Vec::new();
    for p in &prods {
        match p.rhs.as_slice() {
            [a, b] => binary.push((nt(&p.lhs), ix[a], ix[b])),
            [a] => unary.push((nt(&p.lhs), ix[a])),
            _ => unreachable!(),
        }
    }
    PreprocessedGrammar {
        nonterminal_count: g.nonterminals.len(),
        nullable_start: nullable.contains(&g.start),
        symbols,
        binary,
        unary,
    }
}

/// Binarize, then eliminate ε.
pub fn preprocess(g: &Grammar) -> PreprocessedGrammar {
    eliminate_epsilon(&binarize(g))
}

/// Direct membership test for an arbitrary grammar.
///
/// For every span, shortest first, the set of nonterminals deriving it is
/// grown to a fixed point; a nonterminal only enters once some production
/// justifies it from sets already present, so nothing justifies itself.
pub struct CykOracle {
    start: usize,
    nts: usize,
    prods: Vec<(usize, Vec<Sym>)>,
    terminals: HashMap<String, usize>,
}

#[derive(Clone, Copy)]
enum Sym {
    T(usize),
    N(usize),
}

impl CykOracle {
    pub fn new(g: &Grammar) -> Self {
        let nt: HashMap<&str, usize> = g
            .nonterminals
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let terminals: HashMap<String, usize> = g
            .terminals
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let prods = g
            .productions
            .iter()
            .map(|p| {
                let rhs = p
                    .rhs
                    .iter()
                    .map(|s| match s {
                        Symbol::T(t) => Sym::T(terminals[t]),
                        Symbol::N(n) => Sym::N(nt[n.as_str()]),
                    })
                    .collect();
                (nt[p.lhs.as_str()], rhs)
            })
            .collect();
        CykOracle {
            start: nt[g.start.as_str()],
            nts: g.nonterminals.len(),
            prods,
            terminals,
        }
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        let w: Vec<Option<usize>> = word
            .iter()
            .map(|s| self.terminals.get(s.as_ref()).copied())
            .collect();
        let n = w.len();
        let words = self.nts.div_ceil(64).max(1);
        // table[(i * (n + 1) + j) * words ..]: bitset of nonterminals deriving w[i..j]
        let mut table = vec![0u64; (n + 1) * (n + 1) * words];
        let at = |i: usize, j: usize| (i * (n + 1) + j) * words;
        let has =
            |t: &[u64], i: usize, j: usize, a: usize| t[at(i, j) + a / 64] >> (a % 64) & 1 == 1;
        let mut reach = vec![false; n + 1];
        let mut next = vec![false; n + 1];
        for len in 0..=n {
            for i in 0..=n - len {
                let j = i + len;
                loop {
                    let mut changed = false;
                    for (lhs, rhs) in &self.prods {
                        if has(&table, i, j, *lhs) {
                            continue;
                        }
                        reach[i..=j].fill(false);
                        reach[i] = true;
                        for s in rhs {
                            next[i..=j].fill(false);
                            for q in i..=j {
                                if !reach[q] {
                                    continue;
                                }
                                match *s {
                                    Sym::T(t) => {
                                        if q < j && w[q] == Some(t) {
                                            next[q + 1] = true;
                                        }
                                    }
                                    Sym::N(b) => {
                                        for (r, slot) in
                                            next.iter_mut().enumerate().take(j + 1).skip(q)
                                        {
                                            if has(&table, q, r, b) {
                                                *slot = true;
                                            }
                                        }
                                    }
                                }
                            }
                            std::mem::swap(&mut reach, &mut next);
                        }
                        if reach[j] {
                            table[at(i, j) + lhs / 64] |= 1 << (lhs % 64);
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
            }
        }
        has(&table, 0, n, self.start)
    }
}

pub fn reference_cyk<S: AsRef<str>>(g: &Grammar, word: &[S]) -> bool {
    CykOracle::new(g).accepts(word)
}

fn var(x: &str) -> Value {
    Value::Var(x.to_string())
}

fn nat(n: usize) -> Value {
    Value::Nat(n as u64)
}

fn assign(x: &str, v: Value) -> Stmt {
    Stmt::Assign(LValue::var(x), v)
}

fn inc(x: &str) -> Stmt {
    Stmt::Inc(LValue::var(x))
}

fn cell(i: &str, j: &str, a: usize) -> Vec<Value> {
    vec![var(i), var(j), nat(a)]
}

fn is_set(i: &str, j: &str, a: usize) -> Cond {
    Cond::Eq(Value::Index("T".into(), cell(i, j, a)), nat(1))
}

fn set(i: &str, j: &str, a: usize) -> Stmt {
    Stmt::Assign(LValue::index("T", cell(i, j, a)), nat(1))
}

fn neq(x: &str, y: Value) -> Cond {
    Cond::Neq(var(x), y)
}

/// Table parser for `pg`: terminals fill spans of length one, then spans of
/// length `k = 1, 2, ...` get one test per binary production followed by
/// `#nonterminals` rounds over the unary productions.
pub fn generate_cyk_simper(pg: &PreprocessedGrammar) -> Program {
    let mut body = Vec::new();
    if pg.nullable_start {
        body.push(Stmt::If(Cond::Eq(var(LEN), nat(0)), vec![Stmt::Halt], None));
    }
    body.push(assign("sn", var(LEN)));
    body.push(inc("sn"));
    body.push(assign(
        "T",
        Value::Array(
            vec![var("sn"), var("sn"), nat(pg.symbols.len())],
            Box::new(nat(0)),
        ),
    ));

    body.push(assign("i", nat(0)));
    body.push(assign("si", nat(1)));
    let arms = pg
        .terminals()
        .map(|(a, t)| (Value::Sym(t.to_string()), vec![set("i", "si", a)]))
        .collect();
    body.push(Stmt::While(
        neq("i", var(LEN)),
        vec![
            Stmt::Switch(Value::Index("input".into(), vec![var("i")]), arms),
            inc("i"),
            inc("si"),
        ],
    ));

    let mut binary: Vec<Stmt> = pg
        .binary
        .iter()
        .map(|&(a, b, c)| {
            Stmt::If(
                Cond::and(is_set("i", "j", b), is_set("j", "ik", c)),
                vec![set("i", "ik", a)],
                None,
            )
        })
        .collect();
    binary.push(inc("j"));
    let mut unary: Vec<Stmt> = pg
        .unary
        .iter()
        .map(|&(a, b)| Stmt::If(is_set("i", "ik", b), vec![set("i", "ik", a)], None))
        .collect();
    unary.push(inc("j"));

    let sweep = |inner: Vec<Stmt>, j0: Vec<Stmt>, bound: Value| {
        vec![
            assign("i", nat(0)),
            assign("ik", var("k")),
            Stmt::While(
                neq("ik", var("sn")),
                j0.into_iter()
                    .chain([Stmt::While(neq("j", bound), inner), inc("i"), inc("ik")])
                    .collect(),
            ),
        ]
    };
    let mut round = sweep(binary, vec![assign("j", var("i")), inc("j")], var("ik"));
    round.extend(sweep(
        unary,
        vec![assign("j", nat(0))],
        nat(pg.nonterminal_count),
    ));
    round.push(inc("k"));
    body.push(assign("k", nat(1)));
    body.push(Stmt::While(neq("k", var("sn")), round));

    body.push(Stmt::If(
        Cond::Eq(
            Value::Index("T".into(), vec![nat(0), var(LEN), nat(0)]),
            nat(1),
        ),
        vec![Stmt::Halt],
        None,
    ));
    Program::new(body)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::simper::{desugar, typecheck, ExecOutcome, Interpreter};

    pub const AMBIG: &str = include_str!("../fixtures/ambig.grammar");

    pub fn ambig() -> Grammar {
        parse_grammar(AMBIG).unwrap()
    }

    pub fn words(alphabet: &[&str], max: usize) -> Vec<Vec<String>> {
        let mut all = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max {
            layer = layer
                .iter()
                .flat_map(|w: &Vec<String>| {
                    alphabet.iter().map(move |a| {
                        let mut v = w.clone();
                        v.push(a.to_string());
                        v
                    })
                })
                .collect();
            all.extend(layer.iter().cloned());
        }
        all
    }

    /// Direct reading of the two defining patterns.
    pub fn in_ambig(w: &[String]) -> bool {
        let mut runs = [0usize; 4];
        let mut i = 0;
        for (k, c) in ["a", "b", "c", "d"].iter().enumerate() {
            while i < w.len() && w[i] == *c {
                runs[k] += 1;
                i += 1;
            }
        }
        i == w.len()
            && ((runs[0] == runs[1] && runs[2] == runs[3])
                || (runs[0] == runs[3] && runs[1] == runs[2]))
    }

    fn w(s: &str) -> Vec<String> {
        s.chars().map(String::from).collect()
    }

    fn rendered(ps: Vec<Production>) -> BTreeSet<String> {
        ps.iter()
            .map(|p| p.to_string().replace('\'', "").replace("  ", " "))
            .collect()
    }

    fn set_of(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_and_size() {
        let g = ambig();
        assert_eq!(g.productions.len(), 11);
        assert_eq!(g.terminals, ["a", "d", "b", "c"]);
        assert_eq!(g.nonterminals[0], "S");
        let lengths = [1, 1, 3, 1, 2, 3, 3, 3, 0, 0, 0];
        assert_eq!(
            grammar_size(&g),
            4 + lengths.iter().map(|n| n + 1).sum::<usize>()
        );
        assert_eq!(grammar_size(&g), 32);
        let empty = Grammar {
            start: "S".into(),
            terminals: vec!["a".into()],
            nonterminals: vec!["S".into()],
            productions: vec![],
        };
        assert_eq!(grammar_size(&empty), 1);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_grammar("S -> 'a'"), Err(GrammarError::MissingStart));
        assert!(matches!(
            parse_grammar("start: S\nS -> 'a"),
            Err(GrammarError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_grammar("start: S\nS 'a'"),
            Err(GrammarError::Syntax { .. })
        ));
        assert!(matches!(
            parse_grammar("start: S\nS -> 'a b'"),
            Err(GrammarError::Syntax { .. })
        ));
    }

    #[test]
    fn display_round_trips() {
        let g = ambig();
        assert_eq!(parse_grammar(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn binarize_splits_from_the_right() {
        let b = binarize(&ambig());
        let xs: Vec<String> = b
            .productions
            .iter()
            .filter(|p| p.lhs.starts_with('X'))
            .map(|p| p.to_string())
            .collect();
        assert_eq!(xs, ["X -> 'a' X'", "X' -> X 'd'", "X -> F"]);
        assert!(b.productions.iter().all(|p| p.rhs.len() <= 2));
        let ab = parse_grammar("start: S\nS -> 'a' 'b'\n").unwrap();
        assert_eq!(binarize(&ab), ab);
    }

    #[test]
    fn binarize_growth() {
        let g = parse_grammar(
            "start: S\nS -> 'a' 'b' 'c' 'd' 'e' | A B C\nA -> 'a'\nB -> 'b'\nC -> 'c'\n",
        )
        .unwrap();
        let b = binarize(&g);
        let replacements: usize = g
            .productions
            .iter()
            .map(|p| p.rhs.len().saturating_sub(2))
            .sum();
        assert_eq!(replacements, 4);
        assert_eq!(grammar_size(&b) - grammar_size(&g), 2 * replacements);
        assert!(replacements <= grammar_size(&g));
        assert!(grammar_size(&binarize(&ambig())) <= 3 * grammar_size(&ambig()));
    }

    #[test]
    fn ambig_nullables() {
        assert_eq!(
            nullable_set(&ambig()),
            set_of(&["E", "F", "G", "S", "X", "Y"])
        );
        let g = parse_grammar("start: S\nS -> 'a'\n").unwrap();
        assert!(nullable_set(&g).is_empty());
        let g = parse_grammar("start: S\nS ->\n").unwrap();
        assert_eq!(nullable_set(&g), set_of(&["S"]));
    }

    #[test]
    fn ambig_normal_form() {
        let pg = preprocess(&ambig());
        let binary = set_of(&[
            "Y -> E G", "X -> a X", "X -> X d", "F -> b F", "F -> F c", "E -> a E", "E -> E b",
            "G -> c G", "G -> G d",
        ]);
        assert_eq!(pg.binary.len(), 9);
        assert_eq!(rendered(pg.binary_productions()), binary);
        let names: BTreeSet<String> = pg
            .binary_productions()
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert!(names.contains("X -> 'a' X'") && names.contains("X' -> X 'd'"));
        let unary: BTreeSet<String> = pg
            .unary_productions()
            .iter()
            .map(|p| p.to_string())
            .collect();
        let want = set_of(&[
            "S -> X",
            "X -> F",
            "Y -> E",
            "Y -> G",
            "S -> Y",
            "E' -> 'b'",
            "F' -> 'c'",
            "G' -> 'd'",
            "X' -> 'd'",
        ]);
        assert_eq!(unary, want);
        assert!(pg.nullable_start);
        assert_eq!(pg.symbols[0], Symbol::N("S".into()));
        assert_eq!(pg.nonterminal_count, 10);
        assert_eq!(pg.symbols.len(), 14);
    }

    #[test]
    fn no_nullables_means_no_change() {
        let g = parse_grammar("start: S\nS -> A B | 'c'\nA -> 'a'\nB -> 'b'\n").unwrap();
        let pg = eliminate_epsilon(&g);
        let mut got: Vec<String> = pg
            .binary_productions()
            .into_iter()
            .chain(pg.unary_productions())
            .map(|p| p.to_string())
            .collect();
        let mut want: Vec<String> = g.productions.iter().map(|p| p.to_string()).collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
        assert!(!pg.nullable_start);
    }

    #[test]
    fn oracle_examples() {
        let g = ambig();
        assert!(reference_cyk::<String>(&g, &[]));
        assert!(reference_cyk(&g, &w("abcd")));
        assert!(!reference_cyk(&g, &w("abc")));
        assert!(reference_cyk(&g, &w("aabcdd")));
        assert!(!reference_cyk(&g, &w("aabccd")));
        assert!(!reference_cyk(&g, &w("x")));
    }

    #[test]
    fn oracle_matches_definition() {
        let g = CykOracle::new(&ambig());
        for word in words(&["a", "b", "c", "d"], 6) {
            assert_eq!(g.accepts(&word), in_ambig(&word), "{word:?}");
        }
    }

    #[test]
    fn oracle_on_anbn() {
        let g = parse_grammar("start: S\nS -> 'a' S 'b' |\n").unwrap();
        for word in words(&["a", "b"], 12) {
            let n = word.len() / 2;
            let closed = word.len() % 2 == 0
                && word.iter().take(n).all(|c| c == "a")
                && word.iter().skip(n).all(|c| c == "b");
            assert_eq!(reference_cyk(&g, &word), closed, "{word:?}");
        }
    }

    #[test]
    fn oracle_survives_unit_cycles() {
        let g = parse_grammar("start: S\nS -> A\nA -> S | 'a'\n").unwrap();
        assert!(reference_cyk(&g, &w("a")));
        assert!(!reference_cyk(&g, &w("aa")));
        assert!(!reference_cyk::<String>(&g, &[]));
    }

    #[test]
    fn preprocessing_preserves_language() {
        let fixtures = [
            AMBIG,
            "start: S\nS -> 'a' S 'b' |\n",
            "start: S\nS -> A B C\nA -> 'a' A | \nB -> 'b' |\nC -> C 'c' | 'c'\n",
            "start: S\nS -> S S | '(' S ')' |\n",
        ];
        for src in fixtures {
            let g = parse_grammar(src).unwrap();
            let pg = preprocess(&g);
            for word in words(
                &g.terminals.iter().map(String::as_str).collect::<Vec<_>>(),
                6,
            ) {
                assert_eq!(
                    reference_cyk(&g, &word),
                    pg.accepts(&word),
                    "{src} {word:?}"
                );
            }
        }
    }

    fn run(p: &Interpreter, word: &[String]) -> bool {
        p.run(word, 10_000_000).outcome == ExecOutcome::Halted
    }

    #[test]
    fn generated_parser_typechecks() {
        let p = generate_cyk_simper(&preprocess(&ambig()));
        let env = typecheck(&p).unwrap();
        assert_eq!(env.get("T").unwrap().to_string(), "array 3 nat");
    }

    #[test]
    fn generated_parser_agrees_on_four_letter_words() {
        let g = ambig();
        let p = Interpreter::new(&desugar(&generate_cyk_simper(&preprocess(&g)))).unwrap();
        let all = words(&["a", "b", "c", "d"], 4);
        let four: Vec<_> = all.iter().filter(|w| w.len() == 4).collect();
        assert_eq!(four.len(), 256);
        for word in four {
            assert_eq!(run(&p, word), reference_cyk(&g, word), "{word:?}");
        }
    }

    #[test]
    fn generated_parser_for_ab() {
        let g = parse_grammar("start: S\nS -> 'a' 'b'\n").unwrap();
        let p = Interpreter::new(&desugar(&generate_cyk_simper(&preprocess(&g)))).unwrap();
        for word in words(&["a", "b"], 3) {
            assert_eq!(run(&p, &word), word == w("ab"), "{word:?}");
        }
    }

    #[test]
    fn generated_parser_size_is_linear() {
        let grammars = [
            "start: S\nS -> 'a' 'b'\n",
            AMBIG,
            "start: S\nS -> A B C D\nA -> 'a' A | 'a'\nB -> 'b' B | 'b'\nC -> 'c' C | 'c'\nD -> 'd' D | 'd'\nE -> A B | C D | S S\n",
        ];
        let ratios: Vec<f64> = grammars
            .iter()
            .map(|src| {
                let g = parse_grammar(src).unwrap();
                generate_cyk_simper(&preprocess(&g)).size() as f64 / grammar_size(&g) as f64
            })
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, 0f64), |(l, h), &r| (l.min(r), h.max(r)));
        assert!(hi / lo < 4.0, "{ratios:?}");
    }

    #[test]
    fn empty_word_without_nullable_start() {
        let g = parse_grammar("start: S\nS -> 'a'\n").unwrap();
        let p = Interpreter::new(&desugar(&generate_cyk_simper(&preprocess(&g)))).unwrap();
        assert!(!run(&p, &[]));
        assert!(run(&p, &w("a")));
    }
}
