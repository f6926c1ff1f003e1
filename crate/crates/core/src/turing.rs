//! Extended Turing machines: the transition function may write any string
//! (including the empty one when moving) in place of the current cell.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterId(pub u32);

/// A tape alphabet symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub String);

impl Letter {
    pub fn new(s: impl Into<String>) -> Self {
        Letter(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Blank,
    Letter(LetterId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    L,
    S,
    R,
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::L => "L",
            Dir::S => "S",
            Dir::R => "R",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TmTransition {
    pub to: StateId,
    pub write: Vec<LetterId>,
    pub dir: Dir,
}

/// Name reserved for the on-demand spin state of the text format.
pub const REJECT: &str = "reject";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedTM {
    pub states: Vec<String>,
    pub initial: StateId,
    pub halt: StateId,
    pub alphabet: Vec<Letter>,
    /// Row-major: `delta[state * (|alphabet| + 1) + read]`, where Blank reads
    /// at index `|alphabet|`.
    pub delta: Vec<TmTransition>,
}

impl ExtendedTM {
    pub fn width(&self) -> usize {
        self.alphabet.len() + 1
    }

    pub fn read_index(&self, c: Cell) -> usize {
        match c {
            Cell::Letter(l) => l.0 as usize,
            Cell::Blank => self.alphabet.len(),
        }
    }

    pub fn delta(&self, s: StateId, c: Cell) -> &TmTransition {
        &self.delta[s.0 as usize * self.width() + self.read_index(c)]
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0 as usize]
    }

    pub fn letter(&self, l: LetterId) -> &Letter {
        &self.alphabet[l.0 as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(|i| StateId(i as u32))
    }

    pub fn letter_id(&self, name: &str) -> Option<LetterId> {
        self.alphabet
            .iter()
            .position(|l| l.0 == name)
            .map(|i| LetterId(i as u32))
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        (0..self.alphabet.len() as u32)
            .map(|i| Cell::Letter(LetterId(i)))
            .chain([Cell::Blank])
    }

    /// Ids for a word given as letter names.
    pub fn word(&self, letters: &[&str]) -> Result<Vec<LetterId>, TmParseError> {
        letters
            .iter()
            .map(|l| {
                self.letter_id(l)
                    .ok_or_else(|| TmParseError::UnknownLetter((*l).to_string()))
            })
            .collect()
    }

    /// A state other than the halt state whose every transition stays put in it.
    pub fn is_spin_state(&self, s: StateId) -> bool {
        s != self.halt
            && self.cells().all(|c| {
                let t = self.delta(s, c);
                t.to == s && t.dir == Dir::S
            })
    }

    pub fn render_cell(&self, c: Cell) -> &str {
        match c {
            Cell::Blank => "_",
            Cell::Letter(l) => self.letter(l).as_str(),
        }
    }
}

/// `(state, left, current, right)`; `right_rev` holds the right part reversed
/// so both ends of the head neighbourhood are stack tops.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TmConfig {
    pub state: StateId,
    pub left: Vec<LetterId>,
    pub current: Cell,
    pub right_rev: Vec<LetterId>,
}

impl TmConfig {
    pub fn new(state: StateId, left: Vec<LetterId>, current: Cell, right: Vec<LetterId>) -> Self {
        let mut right_rev = right;
        right_rev.reverse();
        TmConfig {
            state,
            left,
            current,
            right_rev,
        }
    }

    pub fn initial(m: &ExtendedTM, input: &[LetterId]) -> Self {
        TmConfig::new(m.initial, Vec::new(), Cell::Blank, input.to_vec())
    }

    pub fn right(&self) -> Vec<LetterId> {
        self.right_rev.iter().rev().copied().collect()
    }

    /// Number of letters on the tape (a blank current cell counts as empty).
    pub fn tape_len(&self) -> usize {
        self.left.len() + self.right_rev.len() + usize::from(self.current != Cell::Blank)
    }

    pub fn render(&self, m: &ExtendedTM) -> String {
        let mut s = format!("{}:", m.state_name(self.state));
        for &l in &self.left {
            s.push(' ');
            s.push_str(m.letter(l).as_str());
        }
        s.push_str(" [");
        s.push_str(m.render_cell(self.current));
        s.push(']');
        for &l in self.right_rev.iter().rev() {
            s.push(' ');
            s.push_str(m.letter(l).as_str());
        }
        s
    }
}

pub fn tm_step(m: &ExtendedTM, c: &TmConfig) -> TmConfig {
    let mut next = c.clone();
    tm_step_mut(m, &mut next);
    next
}

/// In-place step; the cost is proportional to the written string.
pub fn tm_step_mut(m: &ExtendedTM, c: &mut TmConfig) {
    let t = m.delta(c.state, c.current);
    c.state = t.to;
    match t.dir {
        Dir::L => {
            c.right_rev.extend(t.write.iter().rev());
            c.current = c.left.pop().map_or(Cell::Blank, Cell::Letter);
        }
        Dir::S => {
            c.current = t.write.first().copied().map_or(Cell::Blank, Cell::Letter);
        }
        Dir::R => {
            c.left.extend_from_slice(&t.write);
            c.current = c.right_rev.pop().map_or(Cell::Blank, Cell::Letter);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TmOutcome {
    Halted(u64),
    OutOfFuel,
}

#[derive(Clone, Debug)]
pub struct TmRunResult {
    pub outcome: TmOutcome,
    pub steps: u64,
    pub last: TmConfig,
    pub trace: Option<Vec<TmConfig>>,
}

pub fn tm_run(m: &ExtendedTM, input: &[LetterId], fuel: u64, want_trace: bool) -> TmRunResult {
    let mut c = TmConfig::initial(m, input);
    let mut trace = want_trace.then(|| vec![c.clone()]);
    let mut steps = 0;
    while c.state != m.halt && steps < fuel {
        tm_step_mut(m, &mut c);
        steps += 1;
        if let Some(t) = trace.as_mut() {
            t.push(c.clone());
        }
    }
    let outcome = if c.state == m.halt {
        TmOutcome::Halted(steps)
    } else {
        TmOutcome::OutOfFuel
    };
    TmRunResult {
        outcome,
        steps,
        last: c,
        trace,
    }
}

/// Like [`tm_run`] without a trace, but stops as soon as a spin state is
/// entered. The outcome is then `OutOfFuel`, since no fuel would be enough.
pub fn tm_run_settle(m: &ExtendedTM, input: &[LetterId], fuel: u64) -> TmRunResult {
    let spin: Vec<bool> = m.state_ids().map(|s| m.is_spin_state(s)).collect();
    let mut c = TmConfig::initial(m, input);
    let mut steps = 0;
    while c.state != m.halt && !spin[c.state.0 as usize] && steps < fuel {
        tm_step_mut(m, &mut c);
        steps += 1;
    }
    let outcome = if c.state == m.halt {
        TmOutcome::Halted(steps)
    } else {
        TmOutcome::OutOfFuel
    };
    TmRunResult {
        outcome,
        steps,
        last: c,
        trace: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmDiagnostic {
    pub state: String,
    pub read: String,
    pub message: String,
}

pub fn validate_etm(m: &ExtendedTM) -> Vec<TmDiagnostic> {
    let mut out = Vec::new();
    let nq = m.states.len();
    let mut diag = |s: StateId, c: Cell, msg: String| {
        out.push(TmDiagnostic {
            state: m.state_name(s).to_string(),
            read: m.render_cell(c).to_string(),
            message: msg,
        })
    };
    if m.delta.len() != nq * m.width() {
        out.push(TmDiagnostic {
            state: String::new(),
            read: String::new(),
            message: format!(
                "transition table has {} entries, expected {}",
                m.delta.len(),
                nq * m.width()
            ),
        });
        return out;
    }
    for s in m.state_ids() {
        for c in m.cells() {
            let t = m.delta(s, c);
            if t.to.0 as usize >= nq {
                diag(s, c, "target state out of range".into());
            }
            if t.write.iter().any(|l| l.0 as usize >= m.alphabet.len()) {
                diag(s, c, "written letter out of range".into());
            }
            if t.dir == Dir::S && t.write.len() != 1 {
                diag(s, c, format!("stay move writes {} letters", t.write.len()));
            }
            if s == m.halt {
                let loops = t.to == m.halt
                    && t.dir == Dir::S
                    && match c {
                        Cell::Letter(_) => t.write.len() == 1 && Cell::Letter(t.write[0]) == c,
                        Cell::Blank => t.write.len() == 1,
                    };
                if !loops {
                    diag(s, c, "halt state must loop on itself".into());
                }
            }
        }
    }
    if m.alphabet.is_empty() {
        out.push(TmDiagnostic {
            state: String::new(),
            read: String::new(),
            message: "empty alphabet".into(),
        });
    }
    let mut seen = HashMap::new();
    for (i, l) in m.alphabet.iter().enumerate() {
        if l.0.is_empty() {
            out.push(TmDiagnostic {
                state: String::new(),
                read: l.0.clone(),
                message: "empty letter".into(),
            });
        }
        if let Some(j) = seen.insert(l.0.as_str(), i) {
            out.push(TmDiagnostic {
                state: String::new(),
                read: l.0.clone(),
                message: format!("letter repeated at positions {j} and {i}"),
            });
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TmParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing header `{0}:`")]
    MissingHeader(&'static str),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("line {line}: second transition for ({state}, {read})")]
    Duplicate {
        line: usize,
        state: String,
        read: String,
    },
    #[error("invalid machine: {0}")]
    Invalid(String),
}

fn valid_symbol(s: &str) -> bool {
    !s.is_empty()
        && s != "_"
        && !s.contains([',', ':'])
        && !s.contains("->")
        && !s.chars().any(char::is_whitespace)
}

/// Parses the line-oriented machine format.
///
/// Missing transitions of the halt state default to its self-loop; every other
/// missing transition goes to the `reject` spin state.
pub fn parse_tm(text: &str) -> Result<ExtendedTM, TmParseError> {
    let mut states: Option<Vec<String>> = None;
    let mut initial = None;
    let mut halt = None;
    let mut alphabet: Option<Vec<Letter>> = None;
    let mut rows: Vec<(usize, &str)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.contains("->") {
            rows.push((line, body));
            continue;
        }
        let Some((key, val)) = body.split_once(':') else {
            return Err(TmParseError::Syntax {
                line,
                msg: "expected `key: value` or a transition".into(),
            });
        };
        let words: Vec<String> = val.split_whitespace().map(str::to_string).collect();
        for w in &words {
            if !valid_symbol(w) {
                return Err(TmParseError::Syntax {
                    line,
                    msg: format!("invalid name `{w}`"),
                });
            }
        }
        let single = |words: &Vec<String>| -> Result<String, TmParseError> {
            match words.as_slice() {
                [w] => Ok(w.clone()),
                _ => Err(TmParseError::Syntax {
                    line,
                    msg: format!("`{}` takes one name", key.trim()),
                }),
            }
        };
        match key.trim() {
            "states" => states = Some(words),
            "initial" => initial = Some(single(&words)?),
            "halt" => halt = Some(single(&words)?),
            "alphabet" => alphabet = Some(words.into_iter().map(Letter).collect()),
            k => {
                return Err(TmParseError::Syntax {
                    line,
                    msg: format!("unknown header `{k}`"),
                })
            }
        }
    }

    let mut states = states.ok_or(TmParseError::MissingHeader("states"))?;
    let alphabet = alphabet.ok_or(TmParseError::MissingHeader("alphabet"))?;
    let initial = initial.ok_or(TmParseError::MissingHeader("initial"))?;
    let halt = halt.ok_or(TmParseError::MissingHeader("halt"))?;
    if states.iter().any(|s| s == REJECT) {
        return Err(TmParseError::Invalid(format!(
            "`{REJECT}` is reserved and cannot be declared"
        )));
    }
    if alphabet.is_empty() {
        return Err(TmParseError::Invalid("empty alphabet".into()));
    }
    let mut state_ix: HashMap<String, u32> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i as u32))
        .collect();
    if state_ix.len() != states.len() {
        return Err(TmParseError::Invalid("repeated state".into()));
    }
    let letter_ix: HashMap<&str, u32> = alphabet
        .iter()
        .enumerate()
        .map(|(i, l)| (l.0.as_str(), i as u32))
        .collect();
    if letter_ix.len() != alphabet.len() {
        return Err(TmParseError::Invalid("repeated letter".into()));
    }
    let lookup_state = |ix: &HashMap<String, u32>, s: &str| {
        ix.get(s)
            .copied()
            .map(StateId)
            .ok_or_else(|| TmParseError::UnknownState(s.to_string()))
    };
    let initial = lookup_state(&state_ix, &initial)?;
    let halt = lookup_state(&state_ix, &halt)?;
    let width = alphabet.len() + 1;
    let blank_ix = alphabet.len();

    let mut reject: Option<StateId> = None;
    let mut table: Vec<Option<TmTransition>> = vec![None; states.len() * width];
    for (line, body) in rows {
        let bad = |msg: &str| TmParseError::Syntax {
            line,
            msg: msg.to_string(),
        };
        let (lhs, rhs) = body.split_once("->").ok_or_else(|| bad("missing `->`"))?;
        let (q, a) = lhs
            .split_once(',')
            .ok_or_else(|| bad("expected `state,letter`"))?;
        let (q, a) = (q.trim(), a.trim());
        let parts: Vec<&str> = rhs.split(',').map(str::trim).collect();
        let [q2, w, d] = parts.as_slice() else {
            return Err(bad("expected `state,letters,dir` after `->`"));
        };
        let from = lookup_state(&state_ix, q)?;
        let read = if a == "_" {
            blank_ix
        } else {
            *letter_ix
                .get(a)
                .ok_or_else(|| TmParseError::UnknownLetter(a.to_string()))? as usize
        };
        let to = if *q2 == REJECT {
            *reject.get_or_insert_with(|| {
                let id = StateId(states.len() as u32);
                states.push(REJECT.to_string());
                state_ix.insert(REJECT.to_string(), id.0);
                table.extend(std::iter::repeat_n(None, width));
                id
            })
        } else {
            lookup_state(&state_ix, q2)?
        };
        let write = w
            .split_whitespace()
            .map(|l| {
                letter_ix
                    .get(l)
                    .map(|&i| LetterId(i))
                    .ok_or_else(|| TmParseError::UnknownLetter(l.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dir = match *d {
            "L" => Dir::L,
            "S" => Dir::S,
            "R" => Dir::R,
            _ => return Err(bad("direction must be L, S or R")),
        };
        let slot = &mut table[from.0 as usize * width + read];
        if slot.is_some() {
            return Err(TmParseError::Duplicate {
                line,
                state: q.to_string(),
                read: a.to_string(),
            });
        }
        *slot = Some(TmTransition { to, write, dir });
    }

    let self_loop = |s: StateId, read: usize| TmTransition {
        to: s,
        write: vec![LetterId(if read == blank_ix { 0 } else { read as u32 })],
        dir: Dir::S,
    };
    let mut delta = Vec::with_capacity(table.len());
    for (i, slot) in table.into_iter().enumerate() {
        let s = StateId((i / width) as u32);
        let read = i % width;
        let t = match slot {
            Some(t) => t,
            None if s == halt || Some(s) == reject => self_loop(s, read),
            None => {
                let r = *reject.get_or_insert_with(|| {
                    states.push(REJECT.to_string());
                    StateId(states.len() as u32 - 1)
                });
                TmTransition {
                    to: r,
                    write: vec![LetterId(if read == blank_ix { 0 } else { read as u32 })],
                    dir: Dir::S,
                }
            }
        };
        delta.push(t);
    }
    if let Some(r) = reject {
        if delta.len() < states.len() * width {
            delta.extend((0..width).map(|read| self_loop(r, read)));
        }
    }

    let m = ExtendedTM {
        states,
        initial,
        halt,
        alphabet,
        delta,
    };
    let diags = validate_etm(&m);
    if let Some(d) = diags.first() {
        return Err(TmParseError::Invalid(format!(
            "({}, {}): {}",
            d.state, d.read, d.message
        )));
    }
    Ok(m)
}

/// Inverse of [`parse_tm`]. Transitions into a spin state named `reject` are
/// left implicit, as are that state's own transitions.
pub fn serialize_tm(m: &ExtendedTM) -> String {
    let reject = m.state_id(REJECT).filter(|&r| m.is_spin_state(r));
    let mut out = String::new();
    let names: Vec<&str> = m
        .state_ids()
        .filter(|&s| Some(s) != reject)
        .map(|s| m.state_name(s))
        .collect();
    out.push_str(&format!("states: {}\n", names.join(" ")));
    out.push_str(&format!("initial: {}\n", m.state_name(m.initial)));
    out.push_str(&format!("halt: {}\n", m.state_name(m.halt)));
    let letters: Vec<&str> = m.alphabet.iter().map(Letter::as_str).collect();
    out.push_str(&format!("alphabet: {}\n", letters.join(" ")));
    for s in m.state_ids() {
        if Some(s) == reject {
            continue;
        }
        for c in m.cells() {
            let t = m.delta(s, c);
            if Some(t.to) == reject && t.dir == Dir::S {
                continue;
            }
            let w: Vec<&str> = t.write.iter().map(|&l| m.letter(l).as_str()).collect();
            out.push_str(&format!(
                "{},{} -> {},{},{}\n",
                m.state_name(s),
                m.render_cell(c),
                m.state_name(t.to),
                w.join(" "),
                t.dir
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const COUNTER: &str = include_str!("../fixtures/increment.tm");
    pub(crate) const ANBN: &str = include_str!("../fixtures/anbn.tm");
    pub(crate) const ALWAYS_HALT: &str = include_str!("../fixtures/always_halt.tm");

    fn ids(m: &ExtendedTM, w: &str) -> Vec<LetterId> {
        w.chars()
            .map(|c| m.letter_id(&c.to_string()).unwrap())
            .collect()
    }

    #[test]
    fn fixtures_parse_and_validate() {
        for src in [COUNTER, ANBN, ALWAYS_HALT] {
            let m = parse_tm(src).unwrap();
            assert!(validate_etm(&m).is_empty());
        }
    }

    #[test]
    fn always_halt_takes_one_step() {
        let m = parse_tm(ALWAYS_HALT).unwrap();
        for w in ["", "a", "aaa"] {
            assert_eq!(
                tm_run(&m, &ids(&m, w), 100, false).outcome,
                TmOutcome::Halted(1)
            );
        }
    }

    #[test]
    fn left_step_consumes_left_letter() {
        let m = parse_tm("states: q p\ninitial: q\nhalt: p\nalphabet: a b c\nq,b -> p,c a,L\n")
            .unwrap();
        let [a, b, c] = [0, 1, 2].map(LetterId);
        let q = m.initial;
        let next = tm_step(&m, &TmConfig::new(q, vec![a, a], Cell::Letter(b), vec![b]));
        assert_eq!(
            next,
            TmConfig::new(m.halt, vec![a], Cell::Letter(a), vec![c, a, b])
        );
        let edge = tm_step(&m, &TmConfig::new(q, vec![], Cell::Letter(b), vec![b]));
        assert_eq!(
            edge,
            TmConfig::new(m.halt, vec![], Cell::Blank, vec![c, a, b])
        );
    }

    #[test]
    fn right_and_stay_steps() {
        let src = "states: q p\ninitial: q\nhalt: p\nalphabet: a b\nq,a -> p,b b,R\nq,b -> p,a,S\nq,_ -> p,,R\n";
        let m = parse_tm(src).unwrap();
        let [a, b] = [0, 1].map(LetterId);
        let q = m.initial;
        let n = tm_step(&m, &TmConfig::new(q, vec![a], Cell::Letter(a), vec![]));
        assert_eq!(n, TmConfig::new(m.halt, vec![a, b, b], Cell::Blank, vec![]));
        let n = tm_step(&m, &TmConfig::new(q, vec![], Cell::Letter(b), vec![b]));
        assert_eq!(n, TmConfig::new(m.halt, vec![], Cell::Letter(a), vec![b]));
        let n = tm_step(&m, &TmConfig::new(q, vec![], Cell::Blank, vec![a, b]));
        assert_eq!(n, TmConfig::new(m.halt, vec![], Cell::Letter(a), vec![b]));
    }

    #[test]
    fn halt_state_absorbs() {
        let m = parse_tm(COUNTER).unwrap();
        let c = TmConfig::new(m.halt, vec![LetterId(0)], Cell::Letter(LetterId(1)), vec![]);
        assert_eq!(tm_step(&m, &c), c);
    }

    #[test]
    fn stay_with_two_letters_is_diagnosed() {
        let mut m = parse_tm(ALWAYS_HALT).unwrap();
        let i = m.initial.0 as usize * m.width();
        m.delta[i] = TmTransition {
            to: m.halt,
            write: vec![LetterId(0), LetterId(0)],
            dir: Dir::S,
        };
        let d = validate_etm(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].state, "q");
    }

    #[test]
    fn counter_increments_lsb_first() {
        let m = parse_tm(COUNTER).unwrap();
        let r = tm_run(&m, &ids(&m, "1110"), 100, false);
        assert_eq!(r.outcome, TmOutcome::Halted(5));
        let mut tape = r.last.left.clone();
        tape.push(match r.last.current {
            Cell::Letter(l) => l,
            Cell::Blank => panic!(),
        });
        tape.extend(r.last.right());
        assert_eq!(tape, ids(&m, "$0001"));
    }

    #[test]
    fn counter_twenty_step_trace() {
        let m = parse_tm(COUNTER).unwrap();
        let input = ids(&m, &"1".repeat(19));
        let r = tm_run(&m, &input, 20, true);
        let trace = r.trace.unwrap();
        assert_eq!(trace.len(), 21);
        let (dollar, zero, one) = (ids(&m, "$")[0], ids(&m, "0")[0], ids(&m, "1")[0]);
        let carry = m.state_id("carry").unwrap();
        for (k, c) in trace.iter().enumerate().skip(1) {
            let mut left = vec![dollar];
            left.extend(std::iter::repeat_n(zero, k - 1));
            let current = if k <= 19 {
                Cell::Letter(one)
            } else {
                Cell::Blank
            };
            let right = vec![one; 19usize.saturating_sub(k)];
            assert_eq!(*c, TmConfig::new(carry, left, current, right), "step {k}");
        }
        assert_eq!(
            tm_run(&m, &input, 1000, false).outcome,
            TmOutcome::Halted(21)
        );
    }

    #[test]
    fn anbn_recognizer() {
        let m = parse_tm(ANBN).unwrap();
        for (w, ok) in [
            ("", true),
            ("ab", true),
            ("aabb", true),
            ("aab", false),
            ("abab", false),
            ("ba", false),
            ("x", false),
        ] {
            let r = tm_run(&m, &ids(&m, w), 10_000, false);
            assert_eq!(matches!(r.outcome, TmOutcome::Halted(_)), ok, "{w}");
            if !ok {
                assert!(m.is_spin_state(r.last.state), "{w}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        for src in [COUNTER, ANBN, ALWAYS_HALT] {
            let m = parse_tm(src).unwrap();
            let again = parse_tm(&serialize_tm(&m)).unwrap();
            assert_eq!(again, m);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_tm("initial: q\nhalt: q\nalphabet: a"),
            Err(TmParseError::MissingHeader("states"))
        ));
        let dup = "states: q\ninitial: q\nhalt: q\nalphabet: a\nq,a -> q,a,S\nq,a -> q,a,S";
        assert!(matches!(
            parse_tm(dup),
            Err(TmParseError::Duplicate { line: 6, .. })
        ));
        assert!(parse_tm("states: q p\ninitial: q\nhalt: p\nalphabet: a\nq,a -> p,a,X").is_err());
        assert!(parse_tm("states: q reject\ninitial: q\nhalt: q\nalphabet: a").is_err());
    }
}
