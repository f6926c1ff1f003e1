//! Subtyping-machine interpreter.
//!
//! A configuration is a pending obligation `lhs <: rhs`. Each step follows one
//! inheritance chain from the head of `lhs` to the head of `rhs`, consumes that
//! head, and swaps the sides.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::classtable::{ClassId, ClassTable, SubtypeQuery, Tail, TypeTower};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineConfig {
    pub lhs: TypeTower,
    pub rhs: TypeTower,
}

impl MachineConfig {
    pub fn new(lhs: TypeTower, rhs: TypeTower) -> Self {
        MachineConfig { lhs, rhs }
    }

    /// Renders the configuration in head-orientation notation. Even steps put
    /// the head on the left (`◁`), odd steps on the right (`▷`).
    pub fn render_oriented(&self, step: u64) -> String {
        let (rev, fwd, arrow) = if step.is_multiple_of(2) {
            (&self.lhs, &self.rhs, "◁")
        } else {
            (&self.rhs, &self.lhs, "▷")
        };
        let mut s = String::from("Z");
        for c in rev.classes.iter().rev() {
            s.push(' ');
            s.push_str(c);
        }
        format!("{s} {arrow} {fwd}")
    }
}

impl fmt::Display for MachineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  <:  {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainResult {
    pub consumed_head: String,
    pub suffix: Vec<String>,
    pub tail: Tail,
    pub rules_applied: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StuckReason {
    /// No chain leads from `from` to `target`.
    NoChain { from: String, target: String },
    /// The subtype ran out while the supertype still has a head.
    SubtypeExhausted { target: String },
    /// The supertype is `Z` but the subtype cannot be rewritten to bare `Z`.
    NoHaltingChain { from: String },
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::NoChain { from, target } => write!(f, "no chain from {from} to {target}"),
            StuckReason::SubtypeExhausted { target } => write!(f, "Z is not a subtype of {target}"),
            StuckReason::NoHaltingChain { from } => write!(f, "{from} does not rewrite to Z"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Halted,
    Stuck(StuckReason),
    Continue {
        next: MachineConfig,
        chain: ChainResult,
    },
    Ambiguous(Vec<ChainResult>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    HaltedAccept,
    Stuck(StuckReason),
    OutOfFuel,
    AmbiguousError,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub steps_taken: u64,
    pub trace: Option<Vec<MachineConfig>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Subtype,
    NotSubtype,
    Unknown,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubtypeError {
    #[error("class table is not deterministic: several chains apply at `{config}`")]
    Ambiguous { config: String },
}

/// A chain over interned ids. `suffix_rev` is the suffix in tower-stack order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawChain {
    pub head: ClassId,
    pub suffix_rev: Vec<ClassId>,
    pub tail: Tail,
    pub rules: Vec<u32>,
}

/// A configuration over interned ids. Towers are stacks: the head is the last
/// element and `Z` is implicit below the bottom.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RawConfig {
    pub lhs: Vec<ClassId>,
    pub rhs: Vec<ClassId>,
}

impl RawConfig {
    pub fn lhs_head(&self) -> ClassId {
        self.lhs.last().copied().unwrap_or(ClassId::Z)
    }

    pub fn rhs_head(&self) -> ClassId {
        self.rhs.last().copied().unwrap_or(ClassId::Z)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Probe {
    Halted,
    Stuck(RawStuck),
    /// Index into the cached chain list for `(lhs head, rhs head)`.
    Next(ChainKey),
    Ambiguous(ChainKey),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RawStuck {
    NoChain { from: ClassId, target: ClassId },
    SubtypeExhausted { target: ClassId },
    NoHaltingChain { from: ClassId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainKey(u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawOutcome {
    HaltedAccept,
    Stuck(RawStuck),
    OutOfFuel,
    Ambiguous,
    /// The observer asked to stop.
    Interrupted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRun {
    pub outcome: RawOutcome,
    pub steps: u64,
}

/// Interpreter over one class table with a memo of chain searches.
pub struct Engine<'a> {
    ct: &'a ClassTable,
    /// Rules whose head has rules of its own, by left-hand side.
    inner: Vec<Vec<u32>>,
    /// The other rules as `(lhs, head, rule)`, sorted, for direct lookup of
    /// the only head that can end a chain there: the target.
    leaves: Vec<(ClassId, ClassId, u32)>,
    extra: HashMap<String, ClassId>,
    extra_names: Vec<String>,
    memo: FxHashMap<(ClassId, ClassId), ChainKey>,
    chains: Vec<Vec<RawChain>>,
}

impl<'a> Engine<'a> {
    pub fn new(ct: &'a ClassTable) -> Self {
        let mut has_rules = vec![false; ct.id_count()];
        for r in ct.rules() {
            has_rules[r.lhs.index()] = true;
        }
        let mut inner = vec![Vec::new(); ct.id_count()];
        let mut leaves = Vec::new();
        for (i, r) in ct.rules().iter().enumerate() {
            if has_rules[r.head().index()] {
                inner[r.lhs.index()].push(i as u32);
            } else {
                leaves.push((r.lhs, r.head(), i as u32));
            }
        }
        leaves.sort_unstable();
        Engine {
            ct,
            inner,
            leaves,
            extra: HashMap::new(),
            extra_names: Vec::new(),
            memo: FxHashMap::default(),
            chains: Vec::new(),
        }
    }

    pub fn table(&self) -> &'a ClassTable {
        self.ct
    }

    /// Id for `name`; names absent from the table get fresh ids with no rules.
    pub fn intern(&mut self, name: &str) -> ClassId {
        if let Some(id) = self.ct.id(name) {
            return id;
        }
        if let Some(&id) = self.extra.get(name) {
            return id;
        }
        let id = ClassId((self.ct.id_count() + self.extra_names.len()) as u32);
        self.extra.insert(name.to_string(), id);
        self.extra_names.push(name.to_string());
        id
    }

    pub fn name(&self, id: ClassId) -> &str {
        let n = self.ct.id_count();
        if id.index() < n {
            self.ct.name(id)
        } else {
            &self.extra_names[id.index() - n]
        }
    }

    pub fn raw_tower(&mut self, t: &TypeTower) -> Vec<ClassId> {
        t.classes.iter().rev().map(|c| self.intern(c)).collect()
    }

    pub fn raw_config(&mut self, cfg: &MachineConfig) -> RawConfig {
        RawConfig {
            lhs: self.raw_tower(&cfg.lhs),
            rhs: self.raw_tower(&cfg.rhs),
        }
    }

    pub fn tower(&self, stack: &[ClassId]) -> TypeTower {
        TypeTower {
            classes: stack
                .iter()
                .rev()
                .map(|&c| self.name(c).to_string())
                .collect(),
        }
    }

    pub fn config(&self, raw: &RawConfig) -> MachineConfig {
        MachineConfig {
            lhs: self.tower(&raw.lhs),
            rhs: self.tower(&raw.rhs),
        }
    }

    pub fn chains(&mut self, from: ClassId, target: ClassId) -> (ChainKey, &[RawChain]) {
        let key = match self.memo.get(&(from, target)) {
            Some(&k) => k,
            None => {
                let found = self.search(from, target);
                let k = ChainKey(self.chains.len() as u32);
                self.chains.push(found);
                self.memo.insert((from, target), k);
                k
            }
        };
        (key, &self.chains[key.0 as usize])
    }

    pub fn chain_list(&self, key: ChainKey) -> &[RawChain] {
        &self.chains[key.0 as usize]
    }

    fn search(&self, from: ClassId, target: ClassId) -> Vec<RawChain> {
        let mut out = Vec::new();
        let mut on_path = vec![from];
        let start = RawChain {
            head: from,
            suffix_rev: Vec::new(),
            tail: Tail::Var,
            rules: Vec::new(),
        };
        self.dfs(start, target, &mut on_path, &mut out);
        out
    }

    fn dfs(
        &self,
        cur: RawChain,
        target: ClassId,
        on_path: &mut Vec<ClassId>,
        out: &mut Vec<RawChain>,
    ) {
        if cur.head == target {
            out.push(cur);
            return;
        }
        let inner = self
            .inner
            .get(cur.head.index())
            .map_or(&[][..], Vec::as_slice);
        let lo = self
            .leaves
            .partition_point(|&(l, h, _)| (l, h) < (cur.head, target));
        let hi = lo + self.leaves[lo..].partition_point(|&(l, h, _)| (l, h) == (cur.head, target));
        let direct = self.leaves[lo..hi].iter().map(|&(_, _, r)| r);
        let mut rules: Vec<u32> = inner.iter().copied().chain(direct).collect();
        if hi > lo && !inner.is_empty() {
            rules.sort_unstable();
        }
        for ri in rules {
            let rule = &self.ct.rules()[ri as usize];
            let head = rule.head();
            if on_path.contains(&head) {
                continue;
            }
            let mut suffix_rev: Vec<ClassId> = match rule.tail {
                Tail::Var => cur.suffix_rev.clone(),
                Tail::Ground => Vec::new(),
            };
            suffix_rev.extend(rule.rhs.iter().skip(1).rev());
            let tail = if rule.tail == Tail::Ground {
                Tail::Ground
            } else {
                cur.tail
            };
            let mut rules_applied = cur.rules.clone();
            rules_applied.push(ri);
            on_path.push(head);
            self.dfs(
                RawChain {
                    head,
                    suffix_rev,
                    tail,
                    rules: rules_applied,
                },
                target,
                on_path,
                out,
            );
            on_path.pop();
        }
    }

    /// Decides what the next step would do without changing `cfg`.
    pub fn probe(&mut self, cfg: &RawConfig) -> Probe {
        let from = cfg.lhs_head();
        if cfg.rhs.is_empty() {
            if cfg.lhs.is_empty() {
                return Probe::Halted;
            }
            let (_, found) = self.chains(from, ClassId::Z);
            return if found.is_empty() {
                Probe::Stuck(RawStuck::NoHaltingChain { from })
            } else {
                Probe::Halted
            };
        }
        let target = cfg.rhs_head();
        if cfg.lhs.is_empty() {
            return Probe::Stuck(RawStuck::SubtypeExhausted { target });
        }
        let (key, found) = self.chains(from, target);
        match found.len() {
            0 => Probe::Stuck(RawStuck::NoChain { from, target }),
            1 => Probe::Next(key),
            _ => {
                let lhs_tail_empty = cfg.lhs.len() == 1;
                let first = &found[0];
                let same = found.iter().all(|c| {
                    c.suffix_rev == first.suffix_rev && (c.tail == first.tail || lhs_tail_empty)
                });
                if same {
                    Probe::Next(key)
                } else {
                    Probe::Ambiguous(key)
                }
            }
        }
    }

    /// Applies the first chain stored under `key` to `cfg` in place.
    pub fn apply(&self, cfg: &mut RawConfig, key: ChainKey) {
        let chain = &self.chains[key.0 as usize][0];
        let mut lhs = std::mem::take(&mut cfg.lhs);
        let mut rhs = std::mem::take(&mut cfg.rhs);
        lhs.pop();
        rhs.pop();
        if chain.tail == Tail::Ground {
            lhs.clear();
        }
        lhs.extend_from_slice(&chain.suffix_rev);
        cfg.lhs = rhs;
        cfg.rhs = lhs;
    }

    /// Runs from `cfg`, calling `observe` on the initial configuration and after
    /// every step. At most `fuel` steps are taken.
    pub fn run_with<F>(&mut self, cfg: &mut RawConfig, fuel: u64, mut observe: F) -> RawRun
    where
        F: FnMut(&Engine<'a>, &RawConfig, u64) -> ControlFlow<()>,
    {
        let mut steps = 0u64;
        if observe(self, cfg, 0).is_break() {
            return RawRun {
                outcome: RawOutcome::Interrupted,
                steps,
            };
        }
        loop {
            let outcome = match self.probe(cfg) {
                Probe::Halted => RawOutcome::HaltedAccept,
                Probe::Stuck(r) => RawOutcome::Stuck(r),
                Probe::Ambiguous(_) => RawOutcome::Ambiguous,
                Probe::Next(_) if steps == fuel => RawOutcome::OutOfFuel,
                Probe::Next(key) => {
                    self.apply(cfg, key);
                    steps += 1;
                    if observe(self, cfg, steps).is_break() {
                        return RawRun {
                            outcome: RawOutcome::Interrupted,
                            steps,
                        };
                    }
                    continue;
                }
            };
            return RawRun { outcome, steps };
        }
    }

    pub fn chain_result(&self, chain: &RawChain) -> ChainResult {
        ChainResult {
            consumed_head: self.name(chain.head).to_string(),
            suffix: chain
                .suffix_rev
                .iter()
                .rev()
                .map(|&c| self.name(c).to_string())
                .collect(),
            tail: chain.tail,
            rules_applied: chain.rules.iter().map(|&r| r as usize).collect(),
        }
    }

    pub fn stuck_reason(&self, r: RawStuck) -> StuckReason {
        match r {
            RawStuck::NoChain { from, target } => StuckReason::NoChain {
                from: self.name(from).to_string(),
                target: self.name(target).to_string(),
            },
            RawStuck::SubtypeExhausted { target } => StuckReason::SubtypeExhausted {
                target: self.name(target).to_string(),
            },
            RawStuck::NoHaltingChain { from } => StuckReason::NoHaltingChain {
                from: self.name(from).to_string(),
            },
        }
    }
}

/// Every derivation `from x <:* target suffix (x|Z)`.
pub fn chain_search(ct: &ClassTable, from: &str, target: &str) -> Vec<ChainResult> {
    let mut eng = Engine::new(ct);
    let (f, t) = (eng.intern(from), eng.intern(target));
    let (key, _) = eng.chains(f, t);
    eng.chain_list(key)
        .iter()
        .map(|c| eng.chain_result(c))
        .collect()
}

pub fn step(ct: &ClassTable, cfg: &MachineConfig) -> StepOutcome {
    let mut eng = Engine::new(ct);
    let mut raw = eng.raw_config(cfg);
    match eng.probe(&raw) {
        Probe::Halted => StepOutcome::Halted,
        Probe::Stuck(r) => StepOutcome::Stuck(eng.stuck_reason(r)),
        Probe::Ambiguous(key) => StepOutcome::Ambiguous(
            eng.chain_list(key)
                .iter()
                .map(|c| eng.chain_result(c))
                .collect(),
        ),
        Probe::Next(key) => {
            let chain = eng.chain_result(&eng.chain_list(key)[0]);
            eng.apply(&mut raw, key);
            StepOutcome::Continue {
                next: eng.config(&raw),
                chain,
            }
        }
    }
}

pub fn run(ct: &ClassTable, q: &SubtypeQuery, fuel: u64, want_trace: bool) -> RunResult {
    let mut eng = Engine::new(ct);
    let mut raw = eng.raw_config(&MachineConfig::new(q.subtype.clone(), q.supertype.clone()));
    let mut trace = want_trace.then(Vec::new);
    let res = eng.run_with(&mut raw, fuel, |e, c, _| {
        if let Some(t) = trace.as_mut() {
            t.push(e.config(c));
        }
        ControlFlow::Continue(())
    });
    let outcome = match res.outcome {
        RawOutcome::HaltedAccept => RunOutcome::HaltedAccept,
        RawOutcome::Stuck(r) => RunOutcome::Stuck(eng.stuck_reason(r)),
        RawOutcome::OutOfFuel => RunOutcome::OutOfFuel,
        RawOutcome::Ambiguous => RunOutcome::AmbiguousError,
        RawOutcome::Interrupted => unreachable!("observer never breaks"),
    };
    RunResult {
        outcome,
        steps_taken: res.steps,
        trace,
    }
}

pub fn decide_subtype(
    ct: &ClassTable,
    t1: &TypeTower,
    t2: &TypeTower,
    fuel: u64,
) -> Result<Decision, SubtypeError> {
    let mut eng = Engine::new(ct);
    let mut raw = eng.raw_config(&MachineConfig::new(t1.clone(), t2.clone()));
    let res = eng.run_with(&mut raw, fuel, |_, _, _| ControlFlow::Continue(()));
    match res.outcome {
        RawOutcome::HaltedAccept => Ok(Decision::Subtype),
        RawOutcome::Stuck(_) => Ok(Decision::NotSubtype),
        RawOutcome::OutOfFuel | RawOutcome::Interrupted => Ok(Decision::Unknown),
        RawOutcome::Ambiguous => Err(SubtypeError::Ambiguous {
            config: eng.config(&raw).to_string(),
        }),
    }
}
