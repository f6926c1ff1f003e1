//! Compilation of an extended Turing machine into a class table whose
//! subtyping machine simulates it, plus the way back from subtyping
//! configurations to machine configurations.

mod java;

pub use java::{
    builder_method_name, emit_builder, emit_java_file, emit_java_interfaces, emit_query_harness,
    render_rule_java, render_tower_java,
};

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::classtable::{ClassId, ClassTable, InheritanceRule, SubtypeQuery, Tail, TypeTower};
use crate::subtyper::RawConfig;
use crate::turing::{Cell, Dir, ExtendedTM, LetterId, StateId, TmConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    WL,
    WR,
    L,
    R,
    LR,
    RL,
}

impl Role {
    pub const ALL: [Role; 6] = [Role::WL, Role::WR, Role::L, Role::R, Role::LR, Role::RL];

    pub fn tag(self) -> &'static str {
        match self {
            Role::WL => "wL",
            Role::WR => "wR",
            Role::L => "L",
            Role::R => "R",
            Role::LR => "LR",
            Role::RL => "RL",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// What a class of a generated table stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Z,
    N,
    E,
    ML,
    MR,
    /// `L_#`, the tape endpoint.
    Hash,
    Letter(LetterId),
    State(StateId, Role),
}

pub const N: &str = "N";
pub const E: &str = "E";
pub const ML: &str = "ML";
pub const MR: &str = "MR";
pub const HASH: &str = "L_hash";

/// Escapes everything outside `[A-Za-z0-9]` as `_xx` (hex bytes). A symbol
/// spelled `hash` is escaped too, keeping `L_hash` free for the endpoint.
pub fn mangle(sym: &str) -> String {
    if sym == "hash" {
        return "_68ash".into();
    }
    let mut out = String::with_capacity(sym.len());
    for b in sym.bytes() {
        if b.is_ascii_alphanumeric() {
            out.push(b as char);
        } else {
            out.push_str(&format!("_{b:02x}"));
        }
    }
    out
}

pub fn state_class_name(state: &str, role: Role) -> String {
    format!("Q{}_{}", role.tag(), mangle(state))
}

pub fn letter_class_name(letter: &str) -> String {
    format!("L_{}", mangle(letter))
}

#[derive(Clone, Debug)]
pub struct ReductionNaming {
    pub n: ClassId,
    pub e: ClassId,
    pub ml: ClassId,
    pub mr: ClassId,
    pub hash: ClassId,
    pub letters: Vec<ClassId>,
    states: Vec<[ClassId; 6]>,
    kinds: Vec<ClassKind>,
    by_name: HashMap<String, ClassId>,
}

impl ReductionNaming {
    fn build(m: &ExtendedTM, ct: &mut ClassTable) -> Self {
        let mut kinds = vec![ClassKind::Z];
        let mut by_name = HashMap::new();
        let mut reg = |ct: &mut ClassTable, name: String, kind: ClassKind| {
            let id = ct.intern(&name);
            debug_assert_eq!(id.index(), kinds.len(), "class name collision on {name}");
            kinds.push(kind);
            by_name.insert(name, id);
            id
        };
        let n = reg(ct, N.into(), ClassKind::N);
        let e = reg(ct, E.into(), ClassKind::E);
        let ml = reg(ct, ML.into(), ClassKind::ML);
        let mr = reg(ct, MR.into(), ClassKind::MR);
        let hash = reg(ct, HASH.into(), ClassKind::Hash);
        let letters = m
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, l)| {
                reg(
                    ct,
                    letter_class_name(l.as_str()),
                    ClassKind::Letter(LetterId(i as u32)),
                )
            })
            .collect();
        let states = m
            .state_ids()
            .map(|s| {
                Role::ALL.map(|r| {
                    reg(
                        ct,
                        state_class_name(m.state_name(s), r),
                        ClassKind::State(s, r),
                    )
                })
            })
            .collect();
        by_name.insert(crate::classtable::Z.into(), ClassId::Z);
        ReductionNaming {
            n,
            e,
            ml,
            mr,
            hash,
            letters,
            states,
            kinds,
            by_name,
        }
    }

    pub fn state(&self, s: StateId, role: Role) -> ClassId {
        self.states[s.0 as usize][role.index()]
    }

    pub fn letter(&self, l: LetterId) -> ClassId {
        self.letters[l.0 as usize]
    }

    pub fn cell(&self, c: Cell) -> ClassId {
        match c {
            Cell::Blank => self.hash,
            Cell::Letter(l) => self.letter(l),
        }
    }

    pub fn kind(&self, id: ClassId) -> Option<ClassKind> {
        self.kinds.get(id.index()).copied()
    }

    pub fn kind_of_name(&self, name: &str) -> Option<ClassKind> {
        self.by_name.get(name).and_then(|&id| self.kind(id))
    }

    pub fn id_of_name(&self, name: &str) -> Option<ClassId> {
        self.by_name.get(name).copied()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Rules per state: `|Σ|+4` waiting rules for each direction, two turning
/// rules on `E`, and one head rule per direction and readable cell.
pub fn expected_rule_count(m: &ExtendedTM) -> usize {
    m.states.len() * (4 * m.alphabet.len() + 12)
}

pub fn etm_to_classtable(m: &ExtendedTM) -> (ClassTable, ReductionNaming) {
    let mut ct = ClassTable::new();
    let nm = ReductionNaming::build(m, &mut ct);
    let mut push = |lhs: ClassId, rhs: Vec<ClassId>, tail: Tail| {
        ct.push_rule_unchecked(InheritanceRule { lhs, rhs, tail });
    };
    let all_letters: Vec<ClassId> = nm.letters.iter().copied().chain([nm.hash]).collect();

    for s in m.state_ids() {
        for side in [Side::Left, Side::Right] {
            let (wait, head, turn, back, same, other) = match side {
                Side::Left => (Role::WL, Role::L, Role::LR, Role::WR, nm.ml, nm.mr),
                Side::Right => (Role::WR, Role::R, Role::RL, Role::WL, nm.mr, nm.ml),
            };
            let qw = nm.state(s, wait);
            push(qw, vec![same, nm.n, nm.state(s, head)], Tail::Var);
            push(qw, vec![other, nm.n, qw, other, nm.n], Tail::Var);
            for &l in &all_letters {
                push(qw, vec![l, nm.n, qw, l, nm.n], Tail::Var);
            }
            if s == m.halt {
                push(qw, vec![nm.e, nm.e], Tail::Ground);
            } else {
                push(qw, vec![nm.e, nm.state(s, turn), nm.n], Tail::Var);
            }
            let qt = nm.state(s, turn);
            push(
                nm.e,
                vec![qt, nm.n, nm.state(s, back), nm.e, nm.e],
                Tail::Var,
            );

            for c in m.cells() {
                let t = m.delta(s, c);
                let dir = match (side, t.dir) {
                    (Side::Left, d) => d,
                    (Side::Right, Dir::L) => Dir::R,
                    (Side::Right, Dir::R) => Dir::L,
                    (Side::Right, Dir::S) => Dir::S,
                };
                let mut beta: Vec<ClassId> = Vec::with_capacity(2 * t.write.len());
                let written: Box<dyn Iterator<Item = &LetterId>> = match side {
                    Side::Left => Box::new(t.write.iter()),
                    Side::Right => Box::new(t.write.iter().rev()),
                };
                for &l in written {
                    beta.push(nm.letter(l));
                    beta.push(nm.n);
                }
                let mut rhs = vec![nm.cell(c), nm.n, nm.state(t.to, wait)];
                if c == Cell::Blank {
                    rhs.extend([nm.hash, nm.n]);
                }
                match dir {
                    Dir::L => {
                        rhs.extend([same, nm.n]);
                        rhs.extend(beta);
                    }
                    Dir::S => {
                        rhs.extend([other, nm.n]);
                        rhs.extend(beta);
                    }
                    Dir::R => {
                        rhs.extend(beta);
                        rhs.extend([other, nm.n]);
                    }
                }
                push(nm.state(s, head), rhs, Tail::Var);
            }
        }
    }
    debug_assert_eq!(ct.rules().len(), expected_rule_count(m));
    (ct, nm)
}

/// `Q_I^wR L_# N L_am N ... L_a1 N ML N L_# N E E Z  <:  E E Z`.
pub fn initial_tower_ids(m: &ExtendedTM, nm: &ReductionNaming, input: &[LetterId]) -> Vec<ClassId> {
    let mut t = vec![nm.state(m.initial, Role::WR), nm.hash, nm.n];
    for &a in input.iter().rev() {
        t.extend([nm.letter(a), nm.n]);
    }
    t.extend([nm.ml, nm.n, nm.hash, nm.n, nm.e, nm.e]);
    t
}

pub fn initial_query(
    m: &ExtendedTM,
    ct: &ClassTable,
    nm: &ReductionNaming,
    input: &[LetterId],
) -> SubtypeQuery {
    let ids = initial_tower_ids(m, nm, input);
    SubtypeQuery {
        subtype: ct.tower_from_ids(&ids),
        supertype: ct.tower_from_ids(&[nm.e, nm.e]),
    }
}

/// The raw starting configuration for [`crate::subtyper::Engine`].
pub fn initial_raw_config(m: &ExtendedTM, nm: &ReductionNaming, input: &[LetterId]) -> RawConfig {
    let mut lhs = initial_tower_ids(m, nm, input);
    lhs.reverse();
    RawConfig {
        lhs,
        rhs: vec![nm.e, nm.e],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadSide {
    /// The simulated head is on a letter left of the subtyping head.
    LeftOfGap,
    RightOfGap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimulatedView {
    Transient,
    Simulated {
        tm_config: TmConfig,
        /// Number of tape letters (endpoints included) left of the subtyping head.
        head_gap: usize,
        head_side: HeadSide,
        waiting: bool,
    },
}

impl SimulatedView {
    pub fn tm_config(&self) -> Option<&TmConfig> {
        match self {
            SimulatedView::Transient => None,
            SimulatedView::Simulated { tm_config, .. } => Some(tm_config),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("unrecognized configuration: {0}")]
    Unrecognized(String),
}

fn unrecognized(msg: impl fmt::Display) -> ClassifyError {
    ClassifyError::Unrecognized(msg.to_string())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Item {
    Letter(Cell),
    Marker(ClassKind),
}

/// Reads one side of the tape: stack order is gap-outwards, i.e. `(X N)* E E`
/// with `X` topmost at the end of the slice reversed.
fn read_side(
    nm: &ReductionNaming,
    stack: &[ClassId],
    out: &mut Vec<Item>,
) -> Result<(), ClassifyError> {
    let [e1, e2, rest @ ..] = stack else {
        return Err(unrecognized("tape side does not end in E E Z"));
    };
    if *e1 != nm.e || *e2 != nm.e {
        return Err(unrecognized("tape side does not end in E E Z"));
    }
    if rest.len() % 2 != 0 {
        return Err(unrecognized("tape side is not a sequence of X N pairs"));
    }
    for pair in rest.rchunks_exact(2) {
        let (n, x) = (pair[0], pair[1]);
        if n != nm.n {
            return Err(unrecognized("expected N after a tape symbol"));
        }
        out.push(match nm.kind(x) {
            Some(ClassKind::Letter(l)) => Item::Letter(Cell::Letter(l)),
            Some(ClassKind::Hash) => Item::Letter(Cell::Blank),
            Some(k @ (ClassKind::ML | ClassKind::MR)) => Item::Marker(k),
            _ => return Err(unrecognized("unexpected class on the tape")),
        });
    }
    Ok(())
}

/// Maps a configuration of the generated subtyping machine back to the machine
/// configuration it simulates.
pub fn classify_raw(nm: &ReductionNaming, cfg: &RawConfig) -> Result<SimulatedView, ClassifyError> {
    let mut c = Classifier::new();
    Ok(match c.scan(nm, cfg)? {
        Scan::Transient => SimulatedView::Transient,
        Scan::Simulated {
            head_gap,
            head_side,
            waiting,
        } => SimulatedView::Simulated {
            tm_config: c.config,
            head_gap,
            head_side,
            waiting,
        },
    })
}

enum Scan {
    Transient,
    Simulated {
        head_gap: usize,
        head_side: HeadSide,
        waiting: bool,
    },
}

/// [`classify_raw`] with buffers kept between calls, for checking every
/// configuration of a long run.
pub struct Classifier {
    items: Vec<Item>,
    letters: Vec<Cell>,
    config: TmConfig,
}

impl Default for Classifier {
    fn default() -> Self {
        Self::new()
    }
}

impl Classifier {
    pub fn new() -> Self {
        Classifier {
            items: Vec::new(),
            letters: Vec::new(),
            config: TmConfig::new(StateId(0), Vec::new(), Cell::Blank, Vec::new()),
        }
    }

    /// The simulated machine configuration, or `None` for a transient one.
    /// The reference is valid until the next call.
    pub fn classify(
        &mut self,
        nm: &ReductionNaming,
        cfg: &RawConfig,
    ) -> Result<Option<&TmConfig>, ClassifyError> {
        Ok(match self.scan(nm, cfg)? {
            Scan::Transient => None,
            Scan::Simulated { .. } => Some(&self.config),
        })
    }

    fn scan(&mut self, nm: &ReductionNaming, cfg: &RawConfig) -> Result<Scan, ClassifyError> {
        let (mut lhs, mut rhs): (&[ClassId], &[ClassId]) = (&cfg.lhs, &cfg.rhs);
        if cfg.lhs_head() == nm.n && cfg.rhs_head() == nm.n {
            (lhs, rhs) = (&rhs[..rhs.len() - 1], &lhs[..lhs.len() - 1]);
        }
        let mut has_state = false;
        for &c in lhs.iter().chain(rhs) {
            match nm.kind(c) {
                Some(ClassKind::State(_, Role::LR | Role::RL)) => return Ok(Scan::Transient),
                Some(ClassKind::State(..)) => has_state = true,
                Some(_) => {}
                None => return Err(unrecognized("class outside the generated table")),
            }
        }
        if !has_state {
            let wind_down = lhs.iter().chain(rhs).all(|&c| c == nm.e);
            return if wind_down {
                Ok(Scan::Transient)
            } else {
                Err(unrecognized("no state class"))
            };
        }
        let Some((&head, lhs_tail)) = lhs.split_last() else {
            return Err(unrecognized("empty subtype"));
        };
        let Some(ClassKind::State(state, role)) = nm.kind(head) else {
            return Err(unrecognized("subtype is not headed by a state class"));
        };
        let (left_side, right_side) = match role {
            Role::WL | Role::L => (rhs, lhs_tail),
            _ => (lhs_tail, rhs),
        };
        let items = &mut self.items;
        items.clear();
        read_side(nm, left_side, items)?;
        items.reverse();
        let gap = items.len();
        read_side(nm, right_side, items)?;

        let mut markers = items
            .iter()
            .enumerate()
            .filter(|(_, it)| matches!(it, Item::Marker(_)))
            .map(|(i, _)| i);
        let (first_marker, more_markers) = (markers.next(), markers.next().is_some());
        let waiting = matches!(role, Role::WL | Role::WR);
        let letter_at = |i: Option<usize>| {
            i.and_then(|i| items.get(i))
                .filter(|it| matches!(it, Item::Letter(_)))
        };
        // Position (in `items`) of the simulated head.
        let head_item = if waiting {
            let (Some(m), false) = (first_marker, more_markers) else {
                return Err(unrecognized(
                    "a waiting configuration needs exactly one marker",
                ));
            };
            let pos = match items[m] {
                Item::Marker(ClassKind::ML) => m.checked_sub(1),
                _ => Some(m + 1),
            };
            letter_at(pos).and(pos)
        } else {
            if first_marker.is_some() {
                return Err(unrecognized("marker present while the head is on the tape"));
            }
            let pos = if role == Role::L {
                gap.checked_sub(1)
            } else {
                Some(gap)
            };
            letter_at(pos).and(pos)
        };
        let Some(head_item) = head_item else {
            return Err(unrecognized("no letter under the simulated head"));
        };
        let head_side = if head_item < gap {
            HeadSide::LeftOfGap
        } else {
            HeadSide::RightOfGap
        };

        let letters = &mut self.letters;
        letters.clear();
        let mut head_ix = 0;
        let mut gap_letters = 0;
        for (i, it) in items.iter().enumerate() {
            if i == gap {
                gap_letters = letters.len();
            }
            if i == head_item {
                head_ix = letters.len();
            }
            if let Item::Letter(c) = it {
                letters.push(*c);
            }
        }
        if gap == items.len() {
            gap_letters = letters.len();
        }
        let k = letters.len();
        if k < 2 || letters[0] != Cell::Blank || letters[k - 1] != Cell::Blank {
            return Err(unrecognized("tape is not delimited by endpoints"));
        }
        let interior = &letters[1..k - 1];
        if interior.contains(&Cell::Blank) {
            return Err(unrecognized("endpoint inside the tape"));
        }
        let id = |c: &Cell| match c {
            Cell::Letter(l) => *l,
            Cell::Blank => unreachable!(),
        };
        // A head on an endpoint reads the blank just outside the interior.
        let tm = &mut self.config;
        tm.state = state;
        tm.left.clear();
        tm.left.extend(letters[1..head_ix.max(1)].iter().map(id));
        tm.current = if head_ix == 0 || head_ix == k - 1 {
            Cell::Blank
        } else {
            letters[head_ix]
        };
        tm.right_rev.clear();
        tm.right_rev.extend(
            letters[(head_ix + 1).min(k - 1)..k - 1]
                .iter()
                .rev()
                .map(id),
        );
        Ok(Scan::Simulated {
            head_gap: gap_letters,
            head_side,
            waiting,
        })
    }
}

pub fn classify_config(
    nm: &ReductionNaming,
    cfg: &crate::subtyper::MachineConfig,
) -> Result<SimulatedView, ClassifyError> {
    let stack = |t: &TypeTower| -> Result<Vec<ClassId>, ClassifyError> {
        t.classes
            .iter()
            .rev()
            .map(|c| {
                nm.id_of_name(c)
                    .ok_or_else(|| unrecognized(format!("unknown class {c}")))
            })
            .collect()
    };
    let raw = RawConfig {
        lhs: stack(&cfg.lhs)?,
        rhs: stack(&cfg.rhs)?,
    };
    classify_raw(nm, &raw)
}

/// True when the subtype head names a spin state of `m`, i.e. the simulated
/// machine can no longer halt.
pub fn in_spin_state(m: &ExtendedTM, nm: &ReductionNaming, cfg: &RawConfig) -> bool {
    match nm.kind(cfg.lhs_head()) {
        Some(ClassKind::State(s, _)) => m.is_spin_state(s),
        _ => false,
    }
}
