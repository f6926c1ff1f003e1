use std::collections::HashMap;

use super::lower::Ir;
use super::{
    dim_close, dim_open, sym_letter, zone_close, zone_open, Layout, BIT0, BIT1, MARK_DN, MARK_POS,
    MARK_UP,
};
use crate::simper::SimperType;
use crate::turing::{Dir, ExtendedTM, LetterId, StateId, TmTransition, REJECT};

type Q = usize;
type Row = Vec<Option<(Vec<u32>, Dir, Q)>>;

/// Head position between instructions, as `3 * zone + k` with `k` 0 on the
/// opening marker, 2 on the closing one and 1 anywhere in between.
type Pos = usize;

fn open_at(z: usize) -> Pos {
    3 * z
}

fn close_at(z: usize) -> Pos {
    3 * z + 2
}

fn inside(z: usize) -> Pos {
    3 * z + 1
}

fn toward(from: usize, to: usize) -> Dir {
    if to > from {
        Dir::R
    } else {
        Dir::L
    }
}

struct Gen<'a> {
    lay: &'a Layout,
    blank: u32,
    rows: Vec<Row>,
    alias: Vec<Option<Q>>,
    reject: Q,
    halt: Q,
    b0: u32,
    b1: u32,
    syms: Vec<u32>,
    zl: Vec<u32>,
    zr: Vec<u32>,
    dl: Vec<u32>,
    dr: Vec<u32>,
    mdn: u32,
    mup: u32,
    mpos: u32,
}

impl<'a> Gen<'a> {
    fn new(lay: &'a Layout) -> Self {
        let letters = lay.alphabet();
        let id: HashMap<&str, u32> = letters
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let at = |s: &str| id[s];
        let mut g = Gen {
            lay,
            blank: letters.len() as u32,
            rows: Vec::new(),
            alias: Vec::new(),
            reject: 0,
            halt: 0,
            b0: at(BIT0),
            b1: at(BIT1),
            syms: lay.syms.iter().map(|s| at(&sym_letter(s))).collect(),
            zl: lay.zones.iter().map(|(x, _)| at(&zone_open(x))).collect(),
            zr: lay.zones.iter().map(|(x, _)| at(&zone_close(x))).collect(),
            dl: (0..lay.max_dim).map(|k| at(&dim_open(k))).collect(),
            dr: (0..lay.max_dim).map(|k| at(&dim_close(k))).collect(),
            mdn: at(MARK_DN),
            mup: at(MARK_UP),
            mpos: at(MARK_POS),
        };
        g.reject = g.fresh();
        g.halt = g.fresh();
        g
    }

    fn fresh(&mut self) -> Q {
        self.rows.push(vec![None; self.blank as usize + 1]);
        self.alias.push(None);
        self.rows.len() - 1
    }

    fn set(&mut self, s: Q, read: u32, write: Vec<u32>, dir: Dir, to: Q) {
        debug_assert!(write.len() <= 2);
        let slot = &mut self.rows[s][read as usize];
        assert!(slot.is_none(), "transition defined twice");
        *slot = Some((write, dir, to));
    }

    fn keep(&mut self, s: Q, read: u32, dir: Dir, to: Q) {
        let write = if read == self.blank {
            vec![]
        } else {
            vec![read]
        };
        self.set(s, read, write, dir, to);
    }

    fn alias(&mut self, from: Q, to: Q) {
        debug_assert!(self.rows[from].iter().all(Option::is_none));
        self.alias[from] = Some(to);
    }

    /// Moves in `dir` until `target`, stopping on it.
    fn seek(&mut self, s: Q, target: u32, dir: Dir) -> Q {
        let e = self.fresh();
        for c in 0..self.blank {
            if c == target {
                self.keep(s, c, Dir::S, e);
            } else {
                self.keep(s, c, dir, s);
            }
        }
        e
    }

    /// One step in `dir` whatever the cell holds.
    fn step(&mut self, s: Q, dir: Dir) -> Q {
        let e = self.fresh();
        for c in 0..=self.blank {
            self.keep(s, c, dir, e);
        }
        e
    }

    fn go_open(&mut self, s: Q, pos: &mut Pos, z: usize) -> Q {
        self.go(s, pos, open_at(z), self.zl[z])
    }

    fn go_close(&mut self, s: Q, pos: &mut Pos, z: usize) -> Q {
        self.go(s, pos, close_at(z), self.zr[z])
    }

    fn go(&mut self, s: Q, pos: &mut Pos, target: Pos, letter: u32) -> Q {
        if *pos == target {
            return s;
        }
        let dir = toward(*pos, target);
        *pos = target;
        self.seek(s, letter, dir)
    }

    fn zone_type(&self, z: usize) -> &SimperType {
        &self.lay.zones[z].1
    }

    fn scalar_letters(&self, t: &SimperType) -> Vec<u32> {
        match t {
            SimperType::Nat => vec![self.b0, self.b1],
            SimperType::Sym => self.syms.clone(),
            _ => vec![],
        }
    }

    /// Letters that may sit inside zone `z`.
    fn content(&self, z: usize) -> Vec<u32> {
        match self.zone_type(z) {
            SimperType::Array(k, e) => {
                let mut v = self.scalar_letters(e);
                v.extend(&self.dl[..*k as usize]);
                v.extend(&self.dr[..*k as usize]);
                v
            }
            t => self.scalar_letters(t),
        }
    }

    /// From `zl_z`: empties the zone, ending on `zr_z`.
    fn clear(&mut self, s: Q, pos: &mut Pos, z: usize) -> Q {
        let (c, e) = (self.fresh(), self.fresh());
        self.keep(s, self.zl[z], Dir::R, c);
        for l in self.content(z) {
            self.set(c, l, vec![], Dir::R, c);
        }
        self.keep(c, self.zr[z], Dir::S, e);
        *pos = close_at(z);
        e
    }

    /// From `zr_z`: writes `letters` at the end of the zone.
    fn append(&mut self, mut s: Q, z: usize, letters: &[u32]) -> Q {
        for &l in letters {
            let t = self.fresh();
            self.set(s, self.zr[z], vec![l, self.zr[z]], Dir::R, t);
            s = self.step(t, Dir::L);
        }
        s
    }

    /// From `zl_z` of a scalar zone: faults on an empty zone, else returns
    /// to `zl_z`.
    fn nonempty(&mut self, s: Q, z: usize) -> Q {
        let (c, e) = (self.fresh(), self.fresh());
        self.keep(s, self.zl[z], Dir::R, c);
        for l in self.content(z) {
            self.keep(c, l, Dir::L, e);
        }
        e
    }

    fn set_letters(&mut self, s: Q, pos: &mut Pos, z: usize, letters: &[u32]) -> Q {
        let s = self.go_open(s, pos, z);
        let s = self.clear(s, pos, z);
        self.append(s, z, letters)
    }

    fn inc(&mut self, s: Q, pos: &mut Pos, z: usize) -> Q {
        let s = self.go_open(s, pos, z);
        let (i0, i1, e) = (self.fresh(), self.fresh(), self.fresh());
        let (b0, b1, zr) = (self.b0, self.b1, self.zr[z]);
        self.keep(s, self.zl[z], Dir::R, i0);
        for i in [i0, i1] {
            self.set(i, b0, vec![b1], Dir::S, e);
            self.set(i, b1, vec![b0], Dir::R, i1);
        }
        self.set(i1, zr, vec![b1, zr], Dir::L, e);
        *pos = inside(z);
        e
    }

    /// Decrements unless zero; returns the exits for zero and for a
    /// decrement, both inside the zone.
    fn dectest(&mut self, s: Q, pos: &mut Pos, z: usize) -> (Q, Q) {
        let s = self.go_open(s, pos, z);
        let (b0, b1, zr) = (self.b0, self.b1, self.zr[z]);
        let [d0, z0, bw, d1, chk, del, zero, dec] = [(); 8].map(|_| self.fresh());
        self.keep(s, self.zl[z], Dir::R, d0);
        self.keep(d0, b0, Dir::R, z0);
        self.set(d0, b1, vec![b0], Dir::S, dec);
        self.keep(z0, zr, Dir::S, zero);
        self.keep(z0, b0, Dir::L, bw);
        self.keep(z0, b1, Dir::L, bw);
        self.set(bw, b0, vec![b1], Dir::R, d1);
        self.set(d1, b0, vec![b1], Dir::R, d1);
        self.set(d1, b1, vec![b0], Dir::R, chk);
        self.keep(chk, zr, Dir::L, del);
        self.keep(chk, b0, Dir::S, dec);
        self.keep(chk, b1, Dir::S, dec);
        self.set(del, b0, vec![], Dir::R, dec);
        *pos = inside(z);
        (zero, dec)
    }

    /// `x := y` for distinct zones of equal type.
    fn copy(&mut self, s: Q, pos: &mut Pos, x: usize, y: usize) -> Q {
        let s = self.go_open(s, pos, x);
        let s = self.clear(s, pos, x);
        let mut s = self.go_open(s, pos, y);
        if self.zone_type(y).is_scalar() {
            s = self.nonempty(s, y);
        }
        let (to_x, to_y) = (toward(y, x), toward(x, y));
        let (a, fin, e) = (self.fresh(), self.fresh(), self.fresh());
        self.set(s, self.zl[y], vec![self.zl[y], self.mdn], Dir::R, a);
        self.keep(a, self.zr[y], Dir::L, fin);
        self.set(fin, self.mdn, vec![], Dir::R, e);
        for c in self.content(y) {
            let carry = self.fresh();
            self.set(a, c, vec![], Dir::L, carry);
            let sx = self.fresh();
            self.set(carry, self.mdn, vec![c, self.mdn], to_x, sx);
            let ax = self.seek(sx, self.zr[x], to_x);
            let sy = self.fresh();
            self.set(ax, self.zr[x], vec![c, self.zr[x]], to_y, sy);
            let ay = self.seek(sy, self.mdn, to_y);
            self.keep(ay, self.mdn, Dir::R, a);
        }
        *pos = close_at(y);
        e
    }

    /// Equality of two scalar zones; returns the exits for equal and unequal.
    fn compare(&mut self, s: Q, pos: &mut Pos, x: usize, y: usize) -> (Q, Q) {
        let (x, y) = (x.min(y), x.max(y));
        let s = self.go_open(s, pos, y);
        let s = self.nonempty(s, y);
        let back = self.fresh();
        self.set(s, self.zl[y], vec![self.zl[y], self.mup], Dir::L, back);
        let s = self.seek(back, self.zl[x], Dir::L);
        let s = self.nonempty(s, x);
        let [a, xend, bend, yes, no, drop] = [(); 6].map(|_| self.fresh());
        self.set(s, self.zl[x], vec![self.zl[x], self.mdn], Dir::R, a);
        // x exhausted: equal iff y is exhausted too
        let t = self.fresh();
        self.keep(a, self.zr[x], Dir::L, t);
        self.set(t, self.mdn, vec![], Dir::R, xend);
        let e = self.seek(xend, self.mup, Dir::R);
        self.set(e, self.mup, vec![], Dir::R, bend);
        self.keep(bend, self.zr[y], Dir::S, yes);
        for c in self.content(y) {
            self.keep(bend, c, Dir::S, no);
        }
        // mismatch: the up mark is gone, remove the down mark
        let m = self.seek(drop, self.mdn, Dir::L);
        self.set(m, self.mdn, vec![], Dir::R, no);
        let letters = self.content(x);
        for &c in &letters {
            let [carry, sx, up, d, back] = [(); 5].map(|_| self.fresh());
            self.set(a, c, vec![], Dir::L, carry);
            self.set(carry, self.mdn, vec![c, self.mdn], Dir::R, sx);
            let at = self.seek(sx, self.mup, Dir::R);
            self.keep(at, self.mup, Dir::S, up);
            self.set(up, self.mup, vec![], Dir::R, d);
            self.set(d, c, vec![c, self.mup], Dir::L, back);
            let zr_y = self.zr[y];
            for &other in letters.iter().filter(|&&o| o != c).chain([&zr_y]) {
                self.keep(d, other, Dir::L, drop);
            }
            let at = self.seek(back, self.mdn, Dir::L);
            self.keep(at, self.mdn, Dir::R, a);
        }
        *pos = inside(y);
        (yes, no)
    }

    /// Puts `mark_pos` right after the opening `dl_0` of element `a[idx]`,
    /// consuming the index zones, and stops on the cell after the mark.
    fn locate(&mut self, s: Q, pos: &mut Pos, a: usize, idx: &[usize]) -> Q {
        let s = self.go_open(s, pos, a);
        let mut entry = self.fresh();
        self.set(s, self.zl[a], vec![self.zl[a], self.mpos], Dir::R, entry);
        let k = idx.len();
        for (d, &v) in idx.iter().enumerate() {
            let level = k - 1 - d;
            let (dl, dr) = (self.dl[level], self.dr[level]);
            *pos = inside(a);
            let (zero, dec) = self.dectest(entry, pos, v);
            let back = toward(v, a);
            // skip one group at this level
            let at = self.seek(dec, self.mpos, back);
            let [t, u, w] = [(); 3].map(|_| self.fresh());
            self.set(at, self.mpos, vec![], Dir::R, t);
            self.keep(t, dl, Dir::R, u);
            let close = self.seek(u, dr, Dir::R);
            self.set(close, dr, vec![dr, self.mpos], Dir::R, entry);
            // descend into the current group
            let at = self.seek(zero, self.mpos, back);
            self.set(at, self.mpos, vec![], Dir::R, w);
            let next = self.fresh();
            self.set(w, dl, vec![dl, self.mpos], Dir::R, next);
            entry = next;
        }
        *pos = inside(a);
        entry
    }

    fn read(&mut self, s: Q, pos: &mut Pos, x: usize, a: usize, idx: &[usize]) -> Q {
        let s = self.go_open(s, pos, x);
        let s = self.clear(s, pos, x);
        let a_st = self.locate(s, pos, a, idx);
        let (to_x, to_a) = (toward(a, x), toward(x, a));
        let (fin, e) = (self.fresh(), self.fresh());
        self.keep(a_st, self.dr[0], Dir::L, fin);
        self.set(fin, self.mpos, vec![], Dir::R, e);
        for c in self.scalar_letters(&self.zone_type(x).clone()) {
            let [carry, sx, sa] = [(); 3].map(|_| self.fresh());
            self.set(a_st, c, vec![], Dir::L, carry);
            self.set(carry, self.mpos, vec![c, self.mpos], to_x, sx);
            let ax = self.seek(sx, self.zr[x], to_x);
            self.set(ax, self.zr[x], vec![c, self.zr[x]], to_a, sa);
            let back = self.seek(sa, self.mpos, to_a);
            self.keep(back, self.mpos, Dir::R, a_st);
        }
        *pos = inside(a);
        e
    }

    fn write(&mut self, s: Q, pos: &mut Pos, a: usize, idx: &[usize], y: usize) -> Q {
        let wipe = self.locate(s, pos, a, idx);
        let letters = self.scalar_letters(&self.zone_type(y).clone());
        let at_mark = self.fresh();
        for &c in &letters {
            self.set(wipe, c, vec![], Dir::R, wipe);
        }
        self.keep(wipe, self.dr[0], Dir::L, at_mark);
        let (to_y, to_a) = (toward(a, y), toward(y, a));
        let s = self.seek(at_mark, self.zl[y], to_y);
        let s = self.nonempty(s, y);
        let [a_st, fin, e] = [(); 3].map(|_| self.fresh());
        self.set(s, self.zl[y], vec![self.zl[y], self.mdn], Dir::R, a_st);
        let t = self.fresh();
        self.keep(a_st, self.zr[y], Dir::L, t);
        self.set(t, self.mdn, vec![], Dir::R, fin);
        let m = self.seek(fin, self.mpos, to_a);
        self.set(m, self.mpos, vec![], Dir::R, e);
        for &c in &letters {
            let [carry, sm, back] = [(); 3].map(|_| self.fresh());
            self.set(a_st, c, vec![], Dir::L, carry);
            self.set(carry, self.mdn, vec![c, self.mdn], Dir::R, sm);
            let m = self.seek(sm, self.mpos, to_a);
            self.set(m, self.mpos, vec![c, self.mpos], Dir::R, back);
            let d = self.seek(back, self.mdn, to_y);
            self.keep(d, self.mdn, Dir::R, a_st);
        }
        *pos = inside(a);
        e
    }

    fn new_array(&mut self, s: Q, pos: &mut Pos, x: usize, dims: &[usize], fill: usize) -> Q {
        let mut s = self.copy(s, pos, x, fill);
        let k = dims.len();
        for level in 0..k {
            let cnt = dims[k - 1 - level];
            let (dl, dr, zr) = (self.dl[level], self.dr[level], self.zr[x]);
            // wrap the current contents as the first group
            let s0 = self.go_open(s, pos, x);
            let t = self.fresh();
            self.set(s0, self.zl[x], vec![self.zl[x], dl], Dir::R, t);
            let c = self.seek(t, zr, Dir::R);
            let t = self.fresh();
            self.set(c, zr, vec![dr, zr], Dir::L, t);
            *pos = inside(x);
            let (zero, more) = self.dectest(t, pos, cnt);
            let done = self.fresh();
            // extent zero: nothing survives
            let mut p = inside(cnt);
            let z = self.go_open(zero, &mut p, x);
            let z = self.clear(z, &mut p, x);
            let z = self.go_open(z, &mut p, x);
            self.alias(z, done);
            // one more copy of the last group per remaining count
            let lp = self.fresh();
            let mut p = inside(cnt);
            let m = self.go_open(more, &mut p, cnt);
            self.alias(m, lp);
            let mut p = open_at(cnt);
            let (last, dup) = self.dectest(lp, &mut p, cnt);
            let l = self.go_open(last, &mut p, x);
            self.alias(l, done);
            let mut p = inside(cnt);
            let d = self.go_close(dup, &mut p, x);
            let d = self.step(d, Dir::L);
            let d = self.seek(d, dl, Dir::L);
            let t = self.fresh();
            self.set(d, dl, vec![self.mdn, dl], Dir::R, t);
            let a = self.step(t, Dir::L);
            let fin = self.fresh();
            for c in self.content(x) {
                let [carry, sx, sb] = [(); 3].map(|_| self.fresh());
                self.set(a, c, vec![], Dir::L, carry);
                self.set(carry, self.mdn, vec![c, self.mdn], Dir::R, sx);
                let at = self.seek(sx, zr, Dir::R);
                self.set(at, zr, vec![c, zr], Dir::L, sb);
                let back = self.seek(sb, self.mdn, Dir::L);
                if c == dr {
                    self.set(back, self.mdn, vec![], Dir::R, fin);
                } else {
                    self.keep(back, self.mdn, Dir::R, a);
                }
            }
            let mut p = inside(x);
            let f = self.go_open(fin, &mut p, cnt);
            self.alias(f, lp);
            s = done;
            *pos = open_at(x);
        }
        s
    }

    /// Lays out the zones around the input and counts its length into `n`.
    fn prologue(&mut self, init: Q) -> Q {
        let [first, w, c, c1, c2, n0] = [(); 6].map(|_| self.fresh());
        let (zl0, zr0, dl0, dr0) = (self.zl[0], self.zr[0], self.dl[0], self.dr[0]);
        self.set(init, self.blank, vec![zl0], Dir::S, first);
        self.keep(first, zl0, Dir::R, w);
        for &a in &self.syms.clone() {
            self.set(w, a, vec![dl0, a], Dir::R, c);
            self.set(c, a, vec![dr0, a], Dir::L, c1);
            self.keep(c1, a, Dir::R, c2);
        }
        self.set(c, self.blank, vec![dr0], Dir::R, w);
        self.keep(c2, dr0, Dir::R, w);
        self.set(w, self.blank, vec![zr0, self.zl[1]], Dir::R, n0);
        let mut s = self.fresh();
        self.set(n0, self.blank, vec![self.b0, self.zr[1]], Dir::R, s);
        for z in 2..self.lay.zones.len() {
            let t = self.fresh();
            self.set(s, self.blank, vec![self.zl[z], self.zr[z]], Dir::R, t);
            s = t;
        }
        let t = self.fresh();
        self.set(s, self.blank, vec![], Dir::L, t);
        let s = self.seek(t, zl0, Dir::L);
        // count the groups of the input into n
        let [k, skip, fin, e] = [(); 4].map(|_| self.fresh());
        self.set(s, zl0, vec![zl0, self.mpos], Dir::R, k);
        let t = self.fresh();
        self.keep(k, dl0, Dir::L, t);
        self.set(t, self.mpos, vec![], Dir::R, skip);
        let close = self.seek(skip, dr0, Dir::R);
        let t = self.fresh();
        self.set(close, dr0, vec![dr0, self.mpos], Dir::R, t);
        let mut pos = inside(0);
        let t = self.inc(t, &mut pos, 1);
        let back = self.seek(t, self.mpos, Dir::L);
        self.keep(back, self.mpos, Dir::R, k);
        self.keep(k, zr0, Dir::L, fin);
        self.set(fin, self.mpos, vec![], Dir::R, e);
        self.seek(e, zl0, Dir::L)
    }

    fn resolve(&self, mut s: Q) -> Q {
        let mut hops = 0;
        while let Some(t) = self.alias[s] {
            s = t;
            hops += 1;
            if hops > self.alias.len() {
                return self.reject;
            }
        }
        s
    }

    fn finish(self, init: Q) -> ExtendedTM {
        let live: Vec<Q> = (0..self.rows.len())
            .filter(|&s| self.alias[s].is_none())
            .collect();
        let mut number = vec![u32::MAX; self.rows.len()];
        for (i, &s) in live.iter().enumerate() {
            number[s] = i as u32;
        }
        let id = |s: Q| StateId(number[self.resolve(s)]);
        let states: Vec<String> = live
            .iter()
            .map(|&s| match s {
                _ if s == self.reject => REJECT.to_string(),
                _ if s == self.halt => "H".to_string(),
                _ if s == init => "init".to_string(),
                _ => format!("q{}", number[s]),
            })
            .collect();
        let width = self.blank as usize + 1;
        let mut delta = Vec::with_capacity(live.len() * width);
        for &s in &live {
            for read in 0..width {
                let filler = vec![LetterId(if read == width - 1 { 0 } else { read as u32 })];
                let t = match &self.rows[s][read] {
                    Some((w, dir, to)) if s != self.reject && s != self.halt => TmTransition {
                        to: id(*to),
                        write: w.iter().map(|&l| LetterId(l)).collect(),
                        dir: *dir,
                    },
                    _ if s == self.halt => TmTransition {
                        to: id(s),
                        write: filler,
                        dir: Dir::S,
                    },
                    _ => TmTransition {
                        to: id(self.reject),
                        write: filler,
                        dir: Dir::S,
                    },
                };
                delta.push(t);
            }
        }
        ExtendedTM {
            states,
            initial: id(init),
            halt: id(self.halt),
            alphabet: self.lay.alphabet(),
            delta,
        }
    }
}

pub(super) fn generate(ir: &[Ir], lay: &Layout) -> ExtendedTM {
    let mut g = Gen::new(lay);
    let zone = |x: &String| lay.zone(x).expect("every mentioned variable has a zone");
    let init = g.fresh();
    // Without zones the tape is never touched; one step leaves `init`.
    let start = if lay.zones.is_empty() {
        let s = g.fresh();
        for c in 0..=g.blank {
            g.keep(init, c, Dir::R, s);
        }
        s
    } else {
        g.prologue(init)
    };
    let entries: Vec<Q> = (0..ir.len()).map(|_| g.fresh()).collect();
    let first = entries.first().copied().unwrap_or(g.reject);
    g.alias(start, first);
    let labels: HashMap<&str, usize> = ir
        .iter()
        .enumerate()
        .filter_map(|(i, x)| {
            if let Ir::Label(l) = x {
                Some((l.as_str(), i))
            } else {
                None
            }
        })
        .collect();
    let reject = g.reject;
    let entry_of = |i: usize| entries.get(i).copied().unwrap_or(reject);
    let target = |l: &String| entry_of(labels[l.as_str()]);
    for (i, ins) in ir.iter().enumerate() {
        let s = entries[i];
        let next = entry_of(i + 1);
        let mut pos = open_at(0);
        let e = match ins {
            Ir::Label(_) => {
                g.alias(s, next);
                continue;
            }
            Ir::Jump(l) => {
                g.alias(s, target(l));
                continue;
            }
            Ir::Halt => {
                g.alias(s, g.halt);
                continue;
            }
            Ir::JumpIf {
                a,
                b,
                eq,
                target: l,
            } => {
                let (yes, no) = g.compare(s, &mut pos, zone(a), zone(b));
                let (hit, miss) = if *eq { (yes, no) } else { (no, yes) };
                for (exit, to) in [(hit, target(l)), (miss, next)] {
                    let mut p = pos;
                    let r = g.go_open(exit, &mut p, 0);
                    g.alias(r, to);
                }
                continue;
            }
            Ir::SetNat(x, n) => {
                let bits: Vec<u32> = super::nat_bits(*n)
                    .into_iter()
                    .map(|b| if b { g.b1 } else { g.b0 })
                    .collect();
                g.set_letters(s, &mut pos, zone(x), &bits)
            }
            Ir::SetSym(x, v) => {
                let l = g.syms[lay
                    .syms
                    .iter()
                    .position(|s| s == v)
                    .expect("literal symbol in layout")];
                g.set_letters(s, &mut pos, zone(x), &[l])
            }
            Ir::Copy(x, y) => g.copy(s, &mut pos, zone(x), zone(y)),
            Ir::Read(x, a, ix) => g.read(
                s,
                &mut pos,
                zone(x),
                zone(a),
                &ix.iter().map(zone).collect::<Vec<_>>(),
            ),
            Ir::Write(a, ix, y) => g.write(
                s,
                &mut pos,
                zone(a),
                &ix.iter().map(zone).collect::<Vec<_>>(),
                zone(y),
            ),
            Ir::NewArray(x, d, v) => g.new_array(
                s,
                &mut pos,
                zone(x),
                &d.iter().map(zone).collect::<Vec<_>>(),
                zone(v),
            ),
            Ir::Inc(x) => g.inc(s, &mut pos, zone(x)),
            Ir::Dec(x) => {
                let (zero, dec) = g.dectest(s, &mut pos, zone(x));
                g.alias(dec, zero);
                zero
            }
        };
        let r = g.go_open(e, &mut pos, 0);
        g.alias(r, next);
    }
    g.finish(init)
}
