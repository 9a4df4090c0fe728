//! Simple closed curves on windows.
//!
//! A curve is a reduced, primitive cyclic word in the rose loops, stored in
//! canonical form (least rotation of the word or its inverse). Crossing words
//! over the triangulation are derived on demand.
//!
//! Intersection numbers use linked pairs of maximal common subwords on the
//! ribbon graph. Twists, cutting and side data use an explicit realization:
//! strands through each band are ordered by where they diverge going forward,
//! which puts any family of curves in minimal position with all crossings
//! inside the vertex disk.

mod surgery;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::end_calculus::{ClopenProfile, EndSpace};
use crate::error::{CnpError, Result};
use crate::windows::{slot_end, slot_start, CombWindow};
use crate::words::{self, gen_of, Letter};

pub use surgery::{surgery_step, SurgeryOutcome};
pub(crate) use surgery::consecutive_arc_curves;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Curve {
    pub level: usize,
    /// Canonical reduced loop word.
    pub word: Vec<Letter>,
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    level: usize,
    word: Vec<i32>,
}

impl Curve {
    /// Reduces and canonicalizes `word`, checking that it is a simple closed curve.
    pub fn new(window: &CombWindow, word: &[Letter]) -> Result<Curve> {
        reduce(window, word)
    }

    /// Wraps a word already known to be canonical and simple.
    pub fn from_canonical(level: usize, word: Vec<Letter>) -> Curve {
        Curve { level, word }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn crossing_word(&self, window: &CombWindow) -> Vec<i32> {
        window.crossing_word(&self.word)
    }

    pub fn complexity(&self, window: &CombWindow) -> u32 {
        window.complexity(&self.word)
    }

    pub fn to_json(&self, window: &CombWindow) -> String {
        serde_json::to_string(&CurveJson { level: self.level, word: self.crossing_word(window) }).expect("serializes")
    }

    pub fn from_json(text: &str, window: &CombWindow) -> Result<Curve> {
        let raw: CurveJson = serde_json::from_str(text).map_err(|e| CnpError::Malformed(e.to_string()))?;
        if raw.level != window.level {
            return Err(CnpError::LevelMismatch(raw.level, window.level));
        }
        let loops = window.loops_from_crossing(&raw.word)?;
        reduce(window, &loops)
    }
}

/// Taut canonical representative of a closed loop word.
pub fn reduce(window: &CombWindow, word: &[Letter]) -> Result<Curve> {
    if word.iter().any(|&l| l == 0 || gen_of(l) >= window.n_gen()) {
        return Err(CnpError::Malformed("letter outside the window's generators".into()));
    }
    let c = words::canonical(word);
    if c.is_empty() {
        return Err(CnpError::NullHomotopic);
    }
    if !words::is_primitive(&c) || !is_simple_word(window, &c) {
        return Err(CnpError::NotSimple);
    }
    Ok(Curve { level: window.level, word: c })
}

/// One intersection point found by the linked-pair scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    /// Vertex of `v` (between letters i-1 and i) where the common subword starts.
    pub i: usize,
    /// Same vertex on the oriented copy of `u` (`u` or its inverse).
    pub j: usize,
    /// +1 when paired with `u`, -1 when paired with its inverse.
    pub dir: i8,
    /// Length of the common subword (0 for a transverse crossing).
    pub len: usize,
    /// `v` arrives from the left of the oriented copy of `u`.
    pub v_from_left: bool,
}

fn interlace(w: &CombWindow, a: usize, b: usize, c: usize, d: usize) -> bool {
    let n = w.n_slots();
    let (pa, pb, pc, pd) = (w.pos(a), w.pos(b), w.pos(c), w.pos(d));
    let inside = |x: usize| (x + n - pa) % n < (pb + n - pa) % n;
    inside(pc) != inside(pd)
}

/// Scans linked pairs between cyclic words `v` and `u`; `visit` returns true to stop early.
fn scan(w: &CombWindow, v: &[Letter], u: &[Letter], self_check: bool, visit: &mut dyn FnMut(Crossing) -> bool) {
    let m = v.len();
    let k = u.len();
    if m == 0 || k == 0 {
        return;
    }
    let uinv = words::inverse(u);
    for (dir, ww) in [(1i8, u), (-1i8, uinv.as_slice())] {
        for i in 0..m {
            let a = v[(i + m - 1) % m];
            let b = v[i];
            for j in 0..k {
                if self_check && dir == 1 && i == j {
                    continue;
                }
                let c = ww[(j + k - 1) % k];
                let d = ww[j];
                if a == c {
                    continue;
                }
                if b != d {
                    if dir == -1 {
                        continue;
                    }
                    let s = [slot_end(a), slot_start(b), slot_end(c), slot_start(d)];
                    if s[0] == s[2] || s[0] == s[3] || s[1] == s[2] || s[1] == s[3] {
                        continue;
                    }
                    if interlace(w, s[0], s[1], s[2], s[3]) {
                        let left = w.between(slot_start(d), slot_end(a), slot_end(c));
                        if visit(Crossing { i, j, dir, len: 0, v_from_left: left }) {
                            return;
                        }
                    }
                    continue;
                }
                let mut len = 0;
                while v[(i + len) % m] == ww[(j + len) % k] {
                    len += 1;
                    if len > m + k {
                        break;
                    }
                }
                if len > m + k {
                    continue;
                }
                let last = v[(i + len - 1) % m];
                let bb = v[(i + len) % m];
                let dd = ww[(j + len) % k];
                let s1 = w.between(slot_start(b), slot_end(a), slot_end(c));
                let s2 = w.between(slot_end(last), slot_start(bb), slot_start(dd));
                if s1 == s2 && visit(Crossing { i, j, dir, len, v_from_left: s1 }) {
                    return;
                }
            }
        }
    }
}

/// All crossings of `v` with `u`.
pub fn crossings(w: &CombWindow, v: &[Letter], u: &[Letter]) -> Vec<Crossing> {
    let mut out = Vec::new();
    scan(w, v, u, false, &mut |c| {
        out.push(c);
        false
    });
    out
}

/// Geometric intersection number of two reduced cyclic words of simple curves.
pub fn intersection_words(w: &CombWindow, v: &[Letter], u: &[Letter]) -> usize {
    let mut n = 0;
    scan(w, v, u, false, &mut |_| {
        n += 1;
        false
    });
    n
}

/// True when the intersection number is zero (stops at the first crossing).
pub fn disjoint_words(w: &CombWindow, v: &[Letter], u: &[Letter]) -> bool {
    let mut hit = false;
    scan(w, v, u, false, &mut |_| {
        hit = true;
        true
    });
    !hit
}

pub fn intersection_number(w: &CombWindow, a: &Curve, b: &Curve) -> Result<usize> {
    check_level(w, a)?;
    check_level(w, b)?;
    Ok(intersection_words(w, &a.word, &b.word))
}

fn check_level(w: &CombWindow, c: &Curve) -> Result<()> {
    if c.level != w.level {
        return Err(CnpError::LevelMismatch(c.level, w.level));
    }
    Ok(())
}

/// A reduced primitive cyclic word is simple when it has no linked self-pair.
pub fn is_simple_word(w: &CombWindow, v: &[Letter]) -> bool {
    let mut hit = false;
    scan(w, v, v, true, &mut |_| {
        hit = true;
        true
    });
    !hit
}

// ---------------------------------------------------------------------------
// Explicit realization: strands in bands and points on the cut polygon.

/// A family of cyclic words realized in minimal position.
struct Realization<'a> {
    curves: Vec<&'a [Letter]>,
    /// For each (curve, letter index): circle coordinate of its start point and end point.
    start_pt: Vec<Vec<usize>>,
    end_pt: Vec<Vec<usize>>,
    total: usize,
    /// Per band: strands in rightmost-first order.
    bands: Vec<Vec<(usize, usize)>>,
    /// Circle coordinate of the first point on each polygon side.
    side_offset: Vec<usize>,
}

impl<'a> Realization<'a> {
    fn new(w: &'a CombWindow, curves: Vec<&'a [Letter]>) -> Self {
        let r = w.n_gen();
        let mut bands: Vec<Vec<(usize, usize)>> = vec![Vec::new(); r];
        for (ci, c) in curves.iter().enumerate() {
            for (t, &l) in c.iter().enumerate() {
                bands[gen_of(l)].push((ci, t));
            }
        }
        let fwd = |(ci, t): (usize, usize), s: usize| -> Letter {
            let c = curves[ci];
            let m = c.len();
            if c[t] > 0 {
                c[(t + s) % m]
            } else {
                -c[(t + m * (s / m + 1) - s % m) % m]
            }
        };
        for band in bands.iter_mut() {
            band.sort_by(|&p, &q| {
                if p == q {
                    return std::cmp::Ordering::Equal;
                }
                let lim = curves[p.0].len() + curves[q.0].len() + 1;
                for s in 1..=lim {
                    let (fp, fq) = (fwd(p, s), fwd(q, s));
                    if fp != fq {
                        let inn = slot_end(fwd(p, s - 1));
                        let dp = w.ccw(inn, slot_start(fp));
                        let dq = w.ccw(inn, slot_start(fq));
                        return dp.cmp(&dq);
                    }
                }
                p.cmp(&q)
            });
        }
        let n = w.n_slots();
        let mut side_offset = vec![0; n + 1];
        for p in 0..n {
            let k = w.slot_at(p) / 2;
            side_offset[p + 1] = side_offset[p] + bands[k].len();
        }
        let total = side_offset[n];
        let mut start_pt: Vec<Vec<usize>> = curves.iter().map(|c| vec![0; c.len()]).collect();
        let mut end_pt = start_pt.clone();
        for (k, band) in bands.iter().enumerate() {
            let nk = band.len();
            let even = side_offset[w.pos(2 * k)];
            let odd = side_offset[w.pos(2 * k + 1)];
            for (rank, &(ci, t)) in band.iter().enumerate() {
                let on_even = even + rank;
                let on_odd = odd + (nk - 1 - rank);
                if curves[ci][t] > 0 {
                    start_pt[ci][t] = on_even;
                    end_pt[ci][t] = on_odd;
                } else {
                    start_pt[ci][t] = on_odd;
                    end_pt[ci][t] = on_even;
                }
            }
        }
        Realization { curves, start_pt, end_pt, total, bands, side_offset }
    }

    fn ccw(&self, a: usize, b: usize) -> usize {
        (b + self.total - a) % self.total
    }

    /// Chord of curve `ci` at its vertex `i` (entering, leaving).
    fn chord(&self, ci: usize, i: usize) -> (usize, usize) {
        let m = self.curves[ci].len();
        (self.end_pt[ci][(i + m - 1) % m], self.start_pt[ci][i])
    }

    fn interlaced(&self, x: (usize, usize), y: (usize, usize)) -> bool {
        let span = self.ccw(x.0, x.1);
        let inside = |p: usize| self.ccw(x.0, p) < span;
        inside(y.0) != inside(y.1)
    }
}

/// Image of `x` under the `power`-fold Dehn twist about `axis`, as a reduced cyclic word.
pub fn twist_word(w: &CombWindow, x: &[Letter], axis: &[Letter], power: i64) -> Vec<Letter> {
    if power == 0 || x.is_empty() || axis.is_empty() || words::canonical(x) == words::canonical(axis) {
        return words::cyclic_reduce(x);
    }
    let real = Realization::new(w, vec![x, axis]);
    let m = x.len();
    let k = axis.len();
    let mut out = Vec::new();
    for i in 0..m {
        let xc = real.chord(0, i);
        let span = real.ccw(xc.0, xc.1);
        let mut hits: Vec<(usize, usize, i64)> = Vec::new();
        for j in 0..k {
            let ac = real.chord(1, j);
            if !real.interlaced(xc, ac) {
                continue;
            }
            let right_end = if real.ccw(xc.0, ac.0) < span { ac.0 } else { ac.1 };
            let from_left = real.ccw(ac.1, xc.0) < real.ccw(ac.1, ac.0);
            hits.push((real.ccw(xc.0, right_end), j, if from_left { 1 } else { -1 }));
        }
        hits.sort();
        for (_, j, s) in hits {
            let rot = words::rotate(axis, j);
            out.extend(words::power(&rot, s * power));
        }
        out.push(x[i]);
    }
    words::cyclic_reduce(&out)
}

/// Dehn twist image of a curve.
pub fn twist_image(w: &CombWindow, curve: &Curve, axis: &Curve, power: i64) -> Result<Curve> {
    check_level(w, curve)?;
    check_level(w, axis)?;
    let img = twist_word(w, &curve.word, &axis.word, power);
    Ok(Curve { level: w.level, word: words::canonical(&img) })
}

/// One complementary component of a curve in its window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Side {
    pub labels: Vec<usize>,
    pub genus: u32,
}

/// Complementary components of a simple closed curve (one or two).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutInfo {
    pub sides: Vec<Side>,
}

impl CutInfo {
    pub fn separating(&self) -> bool {
        self.sides.len() == 2
    }

    /// Disk, or annulus onto a boundary label, on some side.
    pub fn inessential(&self) -> bool {
        self.separating() && self.sides.iter().any(|s| s.genus == 0 && s.labels.len() <= 1)
    }
}

fn uf_root(uf: &mut [usize], x: usize) -> usize {
    let mut x = x;
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// Cuts the window along the curve `c` and reports the pieces.
pub fn cut(w: &CombWindow, c: &[Letter]) -> CutInfo {
    let real = Realization::new(w, vec![c]);
    let m = c.len();
    let total = real.total;
    let n = w.n_slots();
    // Chords pair points: end point of letter t with start point of letter t+1.
    let mut partner = vec![0usize; total];
    for t in 0..m {
        let a = real.end_pt[0][t];
        let b = real.start_pt[0][(t + 1) % m];
        partner[a] = b;
        partner[b] = a;
    }
    // Interval u runs from point u to point u+1 (cyclically).
    let mut uf: Vec<usize> = (0..total).collect();
    let mut region_of = vec![usize::MAX; total];
    let mut regions = 0;
    for u0 in 0..total {
        if region_of[u0] != usize::MAX {
            continue;
        }
        let mut u = u0;
        while region_of[u] == usize::MAX {
            region_of[u] = regions;
            let nu = partner[(u + 1) % total];
            let (ru, rn) = (uf_root(&mut uf, u), uf_root(&mut uf, nu));
            uf[ru] = rn;
            u = nu;
        }
        regions += 1;
    }
    // Interval containing the stretch just before the first point of a side, or after the last.
    let interval_before = |coord: usize| (coord + total - 1) % total;
    // Dual-arc pieces: piece q of band k lies between strands q-1 and q.
    let mut pieces = 0;
    let mut piece_comp: Vec<(usize, usize)> = Vec::new();
    for (k, band) in real.bands.iter().enumerate() {
        let nk = band.len();
        let even = real.side_offset[w.pos(2 * k)];
        let odd = real.side_offset[w.pos(2 * k + 1)];
        for q in 0..=nk {
            // On the even side piece q precedes point rank q; on the odd side it follows the point of rank q.
            let ie = interval_before(even + q);
            let io = if q == nk { interval_before(odd) } else { odd + (nk - 1 - q) };
            let (a, b) = (uf_root(&mut uf, ie), uf_root(&mut uf, io));
            uf[a] = b;
            piece_comp.push((ie, io));
            pieces += 1;
        }
    }
    // Corners: corner p lies just before the first point of side p.
    let mut comps: Vec<usize> = Vec::new();
    let mut labels_of: Vec<BTreeSet<usize>> = Vec::new();
    let mut regions_of: Vec<BTreeSet<usize>> = Vec::new();
    let mut pieces_of: Vec<usize> = Vec::new();
    let comp_index = |root: usize, comps: &mut Vec<usize>, l: &mut Vec<BTreeSet<usize>>, rg: &mut Vec<BTreeSet<usize>>, pc: &mut Vec<usize>| -> usize {
        match comps.iter().position(|&x| x == root) {
            Some(i) => i,
            None => {
                comps.push(root);
                l.push(BTreeSet::new());
                rg.push(BTreeSet::new());
                pc.push(0);
                comps.len() - 1
            }
        }
    };
    for p in 0..n {
        let iv = interval_before(real.side_offset[p]);
        let root = uf_root(&mut uf, iv);
        let ci = comp_index(root, &mut comps, &mut labels_of, &mut regions_of, &mut pieces_of);
        labels_of[ci].insert(w.corners[p]);
    }
    for u in 0..total {
        let root = uf_root(&mut uf, u);
        let ci = comp_index(root, &mut comps, &mut labels_of, &mut regions_of, &mut pieces_of);
        regions_of[ci].insert(region_of[u]);
    }
    for &(ie, _) in &piece_comp {
        let root = uf_root(&mut uf, ie);
        let ci = comp_index(root, &mut comps, &mut labels_of, &mut regions_of, &mut pieces_of);
        pieces_of[ci] += 1;
    }
    debug_assert_eq!(regions, m + 1, "chords of a simple curve cut the polygon into m+1 regions");
    debug_assert_eq!(pieces, m + w.n_gen());
    let copies = if comps.len() == 2 { 1 } else { 2 };
    let mut sides: Vec<Side> = (0..comps.len())
        .map(|ci| {
            let chi = regions_of[ci].len() as i64 - pieces_of[ci] as i64;
            let b = labels_of[ci].len() as i64 + copies;
            let g2 = 2 - chi - b;
            Side { labels: labels_of[ci].iter().copied().collect(), genus: (g2.max(0) / 2) as u32 }
        })
        .collect();
    sides.sort_by(|a, b| a.labels.cmp(&b.labels));
    CutInfo { sides }
}

pub fn is_separating(curve: &Curve, window: &CombWindow) -> bool {
    cut(window, &curve.word).separating()
}

/// Checks essentiality: not bounding a disk and not parallel to a boundary label.
pub fn is_essential(curve: &Curve, window: &CombWindow) -> bool {
    !cut(window, &curve.word).inessential()
}

/// Genus carried by one side of a separating curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenusAmount {
    Finite(u32),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndPartition {
    pub side_one: ClopenProfile,
    pub side_two: ClopenProfile,
    pub genus_split: (GenusAmount, GenusAmount),
    pub labels_one: Vec<usize>,
    pub labels_two: Vec<usize>,
}

fn side_genus(w: &CombWindow, side: &Side) -> GenusAmount {
    if w.surface_genus_infinite && side.labels.iter().any(|&l| !w.labels[l].planar) {
        GenusAmount::Infinite
    } else {
        GenusAmount::Finite(side.genus)
    }
}

pub fn end_partition(curve: &Curve, window: &CombWindow, space: &EndSpace) -> Result<EndPartition> {
    check_level(window, curve)?;
    let info = cut(window, &curve.word);
    if !info.separating() {
        return Err(CnpError::NotSeparating);
    }
    let (a, b) = (&info.sides[0], &info.sides[1]);
    Ok(EndPartition {
        side_one: window.side_profile(space, &a.labels),
        side_two: window.side_profile(space, &b.labels),
        genus_split: (side_genus(window, a), side_genus(window, b)),
        labels_one: a.labels.clone(),
        labels_two: b.labels.clone(),
    })
}

#[cfg(test)]
mod tests;
