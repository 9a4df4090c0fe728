//! Markings, subsurface projections and annular relative twisting.
//!
//! Twisting is measured in the annular cover of an axis. A lift of a crossing
//! curve is an arc joining the two boundary circles of the cover; its ends are
//! located exactly by the position along the axis where the lift departs and by
//! the planar order of the departing rays in the universal cover. Intersections
//! of arcs are counted by linking of ends over all deck translates, so the
//! result depends only on the isotopy classes involved.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::curves::{self, consecutive_arc_curves, crossings, cut, disjoint_words, intersection_words, Curve};
use crate::error::{CnpError, Result};
use crate::peripherality_cnp::enumerate_simple;
use crate::windows::{slot_end, slot_start, CombWindow};
use crate::words::{self, Letter};

/// Largest winding (in axis periods) stored in annular coordinates.
pub const DEFAULT_WINDING_CAP: i64 = 128;

/// Pants curves with their transversals on the level-0 window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Marking {
    pub pants_curves: Vec<Curve>,
    pub transversals: Vec<Curve>,
    pub window_level: usize,
}

impl Marking {
    /// Chain marking of a planar window: alpha_i encloses labels 0..=i+1 and beta_i encloses {i+1, i+2}.
    pub fn chain(w: &CombWindow) -> Result<Marking> {
        if w.genus > 0 {
            return Err(CnpError::HypothesisViolation("chain markings need a planar window".into()));
        }
        let n = w.n_labels();
        if n < 4 {
            return Err(CnpError::HypothesisViolation(format!("{n} boundaries carry no marking")));
        }
        let mut pants_curves = Vec::new();
        let mut transversals = Vec::new();
        for i in 0..n - 3 {
            pants_curves.push(Curve::new(w, &w.interval_word(0, i + 1))?);
            transversals.push(Curve::new(w, &w.interval_word(i + 1, i + 2))?);
        }
        Ok(Marking { pants_curves, transversals, window_level: w.level })
    }

    pub fn curves(&self) -> Vec<Curve> {
        self.pants_curves.iter().chain(&self.transversals).cloned().collect()
    }

    /// Checks the marking invariants on its window.
    pub fn validate(&self, w: &CombWindow) -> Result<()> {
        let n = self.pants_curves.len();
        for i in 0..n {
            for j in 0..n {
                let a = &self.pants_curves[i].word;
                let b = &self.transversals[j].word;
                let ij = intersection_words(w, a, b);
                if i == j && !(1..=2).contains(&ij) {
                    return Err(CnpError::HypothesisViolation(format!("pair {i} meets {ij} times")));
                }
                if i != j && ij != 0 {
                    return Err(CnpError::HypothesisViolation(format!("alpha_{i} meets beta_{j}")));
                }
                if i < j && !disjoint_words(w, a, &self.pants_curves[j].word) {
                    return Err(CnpError::HypothesisViolation(format!("pants curves {i}, {j} meet")));
                }
            }
        }
        Ok(())
    }

    /// `{"level": L, "curves": [{"role": "pants"|"transversal", "word": [...]}]}`, pants curves first.
    pub fn to_json(&self, w: &CombWindow) -> String {
        let tag = |role: &str, c: &Curve| RoleCurve { role: role.into(), word: c.crossing_word(w) };
        let curves = self.pants_curves.iter().map(|c| tag("pants", c)).chain(self.transversals.iter().map(|c| tag("transversal", c)));
        serde_json::to_string(&MarkingJson { level: self.window_level, curves: curves.collect() }).expect("serializes")
    }

    /// Parses and validates a marking; pants curves and transversals pair up in file order.
    pub fn from_json(text: &str, w: &CombWindow) -> Result<Marking> {
        let raw: MarkingJson = serde_json::from_str(text).map_err(|e| CnpError::Malformed(e.to_string()))?;
        if raw.level != w.level {
            return Err(CnpError::LevelMismatch(raw.level, w.level));
        }
        let mut m = Marking { pants_curves: Vec::new(), transversals: Vec::new(), window_level: w.level };
        for rc in raw.curves {
            let c = curves::reduce(w, &w.loops_from_crossing(&rc.word)?)?;
            match rc.role.as_str() {
                "pants" => m.pants_curves.push(c),
                "transversal" => m.transversals.push(c),
                other => return Err(CnpError::Malformed(format!("unknown marking role {other:?}"))),
            }
        }
        if m.pants_curves.len() != m.transversals.len() {
            return Err(CnpError::Malformed("pants curves and transversals differ in number".into()));
        }
        m.validate(w)?;
        Ok(m)
    }

    /// Transports the marking up a chain of nested windows (`chain[k]` at level k).
    pub fn embed(&self, chain: &[CombWindow], level: usize) -> Result<Marking> {
        let map = |c: &Curve| embed_curve(chain, c, level);
        Ok(Marking {
            pants_curves: self.pants_curves.iter().map(map).collect::<Result<_>>()?,
            transversals: self.transversals.iter().map(map).collect::<Result<_>>()?,
            window_level: level,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RoleCurve {
    role: String,
    word: Vec<i32>,
}

#[derive(Serialize, Deserialize)]
struct MarkingJson {
    level: usize,
    curves: Vec<RoleCurve>,
}

/// Pushes a curve from its level to `level` through consecutive parent embeddings.
pub fn embed_curve(chain: &[CombWindow], c: &Curve, level: usize) -> Result<Curve> {
    if level < c.level || level >= chain.len() {
        return Err(CnpError::LevelMismatch(c.level, level));
    }
    let mut word = c.word.clone();
    for l in c.level..level {
        word = chain[l + 1].embed_from_parent(&chain[l], &word)?;
    }
    Curve::new(&chain[level], &word)
}

// ---------------------------------------------------------------------------
// Annular cover.

#[derive(Debug, Clone, Copy)]
struct Ray {
    curve: usize,
    start: usize,
    backward: bool,
}

#[derive(Debug, Clone, Copy)]
struct End {
    t: i64,
    ray: Ray,
}

/// An arc of the annular cover: one end on each boundary circle.
#[derive(Debug, Clone, Copy)]
struct Arc {
    left: End,
    right: End,
}

/// Arcs of a family of curves in the annular cover of one axis.
pub struct AnnularCover<'a> {
    w: &'a CombWindow,
    axis: Vec<Letter>,
    words: Vec<Vec<Letter>>,
    arcs: Vec<Arc>,
    /// Index of the first arc of each curve, plus the total at the end.
    starts: Vec<usize>,
}

/// Exact winding data of the arcs of one curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnularCoordinates {
    pub axis: Curve,
    /// Per arc: (position of the left end, position of the right end) along the axis, in letters.
    pub arcs: Vec<(i64, i64)>,
    pub axis_length: usize,
}

impl AnnularCoordinates {
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Signed winding of each arc, in whole axis periods (rounded toward zero).
    pub fn windings(&self) -> Vec<i64> {
        self.arcs.iter().map(|(l, r)| (r - l) / self.axis_length as i64).collect()
    }
}

impl<'a> AnnularCover<'a> {
    pub fn new(w: &'a CombWindow, axis: &[Letter], curves: &[&[Letter]]) -> Self {
        let axis_c = words::canonical(axis);
        let mut cover = AnnularCover { w, axis: axis.to_vec(), words: Vec::new(), arcs: Vec::new(), starts: Vec::new() };
        for c in curves {
            cover.starts.push(cover.arcs.len());
            let idx = cover.words.len();
            cover.words.push(c.to_vec());
            if c.is_empty() || words::canonical(c) == axis_c {
                continue;
            }
            for x in crossings(w, c, axis) {
                let (tb, tf) = if x.dir == 1 {
                    (x.j as i64, (x.j + x.len) as i64)
                } else {
                    (-(x.j as i64), -((x.j + x.len) as i64))
                };
                let back = End { t: tb, ray: Ray { curve: idx, start: x.i, backward: true } };
                let fwd = End { t: tf, ray: Ray { curve: idx, start: x.i + x.len, backward: false } };
                let back_left = x.v_from_left == (x.dir == 1);
                cover.arcs.push(if back_left { Arc { left: back, right: fwd } } else { Arc { left: fwd, right: back } });
            }
        }
        cover.starts.push(cover.arcs.len());
        cover
    }

    fn k(&self) -> i64 {
        self.axis.len() as i64
    }

    fn letter(&self, r: Ray, n: usize) -> Letter {
        let v = &self.words[r.curve];
        let m = v.len();
        if r.backward {
            -v[(r.start + m * (n / m + 1) - 1 - n) % m]
        } else {
            v[(r.start + n) % m]
        }
    }

    fn axis_letter(&self, t: i64) -> Letter {
        self.axis[t.rem_euclid(self.k()) as usize]
    }

    /// Order of two ends on one boundary circle, the second shifted by `shift` letters.
    fn cmp_end(&self, left: bool, a: End, b: End, shift: i64) -> Ordering {
        let bt = b.t + shift;
        if a.t != bt {
            return a.t.cmp(&bt);
        }
        let key = |base: usize, s: usize| -> i64 {
            let c = self.w.ccw(base, s) as i64;
            if left {
                -c
            } else {
                c
            }
        };
        let (la, lb) = (self.letter(a.ray, 0), self.letter(b.ray, 0));
        if la != lb {
            let base = if left { slot_start(self.axis_letter(a.t)) } else { slot_end(self.axis_letter(a.t - 1)) };
            return key(base, slot_start(la)).cmp(&key(base, slot_start(lb)));
        }
        let limit = self.words[a.ray.curve].len() + self.words[b.ray.curve].len() + 2;
        let mut prev = la;
        for n in 1..limit {
            let (x, y) = (self.letter(a.ray, n), self.letter(b.ray, n));
            if x != y {
                let base = slot_end(prev);
                return key(base, slot_start(x)).cmp(&key(base, slot_start(y)));
            }
            prev = x;
        }
        Ordering::Equal
    }

    /// (same class, number of interior intersections) of arcs `a` and `b` over all translates of `b`.
    fn compare_arcs(&self, a: &Arc, b: &Arc) -> (bool, usize) {
        let k = self.k();
        let dl = a.left.t - b.left.t;
        let dr = a.right.t - b.right.t;
        let lo = dl.min(dr).div_euclid(k) - 1;
        let hi = dl.max(dr).div_euclid(k) + 2;
        let mut same = false;
        let mut count = 0;
        for s in lo..=hi {
            let o1 = self.cmp_end(true, a.left, b.left, s * k);
            let o2 = self.cmp_end(false, a.right, b.right, s * k);
            if o1 == Ordering::Equal && o2 == Ordering::Equal {
                same = true;
            } else if o1 != Ordering::Equal && o2 != Ordering::Equal && o1 != o2 {
                count += 1;
            }
        }
        (same, count)
    }

    fn arc_distance(&self, a: &Arc, b: &Arc) -> usize {
        match self.compare_arcs(a, b) {
            (true, _) => 0,
            (false, n) => 1 + n,
        }
    }

    /// Diameter of the arcs of curves `xs` together with those of `ys` (0 if either side is empty).
    pub fn diameter(&self, xs: &[usize], ys: &[usize]) -> usize {
        let collect = |cs: &[usize]| -> Vec<usize> { cs.iter().flat_map(|&c| self.starts[c]..self.starts[c + 1]).collect() };
        let (ax, ay) = (collect(xs), collect(ys));
        if ax.is_empty() || ay.is_empty() {
            return 0;
        }
        let all: Vec<usize> = ax.into_iter().chain(ay).collect();
        let mut best = 0;
        for (p, &i) in all.iter().enumerate() {
            for &j in &all[p + 1..] {
                best = best.max(self.arc_distance(&self.arcs[i], &self.arcs[j]));
            }
        }
        best
    }

    pub fn arc_count(&self, curve: usize) -> usize {
        self.starts[curve + 1] - self.starts[curve]
    }
}

/// Relative twisting of two curve families about an axis.
pub fn annular_twist(w: &CombWindow, xs: &[Curve], ys: &[Curve], axis: &Curve) -> usize {
    let words: Vec<&[Letter]> = xs.iter().chain(ys).map(|c| c.word.as_slice()).collect();
    let cover = AnnularCover::new(w, &axis.word, &words);
    let xi: Vec<usize> = (0..xs.len()).collect();
    let yi: Vec<usize> = (xs.len()..xs.len() + ys.len()).collect();
    cover.diameter(&xi, &yi)
}

/// Arc end positions of one curve in the annular cover, refusing windings beyond `cap` periods.
pub fn annular_coordinates(w: &CombWindow, x: &Curve, axis: &Curve, cap: i64) -> Result<AnnularCoordinates> {
    let cover = AnnularCover::new(w, &axis.word, &[&x.word]);
    let k = axis.word.len() as i64;
    let arcs: Vec<(i64, i64)> = cover.arcs.iter().map(|a| (a.left.t, a.right.t)).collect();
    if arcs.iter().any(|(l, r)| (r - l).abs() > cap * k) {
        return Err(CnpError::WindowOverflow);
    }
    Ok(AnnularCoordinates { axis: axis.clone(), arcs, axis_length: axis.word.len() })
}

// ---------------------------------------------------------------------------
// Non-annular subsurfaces.

/// One complementary side of a separating curve in a planar window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subsurface {
    pub boundary: Curve,
    /// Window labels inside the subsurface.
    pub labels: Vec<usize>,
}

impl Subsurface {
    /// The side of `boundary` containing `label`.
    pub fn side_of(w: &CombWindow, boundary: &Curve, label: usize) -> Result<Subsurface> {
        if w.genus > 0 {
            return Err(CnpError::HypothesisViolation("subsurfaces are taken in planar windows".into()));
        }
        let info = cut(w, &boundary.word);
        if !info.separating() {
            return Err(CnpError::NotSeparating);
        }
        let side = info
            .sides
            .into_iter()
            .find(|s| s.labels.contains(&label))
            .ok_or_else(|| CnpError::Malformed(format!("label {label} not in window")))?;
        if side.labels.len() < 2 {
            return Err(CnpError::AnnularSpec);
        }
        Ok(Subsurface { boundary: boundary.clone(), labels: side.labels })
    }

    /// Essential curves of the subsurface: disjoint from the boundary, on this side, and
    /// cutting off at least two labels without being parallel to the boundary.
    pub fn contains_essential(&self, w: &CombWindow, c: &[Letter]) -> bool {
        if words::canonical(c) == self.boundary.word || !disjoint_words(w, c, &self.boundary.word) {
            return false;
        }
        let info = cut(w, c);
        if !info.separating() {
            return false;
        }
        let inner = info.sides.iter().find(|s| s.labels.iter().all(|l| self.labels.contains(l)));
        match inner {
            Some(s) => s.labels.len() >= 2 && s.labels.len() < self.labels.len(),
            None => false,
        }
    }

    /// Four-holed spheres use Farey adjacency (intersection two).
    fn adjacent(&self, w: &CombWindow, a: &[Letter], b: &[Letter]) -> bool {
        if self.labels.len() == 3 {
            intersection_words(w, a, b) == 2
        } else {
            disjoint_words(w, a, b)
        }
    }
}

/// Arc-surgery projection of a curve family to a subsurface.
pub fn subsurface_projection(w: &CombWindow, xs: &[Curve], s: &Subsurface) -> Result<Vec<Curve>> {
    if s.labels.len() < 3 {
        return Err(CnpError::AnnularSpec);
    }
    let mut out: Vec<Vec<Letter>> = Vec::new();
    for x in xs {
        if s.contains_essential(w, &x.word) {
            out.push(x.word.clone());
            continue;
        }
        for c in consecutive_arc_curves(w, &x.word, &s.boundary.word) {
            if words::is_primitive(&c) && curves::is_simple_word(w, &c) && s.contains_essential(w, &c) {
                out.push(c);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out.into_iter().map(|c| Curve::from_canonical(w.level, c)).collect())
}

/// Diameter of the union of two projections in the capped curve graph of the subsurface.
pub fn projection_distance(w: &CombWindow, xs: &[Curve], ys: &[Curve], s: &Subsurface, cap: u32) -> Result<usize> {
    let px = subsurface_projection(w, xs, s)?;
    let py = subsurface_projection(w, ys, s)?;
    if px.is_empty() || py.is_empty() {
        return Err(CnpError::EmptyProjection);
    }
    let mut verts: Vec<Vec<Letter>> = enumerate_simple(w, cap).into_iter().filter(|c| s.contains_essential(w, c)).collect();
    let mut targets = Vec::new();
    for c in px.iter().chain(&py) {
        let idx = match verts.iter().position(|v| *v == c.word) {
            Some(i) => i,
            None => {
                verts.push(c.word.clone());
                verts.len() - 1
            }
        };
        targets.push(idx);
    }
    let n = verts.len();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i && s.adjacent(w, &verts[i], &verts[j])).collect()).collect();
    let mut diam = 0;
    for &t in &targets {
        let mut dist = vec![usize::MAX; n];
        dist[t] = 0;
        let mut q = VecDeque::from([t]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        for &u in &targets {
            if dist[u] == usize::MAX {
                return Err(CnpError::Unreachable);
            }
            diam = diam.max(dist[u]);
        }
    }
    Ok(diam)
}
