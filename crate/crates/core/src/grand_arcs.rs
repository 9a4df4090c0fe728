//! Grand arcs at window scale.
//!
//! An arc joining boundary labels `a` and `b` is recorded by its enclosing curve: the
//! boundary of a regular neighbourhood of the arc together with both boundary
//! components. One side of that curve is a genus-zero piece carrying exactly `a` and `b`,
//! and the arc is determined by the curve and that side.

use std::collections::VecDeque;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{cut, disjoint_words, intersection_words, Curve};
use crate::end_calculus::{EndSpace, MaximalKind};
use crate::error::{CnpError, Result};
use crate::group_words::Ambient;
use crate::peripherality_cnp::{enumerate_simple, is_nonperipheral, CnpGraph};
use crate::windows::CombWindow;
use crate::words::{self, Letter};

/// Number of distinct maximal end types.
pub fn maximal_type_count(space: &EndSpace) -> usize {
    (0..space.len()).filter(|&i| space.kind(i) != MaximalKind::NotMaximal).count()
}

/// The maximal type carried by a label, when there is exactly one.
pub fn label_type(w: &CombWindow, space: &EndSpace, label: usize) -> Option<usize> {
    let mut found = (0..space.len()).filter(|&i| space.kind(i) != MaximalKind::NotMaximal && w.labels[label].contents[i].meets());
    let t = found.next()?;
    found.next().is_none().then_some(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GrandArc {
    pub level: usize,
    pub enclosing: Curve,
    /// Endpoint labels, in increasing order.
    pub ends: (usize, usize),
    /// Orbit ids of the endpoint types, matching `ends`.
    pub types: (String, String),
}

impl GrandArc {
    pub fn crossing_word(&self, w: &CombWindow) -> Vec<i32> {
        self.enclosing.crossing_word(w)
    }

    fn shares(&self, other: &GrandArc) -> usize {
        let (a, b) = self.ends;
        [other.ends.0, other.ends.1].iter().filter(|&&x| x == a || x == b).count()
    }
}

/// Grand arcs whose enclosing curve is `c`: one per genus-zero side holding two labels
/// of distinct maximal types.
pub fn arcs_from_curve(w: &CombWindow, space: &EndSpace, c: &Curve) -> Vec<GrandArc> {
    let info = cut(w, &c.word);
    if !info.separating() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for side in &info.sides {
        if side.genus != 0 || side.labels.len() != 2 {
            continue;
        }
        let (a, b) = (side.labels[0].min(side.labels[1]), side.labels[0].max(side.labels[1]));
        if let (Some(ta), Some(tb)) = (label_type(w, space, a), label_type(w, space, b)) {
            if ta != tb {
                out.push(GrandArc {
                    level: w.level,
                    enclosing: c.clone(),
                    ends: (a, b),
                    types: (space.orbits[ta].id.clone(), space.orbits[tb].id.clone()),
                });
            }
        }
    }
    out
}

/// All grand arcs whose enclosing curve has complexity at most `cap`.
pub fn enumerate_grand_arcs(w: &CombWindow, space: &EndSpace, cap: u32) -> Vec<GrandArc> {
    enumerate_simple(w, cap)
        .into_iter()
        .flat_map(|word| arcs_from_curve(w, space, &Curve::from_canonical(w.level, word)))
        .collect()
}

/// The arc can be isotoped off the curve. Inside its own pants the only curves are
/// peripheral, so this is disjointness from the enclosing curve.
pub fn arc_disjoint_from_curve(w: &CombWindow, arc: &GrandArc, c: &Curve) -> bool {
    disjoint_words(w, &arc.enclosing.word, &c.word)
}

/// Disjointness of two distinct arcs. With no common endpoint it is disjointness of the
/// enclosing curves. With one common endpoint both arcs sit in a four-holed sphere
/// exactly when the enclosing curves meet twice. Arcs with both endpoints in common are
/// treated as never disjoint.
pub fn arcs_disjoint(w: &CombWindow, x: &GrandArc, y: &GrandArc) -> bool {
    if x == y {
        return false;
    }
    match x.shares(y) {
        0 => disjoint_words(w, &x.enclosing.word, &y.enclosing.word),
        1 => intersection_words(w, &x.enclosing.word, &y.enclosing.word) == 2,
        _ => false,
    }
}

/// A choice of end neighbourhoods: for each endpoint, a run of deep-window labels
/// inside the block of the endpoint label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Neighborhoods {
    pub a: Range<usize>,
    pub b: Range<usize>,
}

/// Runs of consecutive labels inside each endpoint block that contain the label holding
/// the ideal endpoint. A run touching the outer label can only be the whole block.
pub fn neighborhood_choices(amb: &Ambient, arc: &GrandArc) -> Result<Vec<Neighborhoods>> {
    if arc.level != 0 {
        return Err(CnpError::LevelMismatch(arc.level, 0));
    }
    let top = amb.top();
    let outer = top.outer();
    let blocks = amb.label_blocks();
    let runs = |label: usize| -> Vec<Range<usize>> {
        let block = &blocks[label];
        let whole = block[0]..block[block.len() - 1] + 1;
        if block.contains(&outer) {
            return vec![whole];
        }
        let t = label_type(&amb.chain[0], &amb.space, label);
        // The ideal endpoint sits in the middle label of its type, so that runs on both
        // sides of it are available.
        let of_type: Vec<usize> = (0..block.len()).filter(|&i| label_type(top, &amb.space, block[i]) == t).collect();
        let deepest = if of_type.is_empty() { block.len() - 1 } else { of_type[of_type.len() / 2] };
        let mut out = Vec::new();
        for s in 0..=deepest {
            for e in deepest..block.len() {
                out.push(block[s]..block[e] + 1);
            }
        }
        out
    };
    let (ra, rb) = (runs(arc.ends.0), runs(arc.ends.1));
    Ok(ra.iter().flat_map(|a| rb.iter().map(move |b| Neighborhoods { a: a.clone(), b: b.clone() })).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallNeighborhoodCurve {
    pub curve: Curve,
    pub nonperipheral: bool,
    pub certificate: String,
}

/// Writes a cyclic word as `x_a^e w x_b^f w^-1` (up to rotation), which reads off an
/// arc from `a` to `b` running along the path `w`.
fn split_arc(c: &[Letter], a: usize, b: usize) -> Option<(bool, Vec<Letter>, bool)> {
    let m = c.len();
    if m % 2 != 0 {
        return None;
    }
    let half = (m - 2) / 2;
    for s in 0..m {
        let v = words::rotate(c, s);
        if words::gen_of(v[0]) != a || words::gen_of(v[half + 1]) != b {
            continue;
        }
        let w = &v[1..half + 1];
        if words::inverse(w)[..] == v[half + 2..] {
            return Some((v[0] > 0, w.to_vec(), v[half + 1] > 0));
        }
    }
    None
}

/// Boundary of a regular neighbourhood of the arc and both chosen end neighbourhoods,
/// in the top window of `amb`. The level-0 arc runs along a path `w`; its lift carries
/// the standard extension into each endpoint block, and the encircled blocks are shrunk
/// to the chosen runs.
pub fn small_neighborhood_curve(amb: &Ambient, arc: &GrandArc, nb: &Neighborhoods) -> Result<SmallNeighborhoodCurve> {
    if maximal_type_count(&amb.space) < 3 {
        return Err(CnpError::TooFewTypes);
    }
    if arc.level != 0 {
        return Err(CnpError::LevelMismatch(arc.level, 0));
    }
    let (w0, top) = (&amb.chain[0], amb.top());
    let blocks = amb.label_blocks();
    for (label, run) in [(arc.ends.0, &nb.a), (arc.ends.1, &nb.b)] {
        let block = &blocks[label];
        if run.is_empty() || run.start < block[0] || run.end > block[block.len() - 1] + 1 {
            return Err(CnpError::Malformed(format!("neighbourhood {run:?} leaves block {block:?}")));
        }
    }
    let lifted = amb.lift(&arc.enclosing)?;
    let word = if arc.ends.1 == w0.outer() {
        // No loop around the outer label: only whole blocks are available there.
        let block = &blocks[arc.ends.1];
        if nb.b != (block[0]..block[block.len() - 1] + 1) || nb.a != (blocks[arc.ends.0][0]..blocks[arc.ends.0][blocks[arc.ends.0].len() - 1] + 1) {
            return Err(CnpError::Malformed("an arc to the outer label admits only whole blocks".into()));
        }
        lifted.word.clone()
    } else {
        let (ea, path, eb) = split_arc(&arc.enclosing.word, arc.ends.0, arc.ends.1).ok_or(CnpError::WindowOverflow)?;
        let (n0, nt) = (w0.n_loops(), top.n_loops());
        let lift_gen = |g: usize| -> Vec<Letter> {
            if g < n0 {
                let b = &blocks[g];
                (b[0]..b[b.len() - 1] + 1).map(|x| words::letter(x, true)).collect()
            } else {
                vec![words::letter(g - n0 + nt, true)]
            }
        };
        let run = |r: &Range<usize>, pos: bool| -> Vec<Letter> {
            let v: Vec<Letter> = r.clone().map(|x| words::letter(x, true)).collect();
            if pos { v } else { words::inverse(&v) }
        };
        let lp = words::substitute(&path, &lift_gen);
        let assemble = |ra: &Range<usize>, rb: &Range<usize>| -> Vec<Letter> {
            let mut v = run(ra, ea);
            v.extend(&lp);
            v.extend(run(rb, eb));
            v.extend(words::inverse(&lp));
            v
        };
        // The whole-block choice must reproduce the lift.
        let whole = |l: usize| blocks[l][0]..blocks[l][blocks[l].len() - 1] + 1;
        if Curve::new(top, &assemble(&whole(arc.ends.0), &whole(arc.ends.1)))? != lifted {
            return Err(CnpError::WindowOverflow);
        }
        assemble(&nb.a, &nb.b)
    };
    let curve = Curve::new(top, &word)?;
    let verdict = is_nonperipheral(&curve, top, &amb.space)?;
    Ok(SmallNeighborhoodCurve { curve, nonperipheral: verdict.nonperipheral, certificate: verdict.certificate })
}

/// Pairwise distance bounds inside a set of non-peripheral curves: 0 when equal, 1 when
/// disjoint, 2 when some non-peripheral curve of the set or of `extra` misses both.
/// `None` marks a pair with no such witness.
pub fn pairwise_bounds(w: &CombWindow, curves: &[Curve], extra: &[Curve]) -> Vec<(usize, usize, Option<usize>)> {
    let pairs: Vec<(usize, usize)> = (0..curves.len()).flat_map(|i| (i + 1..curves.len()).map(move |j| (i, j))).collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| {
            let (x, y) = (&curves[i], &curves[j]);
            let d = if x == y {
                Some(0)
            } else if disjoint_words(w, &x.word, &y.word) {
                Some(1)
            } else {
                curves
                    .iter()
                    .chain(extra)
                    .any(|z| z != x && z != y && disjoint_words(w, &z.word, &x.word) && disjoint_words(w, &z.word, &y.word))
                    .then_some(2)
            };
            (i, j, d)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcDiameter {
    pub arc: GrandArc,
    pub choices: usize,
    pub curves: Vec<Curve>,
    pub all_nonperipheral: bool,
    /// Largest certified pairwise distance; `None` when some pair lacks a witness.
    pub diameter: Option<usize>,
}

/// Small-neighbourhood curves of one arc over every neighbourhood choice, with the
/// certified diameter of the resulting set.
pub fn arc_diameter(amb: &Ambient, arc: &GrandArc, extra: &[Curve]) -> Result<ArcDiameter> {
    let choices = neighborhood_choices(amb, arc)?;
    let mut curves = Vec::new();
    let mut all_np = true;
    for nb in &choices {
        let s = small_neighborhood_curve(amb, arc, nb)?;
        all_np &= s.nonperipheral;
        curves.push(s.curve);
    }
    curves.sort();
    curves.dedup();
    let bounds = pairwise_bounds(amb.top(), &curves, extra);
    let diameter = bounds.iter().try_fold(0, |m, &(_, _, d)| d.map(|d| m.max(d)));
    Ok(ArcDiameter { arc: arc.clone(), choices: choices.len(), curves, all_nonperipheral: all_np, diameter })
}

/// Level-0 arcs with at least `min_choices` neighbourhood choices in the top window,
/// sampled deterministically.
pub fn random_grand_arcs(amb: &Ambient, cap: u32, count: usize, min_choices: usize, seed: u64) -> Result<Vec<GrandArc>> {
    let w0 = &amb.chain[0];
    let mut pool = Vec::new();
    for arc in enumerate_grand_arcs(w0, &amb.space, cap) {
        if neighborhood_choices(amb, &arc)?.len() >= min_choices {
            pool.push(arc);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(count);
    Ok(pool)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Y,
    Y0,
    GAhat,
}

impl std::str::FromStr for Variant {
    type Err = CnpError;
    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "Y" => Ok(Variant::Y),
            "Y0" => Ok(Variant::Y0),
            "GAhat" => Ok(Variant::GAhat),
            _ => Err(CnpError::Malformed(format!("unknown variant {s}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HybridGraph {
    pub variant: Variant,
    pub level: usize,
    pub cap: u32,
    /// Non-peripheral curves; empty for `GAhat`, where they only index the cliques.
    pub curves: Vec<Curve>,
    pub arcs: Vec<GrandArc>,
    /// For each arc, the indices of capped curves it misses.
    pub arc_curve: Vec<Vec<usize>>,
    /// Capped curves used for electrification (`GAhat`) or as vertices.
    pub curve_pool: Vec<Curve>,
    pub adj: Vec<Vec<usize>>,
    pub electrified_edges: usize,
}

impl HybridGraph {
    pub fn curve_vertex(&self, i: usize) -> usize {
        assert!(self.variant != Variant::GAhat, "GAhat has no curve vertices");
        i
    }

    pub fn arc_vertex(&self, k: usize) -> usize {
        self.curves.len() + k
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn bfs(&self, s: usize) -> Vec<usize> {
        bfs(&self.adj, s)
    }

    pub fn to_dot(&self, w: &CombWindow) -> String {
        let name = match self.variant {
            Variant::Y => "Y",
            Variant::Y0 => "Y0",
            Variant::GAhat => "GAhat",
        };
        let mut s = format!("graph {name} {{\n");
        for (i, c) in self.curves.iter().enumerate() {
            s.push_str(&format!("  {i} [shape=ellipse,label=\"{:?}\"];\n", c.crossing_word(w)));
        }
        for (k, a) in self.arcs.iter().enumerate() {
            s.push_str(&format!(
                "  {} [shape=box,label=\"{}-{} {:?}\"];\n",
                self.arc_vertex(k),
                a.types.0,
                a.types.1,
                a.crossing_word(w)
            ));
        }
        for (i, nb) in self.adj.iter().enumerate() {
            for &j in nb.iter().filter(|&&j| i < j) {
                s.push_str(&format!("  {i} -- {j};\n"));
            }
        }
        s.push_str("}\n");
        s
    }
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut q = VecDeque::from([s]);
    dist[s] = 0;
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

/// Capped hybrid graph on one window. Curve and arc vertices both respect `cap`.
pub fn build_hybrid(space: &EndSpace, w: &CombWindow, cap: u32, variant: Variant) -> Result<HybridGraph> {
    if maximal_type_count(space) < 3 {
        return Err(CnpError::TooFewTypes);
    }
    let graph = CnpGraph::build(w, space, cap)?;
    let arcs = enumerate_grand_arcs(w, space, cap);
    if arcs.is_empty() {
        return Err(CnpError::CapExceeded(format!("no grand arcs at level {} within cap {cap}", w.level)));
    }
    let pool = graph.curves.clone();
    let arc_curve: Vec<Vec<usize>> = arcs
        .par_iter()
        .map(|a| (0..pool.len()).filter(|&i| arc_disjoint_from_curve(w, a, &pool[i])).collect())
        .collect();
    let na = arcs.len();
    let arc_arc: Vec<Vec<usize>> =
        (0..na).into_par_iter().map(|k| (0..na).filter(|&l| arcs_disjoint(w, &arcs[k], &arcs[l])).collect()).collect();

    let (curves, mut adj, mut electrified) = match variant {
        Variant::Y => (pool.clone(), graph.adj.clone(), 0),
        Variant::Y0 => (pool.clone(), vec![Vec::new(); pool.len()], 0),
        Variant::GAhat => (Vec::new(), Vec::new(), 0),
    };
    let nc = curves.len();
    adj.resize(nc + na, Vec::new());
    for k in 0..na {
        for &l in &arc_arc[k] {
            adj[nc + k].push(nc + l);
        }
        if variant != Variant::GAhat {
            for &i in &arc_curve[k] {
                adj[nc + k].push(i);
                adj[i].push(nc + k);
            }
        }
    }
    if variant == Variant::GAhat {
        // Cone each GA_alpha to a clique: arcs missing a common curve become adjacent.
        let words = pool.len().div_ceil(64);
        let bits: Vec<Vec<u64>> = arc_curve
            .iter()
            .map(|l| {
                let mut b = vec![0u64; words];
                for &i in l {
                    b[i / 64] |= 1 << (i % 64);
                }
                b
            })
            .collect();
        let extra: Vec<Vec<usize>> = (0..na)
            .into_par_iter()
            .map(|k| {
                (0..na)
                    .filter(|&l| l != k && !arc_arc[k].contains(&l))
                    .filter(|&l| bits[k].iter().zip(&bits[l]).any(|(x, y)| x & y != 0))
                    .collect()
            })
            .collect();
        for (k, e) in extra.into_iter().enumerate() {
            electrified += e.len();
            adj[k].extend(e);
        }
        electrified /= 2;
    }
    for nb in adj.iter_mut() {
        nb.sort_unstable();
        nb.dedup();
    }
    Ok(HybridGraph {
        variant,
        level: w.level,
        cap,
        curves,
        arcs,
        arc_curve,
        curve_pool: pool,
        adj,
        electrified_edges: electrified,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GaAlpha {
    /// Indices into the hybrid's arc list.
    pub arcs: Vec<usize>,
    /// Disjointness edges among them (pairs of positions in `arcs`).
    pub edges: Vec<(usize, usize)>,
    pub diagnostic: Option<String>,
}

/// Subgraph spanned by the capped grand arcs disjoint from `alpha`.
pub fn ga_alpha(h: &HybridGraph, w: &CombWindow, space: &EndSpace, alpha: &Curve) -> Result<GaAlpha> {
    if !is_nonperipheral(alpha, w, space)?.nonperipheral {
        return Err(CnpError::HypothesisViolation("alpha is peripheral".into()));
    }
    let arcs: Vec<usize> = (0..h.arcs.len()).filter(|&k| arc_disjoint_from_curve(w, &h.arcs[k], alpha)).collect();
    let mut edges = Vec::new();
    for (p, &k) in arcs.iter().enumerate() {
        for (q, &l) in arcs.iter().enumerate().skip(p + 1) {
            if arcs_disjoint(w, &h.arcs[k], &h.arcs[l]) {
                edges.push((p, q));
            }
        }
    }
    let diagnostic = arcs
        .is_empty()
        .then(|| format!("every arc within cap {} meets alpha; raise the cap or the level", h.cap));
    Ok(GaAlpha { arcs, edges, diagnostic })
}

impl GaAlpha {
    /// Sampled pairs (seeded) and how many are joined by a path inside the subgraph.
    pub fn sampled_connectivity(&self, samples: usize, seed: u64) -> (usize, usize) {
        let n = self.arcs.len();
        if n < 2 {
            return (0, 0);
        }
        let mut adj = vec![Vec::new(); n];
        for &(p, q) in &self.edges {
            adj[p].push(q);
            adj[q].push(p);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut joined = 0;
        for _ in 0..samples {
            let p = rand::Rng::gen_range(&mut rng, 0..n);
            let q = rand::Rng::gen_range(&mut rng, 0..n);
            if bfs(&adj, p)[q] != usize::MAX {
                joined += 1;
            }
        }
        (samples, joined)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceComparison {
    pub pairs: usize,
    /// Pairs breaking `d_Y <= d_Cnp`.
    pub lower_violations: usize,
    /// Smallest A with `d_Cnp <= A d_Y + A` over the sampled pairs.
    pub a: f64,
    pub disconnected: usize,
}

/// Compares curve distances in the hybrid graph with those in the curve graph on
/// sampled pairs of curve vertices.
pub fn compare_distances(h: &HybridGraph, graph: &CnpGraph, samples: usize, seed: u64) -> Result<DistanceComparison> {
    if h.variant == Variant::GAhat {
        return Err(CnpError::HypothesisViolation("GAhat has no curve vertices".into()));
    }
    let n = h.curves.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> =
        (0..samples).map(|_| (rand::Rng::gen_range(&mut rng, 0..n), rand::Rng::gen_range(&mut rng, 0..n))).collect();
    let rows: Vec<(usize, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let j_graph = graph.index_of(&h.curves[j]).expect("same curve set");
            let i_graph = graph.index_of(&h.curves[i]).expect("same curve set");
            (h.bfs(i)[j], graph.bfs(i_graph)[j_graph])
        })
        .collect();
    let mut out = DistanceComparison { pairs: rows.len(), lower_violations: 0, a: 0.0, disconnected: 0 };
    for (dy, dc) in rows {
        if dy == usize::MAX || dc == usize::MAX {
            out.disconnected += 1;
            continue;
        }
        if dy > dc {
            out.lower_violations += 1;
        }
        out.a = out.a.max(dc as f64 / (dy as f64 + 1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
