//! Finite-type windows: levels of an exhaustion realized as ribbon graphs.
//!
//! A window with `b` boundary labels and genus `g` is modeled by a one-vertex
//! ribbon graph (a rose) with `r = b - 1 + 2g` loops. Loop `k < b - 1` goes once
//! around boundary label `k`; the last label is the outer boundary and the
//! remaining loops come in handle pairs. Cutting along the arcs dual to the
//! loops leaves a `2r`-gon whose corners are the boundary labels; a fan from
//! corner 0 triangulates it. Curves are reduced cyclic words in the loops, and
//! their crossing words with the triangulation edges are derived from that.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::end_calculus::{
    anchor_decomposition, shift_orbit_decomposition, Block, ClopenProfile, Content, EndSpace, Genus, Track,
};
use crate::error::{CnpError, Result};
use crate::words::{self, gen_of, Letter};

/// Default track truncation J.
pub const DEFAULT_TRUNCATION: usize = 8;

/// What a boundary label stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LabelRole {
    /// An anchor block (or the remainder of one after removing track pieces).
    Block(Block),
    /// Piece W^k of a realized track.
    TrackPiece { track: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundaryLabel {
    pub name: String,
    pub role: LabelRole,
    pub profile: ClopenProfile,
    /// Per-orbit content, in space order.
    pub contents: Vec<Content>,
    pub planar: bool,
}

/// A shift track that the window layout realizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealizedTrack {
    pub track: Track,
    pub source: usize,
    pub dest: usize,
    /// Labels of W^1..W^level in order.
    pub pieces: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HalfEdge {
    /// Surface vertex (boundary label) this half-edge leaves from.
    pub origin: usize,
    pub twin: usize,
    pub next: usize,
    /// Triangle index.
    pub face: usize,
    /// Undirected edge id: arcs `0..r`, diagonals after.
    pub edge: usize,
}

/// Fan triangulation of the cut-open window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Triangulation {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub half_edges: Vec<HalfEdge>,
    /// Triangles as triples of half-edge ids.
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CombWindow {
    pub level: usize,
    pub truncation: usize,
    pub genus: u32,
    pub surface_genus_infinite: bool,
    /// Boundary labels; the last one is the outer boundary.
    pub labels: Vec<BoundaryLabel>,
    pub tracks: Vec<RealizedTrack>,
    /// Tracks that could not be laid out because their blocks were already used.
    pub unrealized_tracks: Vec<Track>,
    pub triangulation: Triangulation,
    /// Half-edges leaving each label's vertex, in rotation order.
    pub boundary_cycles: Vec<Vec<usize>>,
    /// For level > 0: the labels each level-(l-1) label splits into.
    pub parent_level_boundary: Option<Vec<Vec<usize>>>,
    /// Boundary label at each polygon corner (corner `c` sits between sides `c-1` and `c`).
    pub corners: Vec<usize>,
    #[serde(skip)]
    pos: Vec<usize>,
    #[serde(skip)]
    order: Vec<usize>,
    #[serde(skip)]
    passage: Vec<Vec<u32>>,
}

/// Slot where a letter leaves the rose vertex.
pub fn slot_start(l: Letter) -> usize {
    2 * gen_of(l) + usize::from(l < 0)
}

/// Slot where a letter returns to the rose vertex.
pub fn slot_end(l: Letter) -> usize {
    2 * gen_of(l) + usize::from(l > 0)
}

impl CombWindow {
    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn outer(&self) -> usize {
        self.labels.len() - 1
    }

    /// Number of loops around inner boundary labels.
    pub fn n_loops(&self) -> usize {
        self.labels.len().saturating_sub(1)
    }

    /// Rank of the free fundamental group.
    pub fn n_gen(&self) -> usize {
        self.n_loops() + 2 * self.genus as usize
    }

    pub fn n_slots(&self) -> usize {
        2 * self.n_gen()
    }

    /// Cyclic position of a slot around the rose vertex.
    pub fn pos(&self, slot: usize) -> usize {
        self.pos[slot]
    }

    /// Slot at a cyclic position.
    pub fn slot_at(&self, p: usize) -> usize {
        self.order[p]
    }

    /// Counterclockwise distance from slot `a` to slot `b`.
    pub fn ccw(&self, a: usize, b: usize) -> usize {
        let n = self.n_slots();
        (self.pos[b] + n - self.pos[a]) % n
    }

    /// Is `x` met before `y` going counterclockwise from `base`?
    pub fn between(&self, base: usize, x: usize, y: usize) -> bool {
        self.ccw(base, x) < self.ccw(base, y)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == name)
    }

    /// Generator index of the handle pair `h` (a, b).
    pub fn handle_gens(&self, h: usize) -> (usize, usize) {
        let a = self.n_loops() + 2 * h;
        (a, a + 1)
    }

    /// Loop word freely homotopic to the boundary of label `i` (oriented as the product order).
    pub fn boundary_word(&self, i: usize) -> Vec<Letter> {
        if i < self.n_loops() {
            vec![words::letter(i, true)]
        } else {
            let mut w: Vec<Letter> = (0..self.n_loops()).map(|k| words::letter(k, true)).collect();
            for h in 0..self.genus as usize {
                let (a, b) = self.handle_gens(h);
                let (a, b) = (words::letter(a, true), words::letter(b, true));
                w.extend([a, b, -a, -b]);
            }
            w
        }
    }

    /// Loop around the consecutive inner labels `lo..=hi`.
    pub fn interval_word(&self, lo: usize, hi: usize) -> Vec<Letter> {
        (lo..=hi).map(|k| words::letter(k, true)).collect()
    }

    /// Number of diagonals crossed passing from the side of slot `a` to the side of slot `b`.
    pub fn passage_cost(&self, a: usize, b: usize) -> u32 {
        self.passage[self.pos[a]][self.pos[b]]
    }

    /// Length of the cyclic crossing word of a reduced cyclic loop word.
    pub fn complexity(&self, w: &[Letter]) -> u32 {
        let m = w.len();
        (0..m).map(|t| 1 + self.passage_cost(slot_end(w[t]), slot_start(w[(t + 1) % m]))).sum()
    }

    /// Crossing word over triangulation edges, each encoded as a signed `edge + 1`.
    pub fn crossing_word(&self, w: &[Letter]) -> Vec<i32> {
        let r = self.n_gen();
        let m = w.len();
        let mut out = Vec::new();
        for t in 0..m {
            out.push(w[t]);
            let p = self.pos[slot_end(w[t])];
            let q = self.pos[slot_start(w[(t + 1) % m])];
            let diag = |j: usize| (r + j - 2 + 1) as i32;
            if p < q {
                for j in (p + 1)..=q {
                    if (2..=2 * r - 2).contains(&j) {
                        out.push(diag(j));
                    }
                }
            } else {
                for j in ((q + 1)..=p).rev() {
                    if (2..=2 * r - 2).contains(&j) {
                        out.push(-diag(j));
                    }
                }
            }
        }
        out
    }

    /// Parses a crossing word back into a reduced loop word.
    pub fn loops_from_crossing(&self, cw: &[i32]) -> Result<Vec<Letter>> {
        let r = self.n_gen();
        let edges = self.triangulation.edge_count.max(r);
        for &e in cw {
            if e == 0 || e.unsigned_abs() as usize > edges {
                return Err(CnpError::Malformed(format!("edge id {e} out of range")));
            }
        }
        let red = words::cyclic_reduce(cw);
        let arcs: Vec<Letter> = red.iter().copied().filter(|e| (e.unsigned_abs() as usize) <= r).collect();
        if arcs.is_empty() {
            return Err(CnpError::NullHomotopic);
        }
        if arcs.len() < red.len() {
            let first = red.iter().position(|e| (e.unsigned_abs() as usize) <= r).unwrap();
            let rotated = words::rotate(&red, first);
            if self.crossing_word(&arcs) != rotated {
                return Err(CnpError::Malformed("diagonal crossings do not match the triangulation".into()));
            }
        }
        Ok(words::cyclic_reduce(&arcs))
    }

    /// Side-union content: `All` exactly when the set holds every label meeting the orbit.
    pub fn side_contents(&self, side: &[usize]) -> Vec<Content> {
        let n = self.labels.first().map_or(0, |l| l.contents.len());
        (0..n)
            .map(|z| {
                let meeting: Vec<usize> = (0..self.labels.len()).filter(|&i| self.labels[i].contents[z].meets()).collect();
                let inside = meeting.iter().filter(|i| side.contains(i)).count();
                if inside == 0 {
                    Content::None
                } else if inside == meeting.len() {
                    Content::All
                } else {
                    Content::Partial
                }
            })
            .collect()
    }

    pub fn side_profile(&self, space: &EndSpace, side: &[usize]) -> ClopenProfile {
        ClopenProfile::from_contents(space, &self.side_contents(side))
    }

    /// Reindexes a level-(l-1) word into this window via `x_D -> x_{W^l} x_D` on every track.
    pub fn embed_from_parent(&self, parent: &CombWindow, w: &[Letter]) -> Result<Vec<Letter>> {
        if parent.level + 1 != self.level {
            return Err(CnpError::LevelMismatch(parent.level + 1, self.level));
        }
        let map = self.parent_level_boundary.as_ref().ok_or(CnpError::LevelMismatch(parent.level, self.level))?;
        let np = parent.n_loops();
        let image = |g: usize| -> Vec<Letter> {
            if g < np {
                map[g].iter().map(|&k| words::letter(k, true)).collect()
            } else {
                vec![words::letter(g - np + self.n_loops(), true)]
            }
        };
        Ok(words::cyclic_reduce(&words::substitute(w, &image)))
    }

    /// Image of a loop word under the shift along realized track `t` (or its inverse).
    ///
    /// Works in the basis of nested products `P_j = x_S x_{W1} .. x_{Wj}`, where
    /// the shift sends `P_j` to `P_{j+1}` and fixes the product over the whole track.
    /// The one nested curve whose image would leave the window makes the call fail.
    pub fn track_shift(&self, t: usize, inverse: bool, w: &[Letter]) -> Result<Vec<Letter>> {
        let tr = self.tracks.get(t).ok_or_else(|| CnpError::Malformed(format!("no track {t}")))?;
        let l = tr.pieces.len();
        let mut chain: Vec<usize> = vec![tr.source];
        chain.extend(&tr.pieces);
        let dest_inner = tr.dest != self.outer();
        if dest_inner {
            chain.push(tr.dest);
        }
        // P-basis letters live above the ordinary generators.
        let base = self.n_gen();
        let p = |j: usize| words::letter(base + j, true);
        let in_chain = |g: usize| chain.iter().position(|&c| c == g);
        let to_p = |g: usize| -> Vec<Letter> {
            match in_chain(g) {
                Some(0) => vec![p(0)],
                Some(j) => vec![-p(j - 1), p(j)],
                None => vec![words::letter(g, true)],
            }
        };
        let wp = words::cyclic_reduce(&words::substitute(w, &to_p));
        let blocked = if inverse { 0 } else { l };
        if wp.iter().any(|&x| gen_of(x) == base + blocked) {
            return Err(CnpError::WindowOverflow);
        }
        let top = chain.len() - 1;
        let shift = |g: usize| -> Vec<Letter> {
            if g < base {
                return vec![words::letter(g, true)];
            }
            let j = g - base;
            let nj = if dest_inner && j == top {
                j
            } else if inverse {
                j - 1
            } else {
                j + 1
            };
            vec![p(nj)]
        };
        let shifted = words::substitute(&wp, &shift);
        let from_p = |g: usize| -> Vec<Letter> {
            if g < base {
                vec![words::letter(g, true)]
            } else {
                chain[..=g - base].iter().map(|&c| words::letter(c, true)).collect()
            }
        };
        Ok(words::cyclic_reduce(&words::substitute(&shifted, &from_p)))
    }

    /// Half twist exchanging the adjacent inner labels `i` and `i+1`.
    pub fn half_twist(&self, i: usize, inverse: bool, w: &[Letter]) -> Result<Vec<Letter>> {
        if i + 1 >= self.n_loops() {
            return Err(CnpError::Malformed(format!("labels {i},{} are not both inner", i + 1)));
        }
        let (a, b) = (words::letter(i, true), words::letter(i + 1, true));
        let image = |g: usize| -> Vec<Letter> {
            if g == i {
                if inverse {
                    vec![b]
                } else {
                    vec![a, b, -a]
                }
            } else if g == i + 1 {
                if inverse {
                    vec![-b, a, b]
                } else {
                    vec![a]
                }
            } else {
                vec![words::letter(g, true)]
            }
        };
        Ok(words::cyclic_reduce(&words::substitute(w, &image)))
    }

    /// Braid exchanging inner labels `i < j`, carrying the labels in between along.
    ///
    /// Realized as `s_{j-1}^-1 .. s_{i+1}^-1 s_i s_{i+1} .. s_{j-1}` in application order.
    pub fn label_swap(&self, i: usize, j: usize, inverse: bool, w: &[Letter]) -> Result<Vec<Letter>> {
        if i >= j || j >= self.n_loops() {
            return Err(CnpError::Malformed(format!("cannot swap labels {i} and {j}")));
        }
        let seq = swap_sequence(i, j, inverse);
        let mut out = w.to_vec();
        for (k, inv) in seq {
            out = self.half_twist(k, inv, &out)?;
        }
        Ok(out)
    }

    /// Checks the structural invariants and returns diagnostics (empty when valid).
    pub fn validate(&self) -> Vec<String> {
        let mut diag = Vec::new();
        let tri = &self.triangulation;
        if self.boundary_cycles.len() != self.labels.len() || self.labels.iter().any(|l| l.name.is_empty()) {
            diag.push("unlabeled boundary".to_string());
        }
        if tri.vertex_count != self.labels.len() {
            diag.push(format!("vertex count {} != label count {}", tri.vertex_count, self.labels.len()));
        }
        let faces = tri.triangles.len().max(1) as i64;
        let chi = tri.vertex_count as i64 - tri.edge_count as i64 + faces;
        if chi != 2 - 2 * self.genus as i64 {
            diag.push(format!("chi mismatch: V-E+F = {chi}, expected {}", 2 - 2 * self.genus as i64));
        }
        for (i, h) in tri.half_edges.iter().enumerate() {
            if tri.half_edges[h.twin].twin != i || tri.half_edges[h.twin].edge != h.edge {
                diag.push(format!("half-edge {i}: twin mismatch"));
            }
            let n3 = tri.half_edges[tri.half_edges[h.next].next].next;
            if n3 != i {
                diag.push(format!("half-edge {i}: face is not a triangle"));
            }
            if tri.half_edges[h.next].origin != tri.half_edges[h.twin].origin {
                diag.push(format!("half-edge {i}: next does not start at its head"));
            }
        }
        for (v, cyc) in self.boundary_cycles.iter().enumerate() {
            if cyc.iter().any(|&h| tri.half_edges[h].origin != v) {
                diag.push(format!("boundary cycle {v} has a foreign half-edge"));
            }
        }
        let total: usize = self.boundary_cycles.iter().map(Vec::len).sum();
        if total != tri.half_edges.len() {
            diag.push("boundary cycles do not cover all half-edges".to_string());
        }
        diag
    }

    /// Serializable dump of the window.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("window serializes")
    }
}

fn label_planar(space: &EndSpace, contents: &[Content]) -> bool {
    contents.iter().zip(&space.orbits).all(|(c, o)| !c.meets() || o.planar)
}

fn block_label(space: &EndSpace, b: &Block) -> BoundaryLabel {
    let contents = crate::end_calculus::block_contents(space, b);
    BoundaryLabel {
        name: b.name.clone(),
        role: LabelRole::Block(b.clone()),
        profile: ClopenProfile::from_contents(space, &contents),
        planar: label_planar(space, &contents),
        contents,
    }
}

fn piece_label(space: &EndSpace, track: &Track, t: usize, k: usize) -> BoundaryLabel {
    let contents = track.w_profile.contents(space);
    BoundaryLabel {
        name: format!("W{k}[{}>{}]", track.source, track.dest),
        role: LabelRole::TrackPiece { track: t, k },
        profile: track.w_profile.clone(),
        planar: label_planar(space, &contents),
        contents,
    }
}

/// Elementary half twists `(index, inverse)` realizing the exchange of inner labels `i < j`,
/// in application order.
pub fn swap_sequence(i: usize, j: usize, inverse: bool) -> Vec<(usize, bool)> {
    let mut seq: Vec<(usize, bool)> = ((i + 1)..j).rev().map(|k| (k, true)).collect();
    seq.push((i, false));
    seq.extend(((i + 1)..j).map(|k| (k, false)));
    if inverse {
        seq.reverse();
        for s in seq.iter_mut() {
            s.1 = !s.1;
        }
    }
    seq
}

/// Builds the level-`level` window of the exhaustion.
pub fn build_window(space: &EndSpace, level: usize) -> Result<CombWindow> {
    build_window_with(space, level, DEFAULT_TRUNCATION)
}

pub fn build_window_with(space: &EndSpace, level: usize, truncation: usize) -> Result<CombWindow> {
    if level > truncation {
        return Err(CnpError::TruncationExceeded { level, truncation });
    }
    let decomp = anchor_decomposition(space);
    let all_tracks = shift_orbit_decomposition(space, &decomp, truncation);
    let mut used: BTreeMap<String, bool> = BTreeMap::new();
    let mut chosen = Vec::new();
    let mut unrealized = Vec::new();
    for t in all_tracks {
        if used.contains_key(&t.source) || used.contains_key(&t.dest) {
            unrealized.push(t);
        } else {
            used.insert(t.source.clone(), true);
            used.insert(t.dest.clone(), true);
            chosen.push(t);
        }
    }
    let blocks: Vec<Block> = decomp.blocks().cloned().collect();
    let find = |name: &str| blocks.iter().find(|b| b.name == name).expect("track block exists").clone();
    let mut labels = Vec::new();
    for b in &blocks {
        if !used.contains_key(&b.name) {
            labels.push(block_label(space, b));
        }
    }
    let mut tracks = Vec::new();
    for (ti, t) in chosen.iter().enumerate() {
        let source = labels.len();
        labels.push(block_label(space, &find(&t.source)));
        let mut pieces = Vec::new();
        for k in 1..=level {
            pieces.push(labels.len());
            labels.push(piece_label(space, t, ti, k));
        }
        let dest = labels.len();
        labels.push(block_label(space, &find(&t.dest)));
        tracks.push(RealizedTrack { track: t.clone(), source, dest, pieces });
    }
    let genus = match space.genus {
        Genus::Finite(g) => g,
        Genus::Infinite => 0,
    };
    let parent_level_boundary = if level == 0 {
        None
    } else {
        // Level l-1 has the same layout with one piece fewer per track.
        let mut map = Vec::new();
        let mut idx = 0usize;
        let mut piece_of_dest: BTreeMap<usize, usize> = BTreeMap::new();
        for t in &tracks {
            piece_of_dest.insert(t.dest, *t.pieces.last().unwrap());
        }
        let last_pieces: Vec<usize> = tracks.iter().map(|t| *t.pieces.last().unwrap()).collect();
        while idx < labels.len() {
            if last_pieces.contains(&idx) {
                idx += 1;
                continue;
            }
            match piece_of_dest.get(&idx) {
                Some(&w) => map.push(vec![w, idx]),
                None => map.push(vec![idx]),
            }
            idx += 1;
        }
        Some(map)
    };
    let mut w = CombWindow {
        level,
        truncation,
        genus,
        surface_genus_infinite: space.genus.is_infinite(),
        labels,
        tracks,
        unrealized_tracks: unrealized,
        triangulation: Triangulation { vertex_count: 0, edge_count: 0, half_edges: vec![], triangles: vec![] },
        boundary_cycles: vec![],
        parent_level_boundary,
        corners: vec![],
        pos: vec![],
        order: vec![],
        passage: vec![],
    };
    w.build_rose();
    Ok(w)
}

impl CombWindow {
    fn build_rose(&mut self) {
        let r = self.n_gen();
        let nl = self.n_loops();
        let mut order = Vec::with_capacity(2 * r);
        for k in 0..nl {
            order.extend([2 * k, 2 * k + 1]);
        }
        for h in 0..self.genus as usize {
            let a = nl + 2 * h;
            let b = a + 1;
            order.extend([2 * a, 2 * b, 2 * a + 1, 2 * b + 1]);
        }
        let n = order.len();
        let mut pos = vec![0; n];
        for (i, &s) in order.iter().enumerate() {
            pos[s] = i;
        }
        self.pos = pos;
        self.order = order.clone();
        self.corners = self.corner_labels(&order);
        self.passage = (0..n)
            .map(|p| {
                (0..n)
                    .map(|q| {
                        let (lo, hi) = (p.min(q), p.max(q));
                        ((lo + 1)..=hi).filter(|j| (2..=n.saturating_sub(2)).contains(j)).count() as u32
                    })
                    .collect()
            })
            .collect();
        self.build_triangulation(&order);
    }

    /// Corner `c` of the polygon sits between sides `c-1` and `c`.
    fn corner_labels(&self, order: &[usize]) -> Vec<usize> {
        let n = order.len();
        if n == 0 {
            return vec![];
        }
        let mut uf: Vec<usize> = (0..n).collect();
        fn root(uf: &mut Vec<usize>, x: usize) -> usize {
            let mut x = x;
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for g in 0..n / 2 {
            // Side of slot 2g runs from corner p to p+1 and is glued reversed to the side of 2g+1.
            let p = self.pos[2 * g];
            let q = self.pos[2 * g + 1];
            let pairs = [(p, (q + 1) % n), ((p + 1) % n, q)];
            for (a, b) in pairs {
                let (ra, rb) = (root(&mut uf, a), root(&mut uf, b));
                uf[ra] = rb;
            }
        }
        let outer = self.outer();
        let mut class_label: BTreeMap<usize, usize> = BTreeMap::new();
        for k in 0..self.n_loops() {
            let c = (self.pos[2 * k] + 1) % n;
            let rc = root(&mut uf, c);
            class_label.insert(rc, k);
        }
        (0..n)
            .map(|c| {
                let rc = root(&mut uf, c);
                *class_label.get(&rc).unwrap_or(&outer)
            })
            .collect()
    }

    fn build_triangulation(&mut self, order: &[usize]) {
        let n = order.len();
        let r = n / 2;
        let b = self.labels.len();
        if n < 4 {
            let edge_count = r;
            self.triangulation = Triangulation { vertex_count: b, edge_count, half_edges: vec![], triangles: vec![] };
            self.boundary_cycles = vec![vec![]; b];
            return;
        }
        let corner = self.corner_labels(order);
        // Polygon edge ids: side p carries arc gen(order[p]); diagonal d_j (0 -> j) has id r + j - 2.
        let side_edge = |p: usize| order[p] / 2;
        let diag_edge = |j: usize| r + j - 2;
        let mut hes: Vec<HalfEdge> = Vec::new();
        let mut triangles = Vec::new();
        // Half-edge lookup by directed polygon corners.
        let mut by_corners: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in 1..=(n - 2) {
            let verts = [0, t, t + 1];
            let edges = [
                if t == 1 { side_edge(0) } else { diag_edge(t) },
                side_edge(t),
                if t + 1 == n - 1 { side_edge(n - 1) } else { diag_edge(t + 1) },
            ];
            let f = triangles.len();
            let base = hes.len();
            for i in 0..3 {
                hes.push(HalfEdge { origin: corner[verts[i]], twin: usize::MAX, next: base + (i + 1) % 3, face: f, edge: edges[i] });
                by_corners.insert((verts[i], verts[(i + 1) % 3]), base + i);
            }
            triangles.push([base, base + 1, base + 2]);
        }
        // Twins across diagonals.
        for j in 2..=(n - 2) {
            let a = by_corners[&(0, j)];
            let bb = by_corners[&(j, 0)];
            hes[a].twin = bb;
            hes[bb].twin = a;
        }
        // Twins across glued sides.
        for g in 0..r {
            let p = self.pos[2 * g];
            let q = self.pos[2 * g + 1];
            let a = by_corners[&(p, (p + 1) % n)];
            let bb = by_corners[&(q, (q + 1) % n)];
            hes[a].twin = bb;
            hes[bb].twin = a;
        }
        let mut cycles = vec![Vec::new(); b];
        for start in 0..hes.len() {
            let v = hes[start].origin;
            if cycles[v].contains(&start) {
                continue;
            }
            if !cycles[v].is_empty() {
                continue;
            }
            // Rotate around the vertex: prev edge's twin.
            let mut h = start;
            loop {
                cycles[v].push(h);
                let prev = hes[hes[h].next].next;
                h = hes[prev].twin;
                if h == start || cycles[v].len() > hes.len() {
                    break;
                }
            }
        }
        self.triangulation =
            Triangulation { vertex_count: b, edge_count: 3 * r - 3, half_edges: hes, triangles };
        self.boundary_cycles = cycles;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::end_calculus::zeta_surface;

    #[test]
    fn figure_four_level_zero() {
        let s = data::figure4();
        let w = build_window(&s, 0).unwrap();
        assert_eq!(w.genus, 0);
        assert_eq!(w.n_labels(), 4);
        assert!(w.validate().is_empty(), "{:?}", w.validate());
        let names: Vec<&str> = w.labels.iter().map(|l| l.name.as_str()).collect();
        assert_eq!(names, ["A:C1#1", "A:C1#2", "A:C2#1", "A:C2#2"]);
    }

    #[test]
    fn figure_five_layout() {
        let s = data::figure5();
        let w = build_window(&s, 2).unwrap();
        let names: Vec<&str> = w.labels.iter().map(|l| l.name.as_str()).collect();
        assert_eq!(names[0], "A:xC");
        assert_eq!(names[names.len() - 1], "P:xA");
        assert_eq!(w.n_labels(), 5 + 2 * 2);
        assert!(w.validate().is_empty(), "{:?}", w.validate());
        assert_eq!(build_window(&s, 0).unwrap().n_labels() as u32, zeta_surface(&s));
    }

    #[test]
    fn every_bundled_window_validates() {
        for (name, s) in data::all() {
            for l in 0..=3 {
                let w = build_window(&s, l).unwrap();
                assert!(w.validate().is_empty(), "{name} level {l}: {:?}", w.validate());
            }
        }
    }

    #[test]
    fn truncation_is_enforced() {
        let s = data::figure5();
        assert!(matches!(build_window_with(&s, 3, 2), Err(CnpError::TruncationExceeded { .. })));
    }

    #[test]
    fn broken_windows_are_diagnosed() {
        let s = data::figure5();
        let mut w = build_window(&s, 0).unwrap();
        w.boundary_cycles.pop();
        assert!(w.validate().iter().any(|d| d.contains("unlabeled boundary")));
        let mut w = build_window(&s, 0).unwrap();
        w.triangulation.edge_count += 1;
        assert!(w.validate().iter().any(|d| d.contains("chi mismatch")));
    }

    #[test]
    fn genus_window_has_handles() {
        let w = build_window(&data::genus_one(), 1).unwrap();
        assert_eq!(w.genus, 1);
        assert_eq!(w.n_gen(), w.n_loops() + 2);
        assert!(w.validate().is_empty());
    }

    #[test]
    fn crossing_word_round_trip() {
        let w = build_window(&data::figure5(), 1).unwrap();
        for word in [vec![1, 3], vec![2, -4, 3], vec![1, 2, 3, 4, 5, 6]] {
            let cw = w.crossing_word(&word);
            assert_eq!(cw.len() as u32, w.complexity(&word));
            assert_eq!(w.loops_from_crossing(&cw).unwrap(), word);
        }
        let mut bad = w.crossing_word(&[1, 3]);
        bad.push(bad[1]);
        assert!(w.loops_from_crossing(&bad).is_err());
    }

    #[test]
    fn nesting_embeds_parent_labels() {
        let s = data::figure5();
        let w1 = build_window(&s, 1).unwrap();
        let w2 = build_window(&s, 2).unwrap();
        let map = w2.parent_level_boundary.as_ref().unwrap();
        assert_eq!(map.len(), w1.n_labels());
        for (i, img) in map.iter().enumerate() {
            let merged: Vec<Content> = w2.side_contents(img);
            let name = &w1.labels[i].name;
            assert!(img.iter().any(|&k| &w2.labels[k].name == name), "label {name} keeps its name");
            assert!(merged.iter().zip(&w1.labels[i].contents).all(|(a, b)| a.meets() == b.meets()));
        }
    }

    #[test]
    fn shift_moves_pieces_and_overflows_at_the_edge() {
        let s = data::figure4();
        let w = build_window(&s, 2).unwrap();
        let t = &w.tracks[0];
        let (src, w1, w2, dst) = (t.source, t.pieces[0], t.pieces[1], t.dest);
        let x = |k: usize| words::letter(k, true);
        assert_eq!(w.track_shift(0, false, &[x(src)]).unwrap(), vec![x(src), x(w1)]);
        assert_eq!(w.track_shift(0, false, &[x(w1)]).unwrap(), vec![x(w2)]);
        assert_eq!(w.track_shift(0, false, &[x(w2), x(dst)]).unwrap(), vec![x(dst)]);
        assert!(matches!(w.track_shift(0, false, &[x(w2)]), Err(CnpError::WindowOverflow)));
        let back = w.track_shift(0, true, &[x(src), x(w1)]).unwrap();
        assert_eq!(back, vec![x(src)]);
    }

    #[test]
    fn label_swap_permutes_homology() {
        let w = build_window(&data::figure5(), 1).unwrap();
        let n = w.n_gen();
        let (i, j) = (1, 3);
        for k in 0..w.n_loops() {
            let img = w.label_swap(i, j, false, &[words::letter(k, true)]).unwrap();
            let e = words::exponent_sums(&img, n);
            let target = if k == i { j } else if k == j { i } else { k };
            let mut want = vec![0; n];
            want[target] = 1;
            assert_eq!(e, want, "generator {k}");
            let back = w.label_swap(i, j, true, &img).unwrap();
            assert_eq!(back, vec![words::letter(k, true)]);
        }
        let outer = w.boundary_word(w.outer());
        assert_eq!(words::canonical(&w.label_swap(i, j, false, &outer).unwrap()), words::canonical(&outer));
    }
}
