//! Peripherality, the capped non-peripheral curve graph, surgery paths and a
//! four-point hyperbolicity probe.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{self, cut, disjoint_words, intersection_words, surgery_step, Curve, CutInfo};
use crate::end_calculus::{is_small, zeta_clopen, zeta_surface, EndSpace};
use crate::error::{CnpError, Result};
use crate::windows::{slot_end, slot_start, CombWindow};
use crate::words::{self, Letter};

/// Default complexity cap (crossing-word length).
pub const DEFAULT_CAP: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NpVerdict {
    pub nonperipheral: bool,
    pub certificate: String,
}

/// Is one complementary side of a separating curve small?
fn side_small(w: &CombWindow, space: &EndSpace, labels: &[usize], genus: u32) -> Result<(bool, String)> {
    let profile = w.side_profile(space, labels);
    let v = is_small(&profile, space)?;
    if v.small && genus > 0 && !space.genus.is_infinite() {
        return Ok((false, format!("side carries genus {genus} of a finite-genus surface")));
    }
    Ok((v.small, v.reason))
}

/// Decides non-peripherality from a precomputed cut.
pub fn verdict_from_cut(w: &CombWindow, space: &EndSpace, info: &CutInfo) -> Result<NpVerdict> {
    if info.inessential() {
        return Ok(NpVerdict { nonperipheral: false, certificate: "inessential (disk or boundary-parallel)".into() });
    }
    if !info.separating() {
        let np = !space.genus.is_infinite();
        let certificate = if np {
            "non-separating in a finite-genus surface".to_string()
        } else {
            "non-separating in an infinite-genus surface".to_string()
        };
        return Ok(NpVerdict { nonperipheral: np, certificate });
    }
    let mut parts = Vec::new();
    let mut np = true;
    for s in &info.sides {
        let (small, reason) = side_small(w, space, &s.labels, s.genus)?;
        let zeta = zeta_clopen(&w.side_profile(space, &s.labels), space);
        parts.push(format!("side {:?} (zeta {zeta}, genus {}): {} [{reason}]", s.labels, s.genus, if small { "small" } else { "not small" }));
        np &= !small;
    }
    Ok(NpVerdict { nonperipheral: np, certificate: parts.join("; ") })
}

pub fn is_nonperipheral(curve: &Curve, window: &CombWindow, space: &EndSpace) -> Result<NpVerdict> {
    if curve.level != window.level {
        return Err(CnpError::LevelMismatch(curve.level, window.level));
    }
    verdict_from_cut(window, space, &cut(window, &curve.word))
}

/// Smaller end complexity of the two sides (0 for non-separating curves).
pub fn min_side_zeta(w: &CombWindow, space: &EndSpace, word: &[Letter]) -> u32 {
    let info = cut(w, word);
    if !info.separating() {
        return 0;
    }
    info.sides.iter().map(|s| zeta_clopen(&w.side_profile(space, &s.labels), space)).min().unwrap_or(0)
}

/// All simple closed curves of complexity at most `cap`, canonical and sorted by (complexity, word).
pub fn enumerate_simple(w: &CombWindow, cap: u32) -> Vec<Vec<Letter>> {
    let r = w.n_gen() as i32;
    let starts: Vec<Letter> = (1..=r).map(|g| -g).collect();
    let mut found: Vec<Vec<Letter>> = starts
        .par_iter()
        .flat_map_iter(|&first| {
            let mut out = Vec::new();
            let mut stack = vec![first];
            dfs(w, cap, &mut stack, 1, &mut out);
            out
        })
        .collect();
    found.sort_by_cached_key(|c| (w.complexity(c), c.clone()));
    found
}

fn dfs(w: &CombWindow, cap: u32, stack: &mut Vec<Letter>, prefix: u32, out: &mut Vec<Vec<Letter>>) {
    let first = stack[0];
    let last = *stack.last().unwrap();
    let m = stack.len();
    if last != -first || m == 1 {
        let closing = w.passage_cost(slot_end(last), slot_start(first));
        if prefix + closing <= cap
            && words::is_canonical(stack)
            && words::is_primitive(stack)
            && curves::is_simple_word(w, stack)
        {
            out.push(stack.clone());
        }
    }
    let bound = first.unsigned_abs() as i32;
    for g in 1..=bound {
        for l in [g, -g] {
            if l == -last {
                continue;
            }
            let cost = prefix + w.passage_cost(slot_end(last), slot_start(l)) + 1;
            if cost > cap {
                continue;
            }
            stack.push(l);
            dfs(w, cap, stack, cost, out);
            stack.pop();
        }
    }
}

/// The capped non-peripheral curve graph of one window.
#[derive(Debug, Clone)]
pub struct CnpGraph {
    pub level: usize,
    pub cap: u32,
    pub curves: Vec<Curve>,
    pub adj: Vec<Vec<usize>>,
    index: HashMap<Vec<Letter>, usize>,
}

impl CnpGraph {
    pub fn build(w: &CombWindow, space: &EndSpace, cap: u32) -> Result<CnpGraph> {
        let simple = enumerate_simple(w, cap);
        let flags: Vec<bool> = simple
            .par_iter()
            .map(|c| verdict_from_cut(w, space, &cut(w, c)).map(|v| v.nonperipheral))
            .collect::<Result<Vec<bool>>>()?;
        let curves: Vec<Curve> = simple
            .into_iter()
            .zip(flags)
            .filter(|(_, np)| *np)
            .map(|(c, _)| Curve::from_canonical(w.level, c))
            .collect();
        let n = curves.len();
        let adj: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).filter(|&j| j != i && disjoint_words(w, &curves[i].word, &curves[j].word)).collect())
            .collect();
        let index = curves.iter().enumerate().map(|(i, c)| (c.word.clone(), i)).collect();
        Ok(CnpGraph { level: w.level, cap, curves, adj, index })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn index_of(&self, c: &Curve) -> Option<usize> {
        self.index.get(&c.word).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// BFS distances from vertex `s` (`usize::MAX` for unreachable).
    pub fn bfs(&self, s: usize) -> Vec<usize> {
        bfs_adj(&self.adj, s)
    }

    /// A shortest path from `s` to `t` (vertex indices, both ends included); the BFS
    /// explores neighbours in index order, so the path is deterministic.
    pub fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.len()];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                let mut path = vec![t];
                let mut v = t;
                while v != s {
                    v = parent[v];
                    path.push(v);
                }
                path.reverse();
                return Some(path);
            }
            for &v in &self.adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Graph extended by extra curves (kept if not already present), for oracle distances.
    pub fn with_extra(&self, w: &CombWindow, extra: &[Curve]) -> CnpGraph {
        let mut g = self.clone();
        for c in extra {
            if g.index.contains_key(&c.word) {
                continue;
            }
            let id = g.curves.len();
            let nb: Vec<usize> = (0..id).filter(|&j| disjoint_words(w, &g.curves[j].word, &c.word)).collect();
            for &j in &nb {
                g.adj[j].push(id);
            }
            g.adj.push(nb);
            g.curves.push(c.clone());
            g.index.insert(c.word.clone(), id);
        }
        g
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph cnp {\n");
        for (i, c) in self.curves.iter().enumerate() {
            s.push_str(&format!("  {i} [label=\"{:?}\"];\n", c.word));
        }
        for (i, nb) in self.adj.iter().enumerate() {
            for &j in nb {
                if i < j {
                    s.push_str(&format!("  {i} -- {j};\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

fn bfs_adj(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut q = VecDeque::new();
    dist[s] = 0;
    q.push_back(s);
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

/// Non-peripheral curves of the capped graph disjoint from `curve` (and distinct from it).
pub fn cnp_neighbors(curve: &Curve, w: &CombWindow, space: &EndSpace, graph: &CnpGraph) -> Result<Vec<Curve>> {
    if !is_nonperipheral(curve, w, space)?.nonperipheral {
        return Err(CnpError::HypothesisViolation("curve is peripheral".into()));
    }
    Ok(match graph.index_of(curve) {
        Some(i) => graph.adj[i].iter().map(|&j| graph.curves[j].clone()).collect(),
        None => graph
            .curves
            .iter()
            .filter(|c| c.word != curve.word && disjoint_words(w, &c.word, &curve.word))
            .cloned()
            .collect(),
    })
}

/// Exact BFS distance in the capped graph (curves outside the cap are attached on the fly).
pub fn cnp_distance(a: &Curve, b: &Curve, w: &CombWindow, graph: &CnpGraph) -> Result<usize> {
    if a.word == b.word {
        return Ok(0);
    }
    let g = graph.with_extra(w, &[a.clone(), b.clone()]);
    let (ia, ib) = (g.index_of(a).unwrap(), g.index_of(b).unwrap());
    match g.bfs(ia)[ib] {
        usize::MAX => Err(CnpError::Unreachable),
        d => Ok(d),
    }
}

/// A path in the non-peripheral curve graph together with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct SurgeryPath {
    pub vertices: Vec<Curve>,
    pub intersection: usize,
    pub bound: usize,
    pub certificates: Vec<String>,
}

impl SurgeryPath {
    pub fn length(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }
}

/// Constructive path from `a` to `b` by repeated surgery, of length at most 2 i(a,b) + 2.
pub fn surgery_path(a: &Curve, b: &Curve, w: &CombWindow, space: &EndSpace) -> Result<SurgeryPath> {
    let z = zeta_surface(space);
    if z < 5 {
        return Err(CnpError::HypothesisViolation(format!("zeta(Sigma) = {z} < 5")));
    }
    for c in [a, b] {
        if !is_nonperipheral(c, w, space)?.nonperipheral {
            return Err(CnpError::HypothesisViolation(format!("{:?} is peripheral", c.word)));
        }
    }
    let i0 = intersection_words(w, &a.word, &b.word);
    let mut rev = vec![b.clone()];
    let mut gamma = b.clone();
    let mut certificates = Vec::new();
    if a.word != b.word {
        while intersection_words(w, &a.word, &gamma.word) > 0 {
            let step = surgery_step(a, &gamma, w, space)?;
            certificates.push(step.rule.clone());
            if let Some(v) = step.via {
                rev.push(v);
            }
            rev.push(step.beta.clone());
            gamma = step.beta;
        }
        if gamma.word != a.word {
            rev.push(a.clone());
        }
    }
    rev.reverse();
    let vertices = shortcut(w, rev);
    for pair in vertices.windows(2) {
        debug_assert!(disjoint_words(w, &pair[0].word, &pair[1].word));
    }
    Ok(SurgeryPath { vertices, intersection: i0, bound: 2 * i0 + 2, certificates })
}

/// Removes detours: jumps ahead whenever a later vertex is already adjacent.
fn shortcut(w: &CombWindow, path: Vec<Curve>) -> Vec<Curve> {
    let mut out: Vec<Curve> = Vec::new();
    let mut i = 0;
    while i < path.len() {
        out.push(path[i].clone());
        let mut next = i + 1;
        for j in ((i + 2)..path.len()).rev() {
            if path[j].word != path[i].word && disjoint_words(w, &path[i].word, &path[j].word) {
                next = j;
                break;
            }
        }
        if let Some(j) = (i + 1..path.len()).rev().find(|&j| path[j].word == path[i].word) {
            next = next.max(j + 1);
        }
        i = next;
    }
    out
}

/// Induced subgraph on the BFS ball of radius `radius` around a center.
#[derive(Debug, Clone, Serialize)]
pub struct CnpBall {
    pub center: Curve,
    pub radius: usize,
    pub vertices: Vec<Curve>,
    pub edges: Vec<(usize, usize)>,
    pub window_level: usize,
    pub complexity_cap: u32,
}

impl CnpBall {
    pub fn build(graph: &CnpGraph, center: usize, radius: usize) -> CnpBall {
        let dist = graph.bfs(center);
        let members: Vec<usize> = (0..graph.len()).filter(|&v| dist[v] <= radius).collect();
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (i, &v) in members.iter().enumerate() {
            for &u in &graph.adj[v] {
                if let Some(&j) = local.get(&u) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        CnpBall {
            center: graph.curves[center].clone(),
            radius,
            vertices: members.iter().map(|&v| graph.curves[v].clone()).collect(),
            edges,
            window_level: graph.level,
            complexity_cap: graph.cap,
        }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// All-pairs distances in the induced subgraph.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        (0..adj.len()).into_par_iter().map(|s| bfs_adj(&adj, s)).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph ball {\n");
        for (i, c) in self.vertices.iter().enumerate() {
            s.push_str(&format!("  {i} [label=\"{:?}\"];\n", c.word));
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("  {a} -- {b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Result of the four-point probe.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub samples: usize,
    pub diameter: usize,
    pub vertices: usize,
}

/// Largest four-point defect (halved) over sampled quadruples.
pub fn hyperbolicity_probe(ball: &CnpBall, samples: usize, seed: u64) -> Result<DeltaEstimate> {
    let d = ball.distances();
    let n = d.len();
    if n == 0 || d.iter().any(|row| row.iter().any(|&x| x == usize::MAX)) {
        return Err(CnpError::DisconnectedBall);
    }
    let diameter = d.iter().flatten().copied().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quads: Vec<[usize; 4]> = (0..samples).map(|_| [0; 4].map(|_| rng.gen_range(0..n))).collect();
    let worst = quads
        .par_iter()
        .map(|q| four_point_defect(&d, *q))
        .reduce(|| 0, usize::max);
    Ok(DeltaEstimate { delta: worst as f64 / 2.0, samples, diameter, vertices: n })
}

/// Largest of the three pair sums minus the middle one.
pub fn four_point_defect(d: &[Vec<usize>], [x, y, z, t]: [usize; 4]) -> usize {
    let mut s = [d[x][y] + d[z][t], d[x][z] + d[y][t], d[x][t] + d[y][z]];
    s.sort_unstable();
    s[2] - s[1]
}
