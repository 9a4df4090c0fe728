//! One surgery step: from curves alpha, gamma with i(alpha, gamma) > 0, produce a
//! non-peripheral curve beta meeting alpha fewer times and within distance two of gamma.

use serde::Serialize;

use super::{cut, disjoint_words, intersection_words, is_simple_word, Curve, Realization};
use crate::end_calculus::{four_way_selector, zeta_clopen, EndSpace};
use crate::error::{CnpError, Result};
use crate::peripherality_cnp::verdict_from_cut;
use crate::windows::CombWindow;
use crate::words::{self, Letter};

#[derive(Debug, Clone, Serialize)]
pub struct SurgeryOutcome {
    pub beta: Curve,
    /// Common neighbour of beta and gamma when they are not disjoint.
    pub via: Option<Curve>,
    pub rule: String,
}

/// A transverse crossing located on both curves: (vertex, offset along the chord) for each.
#[derive(Debug, Clone, Copy)]
struct Point {
    a: (usize, usize),
    b: (usize, usize),
}

fn points(w: &CombWindow, a: &[Letter], b: &[Letter]) -> Vec<Point> {
    let real = Realization::new(w, vec![a, b]);
    let mut out = Vec::new();
    for i in 0..a.len() {
        let ac = real.chord(0, i);
        let aspan = real.ccw(ac.0, ac.1);
        for j in 0..b.len() {
            let bc = real.chord(1, j);
            if !real.interlaced(ac, bc) {
                continue;
            }
            let b_end = if real.ccw(ac.0, bc.0) < aspan { bc.0 } else { bc.1 };
            let bspan = real.ccw(bc.0, bc.1);
            let a_end = if real.ccw(bc.0, ac.0) < bspan { ac.0 } else { ac.1 };
            out.push(Point { a: (i, real.ccw(ac.0, b_end)), b: (j, real.ccw(bc.0, a_end)) });
        }
    }
    out
}

/// Letters travelled along a cyclic word from position p to position q.
fn arc(w: &[Letter], p: (usize, usize), q: (usize, usize)) -> Vec<Letter> {
    let m = w.len();
    let mut steps = (q.0 + m - p.0) % m;
    if steps == 0 && q.1 < p.1 {
        steps = m;
    }
    (0..steps).map(|t| w[(p.0 + t) % m]).collect()
}

/// Closed curves made of one arc of `a` and one arc of `b` between two crossings,
/// plus the commutator boundary when the curves meet once.
fn arc_curves(w: &CombWindow, a: &[Letter], b: &[Letter]) -> Vec<Vec<Letter>> {
    let pts = points(w, a, b);
    let mut out = Vec::new();
    for p in &pts {
        for q in &pts {
            if std::ptr::eq(p, q) {
                continue;
            }
            let along_a = arc(a, p.a, q.a);
            let fwd = arc(b, q.b, p.b);
            let back = words::inverse(&arc(b, p.b, q.b));
            for tail in [fwd, back] {
                let mut v = along_a.clone();
                v.extend(tail);
                let c = words::cyclic_reduce(&v);
                if !c.is_empty() {
                    out.push(words::canonical(&c));
                }
            }
        }
    }
    if pts.len() == 1 {
        let p = pts[0];
        let ra = words::rotate(a, p.a.0);
        let rb = words::rotate(b, p.b.0);
        let mut v = ra.clone();
        v.extend(&rb);
        v.extend(words::inverse(&ra));
        v.extend(words::inverse(&rb));
        let c = words::cyclic_reduce(&v);
        if !c.is_empty() {
            out.push(words::canonical(&c));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Closures of the arcs of `a` cut out by consecutive crossings with `b`, each closed
/// by either arc of `b`. With `b` a boundary these are the surgered arcs.
pub(crate) fn consecutive_arc_curves(w: &CombWindow, a: &[Letter], b: &[Letter]) -> Vec<Vec<Letter>> {
    let mut pts = points(w, a, b);
    pts.sort_by_key(|p| p.a);
    let n = pts.len();
    let mut out = Vec::new();
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let along_a = if n == 1 { words::rotate(a, p.a.0) } else { arc(a, p.a, q.a) };
        let fwd = arc(b, q.b, p.b);
        let back = if n == 1 { Vec::new() } else { words::inverse(&arc(b, p.b, q.b)) };
        for tail in [fwd, back] {
            let mut v = along_a.clone();
            v.extend(tail);
            let c = words::cyclic_reduce(&v);
            if !c.is_empty() {
                out.push(words::canonical(&c));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

struct Cand {
    word: Vec<Letter>,
    np: bool,
    min_zeta: u32,
}

fn assess(w: &CombWindow, space: &EndSpace, word: Vec<Letter>) -> Result<Option<Cand>> {
    if !words::is_primitive(&word) || !is_simple_word(w, &word) {
        return Ok(None);
    }
    let info = cut(w, &word);
    if info.inessential() {
        return Ok(None);
    }
    let np = verdict_from_cut(w, space, &info)?.nonperipheral;
    let min_zeta = if info.separating() {
        info.sides.iter().map(|s| zeta_clopen(&w.side_profile(space, &s.labels), space)).min().unwrap_or(0)
    } else {
        0
    };
    Ok(Some(Cand { word, np, min_zeta }))
}

/// Picks a non-peripheral curve disjoint from both `beta` and `gamma`.
fn common_neighbour(w: &CombWindow, space: &EndSpace, beta: &[Letter], gamma: &[Letter]) -> Result<Option<(Vec<Letter>, String)>> {
    let mut around: Vec<Cand> = Vec::new();
    for word in arc_curves(w, beta, gamma) {
        if word == beta || word == gamma {
            continue;
        }
        if !disjoint_words(w, &word, beta) || !disjoint_words(w, &word, gamma) {
            continue;
        }
        if let Some(c) = assess(w, space, word)? {
            around.push(c);
        }
    }
    if let Some(pick) = selector_pick(w, space, beta, &around)? {
        return Ok(Some((pick, "four-way selector".into())));
    }
    around.retain(|c| c.np);
    around.sort_by(|x, y| y.min_zeta.cmp(&x.min_zeta).then(x.word.len().cmp(&y.word.len())).then(x.word.cmp(&y.word)));
    Ok(around.into_iter().next().map(|c| (c.word, "boundary of a regular neighbourhood".into())))
}

/// When four separating curves bound the complementary regions of beta and gamma, lets the
/// end-space selector choose the region whose boundary is non-peripheral.
fn selector_pick(w: &CombWindow, space: &EndSpace, beta: &[Letter], around: &[Cand]) -> Result<Option<Vec<Letter>>> {
    let seps: Vec<(&Cand, Vec<Vec<usize>>)> = around
        .iter()
        .filter_map(|c| {
            let info = cut(w, &c.word);
            info.separating().then(|| (c, info.sides.into_iter().map(|s| s.labels).collect()))
        })
        .collect();
    if seps.len() != 4 {
        return Ok(None);
    }
    let n = w.n_labels();
    for mask in 0..16u32 {
        let chosen: Vec<&Vec<usize>> = (0..4).map(|k| &seps[k].1[((mask >> k) & 1) as usize]).collect();
        let mut seen = vec![0; n];
        for s in &chosen {
            for &l in s.iter() {
                seen[l] += 1;
            }
        }
        if seen.iter().any(|&x| x != 1) || chosen.iter().any(|s| s.is_empty()) {
            continue;
        }
        let beta_side = &cut(w, beta).sides[0].labels;
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by_key(|&k| !chosen[k].iter().all(|l| beta_side.contains(l)));
        let profiles: Vec<_> = order.iter().map(|&k| w.side_profile(space, chosen[k])).collect();
        let parts = [&profiles[0], &profiles[1], &profiles[2], &profiles[3]];
        return Ok(match four_way_selector(parts, space) {
            Ok(i) => {
                let c = seps[order[i - 1]].0;
                c.np.then(|| c.word.clone())
            }
            Err(_) => None,
        });
    }
    Ok(None)
}

/// Performs one surgery of `gamma` along arcs of `alpha`.
pub fn surgery_step(alpha: &Curve, gamma: &Curve, w: &CombWindow, space: &EndSpace) -> Result<SurgeryOutcome> {
    let i = intersection_words(w, &alpha.word, &gamma.word);
    if i == 0 {
        return Err(CnpError::HypothesisViolation("curves are disjoint".into()));
    }
    let mut cands: Vec<(bool, usize, Cand)> = Vec::new();
    for word in arc_curves(w, &alpha.word, &gamma.word) {
        if word == gamma.word {
            continue;
        }
        let ia = intersection_words(w, &alpha.word, &word);
        if ia >= i {
            continue;
        }
        if let Some(c) = assess(w, space, word)? {
            if c.np {
                let touches = !disjoint_words(w, &c.word, &gamma.word);
                cands.push((touches, ia, c));
            }
        }
    }
    cands.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then(y.2.min_zeta.cmp(&x.2.min_zeta))
            .then(x.1.cmp(&y.1))
            .then(x.2.word.len().cmp(&y.2.word.len()))
            .then(x.2.word.cmp(&y.2.word))
    });
    for (touches, ia, c) in cands {
        let beta = Curve::from_canonical(w.level, c.word);
        if !touches {
            return Ok(SurgeryOutcome { beta, via: None, rule: format!("disjoint surgery, i: {i} -> {ia}") });
        }
        if let Some((via, how)) = common_neighbour(w, space, &beta.word, &gamma.word)? {
            return Ok(SurgeryOutcome {
                beta,
                via: Some(Curve::from_canonical(w.level, via)),
                rule: format!("surgery through {how}, i: {i} -> {ia}"),
            });
        }
    }
    Err(CnpError::NoSelector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::windows::build_window;

    #[test]
    fn arcs_wrap_around() {
        let w = [1, 2, 3];
        assert_eq!(arc(&w, (1, 0), (2, 0)), vec![2]);
        assert_eq!(arc(&w, (2, 0), (1, 0)), vec![3, 1]);
        assert_eq!(arc(&w, (1, 5), (1, 7)), Vec::<i32>::new());
        assert_eq!(arc(&w, (1, 7), (1, 5)), vec![2, 3, 1]);
    }

    #[test]
    fn step_reduces_intersection() {
        let s = data::figure5();
        let w = build_window(&s, 0).unwrap();
        let a = Curve::new(&w, &[1, 2]).unwrap();
        let g = Curve::new(&w, &[2, 3]).unwrap();
        let i = intersection_words(&w, &a.word, &g.word);
        assert_eq!(i, 2);
        let out = surgery_step(&a, &g, &w, &s).unwrap();
        assert!(intersection_words(&w, &a.word, &out.beta.word) < i);
        match &out.via {
            None => assert!(disjoint_words(&w, &out.beta.word, &g.word)),
            Some(v) => {
                assert!(disjoint_words(&w, &out.beta.word, &v.word));
                assert!(disjoint_words(&w, &v.word, &g.word));
            }
        }
    }
}
