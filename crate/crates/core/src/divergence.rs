//! Quadratic detours between group elements that stay outside a ball around the identity.
//!
//! A word is split into blocks of letters that commute with a twist about a fixed
//! curve; consecutive block curves are disjoint. The detour leaves the first endpoint
//! along a long twist, reads each block under the active twist, switches twists between
//! blocks, and comes back to the second endpoint along another twist. Every vertex
//! carries a certified lower bound on its word norm.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{disjoint_words, Curve};
use crate::end_calculus::{zeta_surface, EndSpace};
use crate::error::{CnpError, Result};
use crate::group_words::{alphabet_with_twists, calibrate, norm_upper, Aggregate, Ambient, Calibration, GenKind, Generator, LengthFunctional, Word};
use crate::peripherality_cnp::CnpGraph;

/// Complexity cap of the curve graph that supplies commuting curves and connecting paths.
pub const GRAPH_CAP: u32 = 20;
/// Powers used to fit the twist error B.
pub const CALIBRATION_RANGE: i64 = 10;

/// Constants of the detour, all derived from the calibration.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Constants {
    pub m: f64,
    pub b: f64,
    pub d0: f64,
    pub q: f64,
    pub big_q: f64,
    /// Additive error of the one- and two-twist estimates (2B).
    pub err_a: f64,
    pub eta: f64,
    pub k_tw: f64,
    pub r0: f64,
    pub t1: f64,
    pub t0: f64,
    /// Connecting-path constant: longest fixed path plus one.
    pub c0: f64,
    pub m0: f64,
}

impl Constants {
    pub fn derive(cal: &Calibration, c0: usize) -> Result<Constants> {
        let (m, q) = (cal.m, cal.q);
        let err_a = 2.0 * cal.b;
        let eta = 1.0 / (2.0 * (1.0 + q * q));
        let mut k_tw = (m * (6.0 + 2.0 * eta)).ceil();
        while (k_tw - 6.0 * m) / m < 2.0 * eta {
            k_tw += 1.0;
        }
        let r0 = (2.0 + q * q) * cal.big_q / (2.0 * (1.0 - (1.0 + q * q) * eta));
        let t1 = eta * r0;
        let t0 = t1.max(err_a / m);
        let c0 = c0 as f64;
        let m0 = 2.0 * k_tw + 2.0 + 12.0 * c0 + 8.0 * c0 * k_tw;
        let k = Constants { m, b: cal.b, d0: cal.d0, q, big_q: cal.big_q, err_a, eta, k_tw, r0, t1, t0, c0, m0 };
        k.check()?;
        Ok(k)
    }

    /// The inequalities the detour relies on.
    pub fn check(&self) -> Result<()> {
        if !(self.m > 0.0 && self.q >= 1.0) {
            return Err(CnpError::ConstantInfeasible(format!("M = {}, q = {}", self.m, self.q)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0 / (1.0 + self.q * self.q)) {
            return Err(CnpError::ConstantInfeasible(format!("eta = {} outside (0, 1/(1+q^2))", self.eta)));
        }
        if (self.k_tw - 6.0 * self.m) / self.m < 2.0 * self.eta {
            return Err(CnpError::ConstantInfeasible(format!("(K_tw - 6M)/M < 2 eta with K_tw = {}", self.k_tw)));
        }
        if self.t0 < self.t1 || self.t0 < self.err_a / self.m {
            return Err(CnpError::ConstantInfeasible(format!("T0 = {} too small", self.t0)));
        }
        Ok(())
    }

    pub fn twist_power(&self, r: u64) -> u64 {
        (self.k_tw * r as f64).ceil() as u64
    }

    /// Radius of the avoided ball at scale R.
    pub fn radius(&self, r: u64) -> f64 {
        self.eta * r as f64 - self.t0
    }
}

/// The finite data behind the detours: commuting curves, fixed connecting paths,
/// the witness family and the calibrated functional.
pub struct DivergenceModel {
    pub amb: Ambient,
    pub graph: CnpGraph,
    /// Graph index of the base curve.
    pub alpha0: usize,
    /// Commuting curve (graph index) of every sample letter and of twists about table curves.
    pub table: Vec<(Generator, usize)>,
    /// Graph indices of the table curves.
    pub table_curves: Vec<usize>,
    /// Table curves together with the interiors of the fixed paths between them.
    pub family: Vec<Curve>,
    pub functional: LengthFunctional,
    pub calibration: Calibration,
    pub constants: Constants,
}

impl DivergenceModel {
    /// Builds the model on the level-0 window with one level of headroom.
    pub fn new(space: &EndSpace) -> Result<DivergenceModel> {
        let z = zeta_surface(space);
        if z < 5 {
            return Err(CnpError::HypothesisViolation(format!("zeta = {z} < 5")));
        }
        let amb = Ambient::new(space, 0, 1)?;
        let graph = CnpGraph::build(&amb.chain[0], space, GRAPH_CAP)?;
        if graph.is_empty() {
            return Err(CnpError::HypothesisViolation("no non-peripheral curve in the window".into()));
        }
        let alpha0 = 0;
        let order = {
            let d = graph.bfs(alpha0);
            let mut o: Vec<usize> = (0..graph.len()).filter(|&i| d[i] != usize::MAX).collect();
            o.sort_by_key(|&i| (d[i], i));
            o
        };
        let search = |g: &Generator| -> Result<usize> {
            if matches!(g.kind, GenKind::VBlob(_)) {
                return Ok(alpha0);
            }
            let word = Word::from_letters(vec![g.clone()]);
            for &i in &order {
                let c = &graph.curves[i];
                if let GenKind::LocalTwist(axis) = &g.kind {
                    if amb.lift(axis)? == amb.lift(c)? {
                        continue;
                    }
                }
                match amb.apply(&word, c) {
                    Ok(img) if img == amb.lift(c)? => return Ok(i),
                    Ok(_) | Err(CnpError::WindowOverflow) => {}
                    Err(e) => return Err(e),
                }
            }
            Err(CnpError::HypothesisViolation(format!("no fixed curve for {}", g.kind_name())))
        };
        let mut table: Vec<(Generator, usize)> = Vec::new();
        for g in amb.alphabet()? {
            let i = search(&g)?;
            table.push((g, i));
        }
        let mut curves: BTreeSet<usize> = table.iter().map(|t| t.1).collect();
        curves.insert(alpha0);
        loop {
            let pending: Vec<Generator> = curves
                .iter()
                .map(|&c| Generator::twist(graph.curves[c].clone()))
                .filter(|g| !table.iter().any(|t| t.0 == *g))
                .collect();
            if pending.is_empty() {
                break;
            }
            for g in pending {
                let i = search(&g)?;
                curves.insert(i);
                table.push((g, i));
            }
        }
        let table_curves: Vec<usize> = curves.iter().copied().collect();
        let mut fam: BTreeSet<usize> = curves.clone();
        let mut l0 = 0;
        for &a in &table_curves {
            for &b in &table_curves {
                let p = graph.shortest_path(a, b).ok_or(CnpError::Unreachable)?;
                l0 = l0.max(p.len() - 1);
                fam.extend(p);
            }
        }
        let family: Vec<Curve> = fam.iter().map(|&i| graph.curves[i].clone()).collect();
        let calibration = calibrate(&amb, &family, CALIBRATION_RANGE)?;
        let alphabet = alphabet_with_twists(&amb, &family)?;
        let functional = LengthFunctional::calibrated(&amb, &family, Aggregate::Max, &alphabet)?;
        let constants = Constants::derive(&calibration, l0 + 1)?;
        Ok(DivergenceModel { amb, graph, alpha0, table, table_curves, family, functional, calibration, constants })
    }

    /// Curve whose twist commutes with the letter (graph index).
    pub fn commuting_index(&self, g: &Generator) -> Result<usize> {
        let base = Generator { kind: g.kind.clone(), inv: false };
        self.table
            .iter()
            .find(|t| t.0 == base)
            .map(|t| t.1)
            .ok_or_else(|| CnpError::HypothesisViolation(format!("{} letter outside the finite table", g.kind_name())))
    }

    pub fn commuting_curve(&self, g: &Generator) -> Result<Curve> {
        Ok(self.graph.curves[self.commuting_index(g)?].clone())
    }

    /// Twist axes available for endpoint words.
    pub fn endpoint_axes(&self) -> Vec<Curve> {
        self.table_curves.iter().map(|&i| self.graph.curves[i].clone()).collect()
    }

    /// Certified lower bound on the norm of a word.
    pub fn lower(&self, w: &Word) -> Result<f64> {
        self.functional.lower(&self.amb, w)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkedDecomposition {
    /// Curve attached to each letter.
    pub curves: Vec<Curve>,
    /// Letters; `None` is an inserted identity.
    pub letters: Vec<Option<Generator>>,
    /// Maximal runs with a common curve, as (curve, product of the run's letters).
    pub blocks: Vec<(Curve, Word)>,
    pub c0: f64,
}

impl LinkedDecomposition {
    pub fn n(&self) -> usize {
        self.letters.len()
    }

    /// Product of the letters with identities dropped.
    pub fn product(&self) -> Word {
        Word::from_letters(self.letters.iter().flatten().cloned().collect())
    }
}

/// Splits a word into letters with commuting curves, linking consecutive curves by
/// the fixed graph paths (identity letters along path interiors).
pub fn linked_decomposition(model: &DivergenceModel, target: &Word) -> Result<LinkedDecomposition> {
    let g = &model.graph;
    let mut idx: Vec<usize> = Vec::new();
    let mut letters: Vec<Option<Generator>> = Vec::new();
    if target.is_empty() {
        idx.push(model.alpha0);
        letters.push(None);
    }
    for t in &target.letters {
        let b = model.commuting_index(t)?;
        if let Some(&prev) = idx.last() {
            if prev != b {
                let path = g.shortest_path(prev, b).ok_or(CnpError::Unreachable)?;
                for &v in &path[1..path.len() - 1] {
                    idx.push(v);
                    letters.push(None);
                }
            }
        }
        idx.push(b);
        letters.push(Some(t.clone()));
    }
    let mut blocks: Vec<(usize, Vec<Generator>)> = Vec::new();
    for (i, l) in idx.iter().zip(&letters) {
        match blocks.last_mut() {
            Some((c, w)) if c == i => w.extend(l.clone()),
            _ => blocks.push((*i, l.iter().cloned().collect())),
        }
    }
    Ok(LinkedDecomposition {
        curves: idx.iter().map(|&i| g.curves[i].clone()).collect(),
        letters,
        blocks: blocks.into_iter().map(|(i, w)| (g.curves[i].clone(), Word::from_letters(w))).collect(),
        c0: model.constants.c0,
    })
}

/// Checks the decomposition invariants; returns the violations found.
pub fn check_decomposition(model: &DivergenceModel, target: &Word, d: &LinkedDecomposition, tests: &[Curve]) -> Result<Vec<String>> {
    let amb = &model.amb;
    let top = amb.top();
    let mut bad = Vec::new();
    if d.product() != *target {
        bad.push("product of letters differs from the target".into());
    }
    if d.n() as f64 > d.c0 * target.len().max(1) as f64 {
        bad.push(format!("n = {} exceeds C0 * |target| = {}", d.n(), d.c0 * target.len().max(1) as f64));
    }
    for k in 1..d.curves.len() {
        let (a, b) = (amb.lift(&d.curves[k - 1])?, amb.lift(&d.curves[k])?);
        if a != b && !disjoint_words(top, &a.word, &b.word) {
            bad.push(format!("curves {} and {} are not adjacent", k - 1, k));
        }
    }
    for (c, l) in d.curves.iter().zip(&d.letters) {
        let Some(s) = l else { continue };
        let sw = Word::from_letters(vec![s.clone()]);
        let tw = Word::twist_power(c, 1);
        for x in tests {
            let one = amb.apply(&sw.concat(&tw), x);
            let two = amb.apply(&tw.concat(&sw), x);
            match (one, two) {
                (Ok(p), Ok(q)) if p != q => bad.push(format!("{} does not commute with its twist", s.kind_name())),
                (Err(CnpError::WindowOverflow), _) | (_, Err(CnpError::WindowOverflow)) | (Ok(_), Ok(_)) => {}
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimate {
    /// On a twist ray at an endpoint: sampled functional values spread by the Lipschitz
    /// property, or the one-twist estimate where it is larger.
    Ray,
    /// Reading a block under a full twist: one-twist estimate.
    Read,
    /// Switching twists about disjoint axes: two-twist estimate.
    Switch,
}

/// A detour vertex `g1 * h[..prefix] * prod D_{axis}^{power}`.
#[derive(Debug, Clone, Serialize)]
pub struct PathVertex {
    pub prefix: usize,
    /// (block index, power), at most two entries.
    pub twists: Vec<(usize, i64)>,
    pub estimate: Estimate,
    pub lower: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetourCertificate {
    pub g1: Word,
    pub g2: Word,
    pub r: u64,
    pub n_twist: u64,
    pub constants: Constants,
    /// Letters of `g1^-1 g2` after free reduction.
    pub h: Word,
    pub blocks: Vec<(Curve, Word)>,
    pub signs: Vec<i64>,
    /// Length of the linked decomposition.
    pub n: usize,
    pub path: Vec<PathVertex>,
    pub length: usize,
    pub length_bound: f64,
    pub min_certified_norm: f64,
    pub radius: f64,
    pub endpoint_lower: (f64, f64),
    /// Failed invariants; empty for a valid certificate.
    pub violations: Vec<String>,
}

impl DetourCertificate {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// The vertex as an explicit word.
    pub fn vertex_word(&self, v: &PathVertex) -> Word {
        let mut w = self.g1.concat(&self.h.prefix(v.prefix));
        for &(b, p) in &v.twists {
            w = w.concat(&Word::twist_power(&self.blocks[b].0, p));
        }
        w
    }
}

/// Certified lower bounds along the ray `g D_axis^{sign m}`, m = 0..=`n_max`, or `None`
/// when some vertex cannot be certified above `threshold`.
pub fn certify_ray(model: &DivergenceModel, g: &Word, axis: &Curve, sign: i64, n_max: u64, threshold: f64) -> Result<Option<Vec<f64>>> {
    let k = &model.constants;
    let upper = norm_upper(g) as f64;
    let formula = |m: u64| (m as f64 - k.m * upper - k.err_a) / k.m;
    let mut out = vec![f64::NEG_INFINITY; n_max as usize + 1];
    let mut m = 0u64;
    while m <= n_max {
        if formula(m) >= threshold {
            for x in m..=n_max {
                out[x as usize] = formula(x);
            }
            break;
        }
        let w = g.concat(&Word::twist_power(axis, sign * m as i64));
        let l = model.lower(&w)?;
        if l < threshold {
            return Ok(None);
        }
        let reach = (l - threshold).floor() as u64;
        for x in m..=(m + reach).min(n_max) {
            out[x as usize] = (l - (x - m) as f64).max(formula(x));
        }
        m += reach + 1;
    }
    Ok(Some(out))
}

/// A sign whose ray stays above `eta * lower(g) - T1` up to `n_max`, with the bounds along it.
pub fn escape_sign(model: &DivergenceModel, axis: &Curve, g: &Word, n_max: u64) -> Result<(i64, f64, Option<Vec<f64>>)> {
    let k = &model.constants;
    let threshold = k.eta * model.lower(g)? - k.t1;
    for sign in [1, -1] {
        if let Some(b) = certify_ray(model, g, axis, sign, n_max, threshold)? {
            return Ok((sign, threshold, Some(b)));
        }
    }
    Ok((1, threshold, None))
}

/// Builds and certifies the detour from `g1` to `g2` at scale `r`.
pub fn build_detour(model: &DivergenceModel, g1: &Word, g2: &Word, r: u64) -> Result<DetourCertificate> {
    let k = model.constants.clone();
    let rf = r as f64;
    let mut violations = Vec::new();
    for (name, g) in [("g1", g1), ("g2", g2)] {
        let u = norm_upper(g) as f64;
        if u < rf || u > 2.0 * rf {
            return Err(CnpError::HypothesisViolation(format!("upper norm {u} of {name} outside [R, 2R]")));
        }
    }
    let h = g1.inverse().concat(g2).free_reduced();
    let d = linked_decomposition(model, &h)?;
    let mut blocks = d.blocks.clone();
    let mut n = d.n();
    let n_twist = k.twist_power(r);
    let radius = k.radius(r);
    let ray = |g: &Word, axis: &Curve| -> Result<(i64, Option<Vec<f64>>)> {
        for sign in [1, -1] {
            if let Some(b) = certify_ray(model, g, axis, sign, n_twist, radius)? {
                return Ok((sign, Some(b)));
            }
        }
        Ok((1, None))
    };
    let (s1, first) = ray(g1, &blocks[0].0)?;
    let (mut s_last, mut last) = ray(g2, &blocks[blocks.len() - 1].0)?;
    if blocks.len() == 1 && s_last != s1 {
        // One block cannot serve both rays: hop to a neighbouring curve for the way back.
        let i = model.graph.index_of(&blocks[0].0).ok_or(CnpError::Unreachable)?;
        let j = *model.graph.adj[i].first().ok_or(CnpError::Unreachable)?;
        blocks.push((model.graph.curves[j].clone(), Word::identity()));
        n += 1;
        (s_last, last) = ray(g2, &blocks[1].0)?;
    }
    let rb = blocks.len();
    let mut signs = vec![1i64; rb];
    signs[0] = s1;
    signs[rb - 1] = s_last;
    let (first, last) = match (first, last) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            violations.push("an endpoint ray could not be certified above the radius".into());
            let fill = vec![f64::NEG_INFINITY; n_twist as usize + 1];
            (a.unwrap_or_else(|| fill.clone()), b.unwrap_or(fill))
        }
    };
    let nt = n_twist as i64;
    let mut path: Vec<PathVertex> = Vec::new();
    for (m, &l) in first.iter().enumerate() {
        path.push(PathVertex { prefix: 0, twists: vec![(0, signs[0] * m as i64)], estimate: Estimate::Ray, lower: l });
    }
    let one_twist = |prefix_upper: usize| (n_twist as f64 - k.m * prefix_upper as f64 - k.err_a) / k.m;
    let upper_at = |prefix: usize| norm_upper(&g1.concat(&h.prefix(prefix)));
    let mut prefix = 0usize;
    for j in 0..rb {
        for _ in 0..blocks[j].1.len() {
            prefix += 1;
            let u = upper_at(prefix);
            if u as f64 > 6.0 * rf {
                violations.push(format!("prefix norm {u} exceeds 6R"));
            }
            path.push(PathVertex { prefix, twists: vec![(j, signs[j] * nt)], estimate: Estimate::Read, lower: one_twist(u) });
        }
        if j + 1 < rb {
            let (a, b) = (model.amb.lift(&blocks[j].0)?, model.amb.lift(&blocks[j + 1].0)?);
            if a == b || !disjoint_words(model.amb.top(), &a.word, &b.word) {
                violations.push(format!("block curves {j} and {} are not disjoint and distinct", j + 1));
            }
            let lower = one_twist(upper_at(prefix));
            for m in 1..=nt {
                path.push(PathVertex { prefix, twists: vec![(j, signs[j] * nt), (j + 1, signs[j + 1] * m)], estimate: Estimate::Switch, lower });
            }
            for m in (0..nt).rev() {
                path.push(PathVertex { prefix, twists: vec![(j, signs[j] * m), (j + 1, signs[j + 1] * nt)], estimate: Estimate::Switch, lower });
            }
        }
    }
    for m in (0..nt as usize).rev() {
        path.push(PathVertex { prefix, twists: vec![(rb - 1, signs[rb - 1] * m as i64)], estimate: Estimate::Ray, lower: last[m] });
    }
    let length = path.len() - 1;
    let (nf, nn) = (n_twist as f64, n as f64);
    let length_bound = 2.0 * nf + nn + 2.0 * nn * nf;
    let min_certified_norm = path.iter().map(|v| v.lower).fold(f64::INFINITY, f64::min);
    if length as f64 > length_bound {
        violations.push(format!("length {length} exceeds 2N+n+2nN = {length_bound}"));
    }
    if length_bound > k.m0 * rf * rf {
        violations.push(format!("2N+n+2nN = {length_bound} exceeds M0 R^2 = {}", k.m0 * rf * rf));
    }
    if min_certified_norm < radius {
        violations.push(format!("certified norm {min_certified_norm} below eta R - T0 = {radius}"));
    }
    let endpoint_lower = (model.lower(g1)?, model.lower(g2)?);
    Ok(DetourCertificate {
        g1: g1.clone(),
        g2: g2.clone(),
        r,
        n_twist,
        constants: k,
        h,
        blocks,
        signs,
        n,
        path,
        length,
        length_bound,
        min_certified_norm,
        radius,
        endpoint_lower,
        violations,
    })
}

/// A random twist-power endpoint `D_c^a` with c a table curve and R <= |a| <= 2R.
pub fn random_endpoint(model: &DivergenceModel, r: u64, rng: &mut ChaCha8Rng) -> Word {
    let axes = model.endpoint_axes();
    let c = &axes[rng.gen_range(0..axes.len())];
    let a = rng.gen_range(r..=2 * r) as i64;
    Word::twist_power(c, if rng.gen() { a } else { -a })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub r: u64,
    pub trials: usize,
    pub mean_length: f64,
    pub max_length: usize,
    pub max_length_bound: f64,
    pub m0_r2: f64,
    pub min_margin: f64,
    pub valid: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of log mean length against log R (absent for one scale).
    pub slope: Option<f64>,
    pub rho: f64,
    pub t: f64,
    pub constants: Constants,
}

impl GrowthTable {
    pub fn to_csv(&self) -> String {
        let slope = self.slope.map(|s| format!("{s:.6}")).unwrap_or_default();
        let mut out = String::from("R,trials,mean_length,max_length,max_length_bound,M0R2,min_margin,valid,slope\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.3},{},{:.1},{:.1},{:.6},{},{}\n",
                r.r, r.trials, r.mean_length, r.max_length, r.max_length_bound, r.m0_r2, r.min_margin, r.valid, slope
            ));
        }
        out
    }
}

/// Least-squares slope of y against x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Detours between random endpoint pairs at each scale; trials run in parallel with per-trial seeds.
pub fn divergence_experiment(model: &DivergenceModel, scales: &[u64], trials: usize, seed: u64) -> Result<(GrowthTable, Vec<DetourCertificate>)> {
    let mut rows = Vec::new();
    let mut certs = Vec::new();
    for (si, &r) in scales.iter().enumerate() {
        let batch = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((si as u64) << 32) ^ t as u64);
                let g1 = random_endpoint(model, r, &mut rng);
                let g2 = random_endpoint(model, r, &mut rng);
                build_detour(model, &g1, &g2, r)
            })
            .collect::<Result<Vec<_>>>()?;
        let rf = r as f64;
        rows.push(GrowthRow {
            r,
            trials,
            mean_length: batch.iter().map(|c| c.length as f64).sum::<f64>() / trials.max(1) as f64,
            max_length: batch.iter().map(|c| c.length).max().unwrap_or(0),
            max_length_bound: batch.iter().map(|c| c.length_bound).fold(0.0, f64::max),
            m0_r2: model.constants.m0 * rf * rf,
            min_margin: batch.iter().map(|c| c.min_certified_norm - c.radius).fold(f64::INFINITY, f64::min),
            valid: batch.iter().filter(|c| c.is_valid()).count(),
        });
        certs.extend(batch);
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.r as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_length.max(1.0).ln()).collect();
    let k = &model.constants;
    Ok((GrowthTable { slope: fit_slope(&xs, &ys), rows, rho: k.eta, t: k.t0, constants: k.clone() }, certs))
}

#[cfg(test)]
mod tests;
