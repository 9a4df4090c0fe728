//! Generators of the mapping class group acting on window words, word norms, and
//! norm lower bounds through annular length functionals.
//!
//! Everything acts on loop words of one working window. Generators defined on the
//! level-0 window (half twists, permutations of maximal ends) act on the blocks of
//! working-level labels that each level-0 label splits into.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curves::{disjoint_words, twist_word, Curve};
use crate::end_calculus::{zeta_surface, EndSpace, TrackKind};
use crate::error::{CnpError, Result};
use crate::peripherality_cnp::{enumerate_simple, is_nonperipheral};
use crate::projections::{annular_twist, embed_curve, AnnularCover, Marking};
use crate::windows::{build_window, swap_sequence, CombWindow};
use crate::words::{self, Letter};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum GenKind {
    /// Shift along a realized two-ended track.
    ShiftAB(usize),
    /// Shift along a realized one-ended track.
    ShiftA(usize),
    /// Exchange of two level-0 labels of the same maximal type.
    MaxPerm(usize, usize),
    LocalTwist(Curve),
    /// Half twist exchanging adjacent level-0 labels of the same type.
    LocalHalfTwist(usize),
    /// Representative of the neighbourhood of the identity fixing the level-0 window.
    VBlob(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Generator {
    pub kind: GenKind,
    pub inv: bool,
}

impl Generator {
    pub fn new(kind: GenKind) -> Generator {
        Generator { kind, inv: false }
    }

    pub fn twist(axis: Curve) -> Generator {
        Generator::new(GenKind::LocalTwist(axis))
    }

    pub fn inverse(&self) -> Generator {
        Generator { kind: self.kind.clone(), inv: !self.inv }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GenKind::ShiftAB(_) => "ShiftAB",
            GenKind::ShiftA(_) => "ShiftA",
            GenKind::MaxPerm(..) => "MaxPerm",
            GenKind::LocalTwist(_) => "LocalTwist",
            GenKind::LocalHalfTwist(_) => "LocalHalfTwist",
            GenKind::VBlob(_) => "VBlob",
        }
    }

    fn to_value(&self, amb: &Ambient) -> Value {
        let arg = match &self.kind {
            GenKind::ShiftAB(t) | GenKind::ShiftA(t) | GenKind::LocalHalfTwist(t) => json!(t),
            GenKind::MaxPerm(i, j) => json!([i, j]),
            GenKind::LocalTwist(c) => {
                let text = c.to_json(&amb.chain[c.level]);
                serde_json::from_str(&text).expect("curve json")
            }
            GenKind::VBlob(tag) => json!(tag),
        };
        json!({"kind": self.kind_name(), "arg": arg, "inv": self.inv})
    }

    fn from_value(v: &Value, amb: &Ambient) -> Result<Generator> {
        let bad = |what: &str| CnpError::Malformed(format!("generator {what}: {v}"));
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("without kind"))?;
        let arg = v.get("arg").ok_or_else(|| bad("without arg"))?;
        let inv = v.get("inv").and_then(Value::as_bool).unwrap_or(false);
        let index = || arg.as_u64().map(|x| x as usize).ok_or_else(|| bad("with non-integer arg"));
        let kind = match kind {
            "ShiftAB" => GenKind::ShiftAB(index()?),
            "ShiftA" => GenKind::ShiftA(index()?),
            "LocalHalfTwist" => GenKind::LocalHalfTwist(index()?),
            "MaxPerm" => {
                let pair: Vec<usize> = serde_json::from_value(arg.clone()).map_err(|_| bad("with bad pair"))?;
                if pair.len() != 2 {
                    return Err(bad("with bad pair"));
                }
                GenKind::MaxPerm(pair[0], pair[1])
            }
            "LocalTwist" => {
                let level = arg.get("level").and_then(Value::as_u64).ok_or_else(|| bad("with curve lacking level"))? as usize;
                let w = amb.chain.get(level).ok_or(CnpError::LevelMismatch(level, amb.level()))?;
                GenKind::LocalTwist(Curve::from_json(&arg.to_string(), w)?)
            }
            "VBlob" => GenKind::VBlob(arg.as_str().map(str::to_string).unwrap_or_else(|| arg.to_string())),
            _ => return Err(bad("of unknown kind")),
        };
        let g = Generator { kind, inv };
        amb.check(&g)?;
        Ok(g)
    }
}

/// A word in the generators; it acts by applying its last letter first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Word {
    pub letters: Vec<Generator>,
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    pub fn from_letters(letters: Vec<Generator>) -> Word {
        Word { letters }
    }

    /// `D_axis^n` spelled with |n| twist letters.
    pub fn twist_power(axis: &Curve, n: i64) -> Word {
        let g = Generator::twist(axis.clone());
        let g = if n < 0 { g.inverse() } else { g };
        Word { letters: vec![g; n.unsigned_abs() as usize] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(Generator::inverse).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Word { letters }
    }

    /// Cancels adjacent inverse pairs.
    pub fn free_reduced(&self) -> Word {
        let mut out: Vec<Generator> = Vec::with_capacity(self.letters.len());
        for g in &self.letters {
            if out.last().is_some_and(|h| h.kind == g.kind && h.inv != g.inv) {
                out.pop();
            } else {
                out.push(g.clone());
            }
        }
        Word { letters: out }
    }

    /// Maximal runs of equal letters, as (letter, run length).
    pub fn blocks(&self) -> Vec<(Generator, usize)> {
        let mut out: Vec<(Generator, usize)> = Vec::new();
        for g in &self.letters {
            match out.last_mut() {
                Some((h, n)) if h == g => *n += 1,
                _ => out.push((g.clone(), 1)),
            }
        }
        out
    }

    /// Prefix lengths at the ends of maximal runs, starting with 0.
    pub fn block_cuts(&self) -> Vec<usize> {
        let mut cuts = vec![0];
        let mut at = 0;
        for (_, n) in self.blocks() {
            at += n;
            cuts.push(at);
        }
        cuts
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word { letters: self.letters[..len].to_vec() }
    }

    pub fn to_json(&self, amb: &Ambient) -> String {
        let letters: Vec<Value> = self.letters.iter().map(|g| g.to_value(amb)).collect();
        serde_json::to_string(&json!({ "letters": letters })).expect("serializes")
    }

    pub fn from_json(text: &str, amb: &Ambient) -> Result<Word> {
        let v: Value = serde_json::from_str(text).map_err(|e| CnpError::Malformed(e.to_string()))?;
        let letters = v.get("letters").and_then(Value::as_array).ok_or_else(|| CnpError::Malformed("word without letters".into()))?;
        Ok(Word { letters: letters.iter().map(|l| Generator::from_value(l, amb)).collect::<Result<_>>()? })
    }
}

/// Letter count after free reduction.
pub fn norm_upper(word: &Word) -> usize {
    word.free_reduced().len()
}

/// Windows of levels `0..=level` over one end space. Curves of interest (the
/// marking, witness axes) live at `base`; the levels above are headroom for shifts.
#[derive(Debug, Clone)]
pub struct Ambient {
    pub space: EndSpace,
    pub chain: Vec<CombWindow>,
    pub base: usize,
}

impl Ambient {
    pub fn new(space: &EndSpace, base: usize, headroom: usize) -> Result<Ambient> {
        let chain = (0..=base + headroom).map(|l| build_window(space, l)).collect::<Result<Vec<_>>>()?;
        Ok(Ambient { space: space.clone(), chain, base })
    }

    pub fn level(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn top(&self) -> &CombWindow {
        &self.chain[self.level()]
    }

    pub fn base_window(&self) -> &CombWindow {
        &self.chain[self.base]
    }

    /// Pushes a curve of any lower level up to the working level.
    pub fn lift(&self, c: &Curve) -> Result<Curve> {
        if c.level == self.level() {
            return Ok(c.clone());
        }
        embed_curve(&self.chain, c, self.level())
    }

    /// Chain marking of the base window, at the working level.
    pub fn marking(&self) -> Result<Vec<Curve>> {
        Marking::chain(self.base_window())?.curves().iter().map(|c| self.lift(c)).collect()
    }

    /// Working-level labels making up each level-0 label, in order.
    pub(crate) fn label_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = (0..self.chain[0].n_labels()).map(|g| vec![g]).collect();
        for w in &self.chain[1..] {
            let map = w.parent_level_boundary.as_ref().expect("parent map above level 0");
            for b in blocks.iter_mut() {
                *b = b.iter().flat_map(|&x| map[x].iter().copied()).collect();
            }
        }
        blocks
    }

    /// Working-level loop ranges of the inner level-0 labels.
    fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let n0 = self.chain[0].n_loops();
        self.label_blocks()[..n0].iter().map(|b| b[0]..b[b.len() - 1] + 1).collect()
    }

    /// Level-0 exchange `s_k` (or its inverse) on a working-level word. Blocks k and k+1
    /// are collapsed to single loops, exchanged by the level-0 formula and expanded again;
    /// a curve that separates the labels of either block has no image in the window.
    fn exchange(&self, k: usize, inverse: bool, w: &[Letter]) -> Result<Vec<Letter>> {
        let ranges = self.block_ranges();
        let (bk, bl) = (&ranges[k], &ranges[k + 1]);
        let tokens = parse_blocks(w, &[bk.clone(), bl.clone()]).ok_or(CnpError::WindowOverflow)?;
        let run = |r: &std::ops::Range<usize>, pos: bool| -> Vec<Letter> {
            if pos {
                r.clone().map(|g| words::letter(g, true)).collect()
            } else {
                r.clone().rev().map(|g| words::letter(g, false)).collect()
            }
        };
        let mut out = Vec::new();
        for t in tokens {
            match t {
                Token::Loop(l) => out.push(l),
                Token::Block(b, pos) => {
                    // Images of the collapsed loops, as (block, sign) sequences.
                    let image: Vec<(usize, bool)> = match (b, inverse) {
                        (0, false) => vec![(0, true), (1, true), (0, false)],
                        (1, false) => vec![(0, true)],
                        (0, true) => vec![(1, true)],
                        _ => vec![(1, false), (0, true), (1, true)],
                    };
                    let image: Vec<(usize, bool)> = if pos { image } else { image.into_iter().rev().map(|(x, s)| (x, !s)).collect() };
                    for (x, sign) in image {
                        out.extend(run(if x == 0 { bk } else { bl }, sign));
                    }
                }
            }
        }
        Ok(words::cyclic_reduce(&out))
    }

    fn same_type(&self, i: usize, j: usize) -> bool {
        let w0 = &self.chain[0];
        w0.labels[i].contents == w0.labels[j].contents && w0.labels[i].planar == w0.labels[j].planar
    }

    /// Checks that a generator is defined on this ambient.
    pub fn check(&self, g: &Generator) -> Result<()> {
        let w0 = &self.chain[0];
        let bad = |m: String| Err(CnpError::Malformed(m));
        match &g.kind {
            GenKind::ShiftAB(t) | GenKind::ShiftA(t) => {
                let want = if matches!(g.kind, GenKind::ShiftAB(_)) { TrackKind::Pair } else { TrackKind::Single };
                match self.top().tracks.get(*t) {
                    Some(tr) if tr.track.kind == want => Ok(()),
                    Some(_) => bad(format!("track {t} has the wrong kind for {}", g.kind_name())),
                    None => bad(format!("no realized track {t}")),
                }
            }
            GenKind::LocalHalfTwist(i) => {
                if i + 1 >= w0.n_loops() || !self.same_type(*i, i + 1) {
                    return bad(format!("labels {i},{} cannot be exchanged", i + 1));
                }
                Ok(())
            }
            GenKind::MaxPerm(i, j) => {
                if i >= j || *j >= w0.n_loops() || !self.same_type(*i, *j) {
                    return bad(format!("labels {i},{j} cannot be exchanged"));
                }
                Ok(())
            }
            GenKind::LocalTwist(c) => {
                if c.level > self.level() {
                    return Err(CnpError::LevelMismatch(c.level, self.level()));
                }
                Ok(())
            }
            GenKind::VBlob(_) => Ok(()),
        }
    }

    /// Image of a working-level loop word under `g^power`.
    pub fn act(&self, g: &Generator, power: i64, w: &[Letter]) -> Result<Vec<Letter>> {
        self.check(g)?;
        if power == 0 {
            return Ok(w.to_vec());
        }
        let top = self.top();
        let backwards = g.inv ^ (power < 0);
        let times = power.unsigned_abs() as usize;
        let braid = |seq0: Vec<(usize, bool)>| -> Result<Vec<Letter>> {
            let mut seq = seq0;
            if backwards {
                seq = seq.into_iter().rev().map(|(j, i)| (j, !i)).collect();
            }
            let mut out = w.to_vec();
            for _ in 0..times {
                for &(j, i) in &seq {
                    out = self.exchange(j, i, &out)?;
                }
            }
            Ok(out)
        };
        match &g.kind {
            GenKind::ShiftAB(t) | GenKind::ShiftA(t) => {
                let mut out = w.to_vec();
                for _ in 0..times {
                    out = top.track_shift(*t, backwards, &out)?;
                }
                Ok(out)
            }
            GenKind::LocalHalfTwist(i) => braid(vec![(*i, false)]),
            GenKind::MaxPerm(i, j) => braid(swap_sequence(*i, *j, false)),
            GenKind::LocalTwist(c) => {
                let axis = self.lift(c)?;
                let n = if backwards { -(times as i64) } else { times as i64 };
                Ok(twist_word(top, w, &axis.word, n))
            }
            GenKind::VBlob(_) => Ok(w.to_vec()),
        }
    }

    /// Image of a curve (lifted to the working level) under a word.
    pub fn apply(&self, word: &Word, c: &Curve) -> Result<Curve> {
        let mut w = self.lift(c)?.word;
        for (g, n) in word.blocks().iter().rev() {
            w = self.act(g, *n as i64, &w)?;
        }
        Curve::new(self.top(), &w)
    }

    pub fn apply_all(&self, word: &Word, cs: &[Curve]) -> Result<Vec<Curve>> {
        cs.iter().map(|c| self.apply(word, c)).collect()
    }

    pub fn apply_marking(&self, word: &Word, m: &Marking) -> Result<Marking> {
        let lift_all = |cs: &[Curve]| -> Result<Vec<Curve>> { cs.iter().map(|c| self.apply(word, c)).collect() };
        Ok(Marking { pants_curves: lift_all(&m.pants_curves)?, transversals: lift_all(&m.transversals)?, window_level: self.level() })
    }

    /// Level-0 non-peripheral curves of complexity at most `cap`, sorted by (complexity, word).
    pub fn base_curves(&self, level: usize, cap: u32) -> Result<Vec<Curve>> {
        let w = &self.chain[level];
        let mut out = Vec::new();
        for word in enumerate_simple(w, cap) {
            let c = Curve::from_canonical(level, word);
            if is_nonperipheral(&c, w, &self.space)?.nonperipheral {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// The finite generator sample: one letter of every kind the ambient supports,
    /// with twists about the level-0 chain marking.
    pub fn alphabet(&self) -> Result<Vec<Generator>> {
        let w0 = &self.chain[0];
        let mut out = Vec::new();
        for (t, tr) in self.top().tracks.iter().enumerate() {
            out.push(Generator::new(match tr.track.kind {
                TrackKind::Pair => GenKind::ShiftAB(t),
                TrackKind::Single => GenKind::ShiftA(t),
            }));
        }
        for i in 0..w0.n_loops() {
            for j in i + 1..w0.n_loops() {
                if self.same_type(i, j) {
                    out.push(Generator::new(if j == i + 1 { GenKind::LocalHalfTwist(i) } else { GenKind::MaxPerm(i, j) }));
                }
            }
        }
        if let Ok(m) = Marking::chain(w0) {
            for c in m.curves() {
                if is_nonperipheral(&c, w0, &self.space)?.nonperipheral {
                    out.push(Generator::twist(c));
                }
            }
        }
        out.push(Generator::new(GenKind::VBlob("K0".into())));
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Token {
    Loop(Letter),
    /// Index into the block list, and orientation.
    Block(usize, bool),
}

/// Splits a cyclic word into loops and whole runs over the given blocks of consecutive
/// generators, rotating as needed; `None` when some block is entered partially.
pub(crate) fn parse_blocks(w: &[Letter], blocks: &[std::ops::Range<usize>]) -> Option<Vec<Token>> {
    let n = w.len();
    let block_of = |l: Letter| blocks.iter().position(|r| r.contains(&words::gen_of(l)));
    if w.iter().all(|&l| block_of(l).is_none()) {
        return Some(w.iter().map(|&l| Token::Loop(l)).collect());
    }
    'rot: for s in 0..n {
        let v = words::rotate(w, s);
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let Some(b) = block_of(v[i]) else {
                out.push(Token::Loop(v[i]));
                i += 1;
                continue;
            };
            let r = &blocks[b];
            let pos = v[i] > 0;
            let want: Vec<Letter> = if pos {
                r.clone().map(|g| words::letter(g, true)).collect()
            } else {
                r.clone().rev().map(|g| words::letter(g, false)).collect()
            };
            if v.len() < i + want.len() || v[i..i + want.len()] != want[..] {
                continue 'rot;
            }
            out.push(Token::Block(b, pos));
            i += want.len();
        }
        return Some(out);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Aggregate {
    /// Largest single-axis twist: the functional of one axis at a time.
    Max,
    /// Sum over the axes: the functional of a disjoint family.
    Sum,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalValue {
    pub value: usize,
    /// Length of the prefix h attaining the value.
    pub prefix: usize,
    /// (h(axis), twist) at the maximizing prefix.
    pub witnesses: Vec<(Curve, usize)>,
}

/// Twisting of `ys` relative to `xs` about `axis`, less the larger self-diameter of the
/// two projections; zero when `ys == xs`.
pub fn relative_twist(w: &CombWindow, xs: &[Curve], ys: &[Curve], axis: &Curve) -> usize {
    let words: Vec<&[Letter]> = xs.iter().chain(ys).map(|c| c.word.as_slice()).collect();
    let cover = AnnularCover::new(w, &axis.word, &words);
    let xi: Vec<usize> = (0..xs.len()).collect();
    let yi: Vec<usize> = (xs.len()..words.len()).collect();
    let own = cover.diameter(&xi, &xi).max(cover.diameter(&yi, &yi));
    cover.diameter(&xi, &yi).saturating_sub(own)
}

/// `L(g) = max over block-boundary prefixes h of g, aggregated over axes a, of tw_{h(a)}(mu, g mu)`.
#[derive(Debug, Clone, Serialize)]
pub struct LengthFunctional {
    pub axes: Vec<Curve>,
    pub mu: Vec<Curve>,
    pub aggregate: Aggregate,
    /// Bound of the functional on the generator sample.
    pub m: f64,
    /// Sample letters that cannot act on the marking inside the window, hence never evaluated.
    pub skipped: Vec<String>,
}

impl LengthFunctional {
    /// Builds the functional and calibrates `m` as its maximum over the letters of `alphabet`
    /// that act on the marking (at least 1).
    pub fn calibrated(amb: &Ambient, axes: &[Curve], aggregate: Aggregate, alphabet: &[Generator]) -> Result<LengthFunctional> {
        if axes.is_empty() {
            return Err(CnpError::EmptyWitness);
        }
        let mut f = LengthFunctional {
            axes: axes.iter().map(|a| amb.lift(a)).collect::<Result<_>>()?,
            mu: amb.marking()?,
            aggregate,
            m: 1.0,
            skipped: Vec::new(),
        };
        let vals = alphabet
            .par_iter()
            .map(|g| match f.eval(amb, &Word::from_letters(vec![g.clone()])) {
                Ok(v) => Ok(Some(v.value)),
                Err(CnpError::WindowOverflow) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        f.skipped = alphabet.iter().zip(&vals).filter(|(_, v)| v.is_none()).map(|(g, _)| g.kind_name().to_string()).collect();
        let vals: Vec<usize> = vals.into_iter().flatten().collect();
        f.m = vals.into_iter().max().unwrap_or(1).max(1) as f64;
        Ok(f)
    }

    pub fn eval(&self, amb: &Ambient, word: &Word) -> Result<FunctionalValue> {
        let g = word.free_reduced();
        let top = amb.top();
        let gmu = amb.apply_all(&g, &self.mu)?;
        let mut cache: HashMap<Curve, usize> = HashMap::new();
        let mut best = FunctionalValue { value: 0, prefix: 0, witnesses: Vec::new() };
        let mut first = true;
        for cut in g.block_cuts() {
            let h = g.prefix(cut);
            let mut terms = Vec::with_capacity(self.axes.len());
            for a in &self.axes {
                let ha = amb.apply(&h, a)?;
                let t = match cache.get(&ha) {
                    Some(&t) => t,
                    None => {
                        let t = relative_twist(top, &self.mu, &gmu, &ha);
                        cache.insert(ha.clone(), t);
                        t
                    }
                };
                terms.push((ha, t));
            }
            let value = match self.aggregate {
                Aggregate::Max => terms.iter().map(|x| x.1).max().unwrap_or(0),
                Aggregate::Sum => terms.iter().map(|x| x.1).sum(),
            };
            if first || value > best.value {
                best = FunctionalValue { value, prefix: cut, witnesses: terms };
                first = false;
            }
        }
        Ok(best)
    }

    pub fn lower(&self, amb: &Ambient, word: &Word) -> Result<f64> {
        Ok(self.eval(amb, word)?.value as f64 / self.m)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormBounds {
    pub upper: usize,
    pub lower: f64,
    pub witnesses: Vec<(Curve, usize)>,
}

/// Upper bound by letter count; lower bound by the better of the single-axis and summed functionals.
pub fn norm_lower(amb: &Ambient, word: &Word, witnesses: &[Curve]) -> Result<NormBounds> {
    if witnesses.is_empty() {
        return Err(CnpError::EmptyWitness);
    }
    for a in witnesses {
        let w = &amb.chain[a.level.min(amb.level())];
        if !is_nonperipheral(a, w, &amb.space)?.nonperipheral {
            return Err(CnpError::HypothesisViolation("witness axis is peripheral".into()));
        }
    }
    let alphabet = alphabet_with_twists(amb, witnesses)?;
    let mut best: Option<(f64, Vec<(Curve, usize)>)> = None;
    for agg in [Aggregate::Max, Aggregate::Sum] {
        let f = LengthFunctional::calibrated(amb, witnesses, agg, &alphabet)?;
        let v = f.eval(amb, word)?;
        let lower = v.value as f64 / f.m;
        if best.as_ref().is_none_or(|b| lower > b.0) {
            best = Some((lower, v.witnesses));
        }
    }
    let (lower, witnesses) = best.expect("two aggregates");
    Ok(NormBounds { upper: norm_upper(word), lower, witnesses })
}

/// The ambient alphabet plus twists about the given curves.
pub fn alphabet_with_twists(amb: &Ambient, axes: &[Curve]) -> Result<Vec<Generator>> {
    let mut out = amb.alphabet()?;
    for a in axes {
        let g = Generator::twist(a.clone());
        if !out.contains(&g) {
            out.push(g);
        }
    }
    Ok(out)
}

/// Calibrated constants of the single-axis functional over a finite axis family.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Calibration {
    /// Bound of the functional on the generator sample.
    pub m: f64,
    /// Additive error of twist translation and marking projection diameters.
    pub b: f64,
    /// Norm of one twist letter.
    pub d0: f64,
    /// Quasi-geodesic constants of twist lines.
    pub q: f64,
    pub big_q: f64,
    /// Range of powers used to fit `b`.
    pub n_range: i64,
}

/// Largest deviation of `tw_a(mu, D_a^n mu)`, plain or relative, from |n| over the axes and |n| <= `n_range`.
pub fn twist_deviation(amb: &Ambient, axes: &[Curve], n_range: i64) -> Result<i64> {
    let mu = amb.marking()?;
    let top = amb.top();
    let per_axis = axes
        .par_iter()
        .map(|a| -> Result<i64> {
            let axis = amb.lift(a)?;
            let mut worst = 0i64;
            for n in -n_range..=n_range {
                let img = amb.apply_all(&Word::twist_power(a, n), &mu)?;
                let tw = annular_twist(top, &mu, &img, &axis) as i64;
                let rel = relative_twist(top, &mu, &img, &axis) as i64;
                worst = worst.max((tw - n.abs()).abs()).max((rel - n.abs()).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_axis.into_iter().max().unwrap_or(0))
}

/// Calibrates M over the alphabet extended by twists about `axes`, and B over |n| <= `n_range`.
pub fn calibrate(amb: &Ambient, axes: &[Curve], n_range: i64) -> Result<Calibration> {
    let alphabet = alphabet_with_twists(amb, axes)?;
    let f = LengthFunctional::calibrated(amb, axes, Aggregate::Max, &alphabet)?;
    let b = twist_deviation(amb, axes, n_range)? as f64;
    let q = f.m.max(1.0);
    Ok(Calibration { m: f.m, b, d0: 1.0, q, big_q: b / f.m, n_range })
}

/// `k` pairwise disjoint non-peripheral curves `f^j(g0)` for a track shift `f`.
pub fn disjoint_np_family(amb: &Ambient, k: usize) -> Result<Vec<Curve>> {
    let z = zeta_surface(&amb.space);
    if z < 4 {
        return Err(CnpError::HypothesisViolation(format!("zeta = {z} < 4")));
    }
    if amb.top().tracks.is_empty() {
        return Err(CnpError::HypothesisViolation("no nontrivial shift track".into()));
    }
    if amb.level() < k {
        return Err(CnpError::WindowOverflow);
    }
    let top = amb.top();
    let seeds = amb.base_curves(0, 12)?;
    for (t, tr) in top.tracks.iter().enumerate() {
        let shift = Generator::new(match tr.track.kind {
            TrackKind::Pair => GenKind::ShiftAB(t),
            TrackKind::Single => GenKind::ShiftA(t),
        });
        'seed: for g0 in &seeds {
            let mut fam = vec![amb.lift(g0)?];
            for _ in 1..k {
                let Ok(next) = amb.apply(&Word::from_letters(vec![shift.clone()]), fam.last().expect("nonempty")) else {
                    continue 'seed;
                };
                fam.push(next);
            }
            for (i, a) in fam.iter().enumerate() {
                if !is_nonperipheral(a, top, &amb.space)?.nonperipheral {
                    continue 'seed;
                }
                for b in &fam[..i] {
                    if a == b || !disjoint_words(top, &a.word, &b.word) {
                        continue 'seed;
                    }
                }
            }
            return Ok(fam);
        }
    }
    Err(CnpError::HypothesisViolation("no seed curve has pairwise disjoint shifts".into()))
}

/// Outcome of the lattice sandwich check for a disjoint family.
#[derive(Debug, Clone, Serialize)]
pub struct ZkReport {
    pub k: usize,
    pub box_size: i64,
    pub points: usize,
    pub m: f64,
    pub b: f64,
    pub upper_failures: usize,
    pub lower_failures: usize,
    /// Smallest `lower - (sum|a_i| - kB)/M` over the lattice.
    pub min_lower_slack: f64,
    /// Largest `upper - sum|a_i|`.
    pub max_upper_excess: i64,
}

impl ZkReport {
    pub fn holds(&self) -> bool {
        self.upper_failures == 0 && self.lower_failures == 0
    }
}

/// Checks `norm_upper(Phi(a)) <= sum|a_i|` and `norm_lower(Phi(a)) >= (sum|a_i| - kB)/M`
/// over `[-box, box]^k`, with `Phi(a) = prod D_{g_i}^{a_i}` and M, B calibrated on the family.
pub fn zk_certificate(amb: &Ambient, family: &[Curve], box_size: i64, b: f64) -> Result<ZkReport> {
    let top = amb.top();
    for (i, a) in family.iter().enumerate() {
        let la = amb.lift(a)?;
        if !is_nonperipheral(&la, top, &amb.space)?.nonperipheral {
            return Err(CnpError::HypothesisViolation("family curve is peripheral".into()));
        }
        for c in &family[..i] {
            if !disjoint_words(top, &la.word, &amb.lift(c)?.word) {
                return Err(CnpError::HypothesisViolation("family is not pairwise disjoint".into()));
            }
        }
    }
    let k = family.len();
    let alphabet = alphabet_with_twists(amb, family)?;
    let f = LengthFunctional::calibrated(amb, family, Aggregate::Sum, &alphabet)?;
    let side = (2 * box_size + 1) as usize;
    let points = side.pow(k as u32);
    let per_point = (0..points)
        .into_par_iter()
        .map(|mut idx| -> Result<(i64, f64)> {
            let mut word = Word::identity();
            let mut total = 0i64;
            for c in family {
                let a = (idx % side) as i64 - box_size;
                idx /= side;
                total += a.abs();
                word = word.concat(&Word::twist_power(c, a));
            }
            let upper = norm_upper(&word) as i64;
            let lower = f.lower(amb, &word)?;
            let floor = (total as f64 - k as f64 * b) / f.m;
            Ok((upper - total, lower - floor))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZkReport {
        k,
        box_size,
        points,
        m: f.m,
        b,
        upper_failures: per_point.iter().filter(|p| p.0 > 0).count(),
        lower_failures: per_point.iter().filter(|p| p.1 < -1e-9).count(),
        min_lower_slack: per_point.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        max_upper_excess: per_point.iter().map(|p| p.0).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests;
