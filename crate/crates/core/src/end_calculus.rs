//! Symbolic calculus of stable end spaces.
//!
//! An end space is described by finitely many orbit types together with
//! their accumulation relation. Clopen sets of ends are summarized by their
//! per-orbit content (`None`, `Partial`, `All`), which is all the end
//! complexity and smallness arguments look at.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{CnpError, Result};

/// Maximality flag of an orbit type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MaximalKind {
    NotMaximal,
    IsolatedMaximal,
    CantorMaximal,
}

/// One orbit type E(x) of the end space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub id: String,
    pub maximal_kind: MaximalKind,
    /// False when the ends of this orbit are accumulated by genus.
    pub planar: bool,
    pub accumulates_to: BTreeSet<String>,
    pub unique_max_accumulation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Genus {
    Finite(u32),
    Infinite,
}

impl Genus {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Genus::Infinite)
    }
}

/// A finite-rank stable end space together with the genus of the surface.
#[derive(Debug, Clone)]
pub struct EndSpace {
    pub orbits: Vec<OrbitSpec>,
    pub genus: Genus,
    index: HashMap<String, usize>,
    /// `reach[i][j]`: points of orbit i accumulate onto orbit j (transitive).
    reach: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
struct RawOrbit {
    id: String,
    maximal: String,
    planar: bool,
    #[serde(default)]
    accumulates_to: Vec<String>,
    #[serde(default)]
    unique_max_acc: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    genus: String,
    orbits: Vec<RawOrbit>,
}

impl EndSpace {
    /// Builds a space and checks identifiers and accumulation references.
    pub fn new(orbits: Vec<OrbitSpec>, genus: Genus) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, o) in orbits.iter().enumerate() {
            if index.insert(o.id.clone(), i).is_some() {
                return Err(CnpError::InvalidSpace(format!("duplicate orbit id {}", o.id)));
            }
        }
        let n = orbits.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, o) in orbits.iter().enumerate() {
            for t in &o.accumulates_to {
                let j = *index
                    .get(t)
                    .ok_or_else(|| CnpError::InvalidSpace(format!("{} accumulates to unknown {}", o.id, t)))?;
                reach[i][j] = true;
            }
            if o.maximal_kind == MaximalKind::CantorMaximal {
                reach[i][i] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        if !orbits.iter().any(|o| o.maximal_kind != MaximalKind::NotMaximal) {
            return Err(CnpError::InvalidSpace("no maximal orbit".into()));
        }
        for o in &orbits {
            if let Some(u) = &o.unique_max_accumulation {
                let j = *index
                    .get(u)
                    .ok_or_else(|| CnpError::InvalidSpace(format!("unknown unique accumulation {u}")))?;
                if orbits[j].maximal_kind != MaximalKind::IsolatedMaximal {
                    return Err(CnpError::InvalidSpace(format!(
                        "{}: unique accumulation point {} is not isolated maximal",
                        o.id, u
                    )));
                }
                let maxes: Vec<&String> = o
                    .accumulates_to
                    .iter()
                    .filter(|t| orbits[index[*t]].maximal_kind != MaximalKind::NotMaximal)
                    .collect();
                if maxes != vec![u] {
                    return Err(CnpError::InvalidSpace(format!(
                        "{}: unique accumulation {} must be the only maximal orbit it accumulates to",
                        o.id, u
                    )));
                }
            }
        }
        Ok(EndSpace { orbits, genus, index, reach })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpace = serde_json::from_str(text).map_err(|e| CnpError::Malformed(e.to_string()))?;
        let genus = if raw.genus == "infinite" {
            Genus::Infinite
        } else if let Some(n) = raw.genus.strip_prefix("finite:") {
            Genus::Finite(n.parse().map_err(|_| CnpError::Malformed(format!("bad genus {}", raw.genus)))?)
        } else {
            return Err(CnpError::Malformed(format!("bad genus {}", raw.genus)));
        };
        let mut orbits = Vec::new();
        for r in raw.orbits {
            let maximal_kind = match r.maximal.as_str() {
                "isolated" => MaximalKind::IsolatedMaximal,
                "cantor" => MaximalKind::CantorMaximal,
                "none" => MaximalKind::NotMaximal,
                other => return Err(CnpError::Malformed(format!("bad maximal kind {other}"))),
            };
            orbits.push(OrbitSpec {
                id: r.id,
                maximal_kind,
                planar: r.planar,
                accumulates_to: r.accumulates_to.into_iter().collect(),
                unique_max_accumulation: r.unique_max_acc,
            });
        }
        EndSpace::new(orbits, genus)
    }

    pub fn to_json(&self) -> String {
        let raw = RawSpace {
            genus: match self.genus {
                Genus::Infinite => "infinite".into(),
                Genus::Finite(n) => format!("finite:{n}"),
            },
            orbits: self
                .orbits
                .iter()
                .map(|o| RawOrbit {
                    id: o.id.clone(),
                    maximal: match o.maximal_kind {
                        MaximalKind::IsolatedMaximal => "isolated",
                        MaximalKind::CantorMaximal => "cantor",
                        MaximalKind::NotMaximal => "none",
                    }
                    .into(),
                    planar: o.planar,
                    accumulates_to: o.accumulates_to.iter().cloned().collect(),
                    unique_max_acc: o.unique_max_accumulation.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn idx(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn kind(&self, i: usize) -> MaximalKind {
        self.orbits[i].maximal_kind
    }

    /// True when points of orbit `i` accumulate onto orbit `j`.
    pub fn reaches(&self, i: usize, j: usize) -> bool {
        self.reach[i][j]
    }

    pub fn unique_acc_index(&self, i: usize) -> Option<usize> {
        self.orbits[i].unique_max_accumulation.as_ref().map(|u| self.index[u])
    }

    /// Isolated maximal orbits that are the unique maximal accumulation point of some orbit.
    pub fn unique_acc_points(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| {
                self.kind(x) == MaximalKind::IsolatedMaximal
                    && (0..self.len()).any(|y| self.unique_acc_index(y) == Some(x))
            })
            .collect()
    }
}

/// Orbits with no strict successor, checked against the maximality flags.
pub fn maximal_orbits(space: &EndSpace) -> Result<BTreeSet<String>> {
    let n = space.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        let structural = !(0..n).any(|j| j != i && space.reaches(i, j) && !space.reaches(j, i));
        let flagged = space.kind(i) != MaximalKind::NotMaximal;
        if structural != flagged {
            return Err(CnpError::InconsistentFlags(format!(
                "orbit {} flagged {:?} but structurally {}",
                space.orbits[i].id,
                space.kind(i),
                if structural { "maximal" } else { "not maximal" }
            )));
        }
        if structural {
            out.insert(space.orbits[i].id.clone());
        }
    }
    Ok(out)
}

/// Minimum boundary count of an anchor surface.
pub fn zeta_surface(space: &EndSpace) -> u32 {
    let cantor = (0..space.len()).filter(|&i| space.kind(i) == MaximalKind::CantorMaximal).count();
    let isolated = (0..space.len()).filter(|&i| space.kind(i) == MaximalKind::IsolatedMaximal).count();
    (2 * cantor + isolated + space.unique_acc_points().len()) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockKind {
    Isolated,
    CantorHalf(u8),
    Peripheral,
}

/// One complementary block of the anchor surface.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    /// The maximal orbit carried (for P-blocks: the isolated end it is attached to).
    pub orbit: String,
    pub kind: BlockKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorDecomposition {
    pub a_blocks: Vec<Block>,
    pub p_blocks: Vec<Block>,
    pub boundary_count: usize,
}

impl AnchorDecomposition {
    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.a_blocks.iter().chain(self.p_blocks.iter())
    }
}

pub fn anchor_decomposition(space: &EndSpace) -> AnchorDecomposition {
    let mut a_blocks = Vec::new();
    let mut p_blocks = Vec::new();
    for o in &space.orbits {
        match o.maximal_kind {
            MaximalKind::IsolatedMaximal => a_blocks.push(Block {
                name: format!("A:{}", o.id),
                orbit: o.id.clone(),
                kind: BlockKind::Isolated,
            }),
            MaximalKind::CantorMaximal => {
                for h in 1..=2u8 {
                    a_blocks.push(Block {
                        name: format!("A:{}#{h}", o.id),
                        orbit: o.id.clone(),
                        kind: BlockKind::CantorHalf(h),
                    });
                }
            }
            MaximalKind::NotMaximal => {}
        }
    }
    for x in space.unique_acc_points() {
        let id = &space.orbits[x].id;
        p_blocks.push(Block { name: format!("P:{id}"), orbit: id.clone(), kind: BlockKind::Peripheral });
    }
    let boundary_count = a_blocks.len() + p_blocks.len();
    AnchorDecomposition { a_blocks, p_blocks, boundary_count }
}

/// How much of one orbit a clopen set contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Content {
    #[default]
    None,
    Partial,
    All,
}

impl Content {
    pub fn complement(self) -> Content {
        match self {
            Content::None => Content::All,
            Content::Partial => Content::Partial,
            Content::All => Content::None,
        }
    }
    pub fn meets(self) -> bool {
        self != Content::None
    }
}

/// Symbolic clopen set of ends, summarized by maximal-orbit content.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ClopenProfile {
    #[serde(default)]
    pub isolated_max_contained: BTreeSet<String>,
    #[serde(default)]
    pub cantor_content: BTreeMap<String, Content>,
    #[serde(default)]
    pub unique_acc_touched: BTreeSet<String>,
    #[serde(default)]
    pub nonmax_content: BTreeMap<String, Content>,
}

impl ClopenProfile {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn whole(space: &EndSpace) -> Self {
        Self::from_contents(space, &vec![Content::All; space.len()])
    }

    /// Builds a profile from per-orbit content; the touched set is derived.
    pub fn from_contents(space: &EndSpace, contents: &[Content]) -> Self {
        let mut p = ClopenProfile::default();
        for (i, o) in space.orbits.iter().enumerate() {
            let c = contents[i];
            match o.maximal_kind {
                MaximalKind::IsolatedMaximal => {
                    if c.meets() {
                        p.isolated_max_contained.insert(o.id.clone());
                    }
                }
                MaximalKind::CantorMaximal => {
                    if c.meets() {
                        p.cantor_content.insert(o.id.clone(), c);
                    }
                }
                MaximalKind::NotMaximal => {
                    if c.meets() {
                        p.nonmax_content.insert(o.id.clone(), c);
                        if let Some(u) = &o.unique_max_accumulation {
                            p.unique_acc_touched.insert(u.clone());
                        }
                    }
                }
            }
        }
        p
    }

    /// Per-orbit content in space order (isolated maximal orbits are `None` or `All`).
    pub fn contents(&self, space: &EndSpace) -> Vec<Content> {
        space
            .orbits
            .iter()
            .map(|o| match o.maximal_kind {
                MaximalKind::IsolatedMaximal => {
                    if self.isolated_max_contained.contains(&o.id) {
                        Content::All
                    } else {
                        Content::None
                    }
                }
                MaximalKind::CantorMaximal => self.cantor_content.get(&o.id).copied().unwrap_or_default(),
                MaximalKind::NotMaximal => self.nonmax_content.get(&o.id).copied().unwrap_or_default(),
            })
            .collect()
    }

    pub fn is_empty_set(&self, space: &EndSpace) -> bool {
        self.contents(space).iter().all(|c| !c.meets())
    }

    pub fn complement(&self, space: &EndSpace) -> Self {
        let c: Vec<Content> = self.contents(space).into_iter().map(Content::complement).collect();
        Self::from_contents(space, &c)
    }

    /// Checks field kinds, the derived touched set and realizability of the set and its complement.
    pub fn validate(&self, space: &EndSpace) -> Result<()> {
        let check = |id: &String, want: MaximalKind| -> Result<()> {
            match space.idx(id) {
                Some(i) if space.kind(i) == want => Ok(()),
                _ => Err(CnpError::InvalidProfile(format!("{id} is not a {want:?} orbit"))),
            }
        };
        for id in &self.isolated_max_contained {
            check(id, MaximalKind::IsolatedMaximal)?;
        }
        for id in self.cantor_content.keys() {
            check(id, MaximalKind::CantorMaximal)?;
        }
        for id in self.nonmax_content.keys() {
            check(id, MaximalKind::NotMaximal)?;
        }
        for id in &self.unique_acc_touched {
            check(id, MaximalKind::IsolatedMaximal)?;
        }
        let contents = self.contents(space);
        let derived = Self::from_contents(space, &contents);
        if derived.unique_acc_touched != self.unique_acc_touched {
            return Err(CnpError::InvalidProfile("unique_acc_touched disagrees with the orbit content".into()));
        }
        if !realizable(space, &contents) {
            return Err(CnpError::InvalidProfile("content violates accumulation closure".into()));
        }
        let comp: Vec<Content> = contents.iter().map(|c| c.complement()).collect();
        if !realizable(space, &comp) {
            return Err(CnpError::InvalidProfile("complement violates accumulation closure".into()));
        }
        Ok(())
    }
}

/// Closure constraints for a clopen set: meeting an orbit forces meeting every orbit that
/// accumulates onto it, and containing a whole orbit forces containing its closure.
pub fn realizable(space: &EndSpace, contents: &[Content]) -> bool {
    let n = space.len();
    for i in 0..n {
        if contents[i].meets() {
            for j in 0..n {
                if j != i && space.reaches(j, i) && !contents[j].meets() {
                    return false;
                }
            }
        }
        if contents[i] == Content::All {
            for t in 0..n {
                if t != i && space.reaches(i, t) && contents[t] != Content::All {
                    return false;
                }
            }
        }
    }
    true
}

/// Every realizable profile whose complement is realizable, in lexicographic content order.
pub fn enumerate_profiles(space: &EndSpace) -> Vec<ClopenProfile> {
    let n = space.len();
    let options: Vec<Vec<Content>> = (0..n)
        .map(|i| match space.kind(i) {
            MaximalKind::IsolatedMaximal => vec![Content::None, Content::All],
            _ => vec![Content::None, Content::Partial, Content::All],
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![Content::None; n];
    fn rec(
        k: usize,
        space: &EndSpace,
        options: &[Vec<Content>],
        cur: &mut Vec<Content>,
        out: &mut Vec<ClopenProfile>,
    ) {
        if k == options.len() {
            let comp: Vec<Content> = cur.iter().map(|c| c.complement()).collect();
            if realizable(space, cur) && realizable(space, &comp) {
                out.push(ClopenProfile::from_contents(space, cur));
            }
            return;
        }
        for &c in &options[k] {
            cur[k] = c;
            rec(k + 1, space, options, cur, out);
        }
    }
    rec(0, space, &options, &mut cur, &mut out);
    out
}

/// End complexity of a clopen set, scored as in the small-ends argument.
pub fn zeta_clopen(profile: &ClopenProfile, _space: &EndSpace) -> u32 {
    let iso = profile.isolated_max_contained.len() as u32;
    let cantor: u32 = profile
        .cantor_content
        .values()
        .map(|c| match c {
            Content::None => 0,
            Content::Partial => 1,
            Content::All => 2,
        })
        .sum();
    iso + cantor + profile.unique_acc_touched.len() as u32
}

/// Per-orbit content of an anchor block.
pub fn block_contents(space: &EndSpace, block: &Block) -> Vec<Content> {
    let n = space.len();
    let m = space.idx(&block.orbit).expect("block orbit exists");
    let mut c = vec![Content::None; n];
    match block.kind {
        BlockKind::Isolated => {
            c[m] = Content::All;
            for z in 0..n {
                if z != m && space.reaches(z, m) {
                    c[z] = Content::Partial;
                }
            }
        }
        BlockKind::CantorHalf(_) => {
            for z in 0..n {
                if space.reaches(z, m) {
                    c[z] = Content::Partial;
                }
            }
        }
        BlockKind::Peripheral => {
            for y in 0..n {
                if space.unique_acc_index(y) == Some(m) {
                    c[y] = Content::Partial;
                    for z in 0..n {
                        if z != y && space.reaches(z, y) {
                            c[z] = Content::Partial;
                        }
                    }
                }
            }
        }
    }
    c
}

pub fn block_profile(space: &EndSpace, block: &Block) -> ClopenProfile {
    ClopenProfile::from_contents(space, &block_contents(space, block))
}

/// Decision of the smallness rules, with the rule that fired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallVerdict {
    pub small: bool,
    pub reason: String,
}

fn verdict(small: bool, reason: impl Into<String>) -> Result<SmallVerdict> {
    Ok(SmallVerdict { small, reason: reason.into() })
}

/// Rule-based smallness test.
///
/// The scoring rule `zeta >= 2 => not small` has one exception class: a set holding a
/// single isolated maximal end x whose only unique-accumulation touch is x itself (for
/// instance the anchor block of x). Such a set scores 2 yet sits inside the block of x,
/// so it is decided by block fit like the sets of complexity one.
pub fn is_small(profile: &ClopenProfile, space: &EndSpace) -> Result<SmallVerdict> {
    profile.validate(space)?;
    let c = profile.contents(space);
    let n = space.len();
    if c.iter().all(|x| !x.meets()) {
        return verdict(true, "empty set");
    }
    for i in 0..n {
        if space.kind(i) != MaximalKind::IsolatedMaximal && c[i] == Content::All {
            return verdict(false, format!("contains all of E({}); no block contains a whole orbit", space.orbits[i].id));
        }
    }
    let zeta = zeta_clopen(profile, space);
    let iso: Vec<usize> = (0..n)
        .filter(|&i| space.kind(i) == MaximalKind::IsolatedMaximal && c[i].meets())
        .collect();
    let cantor: Vec<usize> = (0..n)
        .filter(|&i| space.kind(i) == MaximalKind::CantorMaximal && c[i].meets())
        .collect();
    let own_touch_only = iso.len() == 1
        && cantor.is_empty()
        && profile.unique_acc_touched.iter().all(|t| space.idx(t) == Some(iso[0]));
    if zeta >= 2 && !own_touch_only {
        return verdict(false, format!("zeta(X) = {zeta} >= 2"));
    }
    let others_reach = |m: usize| (0..n).filter(|&z| z != m && c[z].meets()).all(|z| space.reaches(z, m));
    if let Some(&x) = iso.first() {
        let id = &space.orbits[x].id;
        return if others_reach(x) {
            verdict(true, format!("fits the anchor block of {id}"))
        } else {
            verdict(false, format!("contains {id} and content outside its block"))
        };
    }
    if let Some(&k) = cantor.first() {
        let id = &space.orbits[k].id;
        return if others_reach(k) {
            verdict(true, format!("fits one half of the Cantor orbit {id}"))
        } else {
            verdict(false, format!("meets {id} and content not accumulating to it"))
        };
    }
    // Only non-maximal content from here on.
    let present: Vec<usize> = (0..n).filter(|&z| c[z].meets()).collect();
    if let Some(t) = profile.unique_acc_touched.iter().next() {
        let a = space.idx(t).expect("validated");
        if present.iter().all(|&z| space.reaches(z, a)) {
            return verdict(true, format!("fits the anchor block of {t}"));
        }
        let in_p = |z: usize| {
            (0..n).any(|y| space.unique_acc_index(y) == Some(a) && (y == z || space.reaches(z, y)))
        };
        if present.iter().all(|&z| in_p(z)) {
            return verdict(true, format!("fits the P-block of {t}"));
        }
        return verdict(false, format!("touches {t} but does not fit its blocks"));
    }
    for m in 0..n {
        if space.kind(m) != MaximalKind::NotMaximal && present.iter().all(|&z| space.reaches(z, m)) {
            return verdict(true, format!("fits a block of {}", space.orbits[m].id));
        }
    }
    verdict(false, "non-maximal content spread over several maximal types")
}

/// Brute-force embedding oracle: is there a block C with X fitting into C orbit by orbit,
/// where orbit-preserving maps may move points within each E(z) freely?
pub fn small_oracle(profile: &ClopenProfile, space: &EndSpace) -> bool {
    let x = profile.contents(space);
    if x.iter().all(|c| !c.meets()) {
        return true;
    }
    let decomp = anchor_decomposition(space);
    let fits = decomp.blocks().any(|b| {
        let cap = block_contents(space, b);
        x.iter().zip(cap.iter()).all(|(xc, bc)| match xc {
            Content::None => true,
            Content::Partial => bc.meets(),
            Content::All => *bc == Content::All,
        })
    });
    fits
}

/// Union of two parts of a partition: `All` exactly when the remaining parts miss the orbit.
fn partition_union(space: &EndSpace, parts: &[&ClopenProfile; 4], pick: &[usize]) -> ClopenProfile {
    let cs: Vec<Vec<Content>> = parts.iter().map(|p| p.contents(space)).collect();
    let n = space.len();
    let mut out = vec![Content::None; n];
    for i in 0..n {
        let inside = pick.iter().any(|&k| cs[k][i].meets());
        let outside = (0..4).filter(|k| !pick.contains(k)).any(|k| cs[k][i].meets());
        out[i] = match (inside, outside) {
            (false, _) => Content::None,
            (true, false) => Content::All,
            (true, true) => Content::Partial,
        };
    }
    ClopenProfile::from_contents(space, &out)
}

/// Checks that four profiles can form a partition of End(Σ).
pub fn is_partition(space: &EndSpace, parts: &[&ClopenProfile; 4]) -> bool {
    let cs: Vec<Vec<Content>> = parts.iter().map(|p| p.contents(space)).collect();
    (0..space.len()).all(|i| {
        let all = cs.iter().filter(|c| c[i] == Content::All).count();
        let partial = cs.iter().filter(|c| c[i] == Content::Partial).count();
        if space.kind(i) == MaximalKind::IsolatedMaximal {
            all == 1
        } else {
            (all == 1 && partial == 0) || (all == 0 && partial >= 2)
        }
    })
}

/// Returns the lowest index i (1-based) with X_i and its complement both not small.
pub fn four_way_selector(parts: [&ClopenProfile; 4], space: &EndSpace) -> Result<usize> {
    if zeta_surface(space) < 5 {
        return Err(CnpError::HypothesisViolation(format!("zeta(Sigma) = {} < 5", zeta_surface(space))));
    }
    for p in parts.iter() {
        p.validate(space)?;
        if p.is_empty_set(space) {
            return Err(CnpError::HypothesisViolation("empty part".into()));
        }
    }
    if !is_partition(space, &parts) {
        return Err(CnpError::HypothesisViolation("profiles do not partition End(Sigma)".into()));
    }
    for pick in [[0usize, 1], [2, 3]] {
        if is_small(&partition_union(space, &parts, &pick), space)?.small {
            return Err(CnpError::HypothesisViolation(format!(
                "X{} + X{} is small",
                pick[0] + 1,
                pick[1] + 1
            )));
        }
    }
    for (i, p) in parts.iter().enumerate() {
        let comp = partition_union(space, &parts, &(0..4).filter(|&k| k != i).collect::<Vec<_>>());
        if !is_small(p, space)?.small && !is_small(&comp, space)?.small {
            return Ok(i + 1);
        }
    }
    Err(CnpError::NoSelector)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackKind {
    /// Track between two A-blocks sharing an orbit type.
    Pair,
    /// Track from an isolated maximal end into its P-block.
    Single,
}

/// A shift track: the pieces W^k, k in [-J, J], flowing from `source` to `dest`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Track {
    pub kind: TrackKind,
    pub source: String,
    pub dest: String,
    pub shared: Vec<String>,
    pub w_profile: ClopenProfile,
    pub levels: Vec<i32>,
}

fn closure_partial(space: &EndSpace, base: &[usize]) -> Vec<Content> {
    let n = space.len();
    let mut c = vec![Content::None; n];
    for &b in base {
        c[b] = Content::Partial;
        for z in 0..n {
            if space.reaches(z, b) {
                c[z] = Content::Partial;
            }
        }
    }
    c
}

/// Symbolic shift tracks of the decomposition of ends, truncated at |k| <= `truncation`.
pub fn shift_orbit_decomposition(space: &EndSpace, decomp: &AnchorDecomposition, truncation: usize) -> Vec<Track> {
    let j = truncation as i32;
    let levels: Vec<i32> = (-j..=j).collect();
    let n = space.len();
    let mut out = Vec::new();
    for (ai, a) in decomp.a_blocks.iter().enumerate() {
        for b in decomp.a_blocks.iter().skip(ai + 1) {
            let ma = space.idx(&a.orbit).unwrap();
            let mb = space.idx(&b.orbit).unwrap();
            let base: Vec<usize> = if ma == mb {
                vec![ma]
            } else {
                (0..n)
                    .filter(|&z| space.kind(z) == MaximalKind::NotMaximal && space.reaches(z, ma) && space.reaches(z, mb))
                    .collect()
            };
            if base.is_empty() {
                continue;
            }
            out.push(Track {
                kind: TrackKind::Pair,
                source: a.name.clone(),
                dest: b.name.clone(),
                shared: base.iter().map(|&z| space.orbits[z].id.clone()).collect(),
                w_profile: ClopenProfile::from_contents(space, &closure_partial(space, &base)),
                levels: levels.clone(),
            });
        }
    }
    for p in &decomp.p_blocks {
        let x = space.idx(&p.orbit).unwrap();
        let base: Vec<usize> = (0..n).filter(|&y| space.unique_acc_index(y) == Some(x)).collect();
        out.push(Track {
            kind: TrackKind::Single,
            source: format!("A:{}", p.orbit),
            dest: p.name.clone(),
            shared: base.iter().map(|&z| space.orbits[z].id.clone()).collect(),
            w_profile: ClopenProfile::from_contents(space, &closure_partial(space, &base)),
            levels: levels.clone(),
        });
    }
    out
}
