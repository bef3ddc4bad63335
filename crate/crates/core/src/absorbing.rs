//! Stars, absorbing tuples and the two embedding routines built on them: a
//! covering embedding that maps tree vertices onto every star of a family,
//! and the swap that grows an embedding by two unused host vertices.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddingError, PartialEmbedding};
use crate::hypergraph::{Hypergraph3, Vertex, VertexMask};
use crate::loose_tree::{random_loose_tree, LooseTree};
use crate::rng::{derive_seed, seeded, Rng};

/// `center` together with `d` vertex pairs, each forming an edge with it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Star {
    pub center: Vertex,
    pub pairs: Vec<[Vertex; 2]>,
}

impl Star {
    pub fn d(&self) -> usize {
        self.pairs.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        std::iter::once(self.center).chain(self.pairs.iter().flatten().copied())
    }

    /// All `2d+1` vertices distinct and every `{center} ∪ pair` an edge of `h`.
    pub fn is_star_in(&self, h: &Hypergraph3) -> bool {
        let vs: Vec<Vertex> = self.vertices().collect();
        let mut sorted = vs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len() == vs.len()
            && vs.iter().all(|&v| v < h.n())
            && self.pairs.iter().all(|&[a, b]| h.has_edge(self.center, a, b))
    }

    /// The same pairs around a different centre.
    pub fn with_center(&self, center: Vertex) -> Star {
        Star { center, pairs: self.pairs.clone() }
    }
}

/// Two vertex-disjoint stars absorbing the ordered triple `target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbsorbingTuple {
    pub target: [Vertex; 3],
    pub stars: [Star; 2],
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TupleViolation {
    #[error("target vertices are not distinct")]
    TargetRepeated,
    #[error("target vertex {0} lies in one of the stars")]
    TargetInStar(Vertex),
    #[error("star {0} is not a star of the host")]
    NotAStar(usize),
    #[error("the stars have different sizes")]
    UnequalStars,
    #[error("the two stars share a vertex")]
    StarsOverlap,
    #[error("{{w1, v2, v3}} is not an edge")]
    MissingCentreEdge,
    #[error("star {0} does not transfer to its target vertex")]
    TransferFails(usize),
}

impl AbsorbingTuple {
    pub fn vertices(&self) -> Vec<Vertex> {
        self.stars.iter().flat_map(|s| s.vertices()).collect()
    }

    pub fn d(&self) -> usize {
        self.stars[0].d()
    }

    /// This tuple, or its mirror image with the stars swapped, as an
    /// absorbing tuple for `target`.
    pub fn retarget(&self, h: &Hypergraph3, target: [Vertex; 3]) -> Option<AbsorbingTuple> {
        let [s2, s3] = &self.stars;
        [[s2, s3], [s3, s2]].into_iter().find_map(|[a, b]| {
            let t = AbsorbingTuple { target, stars: [a.clone(), b.clone()] };
            validate_tuple(h, &t).is_ok().then_some(t)
        })
    }
}

/// Unfolds the definition: the stars are equal-sized, vertex-disjoint stars
/// of `h`, `{w1, v2, v3}` is an edge, moving star `j` to centre `w_j` gives a
/// star again, and no target vertex is used by either star.
pub fn validate_tuple(h: &Hypergraph3, t: &AbsorbingTuple) -> Result<(), TupleViolation> {
    let [w1, w2, w3] = t.target;
    if w1 == w2 || w2 == w3 || w1 == w3 {
        return Err(TupleViolation::TargetRepeated);
    }
    for (i, s) in t.stars.iter().enumerate() {
        if !s.is_star_in(h) {
            return Err(TupleViolation::NotAStar(i));
        }
    }
    if t.stars[0].d() != t.stars[1].d() {
        return Err(TupleViolation::UnequalStars);
    }
    let first: Vec<Vertex> = t.stars[0].vertices().collect();
    if t.stars[1].vertices().any(|v| first.contains(&v)) {
        return Err(TupleViolation::StarsOverlap);
    }
    let all = t.vertices();
    if let Some(&w) = t.target.iter().find(|w| all.contains(w)) {
        return Err(TupleViolation::TargetInStar(w));
    }
    if !h.has_edge(w1, t.stars[0].center, t.stars[1].center) {
        return Err(TupleViolation::MissingCentreEdge);
    }
    for (i, (s, w)) in t.stars.iter().zip([w2, w3]).enumerate() {
        if !s.with_center(w).is_star_in(h) {
            return Err(TupleViolation::TransferFails(i));
        }
    }
    Ok(())
}

struct TupleSearch<'a> {
    h: &'a Hypergraph3,
    order: &'a [Vertex],
    rank: Vec<usize>,
    d: usize,
    limit: usize,
    out: Vec<AbsorbingTuple>,
}

impl TupleSearch<'_> {
    fn full(&self) -> bool {
        self.out.len() >= self.limit
    }

    /// Pairs `{a, b}` outside `used` forming an edge with both `w` and `v`, in scan order.
    fn common_pairs(&self, w: Vertex, v: Vertex, used: &VertexMask) -> Vec<[Vertex; 2]> {
        let mut out = Vec::new();
        for &a in self.order {
            if used.contains(a) || a == w || a == v {
                continue;
            }
            let mut bs: Vec<Vertex> = self
                .h
                .pair_neighbors(w, a)
                .into_iter()
                .filter(|&b| self.rank[b] > self.rank[a] && !used.contains(b) && b != v && self.h.has_edge(v, a, b))
                .collect();
            bs.sort_unstable_by_key(|&b| self.rank[b]);
            out.extend(bs.into_iter().map(|b| [a, b]));
        }
        out
    }

    /// Every way to pick `d` disjoint pairs from `pairs[from..]`, in order.
    fn choose(&mut self, pairs: &[[Vertex; 2]], from: usize, picked: &mut Vec<[Vertex; 2]>, k: &mut dyn FnMut(&mut Self, &[[Vertex; 2]])) {
        if self.full() {
            return;
        }
        if picked.len() == self.d {
            k(self, picked);
            return;
        }
        for i in from..pairs.len() {
            let p = pairs[i];
            if picked.iter().any(|q| q.contains(&p[0]) || q.contains(&p[1])) {
                continue;
            }
            picked.push(p);
            self.choose(pairs, i + 1, picked, k);
            picked.pop();
            if self.full() {
                return;
            }
        }
    }

    fn run(&mut self, target: [Vertex; 3], avoid: &VertexMask) {
        let [w1, w2, w3] = target;
        let order = self.order;
        for &v2 in order {
            if target.contains(&v2) || avoid.contains(v2) {
                continue;
            }
            for &v3 in order {
                if v3 == v2 || target.contains(&v3) || avoid.contains(v3) || !self.h.has_edge(w1, v2, v3) {
                    continue;
                }
                let mut used = avoid.clone();
                for v in [w1, w2, w3, v2, v3] {
                    used.insert(v);
                }
                let side2 = self.common_pairs(w2, v2, &used);
                let mut picked = Vec::new();
                self.choose(&side2, 0, &mut picked, &mut |s, star2| {
                    let mut used3 = used.clone();
                    for &[a, b] in star2 {
                        used3.insert(a);
                        used3.insert(b);
                    }
                    let side3 = s.common_pairs(w3, v3, &used3);
                    let star2 = star2.to_vec();
                    let mut picked3 = Vec::new();
                    s.choose(&side3, 0, &mut picked3, &mut |s, star3| {
                        s.out.push(AbsorbingTuple {
                            target,
                            stars: [Star { center: v2, pairs: star2.clone() }, Star { center: v3, pairs: star3.to_vec() }],
                        });
                    });
                });
                if self.full() {
                    return;
                }
            }
        }
    }
}

/// Absorbing `d`-tuples for `target`, at most `limit` of them, enumerated
/// lexicographically: `v2`, then `v3`, then the pairs of each star.
pub fn find_absorbing_tuples(h: &Hypergraph3, target: [Vertex; 3], d: usize, limit: usize) -> Vec<AbsorbingTuple> {
    let order: Vec<Vertex> = (0..h.n()).collect();
    search_tuples(h, target, d, limit, &order, &VertexMask::new(h.n()))
}

/// As [`find_absorbing_tuples`], scanning vertices in `order` and never using
/// a vertex of `avoid`.
pub fn search_tuples(h: &Hypergraph3, target: [Vertex; 3], d: usize, limit: usize, order: &[Vertex], avoid: &VertexMask) -> Vec<AbsorbingTuple> {
    let n = h.n();
    if d == 0 || limit == 0 || target.iter().any(|&w| w >= n) || target[0] == target[1] || target[1] == target[2] || target[0] == target[2] {
        return Vec::new();
    }
    let mut rank = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut s = TupleSearch { h, order, rank, d, limit, out: Vec::new() };
    s.run(target, avoid);
    s.out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetScope {
    /// Every ordered triple of distinct host vertices.
    All,
    /// This many ordered triples drawn with the family seed.
    Sampled(usize),
    Listed(Vec<[Vertex; 3]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMethod {
    /// Scan targets in seeded order and add disjoint tuples until each meets its quota.
    Greedy,
    /// Keep each candidate tuple with `probability`, then drop every pair of
    /// kept tuples that share a vertex. Only meaningful on small hosts: the
    /// candidate pool is capped at `max_candidates`.
    Sampling { probability: f64, max_candidates: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub d: usize,
    pub quota: usize,
    pub scope: TargetScope,
    pub method: FamilyMethod,
    pub max_tuples: Option<usize>,
    /// Vertices scanned before all others when picking star vertices.
    #[serde(default)]
    pub preferred: Vec<Vertex>,
    pub seed: u64,
}

impl FamilyConfig {
    pub fn new(d: usize, quota: usize, seed: u64) -> Self {
        Self { d, quota, scope: TargetScope::All, method: FamilyMethod::Greedy, max_tuples: None, preferred: Vec::new(), seed }
    }
}

/// `preferred` first, then the rest, each block shuffled.
fn preference_order(n: usize, preferred: &[Vertex], rng: &mut Rng) -> Vec<Vertex> {
    let pref = VertexMask::from_vertices(n, preferred.iter().copied().filter(|&v| v < n));
    let mut head: Vec<Vertex> = pref.iter().collect();
    let mut tail: Vec<Vertex> = (0..n).filter(|&v| !pref.contains(v)).collect();
    head.shuffle(rng);
    tail.shuffle(rng);
    head.extend(tail);
    head
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetCount {
    pub target: [Vertex; 3],
    pub count: usize,
}

/// Pairwise vertex-disjoint absorbing tuples. `index` counts, for every
/// in-scope target whose `w2, w3` avoid the family, how many members absorb
/// it in either orientation; `shortfalls` lists those below the quota.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorberFamily {
    pub d: usize,
    pub quota: usize,
    pub tuples: Vec<AbsorbingTuple>,
    pub index: Vec<TargetCount>,
    pub shortfalls: Vec<TargetCount>,
}

impl AbsorberFamily {
    pub fn empty(d: usize) -> Self {
        Self { d, quota: 0, tuples: Vec::new(), index: Vec::new(), shortfalls: Vec::new() }
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = self.tuples.iter().flat_map(|t| t.vertices()).collect();
        v.sort_unstable();
        v
    }

    pub fn absorbing_count(&self, h: &Hypergraph3, target: [Vertex; 3]) -> usize {
        self.tuples.iter().filter(|t| t.retarget(h, target).is_some()).count()
    }

    /// Members pairwise vertex-disjoint and each valid for its stored target.
    pub fn is_valid(&self, h: &Hypergraph3) -> bool {
        let v = self.vertices();
        v.windows(2).all(|w| w[0] != w[1]) && self.tuples.iter().all(|t| validate_tuple(h, t).is_ok())
    }

    /// Recomputes `index` and `shortfalls` over `targets`.
    pub fn reindex(&mut self, h: &Hypergraph3, targets: &[[Vertex; 3]]) {
        let used = VertexMask::from_vertices(h.n(), self.vertices());
        self.index = targets
            .iter()
            .filter(|t| !used.contains(t[1]) && !used.contains(t[2]))
            .map(|&target| TargetCount { target, count: self.absorbing_count(h, target) })
            .collect();
        self.shortfalls = self.index.iter().filter(|c| c.count < self.quota).cloned().collect();
    }
}

fn scope_targets(n: usize, scope: &TargetScope, rng: &mut Rng) -> Vec<[Vertex; 3]> {
    match scope {
        TargetScope::All => {
            let mut out = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if a != b && b != c && a != c {
                            out.push([a, b, c]);
                        }
                    }
                }
            }
            out
        }
        TargetScope::Sampled(k) if n >= 3 => (0..*k)
            .map(|_| {
                let v = rand::seq::index::sample(rng, n, 3);
                [v.index(0), v.index(1), v.index(2)]
            })
            .collect(),
        TargetScope::Sampled(_) => Vec::new(),
        TargetScope::Listed(l) => l.clone(),
    }
}

/// Greedy family over every ordered triple with the given per-triple quota.
pub fn build_absorber_family(h: &Hypergraph3, d: usize, quota: usize, seed: u64) -> AbsorberFamily {
    build_absorber_family_with(h, &FamilyConfig::new(d, quota, seed))
}

pub fn build_absorber_family_with(h: &Hypergraph3, cfg: &FamilyConfig) -> AbsorberFamily {
    let n = h.n();
    let mut rng = seeded(cfg.seed);
    let targets = scope_targets(n, &cfg.scope, &mut rng);
    let mut fam = AbsorberFamily { d: cfg.d, quota: cfg.quota, ..AbsorberFamily::empty(cfg.d) };
    if cfg.quota == 0 || cfg.d == 0 {
        fam.reindex(h, &targets);
        return fam;
    }
    let cap = cfg.max_tuples.unwrap_or(usize::MAX);
    let order = preference_order(n, &cfg.preferred, &mut rng);
    match &cfg.method {
        FamilyMethod::Greedy => {
            let mut scan = targets.clone();
            scan.shuffle(&mut rng);
            let mut used = VertexMask::new(n);
            for target in scan {
                if fam.tuples.len() >= cap {
                    break;
                }
                if target.iter().any(|&w| used.contains(w) && w != target[0]) {
                    continue;
                }
                let mut have = fam.absorbing_count(h, target);
                while have < cfg.quota && fam.tuples.len() < cap {
                    let Some(t) = search_tuples(h, target, cfg.d, 1, &order, &used).pop() else { break };
                    for v in t.vertices() {
                        used.insert(v);
                    }
                    fam.tuples.push(t);
                    have += 1;
                }
            }
        }
        FamilyMethod::Sampling { probability, max_candidates } => {
            let mut pool: Vec<AbsorbingTuple> = Vec::new();
            let mut seen = std::collections::HashSet::new();
            let empty = VertexMask::new(n);
            for &target in &targets {
                if pool.len() >= *max_candidates {
                    break;
                }
                for t in search_tuples(h, target, cfg.d, max_candidates - pool.len(), &order, &empty) {
                    let mut key = [t.stars[0].clone(), t.stars[1].clone()];
                    key.sort_by_key(|s| s.center);
                    if seen.insert(key) {
                        pool.push(t);
                    }
                }
            }
            let kept: Vec<AbsorbingTuple> = pool.into_iter().filter(|_| rng.gen::<f64>() < *probability).collect();
            let sets: Vec<Vec<Vertex>> = kept.iter().map(|t| t.vertices()).collect();
            let clash = |i: usize| (0..kept.len()).any(|j| j != i && sets[i].iter().any(|v| sets[j].contains(v)));
            fam.tuples = (0..kept.len()).filter(|&i| !clash(i)).map(|i| kept[i].clone()).take(cap).collect();
        }
    }
    fam.reindex(h, &targets);
    fam
}

/// Whether tree vertex `x := φ⁻¹(center)` exists and each tree edge at `x`
/// is mapped onto a star edge.
pub fn star_is_covered(star: &Star, phi: &PartialEmbedding, t: &LooseTree) -> bool {
    let Some(x) = phi.preimage(star.center) else { return false };
    let mut used = vec![false; star.d()];
    for &e in t.graph().incident_edges(x) {
        let imgs = t.edge(e).map(|v| phi.get(v));
        let mut rest: Vec<Vertex> = match imgs {
            [Some(a), Some(b), Some(c)] => [a, b, c].into_iter().filter(|&w| w != star.center).collect(),
            _ => return false,
        };
        rest.sort_unstable();
        let hit = star.pairs.iter().enumerate().find(|(i, p)| {
            let mut q = **p;
            q.sort_unstable();
            !used[*i] && rest == q
        });
        match hit {
            Some((i, _)) => used[i] = true,
            None => return false,
        }
    }
    true
}

/// Both stars of `tuple` are covered by `phi`.
pub fn is_covered(tuple: &AbsorbingTuple, phi: &PartialEmbedding, t: &LooseTree) -> bool {
    tuple.stars.iter().all(|s| star_is_covered(s, phi, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoosePath2 {
    pub a: Vertex,
    pub b: Vertex,
    pub c: Vertex,
}

impl LoosePath2 {
    /// `e = {y, a, b}` and `f = {z, c, b}`.
    pub fn edges(&self, y: Vertex, z: Vertex) -> [[Vertex; 3]; 2] {
        [[y, self.a, self.b], [z, self.c, self.b]]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectError {
    #[error("endpoints must be distinct and not forbidden")]
    BadEndpoints,
    #[error("no loose path of length 2 joins {y} and {z}")]
    NoPath { y: Vertex, z: Vertex },
}

/// First `b`, then `a`, then `c` in label order with `{y,a,b}` and `{z,c,b}`
/// edges, `a ≠ c`, all three outside `forbidden`.
pub fn connect_path_len2(h: &Hypergraph3, y: Vertex, z: Vertex, forbidden: &VertexMask) -> Result<LoosePath2, ConnectError> {
    let order: Vec<Vertex> = (0..h.n()).collect();
    connect_path_len2_ordered(h, y, z, forbidden, &order)
}

/// As [`connect_path_len2`] with candidates scanned in `order`.
pub fn connect_path_len2_ordered(
    h: &Hypergraph3,
    y: Vertex,
    z: Vertex,
    forbidden: &VertexMask,
    order: &[Vertex],
) -> Result<LoosePath2, ConnectError> {
    if y == z || y >= h.n() || z >= h.n() || forbidden.contains(y) || forbidden.contains(z) {
        return Err(ConnectError::BadEndpoints);
    }
    let mut rank = vec![usize::MAX; h.n()];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let free = |v: Vertex| v != y && v != z && !forbidden.contains(v);
    for &b in order {
        if !free(b) {
            continue;
        }
        let mut a_side: Vec<Vertex> = h.pair_neighbors(y, b).into_iter().filter(|&a| free(a)).collect();
        if a_side.is_empty() {
            continue;
        }
        let mut c_side: Vec<Vertex> = h.pair_neighbors(z, b).into_iter().filter(|&c| free(c)).collect();
        a_side.sort_unstable_by_key(|&v| rank[v]);
        c_side.sort_unstable_by_key(|&v| rank[v]);
        for &a in &a_side {
            if let Some(&c) = c_side.iter().find(|&&c| c != a) {
                return Ok(LoosePath2 { a, b, c });
            }
        }
    }
    Err(ConnectError::NoPath { y, z })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverOptions {
    /// Tree vertices allowed to sit on a star centre; defaults to every
    /// non-root vertex. A centre must also have degree at most `d`.
    pub allowed_centers: Option<Vec<bool>>,
    /// Require `v(T) >= (#stars)·(2Δ+4)` before starting.
    pub enforce_counting_bound: bool,
    /// Host vertices that must stay unused.
    pub avoid: Vec<Vertex>,
    /// `None` scans in label order; otherwise the scan order and the greedy
    /// extension are randomised with this seed.
    pub seed: Option<u64>,
    /// Host vertices tried first by every scan and by the greedy extension.
    pub preferred: Vec<Vertex>,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self { allowed_centers: None, enforce_counting_bound: true, avoid: Vec::new(), seed: None, preferred: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveredStar {
    pub tuple: usize,
    pub side: usize,
    pub tree_vertex: Vertex,
    /// Length of the loose path used to reach the centre (0 for the first star).
    pub distance: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Covering {
    pub embedding: PartialEmbedding,
    pub centers: Vec<CoveredStar>,
    /// Stars reached over a path longer than 3 because no allowed centre sat
    /// at distance exactly 3.
    pub long_paths: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("tree has {n} vertices, the counting bound needs {need}")]
    BelowCountingBound { n: usize, need: usize },
    #[error("no unused tree vertex of degree <= {d} can take star {star}")]
    NoCentre { star: usize, d: usize },
    #[error("star {star}: {source}")]
    Connect { star: usize, source: ConnectError },
    #[error("greedy extension found no host pair for tree edge {edge}")]
    Stuck { edge: usize },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

struct Cover<'a> {
    h: &'a Hypergraph3,
    t: &'a LooseTree,
    phi: PartialEmbedding,
    mapped_edge: Vec<bool>,
    blocked: VertexMask,
    order: Vec<Vertex>,
    preferred: VertexMask,
    rng: Option<Rng>,
}

impl Cover<'_> {
    fn free(&self, v: Vertex) -> bool {
        !self.phi.is_used(v) && !self.blocked.contains(v)
    }

    fn map_edge(&mut self, e: usize, assign: &[(Vertex, Vertex)]) -> Result<(), CoverError> {
        for &(x, w) in assign {
            if self.phi.get(x).is_none() {
                self.phi.insert(x, w)?;
            }
        }
        self.mapped_edge[e] = true;
        Ok(())
    }

    /// Maps the edges at `x` onto the star, `first` (if given) onto pair 0 in
    /// the stated vertex order.
    fn place_star(&mut self, x: Vertex, star: &Star, first: Option<(usize, [Vertex; 2])>) -> Result<(), CoverError> {
        self.phi.insert(x, star.center)?;
        let mut next = 0;
        if let Some((e, [p, q])) = first {
            self.map_edge(e, &[(p, star.pairs[0][0]), (q, star.pairs[0][1])])?;
            next = 1;
        }
        for &e in self.t.graph().incident_edges(x) {
            if self.mapped_edge[e] {
                continue;
            }
            let others: Vec<Vertex> = self.t.edge(e).into_iter().filter(|&v| v != x).collect();
            let [a, b] = star.pairs[next];
            self.map_edge(e, &[(others[0], a), (others[1], b)])?;
            next += 1;
        }
        Ok(())
    }

    /// Loose-path BFS from the mapped vertices through unmapped edges:
    /// for each vertex, its distance and the (edge, entry vertex) it was reached by.
    fn distances(&self) -> (Vec<usize>, Vec<Option<(usize, Vertex)>>) {
        let n = self.t.n();
        let mut dist = vec![usize::MAX; n];
        let mut via = vec![None; n];
        let mut queue = VecDeque::new();
        for x in 0..n {
            if self.phi.get(x).is_some() {
                dist[x] = 0;
                queue.push_back(x);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &e in self.t.graph().incident_edges(u) {
                if self.mapped_edge[e] {
                    continue;
                }
                for v in self.t.edge(e) {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        via[v] = Some((e, u));
                        queue.push_back(v);
                    }
                }
            }
        }
        (dist, via)
    }

    /// Maps one unmapped edge hanging at mapped vertex `p` onto a free host pair.
    fn extend_edge(&mut self, e: usize, p: Vertex) -> Result<(), CoverError> {
        let w = self.phi.get(p).expect("attach vertex is mapped");
        let others: Vec<Vertex> = self.t.edge(e).into_iter().filter(|&v| v != p).collect();
        let mut cands: Vec<[Vertex; 2]> = Vec::new();
        for &a in &self.order {
            if !self.free(a) || a == w {
                continue;
            }
            for b in self.h.pair_neighbors(w, a) {
                if b > a && self.free(b) {
                    cands.push([a, b]);
                    if self.rng.is_none() && self.preferred.is_empty() {
                        break;
                    }
                }
            }
            if self.rng.is_none() && self.preferred.is_empty() && !cands.is_empty() {
                break;
            }
        }
        // Pairs with fewer non-preferred vertices come first.
        let tier = |p: &[Vertex; 2]| p.iter().filter(|&&v| !self.preferred.contains(v)).count();
        let best = cands.iter().map(tier).min().unwrap_or(0);
        cands.retain(|p| tier(p) == best);
        let pick = match self.rng.as_mut() {
            Some(r) => cands.choose(r).copied(),
            None => cands.first().copied(),
        };
        let [a, b] = pick.ok_or(CoverError::Stuck { edge: e })?;
        self.map_edge(e, &[(others[0], a), (others[1], b)])
    }

    fn extend_all(&mut self) -> Result<(), CoverError> {
        let mut queue: VecDeque<Vertex> = (0..self.t.n()).filter(|&x| self.phi.get(x).is_some()).collect();
        while let Some(u) = queue.pop_front() {
            for &e in self.t.graph().incident_edges(u) {
                if self.mapped_edge[e] {
                    continue;
                }
                self.extend_edge(e, u)?;
                queue.extend(self.t.edge(e).into_iter().filter(|&v| v != u));
            }
        }
        Ok(())
    }
}

/// Embedding of `t` covering every tuple of `f` with default options.
pub fn covering_embedding(h: &Hypergraph3, t: &LooseTree, f: &AbsorberFamily) -> Result<Covering, CoverError> {
    covering_embedding_with(h, t, f, &CoverOptions::default())
}

/// Seeds with the first star on an allowed tree vertex, then repeatedly takes
/// an allowed vertex at loose distance 3 from the embedded part, maps its
/// edges onto the next star and routes the first two path edges through a
/// loose path of length 2 in the host. Finally every remaining edge is
/// embedded greedily in breadth-first order.
pub fn covering_embedding_with(h: &Hypergraph3, t: &LooseTree, f: &AbsorberFamily, opts: &CoverOptions) -> Result<Covering, CoverError> {
    let stars: Vec<(usize, usize, &Star)> =
        f.tuples.iter().enumerate().flat_map(|(i, tu)| tu.stars.iter().enumerate().map(move |(s, st)| (i, s, st))).collect();
    let need = stars.len() * (2 * t.max_degree() + 4);
    if opts.enforce_counting_bound && t.n() < need {
        return Err(CoverError::BelowCountingBound { n: t.n(), need });
    }
    let mut rng = opts.seed.map(seeded);
    let order = match rng.as_mut() {
        Some(r) => preference_order(h.n(), &opts.preferred, r),
        None => {
            let pref = VertexMask::from_vertices(h.n(), opts.preferred.iter().copied());
            let (mut head, tail): (Vec<Vertex>, Vec<Vertex>) = (0..h.n()).partition(|&v| pref.contains(v));
            head.extend(tail);
            head
        }
    };
    let mut blocked = VertexMask::from_vertices(h.n(), opts.avoid.iter().copied());
    for (_, _, s) in &stars {
        for v in s.vertices() {
            blocked.insert(v);
        }
    }
    let mut c = Cover {
        h,
        t,
        phi: PartialEmbedding::new(t.n(), h.n()),
        mapped_edge: vec![false; t.edge_count()],
        blocked,
        order,
        preferred: VertexMask::from_vertices(h.n(), opts.preferred.iter().copied()),
        rng,
    };
    let allowed = |x: Vertex, d: usize| {
        opts.allowed_centers.as_ref().map_or(x != t.root(), |a| a.get(x).copied().unwrap_or(false)) && t.degree(x) <= d
    };
    let mut centers = Vec::new();
    let mut long_paths = 0;
    for (k, &(ti, side, star)) in stars.iter().enumerate() {
        if k == 0 {
            for v in star.vertices() {
                c.blocked.remove(v);
            }
            let x = (0..t.n()).find(|&x| allowed(x, star.d())).ok_or(CoverError::NoCentre { star: k, d: star.d() })?;
            c.place_star(x, star, None)?;
            centers.push(CoveredStar { tuple: ti, side, tree_vertex: x, distance: 0 });
            continue;
        }
        let (dist, via) = c.distances();
        let pick = |exact: bool| {
            (0..t.n())
                .filter(|&x| c.phi.get(x).is_none() && dist[x] != usize::MAX && allowed(x, star.d()))
                .filter(|&x| if exact { dist[x] == 3 } else { dist[x] > 3 })
                .min_by_key(|&x| (dist[x], x))
        };
        let x = match pick(true) {
            Some(x) => x,
            None => {
                long_paths += 1;
                pick(false).ok_or(CoverError::NoCentre { star: k, d: star.d() })?
            }
        };
        // Path back to the embedded part: edges listed from x inwards.
        let mut path = Vec::new();
        let mut cur = x;
        while dist[cur] > 0 {
            let (e, from) = via[cur].expect("reached vertices have a predecessor");
            path.push((e, from));
            cur = from;
        }
        path.reverse();
        let len = path.len();
        // Walk greedily until three edges remain.
        for &(e, from) in &path[..len - 3] {
            c.extend_edge(e, from)?;
        }
        for v in star.vertices() {
            c.blocked.remove(v);
        }
        let (e1, v1) = path[len - 3];
        let (e2, v3) = path[len - 2];
        let (e3, v5) = path[len - 1];
        let third = |e: usize, a: Vertex, b: Vertex| t.edge(e).into_iter().find(|&v| v != a && v != b).unwrap();
        let v2 = third(e1, v1, v3);
        let v4 = third(e2, v3, v5);
        let v6 = third(e3, v5, x);
        c.place_star(x, star, Some((e3, [v5, v6])))?;
        let y = c.phi.get(v1).unwrap();
        let z = c.phi.get(v5).unwrap();
        let mut forbidden = c.blocked.clone();
        for (_, w) in c.phi.pairs() {
            if w != y && w != z {
                forbidden.insert(w);
            }
        }
        let p = connect_path_len2_ordered(h, y, z, &forbidden, &c.order).map_err(|source| CoverError::Connect { star: k, source })?;
        c.map_edge(e1, &[(v2, p.a), (v3, p.b)])?;
        c.map_edge(e2, &[(v4, p.c)])?;
        centers.push(CoveredStar { tuple: ti, side, tree_vertex: x, distance: len });
    }
    if stars.is_empty() {
        let roots: Vec<Vertex> = c.order.iter().copied().filter(|&v| c.free(v)).collect();
        let mut last = CoverError::Stuck { edge: 0 };
        for w in roots {
            let mut attempt = Cover { phi: PartialEmbedding::new(t.n(), h.n()), mapped_edge: vec![false; t.edge_count()], ..c.clone_parts() };
            attempt.phi.insert(t.root(), w)?;
            match attempt.extend_all() {
                Ok(()) => return Ok(Covering { embedding: attempt.phi, centers, long_paths }),
                Err(e) => last = e,
            }
        }
        return Err(last);
    }
    c.extend_all()?;
    c.phi.verify(t.graph(), h)?;
    Ok(Covering { embedding: c.phi, centers, long_paths })
}

impl<'a> Cover<'a> {
    fn clone_parts(&self) -> Cover<'a> {
        Cover {
            h: self.h,
            t: self.t,
            phi: self.phi.clone(),
            mapped_edge: self.mapped_edge.clone(),
            blocked: self.blocked.clone(),
            order: self.order.clone(),
            preferred: self.preferred.clone(),
            rng: self.rng.clone(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbsorbError {
    #[error("tree edge {0} is not a next edge: it needs exactly one mapped vertex, its attach vertex")]
    NotNextEdge(usize),
    #[error("host vertex {0} is not an unused vertex")]
    NotUnused(Vertex),
    #[error("tuple does not absorb {target:?}: {violation}")]
    NotAbsorbing { target: [Vertex; 3], violation: TupleViolation },
    /// Carries the family index when one applies.
    #[error("tuple {0:?} is not covered by the embedding")]
    NotCovered(Option<usize>),
    #[error("host has {host} vertices but the tree has {tree}")]
    SizeMismatch { tree: usize, host: usize },
    #[error("the embedded part is not a subtree of the tree")]
    NotASubtree,
    #[error("{0} host vertices left over; they are absorbed two at a time")]
    OddResidual(usize),
    #[error("tuple {0} was already consumed")]
    Reused(usize),
    #[error("no unconsumed tuple absorbs {triple:?} (consumed so far: {consumed:?})")]
    Exhausted { triple: [Vertex; 3], consumed: Vec<usize> },
    #[error("adaptive search gave up after {0} nodes")]
    BudgetExhausted(u64),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// The next edge `e = {z1, z2, z3}`: `z1` mapped, the other two not.
fn next_edge_parts(phi: &PartialEmbedding, t: &LooseTree, e: usize) -> Option<(Vertex, [Vertex; 2])> {
    let vs = t.edge(e);
    let mapped: Vec<Vertex> = vs.iter().copied().filter(|&v| phi.get(v).is_some()).collect();
    if mapped.len() != 1 {
        return None;
    }
    let z1 = mapped[0];
    let rest: Vec<Vertex> = vs.into_iter().filter(|&v| v != z1).collect();
    Some((z1, [rest[0], rest[1]]))
}

/// One swap: the preimages of the star centres `v2, v3` move to `w2, w3`
/// (`x_pair`), and the new edge's two unmapped vertices take `v2, v3`.
/// The result is re-verified in full.
pub fn absorb_step(
    h: &Hypergraph3,
    phi: &PartialEmbedding,
    t: &LooseTree,
    edge: usize,
    tuple: &AbsorbingTuple,
    x_pair: [Vertex; 2],
) -> Result<PartialEmbedding, AbsorbError> {
    let (z1, [z2, z3]) = next_edge_parts(phi, t, edge).ok_or(AbsorbError::NotNextEdge(edge))?;
    for x in x_pair {
        if x >= h.n() || phi.is_used(x) {
            return Err(AbsorbError::NotUnused(x));
        }
    }
    let target = [phi.get(z1).unwrap(), x_pair[0], x_pair[1]];
    let oriented = AbsorbingTuple { target, stars: tuple.stars.clone() };
    validate_tuple(h, &oriented).map_err(|violation| AbsorbError::NotAbsorbing { target, violation })?;
    if !is_covered(&oriented, phi, t) {
        return Err(AbsorbError::NotCovered(None));
    }
    let [v2, v3] = [tuple.stars[0].center, tuple.stars[1].center];
    let p2 = phi.preimage(v2).unwrap();
    let p3 = phi.preimage(v3).unwrap();
    let mut next = phi.clone();
    next.remove(p2);
    next.remove(p3);
    next.insert(p2, x_pair[0])?;
    next.insert(p3, x_pair[1])?;
    next.insert(z2, v2)?;
    next.insert(z3, v3)?;
    next.verify(t.graph(), h)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingPolicy {
    /// Unused host vertices in label order, next edges in tree order, first
    /// unconsumed tuple that fits.
    Fixed,
    /// Backtracking search over next edge, tuple, orientation and the pair of
    /// unused vertices, trying the most constrained unused vertex first.
    #[default]
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbRecord {
    pub edge: usize,
    pub tuple: usize,
    pub target: [Vertex; 3],
    /// `(tree vertex, old image, new image)` for the two moved centres.
    pub moved: [(Vertex, Vertex, Vertex); 2],
    /// Images given to the new edge's two vertices.
    pub placed: [(Vertex, Vertex); 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub embedding: Vec<Vertex>,
    pub steps: Vec<AbsorbRecord>,
    /// Family indices in the order they were used; each index counts for the
    /// tuple and its mirror image.
    pub consumed: Vec<usize>,
    pub nodes: u64,
}

pub const ADAPTIVE_BUDGET: u64 = 200_000;

struct Completer<'a> {
    h: &'a Hypergraph3,
    t: &'a LooseTree,
    f: &'a AbsorberFamily,
    nodes: u64,
    budget: u64,
}

struct Option_ {
    edge: usize,
    tuple: usize,
    stars: [Star; 2],
    pair: [Vertex; 2],
}

impl Completer<'_> {
    fn frontier(&self, phi: &PartialEmbedding) -> Vec<usize> {
        self.t.ordering().iter().copied().filter(|&e| next_edge_parts(phi, self.t, e).is_some()).collect()
    }

    fn apply(&self, phi: &PartialEmbedding, o: &Option_, steps: &mut Vec<AbsorbRecord>) -> Result<PartialEmbedding, AbsorbError> {
        let tuple = AbsorbingTuple { target: [0; 3], stars: o.stars.clone() };
        let (z1, [z2, z3]) = next_edge_parts(phi, self.t, o.edge).unwrap();
        let next = absorb_step(self.h, phi, self.t, o.edge, &tuple, o.pair)?;
        let [v2, v3] = [o.stars[0].center, o.stars[1].center];
        let (p2, p3) = (phi.preimage(v2).unwrap(), phi.preimage(v3).unwrap());
        steps.push(AbsorbRecord {
            edge: o.edge,
            tuple: o.tuple,
            target: [phi.get(z1).unwrap(), o.pair[0], o.pair[1]],
            moved: [(p2, v2, o.pair[0]), (p3, v3, o.pair[1])],
            placed: [(z2, v2), (z3, v3)],
        });
        Ok(next)
    }

    fn options(&self, phi: &PartialEmbedding, consumed: &[bool], free: &[Vertex]) -> Vec<Option_> {
        let mut out = Vec::new();
        for e in self.frontier(phi) {
            let (z1, _) = next_edge_parts(phi, self.t, e).unwrap();
            let w1 = phi.get(z1).unwrap();
            for (k, tu) in self.f.tuples.iter().enumerate() {
                if consumed[k] || tu.vertices().contains(&w1) {
                    continue;
                }
                let [s2, s3] = &tu.stars;
                for [a, b] in [[s2, s3], [s3, s2]] {
                    if !self.h.has_edge(w1, a.center, b.center) {
                        continue;
                    }
                    let fits = |s: &Star, x: Vertex| s.pairs.iter().all(|&[p, q]| self.h.has_edge(x, p, q));
                    for &x2 in free.iter().filter(|&&x| fits(a, x)) {
                        for &x3 in free.iter().filter(|&&x| x != x2 && fits(b, x)) {
                            out.push(Option_ { edge: e, tuple: k, stars: [a.clone(), b.clone()], pair: [x2, x3] });
                        }
                    }
                }
            }
        }
        out
    }

    fn search(
        &mut self,
        phi: PartialEmbedding,
        consumed: &mut Vec<bool>,
        free: &mut Vec<Vertex>,
        steps: &mut Vec<AbsorbRecord>,
    ) -> Result<Option<PartialEmbedding>, AbsorbError> {
        if free.is_empty() {
            return Ok(Some(phi));
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(AbsorbError::BudgetExhausted(self.budget));
        }
        let opts = self.options(&phi, consumed, free);
        let count = |x: Vertex| opts.iter().filter(|o| o.pair.contains(&x)).count();
        // Vertices with no option yet may gain one once the frontier moves.
        let Some(hardest) = free.iter().copied().filter(|&x| count(x) > 0).min_by_key(|&x| (count(x), x)) else {
            return Ok(None);
        };
        // Options for the hardest vertex first; the rest keep the search
        // complete, since that vertex may only become absorbable later.
        let (first, rest): (Vec<&Option_>, Vec<&Option_>) = opts.iter().partition(|o| o.pair.contains(&hardest));
        for o in first.into_iter().chain(rest) {
            let next = self.apply(&phi, o, steps)?;
            consumed[o.tuple] = true;
            let saved = free.clone();
            free.retain(|x| !o.pair.contains(x));
            if let Some(done) = self.search(next, consumed, free, steps)? {
                return Ok(Some(done));
            }
            *free = saved;
            consumed[o.tuple] = false;
            steps.pop();
        }
        Ok(None)
    }
}

/// Absorbs every unused host vertex, two per step, extending `phi0` to the
/// whole of `t` (which must span the host).
pub fn complete_embedding(
    h: &Hypergraph3,
    phi0: &PartialEmbedding,
    t: &LooseTree,
    f: &AbsorberFamily,
    policy: PairingPolicy,
) -> Result<Completion, AbsorbError> {
    complete_embedding_with_budget(h, phi0, t, f, policy, ADAPTIVE_BUDGET)
}

pub fn complete_embedding_with_budget(
    h: &Hypergraph3,
    phi0: &PartialEmbedding,
    t: &LooseTree,
    f: &AbsorberFamily,
    policy: PairingPolicy,
    budget: u64,
) -> Result<Completion, AbsorbError> {
    if h.n() != t.n() || phi0.tree_n() != t.n() || phi0.host_n() != h.n() {
        return Err(AbsorbError::SizeMismatch { tree: t.n(), host: h.n() });
    }
    phi0.verify(t.graph(), h)?;
    let full_edges = t.graph().edges().iter().filter(|e| e.iter().all(|&v| phi0.get(v).is_some())).count();
    let partial = t.graph().edges().iter().any(|e| e.iter().filter(|&&v| phi0.get(v).is_some()).count() == 2);
    if phi0.is_empty() || partial || 2 * full_edges + 1 != phi0.len() {
        return Err(AbsorbError::NotASubtree);
    }
    let residual = h.n() - phi0.len();
    if residual % 2 == 1 {
        return Err(AbsorbError::OddResidual(residual));
    }
    if let Some(k) = f.tuples.iter().position(|tu| !is_covered(tu, phi0, t)) {
        return Err(AbsorbError::NotCovered(Some(k)));
    }
    let mut c = Completer { h, t, f, nodes: 0, budget };
    let mut consumed = vec![false; f.tuples.len()];
    let mut free: Vec<Vertex> = phi0.unused_host_vertices().collect();
    let mut steps = Vec::new();
    let phi = match policy {
        PairingPolicy::Fixed => {
            let mut phi = phi0.clone();
            while free.len() >= 2 {
                c.nodes += 1;
                let e = *c.frontier(&phi).first().ok_or(AbsorbError::NotASubtree)?;
                let (z1, _) = next_edge_parts(&phi, t, e).unwrap();
                let triple = [phi.get(z1).unwrap(), free[0], free[1]];
                let found = f.tuples.iter().enumerate().find_map(|(k, tu)| {
                    if consumed[k] {
                        return None;
                    }
                    tu.retarget(h, triple).map(|o| (k, o))
                });
                let Some((k, oriented)) = found else {
                    let used = steps.iter().map(|s: &AbsorbRecord| s.tuple).collect();
                    return Err(AbsorbError::Exhausted { triple, consumed: used });
                };
                let o = Option_ { edge: e, tuple: k, stars: oriented.stars, pair: [free[0], free[1]] };
                phi = c.apply(&phi, &o, &mut steps)?;
                consumed[k] = true;
                free.drain(..2);
            }
            phi
        }
        PairingPolicy::Adaptive => match c.search(phi0.clone(), &mut consumed, &mut free, &mut steps)? {
            Some(phi) => phi,
            None => {
                let e = c.frontier(phi0).first().copied().unwrap_or(0);
                let w1 = next_edge_parts(phi0, t, e).and_then(|(z1, _)| phi0.get(z1)).unwrap_or(0);
                let all_free: Vec<Vertex> = phi0.unused_host_vertices().collect();
                return Err(AbsorbError::Exhausted { triple: [w1, all_free[0], all_free[1]], consumed: Vec::new() });
            }
        },
    };
    let consumed_list = steps.iter().map(|s| s.tuple).collect();
    Ok(Completion { embedding: phi.to_total().expect("every vertex absorbed"), steps, consumed: consumed_list, nodes: c.nodes })
}

/// A small host with a partial embedding of a spanning tree and two planted
/// tuples, enough for the unused vertices to be absorbed in two steps.
#[derive(Clone, Debug)]
pub struct MinimalInstance {
    pub host: Hypergraph3,
    pub tree: LooseTree,
    pub phi0: PartialEmbedding,
    pub family: AbsorberFamily,
}

pub const MINIMAL_N: usize = 31;

/// Builds a minimal instance: a random tree on [`MINIMAL_N`] vertices, a
/// random injection of its first `n - 4` vertices' worth of edges, a sparse
/// random host containing those images, and two tuples whose centres are
/// images of tree leaves with the edges they need planted.
pub fn minimal_instance(seed: u64) -> MinimalInstance {
    for attempt in 0.. {
        if let Some(inst) = try_minimal(derive_seed(seed, attempt)) {
            return inst;
        }
    }
    unreachable!()
}

fn try_minimal(seed: u64) -> Option<MinimalInstance> {
    let n = MINIMAL_N;
    let mut rng = seeded(seed);
    let tree = random_loose_tree(n, 3, rng.gen()).ok()?;
    let prefix = (n - 5) / 2;
    let ord = tree.ordering();
    let mut in_t0 = vec![false; n];
    for &e in &ord[..prefix] {
        for v in tree.edge(e) {
            in_t0[v] = true;
        }
    }
    let mut images: Vec<Vertex> = (0..n).collect();
    images.shuffle(&mut rng);
    let mut phi = PartialEmbedding::new(n, n);
    for x in (0..n).filter(|&x| in_t0[x]) {
        phi.insert(x, images[x]).ok()?;
    }
    let img = |x: Vertex| images[x];
    let z1a = tree.attach_vertex(ord[prefix]);
    let z1b = tree.attach_vertex(ord[prefix + 1]);
    // Leaves of T whose only edge lies in T0, usable as centres.
    let mut leaves: Vec<(Vertex, usize)> = (0..n)
        .filter(|&x| in_t0[x] && tree.degree(x) == 1 && x != tree.root())
        .map(|x| (x, tree.graph().incident_edges(x)[0]))
        .filter(|&(_, e)| !tree.edge(e).contains(&z1a) && !tree.edge(e).contains(&z1b))
        .collect();
    leaves.shuffle(&mut rng);
    let mut chosen: Vec<(Vertex, usize)> = Vec::new();
    for (x, e) in leaves {
        if chosen.iter().all(|&(_, f)| tree.edge(f).iter().all(|v| !tree.edge(e).contains(v))) {
            chosen.push((x, e));
        }
        if chosen.len() == 4 {
            break;
        }
    }
    if chosen.len() < 4 {
        return None;
    }
    let star = |(x, e): (Vertex, usize)| {
        let rest: Vec<Vertex> = tree.edge(e).into_iter().filter(|&v| v != x).map(img).collect();
        Star { center: img(x), pairs: vec![[rest[0], rest[1]]] }
    };
    let stars: Vec<Star> = chosen.iter().map(|&c| star(c)).collect();
    let mut free: Vec<Vertex> = (0..n).filter(|&v| !phi.is_used(v)).collect();
    free.sort_unstable();
    let w1a = img(z1a);
    // Second step's attach vertex is either already in T0 or a child of the first new edge.
    let [c1, c2] = tree.children_of_edge(ord[prefix]);
    let w1b = if z1b == c1 {
        stars[0].center
    } else if z1b == c2 {
        stars[1].center
    } else {
        img(z1b)
    };
    let t1 = AbsorbingTuple { target: [w1a, free[0], free[1]], stars: [stars[0].clone(), stars[1].clone()] };
    let t2 = AbsorbingTuple { target: [w1b, free[2], free[3]], stars: [stars[2].clone(), stars[3].clone()] };
    if t1.vertices().contains(&w1a) || t2.vertices().contains(&w1b) {
        return None;
    }
    let mut edges: Vec<[Vertex; 3]> = ord[..prefix].iter().map(|&e| tree.edge(e).map(img)).collect();
    for tu in [&t1, &t2] {
        let [w1, w2, w3] = tu.target;
        edges.push([w1, tu.stars[0].center, tu.stars[1].center]);
        edges.push([w2, tu.stars[0].pairs[0][0], tu.stars[0].pairs[0][1]]);
        edges.push([w3, tu.stars[1].pairs[0][0], tu.stars[1].pairs[0][1]]);
    }
    let mut sorted: Vec<[Vertex; 3]> = edges.iter().map(|&e| crate::hypergraph::sort_edge(e)).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let planted = sorted.clone();
    let host = Hypergraph3::from_predicate(n, |a, b, c| planted.binary_search(&[a, b, c]).is_ok() || rng.gen::<f64>() < 0.3);
    let mut family = AbsorberFamily { d: 1, quota: 1, tuples: vec![t1.clone(), t2.clone()], index: Vec::new(), shortfalls: Vec::new() };
    family.reindex(&host, &[t1.target, t2.target]);
    if !family.is_valid(&host) || !family.tuples.iter().all(|tu| is_covered(tu, &phi, &tree)) {
        return None;
    }
    Some(MinimalInstance { host, tree, phi0: phi, family })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::pm_free_host;
    use crate::loose_tree::loose_path;
    use crate::verify_embedding;
    use proptest::prelude::*;

    fn brute_force_count(h: &Hypergraph3, target: [Vertex; 3]) -> usize {
        let n = h.n();
        let [w1, w2, w3] = target;
        let mut count = 0;
        let pairs: Vec<[Vertex; 2]> = (0..n).flat_map(|a| (a + 1..n).map(move |b| [a, b])).collect();
        for v2 in 0..n {
            for v3 in 0..n {
                for p in &pairs {
                    for q in &pairs {
                        let t = AbsorbingTuple {
                            target,
                            stars: [Star { center: v2, pairs: vec![*p] }, Star { center: v3, pairs: vec![*q] }],
                        };
                        if [v2, v3].iter().all(|v| ![w1, w2, w3].contains(v)) && validate_tuple(h, &t).is_ok() {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn tuple_counts_match_brute_force() {
        let k11 = Hypergraph3::complete(11);
        let found = find_absorbing_tuples(&k11, [0, 1, 2], 1, usize::MAX);
        assert_eq!(found.len(), 5040);
        assert_eq!(brute_force_count(&k11, [0, 1, 2]), 5040);
        let mut rng = seeded(3);
        let sparse = Hypergraph3::from_predicate(9, |_, _, _| rng.gen::<f64>() < 0.6);
        for target in [[0, 1, 2], [4, 8, 3], [7, 2, 5]] {
            let found = find_absorbing_tuples(&sparse, target, 1, usize::MAX);
            assert_eq!(found.len(), brute_force_count(&sparse, target));
            assert!(found.iter().all(|t| validate_tuple(&sparse, t).is_ok()));
        }
        assert!(find_absorbing_tuples(&Hypergraph3::empty(11), [0, 1, 2], 1, 10).is_empty());
    }

    #[test]
    fn tuples_in_pm_free_host_validate() {
        let h = pm_free_host(12).unwrap().graph;
        let found = find_absorbing_tuples(&h, [0, 5, 9], 1, 200);
        assert!(!found.is_empty());
        assert!(found.iter().all(|t| validate_tuple(&h, t).is_ok()));
        let d2 = find_absorbing_tuples(&h, [3, 5, 9], 2, 20);
        assert!(d2.iter().all(|t| validate_tuple(&h, t).is_ok() && t.d() == 2));
    }

    #[test]
    fn validator_catches_each_violation() {
        let k = Hypergraph3::complete(9);
        let good = find_absorbing_tuples(&k, [0, 1, 2], 1, 1).pop().unwrap();
        assert_eq!(validate_tuple(&k, &good), Ok(()));
        let mut bad = good.clone();
        bad.target = [0, 0, 2];
        assert_eq!(validate_tuple(&k, &bad), Err(TupleViolation::TargetRepeated));
        let mut bad = good.clone();
        bad.stars[1].pairs[0][0] = bad.stars[0].center;
        assert!(validate_tuple(&k, &bad).is_err());
        let mut bad = good.clone();
        bad.target[0] = bad.stars[0].pairs[0][1];
        assert!(matches!(validate_tuple(&k, &bad), Err(TupleViolation::TargetInStar(_))));
        let [w1, _, _] = good.target;
        let holed = Hypergraph3::from_predicate(9, |a, b, c| {
            let e = [a, b, c];
            !(e.contains(&w1) && e.contains(&good.stars[0].center) && e.contains(&good.stars[1].center))
        });
        assert_eq!(validate_tuple(&holed, &good), Err(TupleViolation::MissingCentreEdge));
    }

    #[test]
    fn greedy_family_on_complete_host() {
        let k = Hypergraph3::complete(15);
        let f = build_absorber_family(&k, 1, 1, 4);
        assert!(f.is_valid(&k));
        assert!(f.shortfalls.is_empty());
        assert!(f.index.iter().all(|c| c.count >= 1));
        assert!(!f.index.is_empty());
        assert!(build_absorber_family(&k, 1, 0, 4).tuples.is_empty());
    }

    #[test]
    fn low_degree_vertex_gives_shortfalls() {
        // Vertex 0 lies only in edges with vertex 1.
        let h = Hypergraph3::from_predicate(12, |a, b, _| a != 0 || b == 1);
        let f = build_absorber_family(&h, 1, 1, 2);
        assert!(f.is_valid(&h));
        assert!(f.shortfalls.iter().any(|c| c.target[1] == 0 || c.target[2] == 0));
    }

    #[test]
    fn sampling_family_is_disjoint() {
        let k = Hypergraph3::complete(12);
        let cfg = FamilyConfig {
            method: FamilyMethod::Sampling { probability: 0.002, max_candidates: 20_000 },
            scope: TargetScope::Sampled(20),
            ..FamilyConfig::new(1, 1, 5)
        };
        let f = build_absorber_family_with(&k, &cfg);
        assert!(f.is_valid(&k));
    }

    #[test]
    fn connection_paths() {
        let k = Hypergraph3::complete(8);
        let none = VertexMask::new(8);
        assert_eq!(connect_path_len2(&k, 0, 1, &none).unwrap(), LoosePath2 { a: 3, b: 2, c: 4 });
        // Only b = 5 touches both y = 0 and z = 1.
        let h = Hypergraph3::new(8, [[0, 2, 5], [1, 3, 5], [0, 4, 6]]).unwrap();
        let p = connect_path_len2(&h, 0, 1, &none).unwrap();
        assert_eq!(p, LoosePath2 { a: 2, b: 5, c: 3 });
        for [a, b, c] in p.edges(0, 1) {
            assert!(h.has_edge(a, b, c));
        }
        let most = VertexMask::from_vertices(8, 4..8);
        let p = connect_path_len2(&k, 0, 1, &most);
        assert_eq!(p, Err(ConnectError::NoPath { y: 0, z: 1 }));
        assert_eq!(connect_path_len2(&k, 0, 0, &none), Err(ConnectError::BadEndpoints));
    }

    /// Unfolds coverage star-edge by star-edge instead of tree-edge by tree-edge.
    fn covered_by_definition(s: &Star, phi: &PartialEmbedding, t: &LooseTree) -> bool {
        let Some(x) = (0..t.n()).find(|&x| phi.get(x) == Some(s.center)) else { return false };
        let at_x: Vec<[Vertex; 3]> = t.graph().edges().iter().filter(|e| e.contains(&x)).copied().collect();
        let hits = s
            .pairs
            .iter()
            .filter(|&&[a, b]| {
                at_x.iter().any(|e| {
                    let img: Vec<Option<Vertex>> = e.iter().map(|&v| phi.get(v)).collect();
                    img.contains(&Some(a)) && img.contains(&Some(b)) && img.contains(&Some(s.center))
                })
            })
            .count();
        hits == at_x.len() && at_x.iter().all(|e| e.iter().all(|&v| phi.get(v).is_some()))
    }

    #[test]
    fn covering_on_complete_host() {
        let k = Hypergraph3::complete(40);
        let f = AbsorberFamily { tuples: find_absorbing_tuples(&k, [0, 1, 2], 1, 1), ..AbsorberFamily::empty(1) };
        let t = loose_path(31).unwrap();
        let cov = covering_embedding(&k, &t, &f).unwrap();
        assert!(cov.embedding.is_total());
        assert!(f.tuples.iter().all(|tu| is_covered(tu, &cov.embedding, &t)));
        assert!(verify_embedding(&cov.embedding.to_total().unwrap(), t.graph(), &k));
        assert_eq!(cov.centers[1].distance, 3);

        let empty = covering_embedding(&k, &t, &AbsorberFamily::empty(1)).unwrap();
        assert!(empty.embedding.is_total());
        let tiny = loose_path(7).unwrap();
        assert!(matches!(covering_embedding(&k, &tiny, &f), Err(CoverError::BelowCountingBound { .. })));
    }

    #[test]
    fn covering_many_stars_with_seeded_scan() {
        let mut rng = seeded(8);
        let h = Hypergraph3::from_predicate(100, |_, _, _| rng.gen::<f64>() < 0.8);
        let cfg = FamilyConfig { scope: TargetScope::Sampled(10), max_tuples: Some(3), ..FamilyConfig::new(1, 3, 1) };
        let f = build_absorber_family_with(&h, &cfg);
        assert_eq!(f.tuples.len(), 3);
        let t = random_loose_tree(81, 3, 2).unwrap();
        let opts = CoverOptions { seed: Some(5), ..CoverOptions::default() };
        let cov = covering_embedding_with(&h, &t, &f, &opts).unwrap();
        assert!(f.tuples.iter().all(|tu| is_covered(tu, &cov.embedding, &t)));
        for (k, tu) in f.tuples.iter().enumerate() {
            for s in &tu.stars {
                assert!(covered_by_definition(s, &cov.embedding, &t), "tuple {k}");
            }
        }
        cov.embedding.verify(t.graph(), &h).unwrap();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn coverage_agrees_with_unfolded_definition(seed in 0u64..5000) {
            let inst = minimal_instance(seed);
            let mut rng = seeded(seed);
            let mut phi = inst.phi0.clone();
            // Randomly drop a mapped vertex now and then to exercise the negative side.
            if rng.gen_bool(0.5) {
                let mapped: Vec<Vertex> = phi.pairs().map(|(x, _)| x).collect();
                phi.remove(*mapped.choose(&mut rng).unwrap());
            }
            for tu in &inst.family.tuples {
                for s in &tu.stars {
                    prop_assert_eq!(star_is_covered(s, &phi, &inst.tree), covered_by_definition(s, &phi, &inst.tree));
                }
            }
        }
    }

    #[test]
    fn absorb_steps_on_minimal_instance() {
        let inst = minimal_instance(1);
        let (h, t) = (&inst.host, &inst.tree);
        let t1 = &inst.family.tuples[0];
        let e = t.ordering()[(MINIMAL_N - 5) / 2];
        let x = [t1.target[1], t1.target[2]];
        let phi2 = absorb_step(h, &inst.phi0, t, e, t1, x).unwrap();
        assert_eq!(phi2.len(), inst.phi0.len() + 2);
        phi2.verify(t.graph(), h).unwrap();
        let t2 = &inst.family.tuples[1];
        let e2 = t.ordering()[(MINIMAL_N - 5) / 2 + 1];
        let phi4 = absorb_step(h, &phi2, t, e2, t2, [t2.target[1], t2.target[2]]).unwrap();
        assert!(phi4.is_total());
        assert!(verify_embedding(&phi4.to_total().unwrap(), t.graph(), h));
        // Re-using the first tuple is impossible: its centres are no longer covered.
        assert!(absorb_step(h, &phi2, t, e2, t1, [t2.target[1], t2.target[2]]).is_err());
    }

    #[test]
    fn uncovered_tuple_is_rejected() {
        let inst = minimal_instance(2);
        let mut phi = inst.phi0.clone();
        let t1 = &inst.family.tuples[0];
        let centre_pre = phi.preimage(t1.stars[0].center).unwrap();
        phi.remove(centre_pre);
        let e = inst.tree.ordering()[(MINIMAL_N - 5) / 2];
        let r = absorb_step(&inst.host, &phi, &inst.tree, e, t1, [t1.target[1], t1.target[2]]);
        assert!(matches!(r, Err(AbsorbError::NotCovered(None))));
    }

    #[test]
    fn completion_policies() {
        for seed in 0..20 {
            let inst = minimal_instance(seed);
            for policy in [PairingPolicy::Fixed, PairingPolicy::Adaptive] {
                let c = complete_embedding(&inst.host, &inst.phi0, &inst.tree, &inst.family, policy)
                    .unwrap_or_else(|e| panic!("seed {seed} {policy:?}: {e:?}"));
                assert!(verify_embedding(&c.embedding, inst.tree.graph(), &inst.host));
                assert_eq!(c.steps.len(), 2);
                let mut used = c.consumed.clone();
                used.sort_unstable();
                used.dedup();
                assert_eq!(used.len(), c.consumed.len());
            }
        }
    }

    #[test]
    fn completion_edge_cases() {
        let inst = minimal_instance(7);
        let none = AbsorberFamily::empty(1);
        let r = complete_embedding(&inst.host, &inst.phi0, &inst.tree, &none, PairingPolicy::Fixed);
        assert!(matches!(r, Err(AbsorbError::Exhausted { .. })));
        let k = Hypergraph3::complete(9);
        let t = loose_path(9).unwrap();
        let phi = PartialEmbedding::from_total(&(0..9).collect::<Vec<_>>(), 9).unwrap();
        let c = complete_embedding(&k, &phi, &t, &none, PairingPolicy::Fixed).unwrap();
        assert_eq!(c.embedding, (0..9).collect::<Vec<_>>());
        assert!(c.steps.is_empty());
    }
}
