//! Desk-scale regularity tools: expansion tests, a sampling falsifier for
//! ε-regularity, planted partitions, reduced graphs, tight Hamilton cycles and
//! the expanding-edge selection used while embedding inside regular triples.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use num_traits::Signed;
use thiserror::Error;

use crate::hypergraph::{GraphError, Hypergraph3, Vertex, VertexMask, VertexSetTriple};
use crate::rng::seeded;
use crate::scalar::{at_least, Scalar};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegularityError {
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("exact tight-cycle search is capped at t = {cap}, got {t}")]
    TooLarge { t: usize, cap: usize },
    #[error("x = {0} is not d/8-expanding into its two partner sets")]
    NotExpanding(Vertex),
    #[error("no candidate survived the {stage} filter")]
    NoCandidate { stage: &'static str },
    #[error("positions (j, k, l) = {0:?} must be a permutation of 2, 3, 4")]
    BadPositions([usize; 3]),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Equal-sized clusters plus an exceptional set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub clusters: Vec<Vec<Vertex>>,
    pub exceptional: Vec<Vertex>,
}

impl Partition {
    /// Checks sizes, disjointness and that every vertex of `0..n` is covered.
    pub fn validate(&self, n: usize) -> Result<(), RegularityError> {
        let m = self.clusters.first().map_or(0, Vec::len);
        if self.clusters.iter().any(|c| c.len() != m) {
            return Err(RegularityError::BadPartition("clusters differ in size".into()));
        }
        let mut seen = vec![false; n];
        for &v in self.clusters.iter().flatten().chain(&self.exceptional) {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(RegularityError::BadPartition(format!("vertex {v} repeated or out of range")));
            }
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(RegularityError::BadPartition(format!("vertex {v} not covered")));
        }
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.clusters.len()
    }

    /// `t` clusters of `⌊n/t⌋` consecutive labels; the remainder is exceptional.
    pub fn equal_split(n: usize, t: usize) -> Self {
        let m = if t == 0 { 0 } else { n / t };
        Self { clusters: (0..t).map(|i| (i * m..(i + 1) * m).collect()).collect(), exceptional: (t * m..n).collect() }
    }

    pub fn cluster_size(&self) -> usize {
        self.clusters.first().map_or(0, Vec::len)
    }

    /// `cluster_of[v]`, with `None` for exceptional vertices.
    pub fn cluster_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in c {
                out[v] = Some(i);
            }
        }
        out
    }
}

/// `deg(v; X, Y) >= d·|X|·|Y|`.
pub fn is_expanding<S: Scalar>(h: &Hypergraph3, v: Vertex, x: &[Vertex], y: &[Vertex], d: &S) -> Result<bool, GraphError> {
    let pairs = h.deg_pairs(v, x, y)?;
    Ok(at_least(pairs, d, x.len() * y.len()))
}

/// Same as [`is_expanding`] with `y` given as a mask and no overlap checks.
fn expands_into<S: Scalar>(h: &Hypergraph3, v: Vertex, x: &[Vertex], y: &VertexMask, y_len: usize, d: &S) -> bool {
    let pairs: usize = x.iter().filter(|&&a| a != v).map(|&a| h.codegree_into(v, a, y)).sum();
    at_least(pairs, d, x.len() * y_len)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityWitness {
    pub subsets: [Vec<Vertex>; 3],
    pub subset_density: Rational,
    pub full_density: Rational,
}

fn abs_diff<S: Scalar>(a: Rational, b: Rational) -> S {
    let diff = (a - b).abs();
    S::from_ratio(*diff.numer() as u64, *diff.denom() as u64)
}

/// Samples subsets `X_i ⊆ V_i` of size `⌈ε|V_i|⌉` and returns the first whose
/// density is more than `ε` away from `d(V_1, V_2, V_3)`. `None` is evidence
/// of regularity, not proof.
pub fn regularity_falsify<S: Scalar>(
    h: &Hypergraph3,
    sets: [&[Vertex]; 3],
    eps: &S,
    samples: usize,
    seed: u64,
) -> Result<Option<RegularityWitness>, GraphError> {
    let full = VertexSetTriple::new(sets[0].to_vec(), sets[1].to_vec(), sets[2].to_vec());
    let full_density = h.density(&full)?;
    let mut rng = seeded(seed);
    for _ in 0..samples {
        let subsets = sets.map(|s| {
            let k = eps.ceil_mul(s.len()).clamp(1, s.len());
            let mut picked: Vec<Vertex> = sample(&mut rng, s.len(), k).into_iter().map(|i| s[i]).collect();
            picked.sort_unstable();
            picked
        });
        let t = VertexSetTriple::new(subsets[0].clone(), subsets[1].clone(), subsets[2].clone());
        let d = h.density(&t)?;
        if abs_diff::<S>(d, full_density) > *eps {
            return Ok(Some(RegularityWitness { subsets, subset_density: d, full_density }));
        }
    }
    Ok(None)
}

/// Probability of keeping a crossing triple between three distinct clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DensityMap {
    Uniform(f64),
    /// `dense` on cyclically consecutive cluster triples `{i, i+1, i+2}`,
    /// `sparse` on all other cluster triples.
    Consecutive { dense: f64, sparse: f64 },
    Listed { triples: Vec<([usize; 3], f64)>, default: f64 },
}

impl DensityMap {
    pub fn probability(&self, t: usize, triple: [usize; 3]) -> f64 {
        let mut s = triple;
        s.sort_unstable();
        match self {
            DensityMap::Uniform(p) => *p,
            DensityMap::Consecutive { dense, sparse } => {
                if is_consecutive(t, s) {
                    *dense
                } else {
                    *sparse
                }
            }
            DensityMap::Listed { triples, default } => triples
                .iter()
                .find(|(tr, _)| {
                    let mut k = *tr;
                    k.sort_unstable();
                    k == s
                })
                .map_or(*default, |(_, p)| *p),
        }
    }
}

/// Whether sorted `s` is `{a, a+1, a+2}` modulo `t` for some `a`.
pub fn is_consecutive(t: usize, s: [usize; 3]) -> bool {
    (0..t).any(|a| {
        let mut c = [a, (a + 1) % t, (a + 2) % t];
        c.sort_unstable();
        c == s
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub t: usize,
    pub m: usize,
    pub exceptional: usize,
    pub densities: DensityMap,
    /// Probability for every triple that is not spread over three clusters
    /// (two vertices in one cluster, or touching the exceptional set).
    pub noise: f64,
}

/// Host with `t` clusters of `m` vertices (`V_i = i·m .. (i+1)·m`) followed by
/// `exceptional` extra vertices, each triple kept independently.
pub fn synthetic_regular_host(spec: &PlantedSpec, seed: u64) -> Result<(Hypergraph3, Partition), RegularityError> {
    if spec.t < 3 || spec.m == 0 {
        return Err(RegularityError::BadPartition(format!("need t >= 3 and m >= 1, got t={} m={}", spec.t, spec.m)));
    }
    let (t, m) = (spec.t, spec.m);
    let n = t * m + spec.exceptional;
    let cluster = |v: usize| if v < t * m { Some(v / m) } else { None };
    let mut probs = vec![0.0; t * t * t];
    for i in 0..t {
        for j in 0..t {
            for k in 0..t {
                if i != j && j != k && i != k {
                    probs[(i * t + j) * t + k] = spec.densities.probability(t, [i, j, k]);
                }
            }
        }
    }
    let mut rng = seeded(seed);
    let h = Hypergraph3::from_predicate(n, |a, b, c| {
        let p = match (cluster(a), cluster(b), cluster(c)) {
            (Some(i), Some(j), Some(k)) if i != j && j != k && i != k => probs[(i * t + j) * t + k],
            _ => spec.noise,
        };
        p >= 1.0 || (p > 0.0 && rng.gen::<f64>() < p)
    });
    let clusters = (0..t).map(|i| (i * m..(i + 1) * m).collect()).collect();
    Ok((h, Partition { clusters, exceptional: (t * m..n).collect() }))
}

/// Cluster-level 3-graph of dense, apparently regular triples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedGraph {
    pub t: usize,
    /// Sorted cluster triples, lexicographic.
    pub triples: Vec<[usize; 3]>,
    pub densities: Vec<Rational>,
    pub cycle: Option<Vec<usize>>,
}

impl ReducedGraph {
    pub fn from_triples(t: usize, triples: impl IntoIterator<Item = [usize; 3]>) -> Self {
        let mut ts: Vec<[usize; 3]> = triples
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        ts.sort_unstable();
        ts.dedup();
        let densities = vec![Rational::from_integer(1); ts.len()];
        Self { t, triples: ts, densities, cycle: None }
    }

    pub fn has(&self, a: usize, b: usize, c: usize) -> bool {
        let mut s = [a, b, c];
        s.sort_unstable();
        self.triples.binary_search(&s).is_ok()
    }

    /// Every cyclically consecutive triple of `cycle` is present and `cycle`
    /// is a permutation of `0..t`.
    pub fn verifies_cycle(&self, cycle: &[usize]) -> bool {
        let t = self.t;
        let mut seen = vec![false; t];
        if cycle.len() != t || cycle.iter().any(|&c| c >= t || std::mem::replace(&mut seen[c], true)) {
            return false;
        }
        (0..t).all(|i| self.has(cycle[i], cycle[(i + 1) % t], cycle[(i + 2) % t]))
    }
}

/// Keeps `{i,j,k}` iff its density is at least `alpha` and the falsifier finds
/// no witness. Each triple gets its own derived seed.
pub fn reduced_graph<S: Scalar>(
    h: &Hypergraph3,
    p: &Partition,
    eps: &S,
    alpha: &S,
    samples: usize,
    seed: u64,
) -> Result<ReducedGraph, RegularityError> {
    p.validate(h.n())?;
    let t = p.t();
    let mut triples = Vec::new();
    let mut densities = Vec::new();
    let mut index = 0;
    for i in 0..t {
        for j in i + 1..t {
            for k in j + 1..t {
                index += 1;
                let sets = [p.clusters[i].as_slice(), p.clusters[j].as_slice(), p.clusters[k].as_slice()];
                let d = h.density(&VertexSetTriple::new(sets[0].to_vec(), sets[1].to_vec(), sets[2].to_vec()))?;
                if S::from_ratio(*d.numer() as u64, *d.denom() as u64) < *alpha {
                    continue;
                }
                let sub_seed = crate::rng::derive_seed(seed, index);
                if regularity_falsify(h, sets, eps, samples, sub_seed)?.is_none() {
                    triples.push([i, j, k]);
                    densities.push(d);
                }
            }
        }
    }
    Ok(ReducedGraph { t, triples, densities, cycle: None })
}

pub const TIGHT_CYCLE_CAP: usize = 18;

/// Backtracking search for a tight Hamilton cycle starting at cluster 0.
pub fn find_tight_hamilton_cycle(r: &ReducedGraph) -> Result<Option<Vec<usize>>, RegularityError> {
    let t = r.t;
    if t > TIGHT_CYCLE_CAP {
        return Err(RegularityError::TooLarge { t, cap: TIGHT_CYCLE_CAP });
    }
    if t < 3 {
        return Ok(None);
    }
    let mut adj = vec![false; t * t * t];
    for &[a, b, c] in &r.triples {
        for [x, y, z] in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            adj[(x * t + y) * t + z] = true;
        }
    }
    let edge = |x: usize, y: usize, z: usize| adj[(x * t + y) * t + z];
    fn extend(path: &mut Vec<usize>, used: &mut [bool], t: usize, edge: &dyn Fn(usize, usize, usize) -> bool) -> bool {
        let len = path.len();
        if len == t {
            return edge(path[t - 2], path[t - 1], path[0]) && edge(path[t - 1], path[0], path[1]);
        }
        for v in 0..t {
            if used[v] || (len >= 2 && !edge(path[len - 2], path[len - 1], v)) {
                continue;
            }
            used[v] = true;
            path.push(v);
            if extend(path, used, t, edge) {
                return true;
            }
            path.pop();
            used[v] = false;
        }
        false
    }
    let mut used = vec![false; t];
    used[0] = true;
    let mut path = vec![0];
    Ok(extend(&mut path, &mut used, t, &edge).then_some(path))
}

/// Seven consecutive sets around an edge being embedded, by position `0..7`.
/// `x_sets[p - 2]` is the X-set at position `p ∈ {2, 3, 4}`.
#[derive(Clone, Debug)]
pub struct ExpansionQuery<S> {
    pub x_sets: [Vec<Vertex>; 3],
    pub y_sets: [Vec<Vertex>; 7],
    pub z_sets: [Vec<Vertex>; 7],
    pub d: S,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypicalEdge {
    pub y: Vertex,
    pub z: Vertex,
    /// Size of the averaging set `A` and whether it met `d|X_k|/16`.
    pub a_size: usize,
    pub a_bound_holds: bool,
    /// Candidates for `y` left after the three expansion filters.
    pub y_candidates: usize,
}

/// The three position pairs around `k` that a vertex placed at `k` must expand into.
pub fn expansion_pairs(k: usize) -> [(usize, usize); 3] {
    [(k - 2, k - 1), (k - 1, k + 1), (k + 1, k + 2)]
}

fn masks(n: usize, sets: &[Vec<Vertex>; 7]) -> Vec<VertexMask> {
    sets.iter().map(|s| VertexMask::from_vertices(n, s.iter().copied())).collect()
}

fn expands_around<S: Scalar>(h: &Hypergraph3, v: Vertex, k: usize, sets: &[Vec<Vertex>; 7], m: &[VertexMask], d: &S) -> bool {
    expansion_pairs(k).iter().all(|&(a, b)| expands_into(h, v, &sets[a], &m[b], sets[b].len(), d))
}

/// Picks `y ∈ X_k`, `z ∈ X_l` with `{x,y,z}` an edge and both endpoints
/// `d/4`-expanding around their positions, by the averaging filter: restrict to
/// `A = {y : deg(x,y; X_l) >= d|X_l|/16}`, filter for the three Y-expansions,
/// then look for `z` among the common neighbours of `x` and `y` that satisfy
/// the Z-expansions. Candidates are scanned in ascending label order; if the
/// first `y` admits no `z` the next one is tried.
pub fn select_typical_edge<S: Scalar>(
    h: &Hypergraph3,
    q: &ExpansionQuery<S>,
    x: Vertex,
    [j, k, l]: [usize; 3],
) -> Result<TypicalEdge, RegularityError> {
    let mut pos = [j, k, l];
    pos.sort_unstable();
    if pos != [2, 3, 4] {
        return Err(RegularityError::BadPositions([j, k, l]));
    }
    let n = h.n();
    let (xk, xl) = (&q.x_sets[k - 2], &q.x_sets[l - 2]);
    let d8 = q.d.clone() / S::from_count(8);
    let d16 = q.d.clone() / S::from_count(16);
    let d4 = q.d.clone() / S::from_count(4);
    let xl_mask = VertexMask::from_vertices(n, xl.iter().copied());
    if !expands_into(h, x, xk, &xl_mask, xl.len(), &d8) {
        return Err(RegularityError::NotExpanding(x));
    }
    let mut a: Vec<Vertex> = xk
        .iter()
        .copied()
        .filter(|&y| y != x && at_least(h.codegree_into(x, y, &xl_mask), &d16, xl.len()))
        .collect();
    a.sort_unstable();
    let a_size = a.len();
    let a_bound_holds = at_least(a_size, &d16, xk.len());
    if a.is_empty() {
        return Err(RegularityError::NoCandidate { stage: "averaging" });
    }
    let ym = masks(n, &q.y_sets);
    let zm = masks(n, &q.z_sets);
    let ys: Vec<Vertex> = a.into_iter().filter(|&y| expands_around(h, y, k, &q.y_sets, &ym, &d4)).collect();
    if ys.is_empty() {
        return Err(RegularityError::NoCandidate { stage: "y-expansion" });
    }
    for &y in &ys {
        let mut zs: Vec<Vertex> = h.pair_neighbors(x, y).into_iter().filter(|&z| xl_mask.contains(z)).collect();
        zs.sort_unstable();
        if let Some(z) = zs.into_iter().find(|&z| expands_around(h, z, l, &q.z_sets, &zm, &d4)) {
            return Ok(TypicalEdge { y, z, a_size, a_bound_holds, y_candidates: ys.len() });
        }
    }
    Err(RegularityError::NoCandidate { stage: "z-expansion" })
}

/// Recomputes the postcondition of [`select_typical_edge`] from scratch.
pub fn check_typical_edge<S: Scalar>(
    h: &Hypergraph3,
    q: &ExpansionQuery<S>,
    x: Vertex,
    [_, k, l]: [usize; 3],
    y: Vertex,
    z: Vertex,
) -> Result<bool, GraphError> {
    if !h.has_edge(x, y, z) || !q.x_sets[k - 2].contains(&y) || !q.x_sets[l - 2].contains(&z) {
        return Ok(false);
    }
    let d4 = q.d.clone() / S::from_count(4);
    for (v, p, sets) in [(y, k, &q.y_sets), (z, l, &q.z_sets)] {
        for (a, b) in expansion_pairs(p) {
            let (sa, sb): (Vec<Vertex>, Vec<Vertex>) =
                (sets[a].iter().copied().filter(|&w| w != v).collect(), sets[b].iter().copied().filter(|&w| w != v).collect());
            let pairs = h.deg_pairs(v, &sa, &sb)?;
            if !at_least(pairs, &d4, sets[a].len() * sets[b].len()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;

    type Q = Rational;

    fn planted(t: usize, m: usize, p: f64, seed: u64) -> (Hypergraph3, Partition) {
        let spec = PlantedSpec { t, m, exceptional: 0, densities: DensityMap::Consecutive { dense: p, sparse: 0.0 }, noise: 0.0 };
        synthetic_regular_host(&spec, seed).unwrap()
    }

    #[test]
    fn expansion_on_extremes() {
        let k = Hypergraph3::complete(8);
        assert!(is_expanding(&k, 0, &[1, 2], &[3, 4, 5], &Q::from_integer(1)).unwrap());
        let e = Hypergraph3::empty(8);
        assert!(!is_expanding(&e, 0, &[1, 2], &[3, 4, 5], &Q::new(1, 100)).unwrap());
        assert!(is_expanding(&k, 0, &[0], &[3], &1.0f64).is_err());
    }

    #[test]
    fn expanding_fraction_tracks_planted_density() {
        let (h, p) = planted(3, 30, 0.6, 4);
        let (v0, v1, v2) = (&p.clusters[0], &p.clusters[1], &p.clusters[2]);
        let frac = |d: f64| v0.iter().filter(|&&v| is_expanding(&h, v, v1, v2, &d).unwrap()).count() as f64 / 30.0;
        // Pair-degree of a vertex is Binomial(900, 0.6): sd ≈ 0.016 of 900.
        assert_eq!(frac(0.5), 1.0);
        assert_eq!(frac(0.7), 0.0);
        let mid = frac(0.6);
        assert!((0.1..0.9).contains(&mid), "fraction at the mean was {mid}");
    }

    #[test]
    fn falsifier_behaviour() {
        let (h, p) = planted(3, 30, 0.5, 11);
        let sets = [p.clusters[0].as_slice(), p.clusters[1].as_slice(), p.clusters[2].as_slice()];
        assert_eq!(regularity_falsify(&h, sets, &0.2f64, 500, 1).unwrap(), None);
        // All edges touch the first half of V_1.
        let structured = Hypergraph3::from_predicate(90, |a, b, c| a < 15 && (30..60).contains(&b) && c >= 60);
        let w = regularity_falsify(&structured, sets, &Q::new(1, 10), 200, 2).unwrap();
        assert!(w.is_some());
        let single = Hypergraph3::new(3, [[0, 1, 2]]).unwrap();
        assert_eq!(regularity_falsify(&single, [&[0], &[1], &[2]], &1.0f64, 10, 0).unwrap(), None);
    }

    #[test]
    fn synthetic_extremes() {
        let spec = |p| PlantedSpec { t: 4, m: 3, exceptional: 1, densities: DensityMap::Uniform(p), noise: 0.0 };
        let (full, part) = synthetic_regular_host(&spec(1.0), 0).unwrap();
        assert_eq!(full.edge_count(), 4 * 27);
        part.validate(13).unwrap();
        assert_eq!(synthetic_regular_host(&spec(0.0), 0).unwrap().0.edge_count(), 0);
    }

    #[test]
    fn planted_triples_are_recovered() {
        let (h, p) = planted(7, 30, 0.6, 5);
        let r = reduced_graph(&h, &p, &Q::new(1, 5), &Q::new(3, 10), 50, 9).unwrap();
        let expected: Vec<[usize; 3]> = {
            let mut v: Vec<[usize; 3]> = (0..7)
                .map(|a| {
                    let mut s = [a, (a + 1) % 7, (a + 2) % 7];
                    s.sort_unstable();
                    s
                })
                .collect();
            v.sort_unstable();
            v
        };
        assert_eq!(r.triples, expected);
        let higher = reduced_graph(&h, &p, &Q::new(1, 5), &Q::new(7, 10), 50, 9).unwrap();
        assert!(higher.triples.iter().all(|t| r.triples.contains(t)));
        let cycle = find_tight_hamilton_cycle(&r).unwrap().unwrap();
        assert_eq!(cycle, (0..7).collect::<Vec<_>>());
        assert!(r.verifies_cycle(&cycle));
    }

    #[test]
    fn complete_host_gives_complete_reduced_graph() {
        let (h, p) = planted(4, 5, 1.0, 0);
        let all = Hypergraph3::from_predicate(20, |a, b, c| a / 5 != b / 5 && b / 5 != c / 5 && a / 5 != c / 5);
        assert_eq!(h, all);
        let r = reduced_graph(&h, &p, &0.3f64, &0.9f64, 20, 0).unwrap();
        assert_eq!(r.triples.len(), 4);
    }

    #[test]
    fn irregular_dense_triple_is_dropped() {
        // Clusters of 20; triple (0,1,2) only uses half of cluster 0.
        let h = Hypergraph3::from_predicate(60, |a, b, c| a < 10 && (20..40).contains(&b) && c >= 40);
        let p = Partition { clusters: vec![(0..20).collect(), (20..40).collect(), (40..60).collect()], exceptional: vec![] };
        let r = reduced_graph(&h, &p, &Q::new(1, 10), &Q::new(1, 5), 200, 3).unwrap();
        assert!(r.triples.is_empty());
    }

    #[test]
    fn tight_cycles() {
        let all = ReducedGraph::from_triples(7, (0..7).flat_map(|a| (a + 1..7).flat_map(move |b| (b + 1..7).map(move |c| [a, b, c]))));
        let c = find_tight_hamilton_cycle(&all).unwrap().unwrap();
        assert!(all.verifies_cycle(&c));
        let order = [0, 4, 2, 6, 1, 5, 3, 7];
        let only = ReducedGraph::from_triples(8, (0..8).map(|i| [order[i], order[(i + 1) % 8], order[(i + 2) % 8]]));
        let found = find_tight_hamilton_cycle(&only).unwrap().unwrap();
        assert!(only.verifies_cycle(&found));
        let rotations: Vec<Vec<usize>> = (0..8)
            .flat_map(|s| {
                let fwd: Vec<usize> = (0..8).map(|i| order[(s + i) % 8]).collect();
                let mut back = fwd.clone();
                back.reverse();
                [fwd, back]
            })
            .collect();
        assert!(rotations.contains(&found));
        assert_eq!(find_tight_hamilton_cycle(&ReducedGraph::from_triples(6, [])).unwrap(), None);
        assert!(find_tight_hamilton_cycle(&ReducedGraph::from_triples(19, [])).is_err());
    }

    fn full_query(p: &Partition, d: Q) -> ExpansionQuery<Q> {
        let sets: [Vec<Vertex>; 7] = std::array::from_fn(|i| p.clusters[i].clone());
        ExpansionQuery { x_sets: [sets[2].clone(), sets[3].clone(), sets[4].clone()], y_sets: sets.clone(), z_sets: sets, d }
    }

    #[test]
    fn typical_edge_in_complete_seven_partite_host() {
        let (h, p) = planted(7, 4, 1.0, 0);
        let q = full_query(&p, Q::new(1, 2));
        let x = p.clusters[2][0];
        let e = select_typical_edge(&h, &q, x, [2, 3, 4]).unwrap();
        assert_eq!((e.y, e.z), (p.clusters[3][0], p.clusters[4][0]));
        assert!(check_typical_edge(&h, &q, x, [2, 3, 4], e.y, e.z).unwrap());
    }

    #[test]
    fn typical_edge_errors() {
        let (h, p) = planted(7, 6, 1.0, 0);
        let empty_between = Hypergraph3::from_predicate(42, |a, b, c| {
            h.has_edge(a, b, c) && !(a / 6 == 3 && c / 6 == 4) && !(b / 6 == 3 && c / 6 == 4)
        });
        let q = full_query(&p, Q::new(1, 2));
        let err = select_typical_edge(&empty_between, &q, p.clusters[2][0], [2, 3, 4]).unwrap_err();
        assert_eq!(err, RegularityError::NotExpanding(p.clusters[2][0]));
        assert!(matches!(select_typical_edge(&h, &q, 0, [1, 3, 4]), Err(RegularityError::BadPositions(_))));
    }

    #[test]
    fn typical_edges_on_planted_hosts() {
        let mut rng = seeded(77);
        let (h, p) = planted(7, 40, 0.6, 1);
        let mut ok = 0;
        for _ in 0..20 {
            let pick = |rng: &mut crate::rng::Rng, c: &Vec<Vertex>| {
                let k = rng.gen_range(7..=40);
                let mut s: Vec<Vertex> = c.choose_multiple(rng, k).copied().collect();
                s.sort_unstable();
                s
            };
            let y_sets: [Vec<Vertex>; 7] = std::array::from_fn(|i| pick(&mut rng, &p.clusters[i]));
            let z_sets: [Vec<Vertex>; 7] = std::array::from_fn(|i| pick(&mut rng, &p.clusters[i]));
            let x_sets: [Vec<Vertex>; 3] = std::array::from_fn(|i| pick(&mut rng, &p.clusters[i + 2]));
            let q = ExpansionQuery { x_sets, y_sets, z_sets, d: Q::new(1, 2) };
            let x = q.x_sets[1][0];
            if let Ok(e) = select_typical_edge(&h, &q, x, [3, 2, 4]) {
                assert!(e.a_bound_holds);
                assert!(check_typical_edge(&h, &q, x, [3, 2, 4], e.y, e.z).unwrap());
                ok += 1;
            }
        }
        assert!(ok >= 19);
    }
}
