//! Embedding an almost-spanning tree into the regular triples along a tight
//! Hamilton cycle of the reduced graph, with the root pinned.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{assign_clusters, AssignError, AssignmentProblem, Mode, RootedTree};
use crate::embedding::{EmbeddingError, PartialEmbedding};
use crate::hypergraph::{Hypergraph3, Vertex};
use crate::loose_tree::{decompose, descendant_edges, induced_subtree, LooseTree, TreeError};
use crate::regularity::{check_typical_edge, is_expanding, select_typical_edge, ExpansionQuery, Partition, ReducedGraph, RegularityError};
use crate::rng::seeded;
use crate::scalar::{at_least, Scalar};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostParams<S = Rational> {
    /// Reservoirs take `⌈2√ε·|V_i|⌉` vertices of each cluster.
    pub eps: S,
    pub zeta: S,
    pub nu: S,
    /// Expansion parameter handed to the typical-edge selection (`γ/2`).
    pub d: S,
    /// Density a first-layer cluster pair must reach around the pinned image.
    pub claim_density: S,
    /// Expansion asked of first-layer images into the reservoirs.
    pub first_layer_d: S,
    pub piece_target: usize,
    /// Strict stops at the first failed step; best effort walks down a
    /// ladder of weaker choices and records every rung it used.
    pub mode: Mode,
    pub seed: u64,
}

impl<S: Scalar> AlmostParams<S> {
    /// Values that suit planted hosts with a few dozen vertices per cluster.
    pub fn desk(piece_target: usize, seed: u64) -> Self {
        Self {
            eps: S::from_ratio(1, 100),
            zeta: S::from_ratio(1, 50),
            nu: S::from_ratio(1, 50),
            d: S::from_ratio(1, 25),
            claim_density: S::from_ratio(1, 2),
            first_layer_d: S::from_ratio(1, 4),
            piece_target,
            mode: Mode::BestEffort,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pool {
    Main,
    Reservoir,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstLayerPair {
    pub children: [Vertex; 2],
    pub clusters: [usize; 2],
    pub images: [Vertex; 2],
    /// Whether both images expand into the reservoirs around their clusters.
    pub expanding: bool,
}

/// How an edge was placed. `Typical` is the selection proper; every other
/// rung gives up part of its guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rung {
    Typical,
    /// Same selection with the expansion parameter divided by 4, then 16.
    Relaxed,
    /// Main and reservoir vertices pooled, parameter divided by 16.
    Pooled,
    /// Any edge into the two assigned clusters.
    AnyInClusters,
    /// Any edge on unused vertices of the partition.
    Anywhere,
}

pub const RUNGS: [Rung; 5] = [Rung::Typical, Rung::Relaxed, Rung::Pooled, Rung::AnyInClusters, Rung::Anywhere];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlmostStats {
    pub first_layer: Vec<FirstLayerPair>,
    pub edges: usize,
    /// Edges placed per rung, indexed like [`RUNGS`].
    pub rungs: [usize; 5],
    /// Typical selections whose result failed the independent re-check.
    pub revalidation_failures: usize,
    /// Typical selections where `|A| >= d|X_k|/16` did not hold.
    pub averaging_misses: usize,
    pub edges_off_cycle: usize,
    pub reservoir_sizes: Vec<usize>,
    /// Guarantees the assignment gave up in best-effort mode.
    pub assignment_lost: Vec<String>,
}

impl AlmostStats {
    pub fn fallbacks(&self) -> usize {
        self.rungs[1..].iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostEmbedding {
    pub embedding: PartialEmbedding,
    /// Cluster of every tree vertex other than the root, in cycle order.
    pub clusters: Vec<Option<usize>>,
    pub stats: AlmostStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlmostError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("first layer: {0}")]
    FirstLayer(String),
    #[error("assignment: {0}")]
    Assignment(#[from] AssignError),
    #[error("expansion selection at edge #{position} (parent {parent}): {source}")]
    Expansion { position: usize, parent: Vertex, source: RegularityError },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Unused vertices per cluster (in cycle order), split into main and reservoir.
struct Pools {
    sets: Vec<[Vec<Vertex>; 2]>,
    cluster_of: Vec<Option<usize>>,
    extra: Vec<Vertex>,
}

impl Pools {
    fn get(&self, k: usize, p: Pool) -> &[Vertex] {
        &self.sets[k][p as usize]
    }

    fn both(&self, k: usize) -> Vec<Vertex> {
        let mut v = self.sets[k][0].clone();
        v.extend(&self.sets[k][1]);
        v.sort_unstable();
        v
    }

    fn take(&mut self, v: Vertex) {
        if let Some(k) = self.cluster_of[v] {
            for s in &mut self.sets[k] {
                s.retain(|&w| w != v);
            }
        }
        self.extra.retain(|&w| w != v);
    }

    fn all_unused(&self) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = self.sets.iter().flat_map(|s| s.iter().flatten().copied()).chain(self.extra.iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

fn reservoir_size<S: Scalar>(eps: &S, size: usize) -> usize {
    ((2.0 * eps.to_f64().max(0.0).sqrt() * size as f64).ceil() as usize).min(size)
}

/// Lowest cluster `c` with `{a, b, c'} = {c, c+1, c+2}` modulo `t`.
fn window_start(t: usize, clusters: [usize; 3]) -> Option<usize> {
    (0..t).find(|&c| {
        let mut want = [c, (c + 1) % t, (c + 2) % t];
        let mut got = clusters;
        want.sort_unstable();
        got.sort_unstable();
        want == got
    })
}

/// First-found edge `{x, a, b}` with `a ∈ first`, `b ∈ second`, `a ≠ b`.
fn any_edge(h: &Hypergraph3, x: Vertex, first: &[Vertex], second: &[Vertex]) -> Option<(Vertex, Vertex)> {
    let in_second = crate::hypergraph::VertexMask::from_vertices(h.n(), second.iter().copied());
    first.iter().find_map(|&a| {
        if a == x {
            return None;
        }
        let mut bs = h.pair_neighbors(x, a);
        bs.sort_unstable();
        bs.into_iter().find(|&b| b != a && in_second.contains(b)).map(|b| (a, b))
    })
}

/// Embeds `tree` with its root on `root_pin`, every other vertex inside the
/// clusters of `p`, following the reduced graph's tight Hamilton cycle.
///
/// The root's children are placed by hand on dense cluster pairs, the rest
/// of the tree is assigned to clusters, and edges are then embedded one at a
/// time in piece order, each new pair chosen to expand into the sets around
/// its clusters (reservoir sets for children of piece roots).
pub fn almost_embed<S: Scalar>(
    h: &Hypergraph3,
    p: &Partition,
    r: &ReducedGraph,
    tree: &LooseTree,
    root_pin: Vertex,
    params: &AlmostParams<S>,
) -> Result<AlmostEmbedding, AlmostError> {
    let n = h.n();
    let t = p.t();
    if t < 4 || t % 3 == 0 {
        return Err(AlmostError::Precondition(format!("t = {t} must be at least 4 and not divisible by 3")));
    }
    let cycle = r
        .cycle
        .clone()
        .filter(|c| c.len() == t && r.t == t && r.verifies_cycle(c))
        .ok_or_else(|| AlmostError::Precondition("reduced graph carries no verified tight Hamilton cycle".into()))?;
    if root_pin >= n {
        return Err(AlmostError::Precondition(format!("root image {root_pin} out of range")));
    }
    let mut cluster_of = vec![None; n];
    let mut seen = vec![false; n];
    for &v in p.clusters.iter().flatten().chain(&p.exceptional) {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(AlmostError::Precondition(format!("partition repeats or overruns vertex {v}")));
        }
    }
    let mut rng = seeded(params.seed);
    let mut sets = Vec::with_capacity(t);
    let mut capacities = Vec::with_capacity(t);
    let mut reservoir_sizes = Vec::with_capacity(t);
    for (k, &c) in cycle.iter().enumerate() {
        let mut vs: Vec<Vertex> = p.clusters[c].iter().copied().filter(|&v| v != root_pin).collect();
        for &v in &vs {
            cluster_of[v] = Some(k);
        }
        capacities.push(vs.len());
        vs.shuffle(&mut rng);
        let rs = reservoir_size(&params.eps, vs.len());
        reservoir_sizes.push(rs);
        let mut res = vs.split_off(vs.len() - rs);
        vs.sort_unstable();
        res.sort_unstable();
        sets.push([vs, res]);
    }
    let extra = p.exceptional.iter().copied().filter(|&v| v != root_pin).collect();
    let mut pools = Pools { sets, cluster_of, extra };
    let mut stats = AlmostStats { reservoir_sizes, ..AlmostStats::default() };
    let strict = params.mode == Mode::Strict;

    let root = tree.root();
    let mut phi = PartialEmbedding::new(tree.n(), n);
    phi.insert(root, root_pin)?;
    let mut a: Vec<Option<usize>> = vec![None; tree.n()];

    // First layer: each root edge goes to a dense pair of distinct clusters among 0..=t-3.
    let root_edges = tree.child_edges(root).to_vec();
    let s = 2 * root_edges.len();
    if s > t - 2 {
        return Err(AlmostError::FirstLayer(format!("{s} root children need distinct clusters among the first {}", t - 2)));
    }
    let mut used_cluster = vec![false; t];
    let around = |k: usize| [((k + t - 2) % t, (k + t - 1) % t), ((k + t - 1) % t, (k + 1) % t), ((k + 1) % t, (k + 2) % t)];
    let mut roots = Vec::new();
    for &e in &root_edges {
        let children = tree.children_of_edge(e);
        let mut pairs: Vec<(usize, usize, usize, usize)> = Vec::new();
        for ca in 0..=t - 3 {
            for cb in ca + 1..=t - 3 {
                if used_cluster[ca] || used_cluster[cb] {
                    continue;
                }
                let (sa, sb) = (pools.get(ca, Pool::Main), pools.get(cb, Pool::Main));
                let total = sa.len() * sb.len();
                let deg = h.deg_pairs(root_pin, sa, sb).map_err(|e| AlmostError::FirstLayer(e.to_string()))?;
                if total > 0 && at_least(deg, &params.claim_density, total) {
                    pairs.push((ca, cb, deg, total));
                }
            }
        }
        // Densest pair first.
        pairs.sort_by(|x, y| (y.2 * x.3).cmp(&(x.2 * y.3)).then((x.0, x.1).cmp(&(y.0, y.1))));
        let expands = |v: Vertex, k: usize| {
            around(k).iter().all(|&(i, j)| {
                is_expanding(h, v, pools.get(i, Pool::Reservoir), pools.get(j, Pool::Reservoir), &params.first_layer_d).unwrap_or(false)
            })
        };
        let mut placed = None;
        for &(ca, cb, _, _) in &pairs {
            let good_a: Vec<Vertex> = pools.get(ca, Pool::Main).iter().copied().filter(|&v| expands(v, ca)).collect();
            let good_b: Vec<Vertex> = pools.get(cb, Pool::Main).iter().copied().filter(|&v| expands(v, cb)).collect();
            if let Some((va, vb)) = any_edge(h, root_pin, &good_a, &good_b) {
                placed = Some((ca, cb, va, vb, true));
                break;
            }
        }
        if placed.is_none() && !strict {
            for &(ca, cb, _, _) in &pairs {
                if let Some((va, vb)) = any_edge(h, root_pin, pools.get(ca, Pool::Main), pools.get(cb, Pool::Main)) {
                    placed = Some((ca, cb, va, vb, false));
                    break;
                }
            }
        }
        let (ca, cb, va, vb, expanding) =
            placed.ok_or_else(|| AlmostError::FirstLayer(format!("no dense cluster pair with an edge at {root_pin} for root edge {e}")))?;
        used_cluster[ca] = true;
        used_cluster[cb] = true;
        for (x, v, k) in [(children[0], va, ca), (children[1], vb, cb)] {
            phi.insert(x, v)?;
            pools.take(v);
            a[x] = Some(k);
            roots.push((x, k));
        }
        stats.first_layer.push(FirstLayerPair { children, clusters: [ca, cb], images: [va, vb], expanding });
    }

    // Cluster assignment for the subtrees below the first layer.
    let subs = roots
        .iter()
        .map(|&(x, _)| induced_subtree(tree, &descendant_edges(tree, x), x))
        .collect::<Result<Vec<_>, _>>()?;
    let problem = AssignmentProblem {
        t,
        capacities,
        zeta: params.zeta.clone(),
        nu: params.nu.clone(),
        trees: subs.iter().zip(&roots).map(|(sub, &(_, k))| RootedTree { tree: sub.tree.clone(), root_cluster: k }).collect(),
        max_degree: tree.max_degree().max(1),
        piece_target: params.piece_target,
        mode: params.mode,
    };
    let asg = assign_clusters(&problem)?;
    stats.assignment_lost = asg.lost.clone();

    // Edge order: pieces of each subtree in decomposition order; piece roots are special.
    let mut special = vec![false; tree.n()];
    let mut order: Vec<(Vertex, Vertex, Vertex)> = Vec::new();
    for (j, sub) in subs.iter().enumerate() {
        let map = &sub.vertex_map;
        for (v, &k) in asg.a[j].iter().enumerate() {
            a[map[v]] = Some(k);
        }
        for piece in decompose(&sub.tree, params.piece_target).pieces {
            special[map[piece.root]] = true;
            for &e in &piece.edges {
                let [z, q] = sub.tree.children_of_edge(e);
                order.push((map[sub.tree.attach_vertex(e)], map[z], map[q]));
            }
        }
    }
    let sigma = |v: Vertex| if special[v] { Pool::Reservoir } else { Pool::Main };

    for (position, &(y, z, q)) in order.iter().enumerate() {
        let y_img = phi.get(y).expect("edges come in a valid order");
        let (i, j, l) = (a[y].unwrap(), a[z].unwrap(), a[q].unwrap());
        let tau_y = match tree.parent_vertex(y) {
            Some(p) if special[p] => Pool::Reservoir,
            _ => Pool::Main,
        };
        let start = window_start(t, [i, j, l]);
        let mut placed: Option<(Vertex, Vertex, Rung)> = None;
        let mut first_err = None;
        if let Some(c) = start {
            let pos = |k: usize| 2 + (k + t - c) % t;
            let cl = |g: usize| (c + t + g - 2) % t;
            let query = |d: S, pooled: bool| {
                let pick = |k: usize, pool: Pool| if pooled { pools.both(k) } else { pools.get(k, pool).to_vec() };
                let mut x_sets: [Vec<Vertex>; 3] = Default::default();
                x_sets[pos(i) - 2] = pick(i, tau_y);
                x_sets[pos(j) - 2] = pick(j, sigma(y));
                x_sets[pos(l) - 2] = pick(l, sigma(y));
                ExpansionQuery {
                    x_sets,
                    y_sets: std::array::from_fn(|g| pick(cl(g), sigma(z))),
                    z_sets: std::array::from_fn(|g| pick(cl(g), sigma(q))),
                    d,
                }
            };
            let positions = [pos(i), pos(j), pos(l)];
            let mut tries: Vec<(Rung, S, bool)> = vec![(Rung::Typical, params.d.clone(), false)];
            if !strict {
                let quarter = params.d.clone() / S::from_count(4);
                let sixteenth = params.d.clone() / S::from_count(16);
                tries.push((Rung::Relaxed, quarter, false));
                tries.push((Rung::Relaxed, sixteenth.clone(), false));
                tries.push((Rung::Pooled, sixteenth, true));
            }
            for (rung, d, pooled) in tries {
                let q_ = query(d, pooled);
                match select_typical_edge(h, &q_, y_img, positions) {
                    Ok(te) => {
                        if rung == Rung::Typical {
                            if !check_typical_edge(h, &q_, y_img, positions, te.y, te.z).unwrap_or(false) {
                                stats.revalidation_failures += 1;
                            }
                            if !te.a_bound_holds {
                                stats.averaging_misses += 1;
                            }
                        }
                        placed = Some((te.y, te.z, rung));
                        break;
                    }
                    Err(e) => {
                        first_err.get_or_insert(e);
                    }
                }
            }
        } else {
            stats.edges_off_cycle += 1;
            first_err = Some(RegularityError::NoCandidate { stage: "cycle window" });
        }
        if placed.is_none() && !strict {
            if let Some((zi, qi)) = any_edge(h, y_img, &pools.both(j), &pools.both(l)) {
                placed = Some((zi, qi, Rung::AnyInClusters));
            } else {
                let all = pools.all_unused();
                if let Some((zi, qi)) = any_edge(h, y_img, &all, &all) {
                    placed = Some((zi, qi, Rung::Anywhere));
                }
            }
        }
        let (zi, qi, rung) = placed.ok_or_else(|| AlmostError::Expansion {
            position,
            parent: y,
            source: first_err.unwrap_or(RegularityError::NoCandidate { stage: "fallback" }),
        })?;
        phi.insert(z, zi)?;
        phi.insert(q, qi)?;
        pools.take(zi);
        pools.take(qi);
        stats.rungs[RUNGS.iter().position(|&r| r == rung).unwrap()] += 1;
        stats.edges += 1;
    }
    phi.verify(tree.graph(), h)?;
    Ok(AlmostEmbedding { embedding: phi, clusters: a, stats })
}
