//! Spanning embedding in three stages: cover the absorbers with a subtree,
//! embed most of the rest inside regular triples, absorb what is left.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::almost::{almost_embed, AlmostParams, AlmostStats};
use super::exact::{EmbedResult, EmbedStats, EmbedStatus};
use crate::absorbing::{
    build_absorber_family_with, complete_embedding_with_budget, covering_embedding_with, is_covered, CoverOptions, FamilyConfig,
    PairingPolicy, TargetScope,
};
use crate::assignment::every_third_matching;
use crate::embedding::{verify_embedding, PartialEmbedding};
use crate::hypergraph::{Hypergraph3, Vertex};
use crate::loose_tree::{descendant_edges, induced_subtree, remove_leaf_edges, LooseTree};
use crate::regularity::{find_tight_hamilton_cycle, reduced_graph, Partition};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams<S = Rational> {
    /// Absorbing tuples to build and cover.
    pub absorbers: usize,
    /// Star size `d` of each tuple.
    pub star_d: usize,
    /// Host vertices left for absorption (even): twice the number of leaf
    /// edges removed before the almost-embedding.
    pub residual: usize,
    /// The covered subtree has at least `ν·n` vertices.
    pub nu: S,
    /// Reduced-graph density threshold and falsifier effort.
    pub alpha: S,
    pub eps: S,
    pub samples: usize,
    pub almost: AlmostParams<S>,
    pub policy: PairingPolicy,
    pub absorb_budget: u64,
    /// Require `v(T_x) >= (#stars)·(2Δ+4)` before covering.
    pub counting_bound: bool,
    /// Let the absorbers and the covering use exceptional vertices and the
    /// clusters outside the cycle's matching first.
    pub prefer_spare: bool,
    pub seed: u64,
}

impl<S: Scalar> PipelineParams<S> {
    /// Sizes tuned for planted hosts with `t = 7` clusters of about 40.
    pub fn desk(n: usize, seed: u64) -> Self {
        let residual = (2 * (n / 56)).max(2);
        Self {
            absorbers: residual / 2 + 1,
            star_d: 1,
            residual,
            nu: S::from_ratio(1, 2),
            alpha: S::from_ratio(1, 4),
            eps: S::from_ratio(1, 5),
            samples: 20,
            almost: AlmostParams::desk(10, derive_seed(seed, 3)),
            policy: PairingPolicy::Adaptive,
            absorb_budget: crate::absorbing::ADAPTIVE_BUDGET,
            counting_bound: false,
            prefer_spare: true,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Precondition,
    ReducedGraph,
    Family,
    Subtree,
    Covering,
    AlmostEmbed,
    Combine,
    Absorb,
    Verify,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub reduced_graph_ms: f64,
    pub family_ms: f64,
    pub covering_ms: f64,
    pub almost_ms: f64,
    pub absorb_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub t: usize,
    pub cycle: Option<Vec<usize>>,
    pub reduced_triples: usize,
    pub spare_vertices: usize,
    pub absorbers: usize,
    pub absorber_shortfalls: usize,
    pub subtree_root: Option<Vertex>,
    pub subtree_size: usize,
    pub covering_long_paths: usize,
    pub root_image: Option<Vertex>,
    pub almost_tree_size: usize,
    pub almost: Option<AlmostStats>,
    pub residual: usize,
    pub absorb_steps: usize,
    pub absorb_nodes: u64,
    pub timing: StageTimings,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{stage:?} stage failed: {detail}")]
pub struct PipelineError {
    pub stage: Stage,
    pub detail: String,
    /// Everything recorded up to the failure.
    pub report: Box<PipelineReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub result: EmbedResult,
    pub report: PipelineReport,
}

/// Vertex whose subtree is the first one found, descending from the root
/// towards the largest child, with at least `threshold` vertices while every
/// child subtree is smaller.
pub fn heavy_subtree_root(t: &LooseTree, threshold: usize) -> Vertex {
    let size = t.subtree_sizes();
    let mut x = t.root();
    loop {
        let heavy = t
            .child_edges(x)
            .iter()
            .flat_map(|&e| t.children_of_edge(e))
            .filter(|&y| size[y] >= threshold)
            .max_by_key(|&y| (size[y], std::cmp::Reverse(y)));
        match heavy {
            Some(y) => x = y,
            None => return x,
        }
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Embeds the spanning tree `tree` into `host`, whose vertices are split by
/// `partition` into clusters (the planted or otherwise known regular
/// partition) and an exceptional set.
pub fn pipeline<S: Scalar>(
    tree: &LooseTree,
    host: &Hypergraph3,
    partition: &Partition,
    params: &PipelineParams<S>,
) -> Result<PipelineOutcome, PipelineError> {
    let started = Instant::now();
    let mut report = PipelineReport::default();
    macro_rules! fail {
        ($stage:expr, $($arg:tt)*) => {
            return Err(PipelineError { stage: $stage, detail: format!($($arg)*), report: Box::new(report) })
        };
    }
    let n = host.n();
    if tree.n() != n || n % 2 == 0 {
        fail!(Stage::Precondition, "tree has {} vertices, host {n}; both must agree and be odd", tree.n());
    }
    if params.residual % 2 == 1 || params.residual >= n {
        fail!(Stage::Precondition, "residual {} must be even and below n", params.residual);
    }
    if let Err(e) = partition.validate(n) {
        fail!(Stage::Precondition, "{e}");
    }
    let mut part = partition.clone();
    if part.t() % 3 == 0 {
        let last = part.clusters.pop().unwrap_or_default();
        part.exceptional.extend(last);
    }
    let t = part.t();
    report.t = t;

    let clock = Instant::now();
    let mut reduced = match reduced_graph(host, &part, &params.eps, &params.alpha, params.samples, derive_seed(params.seed, 1)) {
        Ok(r) => r,
        Err(e) => fail!(Stage::ReducedGraph, "{e}"),
    };
    report.reduced_triples = reduced.triples.len();
    reduced.cycle = match find_tight_hamilton_cycle(&reduced) {
        Ok(Some(c)) => Some(c),
        Ok(None) => fail!(Stage::ReducedGraph, "no tight Hamilton cycle among {} dense triples", reduced.triples.len()),
        Err(e) => fail!(Stage::ReducedGraph, "{e}"),
    };
    report.cycle = reduced.cycle.clone();
    report.timing.reduced_graph_ms = ms(clock);
    let cycle = reduced.cycle.clone().unwrap();
    let matched = 3 * every_third_matching(t).len();
    let mut spare: Vec<Vertex> = part.exceptional.clone();
    for &c in &cycle[matched..] {
        spare.extend(&part.clusters[c]);
    }
    spare.sort_unstable();
    report.spare_vertices = spare.len();
    let preferred = if params.prefer_spare { spare } else { Vec::new() };

    let clock = Instant::now();
    let cfg = FamilyConfig {
        scope: TargetScope::Sampled(4 * params.absorbers.max(1)),
        max_tuples: Some(params.absorbers),
        preferred: preferred.clone(),
        ..FamilyConfig::new(params.star_d, params.absorbers, derive_seed(params.seed, 2))
    };
    let family = build_absorber_family_with(host, &cfg);
    report.absorbers = family.tuples.len();
    report.absorber_shortfalls = family.shortfalls.len();
    report.timing.family_ms = ms(clock);
    if family.tuples.len() < params.residual / 2 {
        fail!(Stage::Family, "{} absorbing tuples for {} absorption steps", family.tuples.len(), params.residual / 2);
    }

    let threshold = params.nu.ceil_mul(n).max(1);
    let mut x = heavy_subtree_root(tree, threshold);
    // Rooted at a leaf, the descent always leaves the root.
    let rerooted;
    let tree = if x == tree.root() && n > 1 {
        let leaf = (0..n).find(|&v| tree.degree(v) == 1).expect("a tree with an edge has a leaf");
        rerooted = match tree.rerooted(leaf) {
            Ok(r) => r,
            Err(e) => fail!(Stage::Subtree, "{e}"),
        };
        x = heavy_subtree_root(&rerooted, threshold);
        &rerooted
    } else {
        tree
    };
    report.subtree_root = Some(x);
    if x == tree.root() {
        fail!(Stage::Subtree, "descent stopped at the root; no proper subtree with at least {threshold} vertices");
    }
    let below = descendant_edges(tree, x);
    let tx = match induced_subtree(tree, &below, x) {
        Ok(s) => s,
        Err(e) => fail!(Stage::Subtree, "{e}"),
    };
    report.subtree_size = tx.tree.n();

    let clock = Instant::now();
    let opts = CoverOptions {
        enforce_counting_bound: params.counting_bound,
        seed: Some(derive_seed(params.seed, 4)),
        preferred,
        ..CoverOptions::default()
    };
    let cover = match covering_embedding_with(host, &tx.tree, &family, &opts) {
        Ok(c) => c,
        Err(e) => fail!(Stage::Covering, "{e}"),
    };
    report.covering_long_paths = cover.long_paths;
    report.timing.covering_ms = ms(clock);
    if let Err(e) = cover.embedding.verify(tx.tree.graph(), host) {
        fail!(Stage::Covering, "covering embedding does not verify: {e}");
    }
    if !family.tuples.iter().all(|tu| is_covered(tu, &cover.embedding, &tx.tree)) {
        fail!(Stage::Covering, "a tuple is left uncovered");
    }
    let z = cover.embedding.get(tx.tree.root()).expect("covering is total");
    report.root_image = Some(z);

    let rest: Vec<usize> = {
        let mut inside = vec![false; tree.edge_count()];
        for &e in &below {
            inside[e] = true;
        }
        (0..tree.edge_count()).filter(|&e| !inside[e]).collect()
    };
    let t_prime = match induced_subtree(tree, &rest, x) {
        Ok(s) => s,
        Err(e) => fail!(Stage::Subtree, "{e}"),
    };
    let t_second = match remove_leaf_edges(&t_prime.tree, params.residual / 2) {
        Ok(s) => s,
        Err(e) => fail!(Stage::Subtree, "{e}"),
    };
    report.almost_tree_size = t_second.tree.n();
    report.residual = params.residual;

    let used: Vec<bool> = {
        let mut u = vec![false; n];
        for (_, w) in cover.embedding.pairs() {
            u[w] = w != z;
        }
        u
    };
    let remaining = Partition {
        clusters: part.clusters.iter().map(|c| c.iter().copied().filter(|&v| !used[v]).collect()).collect(),
        exceptional: part.exceptional.iter().copied().filter(|&v| !used[v]).collect(),
    };
    let clock = Instant::now();
    let almost = match almost_embed(host, &remaining, &reduced, &t_second.tree, z, &params.almost) {
        Ok(a) => a,
        Err(e) => fail!(Stage::AlmostEmbed, "{e}"),
    };
    report.timing.almost_ms = ms(clock);
    report.almost = Some(almost.stats.clone());

    let mut phi0 = PartialEmbedding::new(n, n);
    let to_tree = |v: Vertex| t_prime.vertex_map[t_second.vertex_map[v]];
    let pieces = cover
        .embedding
        .pairs()
        .map(|(v, w)| (tx.vertex_map[v], w))
        .chain(almost.embedding.pairs().map(|(v, w)| (to_tree(v), w)).filter(|&(v, _)| v != x));
    for (v, w) in pieces {
        if let Err(e) = phi0.insert(v, w) {
            fail!(Stage::Combine, "{e}");
        }
    }
    if let Err(e) = phi0.verify(tree.graph(), host) {
        fail!(Stage::Combine, "{e}");
    }

    let clock = Instant::now();
    let done = match complete_embedding_with_budget(host, &phi0, tree, &family, params.policy, params.absorb_budget) {
        Ok(c) => c,
        Err(e) => fail!(Stage::Absorb, "{e}"),
    };
    report.timing.absorb_ms = ms(clock);
    report.absorb_steps = done.steps.len();
    report.absorb_nodes = done.nodes;
    if !verify_embedding(&done.embedding, tree.graph(), host) {
        fail!(Stage::Verify, "final map is not an embedding");
    }
    let result = EmbedResult {
        status: EmbedStatus::Found,
        embedding: Some(done.embedding),
        stats: EmbedStats { nodes: done.nodes, elapsed_ms: ms(started) },
    };
    Ok(PipelineOutcome { result, report })
}
