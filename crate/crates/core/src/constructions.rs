//! Extremal host constructions, the 3AP hypertree and its collapse.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{Hypergraph3, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("{name}: n = {n} must satisfy {rule}")]
    BadOrder { name: &'static str, n: usize, rule: &'static str },
    #[error("{name}: parameter {param} = {value} outside [{lo}, {hi}]")]
    OutOfBounds { name: &'static str, param: &'static str, value: usize, lo: usize, hi: usize },
    #[error("exhaustive check limited to n <= {limit}, got {n}")]
    TooLarge { n: usize, limit: usize },
}

/// A host graph together with the vertex split it was built from.
#[derive(Clone, Debug)]
pub struct Construction {
    pub graph: Hypergraph3,
    pub meta: ConstructionMeta,
}

/// Side-car record describing how a host was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionMeta {
    pub construction: String,
    pub params: Vec<(String, usize)>,
    pub a_side: Vec<Vertex>,
    pub b_side: Vec<Vertex>,
}

impl Construction {
    fn split(name: &str, params: &[(&str, usize)], n: usize, a_len: usize, keep: impl Fn(usize) -> bool) -> Self {
        let graph = Hypergraph3::from_predicate(n, |x, y, z| {
            let in_b = [x, y, z].iter().filter(|&&v| v >= a_len).count();
            keep(in_b)
        });
        let meta = ConstructionMeta {
            construction: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            a_side: (0..a_len).collect(),
            b_side: (a_len..n).collect(),
        };
        Self { graph, meta }
    }

    pub fn a_side(&self) -> &[Vertex] {
        &self.meta.a_side
    }

    pub fn b_side(&self) -> &[Vertex] {
        &self.meta.b_side
    }
}

/// All triples meeting `A`, where `A` is the first `n/3 - 1` vertices.
pub fn pm_free_host(n: usize) -> Result<Construction, ConstructionError> {
    if n % 3 != 0 || n < 6 {
        return Err(ConstructionError::BadOrder { name: "pm_free_host", n, rule: "n divisible by 3 and n >= 6" });
    }
    Ok(Construction::split("pm_free", &[("n", n)], n, n / 3 - 1, |in_b| in_b < 3))
}

/// Triples with an even number (0 or 2) of vertices in `B`, `|A| = |B| = n/2` odd.
pub fn parity_codegree_host(n: usize) -> Result<Construction, ConstructionError> {
    if n % 4 != 2 {
        return Err(ConstructionError::BadOrder { name: "parity_codegree_host", n, rule: "n = 2 mod 4" });
    }
    Ok(Construction::split("parity", &[("n", n)], n, n / 2, |in_b| in_b == 0 || in_b == 2))
}

/// Triples with at least two vertices in `B`, where `A` is the first `a` vertices.
pub fn low_codegree_host(n: usize, a: usize) -> Result<Construction, ConstructionError> {
    if n < 5 || a < 2 || a > n - 3 {
        return Err(ConstructionError::OutOfBounds {
            name: "low_codegree_host",
            param: "a",
            value: a,
            lo: 2,
            hi: n.saturating_sub(3),
        });
    }
    Ok(Construction::split("low_codeg", &[("n", n), ("a", a)], n, a, |in_b| in_b >= 2))
}

/// All triples except those inside the prefix `0..f`.
pub fn ap_host(n: usize, f: usize) -> Result<Construction, ConstructionError> {
    if f < 3 || f > n {
        return Err(ConstructionError::OutOfBounds { name: "ap_host", param: "f", value: f, lo: 3, hi: n });
    }
    Ok(Construction::split("ap_host", &[("n", n), ("f", f)], n, f, |in_b| in_b > 0))
}

/// A 2-dimensional complex with full 1-skeleton, given by its 2-faces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complex2 {
    pub n: usize,
    pub faces: Vec<[Vertex; 3]>,
}

impl Complex2 {
    pub fn to_hypergraph(&self) -> Hypergraph3 {
        Hypergraph3::new(self.n, self.faces.iter().copied()).expect("faces are distinct triples")
    }
}

/// Faces `{i, ⌊(i+j)/2⌋, j}` for all `i < j` with `j - i >= 2`.
pub fn ap_hypertree(n: usize) -> Complex2 {
    let mut faces = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            faces.push([i, (i + j) / 2, j]);
        }
    }
    Complex2 { n, faces }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseStep {
    pub pair: [Vertex; 2],
    pub face: [Vertex; 3],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseTrace {
    pub steps: Vec<CollapseStep>,
    /// Index of the first step taken by the greedy fallback, if it was needed.
    pub fallback_from: Option<usize>,
}

fn face_pairs(f: [Vertex; 3]) -> [[Vertex; 2]; 3] {
    [[f[0], f[1]], [f[0], f[2]], [f[1], f[2]]]
}

/// Collapses `c` by removing faces through exposed pairs.
///
/// Faces are ordered by `max - min` (ties lexicographic) and removed from the
/// widest down, each through its extreme pair. If that order hits a pair that
/// is not exposed, the remaining faces are collapsed greedily through any
/// exposed pair. Returns `None` if neither finishes.
pub fn collapse(c: &Complex2) -> Option<CollapseTrace> {
    let mut faces: Vec<[Vertex; 3]> = c.faces.iter().map(|f| crate::hypergraph::sort_edge(*f)).collect();
    faces.sort_by_key(|f| (f[2] - f[0], *f));
    let mut count: HashMap<[Vertex; 2], usize> = HashMap::new();
    for f in &faces {
        for p in face_pairs(*f) {
            *count.entry(p).or_default() += 1;
        }
    }
    let remove = |f: [Vertex; 3], count: &mut HashMap<[Vertex; 2], usize>| {
        for p in face_pairs(f) {
            *count.get_mut(&p).expect("pair counted") -= 1;
        }
    };

    let mut steps = Vec::with_capacity(faces.len());
    while let Some(&f) = faces.last() {
        let pair = [f[0], f[2]];
        if count[&pair] != 1 {
            break;
        }
        faces.pop();
        remove(f, &mut count);
        steps.push(CollapseStep { pair, face: f });
    }
    if faces.is_empty() {
        return Some(CollapseTrace { steps, fallback_from: None });
    }

    let fallback_from = Some(steps.len());
    faces.sort_unstable();
    while !faces.is_empty() {
        let found = faces
            .iter()
            .enumerate()
            .find_map(|(i, f)| face_pairs(*f).into_iter().find(|p| count[p] == 1).map(|p| (i, p)))?;
        let (i, pair) = found;
        let f = faces.remove(i);
        remove(f, &mut count);
        steps.push(CollapseStep { pair, face: f });
    }
    Some(CollapseTrace { steps, fallback_from })
}

/// Replays a trace and checks that every recorded pair was exposed.
pub fn verify_trace(c: &Complex2, trace: &CollapseTrace) -> bool {
    let mut remaining: Vec<[Vertex; 3]> = c.faces.iter().map(|f| crate::hypergraph::sort_edge(*f)).collect();
    for step in &trace.steps {
        let holders: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(_, f)| f.contains(&step.pair[0]) && f.contains(&step.pair[1]))
            .map(|(i, _)| i)
            .collect();
        if holders.len() != 1 || remaining[holders[0]] != step.face {
            return false;
        }
        remaining.swap_remove(holders[0]);
    }
    remaining.is_empty()
}

/// True iff `s` contains some `{a, a+d, a+2d}` with `d > 0`.
pub fn has_3ap(s: &[usize]) -> bool {
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            if sorted.binary_search(&(2 * b - a)).is_ok() {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApVerdict {
    pub n: usize,
    pub f: usize,
    pub subsets_checked: u64,
    /// `f`-subsets of the tree's vertices that contain no face.
    pub face_free_subsets: u64,
    /// Whether every `f`-subset contains a 3-term progression.
    pub every_subset_has_3ap: bool,
    /// A host-to-tree bijection `tree_vertex -> host_vertex`, if one exists.
    pub embedding: Option<Vec<Vertex>>,
}

pub const AP_EXHAUSTIVE_LIMIT: usize = 24;

/// Decides by exhaustion whether `ap_hypertree(n)` embeds into `ap_host(n, f)`.
///
/// Both have `n` vertices, so an embedding is a bijection, and it exists iff
/// the preimage of the forbidden prefix (some `f`-subset) contains no face.
pub fn ap_noncontainment_check(n: usize, f: usize) -> Result<ApVerdict, ConstructionError> {
    if n > AP_EXHAUSTIVE_LIMIT {
        return Err(ConstructionError::TooLarge { n, limit: AP_EXHAUSTIVE_LIMIT });
    }
    if f < 3 || f > n {
        return Err(ConstructionError::OutOfBounds { name: "ap_noncontainment_check", param: "f", value: f, lo: 3, hi: n });
    }
    let faces = ap_hypertree(n).faces;
    let face_masks: Vec<u32> = faces.iter().map(|f| f.iter().fold(0u32, |m, &v| m | 1 << v)).collect();
    let mut verdict =
        ApVerdict { n, f, subsets_checked: 0, face_free_subsets: 0, every_subset_has_3ap: true, embedding: None };
    for_each_subset(n, f, |mask| {
        verdict.subsets_checked += 1;
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if !has_3ap(&members) {
            verdict.every_subset_has_3ap = false;
        }
        if face_masks.iter().all(|&fm| fm & mask != fm) {
            verdict.face_free_subsets += 1;
            if verdict.embedding.is_none() {
                // Send the chosen subset onto the prefix and the rest after it.
                let mut map = vec![0; n];
                let rest = (0..n).filter(|&v| mask >> v & 1 == 0);
                for (host, tree_v) in members.iter().copied().chain(rest).enumerate() {
                    map[tree_v] = host;
                }
                verdict.embedding = Some(map);
            }
        }
    });
    Ok(verdict)
}

fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(u32)) {
    if k > n {
        return;
    }
    let mut mask: u32 = if k == 0 { 0 } else { (1u32 << k) - 1 };
    let limit = 1u64 << n;
    while (mask as u64) < limit {
        visit(mask);
        if mask == 0 {
            return;
        }
        // Gosper's hack: next integer with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
        if r == 0 {
            return;
        }
    }
}
