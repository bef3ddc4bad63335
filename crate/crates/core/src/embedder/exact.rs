//! Complete backtracking search for an embedding of a loose tree.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::EmbedError;
use crate::hypergraph::{Hypergraph3, Vertex, VertexMask};
use crate::loose_tree::LooseTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedStatus {
    Found,
    ProvenAbsent,
    BudgetExhausted,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbedStats {
    pub nodes: u64,
    /// Wall-clock time; kept apart from everything else so outputs can be
    /// compared across runs.
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedResult {
    pub status: EmbedStatus,
    /// `embedding[tree_vertex] = host_vertex` when found.
    pub embedding: Option<Vec<Vertex>>,
    pub stats: EmbedStats,
}

#[derive(Clone, Debug)]
pub struct EmbedQuery<'a> {
    pub tree: &'a LooseTree,
    pub host: &'a Hypergraph3,
    /// Fixed images `(tree vertex, host vertex)`.
    pub pins: Vec<(Vertex, Vertex)>,
    /// Cap on search nodes; `None` searches to the end.
    pub budget: Option<u64>,
}

impl<'a> EmbedQuery<'a> {
    pub fn new(tree: &'a LooseTree, host: &'a Hypergraph3) -> Self {
        Self { tree, host, pins: Vec::new(), budget: None }
    }
}

/// Partition of host vertices into classes of pairwise twins: `u ~ v` iff
/// swapping `u` and `v` is an automorphism. `fixed` vertices stay alone.
pub fn twin_classes(h: &Hypergraph3, fixed: &[Vertex]) -> Vec<usize> {
    let n = h.n();
    let mut class = vec![usize::MAX; n];
    let mut is_fixed = vec![false; n];
    for &v in fixed {
        is_fixed[v] = true;
    }
    let mut next = 0;
    for u in 0..n {
        if class[u] != usize::MAX {
            continue;
        }
        class[u] = next;
        if !is_fixed[u] {
            for v in u + 1..n {
                if class[v] == usize::MAX && !is_fixed[v] && are_twins(h, u, v) {
                    class[v] = next;
                }
            }
        }
        next += 1;
    }
    class
}

fn are_twins(h: &Hypergraph3, u: Vertex, v: Vertex) -> bool {
    if h.incident_edges(u).len() != h.incident_edges(v).len() {
        return false;
    }
    // {u,w,x} ∈ E ⟺ {v,w,x} ∈ E for all w,x outside {u,v}.
    (0..h.n()).filter(|&w| w != u && w != v).all(|w| {
        let mut a = h.pair_neighbors(u, w);
        let mut b = h.pair_neighbors(v, w);
        a.retain(|&x| x != v);
        b.retain(|&x| x != u);
        a == b
    })
}

/// Rooted-shape id of every subtree, so sibling subtrees of equal shape can
/// be told apart from the rest.
fn subtree_shapes(t: &LooseTree) -> Vec<u32> {
    let mut ids: HashMap<Vec<(u32, u32)>, u32> = HashMap::new();
    let mut shape = vec![0u32; t.n()];
    let mut order = t.bfs_vertices();
    order.reverse();
    for v in order {
        let mut key: Vec<(u32, u32)> = t
            .child_edges(v)
            .iter()
            .map(|&e| {
                let [b, c] = t.children_of_edge(e);
                let (x, y) = (shape[b], shape[c]);
                (x.min(y), x.max(y))
            })
            .collect();
        key.sort_unstable();
        let len = ids.len() as u32;
        shape[v] = *ids.entry(key).or_insert(len);
    }
    shape
}

struct Search<'a> {
    tree: &'a LooseTree,
    host: &'a Hypergraph3,
    map: Vec<Option<Vertex>>,
    pinned: Vec<bool>,
    free: VertexMask,
    class: Vec<usize>,
    /// Host vertices sorted by ascending degree.
    candidates: Vec<Vertex>,
    symmetric: Vec<bool>,
    nodes: u64,
    budget: u64,
}

enum Outcome {
    Found,
    Exhausted,
    Budget,
}

impl Search<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes <= self.budget
    }

    /// Whether `h` is the first free vertex of its twin class (by id order).
    fn is_rep(&self, h: Vertex) -> bool {
        self.free.contains(h) && !self.free.iter().take_while(|&w| w < h).any(|w| self.class[w] == self.class[h])
    }

    fn degree_ok(&self, x: Vertex, h: Vertex) -> bool {
        self.host.incident_edges(h).len() >= self.tree.degree(x)
    }

    fn place(&mut self, x: Vertex, h: Vertex) {
        self.map[x] = Some(h);
        self.free.remove(h);
    }

    fn unplace(&mut self, x: Vertex, h: Vertex) {
        self.map[x] = None;
        self.free.insert(h);
    }

    /// Every mapped vertex still owed child edges has at least one free pair.
    fn forward_ok(&self, from: usize) -> bool {
        self.tree.ordering()[from..].iter().all(|&e| {
            let Some(a) = self.map[self.tree.attach_vertex(e)] else { return true };
            let [b, c] = self.tree.children_of_edge(e);
            match (self.map[b], self.map[c]) {
                (Some(y), Some(z)) => self.host.has_edge(a, y, z),
                (Some(y), None) | (None, Some(y)) => self.host.codegree_into(a, y, &self.free) > 0,
                (None, None) => self.free.iter().any(|w| self.host.codegree_into(a, w, &self.free) > 0),
            }
        })
    }

    fn edge_at(&mut self, k: usize) -> Outcome {
        if !self.tick() {
            return Outcome::Budget;
        }
        let Some(&e) = self.tree.ordering().get(k) else { return Outcome::Found };
        let a = self.map[self.tree.attach_vertex(e)].expect("attach vertex mapped first");
        let [b, c] = self.tree.children_of_edge(e);
        let pairs: Vec<(Vertex, Vertex)> = match (self.map[b], self.map[c]) {
            (Some(y), Some(z)) => {
                return if self.host.has_edge(a, y, z) { self.edge_at(k + 1) } else { Outcome::Exhausted };
            }
            (Some(y), None) => self.thirds(a, y, c).into_iter().map(|z| (y, z)).collect(),
            (None, Some(z)) => self.thirds(a, z, b).into_iter().map(|y| (y, z)).collect(),
            (None, None) => self.free_pairs(a, b, c, self.symmetric[e]),
        };
        let (fb, fc) = (self.map[b].is_none(), self.map[c].is_none());
        for (y, z) in pairs {
            if fb {
                self.place(b, y);
            }
            if fc {
                self.place(c, z);
            }
            let outcome = if self.forward_ok(k + 1) { self.edge_at(k + 1) } else { Outcome::Exhausted };
            if let Outcome::Found = outcome {
                return outcome;
            }
            if fb {
                self.unplace(b, y);
            }
            if fc {
                self.unplace(c, z);
            }
            match outcome {
                Outcome::Exhausted => {}
                other => return other,
            }
        }
        Outcome::Exhausted
    }

    /// Free representatives `z` for tree vertex `x` completing `{a, y, z}`.
    fn thirds(&self, a: Vertex, y: Vertex, x: Vertex) -> Vec<Vertex> {
        let row = self.host.pair_neighbors(a, y);
        let mut out: Vec<Vertex> =
            row.into_iter().filter(|&z| self.is_rep(z) && self.degree_ok(x, z)).collect();
        out.sort_by_key(|&z| (self.host.incident_edges(z).len(), z));
        out
    }

    fn free_pairs(&mut self, a: Vertex, b: Vertex, c: Vertex, symmetric: bool) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        let firsts: Vec<Vertex> =
            self.candidates.iter().copied().filter(|&y| self.is_rep(y) && self.degree_ok(b, y)).collect();
        for y in firsts {
            if self.host.codegree_into(a, y, &self.free) == 0 {
                continue;
            }
            self.free.remove(y);
            let row = self.host.pair_neighbors(a, y);
            let mut zs: Vec<Vertex> = row
                .into_iter()
                .filter(|&z| self.is_rep(z) && self.degree_ok(c, z) && (!symmetric || y < z))
                .collect();
            self.free.insert(y);
            zs.sort_by_key(|&z| (self.host.incident_edges(z).len(), z));
            out.extend(zs.into_iter().map(|z| (y, z)));
        }
        out
    }
}

/// Exhaustive search for an embedding of `q.tree` into `q.host` honouring the pins.
///
/// `ProvenAbsent` is only returned after the whole (symmetry-reduced) space
/// has been searched; hitting the budget gives `BudgetExhausted` instead.
pub fn exact_embed(q: &EmbedQuery) -> Result<EmbedResult, EmbedError> {
    let start = Instant::now();
    let (tn, hn) = (q.tree.n(), q.host.n());
    super::check_pins(&q.pins, tn, hn)?;
    let finish = |status, embedding, nodes| EmbedResult {
        status,
        embedding,
        stats: EmbedStats { nodes, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
    };
    if tn > hn {
        return Ok(finish(EmbedStatus::ProvenAbsent, None, 0));
    }
    let root = q.pins.first().map_or(q.tree.root(), |p| p.0);
    let tree = if root == q.tree.root() { q.tree.clone() } else { q.tree.rerooted(root)? };

    let pinned_hosts: Vec<Vertex> = q.pins.iter().map(|p| p.1).collect();
    let mut pinned = vec![false; tn];
    let mut has_pin_below = vec![false; tn];
    for &(x, _) in &q.pins {
        pinned[x] = true;
        let mut v = Some(x);
        while let Some(u) = v {
            has_pin_below[u] = true;
            v = tree.parent_vertex(u);
        }
    }
    let shape = subtree_shapes(&tree);
    let symmetric = (0..tree.edge_count())
        .map(|e| {
            let [b, c] = tree.children_of_edge(e);
            shape[b] == shape[c] && !has_pin_below[b] && !has_pin_below[c]
        })
        .collect();
    let mut candidates: Vec<Vertex> = (0..hn).collect();
    candidates.sort_by_key(|&h| (q.host.incident_edges(h).len(), h));
    let mut s = Search {
        tree: &tree,
        host: q.host,
        map: vec![None; tn],
        pinned,
        free: VertexMask::from_vertices(hn, 0..hn),
        class: twin_classes(q.host, &pinned_hosts),
        candidates,
        symmetric,
        nodes: 0,
        budget: q.budget.unwrap_or(u64::MAX),
    };
    for &(x, h) in &q.pins {
        s.place(x, h);
    }

    let roots: Vec<Vertex> = if s.pinned[root] {
        vec![s.map[root].expect("pinned")]
    } else {
        s.candidates.iter().copied().filter(|&h| s.is_rep(h) && s.degree_ok(root, h)).collect()
    };
    for h in roots {
        let fresh = s.map[root].is_none();
        if fresh {
            s.place(root, h);
        }
        let outcome = if s.forward_ok(0) { s.edge_at(0) } else { Outcome::Exhausted };
        match outcome {
            Outcome::Found => {
                let map = s.map.iter().map(|m| m.expect("total")).collect();
                return Ok(finish(EmbedStatus::Found, Some(map), s.nodes));
            }
            Outcome::Budget => return Ok(finish(EmbedStatus::BudgetExhausted, None, s.nodes)),
            Outcome::Exhausted => {}
        }
        if fresh {
            s.unplace(root, h);
        }
    }
    Ok(finish(EmbedStatus::ProvenAbsent, None, s.nodes))
}
