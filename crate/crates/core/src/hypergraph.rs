//! 3-uniform hypergraphs and their degree / density queries.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

pub type Vertex = usize;
/// An edge, always stored with its vertices in ascending order.
pub type Edge = [Vertex; 3];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: Vertex, n: usize },
    #[error("edge {0:?} repeats a vertex")]
    RepeatedVertex([Vertex; 3]),
    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Edge),
    #[error("identical vertices {0} and {0}")]
    IdenticalVertices(Vertex),
    #[error("vertex {0} lies in one of the query sets")]
    VertexInSet(Vertex),
    #[error("vertex sets overlap at {0}")]
    OverlappingSets(Vertex),
    #[error("empty vertex set")]
    EmptySet,
    #[error("need at least 3 vertices, have {0}")]
    TooFewVertices(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn sort_edge(e: [Vertex; 3]) -> Edge {
    let mut e = e;
    e.sort_unstable();
    e
}

/// Dense bitmask over `0..n`, used to intersect against pair neighbourhoods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMask {
    words: Vec<u64>,
}

impl VertexMask {
    pub fn new(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64).max(1)] }
    }

    pub fn from_vertices(n: usize, vs: impl IntoIterator<Item = Vertex>) -> Self {
        let mut m = Self::new(n);
        for v in vs {
            m.insert(v);
        }
        m
    }

    pub fn insert(&mut self, v: Vertex) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: Vertex) {
        self.words[v / 64] &= !(1 << (v % 64));
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.words.get(v / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        iter_bits(&self.words)
    }
}

pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = Vertex> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i * 64 + b)
        })
    })
}

fn and_count(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

/// Largest `n` for which pair neighbourhoods are stored as bitmasks
/// (memory grows like `n^3 / 16` bytes).
const DENSE_LIMIT: usize = 640;

#[derive(Clone)]
enum PairIndex {
    /// Row `pair_index(u,v)` holds the bitmask of `{w : {u,v,w} ∈ E}`.
    Dense { words: usize, bits: Vec<u64> },
    /// Sorted third vertices keyed by `(u, v)` with `u < v`.
    Sparse(HashMap<(Vertex, Vertex), Vec<Vertex>>),
}

/// Immutable 3-uniform hypergraph on vertices `0..n`.
///
/// Besides the edge list it indexes, for every pair `u < v`, the vertices `w`
/// with `{u,v,w}` an edge. For small `n` these are bitmasks, so membership is
/// O(1) and codegree or pair-density counts are popcounts.
#[derive(Clone)]
pub struct Hypergraph3 {
    n: usize,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    pairs: PairIndex,
}

impl std::fmt::Debug for Hypergraph3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hypergraph3").field("n", &self.n).field("edges", &self.edges).finish()
    }
}

impl PartialEq for Hypergraph3 {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Hypergraph3 {}

impl Hypergraph3 {
    /// Builds a hypergraph; edges may list their vertices in any order and are
    /// kept in the order given (after sorting within each triple).
    pub fn new(n: usize, edges: impl IntoIterator<Item = [Vertex; 3]>) -> Result<Self, GraphError> {
        let pairs = if n <= DENSE_LIMIT {
            let words = n.div_ceil(64).max(1);
            PairIndex::Dense { words, bits: vec![0; n * n.saturating_sub(1) / 2 * words] }
        } else {
            PairIndex::Sparse(HashMap::new())
        };
        let mut g = Self { n, edges: Vec::new(), incident: vec![Vec::new(); n], pairs };
        for e in edges {
            for &v in &e {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { v, n });
                }
            }
            let s = sort_edge(e);
            if s[0] == s[1] || s[1] == s[2] {
                return Err(GraphError::RepeatedVertex(e));
            }
            if g.has_edge(s[0], s[1], s[2]) {
                return Err(GraphError::DuplicateEdge(s));
            }
            let idx = g.edges.len();
            g.edges.push(s);
            for &v in &s {
                g.incident[v].push(idx);
            }
            let [a, b, c] = s;
            g.add_pair(a, b, c);
            g.add_pair(a, c, b);
            g.add_pair(b, c, a);
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, []).expect("no edges")
    }

    /// Complete 3-graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        Self::from_predicate(n, |_, _, _| true)
    }

    /// All triples `a < b < c` accepted by `keep`, in lexicographic order.
    pub fn from_predicate(n: usize, mut keep: impl FnMut(Vertex, Vertex, Vertex) -> bool) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if keep(a, b, c) {
                        edges.push([a, b, c]);
                    }
                }
            }
        }
        Self::new(n, edges).expect("triples are distinct and in range")
    }

    /// Relabels arbitrary vertex labels to `0..n` in sorted label order.
    /// Returns the graph and the table mapping new labels to old ones.
    pub fn from_labeled_edges<L: Ord + Clone>(edges: &[[L; 3]]) -> Result<(Self, Vec<L>), GraphError> {
        let mut ids: BTreeMap<L, Vertex> = BTreeMap::new();
        for e in edges {
            for l in e {
                ids.entry(l.clone()).or_insert(0);
            }
        }
        let table: Vec<L> = ids.keys().cloned().collect();
        for (i, v) in ids.values_mut().enumerate() {
            *v = i;
        }
        let mapped = edges.iter().map(|e| [ids[&e[0]], ids[&e[1]], ids[&e[2]]]);
        Ok((Self::new(table.len(), mapped)?, table))
    }

    fn pair_index(&self, u: Vertex, v: Vertex) -> usize {
        debug_assert!(u < v && v < self.n);
        u * (2 * self.n - u - 1) / 2 + (v - u - 1)
    }

    fn add_pair(&mut self, u: Vertex, v: Vertex, w: Vertex) {
        let idx = self.pair_index(u, v);
        match &mut self.pairs {
            PairIndex::Dense { words, bits } => bits[idx * *words + w / 64] |= 1 << (w % 64),
            PairIndex::Sparse(map) => {
                let list = map.entry((u, v)).or_default();
                let at = list.partition_point(|&x| x < w);
                list.insert(at, w);
            }
        }
    }

    fn dense_row(&self, u: Vertex, v: Vertex) -> Option<&[u64]> {
        match &self.pairs {
            PairIndex::Dense { words, bits } => {
                let (u, v) = if u < v { (u, v) } else { (v, u) };
                let row = self.pair_index(u, v) * words;
                Some(&bits[row..row + words])
            }
            PairIndex::Sparse(_) => None,
        }
    }

    fn sparse_list(&self, u: Vertex, v: Vertex) -> &[Vertex] {
        match &self.pairs {
            PairIndex::Sparse(map) => {
                let key = if u < v { (u, v) } else { (v, u) };
                map.get(&key).map_or(&[], Vec::as_slice)
            }
            PairIndex::Dense { .. } => &[],
        }
    }

    /// Vertices `w` with `{u,v,w}` an edge, ascending; no range checks.
    pub fn pair_neighbors(&self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        match self.dense_row(u, v) {
            Some(row) => iter_bits(row).collect(),
            None => self.sparse_list(u, v).to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> Edge {
        self.edges[i]
    }

    /// Indices of edges containing `v`, in insertion order.
    pub fn incident_edges(&self, v: Vertex) -> &[usize] {
        &self.incident[v]
    }

    /// Membership test; vertex order is irrelevant, out-of-range gives false.
    pub fn has_edge(&self, a: Vertex, b: Vertex, c: Vertex) -> bool {
        if a == b || b == c || a == c || a >= self.n || b >= self.n || c >= self.n {
            return false;
        }
        match self.dense_row(a, b) {
            Some(row) => row[c / 64] >> (c % 64) & 1 == 1,
            None => self.sparse_list(a, b).binary_search(&c).is_ok(),
        }
    }

    /// Index of edge `e` (any vertex order), if present.
    pub fn edge_index(&self, e: [Vertex; 3]) -> Option<usize> {
        if !self.has_edge(e[0], e[1], e[2]) {
            return None;
        }
        let s = sort_edge(e);
        self.incident[s[0]].iter().copied().find(|&i| self.edges[i] == s)
    }

    fn check(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { v, n: self.n })
        }
    }

    pub fn degree(&self, v: Vertex) -> Result<usize, GraphError> {
        self.check(v)?;
        Ok(self.incident[v].len())
    }

    pub fn codegree(&self, u: Vertex, v: Vertex) -> Result<usize, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::IdenticalVertices(u));
        }
        Ok(self.codegree_unchecked(u, v))
    }

    pub(crate) fn codegree_unchecked(&self, u: Vertex, v: Vertex) -> usize {
        match self.dense_row(u, v) {
            Some(row) => row.iter().map(|w| w.count_ones() as usize).sum(),
            None => self.sparse_list(u, v).len(),
        }
    }

    /// Number of `w` in `mask` with `{u,v,w}` an edge; no range checks.
    pub fn codegree_into(&self, u: Vertex, v: Vertex, mask: &VertexMask) -> usize {
        match self.dense_row(u, v) {
            Some(row) => and_count(row, mask.words()),
            None => self.sparse_list(u, v).iter().filter(|&&w| mask.contains(w)).count(),
        }
    }

    /// `|{(a,b) ∈ A×B : {v,a,b} ∈ E}|`.
    pub fn deg_pairs(&self, v: Vertex, a: &[Vertex], b: &[Vertex]) -> Result<usize, GraphError> {
        self.check(v)?;
        if a.contains(&v) || b.contains(&v) {
            return Err(GraphError::VertexInSet(v));
        }
        check_disjoint(self.n, &[a, b])?;
        let mb = VertexMask::from_vertices(self.n, b.iter().copied());
        Ok(a.iter().map(|&x| self.codegree_into(v, x, &mb)).sum())
    }

    /// Number of edges with one vertex in each of the three sets.
    pub fn crossing_edges(&self, t: &VertexSetTriple) -> usize {
        let mc = VertexMask::from_vertices(self.n, t.c.iter().copied());
        let mut count = 0;
        for &x in &t.a {
            for &y in &t.b {
                count += self.codegree_into(x, y, &mc);
            }
        }
        count
    }

    /// `d(A,B,C)` as an exact rational.
    pub fn density(&self, t: &VertexSetTriple) -> Result<Rational, GraphError> {
        if t.a.is_empty() || t.b.is_empty() || t.c.is_empty() {
            return Err(GraphError::EmptySet);
        }
        check_disjoint(self.n, &[&t.a, &t.b, &t.c])?;
        let total = (t.a.len() * t.b.len() * t.c.len()) as i64;
        Ok(Rational::new(self.crossing_edges(t) as i64, total))
    }

    pub fn min_vertex_degree(&self) -> Result<usize, GraphError> {
        if self.n < 3 {
            return Err(GraphError::TooFewVertices(self.n));
        }
        Ok(self.incident.iter().map(Vec::len).min().unwrap_or(0))
    }

    pub fn min_codegree(&self) -> Result<usize, GraphError> {
        if self.n < 3 {
            return Err(GraphError::TooFewVertices(self.n));
        }
        let mut best = usize::MAX;
        for u in 0..self.n {
            for v in u + 1..self.n {
                best = best.min(self.codegree_unchecked(u, v));
            }
        }
        Ok(best)
    }

    pub fn max_vertex_degree(&self) -> usize {
        self.incident.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn incidence_graph(&self) -> IncidenceGraph {
        IncidenceGraph::new(self)
    }

    /// Sub-hypergraph on `vertices`, relabelled `0..k` in the given order.
    /// Returns `None` if `vertices` repeats or is out of range.
    pub fn induced(&self, vertices: &[Vertex]) -> Option<Self> {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n || pos[v] != usize::MAX {
                return None;
            }
            pos[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| e.iter().all(|&v| pos[v] != usize::MAX))
            .map(|e| [pos[e[0]], pos[e[1]], pos[e[2]]]);
        Self::new(vertices.len(), edges).ok()
    }

    /// Serialises in the `H3 v1` text format.
    pub fn to_h3(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e[0], e[1], e[2]);
        }
        s
    }

    /// Parses the `H3 v1` text format. Blank lines and `#` comments are skipped.
    pub fn from_h3(text: &str) -> Result<Self, GraphError> {
        let mut lines = content_lines(text);
        let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 1, message: "missing header".into() })?;
        let nums = parse_numbers(hline, header, 2)?;
        let (n, m) = (nums[0], nums[1]);
        let mut edges = Vec::with_capacity(m);
        let mut seen = HashSet::new();
        for (line, body) in lines {
            let t = parse_numbers(line, body, 3)?;
            for &v in &t {
                if v >= n {
                    return Err(GraphError::Parse { line, message: format!("vertex {v} out of range for n = {n}") });
                }
            }
            let s = sort_edge([t[0], t[1], t[2]]);
            if s[0] == s[1] || s[1] == s[2] {
                return Err(GraphError::Parse { line, message: "edge repeats a vertex".into() });
            }
            if !seen.insert(s) {
                return Err(GraphError::Parse { line, message: format!("duplicate edge {s:?}") });
            }
            edges.push(s);
        }
        if edges.len() != m {
            return Err(GraphError::Parse { line: hline, message: format!("header declares {m} edges, found {}", edges.len()) });
        }
        Self::new(n, edges)
    }
}

pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).filter(|(_, l)| !l.is_empty())
}

pub(crate) fn parse_numbers(line: usize, body: &str, expect: usize) -> Result<Vec<usize>, GraphError> {
    let nums: Result<Vec<usize>, _> = body.split_whitespace().map(str::parse).collect();
    match nums {
        Ok(v) if v.len() == expect => Ok(v),
        Ok(v) => Err(GraphError::Parse { line, message: format!("expected {expect} integers, found {}", v.len()) }),
        Err(e) => Err(GraphError::Parse { line, message: e.to_string() }),
    }
}

fn check_disjoint(n: usize, sets: &[&[Vertex]]) -> Result<(), GraphError> {
    let mut seen = VertexMask::new(n);
    for s in sets {
        for &v in s.iter() {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { v, n });
            }
            if seen.contains(v) {
                return Err(GraphError::OverlappingSets(v));
            }
            seen.insert(v);
        }
    }
    Ok(())
}

/// Three vertex sets for density queries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSetTriple {
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
    pub c: Vec<Vertex>,
}

impl VertexSetTriple {
    pub fn new(a: Vec<Vertex>, b: Vec<Vertex>, c: Vec<Vertex>) -> Self {
        Self { a, b, c }
    }
}

/// Bipartite vertex/edge incidence graph. Nodes `0..n` are vertices, nodes
/// `n..n+m` are edges.
#[derive(Clone, Debug)]
pub struct IncidenceGraph {
    n_vertices: usize,
    n_edges: usize,
    adj: Vec<Vec<usize>>,
}

impl IncidenceGraph {
    pub fn new(h: &Hypergraph3) -> Self {
        let n = h.n();
        let mut adj = vec![Vec::new(); n + h.edge_count()];
        for (i, e) in h.edges().iter().enumerate() {
            for &v in e {
                adj[v].push(n + i);
                adj[n + i].push(v);
            }
        }
        Self { n_vertices: n, n_edges: h.edge_count(), adj }
    }

    pub fn node_count(&self) -> usize {
        self.n_vertices + self.n_edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn total_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// True iff some incidence forms a cycle (a Berge cycle in the hypergraph).
    pub fn has_cycle(&self) -> bool {
        let mut uf = UnionFind::<usize>::new(self.node_count());
        for e in 0..self.n_edges {
            for &v in &self.adj[self.n_vertices + e] {
                if !uf.union(v, self.n_vertices + e) {
                    return true;
                }
            }
        }
        false
    }

    /// True iff all vertex nodes are in one component (needs at least one vertex).
    pub fn vertices_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return false;
        }
        let mut uf = UnionFind::<usize>::new(self.node_count());
        for e in 0..self.n_edges {
            for &v in &self.adj[self.n_vertices + e] {
                uf.union(v, self.n_vertices + e);
            }
        }
        let r = uf.find(0);
        (1..self.n_vertices).all(|v| uf.find(v) == r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{low_codegree_host, parity_codegree_host, pm_free_host};
    use proptest::prelude::*;

    fn brute_codegree(h: &Hypergraph3, u: usize, v: usize) -> usize {
        h.edges().iter().filter(|e| e.contains(&u) && e.contains(&v)).count()
    }

    fn brute_density(h: &Hypergraph3, t: &VertexSetTriple) -> usize {
        h.edges()
            .iter()
            .filter(|e| {
                let mut seen = [0; 3];
                for v in e.iter() {
                    for (k, s) in [&t.a, &t.b, &t.c].iter().enumerate() {
                        if s.contains(v) {
                            seen[k] += 1;
                        }
                    }
                }
                seen == [1, 1, 1]
            })
            .count()
    }

    #[test]
    fn complete_and_empty_degrees() {
        let k5 = Hypergraph3::complete(5);
        assert_eq!(k5.degree(0), Ok(6));
        assert_eq!(k5.codegree(1, 3), Ok(3));
        assert_eq!(Hypergraph3::empty(4).degree(2), Ok(0));
        let k6 = Hypergraph3::complete(6);
        assert_eq!(k6.min_vertex_degree(), Ok(10));
        assert_eq!(k6.min_codegree(), Ok(4));
        let k7 = Hypergraph3::complete(7);
        assert_eq!(k7.deg_pairs(0, &[1, 2], &[3, 4, 5]), Ok(6));
        assert_eq!(Hypergraph3::empty(7).deg_pairs(0, &[1, 2], &[3, 4, 5]), Ok(0));
    }

    #[test]
    fn errors_are_reported() {
        let k5 = Hypergraph3::complete(5);
        assert_eq!(k5.degree(5), Err(GraphError::VertexOutOfRange { v: 5, n: 5 }));
        assert_eq!(k5.codegree(2, 2), Err(GraphError::IdenticalVertices(2)));
        assert_eq!(k5.deg_pairs(1, &[1], &[2]), Err(GraphError::VertexInSet(1)));
        let t = VertexSetTriple::new(vec![0], vec![0, 1], vec![2]);
        assert_eq!(k5.density(&t), Err(GraphError::OverlappingSets(0)));
        let t = VertexSetTriple::new(vec![], vec![1], vec![2]);
        assert_eq!(k5.density(&t), Err(GraphError::EmptySet));
        assert_eq!(Hypergraph3::empty(2).min_codegree(), Err(GraphError::TooFewVertices(2)));
        assert!(matches!(Hypergraph3::new(4, [[0, 1, 1]]), Err(GraphError::RepeatedVertex(_))));
        assert!(matches!(Hypergraph3::new(4, [[0, 1, 2], [2, 1, 0]]), Err(GraphError::DuplicateEdge(_))));
    }

    #[test]
    fn pm_free_host_degrees() {
        let h = pm_free_host(9).unwrap();
        let b_side = h.b_side();
        // Triples through v that meet A ∪ {v}: all triples through v minus
        // those whose other two vertices avoid A.
        let oracle = |v: usize| {
            let a = h.a_side();
            let mut c = 0;
            for x in 0..9 {
                for y in x + 1..9 {
                    if x != v && y != v && (a.contains(&x) || a.contains(&y)) {
                        c += 1;
                    }
                }
            }
            c
        };
        for &v in b_side {
            assert_eq!(h.graph.degree(v).unwrap(), oracle(v));
            assert_eq!(h.graph.degree(v).unwrap(), 13);
        }
        assert_eq!(h.graph.min_vertex_degree(), Ok(13));
    }

    #[test]
    fn codegree_examples_from_constructions() {
        let low = low_codegree_host(8, 2).unwrap();
        let a = low.a_side();
        assert_eq!(low.graph.codegree(a[0], a[1]), Ok(0));
        let par = parity_codegree_host(10).unwrap();
        let a = par.a_side();
        assert_eq!(par.graph.codegree(a[0], a[1]), Ok(a.len() - 2));
        assert_eq!(par.graph.codegree(a[0], a[1]), Ok(3));
        let oracle = (0..10)
            .flat_map(|u| (u + 1..10).map(move |v| (u, v)))
            .map(|(u, v)| brute_codegree(&par.graph, u, v))
            .min();
        assert_eq!(par.graph.min_codegree().ok(), oracle);
        assert_eq!(oracle, Some(3));
    }

    #[test]
    fn pm_free_density_matches_enumeration() {
        let h = pm_free_host(9).unwrap();
        let a = h.a_side().to_vec();
        let rest: Vec<usize> = h.b_side().to_vec();
        let t = VertexSetTriple::new(vec![a[0]], vec![a[1], rest[0]], rest[1..4].to_vec());
        let d = h.graph.density(&t).unwrap();
        assert_eq!(d, Rational::new(brute_density(&h.graph, &t) as i64, 6));
    }

    #[test]
    fn h3_round_trip_and_errors() {
        let h = Hypergraph3::new(6, [[0, 1, 2], [5, 3, 2]]).unwrap();
        let back = Hypergraph3::from_h3(&h.to_h3()).unwrap();
        assert_eq!(h, back);
        let err = Hypergraph3::from_h3("4 2\n0 1 2\n2 1 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }));
        let err = Hypergraph3::from_h3("4 1\n0 1 4\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));
        assert!(Hypergraph3::from_h3("4 2\n0 1 2\n").is_err());
    }

    #[test]
    fn sparse_index_agrees_with_dense() {
        let n = DENSE_LIMIT + 9;
        let edges: Vec<[usize; 3]> = (0..n - 2).step_by(2).map(|i| [i, i + 1, i + 2]).chain([[0, 5, n - 1], [1, 5, 0]]).collect();
        let big = Hypergraph3::new(n, edges.clone()).unwrap();
        assert!(matches!(big.pairs, PairIndex::Sparse(_)));
        assert!(big.has_edge(5, 0, 1) && !big.has_edge(0, 1, 3));
        assert_eq!(big.codegree(0, 5), Ok(2));
        assert_eq!(big.pair_neighbors(5, 0), vec![1, n - 1]);
        let mask = VertexMask::from_vertices(n, [1, 2]);
        assert_eq!(big.codegree_into(0, 5, &mask), 1);
        assert_eq!(big.edge_index([5, 1, 0]), Some(edges.len() - 1));
    }

    #[test]
    fn labeled_loader_keeps_table() {
        let (h, table) = Hypergraph3::from_labeled_edges(&[[10, 20, 30], [30, 40, 50]]).unwrap();
        assert_eq!(table, vec![10, 20, 30, 40, 50]);
        assert!(h.has_edge(2, 3, 4));
    }

    #[test]
    fn incidence_graph_counts() {
        let h = Hypergraph3::complete(5);
        let ig = h.incidence_graph();
        assert_eq!(ig.node_count(), 5 + 10);
        assert_eq!(ig.total_degree(), 2 * 3 * 10);
        assert!((5..15).all(|e| ig.neighbors(e).len() == 3));
        assert!(ig.has_cycle());
        assert!(ig.vertices_connected());
        let path = Hypergraph3::new(5, [[0, 1, 2], [2, 3, 4]]).unwrap();
        assert!(!path.incidence_graph().has_cycle());
    }

    fn random_graph() -> impl Strategy<Value = Hypergraph3> {
        (3usize..12).prop_flat_map(|n| {
            let triples = n * (n - 1) * (n - 2) / 6;
            proptest::collection::vec(any::<bool>(), triples).prop_map(move |bits| {
                let mut it = bits.into_iter();
                Hypergraph3::from_predicate(n, |_, _, _| it.next().unwrap())
            })
        })
    }

    proptest! {
        #[test]
        fn handshake_identities(h in random_graph()) {
            let n = h.n();
            let deg_sum: usize = (0..n).map(|v| h.degree(v).unwrap()).sum();
            prop_assert_eq!(deg_sum, 3 * h.edge_count());
            let mut co_sum = 0;
            for u in 0..n {
                for v in u + 1..n {
                    let c = h.codegree(u, v).unwrap();
                    prop_assert_eq!(c, brute_codegree(&h, u, v));
                    co_sum += c;
                }
            }
            prop_assert_eq!(co_sum, 3 * h.edge_count());
            let ig = h.incidence_graph();
            prop_assert_eq!(ig.node_count(), n + h.edge_count());
            prop_assert_eq!(ig.total_degree(), 2 * 3 * h.edge_count());
        }

        #[test]
        fn deg_pairs_is_a_density(h in random_graph(), split in 1usize..4) {
            let n = h.n();
            let v = 0;
            let rest: Vec<usize> = (1..n).collect();
            let split = split.min(rest.len() - 1);
            let (a, b) = rest.split_at(split);
            let pairs = h.deg_pairs(v, a, b).unwrap();
            let t = VertexSetTriple::new(vec![v], a.to_vec(), b.to_vec());
            let d = h.density(&t).unwrap();
            prop_assert_eq!(d * Rational::from_integer((a.len() * b.len()) as i64), Rational::from_integer(pairs as i64));
            prop_assert_eq!(h.crossing_edges(&t), brute_density(&h, &t));
        }
    }
}
