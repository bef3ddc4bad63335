//! Loose trees: recognition, rooted structure, layerings and generators.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{content_lines, parse_numbers, Edge, GraphError, Hypergraph3, Vertex};
use crate::rng::seeded;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("not a loose tree")]
    NotATree,
    #[error("ordering position {0} does not meet the earlier edges in exactly one vertex")]
    InvalidOrdering(usize),
    #[error("root {0} is not in the first edge")]
    RootNotInFirstEdge(Vertex),
    #[error("loose trees have an odd number of vertices, got {0}")]
    EvenOrder(usize),
    #[error("maximum degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("binary loose trees need at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error("cannot remove {k} leaf edges from a tree with {m} edges")]
    TooManyRemovals { k: usize, m: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Greedy valid ordering: start from edge 0 and keep appending the
/// lowest-indexed edge that meets the covered vertices in exactly one vertex.
/// Returns `None` iff `h` is not a loose tree.
pub fn find_valid_ordering(h: &Hypergraph3) -> Option<Vec<usize>> {
    let (n, m) = (h.n(), h.edge_count());
    if m == 0 {
        return (n == 1).then(Vec::new);
    }
    let mut covered = vec![false; n];
    let mut hits = vec![0u8; m];
    let mut used = vec![false; m];
    let mut ready = BTreeSet::new();
    let mut order = Vec::with_capacity(m);
    let push = |e: usize,
                    covered: &mut Vec<bool>,
                    hits: &mut Vec<u8>,
                    used: &mut Vec<bool>,
                    ready: &mut BTreeSet<usize>,
                    order: &mut Vec<usize>| {
        used[e] = true;
        order.push(e);
        for v in h.edge(e) {
            if covered[v] {
                continue;
            }
            covered[v] = true;
            for &f in h.incident_edges(v) {
                if used[f] {
                    continue;
                }
                hits[f] += 1;
                if hits[f] == 1 {
                    ready.insert(f);
                } else {
                    ready.remove(&f);
                }
            }
        }
    };
    push(0, &mut covered, &mut hits, &mut used, &mut ready, &mut order);
    while let Some(e) = ready.pop_first() {
        push(e, &mut covered, &mut hits, &mut used, &mut ready, &mut order);
    }
    (order.len() == m && covered.iter().all(|&c| c)).then_some(order)
}

/// Connected with `n = 2|E| + 1`.
pub fn is_loose_tree(h: &Hypergraph3) -> bool {
    h.n() == 2 * h.edge_count() + 1 && h.incidence_graph().vertices_connected()
}

/// True iff the vertex/edge incidence graph has a cycle.
pub fn has_berge_cycle(h: &Hypergraph3) -> bool {
    h.incidence_graph().has_cycle()
}

/// A loose tree with a root and a certified valid ordering whose first edge
/// contains the root.
///
/// Every edge other than the first meets the earlier edges in its *attach*
/// vertex; its other two vertices are that vertex's children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct LooseTree {
    graph: Hypergraph3,
    ordering: Vec<usize>,
    root: Vertex,
    attach: Vec<Vertex>,
    parent_edge: Vec<Option<usize>>,
    up_edge: Vec<Option<usize>>,
    child_edges: Vec<Vec<usize>>,
}

impl LooseTree {
    /// Roots a loose tree at `root`, ordering edges breadth-first from it.
    pub fn new(graph: Hypergraph3, root: Vertex) -> Result<Self, TreeError> {
        if root >= graph.n() {
            return Err(GraphError::VertexOutOfRange { v: root, n: graph.n() }.into());
        }
        if !is_loose_tree(&graph) {
            return Err(TreeError::NotATree);
        }
        let mut seen_edge = vec![false; graph.edge_count()];
        let mut ordering = Vec::with_capacity(graph.edge_count());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &e in graph.incident_edges(v) {
                if seen_edge[e] {
                    continue;
                }
                seen_edge[e] = true;
                ordering.push(e);
                queue.extend(graph.edge(e).into_iter().filter(|&w| w != v));
            }
        }
        Self::with_ordering(graph, ordering, root)
    }

    /// Uses `ordering` as given after checking it is valid and starts at `root`.
    pub fn with_ordering(graph: Hypergraph3, ordering: Vec<usize>, root: Vertex) -> Result<Self, TreeError> {
        let (n, m) = (graph.n(), graph.edge_count());
        if root >= n {
            return Err(GraphError::VertexOutOfRange { v: root, n }.into());
        }
        if n != 2 * m + 1 || ordering.len() != m {
            return Err(TreeError::NotATree);
        }
        let mut up_edge = vec![None; n];
        let mut covered = vec![false; n];
        let mut attach = vec![root; m];
        let mut parent_edge = vec![None; m];
        let mut child_edges = vec![Vec::new(); n];
        let mut placed = vec![false; m];
        covered[root] = true;
        for (pos, &e) in ordering.iter().enumerate() {
            if e >= m || placed[e] {
                return Err(TreeError::InvalidOrdering(pos));
            }
            placed[e] = true;
            let verts = graph.edge(e);
            let old: Vec<Vertex> = verts.iter().copied().filter(|&v| covered[v]).collect();
            if pos == 0 && !verts.contains(&root) {
                return Err(TreeError::RootNotInFirstEdge(root));
            }
            if old.len() != 1 {
                return Err(TreeError::InvalidOrdering(pos));
            }
            let a = old[0];
            attach[e] = a;
            parent_edge[e] = if pos == 0 { None } else { up_edge[a].or(Some(ordering[0])) };
            child_edges[a].push(e);
            for v in verts {
                if v != a {
                    covered[v] = true;
                    up_edge[v] = Some(e);
                }
            }
        }
        Ok(Self { graph, ordering, root, attach, parent_edge, up_edge, child_edges })
    }

    /// Recognises `h` and roots it at the first vertex of its first edge
    /// (vertex 0 for the edgeless single-vertex tree).
    pub fn from_graph(h: Hypergraph3) -> Result<Self, TreeError> {
        let ordering = find_valid_ordering(&h).ok_or(TreeError::NotATree)?;
        let root = ordering.first().map_or(0, |&e| h.edge(e)[0]);
        Self::with_ordering(h, ordering, root)
    }

    pub fn graph(&self) -> &Hypergraph3 {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.graph.edge(e)
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    /// The earlier edge holding this edge's attach vertex.
    pub fn parent_edge(&self, e: usize) -> Option<usize> {
        self.parent_edge[e]
    }

    /// The vertex `e` shares with earlier edges (the root for the first edge).
    pub fn attach_vertex(&self, e: usize) -> Vertex {
        self.attach[e]
    }

    /// The two vertices of `e` other than its attach vertex, ascending.
    pub fn children_of_edge(&self, e: usize) -> [Vertex; 2] {
        let a = self.attach[e];
        let mut out = [0; 2];
        let mut k = 0;
        for v in self.graph.edge(e) {
            if v != a {
                out[k] = v;
                k += 1;
            }
        }
        out
    }

    /// Edges attached at `v`, i.e. where `v` is the parent.
    pub fn child_edges(&self, v: Vertex) -> &[usize] {
        &self.child_edges[v]
    }

    /// The edge in which `v` is a child; `None` for the root.
    pub fn up_edge(&self, v: Vertex) -> Option<usize> {
        self.up_edge[v]
    }

    pub fn parent_vertex(&self, v: Vertex) -> Option<Vertex> {
        self.up_edge[v].map(|e| self.attach[e])
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.graph.incident_edges(v).len()
    }

    pub fn max_degree(&self) -> usize {
        self.graph.max_vertex_degree()
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_vertices(&self) -> Vec<Vertex> {
        let mut out = vec![self.root];
        for &e in &self.ordering {
            out.extend(self.children_of_edge(e));
        }
        out
    }

    /// Number of vertices in the subtree below each vertex (itself included).
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1; self.n()];
        for &e in self.ordering.iter().rev() {
            let [a, b] = self.children_of_edge(e);
            size[self.attach[e]] += size[a] + size[b];
        }
        size
    }

    /// The same tree rooted elsewhere.
    pub fn rerooted(&self, root: Vertex) -> Result<Self, TreeError> {
        Self::new(self.graph.clone(), root)
    }

    /// Serialises in the `LT v1` text format.
    pub fn to_lt(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n(), self.edge_count(), self.root);
        for &e in &self.ordering {
            let [a, b, c] = self.graph.edge(e);
            let _ = writeln!(s, "{a} {b} {c}");
        }
        s
    }

    /// Parses `LT v1`; the listed edge order must be a valid ordering from the root.
    pub fn from_lt(text: &str) -> Result<Self, TreeError> {
        let mut lines = content_lines(text);
        let (hline, header) =
            lines.next().ok_or(GraphError::Parse { line: 1, message: "missing header".into() })?;
        let nums = parse_numbers(hline, header, 3)?;
        let (n, m, root) = (nums[0], nums[1], nums[2]);
        let body: String = lines.map(|(_, l)| format!("{l}\n")).collect();
        let graph = Hypergraph3::from_h3(&format!("{n} {m}\n{body}"))?;
        Self::with_ordering(graph, (0..m).collect(), root)
    }
}

/// JSON form: vertex count, root and the edges in their valid ordering.
#[derive(Serialize, Deserialize)]
struct TreeRepr {
    n: usize,
    root: Vertex,
    edges: Vec<Edge>,
}

impl From<LooseTree> for TreeRepr {
    fn from(t: LooseTree) -> Self {
        let edges = t.ordering.iter().map(|&e| t.graph.edge(e)).collect();
        Self { n: t.n(), root: t.root, edges }
    }
}

impl TryFrom<TreeRepr> for LooseTree {
    type Error = TreeError;

    fn try_from(r: TreeRepr) -> Result<Self, TreeError> {
        let m = r.edges.len();
        Self::with_ordering(Hypergraph3::new(r.n, r.edges)?, (0..m).collect(), r.root)
    }
}

/// Per-vertex layers (1-based) and the deepest layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layering {
    pub layer: Vec<usize>,
    pub depth: usize,
}

/// The root is layer 1; the children of an edge attached at `u` get layers
/// `layer(u)+1` and `layer(u)+2`, the lower label taking the lower layer.
pub fn layering(t: &LooseTree) -> Layering {
    let mut layer = vec![0; t.n()];
    layer[t.root()] = 1;
    for &e in t.ordering() {
        let base = layer[t.attach_vertex(e)];
        let [a, b] = t.children_of_edge(e);
        layer[a] = base + 1;
        layer[b] = base + 2;
    }
    let depth = layer.iter().copied().max().unwrap_or(0);
    Layering { layer, depth }
}

/// Checks the layering invariants against `t`.
pub fn is_valid_layering(t: &LooseTree, l: &Layering) -> bool {
    if l.layer.len() != t.n() || l.layer[t.root()] != 1 {
        return false;
    }
    if (0..t.n()).any(|v| v != t.root() && l.layer[v] <= 1) {
        return false;
    }
    t.ordering().iter().all(|&e| {
        let u = l.layer[t.attach_vertex(e)];
        let [a, b] = t.children_of_edge(e);
        let mut got = [l.layer[a], l.layer[b]];
        got.sort_unstable();
        got == [u + 1, u + 2]
    }) && l.depth == l.layer.iter().copied().max().unwrap_or(0)
}

/// Colour `(layer - 1) mod 3 + 1`.
pub fn three_coloring(l: &Layering) -> Vec<u8> {
    l.layer.iter().map(|&x| ((x - 1) % 3 + 1) as u8).collect()
}

/// The binary loose tree with `levels` levels (root counted as level 1).
/// Vertices are labelled breadth-first from the root `0`.
pub fn binary_loose_tree(levels: usize) -> Result<LooseTree, TreeError> {
    if levels < 2 {
        return Err(TreeError::TooFewLevels(levels));
    }
    let mut edges = Vec::new();
    let mut next = 1;
    let mut queue = VecDeque::from([(0usize, levels)]);
    while let Some((v, rem)) = queue.pop_front() {
        if rem < 2 {
            continue;
        }
        edges.push([v, next, next + 1]);
        queue.push_back((next, rem - 1));
        queue.push_back((next + 1, rem - 1));
        next += 2;
    }
    LooseTree::new(Hypergraph3::new(next, edges)?, 0)
}

/// Loose path `{0,1,2}, {2,3,4}, ...` on `n` vertices, rooted at 0.
pub fn loose_path(n: usize) -> Result<LooseTree, TreeError> {
    if n % 2 == 0 || n < 3 {
        return Err(TreeError::EvenOrder(n));
    }
    let edges = (0..n / 2).map(|i| [2 * i, 2 * i + 1, 2 * i + 2]);
    LooseTree::new(Hypergraph3::new(n, edges)?, 0)
}

/// Random loose tree on `n` vertices with maximum degree at most `max_degree`.
/// Each new edge attaches at a vertex drawn uniformly from those of degree
/// below the cap.
pub fn random_loose_tree(n: usize, max_degree: usize, seed: u64) -> Result<LooseTree, TreeError> {
    if n % 2 == 0 || n < 3 {
        return Err(TreeError::EvenOrder(n));
    }
    if max_degree < 2 {
        return Err(TreeError::DegreeTooSmall(max_degree));
    }
    let mut rng = seeded(seed);
    let mut degree = vec![0usize; n];
    let mut open: Vec<Vertex> = vec![0, 1, 2];
    let mut edges = vec![[0, 1, 2]];
    degree[..3].fill(1);
    let mut next = 3;
    while next < n {
        let i = rng.gen_range(0..open.len());
        let v = open[i];
        edges.push([v, next, next + 1]);
        degree[v] += 1;
        if degree[v] >= max_degree {
            open.swap_remove(i);
        }
        degree[next] = 1;
        degree[next + 1] = 1;
        open.extend([next, next + 1]);
        next += 2;
    }
    LooseTree::new(Hypergraph3::new(n, edges)?, 0)
}

/// A subtree of a larger tree, listed by edge indices of that tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub root: Vertex,
    /// Edge indices of the source tree, in breadth-first order from `root`.
    pub edges: Vec<usize>,
    pub vertices: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceDecomposition {
    /// The piece holding the tree's root comes first; every later piece is
    /// rooted at a leaf of an earlier one.
    pub pieces: Vec<Piece>,
    /// Smallest and largest size among the pieces that were split off
    /// (the root piece excluded); `None` if nothing was split.
    pub bounds: Option<(usize, usize)>,
    pub target: usize,
    pub max_degree: usize,
}

/// Splits `t` into pieces of between `target` and `2·Δ·target` vertices,
/// except the piece containing the root, which ends with at most that many.
pub fn decompose(t: &LooseTree, target: usize) -> PieceDecomposition {
    let target = target.max(1);
    let delta = t.max_degree().max(1);
    let n = t.n();
    let mut alive = vec![true; t.edge_count()];
    let mut split: Vec<Piece> = Vec::new();
    loop {
        let size = alive_subtree_sizes(t, &alive);
        if size[t.root()] <= 2 * delta * target {
            break;
        }
        let mut v = t.root();
        loop {
            let best = t
                .child_edges(v)
                .iter()
                .filter(|&&e| alive[e])
                .flat_map(|&e| t.children_of_edge(e))
                .filter(|&c| size[c] >= target)
                .max_by_key(|&c| (size[c], std::cmp::Reverse(c)));
            match best {
                Some(c) => v = c,
                None => break,
            }
        }
        let piece = collect_piece(t, v, &mut alive);
        split.push(piece);
    }
    let mut root_alive = alive.clone();
    let root_piece = collect_piece(t, t.root(), &mut root_alive);
    let bounds = split.iter().map(|p| p.vertices.len()).fold(None, |acc: Option<(usize, usize)>, s| {
        Some(acc.map_or((s, s), |(lo, hi)| (lo.min(s), hi.max(s))))
    });
    let mut pieces = vec![root_piece];
    pieces.extend(split.into_iter().rev());
    debug_assert!(pieces.iter().map(|p| p.edges.len()).sum::<usize>() == t.edge_count() || n == 1);
    PieceDecomposition { pieces, bounds, target, max_degree: delta }
}

fn alive_subtree_sizes(t: &LooseTree, alive: &[bool]) -> Vec<usize> {
    let mut size = vec![1; t.n()];
    for &e in t.ordering().iter().rev() {
        if alive[e] {
            let [a, b] = t.children_of_edge(e);
            size[t.attach_vertex(e)] += size[a] + size[b];
        }
    }
    size
}

/// Removes the live subtree under `v` and returns it as a piece.
fn collect_piece(t: &LooseTree, v: Vertex, alive: &mut [bool]) -> Piece {
    let mut edges = Vec::new();
    let mut vertices = vec![v];
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        for &e in t.child_edges(u) {
            if !alive[e] {
                continue;
            }
            alive[e] = false;
            edges.push(e);
            for c in t.children_of_edge(e) {
                vertices.push(c);
                queue.push_back(c);
            }
        }
    }
    Piece { root: v, edges, vertices }
}

/// Checks the decomposition invariants: edge partition, earlier-leaf roots and
/// size bounds for split-off pieces.
pub fn check_decomposition(t: &LooseTree, d: &PieceDecomposition) -> Result<(), String> {
    let mut owner = vec![usize::MAX; t.edge_count()];
    for (i, p) in d.pieces.iter().enumerate() {
        for &e in &p.edges {
            if owner[e] != usize::MAX {
                return Err(format!("edge {e} in pieces {} and {i}", owner[e]));
            }
            owner[e] = i;
        }
    }
    if let Some(e) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(format!("edge {e} in no piece"));
    }
    if d.pieces.first().map(|p| p.root) != Some(t.root()) {
        return Err("first piece is not rooted at the tree root".into());
    }
    let hi = 2 * d.max_degree * d.target;
    for (i, p) in d.pieces.iter().enumerate().skip(1) {
        let size = p.vertices.len();
        if size < d.target || size > hi {
            return Err(format!("piece {i} has {size} vertices, outside [{}, {hi}]", d.target));
        }
        let host = d.pieces[..i].iter().find(|q| q.vertices.contains(&p.root));
        let Some(host) = host else {
            return Err(format!("root of piece {i} is not in an earlier piece"));
        };
        let deg = host.edges.iter().filter(|&&e| t.edge(e).contains(&p.root)).count();
        if deg != 1 {
            return Err(format!("root of piece {i} has degree {deg} in its earlier piece"));
        }
    }
    if d.pieces[0].vertices.len() > hi.max(d.target) && d.pieces.len() > 1 {
        return Err("root piece too large".into());
    }
    Ok(())
}

/// A tree cut down from a larger one, relabelled to `0..n`.
#[derive(Clone, Debug)]
pub struct SubTree {
    pub tree: LooseTree,
    /// `vertex_map[new] = old`.
    pub vertex_map: Vec<Vertex>,
}

/// Removes `k` leaf edges one at a time, each time the lowest-indexed edge
/// whose two children are leaves. The root is never removed.
pub fn remove_leaf_edges(t: &LooseTree, k: usize) -> Result<SubTree, TreeError> {
    let m = t.edge_count();
    if m == 0 || k > m - 1 {
        return Err(TreeError::TooManyRemovals { k, m });
    }
    let mut alive = vec![true; m];
    let mut live_children: Vec<usize> = (0..t.n()).map(|v| t.child_edges(v).len()).collect();
    let mut leafy: BTreeSet<usize> = (0..m)
        .filter(|&e| t.children_of_edge(e).iter().all(|&c| live_children[c] == 0))
        .collect();
    for _ in 0..k {
        let e = leafy.pop_first().expect("a tree with an edge has a leaf edge");
        alive[e] = false;
        let a = t.attach_vertex(e);
        live_children[a] -= 1;
        if live_children[a] == 0 {
            if let Some(up) = t.up_edge(a) {
                if t.children_of_edge(up).iter().all(|&c| live_children[c] == 0) {
                    leafy.insert(up);
                }
            }
        }
    }
    let mut keep = vec![false; t.n()];
    keep[t.root()] = true;
    for e in (0..m).filter(|&e| alive[e]) {
        for v in t.edge(e) {
            keep[v] = true;
        }
    }
    let vertex_map: Vec<Vertex> = (0..t.n()).filter(|&v| keep[v]).collect();
    let mut new_id = vec![usize::MAX; t.n()];
    for (i, &v) in vertex_map.iter().enumerate() {
        new_id[v] = i;
    }
    let edges = (0..m).filter(|&e| alive[e]).map(|e| t.edge(e).map(|v| new_id[v]));
    let graph = Hypergraph3::new(vertex_map.len(), edges)?;
    let tree = LooseTree::new(graph, new_id[t.root()])?;
    Ok(SubTree { tree, vertex_map })
}

/// Edges below `v`: every edge reached from `v` through its child edges.
pub fn descendant_edges(t: &LooseTree, v: Vertex) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for &e in t.child_edges(u) {
            out.push(e);
            stack.extend(t.children_of_edge(e));
        }
    }
    out
}

/// The tree spanned by `edges` (which must form a loose tree containing
/// `root`), relabelled to `0..n` and rooted at `root`.
pub fn induced_subtree(t: &LooseTree, edges: &[usize], root: Vertex) -> Result<SubTree, TreeError> {
    let mut keep = vec![false; t.n()];
    keep[root] = true;
    for &e in edges {
        for v in t.edge(e) {
            keep[v] = true;
        }
    }
    let vertex_map: Vec<Vertex> = (0..t.n()).filter(|&v| keep[v]).collect();
    let mut new_id = vec![usize::MAX; t.n()];
    for (i, &v) in vertex_map.iter().enumerate() {
        new_id[v] = i;
    }
    let graph = Hypergraph3::new(vertex_map.len(), edges.iter().map(|&e| t.edge(e).map(|v| new_id[v])))?;
    let tree = LooseTree::new(graph, new_id[root])?;
    Ok(SubTree { tree, vertex_map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path_edges(n: usize) -> Vec<[usize; 3]> {
        (0..n / 2).map(|i| [2 * i, 2 * i + 1, 2 * i + 2]).collect()
    }

    #[test]
    fn subtrees_split_the_edge_set() {
        let t = binary_loose_tree(3).unwrap();
        let x = t.children_of_edge(t.ordering()[0])[0];
        let below = descendant_edges(&t, x);
        assert_eq!(below.len(), 1);
        let sub = induced_subtree(&t, &below, x).unwrap();
        assert_eq!(sub.tree.n(), 3);
        assert_eq!(sub.vertex_map[sub.tree.root()], x);
        let rest: Vec<usize> = (0..t.edge_count()).filter(|e| !below.contains(e)).collect();
        let other = induced_subtree(&t, &rest, x).unwrap();
        assert_eq!(other.tree.n() + sub.tree.n(), t.n() + 1);
        assert_eq!(descendant_edges(&t, t.root()).len(), t.edge_count());
        let single = induced_subtree(&t, &[], x).unwrap();
        assert_eq!(single.tree.n(), 1);
    }

    #[test]
    fn recognises_paths_and_rejects_k4() {
        let p = Hypergraph3::new(9, path_edges(9)).unwrap();
        assert_eq!(find_valid_ordering(&p), Some(vec![0, 1, 2, 3]));
        assert!(is_loose_tree(&p));
        assert!(!has_berge_cycle(&p));
        let k4 = Hypergraph3::complete(4);
        assert_eq!(find_valid_ordering(&k4), None);
        assert!(!is_loose_tree(&k4));
        let twin = Hypergraph3::new(4, [[0, 1, 2], [1, 2, 3]]).unwrap();
        assert!(!is_loose_tree(&twin));
        assert!(has_berge_cycle(&twin));
        assert_eq!(find_valid_ordering(&Hypergraph3::empty(1)), Some(vec![]));
        assert!(is_loose_tree(&Hypergraph3::empty(1)));
        assert!(!is_loose_tree(&Hypergraph3::empty(0)));
    }

    #[test]
    fn branching_tree_orders_from_any_start() {
        // 1-based {1,2,3},{1,4,5},{4,6,7},{5,8,9}
        let edges = [[0, 1, 2], [0, 3, 4], [3, 5, 6], [4, 7, 8]];
        for start in 0..4 {
            let mut es = edges.to_vec();
            es.rotate_left(start);
            let h = Hypergraph3::new(9, es).unwrap();
            let ord = find_valid_ordering(&h).unwrap();
            assert_eq!(ord[0], 0);
            assert!(LooseTree::with_ordering(h.clone(), ord, h.edge(0)[0]).is_ok());
        }
    }

    #[test]
    fn path_layering_and_colours() {
        let t = loose_path(5).unwrap();
        let l = layering(&t);
        assert_eq!(l.layer, vec![1, 2, 3, 4, 5]);
        assert_eq!(three_coloring(&l), vec![1, 2, 3, 1, 2]);
        let single = loose_path(3).unwrap();
        assert_eq!(three_coloring(&layering(&single)), vec![1, 2, 3]);
    }

    #[test]
    fn binary_tree_shapes() {
        let b2 = binary_loose_tree(2).unwrap();
        assert_eq!((b2.n(), b2.edge_count()), (3, 1));
        let b4 = binary_loose_tree(4).unwrap();
        assert_eq!((b4.n(), b4.edge_count()), (15, 7));
        let l = layering(&b4);
        assert_eq!(l.depth, 7);
        assert!(is_valid_layering(&b4, &l));
        assert!(b4.max_degree() <= 2);
        for levels in 2..12 {
            assert_eq!(binary_loose_tree(levels).unwrap().n(), (1 << levels) - 1);
        }
        assert!(binary_loose_tree(1).is_err());
    }

    #[test]
    fn generators_validate_inputs() {
        assert_eq!(loose_path(5).unwrap().graph().edges(), &[[0, 1, 2], [2, 3, 4]]);
        assert!(loose_path(4).is_err());
        assert!(random_loose_tree(21, 1, 0).is_err());
        assert!(random_loose_tree(20, 3, 0).is_err());
        let a = random_loose_tree(21, 3, 9).unwrap();
        let b = random_loose_tree(21, 3, 9).unwrap();
        assert_eq!(a.graph().edges(), b.graph().edges());
        assert!(is_loose_tree(a.graph()));
        assert!(a.max_degree() <= 3);
    }

    #[test]
    fn lt_round_trip() {
        let t = random_loose_tree(31, 4, 5).unwrap().rerooted(7).unwrap();
        let back = LooseTree::from_lt(&t.to_lt()).unwrap();
        assert_eq!(back.root(), 7);
        assert_eq!(back.n(), 31);
        assert!(LooseTree::from_lt("5 2 0\n2 3 4\n0 1 2\n").is_err());
        assert!(LooseTree::from_lt("5 2 0\n0 1 2\n2 3 4\n").is_ok());
    }

    #[test]
    fn decompose_small_tree_is_one_piece() {
        let t = loose_path(5).unwrap();
        let d = decompose(&t, 7);
        assert_eq!(d.pieces.len(), 1);
        assert_eq!(d.pieces[0].edges.len(), 2);
        assert_eq!(d.bounds, None);
    }

    #[test]
    fn decompose_path_and_binary_tree() {
        let t = loose_path(41).unwrap();
        let d = decompose(&t, 7);
        assert_eq!(d.max_degree, 2);
        check_decomposition(&t, &d).unwrap();
        let (lo, hi) = d.bounds.unwrap();
        assert!(lo >= 7 && hi <= 28);
        let b6 = binary_loose_tree(6).unwrap();
        let d = decompose(&b6, 9);
        check_decomposition(&b6, &d).unwrap();
        assert!(d.pieces.len() > 1);
    }

    #[test]
    fn leaf_removal() {
        let t = loose_path(9).unwrap();
        let s = remove_leaf_edges(&t, 1).unwrap();
        assert_eq!(s.tree.graph().edges(), loose_path(7).unwrap().graph().edges());
        assert_eq!(s.vertex_map, (0..7).collect::<Vec<_>>());
        let same = remove_leaf_edges(&t, 0).unwrap();
        assert_eq!(same.tree.graph(), t.graph());
        assert!(remove_leaf_edges(&t, 4).is_err());
    }

    fn tree_params() -> impl Strategy<Value = (usize, usize, u64)> {
        (1usize..60, 2usize..6, any::<u64>()).prop_map(|(h, d, s)| (2 * h + 1, d, s))
    }

    proptest! {
        #[test]
        fn generated_trees_are_consistent((n, delta, seed) in tree_params()) {
            let t = random_loose_tree(n, delta, seed).unwrap();
            prop_assert!(t.max_degree() <= delta);
            prop_assert!(find_valid_ordering(t.graph()).is_some());
            prop_assert!(!has_berge_cycle(t.graph()));
            let l = layering(&t);
            prop_assert!(is_valid_layering(&t, &l));
            let colours = three_coloring(&l);
            for e in t.graph().edges() {
                let mut c: Vec<u8> = e.iter().map(|&v| colours[v]).collect();
                c.sort_unstable();
                prop_assert_eq!(c, vec![1, 2, 3]);
            }
            let sizes = t.subtree_sizes();
            prop_assert_eq!(sizes[t.root()], n);
        }

        #[test]
        fn decompositions_hold_invariants((n, delta, seed) in tree_params(), target in 3usize..12) {
            let t = random_loose_tree(n, delta, seed).unwrap();
            let d = decompose(&t, target);
            prop_assert_eq!(check_decomposition(&t, &d), Ok(()));
        }

        #[test]
        fn leaf_removal_keeps_a_tree((n, delta, seed) in tree_params(), frac in 0.0f64..1.0) {
            let t = random_loose_tree(n, delta, seed).unwrap();
            let k = ((t.edge_count() - 1) as f64 * frac) as usize;
            let s = remove_leaf_edges(&t, k).unwrap();
            prop_assert!(is_loose_tree(s.tree.graph()));
            prop_assert_eq!(s.tree.edge_count(), t.edge_count() - k);
            for e in s.tree.graph().edges() {
                let old = e.map(|v| s.vertex_map[v]);
                prop_assert!(t.graph().has_edge(old[0], old[1], old[2]));
            }
            prop_assert_eq!(s.vertex_map[s.tree.root()], t.root());
        }
    }
}
