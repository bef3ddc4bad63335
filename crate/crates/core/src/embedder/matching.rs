//! Perfect matchings by exact cover.

use std::collections::HashSet;

use crate::hypergraph::{Hypergraph3, VertexMask};
use crate::loose_tree::LooseTree;

/// A set of disjoint edges (by index) covering every vertex, if one exists.
///
/// Branches on the lowest uncovered vertex and remembers covered-sets that
/// are known to be dead ends.
pub fn perfect_matching(h: &Hypergraph3) -> Option<Vec<usize>> {
    let n = h.n();
    if n % 3 != 0 {
        return None;
    }
    let mut covered = VertexMask::new(n);
    let mut chosen = Vec::with_capacity(n / 3);
    let mut dead = HashSet::new();
    search(h, &mut covered, 0, &mut chosen, &mut dead).then_some(chosen)
}

pub fn has_perfect_matching(h: &Hypergraph3) -> bool {
    perfect_matching(h).is_some()
}

/// A perfect matching of the tree's vertex set using tree edges.
pub fn tree_perfect_matching(t: &LooseTree) -> Option<Vec<usize>> {
    perfect_matching(t.graph())
}

fn search(
    h: &Hypergraph3,
    covered: &mut VertexMask,
    from: usize,
    chosen: &mut Vec<usize>,
    dead: &mut HashSet<Vec<u64>>,
) -> bool {
    let Some(v) = (from..h.n()).find(|&v| !covered.contains(v)) else {
        return true;
    };
    if dead.contains(covered.words()) {
        return false;
    }
    for &e in h.incident_edges(v) {
        let edge = h.edge(e);
        if edge.iter().any(|&w| covered.contains(w)) {
            continue;
        }
        for w in edge {
            covered.insert(w);
        }
        chosen.push(e);
        if search(h, covered, v + 1, chosen, dead) {
            return true;
        }
        chosen.pop();
        for w in edge {
            covered.remove(w);
        }
    }
    dead.insert(covered.words().to_vec());
    false
}
