//! Partial embeddings of a tree into a host.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{Hypergraph3, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingError {
    #[error("tree vertex {0} is already mapped")]
    AlreadyMapped(Vertex),
    #[error("host vertex {host} is already the image of tree vertex {holder}")]
    ImageTaken { host: Vertex, holder: Vertex },
    #[error("vertex {v} out of range ({side} side has {n})")]
    OutOfRange { v: Vertex, n: usize, side: &'static str },
    #[error("tree edge {tree:?} maps to non-edge {host:?}")]
    NonEdge { tree: [Vertex; 3], host: [Vertex; 3] },
}

/// Injective partial map from tree vertices to host vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialEmbedding {
    map: Vec<Option<Vertex>>,
    inverse: Vec<Option<Vertex>>,
    len: usize,
}

impl PartialEmbedding {
    pub fn new(tree_n: usize, host_n: usize) -> Self {
        Self { map: vec![None; tree_n], inverse: vec![None; host_n], len: 0 }
    }

    /// Builds from a total map, checking injectivity and ranges.
    pub fn from_total(map: &[Vertex], host_n: usize) -> Result<Self, EmbeddingError> {
        let mut phi = Self::new(map.len(), host_n);
        for (x, &h) in map.iter().enumerate() {
            phi.insert(x, h)?;
        }
        Ok(phi)
    }

    pub fn tree_n(&self) -> usize {
        self.map.len()
    }

    pub fn host_n(&self) -> usize {
        self.inverse.len()
    }

    pub fn get(&self, x: Vertex) -> Option<Vertex> {
        self.map.get(x).copied().flatten()
    }

    pub fn preimage(&self, h: Vertex) -> Option<Vertex> {
        self.inverse.get(h).copied().flatten()
    }

    pub fn is_used(&self, h: Vertex) -> bool {
        self.preimage(h).is_some()
    }

    pub fn insert(&mut self, x: Vertex, h: Vertex) -> Result<(), EmbeddingError> {
        if x >= self.map.len() {
            return Err(EmbeddingError::OutOfRange { v: x, n: self.map.len(), side: "tree" });
        }
        if h >= self.inverse.len() {
            return Err(EmbeddingError::OutOfRange { v: h, n: self.inverse.len(), side: "host" });
        }
        if self.map[x].is_some() {
            return Err(EmbeddingError::AlreadyMapped(x));
        }
        if let Some(holder) = self.inverse[h] {
            return Err(EmbeddingError::ImageTaken { host: h, holder });
        }
        self.map[x] = Some(h);
        self.inverse[h] = Some(x);
        self.len += 1;
        Ok(())
    }

    /// Unmaps `x`, returning its former image.
    pub fn remove(&mut self, x: Vertex) -> Option<Vertex> {
        let h = self.map.get_mut(x)?.take()?;
        self.inverse[h] = None;
        self.len -= 1;
        Some(h)
    }

    /// Number of mapped tree vertices.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_total(&self) -> bool {
        self.len == self.map.len()
    }

    /// `(tree vertex, host vertex)` pairs in tree-vertex order.
    pub fn pairs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.map.iter().enumerate().filter_map(|(x, h)| h.map(|h| (x, h)))
    }

    pub fn unused_host_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.inverse.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(h, _)| h)
    }

    /// The map as a plain vector, if total.
    pub fn to_total(&self) -> Option<Vec<Vertex>> {
        self.map.iter().copied().collect()
    }

    pub fn as_slice(&self) -> &[Option<Vertex>] {
        &self.map
    }

    /// Re-checks everything from scratch: both directions of the map agree and
    /// every tree edge whose three vertices are mapped lands on a host edge.
    pub fn verify(&self, tree: &Hypergraph3, host: &Hypergraph3) -> Result<(), EmbeddingError> {
        let mut seen = vec![None; host.n()];
        for (x, h) in self.pairs() {
            if h >= host.n() {
                return Err(EmbeddingError::OutOfRange { v: h, n: host.n(), side: "host" });
            }
            if let Some(holder) = seen[h] {
                return Err(EmbeddingError::ImageTaken { host: h, holder });
            }
            seen[h] = Some(x);
        }
        for e in tree.edges() {
            if let [Some(a), Some(b), Some(c)] = e.map(|v| self.get(v)) {
                if !host.has_edge(a, b, c) {
                    return Err(EmbeddingError::NonEdge { tree: *e, host: [a, b, c] });
                }
            }
        }
        Ok(())
    }
}

/// A total map `phi` is an embedding: injective, in range, and edge-preserving.
pub fn verify_embedding(phi: &[Vertex], tree: &Hypergraph3, host: &Hypergraph3) -> bool {
    if phi.len() != tree.n() {
        return false;
    }
    let mut used = vec![false; host.n()];
    for &h in phi {
        if h >= host.n() || used[h] {
            return false;
        }
        used[h] = true;
    }
    tree.edges().iter().all(|e| host.has_edge(phi[e[0]], phi[e[1]], phi[e[2]]))
}
