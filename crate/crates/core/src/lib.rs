//! Loose spanning trees in 3-uniform hypergraphs: recognisers, extremal
//! constructions, cluster assignment, absorbers and embedding searches.

pub mod absorbing;
pub mod assignment;
pub mod constructions;
pub mod embedder;
pub mod embedding;
pub mod hypergraph;
pub mod loose_tree;
pub mod regularity;
pub mod rng;
pub mod scalar;

pub use num_rational::Ratio;

/// Exact densities and thresholds.
pub type Rational = Ratio<i64>;
/// Wider exact type for products of many thresholds.
pub type Rational128 = Ratio<i128>;

pub use embedding::{verify_embedding, PartialEmbedding};
pub use hypergraph::{Edge, Hypergraph3, Vertex, VertexSetTriple};
pub use loose_tree::LooseTree;
pub use scalar::Scalar;
