//! Embedding searches: exact oracle, perfect matchings and the full
//! cover / almost-embed / absorb pipeline.

mod almost;
mod exact;
mod matching;
mod pipeline;

use thiserror::Error;

pub use almost::{almost_embed, AlmostEmbedding, AlmostError, AlmostParams, AlmostStats, FirstLayerPair, Pool, Rung, RUNGS};
pub use exact::{exact_embed, twin_classes, EmbedQuery, EmbedResult, EmbedStats, EmbedStatus};
pub use matching::{has_perfect_matching, perfect_matching, tree_perfect_matching};
pub use pipeline::{heavy_subtree_root, pipeline, PipelineError, PipelineOutcome, PipelineParams, PipelineReport, Stage, StageTimings};

use crate::hypergraph::Vertex;
use crate::loose_tree::TreeError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("pin ({0}, {1}) out of range")]
    PinOutOfRange(Vertex, Vertex),
    #[error("pins are not injective at {0}")]
    PinConflict(Vertex),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

pub(crate) fn check_pins(pins: &[(Vertex, Vertex)], tree_n: usize, host_n: usize) -> Result<(), EmbedError> {
    let mut tree_seen = vec![false; tree_n];
    let mut host_seen = vec![false; host_n];
    for &(x, h) in pins {
        if x >= tree_n || h >= host_n {
            return Err(EmbedError::PinOutOfRange(x, h));
        }
        if std::mem::replace(&mut tree_seen[x], true) {
            return Err(EmbedError::PinConflict(x));
        }
        if std::mem::replace(&mut host_seen[h], true) {
            return Err(EmbedError::PinConflict(h));
        }
    }
    Ok(())
}
