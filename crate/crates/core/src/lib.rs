//! Post-hoc explanations of node embeddings through knowledge-base concepts.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every algorithmic piece:
//!
//! - [`taxonomy`]: a rooted concept DAG over entity leaves with membership,
//!   ancestor-distance and margin queries.
//! - [`graph`] and [`sgns`]: truncated random walks, context pairs and
//!   skip-gram with negative sampling (DeepWalk and first-order LINE).
//! - [`sampler`]: per-concept datasets with margin-stratified negatives and
//!   the two-stage triplet draw.
//! - [`space`]: centroid scoring in the original space (SAS) and learned
//!   per-concept linear projections trained with a margin triplet loss (CSD).
//! - [`ranker`]: per-query concept rankings and hierarchy-level loss summaries.
//!
//! File formats, the command-line tool and multi-threaded drivers live in the
//! `conceptspace` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod embedding;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod ranker;
pub mod sampler;
pub mod sgns;
pub mod space;
pub mod synth;
pub mod taxonomy;

pub mod seed;

pub use embedding::EmbeddingTable;
pub use error::{Error, Result};
pub use graph::{Graph, NodeId, WalkCorpus};
pub use linalg::Matrix;
pub use ranker::{
    ConceptLevel, ExplainOptions, LevelSummary, Method, ScoreReport, ScoreRow,
};
pub use sampler::{ConceptDataset, DatasetSpec, SplitKind, Triplet};
pub use sgns::{Objective, SgnsConfig};
pub use space::{ConceptCenter, ConceptSpace, EpochStats, Space, TrainingConfig};
pub use taxonomy::{ConceptId, EntityId, Margin, Predicate, Taxonomy, TaxonomyBuilder};
