use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("subclass cycle through concept `{0}`")]
    Cycle(String),
    #[error("taxonomy has no concepts")]
    EmptyTaxonomy,
    #[error("taxonomy has {} roots: {}", .0.len(), .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("entity `{0}` has children")]
    EntityHasChildren(String),
    #[error("`{0}` is used both as an entity and as a concept")]
    EntityIsConcept(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("`{ancestor}` is not an ancestor of `{concept}`")]
    NotAncestor { concept: String, ancestor: String },
    #[error("the root concept has no siblings")]
    RootHasNoSiblings,
    #[error("entity `{entity}` is a member of `{concept}`; margin is undefined")]
    PositiveEntity { concept: String, entity: String },
    #[error("entity `{entity}` shares no ancestor with `{concept}` (corrupt taxonomy)")]
    NoCommonAncestor { concept: String, entity: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("entity `{0}` is missing from the embedding table")]
    MissingEmbedding(String),
    #[error("duplicate entry `{0}`")]
    Duplicate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("empty pair stream")]
    EmptyPairs,
    #[error("expected a center in the {expected} space")]
    WrongSpace { expected: &'static str },

    #[error("concept `{concept}` has {found} usable positives, at least {required} required")]
    TooFewPositives { concept: String, found: usize, required: usize },
    #[error("concept `{0}` has no negatives")]
    NoNegatives(String),
    #[error("{split} split of `{concept}` cannot produce triplets")]
    EmptySplit { concept: String, split: &'static str },
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },
    #[error("report has no {0} rows for this method")]
    MissingClass(&'static str),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Diverged { .. } | Error::NonFinite(_))
    }
}
