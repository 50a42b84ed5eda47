//! Query explanations and hierarchy-level summaries.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::sampler::{ConceptDataset, DatasetSpec};
use crate::seed;
use crate::space::{csd_score, sas_center, sas_score, train_concept_space, ConceptSpace, TrainingConfig};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Sas,
    Csd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sas => "SAS",
            Method::Csd => "CSD",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "sas" => Ok(Method::Sas),
            "csd" => Ok(Method::Csd),
            _ => Err(()),
        }
    }
}

/// Settings shared by every per-concept job.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConceptOptions {
    /// The `seed` field is replaced by a per-concept sub-seed of `seed` below.
    pub training: TrainingConfig,
    pub negative_scope: Option<String>,
    pub seed: u64,
}

impl ConceptOptions {
    /// Dataset spec and training config for `concept`. Seeds depend on the
    /// concept name, not on its position in a list.
    pub fn for_concept(&self, concept: &str, excluded: &[String]) -> (DatasetSpec, TrainingConfig) {
        let base = seed::derive(self.seed, seed::tag(concept));
        let spec = DatasetSpec {
            excluded: excluded.to_vec(),
            negative_scope: self.negative_scope.clone(),
            seed: seed::derive(base, 0),
        };
        let training = TrainingConfig { seed: seed::derive(base, 1), ..self.training.clone() };
        (spec, training)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainOptions {
    pub concept: ConceptOptions,
    /// Cap on the number of siblings of the start concept.
    pub sibling_cap: Option<usize>,
    /// Explicit concept list replacing the start concept and its siblings.
    pub concepts: Option<Vec<String>>,
    pub methods: Vec<Method>,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        ExplainOptions {
            concept: ConceptOptions::default(),
            sibling_cap: None,
            concepts: None,
            methods: alloc::vec![Method::Sas, Method::Csd],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub concept: String,
    pub method: Method,
    pub score: f64,
    pub applicable: bool,
    /// 1-based position within the method.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptFailure {
    pub concept: String,
    pub method: Method,
    pub error: Error,
}

/// Per-concept result of [`evaluate_concept`].
#[derive(Debug, Clone)]
pub struct ConceptOutcome {
    pub concept: String,
    pub applicable: bool,
    pub sas: Option<Result<f64>>,
    pub csd: Option<Result<(f64, ConceptSpace)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub query: String,
    /// SAS rows then CSD rows, each ascending by score, ties by concept.
    pub rows: Vec<ScoreRow>,
    pub failures: Vec<ConceptFailure>,
}

impl ScoreReport {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &ScoreRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// Ranks per-concept outcomes into a report.
    pub fn assemble(query: &str, outcomes: Vec<ConceptOutcome>) -> ScoreReport {
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for o in outcomes {
            let mut push = |method, result: Result<f64>| match result {
                Ok(score) => rows.push(ScoreRow {
                    concept: o.concept.clone(),
                    method,
                    score,
                    applicable: o.applicable,
                    rank: 0,
                }),
                Err(error) => failures.push(ConceptFailure { concept: o.concept.clone(), method, error }),
            };
            if let Some(r) = o.sas {
                push(Method::Sas, r);
            }
            if let Some(r) = o.csd {
                push(Method::Csd, r.map(|(score, _)| score));
            }
        }
        rows.sort_by(|a, b| {
            a.method
                .cmp(&b.method)
                .then(a.score.total_cmp(&b.score))
                .then_with(|| a.concept.cmp(&b.concept))
        });
        let mut previous = None;
        let mut rank = 0;
        for row in &mut rows {
            if previous != Some(row.method) {
                previous = Some(row.method);
                rank = 0;
            }
            rank += 1;
            row.rank = rank;
        }
        ScoreReport { query: query.to_string(), rows, failures }
    }
}

/// The start concept followed by its siblings (up to `cap`); just the start
/// concept when it is the root.
pub fn select_concepts(taxonomy: &Taxonomy, start: &str, cap: Option<usize>) -> Result<Vec<String>> {
    let c = taxonomy.concept(start)?;
    let mut out = alloc::vec![start.to_string()];
    if c != taxonomy.root() {
        out.extend(taxonomy.siblings(c, cap)?.into_iter().map(|s| taxonomy.concept_name(s).to_string()));
    }
    Ok(out)
}

/// Scores `query` against one concept with the requested methods. The query is
/// excluded from the concept's dataset, so it never shapes the center or the
/// training triplets.
pub fn evaluate_concept(
    taxonomy: &Taxonomy,
    table: &EmbeddingTable,
    query: &str,
    concept: &str,
    opts: &ExplainOptions,
) -> ConceptOutcome {
    let applicable = match (taxonomy.concept(concept), taxonomy.entity(query)) {
        (Ok(c), Ok(e)) => taxonomy.contains(c, e),
        _ => false,
    };
    let want = |m| opts.methods.contains(&m);
    let excluded = [query.to_string()];
    let (spec, training) = opts.concept.for_concept(concept, &excluded);
    let q = table.vector(query);
    let dataset = ConceptDataset::build_filtered(taxonomy, concept, &spec, |e| table.contains(e));

    let sas = want(Method::Sas).then(|| {
        let ds = dataset.as_ref().map_err(Clone::clone)?;
        let center = sas_center(table, concept, &ds.positives_train)?;
        sas_score(&center, q.clone()?)
    });
    let csd = want(Method::Csd).then(|| {
        let ds = dataset.as_ref().map_err(Clone::clone)?;
        let space = train_concept_space(table, ds, &training)?;
        let score = csd_score(&space, q.clone()?)?;
        Ok((score, space))
    });
    ConceptOutcome { concept: concept.to_string(), applicable, sas, csd }
}

/// Scores the start concept and its siblings (or `opts.concepts`) for `query`.
/// Per-concept failures land in [`ScoreReport::failures`].
pub fn explain(
    taxonomy: &Taxonomy,
    table: &EmbeddingTable,
    query: &str,
    start: &str,
    opts: &ExplainOptions,
) -> Result<ScoreReport> {
    let concepts = explain_concepts(taxonomy, table, query, start, opts)?;
    let outcomes = concepts
        .iter()
        .map(|c| evaluate_concept(taxonomy, table, query, c, opts))
        .collect();
    Ok(ScoreReport::assemble(query, outcomes))
}

/// Validates the query and resolves the concept list [`explain`] works on.
pub fn explain_concepts(
    taxonomy: &Taxonomy,
    table: &EmbeddingTable,
    query: &str,
    start: &str,
    opts: &ExplainOptions,
) -> Result<Vec<String>> {
    table.vector(query)?;
    match &opts.concepts {
        Some(list) => Ok(list.clone()),
        None => select_concepts(taxonomy, start, opts.sibling_cap),
    }
}

/// `min(non-applicable scores) − max(applicable scores)` for one method;
/// positive exactly when the ranking separates the two classes.
pub fn separation_gap(report: &ScoreReport, method: Method) -> Result<f64> {
    let mut max_applicable = None::<f64>;
    let mut min_other = None::<f64>;
    for row in report.rows_for(method) {
        if row.applicable {
            max_applicable = Some(max_applicable.map_or(row.score, |m| m.max(row.score)));
        } else {
            min_other = Some(min_other.map_or(row.score, |m| m.min(row.score)));
        }
    }
    let applicable = max_applicable.ok_or(Error::MissingClass("applicable"))?;
    let other = min_other.ok_or(Error::MissingClass("non-applicable"))?;
    Ok(other - applicable)
}

/// Concepts sharing a depth below the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptLevel {
    pub level: u32,
    pub concepts: Vec<String>,
}

/// Groups concepts by their hop distance from the root, shallowest first.
pub fn group_by_level(taxonomy: &Taxonomy, concepts: &[String]) -> Result<Vec<ConceptLevel>> {
    let mut levels: alloc::collections::BTreeMap<u32, Vec<String>> = Default::default();
    for name in concepts {
        let depth = taxonomy.depth(taxonomy.concept(name)?);
        levels.entry(depth).or_default().push(name.clone());
    }
    Ok(levels.into_iter().map(|(level, concepts)| ConceptLevel { level, concepts }).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub level: u32,
    /// Label of the embedding the concepts were trained on.
    pub embedding: String,
    pub concepts: Vec<String>,
    /// Best validation loss per concept, aligned with `concepts`.
    pub val_losses: Vec<f64>,
    pub mean_val_loss: f64,
}

/// Trains one concept with nothing held out and returns its space.
pub fn train_concept(
    taxonomy: &Taxonomy,
    table: &EmbeddingTable,
    concept: &str,
    excluded: &[String],
    opts: &ConceptOptions,
) -> Result<ConceptSpace> {
    let (spec, training) = opts.for_concept(concept, excluded);
    let ds = ConceptDataset::build_filtered(taxonomy, concept, &spec, |e| table.contains(e))?;
    train_concept_space(table, &ds, &training)
}

/// Combines per-concept best validation losses (aligned with `levels`) into
/// level means.
pub fn summarize_levels(
    levels: &[ConceptLevel],
    embedding: &str,
    losses: Vec<Vec<f64>>,
) -> Result<Vec<LevelSummary>> {
    levels
        .iter()
        .zip(losses)
        .map(|(lvl, val_losses)| {
            if lvl.level == 0 {
                return Err(Error::InvalidParameter("levels start at 1 (the root has no negatives)"));
            }
            if val_losses.is_empty() || val_losses.len() != lvl.concepts.len() {
                return Err(Error::InvalidParameter("each level needs one loss per concept"));
            }
            let mean = val_losses.iter().sum::<f64>() / val_losses.len() as f64;
            Ok(LevelSummary {
                level: lvl.level,
                embedding: embedding.to_string(),
                concepts: lvl.concepts.clone(),
                val_losses,
                mean_val_loss: mean,
            })
        })
        .collect()
}

/// Mean best validation loss per level; any concept failure aborts.
pub fn level_summary(
    taxonomy: &Taxonomy,
    table: &EmbeddingTable,
    embedding: &str,
    levels: &[ConceptLevel],
    opts: &ConceptOptions,
) -> Result<Vec<LevelSummary>> {
    let losses = levels
        .iter()
        .map(|lvl| {
            lvl.concepts
                .iter()
                .map(|c| Ok(train_concept(taxonomy, table, c, &[], opts)?.best_val_loss()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    summarize_levels(levels, embedding, losses)
}
