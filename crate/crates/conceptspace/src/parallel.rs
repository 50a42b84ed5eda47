//! Multi-threaded drivers.
//!
//! Per-concept work is independent and seeded by concept name, so its results
//! do not depend on the number of jobs. Embedding training with more than one
//! job updates shared vectors without synchronization and is not
//! reproducible; one job reproduces the sequential trainer exactly.

use conceptspace_core::ranker::{
    evaluate_concept, explain_concepts, summarize_levels, train_concept, ConceptLevel, ConceptOptions,
    ExplainOptions, LevelSummary, ScoreReport,
};
use conceptspace_core::sgns::{train_sequential, SgnsTrainer};
use conceptspace_core::{EmbeddingTable, NodeId, Objective, Result, SgnsConfig, Taxonomy};
use rayon::prelude::*;

/// Applies `f` to every item on up to `jobs` threads; results keep input order.
pub fn map_jobs<T, R, F>(jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

/// SGNS training where each epoch's pair stream is split into `jobs` chunks
/// trained concurrently on the shared parameters.
pub fn train_embeddings(
    objective: Objective,
    names: &[String],
    pairs: &[(NodeId, NodeId)],
    cfg: &SgnsConfig,
    jobs: usize,
) -> Result<EmbeddingTable> {
    if jobs <= 1 {
        return train_sequential(objective, names, pairs, cfg);
    }
    let trainer = SgnsTrainer::new(objective, names.len(), pairs, cfg)?;
    for epoch in 0..cfg.epochs {
        let order = trainer.epoch_order(pairs, epoch);
        let chunk = order.len().div_ceil(jobs).max(1);
        std::thread::scope(|s| {
            for (worker, part) in order.chunks(chunk).enumerate() {
                let trainer = &trainer;
                s.spawn(move || trainer.train_pairs(part, &mut trainer.worker_rng(epoch, worker)));
            }
        });
    }
    trainer.snapshot(names)
}

pub fn explain(
    taxonomy: &Taxonomy,
    table: &EmbeddingTable,
    query: &str,
    start: &str,
    opts: &ExplainOptions,
    jobs: usize,
) -> Result<ScoreReport> {
    let concepts = explain_concepts(taxonomy, table, query, start, opts)?;
    let outcomes = map_jobs(jobs, &concepts, |c| evaluate_concept(taxonomy, table, query, c, opts));
    Ok(ScoreReport::assemble(query, outcomes))
}

pub fn level_summary(
    taxonomy: &Taxonomy,
    table: &EmbeddingTable,
    embedding: &str,
    levels: &[ConceptLevel],
    opts: &ConceptOptions,
    jobs: usize,
) -> Result<Vec<LevelSummary>> {
    let flat: Vec<&str> = levels.iter().flat_map(|l| l.concepts.iter().map(String::as_str)).collect();
    let losses = map_jobs(jobs, &flat, |c| Ok(train_concept(taxonomy, table, c, &[], opts)?.best_val_loss()))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let mut rest = losses.as_slice();
    let grouped = levels
        .iter()
        .map(|l| {
            let (head, tail) = rest.split_at(l.concepts.len());
            rest = tail;
            head.to_vec()
        })
        .collect();
    summarize_levels(levels, embedding, grouped)
}
