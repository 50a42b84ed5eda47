//! Per-concept training data: positives, margin-stratified negatives, the
//! 80/20 entity split and the two-stage triplet draw.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;
use crate::taxonomy::{ConceptId, Margin, Taxonomy};

/// Smallest number of usable positives a concept needs.
pub const MIN_POSITIVES: usize = 4;

/// Default number of training triplets per concept.
pub const DEFAULT_TRIPLETS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Train,
    Validation,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Validation => "validation",
        }
    }
}

/// How to assemble a [`ConceptDataset`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSpec {
    /// Entities held out of every set (query entities).
    pub excluded: Vec<String>,
    /// Ancestor bounding the negative candidates; the root when `None`.
    pub negative_scope: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptDataset {
    pub concept: String,
    pub positives_train: Vec<String>,
    pub positives_val: Vec<String>,
    pub negatives_train: BTreeMap<Margin, Vec<String>>,
    pub negatives_val: BTreeMap<Margin, Vec<String>>,
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub anchor: String,
    pub positive: String,
    pub negative: String,
    pub margin: Margin,
}

/// Validation share of a set of `n`: 20% rounded down, at least one when `n ≥ 2`.
pub fn validation_size(n: usize) -> usize {
    if n >= 2 {
        (n / 5).max(1)
    } else {
        0
    }
}

/// Validation share of `n ≥ MIN_POSITIVES` positives: as [`validation_size`]
/// but at least two, the fewest that can form an anchor/positive pair.
pub fn positive_validation_size(n: usize) -> usize {
    if n >= MIN_POSITIVES {
        validation_size(n).max(2)
    } else {
        validation_size(n)
    }
}

fn split(mut items: Vec<String>, val_size: usize, rng: &mut impl Rng) -> (Vec<String>, Vec<String>) {
    items.shuffle(rng);
    let train = items.split_off(val_size);
    let (mut train, mut val) = (train, items);
    train.sort();
    val.sort();
    (train, val)
}

impl ConceptDataset {
    /// Uses every taxonomy entity.
    pub fn build(taxonomy: &Taxonomy, concept: &str, spec: &DatasetSpec) -> Result<Self> {
        Self::build_filtered(taxonomy, concept, spec, |_| true)
    }

    /// Like [`build`](Self::build), restricted to entities for which `usable`
    /// holds (for instance those that have an embedding).
    pub fn build_filtered(
        taxonomy: &Taxonomy,
        concept: &str,
        spec: &DatasetSpec,
        usable: impl Fn(&str) -> bool,
    ) -> Result<Self> {
        let c = taxonomy.concept(concept)?;
        let scope = match &spec.negative_scope {
            Some(name) => {
                let s = taxonomy.concept(name)?;
                taxonomy.concept_distance(c, s)?;
                s
            }
            None => taxonomy.root(),
        };

        let n = taxonomy.num_entities();
        let mut excluded = vec![false; n];
        for name in &spec.excluded {
            if let Ok(e) = taxonomy.entity(name) {
                excluded[e.index()] = true;
            }
        }
        let keep = |e: crate::taxonomy::EntityId| {
            !excluded[e.index()] && usable(taxonomy.entity_name(e))
        };

        let positive_ids = taxonomy.entities_under(c);
        let mut is_positive = vec![false; n];
        for &e in &positive_ids {
            is_positive[e.index()] = true;
        }
        let positives: Vec<String> = positive_ids
            .iter()
            .filter(|&&e| keep(e))
            .map(|&e| taxonomy.entity_name(e).to_string())
            .collect();
        if positives.len() < MIN_POSITIVES {
            return Err(Error::TooFewPositives {
                concept: concept.to_string(),
                found: positives.len(),
                required: MIN_POSITIVES,
            });
        }

        let strata = margin_strata(taxonomy, c, scope, &is_positive, keep);
        if strata.is_empty() {
            return Err(Error::NoNegatives(concept.to_string()));
        }

        let mut rng = seed::stream(spec.seed, 0);
        let val_size = positive_validation_size(positives.len());
        let (positives_train, positives_val) = split(positives, val_size, &mut rng);
        let mut negatives_train = BTreeMap::new();
        let mut negatives_val = BTreeMap::new();
        for (margin, names) in strata {
            let mut rng = seed::stream(spec.seed, 1 + u64::from(margin.get()));
            let val_size = validation_size(names.len());
            let (train, val) = split(names, val_size, &mut rng);
            if !train.is_empty() {
                negatives_train.insert(margin, train);
            }
            if !val.is_empty() {
                negatives_val.insert(margin, val);
            }
        }

        let mut excluded = spec.excluded.clone();
        excluded.sort();
        excluded.dedup();
        Ok(ConceptDataset {
            concept: concept.to_string(),
            positives_train,
            positives_val,
            negatives_train,
            negatives_val,
            excluded,
        })
    }

    pub fn positives(&self, split: SplitKind) -> &[String] {
        match split {
            SplitKind::Train => &self.positives_train,
            SplitKind::Validation => &self.positives_val,
        }
    }

    pub fn negatives(&self, split: SplitKind) -> &BTreeMap<Margin, Vec<String>> {
        match split {
            SplitKind::Train => &self.negatives_train,
            SplitKind::Validation => &self.negatives_val,
        }
    }

    /// Every entity the dataset refers to, once.
    pub fn all_entities(&self) -> impl Iterator<Item = &str> {
        self.positives_train
            .iter()
            .chain(&self.positives_val)
            .chain(self.negatives_train.values().flatten())
            .chain(self.negatives_val.values().flatten())
            .map(String::as_str)
    }

    /// Positive `p` uniform; anchor uniform over the other positives; margin
    /// uniform over the strata present; negative uniform within the stratum.
    pub fn sample_triplet<R: Rng + ?Sized>(&self, split: SplitKind, rng: &mut R) -> Result<Triplet> {
        let positives = self.positives(split);
        let strata = self.negatives(split);
        if positives.len() < 2 || strata.is_empty() {
            return Err(Error::EmptySplit { concept: self.concept.clone(), split: split.as_str() });
        }
        let p = rng.random_range(0..positives.len());
        let mut a = rng.random_range(0..positives.len() - 1);
        if a >= p {
            a += 1;
        }
        let (&margin, stratum) = strata
            .iter()
            .nth(rng.random_range(0..strata.len()))
            .expect("index below stratum count");
        let negative = &stratum[rng.random_range(0..stratum.len())];
        Ok(Triplet {
            anchor: positives[a].clone(),
            positive: positives[p].clone(),
            negative: negative.clone(),
            margin,
        })
    }

    /// `n` independent draws from a generator seeded with `seed`.
    pub fn sample_epoch_set(&self, split: SplitKind, n: usize, seed: u64) -> Result<Vec<Triplet>> {
        let mut rng = seed::stream(seed, 0);
        (0..n).map(|_| self.sample_triplet(split, &mut rng)).collect()
    }
}

/// Negatives under `scope` grouped by their lowest margin: ancestors are
/// visited nearest first and each entity keeps the first margin it receives.
fn margin_strata(
    taxonomy: &Taxonomy,
    concept: ConceptId,
    scope: ConceptId,
    is_positive: &[bool],
    keep: impl Fn(crate::taxonomy::EntityId) -> bool,
) -> BTreeMap<Margin, Vec<String>> {
    let mut in_scope = vec![false; taxonomy.num_entities()];
    for e in taxonomy.entities_under(scope) {
        in_scope[e.index()] = true;
    }
    let mut assigned = vec![false; taxonomy.num_entities()];
    let mut strata: BTreeMap<Margin, Vec<String>> = BTreeMap::new();
    for (ancestor, distance) in taxonomy.ancestors(concept).into_iter().skip(1) {
        for e in taxonomy.entities_under(ancestor) {
            let i = e.index();
            if assigned[i] || is_positive[i] || !in_scope[i] || !keep(e) {
                continue;
            }
            assigned[i] = true;
            strata
                .entry(Margin::new(distance))
                .or_default()
                .push(taxonomy.entity_name(e).to_string());
        }
    }
    for names in strata.values_mut() {
        names.sort();
    }
    strata
}
