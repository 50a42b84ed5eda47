//! Concept centers and concept spaces.
//!
//! SAS scores a query by its Euclidean distance to the mean embedding of a
//! concept's training positives. CSD first learns a `k × d` linear map `W` per
//! concept from margin triplets,
//!
//! ```text
//! loss(a, p, n) = max(‖W(a − p)‖ − ‖W(a − n)‖ + λ·m, 0)
//! ```
//!
//! and then scores by distance to the mean projected positive. Lower scores
//! mean the concept applies more.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite, l2_distance, norm, Matrix};
use crate::sampler::{ConceptDataset, SplitKind, Triplet, DEFAULT_TRIPLETS};
use crate::seed;
use crate::taxonomy::Margin;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Original,
    Projected,
}

impl Space {
    fn as_str(self) -> &'static str {
        match self {
            Space::Original => "original",
            Space::Projected => "projected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptCenter {
    pub concept: String,
    pub center: Vec<f64>,
    pub space: Space,
}

/// Component-wise mean of the positives' embeddings.
pub fn sas_center(table: &EmbeddingTable, concept: &str, positives: &[String]) -> Result<ConceptCenter> {
    if positives.is_empty() {
        return Err(Error::TooFewPositives { concept: concept.to_string(), found: 0, required: 1 });
    }
    let mut sum = vec![0.0; table.dim()];
    for name in positives {
        for (s, x) in sum.iter_mut().zip(table.vector(name)?) {
            *s += x;
        }
    }
    let n = positives.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(ConceptCenter { concept: concept.to_string(), center: sum, space: Space::Original })
}

/// Euclidean distance between `query` and an original-space center.
pub fn sas_score(center: &ConceptCenter, query: &[f64]) -> Result<f64> {
    if center.space != Space::Original {
        return Err(Error::WrongSpace { expected: Space::Original.as_str() });
    }
    check_dim(center.center.len(), query.len())?;
    Ok(l2_distance(&center.center, query))
}

fn check_triplet_inputs(w: &Matrix, vectors: [&[f64]; 3], margin_scale: f64) -> Result<()> {
    for v in vectors {
        check_dim(w.cols(), v.len())?;
        check_finite(v, "triplet vector")?;
    }
    if !w.is_finite() {
        return Err(Error::NonFinite("projection"));
    }
    if !margin_scale.is_finite() {
        return Err(Error::NonFinite("margin scale"));
    }
    Ok(())
}

/// Scratch buffers for triplet loss and gradient evaluation.
#[derive(Debug, Clone)]
struct TripletScratch {
    diff_pos: Vec<f64>,
    diff_neg: Vec<f64>,
    proj_pos: Vec<f64>,
    proj_neg: Vec<f64>,
}

impl TripletScratch {
    fn new(d: usize, k: usize) -> Self {
        TripletScratch {
            diff_pos: vec![0.0; d],
            diff_neg: vec![0.0; d],
            proj_pos: vec![0.0; k],
            proj_neg: vec![0.0; k],
        }
    }

    /// Loss for one triplet; when `grad` is given and the hinge is active, adds
    /// the loss gradient with respect to `w` into it.
    fn eval(
        &mut self,
        w: &Matrix,
        a: &[f64],
        p: &[f64],
        n: &[f64],
        margin: f64,
        grad: Option<&mut Matrix>,
    ) -> f64 {
        for i in 0..a.len() {
            self.diff_pos[i] = a[i] - p[i];
            self.diff_neg[i] = a[i] - n[i];
        }
        w.mul_vec_into(&self.diff_pos, &mut self.proj_pos);
        w.mul_vec_into(&self.diff_neg, &mut self.proj_neg);
        let d_pos = norm(&self.proj_pos);
        let d_neg = norm(&self.proj_neg);
        let loss = d_pos - d_neg + margin;
        if loss <= 0.0 {
            return 0.0;
        }
        if let Some(grad) = grad {
            // ∂‖Wx‖/∂W = (Wx/‖Wx‖) xᵀ; a zero distance contributes nothing.
            if d_pos > 0.0 {
                grad.add_outer(1.0 / d_pos, &self.proj_pos, &self.diff_pos);
            }
            if d_neg > 0.0 {
                grad.add_outer(-1.0 / d_neg, &self.proj_neg, &self.diff_neg);
            }
        }
        loss
    }
}

/// `max(‖W(a−p)‖ − ‖W(a−n)‖ + λ·m, 0)`.
pub fn triplet_loss(
    w: &Matrix,
    a: &[f64],
    p: &[f64],
    n: &[f64],
    margin: Margin,
    margin_scale: f64,
) -> Result<f64> {
    check_triplet_inputs(w, [a, p, n], margin_scale)?;
    let mut scratch = TripletScratch::new(w.cols(), w.rows());
    Ok(scratch.eval(w, a, p, n, margin_scale * f64::from(margin.get()), None))
}

/// Subgradient of [`triplet_loss`] with respect to `W`: zero when the hinge is
/// inactive, and zero contribution from a pair whose projected distance is zero.
pub fn triplet_loss_gradient(
    w: &Matrix,
    a: &[f64],
    p: &[f64],
    n: &[f64],
    margin: Margin,
    margin_scale: f64,
) -> Result<Matrix> {
    check_triplet_inputs(w, [a, p, n], margin_scale)?;
    let mut scratch = TripletScratch::new(w.cols(), w.rows());
    let mut grad = Matrix::zeros(w.rows(), w.cols());
    scratch.eval(w, a, p, n, margin_scale * f64::from(margin.get()), Some(&mut grad));
    Ok(grad)
}

/// Hyperparameters for [`train_concept_space`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Epochs without a new best validation loss before stopping.
    pub patience: usize,
    pub momentum: f64,
    /// λ, multiplies the integer taxonomy margin.
    pub margin_scale: f64,
    /// `k`; `⌈d/2⌉` when `None`.
    pub projection_dim: Option<usize>,
    pub n_triplets: usize,
    pub val_triplets: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 100,
            batch_size: 16,
            learning_rate: 0.001,
            patience: 5,
            momentum: 0.9,
            margin_scale: 1.0,
            projection_dim: None,
            n_triplets: DEFAULT_TRIPLETS,
            val_triplets: 1000,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn resolved_projection_dim(&self, d: usize) -> usize {
        self.projection_dim.unwrap_or(d.div_ceil(2))
    }

    fn validate(&self, d: usize) -> Result<()> {
        let k = self.resolved_projection_dim(d);
        if k == 0 || k > d {
            return Err(Error::InvalidParameter("projection dimension must be in 1..=d"));
        }
        if self.batch_size == 0 || self.patience == 0 {
            return Err(Error::InvalidParameter("batch size and patience must be positive"));
        }
        if self.n_triplets == 0 || self.val_triplets == 0 {
            return Err(Error::InvalidParameter("triplet counts must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidParameter("learning rate must be finite and non-negative"));
        }
        if !(self.momentum.is_finite() && (0.0..1.0).contains(&self.momentum)) {
            return Err(Error::InvalidParameter("momentum must lie in [0, 1)"));
        }
        if !(self.margin_scale.is_finite() && self.margin_scale >= 0.0) {
            return Err(Error::InvalidParameter("margin scale must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Losses after one epoch (epoch 0 is the untrained initialization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-triplet loss over the training set.
    pub train_loss: f64,
    /// Mean per-triplet loss over the fixed validation set.
    pub val_loss: f64,
    /// Optimizer steps taken in this epoch.
    pub batches: usize,
    /// Triplets consumed by those steps.
    pub triplets: usize,
}

/// A learned projection for one concept.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptSpace {
    pub concept: String,
    /// `k × d`.
    pub projection: Matrix,
    pub center: ConceptCenter,
    pub margin_scale: f64,
    pub initial: EpochStats,
    pub training_log: Vec<EpochStats>,
    /// Last epoch that ran.
    pub stopped_epoch: usize,
    /// Epoch whose weights were kept (0 for the initialization).
    pub best_epoch: usize,
}

impl ConceptSpace {
    pub fn input_dim(&self) -> usize {
        self.projection.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.projection.mul_vec(x)
    }

    /// Validation loss of the kept weights.
    pub fn best_val_loss(&self) -> f64 {
        if self.best_epoch == 0 {
            self.initial.val_loss
        } else {
            self.training_log[self.best_epoch - 1].val_loss
        }
    }
}

/// Mean of `W x` over `positives`.
pub fn projected_center(
    table: &EmbeddingTable,
    projection: &Matrix,
    concept: &str,
    positives: &[String],
) -> Result<ConceptCenter> {
    if positives.is_empty() {
        return Err(Error::TooFewPositives { concept: concept.to_string(), found: 0, required: 1 });
    }
    let mut sum = vec![0.0; projection.rows()];
    let mut y = vec![0.0; projection.rows()];
    for name in positives {
        let x = table.vector(name)?;
        check_dim(projection.cols(), x.len())?;
        projection.mul_vec_into(x, &mut y);
        for (s, v) in sum.iter_mut().zip(&y) {
            *s += v;
        }
    }
    let n = positives.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(ConceptCenter { concept: concept.to_string(), center: sum, space: Space::Projected })
}

/// `‖W q − center‖`.
pub fn csd_score(space: &ConceptSpace, query: &[f64]) -> Result<f64> {
    let projected = space.project(query)?;
    Ok(l2_distance(&projected, &space.center.center))
}

/// Triplet resolved to embedding rows.
#[derive(Debug, Clone, Copy)]
struct RowTriplet {
    anchor: usize,
    positive: usize,
    negative: usize,
    margin: f64,
}

fn resolve(table: &EmbeddingTable, triplets: &[Triplet], margin_scale: f64) -> Result<Vec<RowTriplet>> {
    let row = |name: &str| {
        table.position(name).ok_or_else(|| Error::MissingEmbedding(name.to_string()))
    };
    triplets
        .iter()
        .map(|t| {
            Ok(RowTriplet {
                anchor: row(&t.anchor)?,
                positive: row(&t.positive)?,
                negative: row(&t.negative)?,
                margin: margin_scale * f64::from(t.margin.get()),
            })
        })
        .collect()
}

fn mean_loss(table: &EmbeddingTable, w: &Matrix, set: &[RowTriplet], scratch: &mut TripletScratch) -> f64 {
    let total: f64 = set
        .iter()
        .map(|t| scratch.eval(w, table.row(t.anchor), table.row(t.positive), table.row(t.negative), t.margin, None))
        .sum();
    total / set.len() as f64
}

/// Trains a concept space with mini-batch SGD and heavy-ball momentum.
///
/// A fixed set of `n_triplets` training triplets and `val_triplets`
/// validation triplets is drawn once. Every epoch visits the training set in
/// a fresh random order, in batches whose gradients are averaged. Training
/// stops after `epochs`, or once the validation loss has failed to beat its
/// best value for `patience` consecutive epochs; the best-validation weights
/// are returned.
pub fn train_concept_space(
    table: &EmbeddingTable,
    dataset: &ConceptDataset,
    cfg: &TrainingConfig,
) -> Result<ConceptSpace> {
    let d = table.dim();
    cfg.validate(d)?;
    let k = cfg.resolved_projection_dim(d);
    for name in dataset.all_entities() {
        table.vector(name)?;
    }

    let train_set = dataset.sample_epoch_set(SplitKind::Train, cfg.n_triplets, seed::derive(cfg.seed, 1))?;
    let val_set =
        dataset.sample_epoch_set(SplitKind::Validation, cfg.val_triplets, seed::derive(cfg.seed, 2))?;
    let train_set = resolve(table, &train_set, cfg.margin_scale)?;
    let val_set = resolve(table, &val_set, cfg.margin_scale)?;

    let normal = Normal::new(0.0, 1.0 / libm::sqrt(d as f64)).expect("positive deviation");
    let mut init_rng = seed::stream(seed::derive(cfg.seed, 0), 0);
    let mut w = Matrix::from_vec(k, d, (0..k * d).map(|_| normal.sample(&mut init_rng)).collect())?;

    let mut scratch = TripletScratch::new(d, k);
    let initial = EpochStats {
        epoch: 0,
        train_loss: mean_loss(table, &w, &train_set, &mut scratch),
        val_loss: mean_loss(table, &w, &val_set, &mut scratch),
        batches: 0,
        triplets: 0,
    };

    let mut velocity = Matrix::zeros(k, d);
    let mut grad = Matrix::zeros(k, d);
    let mut best_w = w.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut log = Vec::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut shuffle_rng = seed::stream(seed::derive(cfg.seed, 3), 0);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut batches = 0;
        let mut seen = 0;
        for batch in order.chunks(cfg.batch_size) {
            grad.fill(0.0);
            for &i in batch {
                let t = train_set[i];
                loss_sum += scratch.eval(
                    &w,
                    table.row(t.anchor),
                    table.row(t.positive),
                    table.row(t.negative),
                    t.margin,
                    Some(&mut grad),
                );
            }
            let inv = 1.0 / batch.len() as f64;
            for ((v, g), x) in velocity
                .as_mut_slice()
                .iter_mut()
                .zip(grad.as_slice())
                .zip(w.as_mut_slice())
            {
                *v = cfg.momentum * *v + g * inv;
                *x -= cfg.learning_rate * *v;
            }
            batches += 1;
            seen += batch.len();
        }
        let stats = EpochStats {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            val_loss: mean_loss(table, &w, &val_set, &mut scratch),
            batches,
            triplets: seen,
        };
        if !(stats.train_loss.is_finite() && stats.val_loss.is_finite() && w.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        log.push(stats);
        if stats.val_loss < best_val {
            best_val = stats.val_loss;
            best_w.as_mut_slice().copy_from_slice(w.as_slice());
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    let center = projected_center(table, &best_w, &dataset.concept, &dataset.positives_train)?;
    Ok(ConceptSpace {
        concept: dataset.concept.clone(),
        projection: best_w,
        center,
        margin_scale: cfg.margin_scale,
        initial,
        stopped_epoch: log.len(),
        training_log: log,
        best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    fn table_2d(points: &[(&str, [f64; 2])]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2);
        for (n, v) in points {
            t.insert(n, v).unwrap();
        }
        t
    }

    #[test]
    fn sas_small_cases() {
        let t = table_2d(&[("a", [0.0, 0.0]), ("b", [2.0, 2.0])]);
        let c = sas_center(&t, "c", &["a".into(), "b".into()]).unwrap();
        assert_eq!(c.center, [1.0, 1.0]);
        let single = sas_center(&t, "c", &["b".into()]).unwrap();
        assert_eq!(single.center, [2.0, 2.0]);
        let origin = sas_center(&t, "c", &["a".into()]).unwrap();
        assert_eq!(sas_score(&origin, &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(sas_score(&c, &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(sas_score(&c, &[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(sas_center(&t, "c", &["zz".into()]), Err(Error::MissingEmbedding(_))));
        let projected = ConceptCenter { space: Space::Projected, ..c };
        assert!(matches!(sas_score(&projected, &[1.0, 1.0]), Err(Error::WrongSpace { .. })));
    }

    #[test]
    fn triplet_loss_small_cases() {
        let id = Matrix::identity(2);
        let m1 = Margin::new(1);
        let inactive = triplet_loss(&id, &[0.0, 0.0], &[0.0, 0.0], &[3.0, 4.0], m1, 1.0).unwrap();
        assert_eq!(inactive, 0.0);
        let active = triplet_loss(&id, &[0.0, 0.0], &[3.0, 4.0], &[0.0, 0.0], m1, 1.0).unwrap();
        assert_eq!(active, 6.0);
        let g = triplet_loss_gradient(&id, &[0.0, 0.0], &[0.0, 0.0], &[3.0, 4.0], m1, 1.0).unwrap();
        assert_eq!(g, Matrix::zeros(2, 2));
        assert!(triplet_loss(&id, &[0.0], &[0.0, 0.0], &[0.0, 0.0], m1, 1.0).is_err());
        assert!(triplet_loss(&id, &[f64::NAN, 0.0], &[0.0, 0.0], &[0.0, 0.0], m1, 1.0).is_err());
    }

    #[test]
    fn gradient_with_coincident_anchor_and_positive() {
        // a = p: only the negative pair contributes, -(Wx/‖Wx‖) xᵀ with x = a - n.
        let id = Matrix::identity(2);
        let g = triplet_loss_gradient(&id, &[0.0, 0.0], &[0.0, 0.0], &[0.3, 0.4], Margin::new(1), 1.0)
            .unwrap();
        let x = [-0.3, -0.4];
        for i in 0..2 {
            for j in 0..2 {
                let expected = -(x[i] / 0.5) * x[j];
                assert!((g.get(i, j) - expected).abs() < 1e-15);
            }
        }
    }

    fn separable_dataset() -> (EmbeddingTable, ConceptDataset) {
        let mut t = EmbeddingTable::new(2);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for i in 0..10 {
            let jitter = 0.01 * i as f64;
            let p = alloc::format!("p{i}");
            let n = alloc::format!("n{i}");
            t.insert(&p, &[jitter, 0.0]).unwrap();
            t.insert(&n, &[0.5, jitter]).unwrap();
            pos.push(p);
            neg.push(n);
        }
        let ds = ConceptDataset {
            concept: "c".into(),
            positives_train: pos[..8].to_vec(),
            positives_val: pos[8..].to_vec(),
            negatives_train: BTreeMap::from([(Margin::new(1), neg[..8].to_vec())]),
            negatives_val: BTreeMap::from([(Margin::new(1), neg[8..].to_vec())]),
            excluded: Vec::new(),
        };
        (t, ds)
    }

    #[test]
    fn training_reduces_validation_loss() {
        let (t, ds) = separable_dataset();
        let cfg = TrainingConfig {
            projection_dim: Some(2),
            n_triplets: 500,
            val_triplets: 100,
            learning_rate: 0.01,
            epochs: 30,
            seed: 4,
            ..Default::default()
        };
        let space = train_concept_space(&t, &ds, &cfg).unwrap();
        assert!(space.best_val_loss() < space.initial.val_loss);
        assert!(space.training_log.len() <= 30);
        let again = train_concept_space(&t, &ds, &cfg).unwrap();
        assert_eq!(again.projection, space.projection);
    }

    #[test]
    fn zero_learning_rate_stops_after_patience() {
        let (t, ds) = separable_dataset();
        let cfg = TrainingConfig { learning_rate: 0.0, n_triplets: 64, val_triplets: 16, ..Default::default() };
        let space = train_concept_space(&t, &ds, &cfg).unwrap();
        assert_eq!(space.stopped_epoch, 6);
        assert_eq!(space.best_epoch, 1);
        assert!(space.training_log.iter().all(|s| s.batches == 4 && s.triplets == 64));
    }

    #[test]
    fn zero_epochs_keeps_initialization() {
        let (t, ds) = separable_dataset();
        let cfg = TrainingConfig { epochs: 0, n_triplets: 16, val_triplets: 16, ..Default::default() };
        let space = train_concept_space(&t, &ds, &cfg).unwrap();
        assert!(space.training_log.is_empty());
        assert_eq!(space.best_epoch, 0);
        assert_eq!(space.best_val_loss(), space.initial.val_loss);
        assert_eq!(space.output_dim(), 1);
    }

    #[test]
    fn csd_identity_matches_sas() {
        let t = table_2d(&[("a", [1.0, 0.0]), ("b", [0.0, 1.0])]);
        let names = ["a".to_string(), "b".to_string()];
        let center = projected_center(&t, &Matrix::identity(2), "c", &names).unwrap();
        let stats = EpochStats { epoch: 0, train_loss: 0.0, val_loss: 0.0, batches: 0, triplets: 0 };
        let space = ConceptSpace {
            concept: "c".into(),
            projection: Matrix::identity(2),
            center: center.clone(),
            margin_scale: 1.0,
            initial: stats,
            training_log: Vec::new(),
            stopped_epoch: 0,
            best_epoch: 0,
        };
        let sas = sas_center(&t, "c", &names).unwrap();
        let q = [3.0, -1.0];
        assert_eq!(csd_score(&space, &q).unwrap(), sas_score(&sas, &q).unwrap());
        assert_eq!(csd_score(&space, &[0.5, 0.5]).unwrap(), 0.0);
        assert!(csd_score(&space, &[0.5]).is_err());
    }
}
