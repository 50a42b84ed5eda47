//! Skip-gram with negative sampling (SGNS).
//!
//! DeepWalk feeds the trainer context pairs from random walks; first-order
//! LINE feeds it the graph's edges in both orientations and ties the context
//! vectors to the node vectors, so an edge pulls its two endpoints together.
//!
//! Parameters live in a [`SharedTable`] of relaxed atomics. A single caller
//! gets a deterministic run; several threads calling
//! [`SgnsTrainer::train_pairs`] concurrently get lock-free updates where
//! concurrent writes to the same row may be lost, and the result then depends
//! on scheduling.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Uniform;

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::linalg::dot;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Separate context vectors (DeepWalk).
    SkipGram,
    /// Context vectors tied to node vectors (first-order LINE).
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Floor of the linear learning-rate decay.
    pub min_learning_rate: f64,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 128,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            seed: 0,
        }
    }
}

impl SgnsConfig {
    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter("dimension must be at least 2"));
        }
        if self.negatives == 0 {
            return Err(Error::InvalidParameter("at least one negative sample is required"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidParameter("learning rate must be finite and non-negative"));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln σ(x)` without overflow.
#[inline]
fn log_sigmoid(x: f64) -> f64 {
    -(if x > 0.0 { 0.0 } else { -x } + libm::log1p(libm::exp(-libm::fabs(x))))
}

/// d loss / d score for one target with label 1 (positive) or 0 (negative).
#[inline]
fn score_slope(score: f64, label: f64) -> f64 {
    sigmoid(score) - label
}

/// Per-pair SGNS loss: `-ln σ(c·p) - Σ ln σ(-c·n)`.
pub fn sgns_loss(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(center, positive))
        - negatives.iter().map(|n| log_sigmoid(-dot(center, n))).sum::<f64>()
}

/// Gradient of [`sgns_loss`] with respect to each of its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_gradient(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> SgnsGradient {
    let mut grad_center = vec![0.0; center.len()];
    let mut target_grad = |target: &[f64], label: f64| {
        let slope = score_slope(dot(center, target), label);
        for (g, t) in grad_center.iter_mut().zip(target) {
            *g += slope * t;
        }
        center.iter().map(|c| slope * c).collect::<Vec<f64>>()
    };
    let positive_grad = target_grad(positive, 1.0);
    let negative_grads = negatives.iter().map(|n| target_grad(n, 0.0)).collect();
    SgnsGradient { center: grad_center, positive: positive_grad, negatives: negative_grads }
}

/// Row-major table of `f64` stored as relaxed atomics.
#[derive(Debug)]
pub struct SharedTable {
    dim: usize,
    cells: Vec<AtomicU64>,
}

impl SharedTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        SharedTable { dim, cells: (0..rows * dim).map(|_| AtomicU64::new(0)).collect() }
    }

    pub fn from_values(dim: usize, values: &[f64]) -> Self {
        SharedTable { dim, cells: values.iter().map(|v| AtomicU64::new(v.to_bits())).collect() }
    }

    pub fn load(&self, row: usize, out: &mut [f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    pub fn store(&self, row: usize, values: &[f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (c, v) in cells.iter().zip(values) {
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.cells.iter().map(|c| f64::from_bits(c.load(Ordering::Relaxed))).collect()
    }
}

/// Noise distribution over contexts: occurrence count raised to 0.75.
fn noise_distribution(num_nodes: usize, pairs: &[(NodeId, NodeId)]) -> Result<WeightedIndex<f64>> {
    let mut counts = vec![0u64; num_nodes];
    for &(_, ctx) in pairs {
        counts[ctx as usize] += 1;
    }
    WeightedIndex::new(counts.iter().map(|&c| libm::pow(c as f64, 0.75)))
        .map_err(|_| Error::EmptyPairs)
}

/// SGNS parameters plus the sampling state shared by every worker.
#[derive(Debug)]
pub struct SgnsTrainer {
    objective: Objective,
    cfg: SgnsConfig,
    num_nodes: usize,
    input: SharedTable,
    output: Option<SharedTable>,
    noise: WeightedIndex<f64>,
    total_steps: u64,
    done_steps: AtomicU64,
}

impl SgnsTrainer {
    /// Initializes node vectors uniformly in `[-0.5/d, 0.5/d]` and context
    /// vectors at zero. `pairs` fixes the noise distribution and the length of
    /// the learning-rate schedule.
    pub fn new(
        objective: Objective,
        num_nodes: usize,
        pairs: &[(NodeId, NodeId)],
        cfg: &SgnsConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if pairs.is_empty() {
            return Err(Error::EmptyPairs);
        }
        if pairs.iter().any(|&(u, v)| u as usize >= num_nodes || v as usize >= num_nodes) {
            return Err(Error::InvalidParameter("pair references an unknown node"));
        }
        let d = cfg.dim;
        let half = 0.5 / d as f64;
        let init = Uniform::new_inclusive(-half, half).expect("finite bounds");
        let mut rng = seed::stream(cfg.seed, 1);
        let values: Vec<f64> = (0..num_nodes * d).map(|_| init.sample(&mut rng)).collect();
        let output = match objective {
            Objective::SkipGram => Some(SharedTable::zeros(num_nodes, d)),
            Objective::FirstOrder => None,
        };
        Ok(SgnsTrainer {
            objective,
            cfg: cfg.clone(),
            num_nodes,
            input: SharedTable::from_values(d, &values),
            output,
            noise: noise_distribution(num_nodes, pairs)?,
            total_steps: (cfg.epochs as u64).saturating_mul(pairs.len() as u64),
            done_steps: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &SgnsConfig {
        &self.cfg
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    /// The pair stream for `epoch` in its training order.
    pub fn epoch_order(&self, pairs: &[(NodeId, NodeId)], epoch: usize) -> Vec<(NodeId, NodeId)> {
        let mut order = pairs.to_vec();
        order.shuffle(&mut seed::stream(seed::derive(self.cfg.seed, epoch as u64), 2));
        order
    }

    /// Random state for worker `worker` during `epoch`.
    pub fn worker_rng(&self, epoch: usize, worker: usize) -> ChaCha8Rng {
        seed::stream(seed::derive(self.cfg.seed, epoch as u64), 3 + worker as u64)
    }

    fn learning_rate(&self) -> f64 {
        let lr = self.cfg.learning_rate;
        let floor = self.cfg.min_learning_rate.min(lr);
        let done = self.done_steps.load(Ordering::Relaxed) as f64;
        let progress = if self.total_steps == 0 { 0.0 } else { done / self.total_steps as f64 };
        (lr - (lr - floor) * progress).max(floor)
    }

    /// One descent step per pair, in order.
    pub fn train_pairs<R: Rng>(&self, pairs: &[(NodeId, NodeId)], rng: &mut R) {
        let d = self.cfg.dim;
        let mut center = vec![0.0; d];
        let mut target = vec![0.0; d];
        let mut center_step = vec![0.0; d];
        let contexts = self.output.as_ref().unwrap_or(&self.input);
        for &(u, v) in pairs {
            let lr = self.learning_rate();
            self.input.load(u as usize, &mut center);
            center_step.iter_mut().for_each(|x| *x = 0.0);
            let mut update = |row: NodeId, label: f64, target: &mut [f64]| {
                contexts.load(row as usize, target);
                let step = -lr * score_slope(dot(&center, target), label);
                for (s, t) in center_step.iter_mut().zip(target.iter()) {
                    *s += step * t;
                }
                for (t, c) in target.iter_mut().zip(&center) {
                    *t += step * c;
                }
                contexts.store(row as usize, target);
            };
            update(v, 1.0, &mut target);
            for _ in 0..self.cfg.negatives {
                let n = self.noise.sample(rng) as NodeId;
                if n == v || (self.objective == Objective::FirstOrder && n == u) {
                    continue;
                }
                update(n, 0.0, &mut target);
            }
            for (c, s) in center.iter_mut().zip(&center_step) {
                *c += s;
            }
            self.input.store(u as usize, &center);
            self.done_steps.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// Current context vectors; the node vectors themselves under
    /// [`Objective::FirstOrder`].
    pub fn context_snapshot(&self, names: &[String]) -> Result<EmbeddingTable> {
        let table = self.output.as_ref().unwrap_or(&self.input);
        EmbeddingTable::from_rows(self.cfg.dim, names.to_vec(), table.to_vec())
    }

    /// Current node vectors.
    pub fn snapshot(&self, names: &[String]) -> Result<EmbeddingTable> {
        if names.len() != self.num_nodes {
            return Err(Error::DimensionMismatch { expected: self.num_nodes, found: names.len() });
        }
        EmbeddingTable::from_rows(self.cfg.dim, names.to_vec(), self.input.to_vec())
    }
}

/// Single-threaded, deterministic training over all epochs.
pub fn train_sequential(
    objective: Objective,
    names: &[String],
    pairs: &[(NodeId, NodeId)],
    cfg: &SgnsConfig,
) -> Result<EmbeddingTable> {
    let trainer = SgnsTrainer::new(objective, names.len(), pairs, cfg)?;
    for epoch in 0..cfg.epochs {
        let order = trainer.epoch_order(pairs, epoch);
        trainer.train_pairs(&order, &mut trainer.worker_rng(epoch, 0));
    }
    trainer.snapshot(names)
}

/// DeepWalk-style skip-gram over `(center, context)` pairs of nodes named by `names`.
pub fn train_skipgram(
    names: &[String],
    pairs: &[(NodeId, NodeId)],
    cfg: &SgnsConfig,
) -> Result<EmbeddingTable> {
    train_sequential(Objective::SkipGram, names, pairs, cfg)
}

/// Pairs used by first-order LINE: every edge in both orientations.
pub fn line_pairs(graph: &Graph) -> Vec<(NodeId, NodeId)> {
    graph.directed_edges()
}

/// First-order LINE: each epoch visits every edge in both orientations in a
/// random order.
pub fn train_line_first_order(graph: &Graph, cfg: &SgnsConfig) -> Result<EmbeddingTable> {
    train_sequential(Objective::FirstOrder, graph.names(), &line_pairs(graph), cfg)
}
