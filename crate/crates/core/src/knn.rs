//! k-nearest-neighbor classification of waveforms.
//!
//! Neighbors are ranked by Euclidean distance, ties in distance by training
//! index. The vote goes to the class with the most neighbors; among classes
//! with equal votes the one whose nearest member is closest wins, and if that
//! is tied too, the earlier class in [`MotionLabel::ALL`] wins.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeling::MotionLabel;
use crate::waveform::WaveformDataset;

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

const CLASSES: usize = MotionLabel::ALL.len();

#[derive(Debug, Error, PartialEq)]
pub enum KnnError {
    #[error("vector length {got} does not match {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("k = {k} must be in 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("{vectors} vectors but {labels} labels")]
    LabelCount { vectors: usize, labels: usize },
    #[error("training set is empty")]
    EmptyTraining,
    #[error("test set is empty")]
    EmptyTest,
    #[error("dataset of {0} items is too small to split (need >= 4)")]
    TooSmall(usize),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
}

/// `sqrt(sum((y_i - x_i)^2))`.
pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64, KnnError> {
    if x.len() != y.len() {
        return Err(KnnError::LengthMismatch {
            got: y.len(),
            want: x.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct KnnModel {
    training_vectors: Vec<Vec<f64>>,
    training_labels: Vec<MotionLabel>,
    k: usize,
}

#[derive(Deserialize)]
struct RawModel {
    training_vectors: Vec<Vec<f64>>,
    training_labels: Vec<MotionLabel>,
    k: usize,
}

impl TryFrom<RawModel> for KnnModel {
    type Error = KnnError;
    fn try_from(raw: RawModel) -> Result<Self, Self::Error> {
        KnnModel::new(raw.training_vectors, raw.training_labels, raw.k)
    }
}

impl KnnModel {
    pub fn new(
        training_vectors: Vec<Vec<f64>>,
        training_labels: Vec<MotionLabel>,
        k: usize,
    ) -> Result<Self, KnnError> {
        if training_vectors.is_empty() {
            return Err(KnnError::EmptyTraining);
        }
        if training_vectors.len() != training_labels.len() {
            return Err(KnnError::LabelCount {
                vectors: training_vectors.len(),
                labels: training_labels.len(),
            });
        }
        let want = training_vectors[0].len();
        if let Some(v) = training_vectors.iter().find(|v| v.len() != want) {
            return Err(KnnError::LengthMismatch { got: v.len(), want });
        }
        if k == 0 || k > training_vectors.len() {
            return Err(KnnError::InvalidK {
                k,
                n: training_vectors.len(),
            });
        }
        Ok(Self {
            training_vectors,
            training_labels,
            k,
        })
    }

    pub fn fit(train: &WaveformDataset, k: usize) -> Result<Self, KnnError> {
        let vectors = train.items().iter().map(|w| w.samples.clone()).collect();
        Self::new(vectors, train.labels(), k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same training data, different `k`.
    pub fn with_k(&self, k: usize) -> Result<Self, KnnError> {
        if k == 0 || k > self.training_vectors.len() {
            return Err(KnnError::InvalidK {
                k,
                n: self.training_vectors.len(),
            });
        }
        Ok(Self { k, ..self.clone() })
    }

    pub fn feature_length(&self) -> usize {
        self.training_vectors[0].len()
    }

    pub fn training_len(&self) -> usize {
        self.training_vectors.len()
    }

    pub fn training_labels(&self) -> &[MotionLabel] {
        &self.training_labels
    }

    /// The `k` nearest training items as `(index, distance)`, nearest first.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<(usize, f64)>, KnnError> {
        let mut all = self
            .training_vectors
            .iter()
            .enumerate()
            .map(|(i, v)| euclidean(v, x).map(|d| (i, d)))
            .collect::<Result<Vec<_>, _>>()?;
        // Stable sort keeps training order for equal distances.
        all.sort_by(|a, b| a.1.total_cmp(&b.1));
        all.truncate(self.k);
        Ok(all)
    }

    pub fn predict(&self, x: &[f64]) -> Result<MotionLabel, KnnError> {
        let neighbors = self.neighbors(x)?;
        let mut votes = [0usize; CLASSES];
        let mut nearest = [f64::INFINITY; CLASSES];
        for &(i, d) in &neighbors {
            let c = self.training_labels[i].index();
            votes[c] += 1;
            nearest[c] = nearest[c].min(d);
        }
        let best = (0..CLASSES)
            .filter(|&c| votes[c] > 0)
            .min_by(|&a, &b| {
                votes[b]
                    .cmp(&votes[a])
                    .then(nearest[a].total_cmp(&nearest[b]))
                    .then(a.cmp(&b))
            })
            .expect("k >= 1 gives at least one vote");
        Ok(MotionLabel::ALL[best])
    }

    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Result<Vec<MotionLabel>, KnnError> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }
}

/// Rows are true labels, columns predictions, both in [`MotionLabel::ALL`]
/// order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; CLASSES]; CLASSES],
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: MotionLabel, predicted: MotionLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> [u64; CLASSES] {
        self.counts.map(|row| row.iter().sum())
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64,
        }
    }

    /// Per-class recall; `None` for classes absent from the test set.
    pub fn recall(&self) -> [Option<f64>; CLASSES] {
        let rows = self.row_sums();
        std::array::from_fn(|c| (rows[c] > 0).then(|| self.counts[c][c] as f64 / rows[c] as f64))
    }

    /// `true\predicted` header row plus one row per true class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for l in MotionLabel::ALL {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for l in MotionLabel::ALL {
            out.push_str(l.as_str());
            for v in self.counts[l.index()] {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub recall: [Option<f64>; CLASSES],
    pub predictions: Vec<MotionLabel>,
}

pub fn evaluate(model: &KnnModel, test: &WaveformDataset) -> Result<Evaluation, KnnError> {
    if test.is_empty() {
        return Err(KnnError::EmptyTest);
    }
    let xs: Vec<Vec<f64>> = test.items().iter().map(|w| w.samples.clone()).collect();
    let predictions = model.predict_many(&xs)?;
    let mut confusion = ConfusionMatrix::default();
    for (truth, &p) in test.labels().into_iter().zip(&predictions) {
        confusion.record(truth, p);
    }
    Ok(Evaluation {
        accuracy: confusion.accuracy(),
        recall: confusion.recall(),
        confusion,
        predictions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self, KnnError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(KnnError::BadFraction(train_fraction));
        }
        Ok(Self {
            train_fraction,
            seed,
        })
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed,
        }
    }

    /// Shuffled `(train, test)` index lists.
    pub fn indices(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>), KnnError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(KnnError::BadFraction(self.train_fraction));
        }
        if n < 4 {
            return Err(KnnError::TooSmall(n));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        let n_train = ((self.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        let test = idx.split_off(n_train);
        Ok((idx, test))
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

pub fn split(
    dataset: &WaveformDataset,
    spec: &SplitSpec,
) -> Result<(WaveformDataset, WaveformDataset), KnnError> {
    let (train, test) = spec.indices(dataset.len())?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Accuracy for each `k` on one shared split.
pub fn k_sweep(
    dataset: &WaveformDataset,
    spec: &SplitSpec,
    k_values: &[usize],
) -> Result<Vec<(usize, f64)>, KnnError> {
    let (train, test) = split(dataset, spec)?;
    for &k in k_values {
        if k == 0 || k > train.len() {
            return Err(KnnError::InvalidK { k, n: train.len() });
        }
    }
    let base = KnnModel::fit(&train, 1)?;
    k_values
        .iter()
        .map(|&k| Ok((k, evaluate(&base.with_k(k)?, &test)?.accuracy)))
        .collect()
}

/// Trains and evaluates once per seed; one accuracy per run.
pub fn cohort_accuracies(
    dataset: &WaveformDataset,
    train_fraction: f64,
    seeds: &[u64],
    k: usize,
) -> Result<Vec<f64>, KnnError> {
    seeds
        .iter()
        .map(|&seed| {
            let (train, test) = split(dataset, &SplitSpec::new(train_fraction, seed)?)?;
            Ok(evaluate(&KnnModel::fit(&train, k)?, &test)?.accuracy)
        })
        .collect()
}

pub fn k_sweep_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("k,accuracy\n");
    for (k, acc) in rows {
        let _ = writeln!(out, "{k},{acc}");
    }
    out
}
