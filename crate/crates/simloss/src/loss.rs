//! SimLoss and its analytic gradients.
//!
//! For a batch of N probability vectors `p_i` with targets `y_i`,
//!
//! ```text
//! L = -(1/N) * sum_i ln( sum_c S[y_i][c] * p_i[c] )
//! ```
//!
//! With `S = I` this is categorical cross entropy. The inner weighted sum is
//! clamped below at [`LOG_FLOOR`] so the loss stays finite when all mass sits
//! on classes with zero similarity to the target; inside that clamped region
//! the gradient is zero.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::sim_matrix::{row_normalize, SimilarityMatrix};

/// Lower clamp applied to the weighted probability sum before the logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Pre-softmax scores, one row per example.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitBatch(Array2<f64>);

impl LogitBatch {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("logits must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn class_count(&self) -> usize {
        self.0.ncols()
    }
}

/// Row-stochastic probability vectors, one row per example.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityBatch(Array2<f64>);

impl ProbabilityBatch {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        for (i, row) in values.rows().into_iter().enumerate() {
            if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidInput(format!("row {i} has entries outside [0, 1]")));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidInput(format!("row {i} sums to {sum}, expected 1")));
            }
        }
        Ok(Self(values))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn class_count(&self) -> usize {
        self.0.ncols()
    }

    /// Index of the largest probability per row, lowest index on ties.
    pub fn argmax(&self) -> LabelBatch {
        LabelBatch(self.0.rows().into_iter().map(argmax_row).collect())
    }
}

pub(crate) fn argmax_row(row: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Integer class targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelBatch(Vec<usize>);

impl LabelBatch {
    /// Wraps labels after checking each lies in `[0, class_count)`.
    pub fn new(labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
            return Err(Error::Index {
                index: bad,
                len: class_count,
            });
        }
        Ok(Self(labels))
    }

    /// Wraps labels without a class-count check (predictions, metrics input).
    pub fn from_vec(labels: Vec<usize>) -> Self {
        Self(labels)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for LabelBatch {
    fn from(labels: Vec<usize>) -> Self {
        Self(labels)
    }
}

/// Numerically stable row-wise softmax.
pub fn softmax(logits: &LogitBatch) -> ProbabilityBatch {
    ProbabilityBatch(softmax_rows(logits.view()))
}

pub(crate) fn softmax_rows(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

fn check_shapes(class_count: usize, n: usize, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<()> {
    if class_count != s.class_count() {
        return Err(Error::Shape(format!(
            "batch has {class_count} classes, similarity matrix has {}",
            s.class_count()
        )));
    }
    if n != labels.len() {
        return Err(Error::Shape(format!("{n} rows but {} labels", labels.len())));
    }
    if n == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    if let Some(&bad) = labels.as_slice().iter().find(|&&y| y >= class_count) {
        return Err(Error::Index {
            index: bad,
            len: class_count,
        });
    }
    Ok(())
}

/// `sum_c S[y][c] * p[c]` for one example.
fn weighted_mass(s_row: ArrayView1<'_, f64>, p: ArrayView1<'_, f64>) -> f64 {
    s_row.dot(&p)
}

fn simloss_rows(probs: ArrayView2<'_, f64>, labels: &LabelBatch, s: ArrayView2<'_, f64>) -> f64 {
    let n = probs.nrows() as f64;
    let total: f64 = probs
        .rows()
        .into_iter()
        .zip(labels.as_slice())
        .map(|(p, &y)| -weighted_mass(s.row(y), p).max(LOG_FLOOR).ln())
        .sum();
    total / n
}

/// Mean SimLoss over the batch. Always non-negative.
pub fn simloss(probs: &ProbabilityBatch, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<f64> {
    check_shapes(probs.class_count(), probs.len(), labels, s)?;
    Ok(simloss_rows(probs.view(), labels, s.view()).max(0.0))
}

fn grad_probs_rows(probs: ArrayView2<'_, f64>, labels: &LabelBatch, s: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = probs.nrows() as f64;
    let mut grad = Array2::zeros(probs.raw_dim());
    for ((mut g, p), &y) in grad.rows_mut().into_iter().zip(probs.rows()).zip(labels.as_slice()) {
        let s_row = s.row(y);
        let mass = weighted_mass(s_row, p);
        if mass < LOG_FLOOR {
            continue;
        }
        g.zip_mut_with(&s_row, |g, &sv| *g = -sv / (mass * n));
    }
    grad
}

/// Gradient of [`simloss`] with respect to the probabilities.
pub fn simloss_grad_probs(probs: &ProbabilityBatch, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<Array2<f64>> {
    check_shapes(probs.class_count(), probs.len(), labels, s)?;
    Ok(grad_probs_rows(probs.view(), labels, s.view()))
}

/// Gradient of `simloss(softmax(z))` with respect to the logits `z`:
/// `p_k * (1 - S[y][k] / sum_c S[y][c] p_c) / N`.
pub fn simloss_grad_logits(logits: &LogitBatch, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<Array2<f64>> {
    check_shapes(logits.class_count(), logits.len(), labels, s)?;
    let probs = softmax_rows(logits.view());
    Ok(grad_logits_from_probs(&probs, labels.as_slice(), s.view()))
}

/// Loss value and logit gradient in one pass; used by the trainer.
pub(crate) fn loss_and_logit_grad(
    logits: ArrayView2<'_, f64>,
    labels: &[usize],
    s: ArrayView2<'_, f64>,
) -> (f64, Array2<f64>) {
    let probs = softmax_rows(logits);
    let n = probs.nrows() as f64;
    let loss: f64 = probs
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(p, &y)| -weighted_mass(s.row(y), p).max(LOG_FLOOR).ln())
        .sum::<f64>()
        / n;
    (loss, grad_logits_from_probs(&probs, labels, s))
}

fn grad_logits_from_probs(probs: &Array2<f64>, labels: &[usize], s: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = probs.nrows() as f64;
    let mut grad = Array2::zeros(probs.raw_dim());
    for ((mut g, p), &y) in grad.rows_mut().into_iter().zip(probs.rows()).zip(labels) {
        let s_row = s.row(y);
        let mass = weighted_mass(s_row, p);
        if mass < LOG_FLOOR {
            continue;
        }
        for ((g, &pk), &sk) in g.iter_mut().zip(p).zip(s_row) {
            *g = pk * (1.0 - sk / mass) / n;
        }
    }
    grad
}

/// SimLoss evaluated with the row-normalized (probability) matrix.
pub fn prob_loss(probs: &ProbabilityBatch, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<f64> {
    check_shapes(probs.class_count(), probs.len(), labels, s)?;
    let normalized = row_normalize(s);
    Ok(simloss_rows(probs.view(), labels, normalized.view()))
}

/// Gradient of [`prob_loss`] with respect to the probabilities.
pub fn prob_loss_grad_probs(probs: &ProbabilityBatch, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<Array2<f64>> {
    check_shapes(probs.class_count(), probs.len(), labels, s)?;
    let normalized = row_normalize(s);
    let probs = probs.view();
    // The floor is applied to the unnormalized mass so both losses share one
    // clamped region.
    let n = probs.nrows() as f64;
    let mut grad = Array2::zeros(probs.raw_dim());
    for ((mut g, p), &y) in grad.rows_mut().into_iter().zip(probs.rows()).zip(labels.as_slice()) {
        if weighted_mass(s.row(y), p) < LOG_FLOOR {
            continue;
        }
        let q_row = normalized.row(y);
        let mass = weighted_mass(q_row, p);
        g.zip_mut_with(&q_row, |g, &q| *g = -q / (mass * n));
    }
    Ok(grad)
}

/// `(1/N) * sum_i ln(sum_c S[y_i][c])`, the constant separating
/// [`prob_loss`] from [`simloss`].
pub fn loss_gap(labels: &LabelBatch, s: &SimilarityMatrix) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Shape("empty label batch".into()));
    }
    let row_sums = s.view().sum_axis(Axis(1));
    let mut total = 0.0;
    for &y in labels.as_slice() {
        if y >= s.class_count() {
            return Err(Error::Index {
                index: y,
                len: s.class_count(),
            });
        }
        total += row_sums[y].ln();
    }
    Ok(total / labels.len() as f64)
}
