//! A small fully connected softmax classifier trained with SimLoss and Adam.
//!
//! Hidden layers are affine followed by ReLU; the output layer is affine and
//! produces logits. Gradients are derived by hand and checked against finite
//! differences in the tests.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Splits};
use crate::error::{Error, Result};
use crate::loss::{loss_and_logit_grad, softmax_rows, LabelBatch, LogitBatch, ProbabilityBatch};
use crate::metrics;
use crate::rng::{mix_seed, stream};
use crate::sim_matrix::SimilarityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layer_sizes: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

/// Per-parameter gradients (or Adam moments), shaped like a [`DenseNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    fn matches(&self, net: &DenseNet) -> bool {
        self.weights.len() == net.weights.len()
            && self.biases.len() == net.biases.len()
            && self.weights.iter().zip(&net.weights).all(|(a, b)| a.dim() == b.dim())
            && self.biases.iter().zip(&net.biases).all(|(a, b)| a.dim() == b.dim())
    }
}

impl DenseNet {
    /// Builds a network from explicit parameters.
    pub fn from_parameters(weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::InvalidParameter(
                "need one bias per weight matrix and at least one layer".into(),
            ));
        }
        let mut layer_sizes = vec![weights[0].ncols()];
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != *layer_sizes.last().unwrap() || b.len() != w.nrows() {
                return Err(Error::Shape(format!("layer {l} parameters do not chain")));
            }
            layer_sizes.push(w.nrows());
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidParameter("layer sizes must be positive".into()));
        }
        if weights.iter().any(|w| w.iter().any(|v| !v.is_finite()))
            || biases.iter().any(|b| b.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn class_count(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Mutable access to every scalar parameter, weights before biases,
    /// layer by layer. Used by gradient checks.
    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .flat_map(|w| w.iter_mut())
            .chain(self.biases.iter_mut().flat_map(|b| b.iter_mut()))
    }

    fn check_input(&self, features: ArrayView2<'_, f64>) -> Result<()> {
        if features.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "features have width {}, network expects {}",
                features.ncols(),
                self.input_width()
            )));
        }
        Ok(())
    }

    /// Activations of every layer; the last entry holds the logits.
    fn activations(&self, features: ArrayView2<'_, f64>) -> Vec<Array2<f64>> {
        let last = self.weights.len() - 1;
        let mut acts = Vec::with_capacity(self.weights.len() + 1);
        acts.push(features.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[l].dot(&w.t());
            z += b;
            if l < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    fn logits(&self, features: ArrayView2<'_, f64>) -> Array2<f64> {
        self.activations(features).pop().unwrap()
    }

    pub fn predict_proba(&self, features: ArrayView2<'_, f64>) -> Result<ProbabilityBatch> {
        self.check_input(features)?;
        ProbabilityBatch::new(softmax_rows(self.logits(features).view()))
    }

    /// Argmax of the softmax output, lowest class index on ties.
    pub fn predict(&self, features: ArrayView2<'_, f64>) -> Result<LabelBatch> {
        Ok(self.predict_proba(features)?.argmax())
    }
}

/// Uniform `±1/sqrt(fan_in)` weights and zero biases, deterministic in `seed`.
pub fn init_network(layer_sizes: &[usize], seed: u64) -> Result<DenseNet> {
    if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "need at least two positive layer sizes, got {layer_sizes:?}"
        )));
    }
    let mut rng = stream(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || rng.gen_range(-bound..bound)));
        biases.push(Array1::zeros(fan_out));
    }
    Ok(DenseNet {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
    })
}

/// Logits for a feature batch: ReLU hidden layers, affine output.
pub fn forward(net: &DenseNet, features: ArrayView2<'_, f64>) -> Result<LogitBatch> {
    net.check_input(features)?;
    LogitBatch::new(net.logits(features))
}

fn check_labels(net: &DenseNet, features: ArrayView2<'_, f64>, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<()> {
    net.check_input(features)?;
    if s.class_count() != net.class_count() {
        return Err(Error::Shape(format!(
            "network has {} outputs, similarity matrix has {} classes",
            net.class_count(),
            s.class_count()
        )));
    }
    if labels.len() != features.nrows() || labels.is_empty() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.as_slice().iter().find(|&&y| y >= net.class_count()) {
        return Err(Error::Index {
            index: bad,
            len: net.class_count(),
        });
    }
    Ok(())
}

fn loss_and_gradients(net: &DenseNet, features: ArrayView2<'_, f64>, labels: &[usize], s: &SimilarityMatrix) -> (f64, Gradients) {
    let acts = net.activations(features);
    let (loss, mut delta) = loss_and_logit_grad(acts.last().unwrap().view(), labels, s.view());
    let mut grads = Gradients::zeros_like(net);
    for l in (0..net.weights.len()).rev() {
        grads.weights[l] = delta.t().dot(&acts[l]);
        grads.biases[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut back = delta.dot(&net.weights[l]);
            Zip::from(&mut back).and(&acts[l]).for_each(|d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
    }
    (loss, grads)
}

/// SimLoss value of the network on a batch.
pub fn batch_loss(net: &DenseNet, features: ArrayView2<'_, f64>, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<f64> {
    check_labels(net, features, labels, s)?;
    Ok(loss_and_logit_grad(net.logits(features).view(), labels.as_slice(), s.view()).0)
}

/// Exact gradients of `simloss(softmax(forward(net, x)), y, S)` for every
/// weight and bias.
pub fn backward(net: &DenseNet, features: ArrayView2<'_, f64>, labels: &LabelBatch, s: &SimilarityMatrix) -> Result<Gradients> {
    check_labels(net, features, labels, s)?;
    Ok(loss_and_gradients(net, features, labels.as_slice(), s).1)
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first_moment: Gradients,
    second_moment: Gradients,
    step_count: u64,
}

impl AdamState {
    pub fn new(net: &DenseNet) -> Self {
        Self {
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &Gradients {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &Gradients {
        &self.second_moment
    }
}

/// One bias-corrected Adam update (β1 = 0.9, β2 = 0.999, ε = 1e-8) in place.
pub fn adam_step(net: &mut DenseNet, grads: &Gradients, state: &mut AdamState, learning_rate: f64) -> Result<()> {
    if !grads.matches(net) || !state.first_moment.matches(net) {
        return Err(Error::Shape("gradient or optimizer state does not match network".into()));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let correction1 = 1.0 - ADAM_BETA1.powi(t);
    let correction2 = 1.0 - ADAM_BETA2.powi(t);
    let update = |param: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / correction1;
        let v_hat = *v / correction2;
        *param -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    };
    for l in 0..net.weights.len() {
        Zip::from(&mut net.weights[l])
            .and(&grads.weights[l])
            .and(&mut state.first_moment.weights[l])
            .and(&mut state.second_moment.weights[l])
            .for_each(update);
        Zip::from(&mut net.biases[l])
            .and(&grads.biases[l])
            .and(&mut state.first_moment.biases[l])
            .and(&mut state.second_moment.biases[l])
            .for_each(update);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarlyStopMetric {
    /// Lower is better.
    ValidationMae,
    /// Higher is better.
    ValidationAccuracy,
}

impl EarlyStopMetric {
    fn evaluate(self, predictions: &LabelBatch, targets: &LabelBatch) -> Result<f64> {
        match self {
            EarlyStopMetric::ValidationMae => metrics::mae(predictions, targets),
            EarlyStopMetric::ValidationAccuracy => metrics::accuracy(predictions, targets),
        }
    }

    /// Strict improvement; ties do not count.
    fn improves(self, candidate: f64, best: f64) -> bool {
        match self {
            EarlyStopMetric::ValidationMae => candidate < best,
            EarlyStopMetric::ValidationAccuracy => candidate > best,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub early_stop_metric: EarlyStopMetric,
    #[serde(default)]
    pub seed: u64,
}

fn default_learning_rate() -> f64 {
    0.001
}

fn default_batch_size() -> usize {
    128
}

impl TrainConfig {
    pub fn new(patience: usize, max_epochs: usize, early_stop_metric: EarlyStopMetric) -> Self {
        Self {
            learning_rate: default_learning_rate(),
            batch_size: default_batch_size(),
            patience,
            max_epochs,
            early_stop_metric,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidParameter(
                "batch size, patience and max epochs must be positive".into(),
            ));
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidParameter(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_metric: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub network: DenseNet,
    pub history: Vec<EpochRecord>,
    /// 1-based epoch the network was taken from.
    pub best_epoch: usize,
    pub best_metric: f64,
}

fn check_split(name: &str, data: &Dataset, width: usize, class_count: usize) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data(format!("{name} split is empty")));
    }
    if data.feature_width() != width {
        return Err(Error::Shape(format!(
            "{name} split has {} features, network expects {width}",
            data.feature_width()
        )));
    }
    if data.class_count() > class_count {
        return Err(Error::Shape(format!(
            "{name} split has {} classes, network has {class_count}",
            data.class_count()
        )));
    }
    Ok(())
}

/// Mini-batch Adam training with patience-based early stopping.
///
/// Examples are reshuffled every epoch from a stream seeded by
/// `config.seed`; the final partial batch is kept. Returns the parameters of
/// the best validation epoch.
pub fn train(splits: &Splits, s: &SimilarityMatrix, layer_sizes: &[usize], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let mut net = init_network(layer_sizes, mix_seed(config.seed, 0))?;
    if net.class_count() != s.class_count() {
        return Err(Error::Shape(format!(
            "output layer has {} classes, similarity matrix has {}",
            net.class_count(),
            s.class_count()
        )));
    }
    check_split("train", &splits.train, net.input_width(), net.class_count())?;
    check_split("validation", &splits.validation, net.input_width(), net.class_count())?;

    let train = &splits.train;
    let validation_targets = LabelBatch::from_vec(splits.validation.labels().to_vec());
    let mut state = AdamState::new(&net);
    let mut order_rng = stream(mix_seed(config.seed, 1));
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut history = Vec::new();
    let mut best: Option<(f64, usize, DenseNet)> = None;
    let mut stale = 0;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let x = train.features().select(Axis(0), batch);
            let y: Vec<usize> = batch.iter().map(|&i| train.labels()[i]).collect();
            let (loss, grads) = loss_and_gradients(&net, x.view(), &y, s);
            if !loss.is_finite() {
                return Err(Error::Data(format!("non-finite training loss in epoch {epoch}")));
            }
            loss_sum += loss * batch.len() as f64;
            adam_step(&mut net, &grads, &mut state, config.learning_rate)?;
        }

        let predictions = net.predict(splits.validation.features())?;
        let metric = config.early_stop_metric.evaluate(&predictions, &validation_targets)?;
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            validation_metric: metric,
        });

        let improved = best
            .as_ref()
            .is_none_or(|(b, _, _)| config.early_stop_metric.improves(metric, *b));
        if improved {
            best = Some((metric, epoch, net.clone()));
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    let (best_metric, best_epoch, network) = best.expect("at least one epoch runs");
    Ok(TrainOutcome {
        network,
        history,
        best_epoch,
        best_metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim_matrix::{identity_matrix, order_matrix};
    use ndarray::array;

    #[test]
    fn init_shapes_and_determinism() {
        let a = init_network(&[4, 3], 11).unwrap();
        assert_eq!(a.weights()[0].dim(), (3, 4));
        assert_eq!(a.biases()[0].len(), 3);
        assert!(a.biases()[0].iter().all(|&b| b == 0.0));
        assert_eq!(a, init_network(&[4, 3], 11).unwrap());
        assert_ne!(a, init_network(&[4, 3], 12).unwrap());
        let bound = 0.5;
        assert!(a.weights()[0].iter().all(|w| w.abs() < bound));
        assert!(init_network(&[4], 1).is_err());
        assert!(init_network(&[4, 0, 3], 1).is_err());
    }

    #[test]
    fn forward_zero_and_affine() {
        let zero = DenseNet::from_parameters(
            vec![Array2::zeros((5, 3)), Array2::zeros((2, 5))],
            vec![Array1::zeros(5), Array1::zeros(2)],
        )
        .unwrap();
        let x = array![[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]];
        assert_eq!(forward(&zero, x.view()).unwrap().into_inner(), Array2::<f64>::zeros((2, 2)));

        let affine = DenseNet::from_parameters(vec![array![[1.0, 2.0], [-1.0, 0.5]]], vec![array![0.1, -0.2]]).unwrap();
        let z = forward(&affine, array![[3.0, 4.0]].view()).unwrap().into_inner();
        assert_eq!(z, array![[11.1, -1.2]]);
        assert!(matches!(forward(&affine, array![[1.0]].view()), Err(Error::Shape(_))));
    }

    #[test]
    fn forward_matches_scalar_reimplementation() {
        let net = init_network(&[3, 5, 4, 2], 9).unwrap();
        let mut rng = stream(4);
        let x = Array2::from_shape_simple_fn((6, 3), || rng.gen_range(-2.0..2.0));
        let z = forward(&net, x.view()).unwrap().into_inner();
        for n in 0..6 {
            let mut act: Vec<f64> = x.row(n).to_vec();
            for (l, (w, b)) in net.weights().iter().zip(net.biases()).enumerate() {
                let mut next = vec![0.0; w.nrows()];
                for (o, out) in next.iter_mut().enumerate() {
                    let mut sum = b[o];
                    for (i, a) in act.iter().enumerate() {
                        sum += w[[o, i]] * a;
                    }
                    *out = if l + 1 < net.weights().len() { sum.max(0.0) } else { sum };
                }
                act = next;
            }
            for (c, v) in act.iter().enumerate() {
                assert!((z[[n, c]] - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_output_delta_is_p_minus_onehot() {
        let net = DenseNet::from_parameters(vec![array![[0.3, -0.1], [0.2, 0.4], [-0.5, 0.1]]], vec![array![0.0, 0.1, -0.1]]).unwrap();
        let x = array![[1.0, 2.0]];
        let y = LabelBatch::from_vec(vec![1]);
        let g = backward(&net, x.view(), &y, &identity_matrix(3).unwrap()).unwrap();
        let p = net.predict_proba(x.view()).unwrap();
        let delta = [p.row(0)[0], p.row(0)[1] - 1.0, p.row(0)[2]];
        for (c, d) in delta.iter().enumerate() {
            assert!((g.biases[0][c] - d).abs() < 1e-15);
        }
    }

    #[test]
    fn all_ones_matrix_gives_zero_gradients() {
        let net = init_network(&[3, 4, 3], 5).unwrap();
        let x = array![[0.1, 0.2, 0.3], [1.0, -1.0, 0.0]];
        let s = SimilarityMatrix::new(Array2::ones((3, 3))).unwrap();
        let g = backward(&net, x.view(), &LabelBatch::from_vec(vec![0, 2]), &s).unwrap();
        assert!(g.weights.iter().all(|w| w.iter().all(|v| v.abs() < 1e-15)));
        assert!(g.biases.iter().all(|b| b.iter().all(|v| v.abs() < 1e-15)));
    }

    #[test]
    fn backward_matches_finite_differences() {
        let net = init_network(&[3, 4, 3], 21).unwrap();
        let mut rng = stream(8);
        let x = Array2::from_shape_simple_fn((5, 3), || rng.gen_range(-1.0..1.0));
        let y = LabelBatch::from_vec(vec![0, 1, 2, 2, 1]);
        let s = order_matrix(3, 0.4).unwrap();
        let g = backward(&net, x.view(), &y, &s).unwrap();
        let analytic: Vec<f64> = g
            .weights
            .iter()
            .flat_map(|w| w.iter().copied())
            .chain(g.biases.iter().flat_map(|b| b.iter().copied()))
            .collect();
        let h = 1e-5;
        for (k, &a) in analytic.iter().enumerate() {
            let mut plus = net.clone();
            *plus.parameters_mut().nth(k).unwrap() += h;
            let mut minus = net.clone();
            *minus.parameters_mut().nth(k).unwrap() -= h;
            let numeric = (batch_loss(&plus, x.view(), &y, &s).unwrap() - batch_loss(&minus, x.view(), &y, &s).unwrap()) / (2.0 * h);
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            assert!(err < 1e-4 || (a - numeric).abs() < 1e-8, "param {k}: {a} vs {numeric}");
        }
    }

    #[test]
    fn adam_zero_gradient() {
        let mut net = init_network(&[2, 2], 3).unwrap();
        let before = net.clone();
        let mut state = AdamState::new(&net);
        let zeros = Gradients::zeros_like(&net);
        adam_step(&mut net, &zeros, &mut state, 0.001).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn adam_scalar_reference() {
        let mut net = DenseNet::from_parameters(vec![array![[1.0]]], vec![array![0.0]]).unwrap();
        let mut state = AdamState::new(&net);
        let grads = Gradients {
            weights: vec![array![[0.5]]],
            biases: vec![array![-2.0]],
        };
        adam_step(&mut net, &grads, &mut state, 0.01).unwrap();
        // first bias-corrected step: m_hat = g, v_hat = g^2, so the move is lr * g / (|g| + eps)
        assert!((net.weights()[0][[0, 0]] - (1.0 - 0.01 * 0.5 / (0.5 + 1e-8))).abs() < 1e-15);
        assert!((net.biases()[0][0] - 0.01 * 2.0 / (2.0 + 1e-8)).abs() < 1e-15);

        // scalar oracle for a second identical step
        let (mut m, mut v, mut theta) = (0.0f64, 0.0f64, 1.0f64);
        for t in 1..=2 {
            m = 0.9 * m + 0.1 * 0.5;
            v = 0.999 * v + 0.001 * 0.25;
            let m_hat = m / (1.0 - 0.9f64.powi(t));
            let v_hat = v / (1.0 - 0.999f64.powi(t));
            theta -= 0.01 * m_hat / (v_hat.sqrt() + 1e-8);
        }
        adam_step(&mut net, &grads, &mut state, 0.01).unwrap();
        assert!((net.weights()[0][[0, 0]] - theta).abs() < 1e-15);
        assert_eq!(state.step_count(), 2);
    }

    #[test]
    fn adam_shape_mismatch() {
        let mut net = init_network(&[2, 2], 3).unwrap();
        let other = init_network(&[3, 2], 3).unwrap();
        let mut state = AdamState::new(&net);
        assert!(adam_step(&mut net, &Gradients::zeros_like(&other), &mut state, 0.1).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::new(5, 3, EarlyStopMetric::ValidationMae);
        assert!(c.validate().is_err());
        c.max_epochs = 5;
        assert!(c.validate().is_ok());
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }
}
