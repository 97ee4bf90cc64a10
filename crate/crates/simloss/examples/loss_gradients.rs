//! Evaluates the loss and its gradients on a small batch and compares the
//! logit gradient with central differences.

use ndarray::array;
use simloss::loss::{loss_gap, prob_loss, simloss, simloss_grad_logits, softmax};
use simloss::sim_matrix::{identity_matrix, order_matrix};
use simloss::{LabelBatch, LogitBatch};

fn main() -> simloss::Result<()> {
    let logits = array![[2.0, 0.5, -1.0, 0.0], [0.1, 0.2, 1.5, -0.3]];
    let labels = LabelBatch::new(vec![1, 2], 4)?;
    let probs = softmax(&LogitBatch::new(logits.clone())?);

    println!("cross entropy   {:.6}", simloss(&probs, &labels, &identity_matrix(4)?)?);
    for r in [0.3, 0.6, 0.9] {
        let s = order_matrix(4, r)?;
        let loss = simloss(&probs, &labels, &s)?;
        let gap = prob_loss(&probs, &labels, &s)? - loss;
        println!("r = {r}: loss {loss:.6}, normalized-variant gap {gap:.6} (constant {:.6})", loss_gap(&labels, &s)?);
    }

    let s = order_matrix(4, 0.6)?;
    let grad = simloss_grad_logits(&LogitBatch::new(logits.clone())?, &labels, &s)?;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for ((i, j), &g) in grad.indexed_iter() {
        let mut plus = logits.clone();
        let mut minus = logits.clone();
        plus[[i, j]] += h;
        minus[[i, j]] -= h;
        let f = |z| simloss(&softmax(&LogitBatch::new(z).unwrap()), &labels, &s).unwrap();
        worst = worst.max((g - (f(plus) - f(minus)) / (2.0 * h)).abs());
    }
    println!("logit gradient:\n{grad:.5}\nmax deviation from central differences {worst:.2e}");
    Ok(())
}
