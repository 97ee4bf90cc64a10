//! Categorical cross entropy generalized with a class-similarity matrix.
//!
//! The loss replaces `-ln p[y]` with `-ln(sum_c S[y][c] * p[c])`, so
//! probability mass on classes similar to the target is punished less. The
//! crate contains:
//!
//! - [`sim_matrix`]: similarity matrices from class order or from clamped
//!   cosine similarity of class embeddings,
//! - [`loss`]: the loss, its gradients, and the row-normalized variant,
//! - [`model`]: a small MLP trained with Adam and early stopping,
//! - [`metrics`]: accuracy, MAE, MSE, superclass metrics, the Wilcoxon
//!   signed-rank test, and output-distribution analysis,
//! - [`data`]: synthetic generators, file loaders, and splitting,
//! - [`harness`]: grid search over the matrix parameter with paired seeds.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory
//! (`cargo run --release --example <name>`).

pub mod data;
pub mod error;
pub mod harness;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sim_matrix;

pub use error::{Error, Result};
pub use loss::{LabelBatch, LogitBatch, ProbabilityBatch};
pub use sim_matrix::{EmbeddingTable, SimilarityMatrix};
