//! Class-similarity matrices.
//!
//! A [`SimilarityMatrix`] holds one row per target class. Row `y` says how
//! much credit the loss gives for probability mass placed on each class when
//! the true class is `y`. Two generators are provided: [`order_matrix`] for
//! classes with a natural order and [`lower_bound_matrix`] for arbitrary
//! pairwise similarities (typically clamped cosine similarity of class-name
//! embeddings, see [`EmbeddingTable`]).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Dense C×C matrix with entries in `[0, 1]` and a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Array2<f64>,
}

impl SimilarityMatrix {
    /// Validates and wraps a raw matrix.
    ///
    /// Entries within `1e-9` outside `[0, 1]` are clamped back in (cosine
    /// arithmetic yields values like `1 + 2e-16`); anything further out is
    /// rejected. Off-diagonal ones are allowed.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows != cols {
            return Err(Error::InvalidMatrix(format!(
                "similarity matrix must be square, got {rows}x{cols}"
            )));
        }
        check_class_count(rows)?;
        let mut values = values;
        for ((i, j), v) in values.indexed_iter_mut() {
            if !v.is_finite() || *v < -1e-9 || *v > 1.0 + 1e-9 {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({i},{j}) = {v} outside [0, 1]"
                )));
            }
            *v = v.clamp(0.0, 1.0);
            if i == j && *v != 1.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry ({i},{i}) = {v}, expected 1"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn class_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn row(&self, target: usize) -> ArrayView1<'_, f64> {
        self.values.row(target)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    /// Largest entry off the diagonal.
    pub fn max_off_diagonal(&self) -> f64 {
        self.values
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    }

    /// Largest absolute deviation from the identity matrix.
    pub fn distance_from_identity(&self) -> f64 {
        self.values
            .indexed_iter()
            .map(|((i, j), &v)| if i == j { (v - 1.0).abs() } else { v.abs() })
            .fold(0.0, f64::max)
    }
}

fn check_class_count(class_count: usize) -> Result<()> {
    if class_count < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least 2 classes, got {class_count}"
        )));
    }
    Ok(())
}

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !(0.0..1.0).contains(&value) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1), got {value}"
        )));
    }
    Ok(())
}

/// The identity matrix; SimLoss under it is plain cross entropy.
pub fn identity_matrix(class_count: usize) -> Result<SimilarityMatrix> {
    check_class_count(class_count)?;
    Ok(SimilarityMatrix {
        values: Array2::eye(class_count),
    })
}

/// `S[i][j] = r^|i-j|` for ordered classes, with `0^0 = 1`.
pub fn order_matrix(class_count: usize, reduction_factor: f64) -> Result<SimilarityMatrix> {
    check_class_count(class_count)?;
    check_unit_interval("reduction factor", reduction_factor)?;
    let values = Array2::from_shape_fn((class_count, class_count), |(i, j)| {
        let distance = i.abs_diff(j);
        if distance == 0 {
            1.0
        } else if reduction_factor == 0.0 {
            0.0
        } else {
            reduction_factor.powi(distance as i32)
        }
    });
    Ok(SimilarityMatrix { values })
}

/// Cuts raw similarities below `lower_bound` and rescales the rest so the
/// bound maps to zero: `max(0, s - l) / (1 - l)`.
pub fn lower_bound_matrix(raw_sim: ArrayView2<'_, f64>, lower_bound: f64) -> Result<SimilarityMatrix> {
    check_unit_interval("lower bound", lower_bound)?;
    let (rows, cols) = raw_sim.dim();
    if rows != cols {
        return Err(Error::InvalidMatrix(format!(
            "raw similarity matrix must be square, got {rows}x{cols}"
        )));
    }
    check_class_count(rows)?;
    for i in 0..rows {
        if raw_sim[[i, i]] != 1.0 {
            return Err(Error::InvalidMatrix(format!(
                "raw similarity diagonal ({i},{i}) = {}, expected 1",
                raw_sim[[i, i]]
            )));
        }
    }
    let scale = 1.0 - lower_bound;
    let values = Array2::from_shape_fn((rows, cols), |(i, j)| {
        if i == j {
            1.0
        } else {
            ((raw_sim[[i, j]] - lower_bound).max(0.0) / scale).clamp(0.0, 1.0)
        }
    });
    SimilarityMatrix::new(values)
}

/// Divides every entry by its row sum, giving a row-stochastic matrix.
pub fn row_normalize(matrix: &SimilarityMatrix) -> Array2<f64> {
    let mut out = matrix.values.clone();
    for mut row in out.rows_mut() {
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Class names paired with embedding vectors of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    names: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(names: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != vectors.len() {
            return Err(Error::InvalidInput(format!(
                "{} names but {} vectors",
                names.len(),
                vectors.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate class name {name:?}")));
            }
        }
        let dim = vectors.first().map_or(0, Vec::len);
        for (name, v) in names.iter().zip(&vectors) {
            if v.is_empty() || v.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "embedding for {name:?} has dimension {}, expected {dim} (>= 1)",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("embedding for {name:?} is not finite")));
            }
            if norm(v) <= 0.0 {
                return Err(Error::InvalidInput(format!("embedding for {name:?} is all zero")));
            }
        }
        Ok(Self { names, vectors })
    }

    /// Parses the plain-text embedding format: one `name v1 ... vd` line per
    /// class, fields separated by single spaces. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut vectors: Vec<Vec<f64>> = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in text.split('\n').enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let name = fields.next().unwrap_or_default();
            if name.is_empty() {
                return Err(Error::parse(line_no, "missing class name"));
            }
            let vector = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("bad number {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if vector.is_empty() {
                return Err(Error::parse(line_no, "no vector components"));
            }
            if let Some(first) = vectors.first() {
                if first.len() != vector.len() {
                    return Err(Error::parse(
                        line_no,
                        format!("expected {} components, found {}", first.len(), vector.len()),
                    ));
                }
            }
            if vector.iter().any(|x| !x.is_finite()) || norm(&vector) <= 0.0 {
                return Err(Error::parse(line_no, "vector must be finite and non-zero"));
            }
            if !seen.insert(name.to_string()) {
                return Err(Error::parse(line_no, format!("duplicate class name {name:?}")));
            }
            names.push(name.to_string());
            vectors.push(vector);
        }
        if names.is_empty() {
            return Err(Error::parse(0, "no embeddings found"));
        }
        Self::new(names, vectors)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.with_path(path))
    }

    /// Serializes in the same format [`EmbeddingTable::parse`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, v) in self.names.iter().zip(&self.vectors) {
            out.push_str(name);
            for x in v {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Keeps the given entries, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut names = Vec::with_capacity(indices.len());
        let mut vectors = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Index { index: i, len: self.len() });
            }
            names.push(self.names[i].clone());
            vectors.push(self.vectors[i].clone());
        }
        Self::new(names, vectors)
    }

    /// Full matrix of clamped cosine similarities.
    pub fn similarity_matrix(&self) -> Array2<f64> {
        let n = self.len();
        let norms: Vec<f64> = self.vectors.iter().map(|v| norm(v)).collect();
        Array2::from_shape_fn((n, n), |(i, j)| {
            clamped_cosine(&self.vectors[i], &self.vectors[j], norms[i], norms[j], i == j)
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn clamped_cosine(a: &[f64], b: &[f64], norm_a: f64, norm_b: f64, same: bool) -> f64 {
    if same {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (norm_a * norm_b)).clamp(0.0, 1.0)
}

/// `max(0, cos(w_i, w_j))`, exactly 1 on the diagonal.
pub fn cosine_similarity_clamped(table: &EmbeddingTable, i: usize, j: usize) -> Result<f64> {
    for index in [i, j] {
        if index >= table.len() {
            return Err(Error::Index { index, len: table.len() });
        }
    }
    let (a, b) = (table.vector(i), table.vector(j));
    Ok(clamped_cosine(a, b, norm(a), norm(b), i == j))
}
