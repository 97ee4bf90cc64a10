//! Datasets: synthetic generators, CSV and embedding loaders, and seeded
//! splitting.

use std::fs::File;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SuperclassMap;
use crate::rng::{normal, stream, Stream};
use crate::sim_matrix::EmbeddingTable;

/// Feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
    superclasses: Option<SuperclassMap>,
    class_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
            return Err(Error::Index {
                index: bad,
                len: class_count,
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("features must be finite".into()));
        }
        Ok(Self {
            features,
            labels,
            class_count,
            superclasses: None,
            class_names: None,
        })
    }

    pub fn with_superclasses(mut self, map: SuperclassMap) -> Result<Self> {
        if map.class_count() != self.class_count {
            return Err(Error::Shape(format!(
                "superclass map covers {} classes, dataset has {}",
                map.class_count(),
                self.class_count
            )));
        }
        self.superclasses = Some(map);
        Ok(self)
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.class_count {
            return Err(Error::Shape(format!(
                "{} class names for {} classes",
                names.len(),
                self.class_count
            )));
        }
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_width(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn superclasses(&self) -> Option<&SuperclassMap> {
        self.superclasses.as_ref()
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    /// Rows at `indices`, in that order; class metadata is kept.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            superclasses: self.superclasses.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Keeps only examples of the listed classes and renumbers them densely:
    /// `kept[k]` becomes class `k`.
    pub fn retain_classes(&self, kept: &[usize]) -> Result<Dataset> {
        let mut new_index = vec![None; self.class_count];
        for (k, &c) in kept.iter().enumerate() {
            if c >= self.class_count {
                return Err(Error::Index {
                    index: c,
                    len: self.class_count,
                });
            }
            new_index[c] = Some(k);
        }
        let rows: Vec<usize> = (0..self.len()).filter(|&i| new_index[self.labels[i]].is_some()).collect();
        let labels = rows.iter().map(|&i| new_index[self.labels[i]].unwrap()).collect();
        let mut out = Dataset::new(self.features.select(Axis(0), &rows), labels, kept.len())?;
        if let Some(map) = &self.superclasses {
            let mapping = kept.iter().map(|&c| map.get(c)).collect::<Result<Vec<_>>>()?;
            out.superclasses = Some(SuperclassMap::new(mapping));
        }
        if let Some(names) = &self.class_names {
            out.class_names = Some(kept.iter().map(|&c| names[c].clone()).collect());
        }
        Ok(out)
    }

    /// Per-class example counts.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Writes the CSV format read by [`load_csv`].
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let to_err = |e: csv::Error| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        };
        let mut writer = csv::Writer::from_path(path).map_err(to_err)?;
        let mut header: Vec<String> = (0..self.feature_width()).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        if self.superclasses.is_some() {
            header.push("superclass".into());
        }
        writer.write_record(&header).map_err(to_err)?;
        for (row, &label) in self.features.rows().into_iter().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.to_string());
            if let Some(map) = &self.superclasses {
                record.push(map.get(label)?.to_string());
            }
            writer.write_record(&record).map_err(to_err)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinalParams {
    pub class_count: usize,
    pub per_class: usize,
    pub noise_sigma: f64,
    /// When set, class `c` gets `round(per_class * ratio^c)` examples (at
    /// least one) instead of exactly `per_class`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_ratio: Option<f64>,
}

impl OrdinalParams {
    pub fn new(class_count: usize, per_class: usize, noise_sigma: f64) -> Self {
        Self {
            class_count,
            per_class,
            noise_sigma,
            frequency_ratio: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.class_count < 2 || self.per_class == 0 {
            return Err(Error::InvalidParameter(
                "ordinal data needs at least 2 classes and 1 example per class".into(),
            ));
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be positive, got {}",
                self.noise_sigma
            )));
        }
        if let Some(r) = self.frequency_ratio {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!("frequency ratio must be positive, got {r}")));
            }
        }
        Ok(())
    }

    fn count_for(&self, class: usize) -> usize {
        match self.frequency_ratio {
            None => self.per_class,
            Some(r) => ((self.per_class as f64 * r.powi(class as i32)).round() as usize).max(1),
        }
    }
}

/// Noiseless feature vector of an ordinal class with phase jitters applied.
fn ordinal_features(class: f64, class_count: f64, g: [f64; 3]) -> [f64; 3] {
    let tau = std::f64::consts::TAU;
    [
        (class + g[0]) / class_count,
        (tau * (class + g[1]) / class_count).sin(),
        (tau * (class + g[2]) / class_count).cos(),
    ]
}

/// Ordered classes embedded on a line plus a circle, with Gaussian jitter of
/// `noise_sigma` class widths on each coordinate.
pub fn synth_ordinal(params: &OrdinalParams, seed: u64) -> Result<Dataset> {
    params.validate()?;
    let mut rng = stream(seed);
    let c_total = params.class_count as f64;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for class in 0..params.class_count {
        for _ in 0..params.count_for(class) {
            let g = [0; 3].map(|_| normal(&mut rng, 0.0, params.noise_sigma));
            rows.extend(ordinal_features(class as f64, c_total, g));
            labels.push(class);
        }
    }
    let features = Array2::from_shape_vec((labels.len(), 3), rows).expect("three features per row");
    Dataset::new(features, labels, params.class_count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupedParams {
    pub group_count: usize,
    pub classes_per_group: usize,
    pub per_class: usize,
    pub embed_dim: usize,
    pub within_sigma: f64,
    pub feature_sigma: f64,
}

impl GroupedParams {
    fn validate(&self) -> Result<()> {
        if self.group_count < 2 || self.classes_per_group < 2 || self.per_class == 0 || self.embed_dim == 0 {
            return Err(Error::InvalidParameter(
                "grouped data needs >= 2 groups, >= 2 classes per group, >= 1 example per class and a positive embedding dimension".into(),
            ));
        }
        for (name, v) in [("within sigma", self.within_sigma), ("feature sigma", self.feature_sigma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

fn gaussian_vector(rng: &mut Stream, dim: usize, sigma: f64) -> Vec<f64> {
    (0..dim).map(|_| normal(rng, 0.0, sigma)).collect()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Class name used for class `k` of group `g` by [`synth_grouped`].
pub fn grouped_class_name(group: usize, class: usize) -> String {
    format!("g{group}c{class}")
}

/// Groups of related classes. Each group has a random unit centroid; class
/// embeddings are jittered, renormalized centroids; examples are their class
/// embedding plus Gaussian noise. Class `g * K + k` belongs to superclass `g`.
pub fn synth_grouped(params: &GroupedParams, seed: u64) -> Result<(Dataset, EmbeddingTable)> {
    params.validate()?;
    let mut rng = stream(seed);
    let d = params.embed_dim;
    let mut names = Vec::new();
    let mut embeddings = Vec::new();
    let mut mapping = Vec::new();
    for group in 0..params.group_count {
        let centroid = loop {
            let v = gaussian_vector(&mut rng, d, 1.0);
            if v.iter().any(|x| *x != 0.0) {
                break normalized(v);
            }
        };
        for class in 0..params.classes_per_group {
            let jitter = gaussian_vector(&mut rng, d, params.within_sigma);
            let raw: Vec<f64> = centroid.iter().zip(&jitter).map(|(c, j)| c + j).collect();
            embeddings.push(normalized(raw));
            names.push(grouped_class_name(group, class));
            mapping.push(group);
        }
    }
    let class_count = embeddings.len();
    let mut rows = Vec::with_capacity(class_count * params.per_class * d);
    let mut labels = Vec::new();
    for (class, embedding) in embeddings.iter().enumerate() {
        for _ in 0..params.per_class {
            rows.extend(embedding.iter().map(|e| e + normal(&mut rng, 0.0, params.feature_sigma)));
            labels.push(class);
        }
    }
    let features = Array2::from_shape_vec((labels.len(), d), rows).expect("d features per row");
    let dataset = Dataset::new(features, labels, class_count)?
        .with_superclasses(SuperclassMap::new(mapping))?
        .with_class_names(names.clone())?;
    let table = EmbeddingTable::new(names, embeddings)?;
    Ok((dataset, table))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

/// Reads a header-named CSV: `f0..f{d-1}` feature columns, `label`, and an
/// optional `superclass` column. The class count is the largest label + 1.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file).map_err(|e| e.with_path(path))
}

/// [`load_csv`] over any reader.
pub fn read_csv(reader: impl std::io::Read) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = reader.headers().map_err(csv_error)?.clone();
    let mut label_col = None;
    let mut superclass_col = None;
    let mut feature_cols: Vec<(usize, usize)> = Vec::new();
    for (col, name) in header.iter().enumerate() {
        match name {
            "label" => label_col = Some(col),
            "superclass" => superclass_col = Some(col),
            _ => match name.strip_prefix('f').and_then(|n| n.parse::<usize>().ok()) {
                Some(j) => feature_cols.push((j, col)),
                None => return Err(Error::parse(1, format!("unknown column {name:?}"))),
            },
        }
    }
    let label_col = label_col.ok_or_else(|| Error::parse(1, "missing label column"))?;
    feature_cols.sort_unstable();
    if feature_cols.is_empty() || feature_cols.iter().enumerate().any(|(k, &(j, _))| k != j) {
        return Err(Error::parse(1, "feature columns must be named f0..f{d-1}"));
    }
    let width = feature_cols.len();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut superclass_of: Vec<Option<usize>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for &(_, col) in &feature_cols {
            let field = &record[col];
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(line, format!("bad feature value {field:?}")))?;
            values.push(v);
        }
        let parse_index = |col: usize, what: &str| -> Result<usize> {
            record[col]
                .parse()
                .map_err(|_| Error::parse(line, format!("{what} {:?} is not a non-negative integer", &record[col])))
        };
        let label = parse_index(label_col, "label")?;
        labels.push(label);
        if let Some(col) = superclass_col {
            let sc = parse_index(col, "superclass")?;
            if superclass_of.len() <= label {
                superclass_of.resize(label + 1, None);
            }
            match superclass_of[label] {
                Some(existing) if existing != sc => {
                    return Err(Error::parse(
                        line,
                        format!("class {label} assigned to superclasses {existing} and {sc}"),
                    ));
                }
                _ => superclass_of[label] = Some(sc),
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::Data("CSV has no data rows".into()));
    }
    let class_count = labels.iter().max().unwrap() + 1;
    let features = Array2::from_shape_vec((labels.len(), width), values).expect("width checked per row");
    let mut dataset = Dataset::new(features, labels, class_count)?;
    if superclass_col.is_some() {
        superclass_of.resize(class_count, None);
        let mapping = superclass_of
            .iter()
            .enumerate()
            .map(|(c, s)| s.ok_or_else(|| Error::Data(format!("class {c} has no rows, so its superclass is unknown"))))
            .collect::<Result<Vec<_>>>()?;
        dataset = dataset.with_superclasses(SuperclassMap::new(mapping))?;
    }
    Ok(dataset)
}

/// Embeddings matched to a list of class names.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSelection {
    /// Embeddings of the retained classes, in class order.
    pub table: EmbeddingTable,
    /// Original class indices that have an embedding.
    pub kept: Vec<usize>,
    /// Class names without an embedding.
    pub dropped: Vec<String>,
}

impl EmbeddingSelection {
    /// Removes examples of dropped classes and renumbers labels densely.
    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        let filtered = dataset.retain_classes(&self.kept)?;
        filtered.with_class_names(self.table.names().to_vec())
    }
}

/// Matches `class_names` against an embedding table; classes with no
/// embedding are reported as dropped.
pub fn select_embeddings(all: &EmbeddingTable, class_names: &[String]) -> Result<EmbeddingSelection> {
    let mut kept = Vec::new();
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for (class, name) in class_names.iter().enumerate() {
        match all.position(name) {
            Some(row) => {
                kept.push(class);
                rows.push(row);
            }
            None => dropped.push(name.clone()),
        }
    }
    if kept.len() < 2 {
        return Err(Error::Data(format!(
            "only {} of {} classes have embeddings",
            kept.len(),
            class_names.len()
        )));
    }
    Ok(EmbeddingSelection {
        table: all.select(&rows)?,
        kept,
        dropped,
    })
}

/// Reads an embedding file and matches it against `class_names`.
pub fn load_embeddings(path: impl AsRef<Path>, class_names: &[String]) -> Result<EmbeddingSelection> {
    select_embeddings(&EmbeddingTable::read(path)?, class_names)
}

/// Split fractions plus the permutation seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            train,
            validation,
            test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = [self.train, self.validation, self.test];
        if fractions.iter().any(|f| f.is_nan() || *f <= 0.0) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "split fractions must be positive and sum to 1, got {fractions:?}"
            )));
        }
        Ok(())
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

impl Splits {
    /// Standardizes every split with per-feature mean and standard deviation
    /// measured on the training split. Constant features are only centered.
    pub fn standardized(&self) -> Splits {
        let x = self.train.features();
        let mean = x.mean_axis(Axis(0)).expect("training split is non-empty");
        let std: Array1<f64> = x.std_axis(Axis(0), 0.0).mapv(|s| if s > 0.0 { s } else { 1.0 });
        let apply = |d: &Dataset| {
            let mut out = d.clone();
            out.features = (&d.features - &mean) / &std;
            out
        };
        Splits {
            train: apply(&self.train),
            validation: apply(&self.validation),
            test: apply(&self.test),
        }
    }
}

/// Seeded random partition of `0..n`. Train and validation sizes are
/// floored; the remainder goes to test.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<[Vec<usize>; 3]> {
    spec.validate()?;
    let n_train = (n as f64 * spec.train + 1e-9).floor() as usize;
    let n_val = (n as f64 * spec.validation + 1e-9).floor() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(Error::Data(format!(
            "{n} examples cannot fill three non-empty splits with fractions {:?}",
            (spec.train, spec.validation, spec.test)
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(spec.seed));
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok([order, validation, test])
}

pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<Splits> {
    let [train, validation, test] = split_indices(dataset.len(), spec)?;
    Ok(Splits {
        train: dataset.subset(&train),
        validation: dataset.subset(&validation),
        test: dataset.subset(&test),
    })
}
