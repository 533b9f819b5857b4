//! Dataset loading, normalization, partitioning and synthetic instances.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::block::norm;
use crate::error::{Error, Result};
use crate::oracle::{LogisticModel, QuadraticModel};
use crate::rng::{self, Domain};

/// A labelled design matrix held fully in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    /// Always in `{-1, +1}`.
    pub labels: Vec<f64>,
    pub name: String,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Dataset("dataset has no rows".into()));
        }
        let p = features[0].len();
        if p == 0 || features.iter().any(|r| r.len() != p) {
            return Err(Error::Dataset("rows must share a positive dimension".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::Dataset("feature/label count mismatch".into()));
        }
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::Dataset("labels must be -1 or +1".into()));
        }
        Ok(Self {
            features,
            labels,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Libsvm,
    Csv,
}

impl Format {
    /// `.csv` is csv, everything else libsvm.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Libsvm,
        }
    }
}

/// Maps a raw label set onto `{-1, +1}`: `{-1,1}` is kept, `{0,1}` and
/// `{1,2}` are remapped low → −1, high → +1.
fn label_map(raw: &[f64]) -> Result<impl Fn(f64) -> f64> {
    let set: BTreeSet<i64> = raw
        .iter()
        .map(|&l| {
            if l.fract() == 0.0 && l.is_finite() {
                Ok(l as i64)
            } else {
                Err(Error::Dataset(format!("non-integer label {l}")))
            }
        })
        .collect::<Result<_>>()?;
    let within = |allowed: [i64; 2]| set.iter().all(|l| allowed.contains(l));
    let low = if within([-1, 1]) {
        -1.0
    } else if within([0, 1]) {
        0.0
    } else if within([1, 2]) {
        1.0
    } else {
        return Err(Error::Dataset(format!("cannot map label set {set:?} onto {{-1, +1}}")));
    };
    Ok(move |l: f64| if l == low { -1.0 } else { 1.0 })
}

pub fn load_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (features, raw_labels) = match format {
        Format::Libsvm => read_libsvm(path)?,
        Format::Csv => read_csv(path)?,
    };
    let map = label_map(&raw_labels)?;
    let labels = raw_labels.into_iter().map(map).collect();
    Dataset::new(features, labels, name)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_libsvm(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("bad label `{label_tok}`")))?;
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(path, line_no, format!("expected index:value, found `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| parse_err(path, line_no, format!("bad feature index `{idx}`")))?;
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(path, line_no, format!("bad feature value `{val}`")))?;
            dim = dim.max(idx);
            row.push((idx - 1, val));
        }
        sparse.push(row);
        labels.push(label);
    }
    // missing indices densify to zero
    let features = sparse
        .into_iter()
        .map(|entries| {
            let mut dense = vec![0.0; dim];
            for (i, v) in entries {
                dense[i] = v;
            }
            dense
        })
        .collect();
    Ok((features, labels))
}

fn read_csv(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(path, 1, e.to_string()))?;
    let headers = reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let label_col = headers
        .iter()
        .position(|h| h.trim() == "label")
        .ok_or_else(|| parse_err(path, 1, "no `label` column in header"))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line_no = k + 2;
        let record = record.map_err(|e| parse_err(path, line_no, e.to_string()))?;
        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(path, line_no, format!("bad number `{cell}` in column {}", c + 1)))?;
            if c == label_col {
                labels.push(v);
            } else {
                row.push(v);
            }
        }
        features.push(row);
    }
    Ok((features, labels))
}

/// Writes `label,x1,...,xp` with round-trip float formatting.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| Error::Io(e.into()))?;
    let mut header = vec!["label".to_string()];
    header.extend((1..=dataset.dim()).map(|k| format!("x{k}")));
    w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
    for (row, label) in dataset.features.iter().zip(&dataset.labels) {
        let mut cells = vec![label.to_string()];
        cells.extend(row.iter().map(f64::to_string));
        w.write_record(&cells).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// Scales every row to unit Euclidean norm.
pub fn normalize_rows(dataset: &Dataset) -> Result<Dataset> {
    let mut out = dataset.clone();
    for (i, row) in out.features.iter_mut().enumerate() {
        let len = norm(row);
        if len == 0.0 {
            return Err(Error::Dataset(format!("row {i} is all zeros and cannot be normalized")));
        }
        if len != 1.0 {
            row.iter_mut().for_each(|v| *v /= len);
        }
    }
    Ok(out)
}

/// Seeded shuffle followed by contiguous shards whose sizes differ by at most
/// one (the first `N mod n` shards get the extra row).
pub fn partition_indices(len: usize, n: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n == 0 || len < n {
        return Err(Error::Dataset(format!("cannot split {len} rows over {n} nodes")));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut rng::stream(seed, Domain::Partition, 0, 0));
    let base = len / n;
    let extra = len % n;
    let mut shards = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let size = base + usize::from(i < extra);
        shards.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(shards)
}

/// Distributes rows uniformly over `n` nodes as logistic local models.
/// Rows must already have unit norm (see [`normalize_rows`]).
pub fn partition_uniform(dataset: &Dataset, n: usize, seed: u64, reg_coeff: f64) -> Result<Vec<LogisticModel>> {
    partition_indices(dataset.len(), n, seed)?
        .into_iter()
        .enumerate()
        .map(|(node, idx)| {
            let features = idx.iter().map(|&j| dataset.features[j].clone()).collect();
            let labels = idx.iter().map(|&j| dataset.labels[j]).collect();
            LogisticModel::new(features, labels, reg_coeff, node)
        })
        .collect()
}

/// Two Gaussian clouds at `±separation · u` for a random unit `u`, rows
/// normalized, labels balanced on every node (`⌈m/2⌉` positives).
pub fn synthesize_logistic(
    n: usize,
    m_per_node: usize,
    p: usize,
    separation: f64,
    seed: u64,
    reg_coeff: f64,
) -> Result<Vec<LogisticModel>> {
    if n == 0 || m_per_node == 0 || p == 0 {
        return Err(Error::Dataset("n, m and p must be positive".into()));
    }
    let mut dir_rng = rng::stream(seed, Domain::Data, u64::MAX, 0);
    let mut u: Vec<f64> = (0..p).map(|_| dir_rng.sample(StandardNormal)).collect();
    let len = norm(&u);
    u.iter_mut().for_each(|v| *v /= len);

    (0..n)
        .map(|node| {
            let mut rng = rng::stream(seed, Domain::Data, node as u64, 0);
            let positives = m_per_node.div_ceil(2);
            let mut features = Vec::with_capacity(m_per_node);
            let mut labels = Vec::with_capacity(m_per_node);
            for j in 0..m_per_node {
                let label = if j < positives { 1.0 } else { -1.0 };
                let mut row: Vec<f64> = u
                    .iter()
                    .map(|&uk| {
                        let z: f64 = rng.sample(StandardNormal);
                        label * separation * uk + z
                    })
                    .collect();
                let len = norm(&row);
                row.iter_mut().for_each(|v| *v /= len);
                features.push(row);
                labels.push(label);
            }
            LogisticModel::new(features, labels, reg_coeff, node)
        })
        .collect()
}

/// Heterogeneous quadratics `Q_i = U_i diag(λ) U_iᵀ` with random orthogonal
/// `U_i` and eigenvalues spread evenly over `[eig_min, eig_max]`.
pub fn synthesize_quadratic(
    n: usize,
    p: usize,
    noise_std: f64,
    eig_min: f64,
    eig_max: f64,
    seed: u64,
) -> Result<Vec<QuadraticModel>> {
    if n == 0 || p == 0 {
        return Err(Error::Dataset("n and p must be positive".into()));
    }
    (0..n)
        .map(|node| {
            let mut rng = rng::stream(seed, Domain::Data, node as u64, 1);
            let g = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
            let u = g.qr().q();
            let eig = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(p, |k, _| {
                if p == 1 {
                    eig_max
                } else {
                    eig_min + (eig_max - eig_min) * k as f64 / (p - 1) as f64
                }
            }));
            let q = &u * eig * u.transpose();
            let rows = (0..p)
                .map(|i| (0..p).map(|j| if j >= i { q[(i, j)] } else { q[(j, i)] }).collect())
                .collect();
            QuadraticModel::new(rows, noise_std)
        })
        .collect()
}
