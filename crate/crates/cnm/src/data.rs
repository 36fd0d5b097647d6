//! Dataset ingestion, synthetic data, mini-batch sampling, and the
//! nearest-neighbor bandwidth heuristic.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Dense N×d feature matrix with integer labels.
///
/// Binary tasks use labels in {-1, +1}; multi-class datasets keep their raw
/// class ids and are binarized per class by [`Dataset::binarize`].
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f64>, // row-major, n*d
    labels: Vec<i32>,
    n: usize,
    d: usize,
    pub name: String,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<i32>, d: usize, name: &str) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimensionality must be >= 1"));
        }
        if features.len() % d != 0 {
            return Err(Error::invalid(format!(
                "feature buffer length {} is not a multiple of d={}",
                features.len(),
                d
            )));
        }
        let n = features.len() / d;
        if n == 0 {
            return Err(Error::invalid("dataset must contain at least one row"));
        }
        if labels.len() != n {
            return Err(Error::invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                n
            )));
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature value {v}")));
        }
        Ok(Dataset {
            features,
            labels,
            n,
            d,
            name: name.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> i32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    /// Signed label as f64; valid only for binary datasets.
    pub fn y(&self, i: usize) -> f64 {
        self.labels[i] as f64
    }

    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&l| l == -1 || l == 1)
    }

    /// Distinct class ids in ascending order.
    pub fn classes(&self) -> Vec<i32> {
        let mut cs = self.labels.to_vec();
        cs.sort_unstable();
        cs.dedup();
        cs
    }

    /// One-vs-rest view: `positive` becomes +1, everything else -1.
    pub fn binarize(&self, positive: i32) -> Dataset {
        Dataset {
            features: self.features.clone(),
            labels: self
                .labels
                .iter()
                .map(|&l| if l == positive { 1 } else { -1 })
                .collect(),
            n: self.n,
            d: self.d,
            name: format!("{}-vs-{}", self.name, positive),
        }
    }

    /// In-place per-feature standardization (zero mean, unit variance).
    /// Off by default everywhere; constant columns are left untouched.
    pub fn standardize(&mut self) {
        for j in 0..self.d {
            let mut mean = 0.0;
            for i in 0..self.n {
                mean += self.features[i * self.d + j];
            }
            mean /= self.n as f64;
            let mut var = 0.0;
            for i in 0..self.n {
                let c = self.features[i * self.d + j] - mean;
                var += c * c;
            }
            var /= self.n as f64;
            if var > 0.0 {
                let sd = var.sqrt();
                for i in 0..self.n {
                    let v = &mut self.features[i * self.d + j];
                    *v = (*v - mean) / sd;
                }
            }
        }
    }
}

/// Pair of row indices, the unit of kernel-MSE estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSample {
    pub i: usize,
    pub j: usize,
}

/// Load a LIBSVM sparse text file (`label idx:val ...`, 1-based indices)
/// into a dense dataset. d is the maximum index seen across the file.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut labels: Vec<i32> = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_idx = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label_tok = parts.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            msg: format!("bad label `{label_tok}`"),
        })?;
        let mut row = Vec::new();
        for tok in parts {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("expected idx:val, got `{tok}`"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad index `{idx_s}`"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad value `{val_s}`"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "indices are 1-based; got 0".into(),
                });
            }
            max_idx = max_idx.max(idx);
            row.push((idx - 1, val));
        }
        labels.push(label.round() as i32);
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::invalid(format!("{}: empty dataset", path.display())));
    }
    let d = max_idx.max(1);
    let mut features = vec![0.0; rows.len() * d];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features[i * d + j] = v;
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Dataset::new(features, labels, d, &name)
}

/// Write a dataset in LIBSVM format. Zero entries are omitted, so
/// `load_libsvm(save_libsvm(ds))` recovers (features, labels) exactly up to
/// float formatting.
pub fn save_libsvm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..ds.len() {
        write!(w, "{}", ds.label(i)).map_err(|e| Error::io(path, e))?;
        for (j, &v) in ds.row(i).iter().enumerate() {
            if v != 0.0 {
                write!(w, " {}:{}", j + 1, v).map_err(|e| Error::io(path, e))?;
            }
        }
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Load a rectangular numeric CSV. `label_column` is 0-based; the remaining
/// columns become features in order.
pub fn load_csv(path: impl AsRef<Path>, label_column: usize, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<i32> = Vec::new();
    let mut width: Option<usize> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if lineno == 0 && has_header {
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => {
                if cells.len() < 2 {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: "need at least two columns (label + feature)".into(),
                    });
                }
                if label_column >= cells.len() {
                    return Err(Error::invalid(format!(
                        "label column {} out of range for {} columns",
                        label_column,
                        cells.len()
                    )));
                }
                width = Some(cells.len());
            }
            Some(w) if cells.len() != w => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("ragged row: {} columns, expected {}", cells.len(), w),
                });
            }
            _ => {}
        }
        for (col, cell) in cells.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("non-numeric cell `{cell}` at column {col}"),
            })?;
            if col == label_column {
                labels.push(v.round() as i32);
            } else {
                features.push(v);
            }
        }
    }

    let d = width.ok_or_else(|| Error::invalid(format!("{}: empty dataset", path.display())))? - 1;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Dataset::new(features, labels, d, &name)
}

/// Two concentric noisy rings in 2D: class -1 on the inner ring, +1 on the
/// outer. Not linearly separable, which is the point.
pub fn make_two_rings(
    n_per_class: usize,
    inner_radius: f64,
    outer_radius: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::invalid("n_per_class must be >= 1"));
    }
    if inner_radius <= 0.0 || outer_radius <= 0.0 {
        return Err(Error::invalid("radii must be positive"));
    }
    if outer_radius <= inner_radius + 3.0 * noise_sd {
        return Err(Error::invalid(
            "outer radius must exceed inner radius + 3*noise_sd",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let mut features = Vec::with_capacity(4 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for &(radius, label) in &[(inner_radius, -1), (outer_radius, 1)] {
        for _ in 0..n_per_class {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r = radius + noise.sample(&mut rng);
            features.push(r * angle.cos());
            features.push(r * angle.sin());
            labels.push(label);
        }
    }
    Dataset::new(features, labels, 2, "two-rings")
}

/// Sample `m` distinct row indices uniformly without replacement.
pub fn sample_batch<R: Rng>(ds: &Dataset, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m == 0 || m > ds.len() {
        return Err(Error::invalid(format!(
            "batch size {} out of range 1..={}",
            m,
            ds.len()
        )));
    }
    Ok(rand::seq::index::sample(rng, ds.len(), m).into_vec())
}

/// Bandwidth heuristic: gamma = 2/sigma^2 with sigma the mean Euclidean
/// distance to the `nn_rank`-th nearest neighbor over a `sample_n`-point
/// sample. Exact brute force over the sample.
pub fn estimate_gamma<R: Rng>(
    ds: &Dataset,
    sample_n: usize,
    nn_rank: usize,
    rng: &mut R,
) -> Result<f64> {
    if nn_rank == 0 {
        return Err(Error::invalid("nn_rank must be >= 1"));
    }
    if ds.len() < nn_rank + 1 {
        return Err(Error::invalid(format!(
            "need at least {} rows for nn_rank={}, have {}",
            nn_rank + 1,
            nn_rank,
            ds.len()
        )));
    }
    let sample_n = if sample_n > ds.len() {
        eprintln!(
            "estimate_gamma: sample_n {} exceeds dataset size {}, clamping",
            sample_n,
            ds.len()
        );
        ds.len()
    } else {
        sample_n
    };
    if sample_n < nn_rank + 1 {
        return Err(Error::invalid(format!(
            "sample_n={} too small for nn_rank={}",
            sample_n, nn_rank
        )));
    }

    let idx = rand::seq::index::sample(rng, ds.len(), sample_n).into_vec();
    let mut sigma_sum = 0.0;
    let mut dists = vec![0.0f64; sample_n - 1];
    for (a, &ia) in idx.iter().enumerate() {
        let xa = ds.row(ia);
        let mut t = 0;
        for (b, &ib) in idx.iter().enumerate() {
            if a == b {
                continue;
            }
            let xb = ds.row(ib);
            let d2: f64 = xa
                .iter()
                .zip(xb)
                .map(|(u, v)| (u - v) * (u - v))
                .sum();
            dists[t] = d2.sqrt();
            t += 1;
        }
        dists.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
        sigma_sum += dists[nn_rank - 1];
    }
    let sigma = sigma_sum / sample_n as f64;
    if sigma == 0.0 {
        return Err(Error::DegenerateData(
            "all sampled points are identical (sigma = 0)".into(),
        ));
    }
    Ok(2.0 / (sigma * sigma))
}
