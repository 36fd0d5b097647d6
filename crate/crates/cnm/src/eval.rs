//! Model evaluation, PSD checks, and the dense-vs-circulant projection
//! timing benchmark.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::maps::{init_random_circulant, init_random_dense, FeatureMap};
use crate::train::{hinge_loss, LinearModel};

/// Classification metrics on one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub mean_hinge: f64,
    pub n_test: usize,
    /// (class id, correct, total) for one-vs-rest runs.
    pub per_class: Option<Vec<(i32, usize, usize)>>,
}

/// Accuracy and mean hinge loss of sign(w . Z(x)). Ties (score exactly 0)
/// predict +1.
pub fn evaluate(model: &LinearModel, mapper: &dyn FeatureMap, ds: &Dataset) -> Result<EvalReport> {
    if mapper.input_dim() != ds.dim() {
        return Err(Error::DimMismatch {
            expected: ds.dim(),
            got: mapper.input_dim(),
        });
    }
    if model.w.len() != mapper.output_dim() {
        return Err(Error::DimMismatch {
            expected: mapper.output_dim(),
            got: model.w.len(),
        });
    }
    let mut correct = 0usize;
    let mut hinge_sum = 0.0;
    for i in 0..ds.len() {
        let z = mapper.project(ds.row(i))?;
        let score: f64 = model.w.iter().zip(&z).map(|(a, b)| a * b).sum();
        let pred = if score >= 0.0 { 1 } else { -1 };
        if pred == ds.label(i) {
            correct += 1;
        }
        hinge_sum += hinge_loss(ds.y(i), score);
    }
    Ok(EvalReport {
        accuracy: correct as f64 / ds.len() as f64,
        mean_hinge: hinge_sum / ds.len() as f64,
        n_test: ds.len(),
        per_class: None,
    })
}

/// Smallest eigenvalue of a symmetric matrix (dense symmetric solver).
pub fn psd_check(matrix: &[f64], n: usize) -> Result<f64> {
    if matrix.len() != n * n {
        return Err(Error::invalid("matrix buffer size mismatch"));
    }
    for i in 0..n {
        for j in 0..i {
            if (matrix[i * n + j] - matrix[j * n + i]).abs() > 1e-9 {
                return Err(Error::invalid(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    let m = DMatrix::from_row_slice(n, n, matrix);
    let eigs = m.symmetric_eigenvalues();
    Ok(eigs.iter().cloned().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KMode {
    /// k = d
    Equal,
    /// k = 2d
    Double,
}

impl KMode {
    pub fn k_for(&self, d: usize) -> usize {
        match self {
            KMode::Equal => d,
            KMode::Double => 2 * d,
        }
    }
}

/// One timing measurement: median seconds per projected vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRecord {
    pub d: usize,
    pub k: usize,
    pub family: String,
    pub median_secs: f64,
    pub reps: usize,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn time_projection(map: &dyn FeatureMap, inputs: &[Vec<f64>], reps: usize) -> Result<f64> {
    // warm up: touch every input once before timing
    for x in inputs {
        std::hint::black_box(map.project(x)?);
    }
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        for x in inputs {
            std::hint::black_box(map.project(x)?);
        }
        times.push(start.elapsed().as_secs_f64() / inputs.len() as f64);
    }
    Ok(median(times))
}

/// Time dense vs circulant projection on identical random inputs.
/// Map construction and FFT planning happen outside the timed region.
pub fn bench_projection(
    d_list: &[usize],
    k_mode: KMode,
    reps: usize,
    seed: u64,
) -> Result<Vec<BenchRecord>> {
    if reps < 5 {
        return Err(Error::invalid("reps must be >= 5"));
    }
    let mut records = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = KernelSpec::rbf(1.0)?;
    for &d in d_list {
        let k = k_mode.k_for(d);
        let n_inputs = (1 << 22) / (d * d).max(1);
        let n_inputs = n_inputs.clamp(1, 32);
        let inputs: Vec<Vec<f64>> = (0..n_inputs)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();

        let dense = init_random_dense(&spec, d, k, false, &mut rng)?;
        let circ = init_random_circulant(&spec, d, k, &mut rng)?;

        records.push(BenchRecord {
            d,
            k,
            family: "dense".into(),
            median_secs: time_projection(&dense, &inputs, reps)?,
            reps,
        });
        records.push(BenchRecord {
            d,
            k,
            family: "circulant".into(),
            median_secs: time_projection(&circ, &inputs, reps)?,
            reps,
        });
    }
    Ok(records)
}

pub fn bench_records_to_csv(records: &[BenchRecord], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "d,k,family,median_secs,reps")?;
    for r in records {
        writeln!(w, "{},{},{},{},{}", r.d, r.k, r.family, r.median_secs, r.reps)?;
    }
    Ok(())
}
