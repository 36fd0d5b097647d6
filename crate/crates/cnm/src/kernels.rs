//! Shift-invariant kernels: pointwise evaluation, Bochner spectral
//! sampling, exact Gram matrices, and approximation-error metrics.
//!
//! The kernel convention is fixed as K(x,y) = exp(-gamma * ||x-y||^2).
//! Its spectral density is then a zero-mean Gaussian with per-coordinate
//! variance 2*gamma: with K(z) = exp(-gamma z^2) in one dimension,
//! the Fourier transform is proportional to exp(-theta^2 / (4 gamma)),
//! i.e. a normal density with variance 2*gamma. Frequencies are sampled
//! from that density, phases uniformly on [0, 2pi).

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, PairSample};
use crate::error::{Error, Result};
use crate::maps::FeatureMap;

/// Default row cap for dense N×N Gram computation.
pub const GRAM_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KernelFamily {
    Rbf,
    // extension point: Laplacian / Cauchy samplers would slot in here
}

/// A shift-invariant kernel family plus bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        Ok(KernelSpec {
            family: KernelFamily::Rbf,
            gamma,
        })
    }

    /// K as a function of the squared distance ||x-y||^2.
    pub fn eval_sqdist(&self, sqdist: f64) -> f64 {
        match self.family {
            KernelFamily::Rbf => (-self.gamma * sqdist).exp(),
        }
    }
}

/// Pointwise kernel evaluation K(x, y).
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(spec.eval_sqdist(sq))
}

/// Draw k frequency columns i.i.d. from the kernel's spectral density.
/// Returned row-major as k rows of length d (row i = theta_i).
pub fn sample_spectral<R: Rng>(spec: &KernelSpec, d: usize, k: usize, rng: &mut R) -> Result<Vec<f64>> {
    if d == 0 || k == 0 {
        return Err(Error::invalid("d and k must be >= 1"));
    }
    let sd = (2.0 * spec.gamma).sqrt();
    let normal = Normal::new(0.0, sd).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((0..d * k).map(|_| normal.sample(rng)).collect())
}

/// Draw k phase offsets i.i.d. uniform on [0, 2pi).
pub fn sample_phases<R: Rng>(k: usize, rng: &mut R) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    Ok((0..k)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect())
}

/// Symmetric N×N kernel (or inner-product) matrix.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: Vec<f64>, // row-major n*n
    n: usize,
    pub source: String,
}

impl GramMatrix {
    pub fn from_values(values: Vec<f64>, n: usize, source: &str) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::invalid("gram buffer size mismatch"));
        }
        for i in 0..n {
            for j in 0..i {
                if (values[i * n + j] - values[j * n + i]).abs() > 1e-12 {
                    return Err(Error::Numerical(format!(
                        "gram asymmetry at ({i},{j})"
                    )));
                }
            }
        }
        Ok(GramMatrix {
            values,
            n,
            source: source.to_string(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exact Gram matrix of the kernel over a dataset. Capped at [`GRAM_CAP`]
/// rows; beyond that use sampled pairs with [`approx_mse`].
pub fn gram_exact(spec: &KernelSpec, ds: &Dataset) -> Result<GramMatrix> {
    let n = ds.len();
    if n > GRAM_CAP {
        return Err(Error::invalid(format!(
            "N={n} exceeds the dense Gram cap of {GRAM_CAP}; use sampled pairs instead"
        )));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = spec.eval_sqdist(0.0);
        for j in 0..i {
            let v = kernel_eval(spec, ds.row(i), ds.row(j))?;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    GramMatrix::from_values(values, n, "kernel")
}

/// Mean squared error between the kernel and the map-induced kernel
/// Z(x)^T Z(y), over the given pairs (all N^2 pairs when omitted).
pub fn approx_mse(
    mapper: &dyn FeatureMap,
    spec: &KernelSpec,
    ds: &Dataset,
    pairs: Option<&[PairSample]>,
) -> Result<f64> {
    if mapper.input_dim() != ds.dim() {
        return Err(Error::DimMismatch {
            expected: ds.dim(),
            got: mapper.input_dim(),
        });
    }
    match pairs {
        Some(pairs) => {
            if pairs.is_empty() {
                return Err(Error::invalid("empty pair list"));
            }
            let mut sum = 0.0;
            for p in pairs {
                let zi = mapper.project(ds.row(p.i))?;
                let zj = mapper.project(ds.row(p.j))?;
                let approx: f64 = zi.iter().zip(&zj).map(|(a, b)| a * b).sum();
                let exact = kernel_eval(spec, ds.row(p.i), ds.row(p.j))?;
                sum += (exact - approx) * (exact - approx);
            }
            Ok(sum / pairs.len() as f64)
        }
        None => {
            let n = ds.len();
            if n > GRAM_CAP {
                return Err(Error::invalid(format!(
                    "N={n} exceeds the dense cap of {GRAM_CAP}; pass sampled pairs"
                )));
            }
            // map every row once, then sweep all n^2 pairs
            let k = mapper.output_dim();
            let mut z = vec![0.0; n * k];
            for i in 0..n {
                let zi = mapper.project(ds.row(i))?;
                z[i * k..(i + 1) * k].copy_from_slice(&zi);
            }
            let mut sum = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let approx: f64 = z[i * k..(i + 1) * k]
                        .iter()
                        .zip(&z[j * k..(j + 1) * k])
                        .map(|(a, b)| a * b)
                        .sum();
                    let exact = kernel_eval(spec, ds.row(i), ds.row(j))?;
                    sum += (exact - approx) * (exact - approx);
                }
            }
            Ok(sum / (n * n) as f64)
        }
    }
}

/// Uniformly sample `count` index pairs (with replacement).
pub fn sample_pairs<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<PairSample> {
    (0..count)
        .map(|_| PairSample {
            i: rng.random_range(0..n),
            j: rng.random_range(0..n),
        })
        .collect()
}
