//! Cosine feature maps: dense projections and FFT-backed circulant
//! projections, with k < d truncation and k > d blocking.

use std::path::Path;

use rand::Rng;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fft::{circ_multiply_spectral, FftPlan};
use crate::kernels::{sample_phases, sample_spectral, KernelSpec};

/// A feature map Z: R^d -> R^k.
pub trait FeatureMap {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn project(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Row-wise projection of selected dataset rows; returns a row-major
/// |indices| x k matrix.
pub fn map_batch(map: &dyn FeatureMap, ds: &Dataset, indices: &[usize]) -> Result<Vec<f64>> {
    let k = map.output_dim();
    let mut out = vec![0.0; indices.len() * k];
    for (row, &i) in indices.iter().enumerate() {
        let z = map.project(ds.row(i))?;
        out[row * k..(row + 1) * k].copy_from_slice(&z);
    }
    Ok(out)
}

/// Dense cosine map: z_i = sqrt(2/k) * cos(theta_i . x + b_i).
#[derive(Debug, Clone)]
pub struct DenseFourierMap {
    d: usize,
    k: usize,
    // row-major k x d; row i holds theta_i
    theta: Vec<f64>,
    phases: Option<Vec<f64>>,
}

impl DenseFourierMap {
    pub fn new(d: usize, k: usize, theta: Vec<f64>, phases: Option<Vec<f64>>) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::invalid("d and k must be >= 1"));
        }
        if theta.len() != d * k {
            return Err(Error::invalid(format!(
                "theta length {} != d*k = {}",
                theta.len(),
                d * k
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite theta entry"));
        }
        if let Some(b) = &phases {
            if b.len() != k {
                return Err(Error::invalid("phases length != k"));
            }
            if b.iter().any(|&v| !(0.0..std::f64::consts::TAU).contains(&v)) {
                return Err(Error::invalid("phase outside [0, 2pi)"));
            }
        }
        Ok(DenseFourierMap { d, k, theta, phases })
    }

    pub fn scale(&self) -> f64 {
        (2.0 / self.k as f64).sqrt()
    }

    /// Frequency vector theta_i.
    pub fn frequency(&self, i: usize) -> &[f64] {
        &self.theta[i * self.d..(i + 1) * self.d]
    }

    pub fn frequencies_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.theta
    }

    pub fn phases(&self) -> Option<&[f64]> {
        self.phases.as_deref()
    }

    pub fn phase(&self, i: usize) -> f64 {
        self.phases.as_ref().map_or(0.0, |b| b[i])
    }
}

impl FeatureMap for DenseFourierMap {
    fn input_dim(&self) -> usize {
        self.d
    }

    fn output_dim(&self) -> usize {
        self.k
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::DimMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let s = self.scale();
        let mut z = Vec::with_capacity(self.k);
        for i in 0..self.k {
            let dot: f64 = self.frequency(i).iter().zip(x).map(|(a, b)| a * b).sum();
            z.push(s * (dot + self.phase(i)).cos());
        }
        Ok(z)
    }
}

/// Circulant cosine map: blocks of circ(r_b) applied to the sign-flipped
/// input, concatenated and truncated to k outputs. The flipped input's DFT
/// is computed once and reused across blocks.
#[derive(Clone)]
pub struct CirculantFourierMap {
    d: usize,
    k: usize,
    blocks: Vec<Vec<f64>>,
    sign_flip: Vec<f64>,
    plan: FftPlan,
    spectra: Vec<Vec<Complex<f64>>>, // cached DFT(r_b)
    block_norms: Vec<f64>,
}

impl std::fmt::Debug for CirculantFourierMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantFourierMap")
            .field("d", &self.d)
            .field("k", &self.k)
            .field("blocks", &self.blocks.len())
            .finish()
    }
}

impl CirculantFourierMap {
    pub fn new(d: usize, k: usize, blocks: Vec<Vec<f64>>, sign_flip: Vec<f64>) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::invalid("d and k must be >= 1"));
        }
        let expected_blocks = k.div_ceil(d);
        if blocks.len() != expected_blocks {
            return Err(Error::invalid(format!(
                "{} blocks for k={}, d={}; expected ceil(k/d) = {}",
                blocks.len(),
                k,
                d,
                expected_blocks
            )));
        }
        if blocks.iter().any(|b| b.len() != d) {
            return Err(Error::invalid("every generator block must have length d"));
        }
        if sign_flip.len() != d || sign_flip.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::invalid("sign_flip must be a length-d vector over {-1,+1}"));
        }
        let plan = FftPlan::new(d)?;
        let spectra = blocks
            .iter()
            .map(|b| plan.forward_real(b))
            .collect::<Result<Vec<_>>>()?;
        let block_norms = blocks
            .iter()
            .map(|b| b.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Ok(CirculantFourierMap {
            d,
            k,
            blocks,
            sign_flip,
            plan,
            spectra,
            block_norms,
        })
    }

    pub fn scale(&self) -> f64 {
        (2.0 / self.k as f64).sqrt()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> &[f64] {
        &self.blocks[b]
    }

    pub fn sign_flip(&self) -> &[f64] {
        &self.sign_flip
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    /// Replace one generator block (re-derives its cached spectrum).
    pub fn set_block(&mut self, b: usize, r: Vec<f64>) -> Result<()> {
        if r.len() != self.d {
            return Err(Error::DimMismatch {
                expected: self.d,
                got: r.len(),
            });
        }
        self.spectra[b] = self.plan.forward_real(&r)?;
        self.block_norms[b] = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.blocks[b] = r;
        Ok(())
    }

    /// The pre-cosine linear projection R D x, concatenated over blocks and
    /// truncated to k entries.
    pub fn linear_project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::DimMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let flipped: Vec<f64> = x.iter().zip(&self.sign_flip).map(|(v, s)| v * s).collect();
        let x_norm = flipped.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x_hat = self.plan.forward_real(&flipped)?;
        let mut out = Vec::with_capacity(self.k);
        for (b, r_hat) in self.spectra.iter().enumerate() {
            let conv =
                circ_multiply_spectral(r_hat, &x_hat, x_norm, self.block_norms[b], &self.plan)?;
            let remaining = self.k - out.len();
            out.extend_from_slice(&conv[..remaining.min(self.d)]);
        }
        Ok(out)
    }
}

impl FeatureMap for CirculantFourierMap {
    fn input_dim(&self) -> usize {
        self.d
    }

    fn output_dim(&self) -> usize {
        self.k
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.scale();
        let mut out = self.linear_project(x)?;
        for v in out.iter_mut() {
            *v = s * v.cos();
        }
        Ok(out)
    }
}

/// Random Fourier map: frequencies from the kernel's spectral density,
/// phases uniform on [0, 2pi) when requested.
pub fn init_random_dense<R: Rng>(
    spec: &KernelSpec,
    d: usize,
    k: usize,
    with_phases: bool,
    rng: &mut R,
) -> Result<DenseFourierMap> {
    let theta = sample_spectral(spec, d, k, rng)?;
    let phases = if with_phases {
        Some(sample_phases(k, rng)?)
    } else {
        None
    };
    DenseFourierMap::new(d, k, theta, phases)
}

/// Random circulant map: generator entries from the same spectral
/// Gaussian, sign flips uniform over {-1, +1}, shared across blocks.
pub fn init_random_circulant<R: Rng>(
    spec: &KernelSpec,
    d: usize,
    k: usize,
    rng: &mut R,
) -> Result<CirculantFourierMap> {
    if d == 0 || k == 0 {
        return Err(Error::invalid("d and k must be >= 1"));
    }
    let num_blocks = k.div_ceil(d);
    let mut blocks = Vec::with_capacity(num_blocks);
    for _ in 0..num_blocks {
        blocks.push(sample_spectral(spec, d, 1, rng)?);
    }
    let sign_flip: Vec<f64> = (0..d)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    CirculantFourierMap::new(d, k, blocks, sign_flip)
}

/// Serialized map container. Parameter arrays round-trip bit-exactly
/// through JSON (shortest-representation float printing).
#[derive(Debug, Serialize, Deserialize)]
pub struct MapEnvelope {
    pub version: u32,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub map: SavedMap,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SavedMap {
    Dense {
        d: usize,
        k: usize,
        theta: Vec<f64>,
        phases: Option<Vec<f64>>,
    },
    Circulant {
        d: usize,
        k: usize,
        blocks: Vec<Vec<f64>>,
        sign_flip: Vec<f64>,
    },
}

pub const MAP_FORMAT_VERSION: u32 = 1;

/// Runtime-polymorphic map, the unit of (de)serialization.
#[derive(Debug, Clone)]
pub enum AnyMap {
    Dense(DenseFourierMap),
    Circulant(CirculantFourierMap),
}

impl AnyMap {
    pub fn family(&self) -> &'static str {
        match self {
            AnyMap::Dense(_) => "dense",
            AnyMap::Circulant(_) => "circulant",
        }
    }

    pub fn to_saved(&self) -> SavedMap {
        match self {
            AnyMap::Dense(m) => SavedMap::Dense {
                d: m.d,
                k: m.k,
                theta: m.theta.clone(),
                phases: m.phases.clone(),
            },
            AnyMap::Circulant(m) => SavedMap::Circulant {
                d: m.d,
                k: m.k,
                blocks: m.blocks.clone(),
                sign_flip: m.sign_flip.clone(),
            },
        }
    }

    pub fn from_saved(saved: SavedMap) -> Result<Self> {
        match saved {
            SavedMap::Dense { d, k, theta, phases } => {
                Ok(AnyMap::Dense(DenseFourierMap::new(d, k, theta, phases)?))
            }
            SavedMap::Circulant {
                d,
                k,
                blocks,
                sign_flip,
            } => Ok(AnyMap::Circulant(CirculantFourierMap::new(
                d, k, blocks, sign_flip,
            )?)),
        }
    }
}

impl FeatureMap for AnyMap {
    fn input_dim(&self) -> usize {
        match self {
            AnyMap::Dense(m) => m.input_dim(),
            AnyMap::Circulant(m) => m.input_dim(),
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            AnyMap::Dense(m) => m.output_dim(),
            AnyMap::Circulant(m) => m.output_dim(),
        }
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            AnyMap::Dense(m) => m.project(x),
            AnyMap::Circulant(m) => m.project(x),
        }
    }
}

pub fn save_map(
    map: &AnyMap,
    gamma: Option<f64>,
    seed: Option<u64>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let env = MapEnvelope {
        version: MAP_FORMAT_VERSION,
        gamma,
        seed,
        map: map.to_saved(),
    };
    let json = serde_json::to_string_pretty(&env)?;
    std::fs::write(path.as_ref(), json).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn load_map(path: impl AsRef<Path>) -> Result<(AnyMap, MapEnvelope)> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    let env: MapEnvelope = serde_json::from_str(&text)?;
    if env.version != MAP_FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "unsupported map format version {}",
            env.version
        )));
    }
    let saved: SavedMap = serde_json::from_str::<MapEnvelope>(&text)?.map;
    Ok((AnyMap::from_saved(saved)?, env))
}
