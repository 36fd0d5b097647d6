//! FFT plans and circulant (cyclic-convolution) multiplication.
//!
//! Plans support arbitrary lengths exactly (mixed radix / Bluestein under
//! the hood); inputs are never zero-padded, since padding breaks cyclic
//! convolution semantics.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Forward/inverse transform pair of a fixed length. Cheap to clone
/// (transform tables are shared) and safe for concurrent readers.
#[derive(Clone)]
pub struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan").field("len", &self.len).finish()
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("FFT length must be >= 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(FftPlan {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// DFT of a real vector.
    pub fn forward_real(&self, x: &[f64]) -> Result<Vec<Complex<f64>>> {
        if x.len() != self.len {
            return Err(Error::DimMismatch {
                expected: self.len,
                got: x.len(),
            });
        }
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        Ok(buf)
    }

    /// In-place inverse DFT, normalized by 1/len.
    pub fn inverse(&self, buf: &mut [Complex<f64>]) -> Result<()> {
        if buf.len() != self.len {
            return Err(Error::DimMismatch {
                expected: self.len,
                got: buf.len(),
            });
        }
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        Ok(())
    }
}

fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Take the real part of an inverse-transformed buffer, erroring if the
/// imaginary residue exceeds `tol`.
fn real_part_checked(buf: &[Complex<f64>], tol: f64) -> Result<Vec<f64>> {
    let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > tol {
        return Err(Error::Numerical(format!(
            "imaginary residue {residue:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(buf.iter().map(|c| c.re).collect())
}

/// Residue tolerance for discarding the imaginary part after an inverse
/// transform of a real convolution: 1e-9 * ||x||, scaled up when the
/// generator itself has large norm.
fn residue_tol(x_norm: f64, r_norm: f64) -> f64 {
    1e-9 * x_norm * r_norm.max(1.0)
}

/// circ(r) * x via cyclic convolution in the Fourier domain:
/// inverse-DFT(DFT(r) . DFT(x)).
pub fn circ_multiply(r: &[f64], x: &[f64], plan: &FftPlan) -> Result<Vec<f64>> {
    if r.len() != plan.len() {
        return Err(Error::DimMismatch {
            expected: plan.len(),
            got: r.len(),
        });
    }
    let r_hat = plan.forward_real(r)?;
    let x_hat = plan.forward_real(x)?;
    circ_multiply_spectral(&r_hat, &x_hat, l2_norm(x), l2_norm(r), plan)
}

/// Same as [`circ_multiply`], but with the DFTs already computed so a
/// transformed input can be reused across generator blocks.
pub fn circ_multiply_spectral(
    r_hat: &[Complex<f64>],
    x_hat: &[Complex<f64>],
    x_norm: f64,
    r_norm: f64,
    plan: &FftPlan,
) -> Result<Vec<f64>> {
    if r_hat.len() != plan.len() || x_hat.len() != plan.len() {
        return Err(Error::DimMismatch {
            expected: plan.len(),
            got: r_hat.len().max(x_hat.len()),
        });
    }
    let mut buf: Vec<Complex<f64>> = r_hat.iter().zip(x_hat).map(|(a, b)| a * b).collect();
    plan.inverse(&mut buf)?;
    real_part_checked(&buf, residue_tol(x_norm, r_norm))
}

/// Cyclic cross-correlation via the same machinery: entry j is
/// sum_i x[(i - j) mod d] * q[i]. Used by the circulant gradient.
pub fn circ_correlate(x: &[f64], q: &[f64], plan: &FftPlan) -> Result<Vec<f64>> {
    let d = plan.len();
    if x.len() != d || q.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: x.len().max(q.len()),
        });
    }
    // correlation = convolution with the one-step-shifted reversal of x
    let mut u = vec![0.0; d];
    for m in 0..d {
        u[m] = x[(d - m) % d];
    }
    circ_multiply(&u, q, plan)
}
