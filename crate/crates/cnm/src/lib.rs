//! Compact nonlinear feature maps for shift-invariant kernel approximation.
//!
//! The crate provides three things:
//!
//! * randomized Fourier cosine maps approximating the RBF kernel via
//!   spectral sampling ([`kernels`], [`maps`]),
//! * data-dependent optimization of the map parameters against either a
//!   hinge-loss classification objective (alternating Pegasos / SGD) or a
//!   kernel mean-squared-error objective ([`train`]),
//! * circulant-structured projections evaluated with FFT cyclic
//!   convolution, reducing projection cost from O(kd) to O(k log d)
//!   ([`fft`], [`maps`]).
//!
//! The `cnm` binary wires these into reproducible experiments; see
//! [`cli`].

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod fft;
pub mod kernels;
pub mod maps;
pub mod train;

pub use error::{Error, Result};
