//! Super-resolved inversion of the band-limited Hankel transform of integer
//! and half-integer order.
//!
//! Hankel data `h = H_ν[f]` known on `[0, r]` for `f` supported in `[0, σ]`
//! is mapped to band-limited Fourier data on a line, inverted with a
//! truncated prolate spheroidal expansion, and turned back into `f` through
//! a Radon inversion (Cormack-type formulas or filtered back projection).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandlimited;
mod dd;
pub mod error;
pub mod grid;
pub mod hankel;
pub mod io;
pub mod pswf;
pub mod radon;
pub mod reconstruct;
pub mod special;

pub use error::{Error, Result};
pub use grid::{SampledFunction1D, UniformGrid};
pub use num_complex::Complex64;
pub use bandlimited::{apply_fc, invert_fc_expansion, invert_fc_truncated, oversample_linear, PswfExpansion};
pub use pswf::{build_basis, PswfBasis};
pub use hankel::{hankel_bandlimited_forward, hankel_forward, naive_inverse, symmetrize, HankelDataset, HankelKernel, HankelOrder};
pub use reconstruct::{
    add_noise, correlation, make_phantom, reconstruct_fbp, reconstruct_theorem, residual, run_experiment,
    run_reconstruction, select_m, simulate_data, ExperimentConfig, FbpSettings, MChoice, Method, PhantomSpec,
    Reconstruction, ReconstructionReport, Reconstructor, ResidualEvaluator,
};
