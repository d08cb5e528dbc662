//! Fundamental cardinal splines of fractional order.
//!
//! The crate builds the symmetric fractional B-spline `beta_sigma` from its
//! Fourier transform `|sin(w/2)/(w/2)|^(sigma+1)`, the prefilters that turn
//! integer samples (or local averages `(f * h)(k)`) into B-spline
//! coefficients, and the reconstruction formulas
//! `f = sum_k f(k) L(. - k)` and `f = sum_k (f * h)(k) L_h(. - k)`.
//!
//! Modules, bottom up:
//! - [`specfun`]: Hurwitz zeta and the lattice sum `Z(s, a)`.
//! - [`kernel`]: averaging kernels `h` and their transforms.
//! - [`spectra`]: symbols `A` and `G_h` with zero-freeness certificates.
//! - [`splines`]: integer samples, prefilters, fundamental splines.
//! - [`sampling`]: signals, samplers, reconstruction and verification.

pub mod config;
pub mod error;
pub mod format;
pub mod kernel;
pub mod specfun;
pub mod spectra;
pub mod sampling;
pub mod splines;

pub use config::NumericConfig;
pub use error::{Error, ErrorClass, Result};
pub use kernel::{AveragingKernel, PolyPiece};
pub use spectra::{SplineOrder, PeriodicSymbol, SymbolSource, ZeroFreeCertificate};
