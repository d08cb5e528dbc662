//! Two-sided coefficient sequences obtained from periodic symbols by FFT.
//!
//! For a symbol `G(w) = sum_k g_k e^{-ikw}`, both `g_k` and the coefficients
//! of `1/G` are read off an inverse DFT of grid samples. Grids double
//! (reusing the even nodes) until the coefficients over `|k| <= N/4` stop
//! moving by more than `trunc_tol`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::kernel::AveragingKernel;
use crate::spectra::{max_support, min_modulus_check, PeriodicSymbol, SplineOrder, SymbolSource, ZeroFreeCertificate};

/// What a [`CoefficientSequence`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    /// `beta(k)`.
    BsplineSamples,
    /// Inverse filter of `beta(k)`.
    Prefilter,
    /// `(beta * h)(k)`.
    WeightedSamples,
    /// Inverse filter of `(beta * h)(k)`.
    AvgPrefilter,
}

/// Coefficients `x_k` for `-K <= k <= K`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    kind: CoefficientKind,
    half_width: usize,
    values: Vec<Complex64>,
    trunc_tol: f64,
    grid_size: usize,
    aliasing_estimate: f64,
}

impl CoefficientSequence {
    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Values at `k = -K ..= K`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    /// Size of the symbol grid the values were read from.
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Largest coefficient change in the last grid doubling.
    pub fn aliasing_estimate(&self) -> f64 {
        self.aliasing_estimate
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let kk = self.half_width as i64;
        if k.abs() > kk {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(k + kk) as usize]
        }
    }

    pub fn re(&self, k: i64) -> f64 {
        self.get(k).re
    }

    /// Real parts at `k = -K ..= K`.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// `(k, x_k)` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let kk = self.half_width as i64;
        self.values.iter().enumerate().map(move |(i, v)| (i as i64 - kk, *v))
    }

    pub fn sum(&self) -> Complex64 {
        // Small tails first.
        let kk = self.half_width as i64;
        let mut acc = self.get(0);
        for k in (1..=kk).rev() {
            acc += self.get(k) + self.get(-k);
        }
        acc
    }

    /// Discrete convolution `(self * other)(n)` for real sequences, `n` in
    /// `-(K1+K2) ..= K1+K2`.
    pub fn convolve_real(&self, other: &CoefficientSequence) -> Vec<f64> {
        convolve(&self.real_values(), &other.real_values())
    }

    fn from_wrapped(kind: CoefficientKind, wrapped: &[Complex64], half_width: usize, trunc_tol: f64, aliasing: f64) -> Self {
        let n = wrapped.len();
        let kk = half_width as i64;
        let values = (-kk..=kk).map(|k| wrapped[k.rem_euclid(n as i64) as usize]).collect();
        Self {
            kind,
            half_width,
            values,
            trunc_tol,
            grid_size: n,
            aliasing_estimate: aliasing,
        }
    }

    fn identity(kind: CoefficientKind, trunc_tol: f64) -> Self {
        Self {
            kind,
            half_width: 0,
            values: vec![Complex64::new(1.0, 0.0)],
            trunc_tol,
            grid_size: 0,
            aliasing_estimate: 0.0,
        }
    }
}

/// Full linear convolution of two centered odd-length sequences.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// How to treat a kernel wider than the support bound of its order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportPolicy {
    /// Reject with [`Error::SupportViolation`].
    #[default]
    Enforce,
    /// Proceed with the numerical certificate only.
    Override,
}

/// Direct and inverse coefficients of one symbol, read from the same grid.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    /// Coefficients of the symbol itself.
    pub direct: CoefficientSequence,
    /// Coefficients of its reciprocal.
    pub inverse: CoefficientSequence,
    pub certificate: ZeroFreeCertificate,
}

/// Which coefficient sets the grid loop must converge.
#[derive(Clone, Copy)]
struct Want {
    direct: bool,
    inverse: bool,
}

struct Converged {
    direct: Option<(Vec<Complex64>, f64)>,
    inverse: Option<(Vec<Complex64>, f64)>,
    symbol: PeriodicSymbol,
}

/// `(1/N) sum_j x_j e^{+2 pi i j k / N}`, wrapped index order. Real-even
/// input gives real coefficients with `x_k = x_{-k}` imposed exactly.
fn inverse_dft(samples: impl Iterator<Item = Complex64>, n: usize, real_even: bool) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    if real_even {
        for k in 0..=n / 2 {
            let v = 0.5 * (buf[k].re + buf[(n - k) % n].re);
            buf[k] = Complex64::new(v, 0.0);
            buf[(n - k) % n] = buf[k];
        }
    }
    buf
}

fn max_change(fine: &[Complex64], coarse: &[Complex64]) -> f64 {
    let n = coarse.len();
    let q = (n / 4) as i64;
    (-q..=q)
        .map(|k| {
            let a = fine[k.rem_euclid(fine.len() as i64) as usize];
            let b = coarse[k.rem_euclid(n as i64) as usize];
            (a - b).norm()
        })
        .fold(0.0, f64::max)
}

fn converge(source: &SymbolSource, cfg: &NumericConfig, want: Want, check_zero_free: bool) -> Result<Converged> {
    let transforms = |sym: &PeriodicSymbol| {
        let n = sym.grid_size();
        let even = sym.is_real_even();
        let direct = want.direct.then(|| inverse_dft(sym.values().iter().copied(), n, even));
        let inverse = want.inverse.then(|| inverse_dft(sym.values().iter().map(|v| v.inv()), n, even));
        (direct, inverse)
    };
    let mut symbol = source.sample(cfg.start_grid.max(64), cfg)?;
    if check_zero_free {
        certify(&symbol, cfg)?;
    }
    let (mut direct, mut inverse) = transforms(&symbol);
    loop {
        let finer = source.refine(&symbol, cfg)?;
        if check_zero_free {
            certify(&finer, cfg)?;
        }
        let (d2, i2) = transforms(&finer);
        let dd = match (&direct, &d2) {
            (Some(a), Some(b)) => max_change(b, a),
            _ => 0.0,
        };
        let di = match (&inverse, &i2) {
            (Some(a), Some(b)) => max_change(b, a),
            _ => 0.0,
        };
        symbol = finer;
        direct = d2;
        inverse = i2;
        if dd <= cfg.trunc_tol && di <= cfg.trunc_tol {
            return Ok(Converged {
                direct: direct.map(|v| (v, dd)),
                inverse: inverse.map(|v| (v, di)),
                symbol,
            });
        }
        if symbol.grid_size() >= cfg.max_grid {
            return Err(Error::Budget {
                what: format!("coefficient grid for sigma={}", source.order().sigma()),
                achievable: dd.max(di),
            });
        }
    }
}

fn certify(symbol: &PeriodicSymbol, cfg: &NumericConfig) -> Result<ZeroFreeCertificate> {
    let cert = min_modulus_check(symbol, cfg.zero_threshold);
    if !cert.zero_free {
        return Err(Error::ZeroFree {
            min_modulus: cert.min_modulus,
            threshold: cert.threshold,
        });
    }
    Ok(cert)
}

/// Smallest `K` whose tail `sum_{|k| > K} |x_k|` (up to `N/2`) is at most
/// `tol`; this bounds both the boundary values and the error of every mass
/// identity.
fn truncation_width(wrapped: &[Complex64], tol: f64, cap: usize, what: &str) -> Result<usize> {
    let n = wrapped.len();
    let mut tail = 0.0;
    let mut k = n / 2;
    while k > 0 {
        let next = tail + wrapped[k].norm() + if k == n - k { 0.0 } else { wrapped[n - k].norm() };
        if next > tol {
            break;
        }
        tail = next;
        k -= 1;
    }
    if k > cap {
        let beyond: f64 = (cap + 1..=n / 2).map(|j| wrapped[j].norm() + wrapped[n - j].norm()).sum();
        return Err(Error::Budget {
            what: format!("{what}: half-width {k} exceeds cap {cap}"),
            achievable: beyond,
        });
    }
    Ok(k)
}

fn finish(kind: CoefficientKind, wrapped: &[Complex64], aliasing: f64, half_width: Option<usize>, cfg: &NumericConfig) -> Result<CoefficientSequence> {
    let kk = match half_width {
        Some(k) => k.min(wrapped.len() / 2),
        None => truncation_width(wrapped, cfg.trunc_tol, cfg.max_half_width, &format!("{kind:?}"))?,
    };
    Ok(CoefficientSequence::from_wrapped(kind, wrapped, kk, cfg.trunc_tol, aliasing))
}

/// `beta(k)` for `|k| <= K` as Fourier coefficients of the point symbol.
/// With `half_width = None`, `K` is the truncation width at `cfg.trunc_tol`.
pub fn beta_integer_samples(order: SplineOrder, half_width: Option<usize>, cfg: &NumericConfig) -> Result<CoefficientSequence> {
    if order.integer() == Some(1) {
        return Ok(pad(CoefficientSequence::identity(CoefficientKind::BsplineSamples, cfg.trunc_tol), half_width));
    }
    let want = Want { direct: true, inverse: false };
    let c = converge(&SymbolSource::Point(order), cfg, want, false)?;
    let (values, aliasing) = c.direct.expect("direct coefficients requested");
    finish(CoefficientKind::BsplineSamples, &values, aliasing, half_width, cfg)
}

/// Prefilter `c_k` with `sum_k c_k z^-k = 1 / sum_k beta(k) z^-k`.
pub fn prefilter_coeffs(order: SplineOrder, cfg: &NumericConfig) -> Result<CoefficientSequence> {
    Ok(point_pair(order, cfg)?.inverse)
}

/// `beta(k)` and the prefilter from one symbol grid.
pub fn point_pair(order: SplineOrder, cfg: &NumericConfig) -> Result<SpectralPair> {
    if !order.interpolation_ok() {
        return Err(Error::Domain(format!(
            "interpolation needs sigma >= 1, got {}",
            order.sigma()
        )));
    }
    if order.integer() == Some(1) {
        return Ok(SpectralPair {
            direct: CoefficientSequence::identity(CoefficientKind::BsplineSamples, cfg.trunc_tol),
            inverse: CoefficientSequence::identity(CoefficientKind::Prefilter, cfg.trunc_tol),
            certificate: ZeroFreeCertificate {
                min_modulus: 1.0,
                argmin_omega: 0.0,
                zero_free: true,
                threshold: cfg.zero_threshold,
                grid_size: 0,
            },
        });
    }
    pair(&SymbolSource::Point(order), CoefficientKind::BsplineSamples, CoefficientKind::Prefilter, cfg)
}

/// `(beta * h)(k)` for `|k| <= K` from the averaged symbol.
pub fn weighted_samples(order: SplineOrder, kernel: &AveragingKernel, half_width: Option<usize>, cfg: &NumericConfig) -> Result<CoefficientSequence> {
    let want = Want { direct: true, inverse: false };
    let c = converge(&SymbolSource::Averaged(order, kernel.clone()), cfg, want, false)?;
    let (values, aliasing) = c.direct.expect("direct coefficients requested");
    finish(CoefficientKind::WeightedSamples, &values, aliasing, half_width, cfg)
}

/// Prefilter for local-average samples, the inverse filter of
/// `(beta * h)(k)`. Real for every real kernel, even when `h` is even.
pub fn avg_prefilter_coeffs(order: SplineOrder, kernel: &AveragingKernel, policy: SupportPolicy, cfg: &NumericConfig) -> Result<CoefficientSequence> {
    Ok(averaged_pair(order, kernel, policy, cfg)?.inverse)
}

/// Support check for an averaging kernel: `Ok` inside the bound or when
/// overridden.
pub fn check_support(order: SplineOrder, kernel: &AveragingKernel, policy: SupportPolicy) -> Result<()> {
    let bound = max_support(order)?;
    if kernel.half_width() > bound && policy == SupportPolicy::Enforce {
        return Err(Error::SupportViolation {
            support: kernel.half_width(),
            bound,
        });
    }
    Ok(())
}

/// `(beta * h)(k)` and its inverse filter from one symbol grid.
pub fn averaged_pair(order: SplineOrder, kernel: &AveragingKernel, policy: SupportPolicy, cfg: &NumericConfig) -> Result<SpectralPair> {
    check_support(order, kernel, policy)?;
    pair(
        &SymbolSource::Averaged(order, kernel.clone()),
        CoefficientKind::WeightedSamples,
        CoefficientKind::AvgPrefilter,
        cfg,
    )
}

fn pair(source: &SymbolSource, direct_kind: CoefficientKind, inverse_kind: CoefficientKind, cfg: &NumericConfig) -> Result<SpectralPair> {
    let want = Want { direct: true, inverse: true };
    let c = converge(source, cfg, want, true)?;
    let certificate = certify(&c.symbol, cfg)?;
    let (d, da) = c.direct.expect("direct coefficients requested");
    let (i, ia) = c.inverse.expect("inverse coefficients requested");
    Ok(SpectralPair {
        direct: finish(direct_kind, &d, da, None, cfg)?,
        inverse: finish(inverse_kind, &i, ia, None, cfg)?,
        certificate,
    })
}

fn pad(seq: CoefficientSequence, half_width: Option<usize>) -> CoefficientSequence {
    let Some(kk) = half_width else { return seq };
    let k = kk as i64;
    let values = (-k..=k).map(|i| seq.get(i)).collect();
    CoefficientSequence {
        half_width: kk,
        values,
        ..seq
    }
}
