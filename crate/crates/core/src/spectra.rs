//! Frequency-domain objects: the B-spline transform, the periodized
//! point-sampling symbol `A`, the averaged symbol `G_h`, and grid
//! certificates of their zero-freeness.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::kernel::{sinc, AveragingKernel};
use crate::specfun::{symbol_z_tol, DEFAULT_ZETA_TOL};

/// Smallest grid on which [`min_modulus_check`] may certify zero-freeness.
pub const MIN_CERTIFIED_GRID: usize = 4096;

/// Fractional order `sigma > -1` of the symmetric B-spline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplineOrder {
    sigma: f64,
}

impl SplineOrder {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > -1.0) {
            return Err(Error::Domain(format!("spline order sigma={sigma} must exceed -1")));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Exponent `s = sigma + 1` of the transform.
    pub fn exponent(&self) -> f64 {
        self.sigma + 1.0
    }

    /// Point-sampling symbol is guaranteed zero-free (`sigma >= 1`).
    pub fn interpolation_ok(&self) -> bool {
        self.sigma >= 1.0
    }

    /// Averaged symbol is guaranteed zero-free under the support bound (`sigma > 1`).
    pub fn averaging_ok(&self) -> bool {
        self.sigma > 1.0
    }

    /// `Some(n)` when sigma is the integer `n`.
    pub fn integer(&self) -> Option<u32> {
        if self.sigma >= 0.0 && self.sigma.fract() == 0.0 && self.sigma <= 64.0 {
            Some(self.sigma as u32)
        } else {
            None
        }
    }
}

/// `|sin(w/2) / (w/2)|^(sigma+1)`.
pub fn beta_hat(order: SplineOrder, omega: f64) -> f64 {
    sinc(0.5 * omega).abs().powf(order.exponent())
}

fn check_unit_offset(a: f64) -> Result<()> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::Domain(format!("symbol offset a={a} must lie in [0, 1)")));
    }
    Ok(())
}

/// `A(2 pi a) = sum_k beta_hat(2 pi a + 2 pi k)`, evaluated in closed form as
/// `|sin(pi a)/pi|^(sigma+1) * Z(sigma+1, a)`.
///
/// Requires `sigma > 0` for the lattice sum to converge. Positivity is only
/// guaranteed for `sigma >= 1`; see [`SplineOrder::interpolation_ok`].
pub fn symbol_a(order: SplineOrder, a: f64) -> Result<f64> {
    symbol_a_tol(order, a, DEFAULT_ZETA_TOL)
}

pub(crate) fn symbol_a_tol(order: SplineOrder, a: f64, zeta_tol: f64) -> Result<f64> {
    check_unit_offset(a)?;
    let s = order.exponent();
    if s <= 1.0 {
        return Err(Error::Domain(format!(
            "symbol series diverges for sigma={} <= 0",
            order.sigma()
        )));
    }
    let c = if a > 0.5 { 1.0 - a } else { a };
    if c == 0.0 {
        return Ok(1.0);
    }
    let prefactor = ((PI * c).sin() / PI).powf(s);
    Ok(prefactor * symbol_z_tol(s, c, zeta_tol)?)
}

/// `h_hat(w) = int h(t) e^{-i w t} dt`.
pub fn h_hat(kernel: &AveragingKernel, omega: f64) -> Complex64 {
    kernel.fourier(omega)
}

/// Number of terms `K` on each side of the averaged symbol series so that the
/// tail majorant stays below `cfg.symbol_tol`.
///
/// Every omitted lattice point has `|a + k| >= K + 1`, where
/// `beta_hat <= (pi |a + k|)^-s` and `|h_hat| <= H(2 pi (K + 1))`.
pub fn symbol_gh_terms(order: SplineOrder, kernel: &AveragingKernel, cfg: &NumericConfig) -> Result<usize> {
    let s = order.exponent();
    if s <= 1.0 {
        return Err(Error::Domain(format!("symbol series diverges for sigma={}", order.sigma())));
    }
    let tail = |k: usize| {
        let x = (k + 1) as f64;
        2.0 * kernel.fourier_majorant(2.0 * PI * x) * PI.powf(-s) * (x.powf(-s) + x.powf(1.0 - s) / (s - 1.0))
    };
    let tol = cfg.symbol_tol;
    let mut hi = 1usize;
    while tail(hi) > tol {
        if hi >= cfg.max_symbol_terms {
            return Err(Error::Budget {
                what: format!("averaged symbol series for sigma={} kernel={kernel}", order.sigma()),
                achievable: tail(cfg.max_symbol_terms),
            });
        }
        hi = (hi * 2).min(cfg.max_symbol_terms);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `G_h(2 pi a) = sum_k beta_hat(2 pi (a+k)) h_hat(2 pi (a+k))`, truncated so
/// the analytic tail bound is below `cfg.symbol_tol`.
pub fn symbol_gh(order: SplineOrder, kernel: &AveragingKernel, a: f64, cfg: &NumericConfig) -> Result<Complex64> {
    if !order.averaging_ok() {
        return Err(Error::Domain(format!(
            "averaged symbol needs sigma > 1, got {}",
            order.sigma()
        )));
    }
    check_unit_offset(a)?;
    let terms = symbol_gh_terms(order, kernel, cfg)?;
    Ok(gh_sum(order, kernel, a, terms))
}

/// Truncated series at canonical offset; `a > 1/2` is mapped through
/// `G(1 - a) = conj G(a)`, valid for real kernels.
fn gh_sum(order: SplineOrder, kernel: &AveragingKernel, a: f64, terms: usize) -> Complex64 {
    if a > 0.5 {
        return gh_sum(order, kernel, 1.0 - a, terms).conj();
    }
    let s = order.exponent();
    if a == 0.0 {
        return kernel.fourier(0.0);
    }
    let prefactor = ((PI * a).sin() / PI).powf(s);
    let k = terms as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    // Outermost pairs first; the window {a + k : -K-1 <= k <= K} is symmetric at a = 1/2.
    for j in (0..=k).rev() {
        for x in [a + j as f64, a - (j + 1) as f64] {
            sum += kernel.fourier(2.0 * PI * x) * x.abs().powf(-s);
        }
    }
    sum * prefactor
}

/// A 2pi-periodic function sampled at `w_j = 2 pi j / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSymbol {
    values: Vec<Complex64>,
    min_modulus: f64,
    is_real_even: bool,
}

impl PeriodicSymbol {
    pub fn new(values: Vec<Complex64>, is_real_even: bool) -> Result<Self> {
        let n = values.len();
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("symbol grid size {n} must be a power of two >= 64")));
        }
        if is_real_even {
            for j in 0..n {
                if values[j].im != 0.0 || values[j] != values[(n - j) % n] {
                    return Err(Error::Domain("symbol flagged real-even is not".into()));
                }
            }
        }
        let min_modulus = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        Ok(Self {
            values,
            min_modulus,
            is_real_even,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn omega(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.values.len() as f64
    }

    pub fn min_modulus(&self) -> f64 {
        self.min_modulus
    }

    pub fn is_real_even(&self) -> bool {
        self.is_real_even
    }
}

/// What generates a [`PeriodicSymbol`].
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSource {
    /// `A(w) = sum_k beta(k) e^{-ikw}`.
    Point(SplineOrder),
    /// `G_h(w) = sum_k (beta * h)(k) e^{-ikw}`.
    Averaged(SplineOrder, AveragingKernel),
}

impl SymbolSource {
    pub fn order(&self) -> SplineOrder {
        match self {
            SymbolSource::Point(o) | SymbolSource::Averaged(o, _) => *o,
        }
    }

    fn real_even(&self) -> bool {
        match self {
            SymbolSource::Point(_) => true,
            SymbolSource::Averaged(_, k) => k.is_even(),
        }
    }

    fn evaluator(&self, cfg: &NumericConfig) -> Result<impl Fn(f64) -> Result<Complex64> + Sync + '_> {
        let terms = match self {
            SymbolSource::Point(o) => {
                symbol_a_tol(*o, 0.25, cfg.zeta_tol)?;
                0
            }
            SymbolSource::Averaged(o, k) => {
                if !o.averaging_ok() {
                    return Err(Error::Domain(format!(
                        "averaged symbol needs sigma > 1, got {}",
                        o.sigma()
                    )));
                }
                symbol_gh_terms(*o, k, cfg)?
            }
        };
        let zeta_tol = cfg.zeta_tol;
        let real_even = self.real_even();
        Ok(move |a: f64| match self {
            SymbolSource::Point(o) => Ok(Complex64::new(symbol_a_tol(*o, a, zeta_tol)?, 0.0)),
            SymbolSource::Averaged(o, k) => {
                let v = gh_sum(*o, k, a, terms);
                Ok(if real_even { Complex64::new(v.re, 0.0) } else { v })
            }
        })
    }

    /// Samples the symbol on an `n`-point grid; the upper half is filled by
    /// the (conjugate) symmetry so grid symmetries hold exactly.
    pub fn sample(&self, n: usize, cfg: &NumericConfig) -> Result<PeriodicSymbol> {
        let eval = self.evaluator(cfg)?;
        let half: Vec<Complex64> = (0..=n / 2)
            .into_par_iter()
            .map(|j| eval(j as f64 / n as f64))
            .collect::<Result<_>>()?;
        PeriodicSymbol::new(mirror(&half, n), self.real_even())
    }

    /// Doubles the grid of `prev`, evaluating only the new odd nodes.
    pub fn refine(&self, prev: &PeriodicSymbol, cfg: &NumericConfig) -> Result<PeriodicSymbol> {
        let n = 2 * prev.grid_size();
        let eval = self.evaluator(cfg)?;
        let odd: Vec<Complex64> = (0..n / 4)
            .into_par_iter()
            .map(|i| eval((2 * i + 1) as f64 / n as f64))
            .collect::<Result<_>>()?;
        let mut half = Vec::with_capacity(n / 2 + 1);
        for j in 0..=n / 2 {
            half.push(if j % 2 == 0 { prev.values[j / 2] } else { odd[j / 2] });
        }
        PeriodicSymbol::new(mirror(&half, n), self.real_even())
    }
}

fn mirror(half: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut values = Vec::with_capacity(n);
    values.extend_from_slice(half);
    for j in (n / 2 + 1)..n {
        values.push(half[n - j].conj());
    }
    values
}

/// Grid certificate of zero-freeness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroFreeCertificate {
    pub min_modulus: f64,
    pub argmin_omega: f64,
    pub zero_free: bool,
    pub threshold: f64,
    pub grid_size: usize,
}

/// Grid minimum of `|symbol|`; `zero_free` requires a grid of at least
/// [`MIN_CERTIFIED_GRID`] points and a minimum above `threshold`.
pub fn min_modulus_check(symbol: &PeriodicSymbol, threshold: f64) -> ZeroFreeCertificate {
    let (j, min) = symbol
        .values()
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .fold((0, f64::INFINITY), |best, (j, m)| if m < best.1 { (j, m) } else { best });
    ZeroFreeCertificate {
        min_modulus: min,
        argmin_omega: symbol.omega(j),
        zero_free: symbol.grid_size() >= MIN_CERTIFIED_GRID && min > threshold,
        threshold,
        grid_size: symbol.grid_size(),
    }
}

/// Certificate with grid refinement: starting from `cfg.start_grid`, doubles
/// until successive minima agree within `1e-10` or `cfg.max_grid` is reached.
/// Returns the finest symbol, its certificate, and whether the minima agreed.
pub fn refined_certificate(source: &SymbolSource, cfg: &NumericConfig) -> Result<(PeriodicSymbol, ZeroFreeCertificate, bool)> {
    let mut symbol = source.sample(cfg.start_grid.max(64), cfg)?;
    let mut cert = min_modulus_check(&symbol, cfg.zero_threshold);
    while symbol.grid_size() < cfg.max_grid {
        let finer = source.refine(&symbol, cfg)?;
        let next = min_modulus_check(&finer, cfg.zero_threshold);
        let agreed = (next.min_modulus - cert.min_modulus).abs() <= 1e-10;
        symbol = finer;
        cert = next;
        if agreed {
            return Ok((symbol, cert, true));
        }
    }
    Ok((symbol, cert, false))
}

/// Largest admissible kernel half-width
/// `l(sigma) = arccos(2^{-(sigma+1)/3}) / pi` for `sigma > 1`.
pub fn max_support(order: SplineOrder) -> Result<f64> {
    if !order.averaging_ok() {
        return Err(Error::Domain(format!(
            "support bound needs sigma > 1, got {}",
            order.sigma()
        )));
    }
    let c = 0.5f64.powf(order.exponent() / 3.0);
    let angle = (1.0 - c * c).sqrt().atan2(c);
    Ok(div_by_pi(angle))
}

/// `x / pi` with the rounding error of `PI` compensated.
fn div_by_pi(x: f64) -> f64 {
    const PI_LO: f64 = 1.2246467991473532e-16;
    let q = x / PI;
    let r = (-q).mul_add(PI, x) - q * PI_LO;
    q + r / PI
}

/// Closed-form lower bound `2 |h|_1 pi^{-(sigma+1)} (1/2 - 2^{-sigma}/sigma)`
/// on `min |G_h|` for kernels inside the support bound.
pub fn proof_lower_bound(order: SplineOrder, l1_norm: f64) -> f64 {
    let sigma = order.sigma();
    2.0 * l1_norm * PI.powf(-order.exponent()) * (0.5 - 2f64.powf(-sigma) / sigma)
}
