//! Time-domain values of the symmetric fractional B-spline.
//!
//! Samples `beta(j/M)` are the inverse DFT of the periodized transform
//! `sum_m beta_hat(w + 2 pi M m)`. Because `|sin(w/2)|` is invariant under
//! `w -> w + 2 pi M m`, the periodization has the closed form
//! `|2 sin(w/2)|^s (2 pi M)^-s Z(s, w / (2 pi M))`, so the only
//! discretization error is time-domain aliasing at the period, which decays
//! like the B-spline itself. Between nodes a cubic Lagrange stencil is used
//! after subtracting the local singular term at the nearest integer `n`:
//! `gamma_n |t - n|^sigma`, or `gamma_n (t - n)^sigma log|t - n|` when sigma
//! is an even integer.
//!
//! Only odd integer orders coincide with the classical polynomial
//! B-splines (the transform `|sinc|^(sigma+1)` equals `sinc^(sigma+1)` only
//! when `sigma + 1` is even); those use the closed form.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::specfun::zeta_unchecked;
use crate::spectra::SplineOrder;

const START_PER_UNIT: usize = 64;
const MAX_PER_UNIT: usize = 1024;
const PROBE_PER_UNIT: usize = 8;
const START_PERIOD: usize = 256;
const MAX_PERIOD: usize = 1 << 15;
/// Largest odd integer order handled by the closed-form piecewise polynomial.
const MAX_CLOSED_FORM_DEGREE: u32 = 7;

/// Singular expansion `beta(t) ~ gamma_n phi(t - n)` near each integer `n`.
#[derive(Debug, Clone)]
struct Singular {
    /// `phi(d) = d^sigma log|d|` instead of `|d|^sigma`.
    log: bool,
    gamma: Vec<f64>,
}

impl Singular {
    fn term(&self, sigma: f64, n: usize, d: f64) -> f64 {
        let Some(&g) = self.gamma.get(n) else {
            return 0.0;
        };
        let a = d.abs();
        if a == 0.0 {
            return 0.0;
        }
        if self.log {
            g * a.powf(sigma) * a.ln()
        } else {
            g * a.powf(sigma)
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    /// Centered polynomial B-spline of integer degree.
    ClosedForm(u32),
    Grid {
        per_unit: usize,
        /// `beta(j / per_unit)` for `j >= 0`.
        nodes: Vec<f64>,
        /// `nodes[j]` minus the singular term of the integer nearest `j / per_unit`.
        resid: Vec<f64>,
        singular: Singular,
    },
}

impl Repr {
    fn grid(per_unit: usize, nodes: Vec<f64>, singular: Singular, sigma: f64) -> Self {
        let m = per_unit as f64;
        let resid = nodes
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let n = nearest_integer(j, per_unit);
                v - singular.term(sigma, n, j as f64 / m - n as f64)
            })
            .collect();
        Repr::Grid {
            per_unit,
            nodes,
            resid,
            singular,
        }
    }
}

/// `round(j / per_unit)`, halves rounded up like `f64::round` on positives.
fn nearest_integer(j: usize, per_unit: usize) -> usize {
    (j + per_unit / 2) / per_unit
}

/// Cached evaluator of `beta_sigma(t)`.
#[derive(Debug, Clone)]
pub struct BetaCache {
    order: SplineOrder,
    repr: Repr,
    span: f64,
    error_estimate: f64,
}

impl BetaCache {
    /// Closed form for integer orders up to 7, spectral grid otherwise.
    pub fn new(order: SplineOrder, cfg: &NumericConfig) -> Result<Self> {
        match order.integer() {
            Some(n) if n % 2 == 1 && n <= MAX_CLOSED_FORM_DEGREE => Ok(Self {
                order,
                repr: Repr::ClosedForm(n),
                span: 0.5 * (n + 1) as f64,
                error_estimate: 0.0,
            }),
            _ => Self::spectral(order, cfg),
        }
    }

    /// Memoized [`BetaCache::new`], keyed by order and cache tolerances.
    pub fn shared(order: SplineOrder, cfg: &NumericConfig) -> Result<Arc<Self>> {
        type Key = (u64, u64, u64, u64);
        static MEMO: OnceLock<Mutex<HashMap<Key, Arc<BetaCache>>>> = OnceLock::new();
        let key = (
            order.sigma().to_bits(),
            cfg.cache_tol.to_bits(),
            cfg.cache_tail_tol.to_bits(),
            cfg.zeta_tol.to_bits(),
        );
        let memo = MEMO.get_or_init(Default::default);
        if let Some(hit) = memo.lock().expect("cache memo poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let built = Arc::new(Self::new(order, cfg)?);
        Ok(memo
            .lock()
            .expect("cache memo poisoned")
            .entry(key)
            .or_insert(built)
            .clone())
    }

    /// Always builds the FFT grid, even when a closed form exists.
    pub fn spectral(order: SplineOrder, cfg: &NumericConfig) -> Result<Self> {
        let s = order.exponent();
        if s <= 1.0 {
            return Err(Error::Domain(format!(
                "time-domain B-spline grid needs sigma > 0, got {}",
                order.sigma()
            )));
        }
        let period = choose_period(order, cfg)?;
        let span = (period / 4) as f64;
        let singular = singular_coefficients(order, period / 4 + 2);

        let mut per_unit = START_PER_UNIT;
        let mut fine = periodized_samples(order, 2 * per_unit, period, cfg.zeta_tol)?;
        loop {
            let probe = Repr::grid(per_unit, fine.iter().step_by(2).copied().collect(), singular.clone(), order.sigma());
            let estimate = interpolation_error(&probe, order.sigma(), &fine, 2 * per_unit, span);
            // The finer grid is kept; its error is well below the coarse estimate.
            if estimate <= cfg.cache_tol {
                return Ok(Self {
                    order,
                    repr: Repr::grid(2 * per_unit, fine, singular, order.sigma()),
                    span,
                    error_estimate: estimate,
                });
            }
            if 2 * per_unit >= MAX_PER_UNIT {
                return Err(Error::Budget {
                    what: format!("B-spline cache for sigma={}", order.sigma()),
                    achievable: estimate,
                });
            }
            per_unit *= 2;
            fine = periodized_samples(order, 2 * per_unit, period, cfg.zeta_tol)?;
        }
    }

    pub fn order(&self) -> SplineOrder {
        self.order
    }

    /// Half-width of the cached support; `beta` is treated as zero beyond.
    pub fn span(&self) -> f64 {
        self.span
    }

    /// Grid spacing, or `None` for the closed form.
    pub fn step(&self) -> Option<f64> {
        match &self.repr {
            Repr::ClosedForm(_) => None,
            Repr::Grid { per_unit, .. } => Some(1.0 / *per_unit as f64),
        }
    }

    /// Whether `beta` vanishes identically beyond [`BetaCache::span`].
    pub fn is_compact(&self) -> bool {
        matches!(self.repr, Repr::ClosedForm(_))
    }

    /// Conservative interpolation error estimate.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = t.abs();
        if u > self.span {
            return 0.0;
        }
        eval_repr(&self.repr, self.order.sigma(), u)
    }
}

fn eval_repr(repr: &Repr, sigma: f64, u: f64) -> f64 {
    match repr {
        Repr::ClosedForm(n) => polynomial_bspline(*n, u),
        Repr::Grid {
            per_unit,
            nodes,
            resid,
            singular,
        } => {
            let m = *per_unit as f64;
            let x = u * m;
            let i = x.floor() as i64;
            let f = x - i as f64;
            let node = |j: i64| nodes.get(j.unsigned_abs() as usize).copied().unwrap_or(0.0);
            let w = [
                -f * (f - 1.0) * (f - 2.0) / 6.0,
                (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                -(f + 1.0) * f * (f - 2.0) / 2.0,
                (f + 1.0) * f * (f - 1.0) / 6.0,
            ];
            // The nearest integer's singular term is removed before
            // interpolating and restored exactly at `u`.
            let n = u.round();
            let nu = n as usize;
            let term = |tau: f64| singular.term(sigma, nu, tau - n);
            let mut acc = term(u);
            for (k, wk) in w.iter().enumerate() {
                let j = i - 1 + k as i64;
                let ja = j.unsigned_abs() as usize;
                let shared = ja < resid.len() && nearest_integer(ja, *per_unit) == nu && (j >= 0 || nu == 0);
                acc += wk * if shared { resid[ja] } else { node(j) - term(j as f64 / m) };
            }
            acc
        }
    }
}

/// Max error of the cubic interpolant from the even nodes of `fine` at its
/// odd nodes.
fn interpolation_error(coarse: &Repr, sigma: f64, fine: &[f64], fine_per_unit: usize, span: f64) -> f64 {
    let limit = ((span * fine_per_unit as f64) as usize).min(fine.len());
    (1..limit)
        .step_by(2)
        .map(|j| {
            let u = j as f64 / fine_per_unit as f64;
            (eval_repr(coarse, sigma, u) - fine[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// `beta(j / per_unit)` for `j = 0 .. N/2` with `N = per_unit * period`.
fn periodized_samples(order: SplineOrder, per_unit: usize, period: usize, zeta_tol: f64) -> Result<Vec<f64>> {
    let s = order.exponent();
    let n = per_unit * period;
    let scale = (2.0 * PI * per_unit as f64).powf(-s);
    let half: Vec<f64> = (0..=n / 2)
        .into_par_iter()
        .map(|q| {
            if q == 0 {
                return Ok(per_unit as f64);
            }
            let b = q as f64 / n as f64;
            // sin(w/2) with w = 2 pi q / period, reduced to keep the argument small.
            let r = q % period;
            let sine = (2.0 * (PI * r as f64 / period as f64).sin()).abs();
            if sine == 0.0 {
                return Ok(0.0);
            }
            let z = zeta_unchecked(s, b, zeta_tol)? + zeta_unchecked(s, 1.0 - b, zeta_tol)?;
            Ok(per_unit as f64 * sine.powf(s) * scale * z)
        })
        .collect::<Result<_>>()?;
    let mut buf: Vec<Complex64> = Vec::with_capacity(n);
    buf.extend(half.iter().map(|&v| Complex64::new(v, 0.0)));
    for q in (n / 2 + 1)..n {
        buf.push(Complex64::new(half[n - q], 0.0));
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    Ok(buf[..n / 2].iter().map(|c| c.re * inv).collect())
}

/// Smallest period (in time units) whose cached span `period/4` reaches the
/// tail tolerance; probed on a coarse grid since node values do not depend
/// on the grid density.
fn choose_period(order: SplineOrder, cfg: &NumericConfig) -> Result<usize> {
    let mut period = START_PERIOD;
    loop {
        let coarse = periodized_samples(order, PROBE_PER_UNIT, period, cfg.zeta_tol)?;
        let quarter = period / 4;
        let tail = (((quarter - 1) * PROBE_PER_UNIT)..=(quarter * PROBE_PER_UNIT))
            .map(|j| coarse[j].abs())
            .fold(0.0, f64::max);
        if tail <= cfg.cache_tail_tol {
            return Ok(period);
        }
        if period >= MAX_PERIOD {
            return Err(Error::Budget {
                what: format!("B-spline tail for sigma={}", order.sigma()),
                achievable: tail,
            });
        }
        period *= 2;
    }
}

/// Coefficients of the singular expansion at `n = 0 .. count`.
///
/// `beta = sum_n d_n rho(t - n)` where `d_n` are the Fourier coefficients of
/// `|2 sin(w/2)|^s` and `rho` is the inverse transform of `|w|^-s`. For
/// non-even sigma, `rho(t) = |t|^sigma / (2 Gamma(s) cos(pi s / 2))`; at an
/// even sigma the pole of `1/cos` leaves `t^sigma log|t|` with coefficient
/// `-1 / (pi Gamma(s) sin(pi s / 2))`.
fn singular_coefficients(order: SplineOrder, count: usize) -> Singular {
    let s = order.exponent();
    let half = 0.5 * s;
    let g = libm::tgamma(half + 1.0);
    // d_0 / Gamma(s) = s / Gamma(s/2 + 1)^2
    let d0 = s / (g * g);
    let log = order.integer().is_some_and(|n| n % 2 == 0);
    let mut cur = if log {
        -d0 / (PI * (0.5 * PI * s).sin())
    } else {
        d0 / (2.0 * (0.5 * PI * s).cos())
    };
    let mut gamma = Vec::with_capacity(count);
    for n in 0..count {
        gamma.push(cur);
        let nf = n as f64;
        cur *= (nf - half) / (nf + 1.0 + half);
    }
    Singular { log, gamma }
}

/// Centered B-spline of integer degree `n`,
/// `(1/n!) sum_k (-1)^k C(n+1, k) (u + (n+1)/2 - k)_+^n`, for `u >= 0`.
fn polynomial_bspline(n: u32, u: f64) -> f64 {
    let half = 0.5 * (n + 1) as f64;
    if u >= half {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for i in 1..=n {
        fact *= i as f64;
    }
    for k in 0..=(n + 1) {
        let x = u + half - k as f64;
        if x > 0.0 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * x.powi(n as i32);
        }
        binom = binom * (n + 1 - k) as f64 / (k + 1) as f64;
    }
    sum / fact
}
