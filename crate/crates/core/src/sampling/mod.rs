//! Signals in the spline space, point and local-average samplers, and the
//! two reconstruction formulas.

mod verify;

pub use verify::{verify_report, Report, ReportEntry, VerifyOptions};

use quadrature::double_exponential::integrate;
use rand::Rng;
use rayon::prelude::*;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::kernel::AveragingKernel;
use crate::spectra::SplineOrder;
use crate::splines::{beta_integer_samples, weighted_samples, BetaCache, CoefficientSequence, FundamentalSpline};

/// Absolute target of the quadrature cross-checks.
const QUAD_TOL: f64 = 1e-13;

/// `f(t) = sum_n a_n beta(t - n)` with finitely many nonzero `a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSignal {
    order: SplineOrder,
    offset: i64,
    coeffs: Vec<f64>,
    description: String,
}

impl SplineSignal {
    /// Coefficients `a_n` for `n = offset, offset + 1, ...`.
    pub fn new(order: SplineOrder, offset: i64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("signal needs at least one coefficient".into()));
        }
        if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::Domain(format!("signal coefficient {bad} is not finite")));
        }
        Ok(Self {
            order,
            offset,
            coeffs,
            description: String::new(),
        })
    }

    /// Uniform coefficients in `[-1, 1]`, random length in `1..=max_len`
    /// and random offset in `-4..=4`.
    pub fn random<R: Rng + ?Sized>(order: SplineOrder, max_len: usize, rng: &mut R) -> Self {
        let len = rng.random_range(1..=max_len.max(1));
        let offset = rng.random_range(-4..=4);
        let coeffs = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self {
            order,
            offset,
            coeffs,
            description: format!("random len={len} offset={offset}"),
        }
    }

    pub fn with_description(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }

    pub fn order(&self) -> SplineOrder {
        self.order
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// First and last index carrying a coefficient.
    pub fn support(&self) -> (i64, i64) {
        (self.offset, self.offset + self.coeffs.len() as i64 - 1)
    }

    /// `(n, a_n)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &a)| (self.offset + i as i64, a))
    }

    /// `f(. - m)`.
    pub fn shifted(&self, m: i64) -> Self {
        Self {
            offset: self.offset + m,
            ..self.clone()
        }
    }
}

/// `sum_n a_n beta(t - n)` over an arbitrary index range.
fn expand(cache: &BetaCache, offset: i64, coeffs: &[f64], t: f64) -> f64 {
    let reach = cache.span();
    let last = offset + coeffs.len() as i64 - 1;
    let lo = ((t - reach).ceil() as i64).max(offset);
    let hi = ((t + reach).floor() as i64).min(last);
    (lo..=hi)
        .map(|n| coeffs[(n - offset) as usize] * cache.eval(t - n as f64))
        .sum()
}

/// `f(t)` at every point.
pub fn synthesize(signal: &SplineSignal, points: &[f64], cfg: &NumericConfig) -> Result<Vec<f64>> {
    let cache = BetaCache::shared(signal.order, cfg)?;
    Ok(points
        .par_iter()
        .map(|&t| expand(&cache, signal.offset, &signal.coeffs, t))
        .collect())
}

/// What produced a [`SampleSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum SampleKind {
    /// `f(k)`.
    Point,
    /// `(f * h)(k)`.
    Average(AveragingKernel),
}

/// Samples `s_k` for `k = base, base + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    kind: SampleKind,
    order: SplineOrder,
    base: i64,
    values: Vec<f64>,
    provenance: String,
}

impl SampleSet {
    pub fn new(kind: SampleKind, order: SplineOrder, base: i64, values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sample value {bad} is not finite")));
        }
        Ok(Self {
            kind,
            order,
            base,
            values,
            provenance: "user".into(),
        })
    }

    pub fn kind(&self) -> &SampleKind {
        &self.kind
    }

    pub fn order(&self) -> SplineOrder {
        self.order
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// `(k, s_k)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.base + i as i64, v))
    }

    /// `s_k`, zero outside the stored range.
    pub fn value(&self, k: i64) -> f64 {
        usize::try_from(k - self.base)
            .ok()
            .and_then(|i| self.values.get(i).copied())
            .unwrap_or(0.0)
    }

    /// Largest magnitude among the first and last sample; a large value
    /// means the range cut off part of the signal.
    pub fn boundary_magnitude(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => 0.0,
        }
    }

    /// Same samples reindexed by `+m`.
    pub fn shifted(&self, m: i64) -> Self {
        Self {
            base: self.base + m,
            ..self.clone()
        }
    }

    /// Adds `noise(k)` to every sample.
    pub fn perturbed(&self, mut noise: impl FnMut(i64) -> f64) -> Self {
        let values = self.iter().map(|(k, v)| v + noise(k)).collect();
        Self {
            values,
            provenance: format!("{} + noise", self.provenance),
            ..self.clone()
        }
    }
}

/// Samples with `s = a * g` for a discrete filter `g` (`beta(k)` or
/// `(beta * h)(k)`).
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SampleKind,
    order: SplineOrder,
    filter: CoefficientSequence,
}

impl Sampler {
    /// Point sampler with `beta(k)` truncated at `cfg.trunc_tol`.
    pub fn point(order: SplineOrder, cfg: &NumericConfig) -> Result<Self> {
        Ok(Self {
            kind: SampleKind::Point,
            order,
            filter: beta_integer_samples(order, None, cfg)?,
        })
    }

    /// Local-average sampler with `(beta * h)(k)`.
    pub fn average(order: SplineOrder, kernel: AveragingKernel, cfg: &NumericConfig) -> Result<Self> {
        let filter = weighted_samples(order, &kernel, None, cfg)?;
        Ok(Self {
            kind: SampleKind::Average(kernel),
            order,
            filter,
        })
    }

    /// Reuses the filter a fundamental spline was built from.
    pub fn matching(spline: &FundamentalSpline) -> Self {
        Self {
            kind: match spline.kernel() {
                Some(k) => SampleKind::Average(k.clone()),
                None => SampleKind::Point,
            },
            order: spline.order(),
            filter: spline.samples().clone(),
        }
    }

    pub fn filter(&self) -> &CoefficientSequence {
        &self.filter
    }

    /// Default range: the signal support padded by the filter half-width.
    pub fn default_range(&self, signal: &SplineSignal) -> (i64, i64) {
        let (a, b) = signal.support();
        let pad = self.filter.half_width() as i64;
        (a - pad, b + pad)
    }

    /// `s_k = (a * g)(k)` for `k` in `range` (inclusive).
    pub fn sample(&self, signal: &SplineSignal, range: Option<(i64, i64)>) -> Result<SampleSet> {
        check_order(self.order, signal.order)?;
        let (lo, hi) = range.unwrap_or_else(|| self.default_range(signal));
        if hi < lo {
            return Err(Error::Domain(format!("empty sample range {lo}..={hi}")));
        }
        let kk = self.filter.half_width() as i64;
        let values = (lo..=hi)
            .map(|k| {
                signal
                    .iter()
                    .filter(|(n, _)| (k - n).abs() <= kk)
                    .map(|(n, a)| a * self.filter.re(k - n))
                    .sum()
            })
            .collect();
        Ok(SampleSet {
            kind: self.kind.clone(),
            order: self.order,
            base: lo,
            values,
            provenance: format!("{:?} filter, K={}", self.filter.kind(), kk),
        })
    }
}

fn check_order(expected: SplineOrder, found: SplineOrder) -> Result<()> {
    if expected.sigma() != found.sigma() {
        return Err(Error::OrderMismatch {
            expected: expected.sigma(),
            found: found.sigma(),
        });
    }
    Ok(())
}

/// `f(k)` by the discrete convolution with `beta(k)`.
pub fn sample_points(signal: &SplineSignal, range: Option<(i64, i64)>, cfg: &NumericConfig) -> Result<SampleSet> {
    Sampler::point(signal.order, cfg)?.sample(signal, range)
}

/// `f(k)` evaluated in the time domain.
pub fn sample_points_direct(signal: &SplineSignal, range: (i64, i64), cfg: &NumericConfig) -> Result<SampleSet> {
    let points: Vec<f64> = (range.0..=range.1).map(|k| k as f64).collect();
    let values = synthesize(signal, &points, cfg)?;
    Ok(SampleSet {
        kind: SampleKind::Point,
        order: signal.order,
        base: range.0,
        values,
        provenance: "time-domain synthesis".into(),
    })
}

/// `(f * h)(k)` by the discrete convolution with `(beta * h)(k)`.
pub fn sample_averages(signal: &SplineSignal, kernel: &AveragingKernel, range: Option<(i64, i64)>, cfg: &NumericConfig) -> Result<SampleSet> {
    Sampler::average(signal.order, kernel.clone(), cfg)?.sample(signal, range)
}

/// `(f * h)(k) = int h(u) f(k - u) du` by quadrature.
pub fn sample_averages_direct(signal: &SplineSignal, kernel: &AveragingKernel, range: (i64, i64), cfg: &NumericConfig) -> Result<SampleSet> {
    let cache = BetaCache::shared(signal.order, cfg)?;
    let values = (range.0..=range.1)
        .into_par_iter()
        .map(|k| {
            let f = |u: f64| expand(&cache, signal.offset, &signal.coeffs, k as f64 - u);
            kernel_average(kernel, 0.0, f)
        })
        .collect();
    Ok(SampleSet {
        kind: SampleKind::Average(kernel.clone()),
        order: signal.order,
        base: range.0,
        values,
        provenance: "quadrature".into(),
    })
}

/// `int h(u) g(u) du`, split at the kernel breakpoints and at every
/// `u = shift + n` (where spline integrands lose smoothness).
pub fn kernel_average(kernel: &AveragingKernel, shift: f64, g: impl Fn(f64) -> f64) -> f64 {
    let l = kernel.half_width();
    let mut cuts = kernel.breakpoints();
    let first = (-l - shift).ceil() as i64;
    let last = (l - shift).floor() as i64;
    cuts.extend((first..=last).map(|n| shift + n as f64));
    cuts.push(-l);
    cuts.push(l);
    cuts.retain(|x| (-l..=l).contains(x));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            // Clamped inside so an endpoint never picks up the neighbouring piece.
            let (a, b) = (w[0].next_up(), w[1].next_down());
            let h = |u: f64| kernel.eval(u.clamp(a, b));
            integrate(|u| h(u) * g(u), w[0], w[1], QUAD_TOL).integral
        })
        .sum()
}

/// Which algebraically identical form of the reconstruction sum to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReconstructionMode {
    /// `a = c * s`, then `sum_n a_n beta(t - n)`.
    #[default]
    Prefilter,
    /// `sum_k s_k L(t - k)`.
    Direct,
}

/// B-spline coefficients `c * s` recovered from samples.
pub fn prefiltered(samples: &SampleSet, spline: &FundamentalSpline) -> SplineSignal {
    let c = spline.coeffs();
    let kk = c.half_width() as i64;
    let coeffs = crate::splines::convolve(&c.real_values(), samples.values());
    SplineSignal {
        order: spline.order(),
        offset: samples.base - kk,
        coeffs,
        description: format!("prefiltered {}", samples.provenance),
    }
}

fn reconstruct(samples: &SampleSet, spline: &FundamentalSpline, points: &[f64], mode: ReconstructionMode) -> Result<Vec<f64>> {
    check_order(spline.order(), samples.order)?;
    match mode {
        ReconstructionMode::Prefilter => {
            let a = prefiltered(samples, spline);
            let cache = spline.cache();
            Ok(points.par_iter().map(|&t| expand(cache, a.offset, &a.coeffs, t)).collect())
        }
        ReconstructionMode::Direct => {
            let hi = samples.base + samples.values.len() as i64 - 1;
            points
                .par_iter()
                .map(|&t| {
                    let shifts = spline.eval_shifts(t, samples.base, hi)?;
                    Ok(samples.values.iter().zip(&shifts).map(|(s, l)| s * l).sum())
                })
                .collect()
        }
    }
}

/// `f(t) = sum_k f(k) L(t - k)`.
pub fn reconstruct_from_points(samples: &SampleSet, spline: &FundamentalSpline, points: &[f64], mode: ReconstructionMode) -> Result<Vec<f64>> {
    if samples.kind != SampleKind::Point || spline.kernel().is_some() {
        return Err(Error::KernelMismatch);
    }
    reconstruct(samples, spline, points, mode)
}

/// `f(t) = sum_k (f * h)(k) L_h(t - k)`.
pub fn reconstruct_from_averages(samples: &SampleSet, spline: &FundamentalSpline, points: &[f64], mode: ReconstructionMode) -> Result<Vec<f64>> {
    match (&samples.kind, spline.kernel()) {
        (SampleKind::Average(a), Some(b)) if a == b => reconstruct(samples, spline, points, mode),
        _ => Err(Error::KernelMismatch),
    }
}

/// `t = lo + i * step` for `i = 0 .. count`, computed from integers so
/// grids are reproducible.
pub fn uniform_grid(lo: f64, hi: f64, per_unit: u32) -> Vec<f64> {
    let start = (lo * per_unit as f64).round() as i64;
    let end = (hi * per_unit as f64).round() as i64;
    (start..=end).map(|i| i as f64 / per_unit as f64).collect()
}
