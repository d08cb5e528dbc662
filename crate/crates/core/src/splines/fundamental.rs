//! Fundamental splines `L = sum_k c_k beta(. - k)`.

use std::sync::Arc;

use rayon::prelude::*;

use super::cache::BetaCache;
use super::coeffs::{averaged_pair, point_pair, CoefficientSequence, SpectralPair, SupportPolicy};
use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::kernel::AveragingKernel;
use crate::spectra::{SplineOrder, ZeroFreeCertificate};

/// Point variant (`L(n) = delta_n`) or averaged variant
/// (`(L_h * h)(n) = delta_n`).
#[derive(Debug, Clone)]
pub struct FundamentalSpline {
    order: SplineOrder,
    kernel: Option<AveragingKernel>,
    samples: CoefficientSequence,
    coeffs: CoefficientSequence,
    certificate: ZeroFreeCertificate,
    cache: Arc<BetaCache>,
}

impl FundamentalSpline {
    /// Cardinal interpolating spline of order `sigma >= 1`.
    pub fn point(order: SplineOrder, cfg: &NumericConfig) -> Result<Self> {
        let pair = point_pair(order, cfg)?;
        Self::assemble(order, None, pair, cfg)
    }

    /// Spline interpolating local averages `(f * h)(n)`; needs `sigma > 1`.
    pub fn averaged(order: SplineOrder, kernel: AveragingKernel, policy: SupportPolicy, cfg: &NumericConfig) -> Result<Self> {
        let pair = averaged_pair(order, &kernel, policy, cfg)?;
        Self::assemble(order, Some(kernel), pair, cfg)
    }

    fn assemble(order: SplineOrder, kernel: Option<AveragingKernel>, pair: SpectralPair, cfg: &NumericConfig) -> Result<Self> {
        Ok(Self {
            order,
            kernel,
            samples: pair.direct,
            coeffs: pair.inverse,
            certificate: pair.certificate,
            cache: BetaCache::shared(order, cfg)?,
        })
    }

    pub fn order(&self) -> SplineOrder {
        self.order
    }

    pub fn kernel(&self) -> Option<&AveragingKernel> {
        self.kernel.as_ref()
    }

    /// Prefilter `c_k`.
    pub fn coeffs(&self) -> &CoefficientSequence {
        &self.coeffs
    }

    /// `beta(k)` or `(beta * h)(k)`, the sequence the prefilter inverts.
    pub fn samples(&self) -> &CoefficientSequence {
        &self.samples
    }

    pub fn certificate(&self) -> &ZeroFreeCertificate {
        &self.certificate
    }

    pub fn cache(&self) -> &Arc<BetaCache> {
        &self.cache
    }

    /// Largest `|t|` covered by the cached B-spline; beyond it `eval` fails
    /// unless the B-spline has compact support.
    pub fn span(&self) -> f64 {
        self.coeffs.half_width() as f64 + self.cache.span()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.abs() <= self.span()) {
            if self.cache.is_compact() && t.is_finite() {
                return Ok(0.0);
            }
            return Err(Error::OutOfCache { t, span: self.span() });
        }
        let kk = self.coeffs.half_width() as i64;
        let reach = self.cache.span();
        let lo = ((t - reach).ceil() as i64).max(-kk);
        let hi = ((t + reach).floor() as i64).min(kk);
        Ok((lo..=hi).map(|k| self.coeffs.re(k) * self.cache.eval(t - k as f64)).sum())
    }

    /// `L(t - k)` for `k = k_lo ..= k_hi`, sharing the B-spline values
    /// `beta(t - m)` between shifts.
    pub fn eval_shifts(&self, t: f64, k_lo: i64, k_hi: i64) -> Result<Vec<f64>> {
        for edge in [t - k_lo as f64, t - k_hi as f64] {
            if !(edge.abs() <= self.span()) && !(self.cache.is_compact() && edge.is_finite()) {
                return Err(Error::OutOfCache { t: edge, span: self.span() });
            }
        }
        let kk = self.coeffs.half_width() as i64;
        let m_lo = k_lo - kk;
        let bt: Vec<f64> = (m_lo..=k_hi + kk).map(|m| self.cache.eval(t - m as f64)).collect();
        let c = self.coeffs.real_values();
        Ok((k_lo..=k_hi)
            .map(|k| {
                let start = (k - kk - m_lo) as usize;
                c.iter().zip(&bt[start..]).map(|(cj, b)| cj * b).sum()
            })
            .collect())
    }

    pub fn eval_many(&self, points: &[f64]) -> Result<Vec<f64>> {
        points.par_iter().map(|&t| self.eval(t)).collect()
    }
}
