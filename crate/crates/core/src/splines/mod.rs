//! Time-domain B-splines, prefilter sequences and fundamental splines.

mod cache;
mod coeffs;
mod fundamental;

pub use cache::BetaCache;
pub use coeffs::{
    averaged_pair, avg_prefilter_coeffs, beta_integer_samples, check_support, convolve, point_pair, prefilter_coeffs,
    weighted_samples, CoefficientKind, CoefficientSequence, SpectralPair, SupportPolicy,
};
pub use fundamental::FundamentalSpline;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::spectra::SplineOrder;

/// `(t, beta(t))` on `t_min, t_min + step, ..` up to `t_max`, accurate to
/// `tol`.
pub fn beta_time_grid(order: SplineOrder, t_min: f64, t_max: f64, step: f64, tol: f64, cfg: &NumericConfig) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0 && step.is_finite()) || !(t_max >= t_min) {
        return Err(Error::Domain(format!("bad grid [{t_min}, {t_max}] step {step}")));
    }
    if !(tol >= 1e-8) {
        return Err(Error::Domain(format!("time grid tolerance {tol} must be at least 1e-8")));
    }
    let local = NumericConfig {
        cache_tol: cfg.cache_tol.min(tol / 2.0),
        cache_tail_tol: cfg.cache_tail_tol.min(tol / 2.0),
        ..cfg.clone()
    };
    let cache = BetaCache::shared(order, &local)?;
    let count = ((t_max - t_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let t = t_min + i as f64 * step;
            (t, cache.eval(t))
        })
        .collect())
}
