use serde::{Deserialize, Serialize};

/// Tolerances and budgets shared by the spectral and spline constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericConfig {
    /// Truncation tolerance of every Hurwitz zeta evaluation.
    pub zeta_tol: f64,
    /// Tail tolerance of the averaged symbol series.
    pub symbol_tol: f64,
    /// Largest half-length of the averaged symbol series.
    pub max_symbol_terms: usize,
    /// Coefficient tail (l1 norm beyond the half-width) and FFT aliasing
    /// tolerance.
    pub trunc_tol: f64,
    /// Initial symbol grid size (power of two).
    pub start_grid: usize,
    /// Largest symbol grid size reached by doubling.
    pub max_grid: usize,
    /// Largest coefficient half-width.
    pub max_half_width: usize,
    /// A symbol is zero-free when its grid minimum modulus exceeds this.
    pub zero_threshold: f64,
    /// Interpolation tolerance of the time-domain B-spline cache.
    pub cache_tol: f64,
    /// Magnitude below which the cached B-spline tail is dropped.
    pub cache_tail_tol: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            zeta_tol: 1e-12,
            symbol_tol: 1e-10,
            max_symbol_terms: 1 << 20,
            trunc_tol: 5e-11,
            start_grid: 8192,
            max_grid: 1 << 18,
            max_half_width: 4096,
            zero_threshold: 1e-9,
            cache_tol: 1e-10,
            cache_tail_tol: 1e-12,
        }
    }
}

impl NumericConfig {
    pub fn with_trunc_tol(mut self, tol: f64) -> Self {
        self.trunc_tol = tol;
        self
    }

    pub fn with_symbol_tol(mut self, tol: f64) -> Self {
        self.symbol_tol = tol;
        self
    }
}
