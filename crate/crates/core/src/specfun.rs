//! Hurwitz zeta function and the two-term lattice sum built from it.
//!
//! The lattice sum `sum_k |a + k|^-s` over all integers splits into
//! `zeta(s, a) + zeta(s, 1 - a)`, which is how every periodized B-spline
//! symbol in this crate is evaluated.

use crate::error::{Error, Result};

/// Default absolute truncation tolerance for [`hurwitz_zeta`].
pub const DEFAULT_ZETA_TOL: f64 = 1e-12;

/// Largest number of directly summed terms before giving up.
const MAX_DIRECT_TERMS: usize = 1 << 24;

/// `B_{2j} / (2j)!` for `j = 1..=7`.
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
];

/// Validated arguments of `zeta(s, a)`: `s > 1` and `0 < a <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaArgs {
    s: f64,
    a: f64,
}

impl ZetaArgs {
    pub fn new(s: f64, a: f64) -> Result<Self> {
        if !(s.is_finite() && s > 1.0) {
            return Err(Error::Domain(format!("zeta exponent s={s} must exceed 1")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::Domain(format!("zeta offset a={a} must lie in (0, 1]")));
        }
        Ok(Self { s, a })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// Hurwitz zeta `sum_{k>=0} (k + a)^-s`, truncation error at most `tol`.
///
/// Partial sums plus an Euler-Maclaurin tail carrying Bernoulli corrections
/// through `B_12`. The number of direct terms starts at `max(10, ceil(a) + 10)`
/// and doubles until the first omitted correction (the `B_14` term) is below
/// `tol / 4`.
pub fn hurwitz_zeta(args: ZetaArgs, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::Domain(format!("zeta tolerance {tol} must lie in (0, 1e-3]")));
    }
    zeta_unchecked(args.s, args.a, tol)
}

/// Euler-Maclaurin evaluation for any `s > 1`, `a > 0`.
pub(crate) fn zeta_unchecked(s: f64, a: f64, tol: f64) -> Result<f64> {
    let mut n = 10usize.max(a.ceil() as usize + 10);
    loop {
        let x = n as f64 + a;
        let omitted = correction_term(s, x, 6).abs();
        if omitted <= tol / 4.0 {
            break;
        }
        if n >= MAX_DIRECT_TERMS {
            return Err(Error::NonConvergence {
                what: format!("hurwitz zeta s={s} a={a}"),
                achieved: omitted,
            });
        }
        n *= 2;
    }

    let x = n as f64 + a;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    for j in 0..6 {
        tail += correction_term(s, x, j);
    }
    // Smallest terms first.
    let mut sum = tail;
    for k in (0..n).rev() {
        sum += (k as f64 + a).powf(-s);
    }
    Ok(sum)
}

/// The `j`-th (0-based) Euler-Maclaurin correction
/// `B_{2j+2}/(2j+2)! * s (s+1) ... (s+2j) * x^(-s-2j-1)`.
fn correction_term(s: f64, x: f64, j: usize) -> f64 {
    let mut rising = 1.0;
    for i in 0..(2 * j + 1) {
        rising *= s + i as f64;
    }
    BERNOULLI_OVER_FACTORIAL[j] * rising * x.powf(-s - (2 * j + 1) as f64)
}

/// `Z(s, a) = zeta(s, 1 - a) + zeta(s, a)` for `0 < a < 1`.
///
/// Both calls are made from the representative `min(a, 1 - a)`, so
/// `Z(s, a)` and `Z(s, 1 - a)` are bit-identical whenever `1 - a` is exact
/// (in particular on every dyadic grid).
pub fn symbol_z(s: f64, a: f64) -> Result<f64> {
    symbol_z_tol(s, a, DEFAULT_ZETA_TOL)
}

pub fn symbol_z_tol(s: f64, a: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("Z offset a={a} must lie in (0, 1)")));
    }
    let c = if a > 0.5 { 1.0 - a } else { a };
    let near = hurwitz_zeta(ZetaArgs::new(s, c)?, tol)?;
    let far = hurwitz_zeta(ZetaArgs::new(s, 1.0 - c)?, tol)?;
    Ok(near + far)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn z(s: f64, a: f64) -> f64 {
        hurwitz_zeta(ZetaArgs::new(s, a).unwrap(), DEFAULT_ZETA_TOL).unwrap()
    }

    #[test]
    fn classical_values() {
        assert!((z(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((z(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-13);
        assert!((z(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(ZetaArgs::new(1.0, 0.5).is_err());
        assert!(ZetaArgs::new(2.0, 0.0).is_err());
        assert!(ZetaArgs::new(2.0, 1.5).is_err());
        assert!(ZetaArgs::new(f64::NAN, 0.5).is_err());
        let args = ZetaArgs::new(2.0, 0.5).unwrap();
        assert!(hurwitz_zeta(args, 0.0).is_err());
        assert!(hurwitz_zeta(args, 0.1).is_err());
        assert!(symbol_z(2.0, 0.0).is_err());
        assert!(symbol_z(2.0, 1.0).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // s barely above 1 needs an astronomically long direct sum.
        let err = zeta_unchecked(1.0 + 1e-9, 0.5, 1e-300).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn z_at_half_is_twice_zeta() {
        for &s in &[2.0, 2.5, 3.7] {
            assert_eq!(symbol_z(s, 0.5).unwrap(), 2.0 * z(s, 0.5));
        }
        assert!((symbol_z(2.0, 0.5).unwrap() - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn z_is_bit_symmetric_on_dyadic_grid() {
        let n = 1024;
        for j in 1..n {
            let a = j as f64 / n as f64;
            assert_eq!(symbol_z(3.2, a).unwrap(), symbol_z(3.2, 1.0 - a).unwrap());
        }
    }
}
