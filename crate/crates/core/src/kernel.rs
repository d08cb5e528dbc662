//! Nonnegative compactly supported averaging kernels and their Fourier
//! transforms `h_hat(w) = int h(t) e^{-i w t} dt`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One polynomial piece `h(t) = sum_i coeffs[i] * t^i` on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPiece {
    pub start: f64,
    pub end: f64,
    pub coeffs: Vec<f64>,
}

impl PolyPiece {
    fn eval(&self, t: f64) -> f64 {
        horner(&self.coeffs, t)
    }

    /// Exact `int_start^end p(t) t^n dt`.
    fn moment(&self, n: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let p = (i + n + 1) as i32;
                c * (self.end.powi(p) - self.start.powi(p)) / p as f64
            })
            .sum()
    }

    /// `int_start^end p(t) e^{-i w t} dt`, exact up to rounding.
    fn fourier(&self, w: f64) -> Complex64 {
        let reach = self.start.abs().max(self.end.abs());
        if w.abs() * reach <= 1.0 {
            // Power series in w; every factor is bounded by one.
            let mut sum = Complex64::new(0.0, 0.0);
            let mut factor = Complex64::new(1.0, 0.0);
            for n in 0..60 {
                let term = factor * self.moment(n);
                sum += term;
                if term.norm() < 1e-18 * sum.norm().max(1e-300) && n > 2 {
                    break;
                }
                factor *= Complex64::new(0.0, -w) / (n + 1) as f64;
            }
            sum
        } else {
            // Integration by parts terminates for polynomials.
            let iw = Complex64::new(0.0, w);
            let antideriv = |t: f64| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut deriv = self.coeffs.clone();
                let mut pow = iw;
                while !deriv.is_empty() {
                    acc += horner(&deriv, t) / pow;
                    deriv = derivative(&deriv);
                    pow *= iw;
                }
                -Complex64::from_polar(1.0, -w * t) * acc
            };
            antideriv(self.end) - antideriv(self.start)
        }
    }

    fn reflected(&self) -> PolyPiece {
        PolyPiece {
            start: -self.end,
            end: -self.start,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { *c })
                .collect(),
        }
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// `1/(2l)` on `[-l, l]`.
    Rect,
    /// `(1 - |t|/l) / l` on `[-l, l]`.
    Triangle,
    /// `(1 + cos(pi t / l)) / (2l)` on `[-l, l]`.
    RaisedCosine,
    Piecewise(Vec<PolyPiece>),
}

/// A nonnegative averaging function supported in `[-l, l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingKernel {
    shape: Shape,
    /// Support half-width `l`: the smallest `l` with `supp h` inside `[-l, l]`.
    half_width: f64,
    l1_norm: f64,
    label: String,
}

impl AveragingKernel {
    pub fn rect(l: f64) -> Result<Self> {
        Self::builtin(Shape::Rect, l, "rect")
    }

    pub fn triangle(l: f64) -> Result<Self> {
        Self::builtin(Shape::Triangle, l, "tri")
    }

    pub fn raised_cosine(l: f64) -> Result<Self> {
        Self::builtin(Shape::RaisedCosine, l, "cos")
    }

    fn builtin(shape: Shape, l: f64, name: &str) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidKernel(format!("{name} half-width {l} must be positive")));
        }
        Ok(Self {
            shape,
            half_width: l,
            l1_norm: 1.0,
            label: format!("{name}:{l}"),
        })
    }

    /// User kernel from ordered, disjoint polynomial pieces.
    pub fn piecewise(pieces: Vec<PolyPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidKernel("no pieces".into()));
        }
        for p in &pieces {
            if !(p.start.is_finite() && p.end.is_finite() && p.start < p.end) {
                return Err(Error::InvalidKernel(format!(
                    "piece [{}, {}) is empty or not finite",
                    p.start, p.end
                )));
            }
            if p.coeffs.is_empty() || p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidKernel("piece without finite coefficients".into()));
            }
        }
        for w in pieces.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::InvalidKernel("pieces overlap or are unordered".into()));
            }
        }
        // Nonnegativity on a dense sample of every piece, endpoints included.
        for p in &pieces {
            for i in 0..=512 {
                let t = p.start + (p.end - p.start) * i as f64 / 512.0;
                if p.eval(t) < -1e-14 {
                    return Err(Error::InvalidKernel(format!("h({t}) is negative")));
                }
            }
        }
        let l1_norm: f64 = pieces.iter().map(|p| p.moment(0)).sum();
        if !(l1_norm > 0.0) {
            return Err(Error::InvalidKernel("kernel has zero mass".into()));
        }
        let half_width = pieces
            .iter()
            .map(|p| p.start.abs().max(p.end.abs()))
            .fold(0.0, f64::max);
        Ok(Self {
            shape: Shape::Piecewise(pieces),
            half_width,
            l1_norm,
            label: "piecewise".into(),
        })
    }

    /// Parses `rect:l`, `tri:l`, `cos:l` or `file:path`.
    ///
    /// Kernel files are CSV with header `start,end,c0,c1,...`; each row is a
    /// piece `sum_i c_i t^i` on `[start, end)`. Missing trailing coefficients
    /// are zero.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidKernel(format!("expected kind:arg, got {spec:?}")))?;
        let width = || {
            arg.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidKernel(format!("bad half-width {arg:?}")))
        };
        let mut kernel = match kind.trim() {
            "rect" => Self::rect(width()?)?,
            "tri" => Self::triangle(width()?)?,
            "cos" => Self::raised_cosine(width()?)?,
            "file" => Self::from_file(Path::new(arg.trim()))?,
            other => return Err(Error::InvalidKernel(format!("unknown kernel kind {other:?}"))),
        };
        kernel.label = spec.trim().to_string();
        Ok(kernel)
    }

    fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pieces = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if lineno == 0 || line.is_empty() {
                continue;
            }
            let nums: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            let nums = nums.map_err(|_| {
                Error::InvalidKernel(format!("{}:{}: bad number", path.display(), lineno + 1))
            })?;
            if nums.len() < 3 {
                return Err(Error::InvalidKernel(format!(
                    "{}:{}: need start,end and at least one coefficient",
                    path.display(),
                    lineno + 1
                )));
            }
            pieces.push(PolyPiece {
                start: nums[0],
                end: nums[1],
                coeffs: nums[2..].to_vec(),
            });
        }
        Self::piecewise(pieces)
    }

    /// Canonical textual form (`rect:0.3`, or the spec it was parsed from).
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Exact `int |h|`; equal to `int h` since `h >= 0`.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// Polynomial pieces, when the kernel is piecewise polynomial.
    pub fn pieces(&self) -> Option<Vec<PolyPiece>> {
        let l = self.half_width;
        match &self.shape {
            Shape::Rect => Some(vec![PolyPiece {
                start: -l,
                end: l,
                coeffs: vec![0.5 / l],
            }]),
            Shape::Triangle => Some(vec![
                PolyPiece {
                    start: -l,
                    end: 0.0,
                    coeffs: vec![1.0 / l, 1.0 / (l * l)],
                },
                PolyPiece {
                    start: 0.0,
                    end: l,
                    coeffs: vec![1.0 / l, -1.0 / (l * l)],
                },
            ]),
            Shape::RaisedCosine => None,
            Shape::Piecewise(p) => Some(p.clone()),
        }
    }

    /// Breakpoints where `h` or one of its derivatives may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let l = self.half_width;
        match &self.shape {
            Shape::Rect | Shape::RaisedCosine => vec![-l, l],
            Shape::Triangle => vec![-l, 0.0, l],
            Shape::Piecewise(p) => {
                let mut b: Vec<f64> = p.iter().flat_map(|q| [q.start, q.end]).collect();
                b.dedup();
                b
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let l = self.half_width;
        match &self.shape {
            Shape::Rect => {
                if t.abs() <= l {
                    0.5 / l
                } else {
                    0.0
                }
            }
            Shape::Triangle => ((1.0 - t.abs() / l) / l).max(0.0),
            Shape::RaisedCosine => {
                if t.abs() <= l {
                    (1.0 + (PI * t / l).cos()) / (2.0 * l)
                } else {
                    0.0
                }
            }
            Shape::Piecewise(pieces) => pieces
                .iter()
                .find(|p| t >= p.start && t < p.end)
                .map_or(0.0, |p| p.eval(t)),
        }
    }

    pub fn is_even(&self) -> bool {
        match &self.shape {
            Shape::Piecewise(pieces) => {
                let mirrored: Vec<PolyPiece> = pieces.iter().rev().map(PolyPiece::reflected).collect();
                pieces.len() == mirrored.len()
                    && pieces.iter().zip(&mirrored).all(|(p, q)| {
                        (p.start - q.start).abs() < 1e-15
                            && (p.end - q.end).abs() < 1e-15
                            && poly_close(&p.coeffs, &q.coeffs)
                    })
            }
            _ => true,
        }
    }

    /// Even part `h0(t) = (h(t) + h(-t)) / 2`.
    pub fn even_part(&self) -> AveragingKernel {
        let Shape::Piecewise(pieces) = &self.shape else {
            return self.clone();
        };
        let mut cuts: Vec<f64> = pieces
            .iter()
            .flat_map(|p| [p.start, p.end, -p.start, -p.end])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mirrored: Vec<PolyPiece> = pieces.iter().map(PolyPiece::reflected).collect();
        let find = |set: &[PolyPiece], mid: f64| {
            set.iter()
                .find(|p| mid >= p.start && mid < p.end)
                .map(|p| p.coeffs.clone())
        };
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let a = find(pieces, mid);
            let b = find(&mirrored, mid);
            if a.is_none() && b.is_none() {
                continue;
            }
            let (a, b) = (a.unwrap_or_default(), b.unwrap_or_default());
            let n = a.len().max(b.len());
            let coeffs = (0..n)
                .map(|i| 0.5 * (a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0)))
                .collect();
            out.push(PolyPiece {
                start: w[0],
                end: w[1],
                coeffs,
            });
        }
        AveragingKernel {
            shape: Shape::Piecewise(out),
            half_width: self.half_width,
            l1_norm: self.l1_norm,
            label: format!("even({})", self.label),
        }
    }

    /// `h_hat(w) = int h(t) e^{-i w t} dt`.
    pub fn fourier(&self, w: f64) -> Complex64 {
        let l = self.half_width;
        match &self.shape {
            Shape::Rect => Complex64::new(sinc(l * w), 0.0),
            Shape::Triangle => {
                let s = sinc(0.5 * l * w);
                Complex64::new(s * s, 0.0)
            }
            Shape::RaisedCosine => Complex64::new(raised_cosine_hat(l * w), 0.0),
            Shape::Piecewise(pieces) => pieces.iter().map(|p| p.fourier(w)).sum(),
        }
    }

    /// Nonincreasing majorant `H(|w|) >= |h_hat(w)|`.
    pub fn fourier_majorant(&self, w: f64) -> f64 {
        let w = w.abs();
        let l = self.half_width;
        let decay = match &self.shape {
            Shape::Rect => 1.0 / (l * w),
            Shape::Triangle => 4.0 / (l * l * w * w),
            Shape::RaisedCosine => {
                let x = l * w;
                if x > 2.0 * PI {
                    PI * PI / (x * (x * x - PI * PI))
                } else {
                    f64::INFINITY
                }
            }
            Shape::Piecewise(pieces) => {
                // Boundary terms of the integration by parts, bounded for |w| >= 1.
                let mut jump = 0.0;
                for p in pieces {
                    let mut d = p.coeffs.clone();
                    while !d.is_empty() {
                        jump += horner(&d, p.start).abs() + horner(&d, p.end).abs();
                        d = derivative(&d);
                    }
                }
                if w >= 1.0 {
                    jump / w
                } else {
                    f64::INFINITY
                }
            }
        };
        decay.min(self.l1_norm)
    }
}

impl fmt::Display for AveragingKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn poly_close(a: &[f64], b: &[f64]) -> bool {
    let n = a.len().max(b.len());
    (0..n).all(|i| {
        let x = a.get(i).copied().unwrap_or(0.0);
        let y = b.get(i).copied().unwrap_or(0.0);
        (x - y).abs() <= 1e-13 * (1.0 + x.abs())
    })
}

/// `sin(x) / x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `sin(x)/x * pi^2/(pi^2 - x^2)`, continuous through `|x| = pi`.
fn raised_cosine_hat(x: f64) -> f64 {
    let x = x.abs();
    if x < 0.5 * PI {
        sinc(x) * PI * PI / (PI * PI - x * x)
    } else {
        // sin(x) = sin(pi - x) and pi^2 - x^2 = (pi - x)(pi + x)
        sinc(PI - x) * PI * PI / (x * (PI + x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadrature::double_exponential::integrate;

    fn quad_fourier(k: &AveragingKernel, w: f64) -> Complex64 {
        let b = k.breakpoints();
        let mut re = 0.0;
        let mut im = 0.0;
        for s in b.windows(2) {
            re += integrate(|t| k.eval(t) * (w * t).cos(), s[0], s[1], 1e-13).integral;
            im -= integrate(|t| k.eval(t) * (w * t).sin(), s[0], s[1], 1e-13).integral;
        }
        Complex64::new(re, im)
    }

    fn asymmetric() -> AveragingKernel {
        AveragingKernel::piecewise(vec![
            PolyPiece { start: -0.2, end: 0.1, coeffs: vec![1.0, 2.0] },
            PolyPiece { start: 0.1, end: 0.3, coeffs: vec![0.5, 0.0, 3.0] },
        ])
        .unwrap()
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let kernels = [
            AveragingKernel::rect(0.3).unwrap(),
            AveragingKernel::triangle(0.25).unwrap(),
            AveragingKernel::raised_cosine(0.35).unwrap(),
            asymmetric(),
        ];
        for k in &kernels {
            for &w in &[0.0, 0.7, -2.0, PI / 0.35, 9.0, 31.4, 120.0] {
                let exact = k.fourier(w);
                let quad = quad_fourier(k, w);
                assert!((exact - quad).norm() < 1e-10, "{} w={w}: {exact} vs {quad}", k.label());
                assert!(exact.norm() <= k.l1_norm() + 1e-12);
                assert!(exact.norm() <= k.fourier_majorant(w) + 1e-12);
            }
        }
    }

    #[test]
    fn rect_transform_is_sinc() {
        let k = AveragingKernel::rect(0.4).unwrap();
        for &w in &[0.1, 1.0, 5.0, 40.0] {
            assert!((k.fourier(w).re - (0.4 * w).sin() / (0.4 * w)).abs() < 1e-15);
            assert_eq!(k.fourier(w).im, 0.0);
        }
        assert_eq!(k.fourier(0.0).re, 1.0);
    }

    #[test]
    fn mass_and_even_part() {
        let k = asymmetric();
        let expected = (0.3 * 1.0 + (0.01 - 0.04)) + (0.5 * 0.2 + (0.027 - 0.001));
        assert!((k.l1_norm() - expected).abs() < 1e-15);
        assert!((k.fourier(0.0).re - expected).abs() < 1e-14);
        assert!(!k.is_even());
        let h0 = k.even_part();
        assert!(h0.is_even());
        for &t in &[-0.25, -0.15, 0.0, 0.05, 0.25] {
            let want = 0.5 * (k.eval(t) + k.eval(-t));
            assert!((h0.eval(t) - want).abs() < 1e-14);
        }
        assert!(h0.fourier(3.0).im.abs() < 1e-14);
        assert!(AveragingKernel::triangle(0.2).unwrap().is_even());
    }

    #[test]
    fn parse_and_reject() {
        assert_eq!(AveragingKernel::parse("rect:0.25").unwrap().half_width(), 0.25);
        assert_eq!(AveragingKernel::parse("tri:0.1").unwrap().label(), "tri:0.1");
        assert!(AveragingKernel::parse("rect").is_err());
        assert!(AveragingKernel::parse("gauss:0.1").is_err());
        assert!(AveragingKernel::parse("rect:-1").is_err());
        let neg = AveragingKernel::piecewise(vec![PolyPiece { start: -0.1, end: 0.1, coeffs: vec![0.0, 1.0] }]);
        assert!(neg.is_err());
        let overlap = AveragingKernel::piecewise(vec![
            PolyPiece { start: -0.1, end: 0.1, coeffs: vec![1.0] },
            PolyPiece { start: 0.0, end: 0.2, coeffs: vec![1.0] },
        ]);
        assert!(overlap.is_err());
    }

    #[test]
    fn parse_kernel_file() {
        let dir = std::env::temp_dir().join(format!("fracspline-kernel-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("k.csv");
        std::fs::write(&path, "start,end,c0,c1\n-0.2,0,5,25\n0,0.2,5,-25\n").unwrap();
        let k = AveragingKernel::parse(&format!("file:{}", path.display())).unwrap();
        let tri = AveragingKernel::triangle(0.2).unwrap();
        assert!((k.l1_norm() - 1.0).abs() < 1e-14);
        assert!(k.is_even());
        for &w in &[0.5, 3.0, 17.0] {
            assert!((k.fourier(w) - tri.fourier(w)).norm() < 1e-13);
        }
    }
}
