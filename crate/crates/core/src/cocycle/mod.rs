//! Quasiperiodic `M(2,C)` cocycles `(A, w): (v, x) -> (A(x) v, x + w)`.

mod mat2;
mod trig;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use mat2::Mat2;
pub use trig::{Coefficient, Trig, TrigPoly, TrigPolyMatrix};

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use crate::torus::{reduce_mod1, Frequency, SCAN_LIMIT};

/// Norms and determinants below this are treated as zero.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// A matrix-valued function on `T^d` that can be evaluated pointwise.
///
/// Evaluation fails only where the function is defined as singular (for
/// instance the renormalized cocycle at zeros of the determinant).
pub trait MatrixFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn try_eval(&self, x: &[f64]) -> Result<Mat2>;
}

impl MatrixFunction for TrigPolyMatrix {
    fn dim(&self) -> usize {
        TrigPolyMatrix::dim(self)
    }

    fn try_eval(&self, x: &[f64]) -> Result<Mat2> {
        Ok(self.eval(x))
    }
}

impl<F: MatrixFunction + ?Sized> MatrixFunction for Box<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn try_eval(&self, x: &[f64]) -> Result<Mat2> {
        (**self).try_eval(x)
    }
}

impl<F: MatrixFunction + ?Sized> MatrixFunction for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn try_eval(&self, x: &[f64]) -> Result<Mat2> {
        (**self).try_eval(x)
    }
}

/// `x -> A(x) / |det A(x)|^{1/2}`, singular where `|det A| < floor`.
#[derive(Debug, Clone)]
pub struct Renormalized<F> {
    inner: F,
    floor: f64,
}

impl<F: MatrixFunction> Renormalized<F> {
    pub fn with_floor(inner: F, floor: f64) -> Self {
        Self { inner, floor }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: MatrixFunction> MatrixFunction for Renormalized<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn try_eval(&self, x: &[f64]) -> Result<Mat2> {
        let m = self.inner.try_eval(x)?;
        let det = m.det().norm();
        if !(det >= self.floor) || !det.is_finite() {
            return Err(Error::Singular { det, floor: self.floor });
        }
        Ok(m.scale_real(det.sqrt().recip()))
    }
}

/// Renormalize a trigonometric polynomial cocycle to `|det| = 1`.
pub fn renormalize(a: &TrigPolyMatrix) -> Result<Renormalized<TrigPolyMatrix>> {
    if a.det_scalar().is_zero() {
        return Err(Error::IdenticallySingular);
    }
    Ok(Renormalized::with_floor(a.clone(), UNDERFLOW_FLOOR))
}

/// `diag(e^{l(x)}, e^{-l(x)})` with `l(x) = e^{2 pi i k.x} e^{-2 pi sum k}`.
///
/// For `k.w` an integer the cocycle is diagonal along every orbit and
/// `L = (2/pi) e^{-2 pi sum k}`; otherwise `L = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscontinuityExample {
    k: Vec<i64>,
    amplitude: f64,
}

impl DiscontinuityExample {
    pub fn new(k: Vec<i64>) -> Result<Self> {
        if k.is_empty() || k.iter().all(|&v| v == 0) {
            return Err(Error::InvalidArgument("k must be a nonzero lattice vector".into()));
        }
        let sum: i64 = k.iter().sum();
        Ok(Self {
            amplitude: (-TAU * sum as f64).exp(),
            k,
        })
    }

    pub fn k(&self) -> &[i64] {
        &self.k
    }

    pub fn lambda(&self, x: &[f64]) -> Complex64 {
        let phase: f64 = self.k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
        Complex64::from_polar(self.amplitude, TAU * reduce_mod1(phase))
    }

    /// The closed-form exponent at a resonant frequency.
    pub fn resonant_exponent(&self) -> f64 {
        2.0 / std::f64::consts::PI * self.amplitude
    }
}

impl MatrixFunction for DiscontinuityExample {
    fn dim(&self) -> usize {
        self.k.len()
    }

    fn try_eval(&self, x: &[f64]) -> Result<Mat2> {
        let l = self.lambda(x);
        Ok(Mat2::diag(l.exp(), (-l).exp()))
    }
}

pub fn discontinuity_example(k: Vec<i64>) -> Result<DiscontinuityExample> {
    DiscontinuityExample::new(k)
}

/// A matrix function paired with a frequency of the same dimension.
#[derive(Debug, Clone)]
pub struct Cocycle<F = TrigPolyMatrix> {
    a: F,
    omega: Frequency,
}

impl<F: MatrixFunction> Cocycle<F> {
    pub fn new(a: F, omega: Frequency) -> Result<Self> {
        if a.dim() != omega.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: omega.dim(),
            });
        }
        Ok(Self { a, omega })
    }

    pub fn matrix(&self) -> &F {
        &self.a
    }

    pub fn omega(&self) -> &Frequency {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// The same matrix function driven by another frequency.
    pub fn with_omega(&self, omega: Frequency) -> Result<Self>
    where
        F: Clone,
    {
        Self::new(self.a.clone(), omega)
    }

    /// `x + j w mod 1`, computed directly rather than by repeated addition.
    pub fn orbit_point(&self, x: &[f64], j: u64, out: &mut [f64]) {
        for ((o, &xi), &wi) in out.iter_mut().zip(x).zip(self.omega.components()) {
            *o = reduce_mod1(xi + j as f64 * wi);
        }
    }

    pub fn iterate_log_norm(&self, n: u64, x: &[f64]) -> LogNormResult {
        iterate(self, n, x, false)
    }

    /// As [`Cocycle::iterate_log_norm`], also recording `ln ||A_j(x)||` for
    /// `j = 1..=n`.
    pub fn iterate_log_norm_traced(&self, n: u64, x: &[f64]) -> LogNormResult {
        iterate(self, n, x, true)
    }
}

/// `(1/N) ln ||A_N(x)||` with an underflow flag.
#[derive(Debug, Clone, PartialEq)]
pub struct LogNormResult {
    pub log_norm_avg: f64,
    pub underflowed: bool,
    pub partial_logs: Option<Vec<f64>>,
}

impl LogNormResult {
    /// The value, or `None` for the underflow sentinel.
    pub fn finite(&self) -> Option<f64> {
        (!self.underflowed).then_some(self.log_norm_avg)
    }
}

fn iterate<F: MatrixFunction>(c: &Cocycle<F>, n: u64, x: &[f64], trace: bool) -> LogNormResult {
    assert!(n >= 1, "iterate_log_norm needs N >= 1");
    let underflow = |partial| LogNormResult {
        log_norm_avg: f64::NEG_INFINITY,
        underflowed: true,
        partial_logs: partial,
    };
    let mut partial = trace.then(|| Vec::with_capacity(n as usize));
    let mut point = x.to_vec();
    // invariant: A_j(x) = e^{log_acc} * p with ||p|| = 1
    let mut p = Mat2::IDENTITY;
    let mut log_acc = NeumaierSum::new();
    for j in 0..n {
        c.orbit_point(x, j, &mut point);
        let a = match c.a.try_eval(&point) {
            Ok(a) => a,
            Err(_) => return underflow(partial),
        };
        let q = a * p;
        let norm = q.norm();
        if !(norm >= UNDERFLOW_FLOOR) || !norm.is_finite() {
            return underflow(partial);
        }
        p = q.scale_real(norm.recip());
        log_acc.add(norm.ln());
        if let Some(v) = partial.as_mut() {
            v.push(log_acc.value());
        }
    }
    LogNormResult {
        log_norm_avg: log_acc.value() / n as f64,
        underflowed: false,
        partial_logs: partial,
    }
}

/// `[[E - v(x), -1], [1, 0]]`.
pub fn schrodinger(v: &TrigPoly, energy: f64, rho: f64) -> Result<TrigPolyMatrix> {
    if !v.is_real_valued(1e-12) {
        return Err(Error::InvalidArgument("potential must be real-valued".into()));
    }
    let d = v.dim();
    let e = TrigPoly::constant(d, Complex64::new(energy, 0.0));
    let top_left = e.sub(v)?;
    let minus_one = TrigPoly::constant(d, Complex64::new(-1.0, 0.0));
    let one = TrigPoly::constant(d, Complex64::new(1.0, 0.0));
    let zero = TrigPoly::zero(d);
    TrigPolyMatrix::from_entries([&top_left, &minus_one, &one, &zero], rho)
}

/// The almost Mathieu cocycle: Schrodinger with `v = 2 lambda cos(2 pi x)`.
pub fn almost_mathieu(lambda: f64, energy: f64, rho: f64) -> Result<TrigPolyMatrix> {
    schrodinger(&TrigPoly::cosine(vec![1], 2.0 * lambda), energy, rho)
}

/// `[[E - v(x), -conj(a(x - w))], [a(x), 0]]`.
pub fn jacobi(v: &TrigPoly, a: &TrigPoly, energy: f64, omega: &Frequency, rho: f64) -> Result<TrigPolyMatrix> {
    if !v.is_real_valued(1e-12) {
        return Err(Error::InvalidArgument("potential must be real-valued".into()));
    }
    if a.is_zero() {
        return Err(Error::IdenticallySingular);
    }
    let d = v.dim();
    if a.dim() != d || omega.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if a.dim() != d { a.dim() } else { omega.dim() },
        });
    }
    let back: Vec<f64> = omega.components().iter().map(|w| -w).collect();
    let top_right = a.shift(&back)?.conj_reflect().scale(Complex64::new(-1.0, 0.0));
    let top_left = TrigPoly::constant(d, Complex64::new(energy, 0.0)).sub(v)?;
    let zero = TrigPoly::zero(d);
    TrigPolyMatrix::from_entries([&top_left, &top_right, a, &zero], rho)
}

/// One period of a Jacobi cocycle over a `q`-periodic background.
///
/// Site `j` in `1..=q` contributes `J(x + (j-1) w) - v_per[j-1] E_11`, where
/// `J` is [`jacobi`]; the result is `J_q ... J_1`. With `v_per = 0` this is
/// the `q`-step iterate of `J` at `x`.
pub fn jacobi_periodic(
    v: &TrigPoly,
    a: &TrigPoly,
    v_per: &[f64],
    energy: f64,
    omega: &Frequency,
    rho: f64,
) -> Result<TrigPolyMatrix> {
    if v_per.is_empty() {
        return Err(Error::InvalidArgument("period must be >= 1".into()));
    }
    let base = jacobi(v, a, energy, omega, rho)?;
    let d = base.dim();
    let mut product = TrigPolyMatrix::constant(d, Mat2::IDENTITY, rho)?;
    for (j, &vj) in v_per.iter().enumerate() {
        let offset: Vec<f64> = omega.components().iter().map(|w| j as f64 * w).collect();
        let site = base
            .shift(&offset)?
            .sub(&TrigPolyMatrix::constant(d, Mat2::real(vj, 0.0, 0.0, 0.0), rho)?)?;
        product = site.mul(&product)?;
    }
    Ok(product)
}

/// Sampled strip distance between two matrix polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripNorm {
    pub value: f64,
    pub samples: usize,
}

/// `sup |A(z) - B(z)|` (entrywise max modulus) over `|Im z_j| <= rho`.
///
/// The supremum of a subharmonic function of each variable sits on the faces
/// `Im z_j = +-rho`; those `2^d` faces and the real torus are sampled on a
/// uniform grid of `points_per_dim` real parts per coordinate.
pub fn strip_norm(a: &TrigPolyMatrix, b: &TrigPolyMatrix, rho: f64, points_per_dim: usize) -> Result<StripNorm> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if rho > a.rho().min(b.rho()) || !(rho >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "strip radius {rho} exceeds the radius the inputs are defined on"
        )));
    }
    if points_per_dim == 0 {
        return Err(Error::InvalidArgument("strip grid needs at least one point".into()));
    }
    let d = a.dim();
    let diff = a.sub(b)?.with_rho(a.rho().min(b.rho()))?;
    let grid = (points_per_dim as f64).powi(d as i32);
    if grid * ((1u64 << d.min(62)) as f64 + 1.0) > SCAN_LIMIT {
        return Err(Error::ScanTooLarge {
            points: grid,
            limit: SCAN_LIMIT,
        });
    }
    let grid = grid as usize;
    // face index 2^d is the real torus
    let faces = (1usize << d) + 1;
    let value = (0..faces * grid)
        .into_par_iter()
        .map(|idx| {
            let (face, mut cell) = (idx / grid, idx % grid);
            let z: Vec<Complex64> = (0..d)
                .map(|j| {
                    let re = (cell % points_per_dim) as f64 / points_per_dim as f64;
                    cell /= points_per_dim;
                    let im = if face == faces - 1 {
                        0.0
                    } else if face >> j & 1 == 1 {
                        rho
                    } else {
                        -rho
                    };
                    Complex64::new(re, im)
                })
                .collect();
            diff.eval_strip(&z).map(|m| m.max_abs()).unwrap_or(f64::NAN)
        })
        .reduce(|| 0.0, f64::max);
    Ok(StripNorm {
        value,
        samples: faces * grid,
    })
}
