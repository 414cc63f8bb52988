//! Trigonometric polynomials on `T^d`, scalar and 2x2-matrix valued.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::mat2::Mat2;
use crate::error::{Error, Result};
use crate::torus::{max_norm, Automorphism};

type Phases = SmallVec<[Complex64; 64]>;

/// Coefficient types a trigonometric polynomial can carry.
pub trait Coefficient: Copy + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: Complex64) -> Self;
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: Complex64) -> Self {
        self * s
    }
}

impl Coefficient for Mat2 {
    fn zero() -> Self {
        Mat2::ZERO
    }
    fn is_zero(&self) -> bool {
        *self == Mat2::ZERO
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: Complex64) -> Self {
        Mat2::scale(&self, s)
    }
}

/// Sparse Fourier series `sum_k c_k e^{2 pi i k.x}` with exact-zero
/// coefficients dropped and keys kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Trig<T: Coefficient> {
    d: usize,
    coeffs: Vec<(Vec<i64>, T)>,
    // max |k_j| per coordinate, sizes the phase tables
    spans: Vec<usize>,
}

pub type TrigPoly = Trig<Complex64>;

/// Per-coordinate phase tables `e^{2 pi i m z_j}` for `|m| <= span_j`.
fn phase_table(spans: &[usize], point: impl Fn(usize) -> Complex64) -> (Phases, SmallVec<[usize; 8]>) {
    let mut table = Phases::new();
    let mut offsets = SmallVec::<[usize; 8]>::new();
    for (j, &span) in spans.iter().enumerate() {
        offsets.push(table.len() + span);
        let base = point(j);
        let inv = base.inv();
        let start = table.len();
        table.resize(start + 2 * span + 1, Complex64::new(1.0, 0.0));
        for m in 1..=span {
            table[start + span + m] = table[start + span + m - 1] * base;
            table[start + span - m] = table[start + span - m + 1] * inv;
        }
    }
    (table, offsets)
}

impl<T: Coefficient> Trig<T> {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            coeffs: Vec::new(),
            spans: vec![0; d],
        }
    }

    pub fn from_map(d: usize, map: BTreeMap<Vec<i64>, T>) -> Result<Self> {
        if let Some(bad) = map.keys().find(|k| k.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        let coeffs: Vec<(Vec<i64>, T)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let mut spans = vec![0usize; d];
        for (k, _) in &coeffs {
            for (s, &kj) in spans.iter_mut().zip(k) {
                *s = (*s).max(kj.unsigned_abs() as usize);
            }
        }
        Ok(Self { d, coeffs, spans })
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Vec<i64>, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            let slot = map.entry(k).or_insert_with(T::zero);
            *slot = slot.add(c);
        }
        Self::from_map(d, map)
    }

    pub fn constant(d: usize, c: T) -> Self {
        Self::from_terms(d, [(vec![0; d], c)]).expect("dimension consistent")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(Vec<i64>, T)] {
        &self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> T {
        self.coeffs
            .binary_search_by(|(key, _)| key.as_slice().cmp(k))
            .map(|i| self.coeffs[i].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Max-norm degree `max |k|` over nonzero coefficients.
    pub fn degree(&self) -> u64 {
        self.coeffs.iter().map(|(k, _)| max_norm(k)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.d)?;
        Self::from_terms(self.d, self.coeffs.iter().chain(&other.coeffs).cloned())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for (_, c) in &mut out.coeffs {
            *c = c.scale(s);
        }
        out.coeffs.retain(|(_, c)| !c.is_zero());
        out
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.d != d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: d,
            });
        }
        Ok(())
    }

    /// `x -> p(x + w)`: coefficient `c_k` picks up `e^{2 pi i k.w}`.
    pub fn shift(&self, omega: &[f64]) -> Result<Self> {
        self.check_dim(omega.len())?;
        let terms = self.coeffs.iter().map(|(k, c)| {
            let phase: f64 = k.iter().zip(omega).map(|(&kj, &wj)| kj as f64 * wj).sum();
            (k.clone(), c.scale(Complex64::from_polar(1.0, TAU * phase)))
        });
        Self::from_terms(self.d, terms)
    }

    /// `x -> p(B x)`: the coefficient at `k` moves to `B^T k`.
    pub fn compose(&self, b: &Automorphism) -> Result<Self> {
        self.check_dim(b.dim())?;
        Self::from_terms(self.d, self.coeffs.iter().map(|(k, c)| (b.transpose_apply(k), *c)))
    }

    fn eval_with(&self, table: &Phases, offsets: &[usize]) -> T {
        let mut acc = T::zero();
        for (k, c) in &self.coeffs {
            let mut phase = Complex64::new(1.0, 0.0);
            for (j, &kj) in k.iter().enumerate() {
                if kj != 0 {
                    phase *= table[(offsets[j] as i64 + kj) as usize];
                }
            }
            acc = acc.add(c.scale(phase));
        }
        acc
    }

    /// Evaluate at a real point of the torus.
    pub fn eval(&self, x: &[f64]) -> T {
        debug_assert_eq!(x.len(), self.d);
        let (table, offsets) = phase_table(&self.spans, |j| Complex64::from_polar(1.0, TAU * x[j]));
        self.eval_with(&table, &offsets)
    }

    /// Evaluate the analytic extension at a complex point `z`.
    pub fn eval_complex(&self, z: &[Complex64]) -> T {
        debug_assert_eq!(z.len(), self.d);
        let (table, offsets) = phase_table(&self.spans, |j| {
            Complex64::from_polar((-TAU * z[j].im).exp(), TAU * z[j].re)
        });
        self.eval_with(&table, &offsets)
    }
}

impl TrigPoly {
    /// `amp * cos(2 pi k.x)`.
    pub fn cosine(k: Vec<i64>, amp: f64) -> Self {
        let d = k.len();
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        let half = Complex64::new(amp / 2.0, 0.0);
        Self::from_terms(d, [(k, half), (neg, half)]).expect("dimension consistent")
    }

    /// `amp * sin(2 pi k.x)`.
    pub fn sine(k: Vec<i64>, amp: f64) -> Self {
        let d = k.len();
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        Self::from_terms(
            d,
            [
                (k, Complex64::new(0.0, -amp / 2.0)),
                (neg, Complex64::new(0.0, amp / 2.0)),
            ],
        )
        .expect("dimension consistent")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.d)?;
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let k: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        Self::from_map(self.d, map)
    }

    /// `x -> conj(p(x))` on the real torus, as a trigonometric polynomial.
    pub fn conj_reflect(&self) -> Self {
        let terms = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.iter().map(|v| -v).collect::<Vec<_>>(), c.conj()));
        Self::from_terms(self.d, terms).expect("dimension consistent")
    }

    /// Whether `c_{-k} = conj(c_k)` for every `k` up to `tol`.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            (self.coeff(&neg) - c.conj()).norm() <= tol
        })
    }
}

/// A 2x2-matrix trigonometric polynomial with the strip radius it is
/// considered on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TrigPolyMatrixDoc", try_from = "TrigPolyMatrixDoc")]
pub struct TrigPolyMatrix {
    poly: Trig<Mat2>,
    rho: f64,
}

impl TrigPolyMatrix {
    pub fn new(poly: Trig<Mat2>, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "strip radius must be positive, got {rho}"
            )));
        }
        Ok(Self { poly, rho })
    }

    pub fn from_terms(d: usize, rho: f64, terms: impl IntoIterator<Item = (Vec<i64>, Mat2)>) -> Result<Self> {
        Self::new(Trig::from_terms(d, terms)?, rho)
    }

    pub fn constant(d: usize, m: Mat2, rho: f64) -> Result<Self> {
        Self::new(Trig::constant(d, m), rho)
    }

    /// Assemble `[[e11, e12], [e21, e22]]` from scalar polynomials.
    pub fn from_entries(entries: [&TrigPoly; 4], rho: f64) -> Result<Self> {
        let d = entries[0].dim();
        let mut map: BTreeMap<Vec<i64>, Mat2> = BTreeMap::new();
        for (slot, p) in entries.iter().enumerate() {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
            for (k, c) in p.terms() {
                let m = map.entry(k.clone()).or_insert(Mat2::ZERO);
                match slot {
                    0 => m.a += c,
                    1 => m.b += c,
                    2 => m.c += c,
                    _ => m.d += c,
                }
            }
        }
        Self::new(Trig::from_map(d, map)?, rho)
    }

    /// Scalar polynomial of one entry (`0..4` row-major).
    pub fn entry(&self, slot: usize) -> TrigPoly {
        let terms = self.poly.terms().iter().map(|(k, m)| {
            let c = match slot {
                0 => m.a,
                1 => m.b,
                2 => m.c,
                _ => m.d,
            };
            (k.clone(), c)
        });
        Trig::from_terms(self.dim(), terms).expect("dimension consistent")
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self = Self::new(self.poly, rho)?;
        Ok(self)
    }

    pub fn degree(&self) -> u64 {
        self.poly.degree()
    }

    pub fn poly(&self) -> &Trig<Mat2> {
        &self.poly
    }

    pub fn eval(&self, x: &[f64]) -> Mat2 {
        self.poly.eval(x)
    }

    /// Evaluate on the complex strip `|Im z_j| <= rho`.
    pub fn eval_strip(&self, z: &[Complex64]) -> Result<Mat2> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        // a few ulps of slack so boundary samples built as +-rho are accepted
        let slack = self.rho * 4.0 * f64::EPSILON;
        if let Some((index, zj)) = z.iter().enumerate().find(|(_, zj)| zj.im.abs() > self.rho + slack) {
            return Err(Error::OutsideStrip {
                index,
                im: zj.im,
                rho: self.rho,
            });
        }
        Ok(self.poly.eval_complex(z))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(self.poly.add(&other.poly)?, self.rho.min(other.rho))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::new(self.poly.sub(&other.poly)?, self.rho.min(other.rho))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            poly: self.poly.scale(s),
            rho: self.rho,
        }
    }

    /// Pointwise matrix product `self(x) * other(x)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.poly.check_dim(other.dim())?;
        let mut map: BTreeMap<Vec<i64>, Mat2> = BTreeMap::new();
        for (k1, m1) in self.poly.terms() {
            for (k2, m2) in other.poly.terms() {
                let k: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                let slot = map.entry(k).or_insert(Mat2::ZERO);
                *slot = *slot + *m1 * *m2;
            }
        }
        Self::new(Trig::from_map(self.dim(), map)?, self.rho.min(other.rho))
    }

    /// `x -> A(x + w)`.
    pub fn shift(&self, omega: &[f64]) -> Result<Self> {
        Self::new(self.poly.shift(omega)?, self.rho)
    }

    /// `x -> A(B x)`.
    pub fn compose(&self, b: &Automorphism) -> Result<Self> {
        Self::new(self.poly.compose(b)?, self.rho)
    }

    /// `det A(x)` as a scalar polynomial, by convolving entry polynomials.
    pub fn det_scalar(&self) -> TrigPoly {
        let [a, b, c, d] = [0, 1, 2, 3].map(|s| self.entry(s));
        let ad = a.mul(&d).expect("same dimension");
        let bc = b.mul(&c).expect("same dimension");
        ad.sub(&bc).expect("same dimension")
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffDoc {
    k: Vec<i64>,
    m: [[f64; 2]; 4],
}

/// JSON layout `{d, degree, rho, coeffs: [{k, m}]}`.
#[derive(Serialize, Deserialize)]
struct TrigPolyMatrixDoc {
    d: usize,
    degree: u64,
    rho: f64,
    coeffs: Vec<CoeffDoc>,
}

impl From<TrigPolyMatrix> for TrigPolyMatrixDoc {
    fn from(t: TrigPolyMatrix) -> Self {
        Self {
            d: t.dim(),
            degree: t.degree(),
            rho: t.rho,
            coeffs: t
                .poly
                .terms()
                .iter()
                .map(|(k, m)| CoeffDoc {
                    k: k.clone(),
                    m: m.to_pairs(),
                })
                .collect(),
        }
    }
}

impl TryFrom<TrigPolyMatrixDoc> for TrigPolyMatrix {
    type Error = Error;
    fn try_from(doc: TrigPolyMatrixDoc) -> Result<Self> {
        let t = TrigPolyMatrix::from_terms(
            doc.d,
            doc.rho,
            doc.coeffs.into_iter().map(|c| (c.k, Mat2::from_pairs(c.m))),
        )?;
        if t.degree() > doc.degree {
            return Err(Error::InvalidArgument(format!(
                "declared degree {} below coefficient degree {}",
                doc.degree,
                t.degree()
            )));
        }
        Ok(t)
    }
}

impl TrigPolyMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite coefficients serialize")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_evaluates_to_itself() {
        let m = Mat2::real(2.0, 0.0, 0.0, 0.5);
        let a = TrigPolyMatrix::constant(1, m, 0.5).unwrap();
        assert_eq!(a.eval(&[0.37]), m);
        let z = [Complex64::new(0.1, 0.4)];
        assert_eq!(a.eval_strip(&z).unwrap(), m);
        assert_eq!(a.degree(), 0);
    }

    #[test]
    fn unit_monomial_evaluation() {
        let a = TrigPolyMatrix::from_terms(1, 1.0, [(vec![1], Mat2::IDENTITY)]).unwrap();
        let v = a.eval(&[0.25]);
        assert!((v.a - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((v.d - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(v.b.norm() == 0.0);

        let y = 0.3;
        let s = a.eval_strip(&[Complex64::new(0.0, y)]).unwrap();
        assert!((s.a.re - (-TAU * y).exp()).abs() < 1e-15);
        assert!(s.a.im.abs() < 1e-15);
    }

    #[test]
    fn strip_precondition() {
        let a = TrigPolyMatrix::from_terms(1, 0.2, [(vec![1], Mat2::IDENTITY)]).unwrap();
        assert!(matches!(
            a.eval_strip(&[Complex64::new(0.0, 0.3)]),
            Err(Error::OutsideStrip { .. })
        ));
        assert!(a.eval_strip(&[Complex64::new(0.0, -0.2)]).is_ok());
    }

    #[test]
    fn cosine_and_product() {
        let c = TrigPoly::cosine(vec![1], 2.0);
        let v = c.eval(&[0.1]);
        assert!((v.re - 2.0 * (TAU * 0.1).cos()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        assert!(c.is_real_valued(0.0));
        let sq = c.mul(&c).unwrap();
        // (2cos)^2 = 2 + 2cos(2 * 2 pi x)
        assert!((sq.coeff(&[0]) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((sq.coeff(&[2]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let s = TrigPoly::sine(vec![1], 1.0);
        assert!((s.eval(&[0.25]).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_and_conj_reflect() {
        let p = TrigPoly::from_terms(
            1,
            [
                (vec![1], Complex64::new(0.3, 0.7)),
                (vec![-2], Complex64::new(1.0, -0.5)),
            ],
        )
        .unwrap();
        let w = 0.123;
        let shifted = p.shift(&[w]).unwrap();
        let x = 0.41;
        assert!((shifted.eval(&[x]) - p.eval(&[x + w])).norm() < 1e-14);
        let cr = p.conj_reflect();
        assert!((cr.eval(&[x]) - p.eval(&[x]).conj()).norm() < 1e-14);
    }

    #[test]
    fn compose_with_automorphism() {
        let b = Automorphism::new(vec![vec![2, 3], vec![1, 2]]).unwrap();
        let a = TrigPolyMatrix::from_terms(
            2,
            0.5,
            [
                (vec![1, 0], Mat2::real(1.0, 2.0, 0.0, 1.0)),
                (vec![0, -1], Mat2::real(0.5, 0.0, 3.0, 1.0)),
            ],
        )
        .unwrap();
        let ab = a.compose(&b).unwrap();
        let x = [0.17, 0.83];
        let bx = b.apply(&x);
        assert!((ab.eval(&x) - a.eval(&bx)).max_abs() < 1e-13);
    }

    #[test]
    fn det_scalar_matches_pointwise() {
        let a = TrigPolyMatrix::from_terms(
            1,
            0.5,
            [
                (vec![0], Mat2::real(1.0, -1.0, 1.0, 0.0)),
                (vec![1], Mat2::real(0.5, 0.2, -0.3, 0.1)),
                (vec![-1], Mat2::real(0.5, 0.0, 0.7, 0.1)),
            ],
        )
        .unwrap();
        let det = a.det_scalar();
        for i in 0..16 {
            let x = [i as f64 / 16.0 + 0.01];
            assert!((det.eval(&x) - a.eval(&x).det()).norm() < 1e-12);
        }
    }

    #[test]
    fn json_layout() {
        let a = TrigPolyMatrix::from_terms(1, 0.25, [(vec![1], Mat2::IDENTITY)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(v["d"], 1);
        assert_eq!(v["degree"], 1);
        assert_eq!(v["rho"], 0.25);
        assert_eq!(v["coeffs"][0]["k"], serde_json::json!([1]));
        assert_eq!(v["coeffs"][0]["m"][0], serde_json::json!([1.0, 0.0]));
    }
}
