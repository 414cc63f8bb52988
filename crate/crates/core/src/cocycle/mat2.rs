use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A 2x2 complex matrix stored row-major as `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    );

    pub const IDENTITY: Mat2 = Mat2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    );

    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn diag(p: Complex64, q: Complex64) -> Self {
        Self::new(p, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), q)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::real(c, -s, s, c)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    /// Operator 2-norm (largest singular value).
    ///
    /// With `F` the Frobenius norm, `s1 + s2 = sqrt(F^2 + 2|det|)` and
    /// `s1 - s2 = sqrt(F^2 - 2|det|)`. After a unit phase makes `det` real
    /// and positive, both radicands are sums of squares,
    /// `|a + conj(d)|^2 + |b - conj(c)|^2` and `|a - conj(d)|^2 + |b + conj(c)|^2`,
    /// so neither root suffers cancellation.
    pub fn norm(&self) -> f64 {
        if self.b == Complex64::ZERO && self.c == Complex64::ZERO {
            return self.a.norm().max(self.d.norm());
        }
        if self.a == Complex64::ZERO && self.d == Complex64::ZERO {
            return self.b.norm().max(self.c.norm());
        }
        // rescale so the squares neither overflow nor underflow
        let m = self.max_abs();
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        let s = Self::new(self.a / m, self.b / m, self.c / m, self.d / m);
        let det = s.det();
        let s = if det.norm() > 0.0 {
            s.scale(Complex64::from_polar(1.0, -0.5 * det.arg()))
        } else {
            s
        };
        let plus = ((s.a + s.d.conj()).norm_sqr() + (s.b - s.c.conj()).norm_sqr()).sqrt();
        let minus = ((s.a - s.d.conj()).norm_sqr() + (s.b + s.c.conj()).norm_sqr()).sqrt();
        m * 0.5 * (plus + minus)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let inv = det.inv();
        Some(Self::new(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv))
    }

    pub fn conj_transpose(&self) -> Self {
        Self::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Entries as `[[re, im]; 4]` in row-major order.
    pub fn to_pairs(&self) -> [[f64; 2]; 4] {
        [
            [self.a.re, self.a.im],
            [self.b.re, self.b.im],
            [self.c.re, self.c.im],
            [self.d.re, self.d.im],
        ]
    }

    pub fn from_pairs(p: [[f64; 2]; 4]) -> Self {
        Self::new(
            Complex64::new(p[0][0], p[0][1]),
            Complex64::new(p[1][0], p[1][1]),
            Complex64::new(p[2][0], p[2][1]),
            Complex64::new(p[3][0], p[3][1]),
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Largest singular value by power iteration on `M^* M`.
    fn norm_oracle(m: &Mat2) -> f64 {
        let h = m.conj_transpose() * *m;
        let mut v = [Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.2)];
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w = [h.a * v[0] + h.b * v[1], h.c * v[0] + h.d * v[1]];
            let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
            if n == 0.0 {
                return 0.0;
            }
            lambda = n;
            v = [w[0] / n, w[1] / n];
        }
        lambda.sqrt()
    }

    #[test]
    fn norm_of_diagonal() {
        let m = Mat2::real(2.0, 0.0, 0.0, 0.5);
        assert_eq!(m.norm(), 2.0);
        assert_eq!(Mat2::ZERO.norm(), 0.0);
        assert!((Mat2::rotation(0.7).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_matches_power_iteration() {
        let samples = [
            Mat2::real(3.0, -1.0, 1.0, 0.0),
            Mat2::real(1.0, 2.0, 3.0, 4.0),
            Mat2::new(
                Complex64::new(0.3, -1.2),
                Complex64::new(2.0, 0.5),
                Complex64::new(-0.1, 0.0),
                Complex64::new(0.0, 4.0),
            ),
            Mat2::real(1.0, 1.0, 1.0, 1.0),
        ];
        for m in samples {
            let oracle = norm_oracle(&m);
            assert!((m.norm() - oracle).abs() < 1e-12 * oracle.max(1.0), "{m:?}");
        }
    }

    #[test]
    fn norm_survives_extreme_scales() {
        let big = Mat2::real(1e200, 0.0, 0.0, 1e-200);
        assert_eq!(big.norm(), 1e200);
        let small = Mat2::real(1e-300, 0.0, 0.0, 0.0);
        assert_eq!(small.norm(), 1e-300);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Mat2::real(2.0, 3.0, 1.0, 2.0);
        let p = m * m.inverse().unwrap();
        assert!((p - Mat2::IDENTITY).max_abs() < 1e-15);
        assert!(Mat2::real(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }
}
