//! Frequency arithmetic on the torus `T^d = R^d / Z^d`.
//!
//! Lattice vectors `k` are measured in the max-norm `|k| = max_j |k_j|`
//! everywhere in this module. Scans only visit one representative of each
//! pair `{k, -k}` (the one whose first nonzero entry is positive), since
//! `||k.w|| = ||-k.w||`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest lattice box `K^d` a brute-force scan will visit.
pub const SCAN_LIMIT: f64 = 1e9;

/// Distance from `t` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_z(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Reduce a real number into `[0, 1)`.
pub fn reduce_mod1(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of `T^d` with every component stored in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Frequency {
    components: Vec<f64>,
}

impl Frequency {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("frequency dimension must be >= 1".into()));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite frequency component {bad}")));
        }
        Ok(Self {
            components: components.into_iter().map(reduce_mod1).collect(),
        })
    }

    /// The golden-mean rotation number `(sqrt(5) - 1) / 2` in one dimension.
    pub fn golden() -> Self {
        Self::new(vec![golden_mean()]).expect("finite")
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// The sub-frequency on index range `range`, used for the `(w1, w2)`
    /// splits of mixed Liouville/Diophantine frequencies.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Option<Frequency> {
        if range.is_empty() || range.end > self.dim() {
            return None;
        }
        Some(Frequency {
            components: self.components[range].to_vec(),
        })
    }

    /// `k . w` evaluated left to right in floating point.
    pub fn dot(&self, k: &[i64]) -> f64 {
        k.iter().zip(&self.components).map(|(&kj, &wj)| kj as f64 * wj).sum()
    }
}

impl TryFrom<Vec<f64>> for Frequency {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Frequency::new(v)
    }
}

impl From<Frequency> for Vec<f64> {
    fn from(f: Frequency) -> Self {
        f.components
    }
}

pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// `||q w|| = sum_j ||q w_j||`.
pub fn freq_norm(omega: &Frequency, q: u64) -> f64 {
    omega.components.iter().map(|&w| dist_to_z(q as f64 * w)).sum()
}

/// `sum_j ||w_j - w'_j||`, the torus distance used for frequency perturbations.
pub fn torus_distance(a: &Frequency, b: &Frequency) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| dist_to_z(x - y))
        .sum())
}

pub fn max_norm(k: &[i64]) -> u64 {
    k.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    #[serde(rename = "K")]
    pub k_max: u64,
    pub delta: f64,
    pub argmin_k: Vec<i64>,
}

fn check_scan(k_max: u64, d: usize) -> Result<()> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("scan cutoff K must be >= 1".into()));
    }
    let points = (k_max as f64).powi(d as i32);
    if points > SCAN_LIMIT {
        return Err(Error::ScanTooLarge {
            points,
            limit: SCAN_LIMIT,
        });
    }
    Ok(())
}

/// Visit every `k` in the half box `0 < |k| <= k_max` with positive leading
/// entry whose first coordinate equals `first`.
fn for_each_in_slab(first: i64, d: usize, k_max: i64, mut f: impl FnMut(&[i64])) {
    let mut k = vec![0i64; d];
    k[0] = first;
    if d == 1 {
        if first > 0 {
            f(&k);
        }
        return;
    }
    // odometer over the trailing coordinates
    for slot in k.iter_mut().skip(1) {
        *slot = -k_max;
    }
    loop {
        let leading_ok = if first > 0 {
            true
        } else {
            k[1..].iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
        };
        if leading_ok {
            f(&k);
        }
        let mut i = d - 1;
        loop {
            if k[i] < k_max {
                k[i] += 1;
                break;
            }
            k[i] = -k_max;
            if i == 1 {
                return;
            }
            i -= 1;
        }
    }
}

/// Order used to break ties: smaller max-norm first, then lexicographic.
fn shell_lex_cmp(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    max_norm(a).cmp(&max_norm(b)).then_with(|| a.cmp(b))
}

/// Exact brute-force `min_{0 < |k| <= K} ||k . w||`.
pub fn min_dot_norm(omega: &Frequency, k_max: u64) -> Result<DiophantineReport> {
    let d = omega.dim();
    check_scan(k_max, d)?;
    let km = k_max as i64;
    let best = (0..=km)
        .into_par_iter()
        .filter_map(|first| {
            let mut best: Option<(f64, Vec<i64>)> = None;
            for_each_in_slab(first, d, km, |k| {
                let dist = dist_to_z(omega.dot(k));
                let better = match &best {
                    None => true,
                    Some((bd, bk)) => match dist.total_cmp(bd) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Equal => shell_lex_cmp(k, bk).is_lt(),
                        std::cmp::Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((dist, k.to_vec()));
                }
            });
            best
        })
        .reduce_with(|a, b| match a.0.total_cmp(&b.0) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => {
                if shell_lex_cmp(&a.1, &b.1).is_le() {
                    a
                } else {
                    b
                }
            }
        })
        .expect("non-empty scan");
    Ok(DiophantineReport {
        k_max,
        delta: best.0,
        argmin_k: best.1,
    })
}

/// First `k` (smallest max-norm, then lexicographic) with `||k . w|| <= tol`.
///
/// With `tol = 0` this detects resonances that are exact in floating point.
pub fn rational_dependence(omega: &Frequency, k_max: u64, tol: f64) -> Result<Option<Vec<i64>>> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument("tolerance must be >= 0".into()));
    }
    let d = omega.dim();
    check_scan(k_max, d)?;
    let km = k_max as i64;
    let found = (0..=km)
        .into_par_iter()
        .filter_map(|first| {
            let mut best: Option<Vec<i64>> = None;
            for_each_in_slab(first, d, km, |k| {
                if dist_to_z(omega.dot(k)) <= tol && best.as_ref().is_none_or(|b| shell_lex_cmp(k, b).is_lt()) {
                    best = Some(k.to_vec());
                }
            });
            best
        })
        .reduce_with(|a, b| if shell_lex_cmp(&a, &b).is_le() { a } else { b });
    Ok(found)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_all(k: &[i64]) -> i64 {
    k.iter().fold(0, |g, &v| gcd(g, v))
}

/// Returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    (r0 as i64, s0 as i64, t0 as i64)
}

/// An element of `SL(d, Z)` together with its exact integer inverse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorphism {
    entries: Vec<Vec<i64>>,
    inverse: Vec<Vec<i64>>,
}

fn determinant(m: &[Vec<i64>]) -> i128 {
    // Bareiss fraction-free elimination, exact in i128 for the sizes used here.
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn minor(m: &[Vec<i64>], row: usize, col: usize) -> Vec<Vec<i64>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

impl Automorphism {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let d = entries.len();
        if d == 0 || entries.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("automorphism must be a square matrix".into()));
        }
        let det = determinant(&entries);
        if det != 1 {
            return Err(Error::NotUnimodular(det));
        }
        // det = 1, so the inverse is the adjugate
        let mut inverse = vec![vec![0i64; d]; d];
        if d == 1 {
            inverse[0][0] = 1;
        } else {
            for (i, row) in inverse.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    let c = determinant(&minor(&entries, j, i));
                    let c = if (i + j) % 2 == 0 { c } else { -c };
                    *slot =
                        i64::try_from(c).map_err(|_| Error::InvalidArgument("inverse entry overflows i64".into()))?;
                }
            }
        }
        Ok(Self { entries, inverse })
    }

    pub fn identity(d: usize) -> Self {
        let e: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
        Self {
            entries: e.clone(),
            inverse: e,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn inverse(&self) -> &[Vec<i64>] {
        &self.inverse
    }

    pub fn determinant(&self) -> i128 {
        determinant(&self.entries)
    }

    pub fn max_entry(&self) -> u64 {
        self.entries.iter().map(|r| max_norm(r)).max().unwrap_or(0)
    }

    /// `B x mod 1`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.entries, x)
    }

    /// `B^{-1} x mod 1`.
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.inverse, x)
    }

    /// `B^T k`: the lattice vector `k'` with `k . (B x) = k' . x`.
    pub fn transpose_apply(&self, k: &[i64]) -> Vec<i64> {
        let d = self.dim();
        (0..d)
            .map(|j| (0..d).map(|i| self.entries[i][j] * k[i]).sum())
            .collect()
    }

    /// `B^{-1} w` as a frequency.
    pub fn pull_back(&self, omega: &Frequency) -> Result<Frequency> {
        if omega.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: omega.dim(),
            });
        }
        Frequency::new(self.apply_inverse(omega.components()))
    }

    /// Block-diagonal embedding `diag(I_offset, self)` in dimension `offset + dim`.
    pub fn embed(&self, offset: usize) -> Automorphism {
        let d = offset + self.dim();
        let lift = |m: &[Vec<i64>]| -> Vec<Vec<i64>> {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| match (i < offset, j < offset) {
                            (true, true) => i64::from(i == j),
                            (false, false) => m[i - offset][j - offset],
                            _ => 0,
                        })
                        .collect()
                })
                .collect()
        };
        Automorphism {
            entries: lift(&self.entries),
            inverse: lift(&self.inverse),
        }
    }
}

fn mat_vec(m: &[Vec<i64>], x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| {
            let s: f64 = row.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
            reduce_mod1(s)
        })
        .collect()
}

/// Complete a primitive row `k` (entries of `gcd 1`) to a matrix in
/// `SL(d, Z)` whose first row is `k`.
fn complete_row(k: &[i64]) -> Option<Vec<Vec<i64>>> {
    let d = k.len();
    if d == 1 {
        return (k[0] == 1).then(|| vec![vec![1]]);
    }
    let k1 = k[0];
    let rest = &k[1..];
    let (g, m, sub) = if d == 2 {
        // keep the 1x1 block equal to [1] so it stays in SL(1, Z)
        (rest[0], vec![1i64], vec![vec![1i64]])
    } else {
        let g = gcd_all(rest);
        if g == 0 {
            // k = (+-1, 0, ..., 0)
            let mut b: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
            b[0][0] = k1;
            b[1][1] = k1;
            return Some(b);
        }
        let m: Vec<i64> = rest.iter().map(|v| v / g).collect();
        let sub = complete_row(&m)?;
        (g, m, sub)
    };
    if g == 0 {
        // d == 2 and k = (+-1, 0)
        return Some(vec![vec![k1, 0], vec![0, k1]]);
    }
    // Solve k1 v - g u = 1 with v reduced into [0, |g|).
    let (h, x, y) = ext_gcd(k1, g);
    if h != 1 {
        return None;
    }
    // k1 x + g y = 1  =>  v = x, u = -y; shift along (g, k1) to reduce v.
    let ga = g.abs();
    let t = (x as i128).div_euclid(ga as i128) * if g > 0 { 1 } else { -1 };
    let v = (x as i128 - t * g as i128) as i64;
    let u = (-(y as i128) - t * k1 as i128) as i64;
    debug_assert_eq!(k1 as i128 * v as i128 - g as i128 * u as i128, 1);

    let mut b = vec![vec![0i64; d]; d];
    b[0][0] = k1;
    b[1][0] = u;
    for j in 1..d {
        b[0][j] = g * m[j - 1];
        b[1][j] = v * m[j - 1];
    }
    for i in 2..d {
        b[i][1..].copy_from_slice(&sub[i - 1]);
    }
    Some(b)
}

fn exhaustive_completion(k: &[i64], bound: i64) -> Option<Vec<Vec<i64>>> {
    let d = k.len();
    let free = (d - 1) * d;
    let mut digits = vec![-bound; free];
    loop {
        let mut b = vec![k.to_vec()];
        for r in 0..d - 1 {
            b.push(digits[r * d..(r + 1) * d].to_vec());
        }
        if determinant(&b) == 1 {
            return Some(b);
        }
        let mut i = free;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if digits[i] < bound {
                digits[i] += 1;
                break;
            }
            digits[i] = -bound;
        }
    }
}

/// A matrix in `SL(d, Z)` with first row `k` and every entry bounded by
/// `max_l |k_l|`.
pub fn build_automorphism(k: &[i64]) -> Result<Automorphism> {
    if k.is_empty() {
        return Err(Error::InvalidArgument("empty lattice vector".into()));
    }
    if gcd_all(k) != 1 {
        return Err(Error::NotCoprime(k.to_vec()));
    }
    let bound = max_norm(k) as i64;
    let within = |b: &Vec<Vec<i64>>| b.iter().all(|r| max_norm(r) as i64 <= bound);
    let candidate = complete_row(k).filter(within).or_else(|| {
        // (2b+1)^{d(d-1)} candidates; only attempted for small boxes
        let d = k.len();
        let count = ((2 * bound + 1) as f64).powi((d * (d - 1)) as i32);
        (d <= 3 && count <= 5e7)
            .then(|| exhaustive_completion(k, bound))
            .flatten()
    });
    match candidate {
        Some(b) => Automorphism::new(b),
        None => Err(Error::InvalidArgument(format!(
            "no SL(d,Z) completion of {k:?} within entry bound {bound}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_to_z_examples() {
        assert_eq!(dist_to_z(0.75), 0.25);
        assert_eq!(dist_to_z(0.0), 0.0);
        assert!((dist_to_z(8.0 * 0.6180339887) - 0.0557281).abs() < 1e-7);
        assert_eq!(dist_to_z(-0.25), 0.25);
    }

    #[test]
    fn frequency_reduces_mod_one() {
        let f = Frequency::new(vec![1.25, -0.25, 3.0]).unwrap();
        assert_eq!(f.components(), &[0.25, 0.75, 0.0]);
        assert!(Frequency::new(vec![]).is_err());
        assert!(Frequency::new(vec![f64::NAN]).is_err());
        // tiny negative values round to 1.0 - ulp or wrap to 0
        let tiny = Frequency::new(vec![-1e-300]).unwrap();
        assert!(tiny.components()[0] < 1.0);
    }

    #[test]
    fn freq_norm_examples() {
        let w = Frequency::new(vec![1.0 / 3.0, 0.5]).unwrap();
        assert!(freq_norm(&w, 6) < 1e-15);
        let g = Frequency::new(vec![0.6180339887]).unwrap();
        assert!((freq_norm(&g, 8) - 0.0557281).abs() < 1e-7);
        let q = Frequency::new(vec![0.25, 0.25]).unwrap();
        assert_eq!(freq_norm(&q, 1), 0.5);
    }

    #[test]
    fn min_dot_norm_examples() {
        let half = Frequency::new(vec![0.5]).unwrap();
        let r = min_dot_norm(&half, 2).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.argmin_k, vec![2]);

        let g = Frequency::new(vec![0.6180339887]).unwrap();
        let r = min_dot_norm(&g, 10).unwrap();
        // oracle: direct loop over k = 1..=10
        let (kbest, dbest) = (1..=10i64)
            .map(|k| (k, dist_to_z(k as f64 * 0.6180339887)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(r.argmin_k, vec![kbest]);
        assert_eq!(kbest, 8);
        assert_eq!(r.delta, dbest);
        assert!((r.delta - 0.0557).abs() < 1e-4);
    }

    #[test]
    fn min_dot_norm_two_dims_matches_full_box_oracle() {
        let w = Frequency::new(vec![2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]).unwrap();
        let r = min_dot_norm(&w, 5).unwrap();
        // oracle: the full 11 x 11 box minus the origin, both signs
        let mut best = f64::INFINITY;
        for a in -5i64..=5 {
            for b in -5i64..=5 {
                if a == 0 && b == 0 {
                    continue;
                }
                best = best.min(dist_to_z(a as f64 * w.components()[0] + b as f64 * w.components()[1]));
            }
        }
        assert!((r.delta - best).abs() < 1e-15);
        assert!((dist_to_z(w.dot(&r.argmin_k)) - r.delta).abs() < 1e-15);
        assert!(max_norm(&r.argmin_k) <= 5);
    }

    #[test]
    fn scan_guard_trips() {
        let w = Frequency::new(vec![0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(min_dot_norm(&w, 2000), Err(Error::ScanTooLarge { .. })));
        assert!(matches!(
            rational_dependence(&w, 2000, 0.0),
            Err(Error::ScanTooLarge { .. })
        ));
    }

    #[test]
    fn rational_dependence_examples() {
        let w = Frequency::new(vec![0.5, 1.0 / 3.0]).unwrap();
        assert_eq!(rational_dependence(&w, 3, 0.0).unwrap(), Some(vec![2, 0]));
        let g = Frequency::new(vec![0.6180339887]).unwrap();
        assert_eq!(rational_dependence(&g, 10, 1e-12).unwrap(), None);
        let a = 0.6180339887;
        let pair = Frequency::new(vec![a, 1.0 - a]).unwrap();
        assert_eq!(rational_dependence(&pair, 2, 1e-12).unwrap(), Some(vec![1, 1]));
    }

    #[test]
    fn automorphism_examples() {
        let b = build_automorphism(&[1, 0]).unwrap();
        assert_eq!(b.entries(), &[vec![1, 0], vec![0, 1]]);

        let b = build_automorphism(&[2, 3]).unwrap();
        assert_eq!(b.entries()[0], vec![2, 3]);
        assert_eq!(b.determinant(), 1);
        assert!(b.max_entry() <= 3);
        // oracle: exhaustive search over second rows in [-3, 3]^2
        let witnesses: Vec<(i64, i64)> = (-3..=3)
            .flat_map(|c| (-3..=3).map(move |d| (c, d)))
            .filter(|&(c, d)| 2 * d - 3 * c == 1)
            .collect();
        assert!(witnesses.contains(&(b.entries()[1][0], b.entries()[1][1])));
        assert!(witnesses.contains(&(1, 2)));

        let b = build_automorphism(&[1, 1, 1]).unwrap();
        assert_eq!(b.entries()[0], vec![1, 1, 1]);
        assert_eq!(b.determinant(), 1);
        assert!(b.max_entry() <= 1);
    }

    #[test]
    fn automorphism_errors() {
        assert!(matches!(build_automorphism(&[2, 4]), Err(Error::NotCoprime(_))));
        assert!(matches!(
            Automorphism::new(vec![vec![0, 1], vec![1, 0]]),
            Err(Error::NotUnimodular(-1))
        ));
        assert!(build_automorphism(&[-1]).is_err());
    }

    #[test]
    fn automorphism_inverse_is_exact() {
        for k in [
            vec![5, 7],
            vec![-3, 4],
            vec![2, 3, 5],
            vec![6, 10, 15],
            vec![1, -2, 3, 7],
        ] {
            let b = build_automorphism(&k).unwrap();
            let d = k.len();
            for i in 0..d {
                for j in 0..d {
                    let s: i64 = (0..d).map(|l| b.inverse()[i][l] * b.entries()[l][j]).sum();
                    assert_eq!(s, i64::from(i == j));
                }
            }
            assert_eq!(b.entries()[0], k);
            assert!(b.max_entry() <= max_norm(&k), "{k:?} -> {:?}", b.entries());
        }
    }

    #[test]
    fn transpose_apply_matches_dot() {
        let b = Automorphism::new(vec![vec![2, 3], vec![1, 2]]).unwrap();
        let x = [0.123, 0.456];
        let k = [3, -2];
        let bx = b.apply(&x);
        let lhs: f64 = k.iter().zip(&bx).map(|(&a, &v)| a as f64 * v).sum();
        let kt = b.transpose_apply(&k);
        let rhs: f64 = kt.iter().zip(&x).map(|(&a, &v)| a as f64 * v).sum();
        assert!(dist_to_z(lhs - rhs) < 1e-12);
    }

    #[test]
    fn embed_keeps_leading_block_fixed() {
        let b = build_automorphism(&[2, 3]).unwrap().embed(1);
        assert_eq!(b.dim(), 3);
        assert_eq!(b.determinant(), 1);
        assert_eq!(b.entries()[0], vec![1, 0, 0]);
        assert_eq!(b.entries()[1], vec![0, 2, 3]);
    }
}
