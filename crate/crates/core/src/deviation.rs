//! Empirical statistics of `x -> L_N(x)` on uniform grids: Fourier decay,
//! large-deviation and shift-difference measures, sublevel-set fits and
//! uniform `L^2` bounds.
//!
//! Every measure is a grid fraction and resolves only to `1 / M^d`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cocycle::{Cocycle, MatrixFunction, Renormalized, TrigPoly, UNDERFLOW_FLOOR};
use crate::error::{Error, Result};
use crate::format::sci;
use crate::lyapunov::QuadratureSpec;
use crate::sum::NeumaierSum;
use crate::torus::dist_to_z;

/// Which exponent a profile samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `L'_N(x) = (1/N) ln ||A_N(x)||`
    Raw,
    /// `L_N(x)`, the same for `A / |det A|^{1/2}`
    Renormalized,
}

/// Samples of `x -> L_N(x)` on the midpoint grid `((i + 1/2) / M)^d`, with
/// `-inf` marking underflowed or singular nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub d: usize,
    pub m: usize,
    pub offset: f64,
    #[serde(rename = "N")]
    pub n: u64,
    /// Node-major, last coordinate fastest.
    pub values: Vec<f64>,
    /// Mean over finite values.
    pub mean: f64,
    pub sentinels: usize,
}

fn check_power_of_two(m: usize) -> Result<()> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("grid size {m} is not a power of two")));
    }
    Ok(())
}

fn pointwise_exponents<F: MatrixFunction>(
    c: &Cocycle<F>,
    n: u64,
    nodes: &[f64],
    normalization: Normalization,
) -> Result<Vec<f64>> {
    let d = c.dim();
    Ok(match normalization {
        Normalization::Raw => nodes
            .par_chunks(d)
            .map(|x| c.iterate_log_norm(n, x).log_norm_avg)
            .collect(),
        Normalization::Renormalized => {
            let r = Cocycle::new(Renormalized::with_floor(c.matrix(), UNDERFLOW_FLOOR), c.omega().clone())?;
            nodes
                .par_chunks(d)
                .map(|x| r.iterate_log_norm(n, x).log_norm_avg)
                .collect()
        }
    })
}

impl Profile {
    /// Wrap precomputed grid samples.
    pub fn from_values(d: usize, m: usize, offset: f64, n: u64, values: Vec<f64>) -> Result<Self> {
        check_power_of_two(m)?;
        let expected = m
            .checked_pow(d as u32)
            .ok_or(Error::InvalidArgument("grid too large".into()))?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let mean = if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().copied().collect::<NeumaierSum>().value() / finite.len() as f64
        };
        Ok(Self {
            d,
            m,
            offset,
            n,
            sentinels: values.len() - finite.len(),
            values,
            mean,
        })
    }

    pub fn sample<F: MatrixFunction>(c: &Cocycle<F>, n: u64, m: usize, normalization: Normalization) -> Result<Self> {
        check_power_of_two(m)?;
        let nodes = QuadratureSpec::uniform(m).nodes(c.dim())?;
        let values = pointwise_exponents(c, n, &nodes, normalization)?;
        Self::from_values(c.dim(), m, 0.5, n, values)
    }

    pub fn node(&self, index: usize) -> Vec<f64> {
        let mut cell = index;
        let mut x = vec![0.0; self.d];
        for xj in x.iter_mut().rev() {
            *xj = ((cell % self.m) as f64 + self.offset) / self.m as f64;
            cell /= self.m;
        }
        x
    }

    pub fn finite_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| v.is_finite())
    }

    pub fn rms(&self) -> f64 {
        let count = self.values.len() - self.sentinels;
        if count == 0 {
            return f64::NAN;
        }
        (self.finite_values().map(|v| v * v).collect::<NeumaierSum>().value() / count as f64).sqrt()
    }

    /// CSV with columns `x1..xd,value`.
    pub fn to_csv(&self) -> String {
        let mut out: String = (1..=self.d).map(|j| format!("x{j},")).collect();
        out.push_str("value\n");
        for (i, v) in self.values.iter().enumerate() {
            for xj in self.node(i) {
                out.push_str(&sci(xj));
                out.push(',');
            }
            out.push_str(&sci(*v));
            out.push('\n');
        }
        out
    }
}

/// Signed frequency of DFT bin `i` out of `m`; the Nyquist bin maps to `-m/2`.
fn signed_frequency(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierReport {
    pub d: usize,
    pub m: usize,
    pub k0: u64,
    /// Level `T` with values below `-T` (and sentinels) set to `-T`.
    pub clip_level: f64,
    pub clipped: usize,
    /// Coefficients in DFT bin order, last coordinate fastest.
    pub coeffs: Vec<Complex64>,
    /// `max_{0 < |k| < M/2} |k| |c_k|`, reported for `d = 1`.
    pub max_weighted: Option<f64>,
    /// `K0 * sum_{|k| > K0} |c_k|^2`.
    pub tail: f64,
    /// `sum |c_k|^2`.
    pub energy: f64,
    /// Mean square of the clipped profile.
    pub mean_square: f64,
    /// Mean of the clipped profile.
    pub clipped_mean: f64,
}

impl FourierReport {
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        let mut index = 0usize;
        for &kj in k {
            index = index * self.m + kj.rem_euclid(self.m as i64) as usize;
        }
        self.coeffs[index]
    }

    fn frequency(&self, index: usize) -> Vec<i64> {
        let mut cell = index;
        let mut k = vec![0; self.d];
        for kj in k.iter_mut().rev() {
            *kj = signed_frequency(cell % self.m, self.m);
            cell /= self.m;
        }
        k
    }

    /// CSV with columns `k1..kd,re,im,abs`.
    pub fn to_csv(&self) -> String {
        let mut out: String = (1..=self.d).map(|j| format!("k{j},")).collect();
        out.push_str("re,im,abs\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            for kj in self.frequency(i) {
                out.push_str(&kj.to_string());
                out.push(',');
            }
            out.push_str(&format!("{},{},{}\n", sci(c.re), sci(c.im), sci(c.norm())));
        }
        out
    }
}

/// In-place unnormalized forward DFT along every axis of a `m^d` array.
fn dft_nd(data: &mut [Complex64], d: usize, m: usize) {
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        let block = stride * m;
        for start in 0..data.len() / m {
            // enumerate lines along `axis`: outer block index and inner offset
            let (outer, inner) = (start / stride, start % stride);
            let base = outer * block + inner;
            for (t, v) in line.iter_mut().enumerate() {
                *v = data[base + t * stride];
            }
            fft.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                data[base + t * stride] = *v;
            }
        }
    }
}

/// Fourier coefficients `c_k = int L_N(x) e^{-2 pi i k.x} dx` of a profile
/// by DFT, with the grid offset phase removed.
pub fn fourier_coeffs(p: &Profile, k0: u64) -> Result<FourierReport> {
    if (k0 as usize) >= p.m / 2 {
        return Err(Error::InvalidArgument(format!(
            "K0 = {k0} must be below M/2 = {}",
            p.m / 2
        )));
    }
    let rms = p.rms();
    let clip_level = 2.0 * (if rms.is_finite() { rms } else { 0.0 } + 10.0);
    let mut clipped = 0usize;
    let clipped_values: Vec<f64> = p
        .values
        .iter()
        .map(|&v| {
            if v.is_finite() && v >= -clip_level {
                v
            } else {
                clipped += 1;
                -clip_level
            }
        })
        .collect();
    let total = clipped_values.len() as f64;
    let mut data: Vec<Complex64> = clipped_values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_nd(&mut data, p.d, p.m);

    let mut report = FourierReport {
        d: p.d,
        m: p.m,
        k0,
        clip_level,
        clipped,
        coeffs: Vec::new(),
        max_weighted: None,
        tail: 0.0,
        energy: 0.0,
        mean_square: clipped_values.iter().map(|v| v * v).collect::<NeumaierSum>().value() / total,
        clipped_mean: clipped_values.iter().copied().collect::<NeumaierSum>().value() / total,
    };
    for (i, c) in data.iter_mut().enumerate() {
        let k = report.frequency(i);
        let shift: f64 = k.iter().map(|&kj| kj as f64).sum::<f64>() * p.offset / p.m as f64;
        *c *= Complex64::from_polar(1.0 / total, -TAU * shift);
    }
    let mut energy = NeumaierSum::new();
    let mut tail = NeumaierSum::new();
    let mut max_weighted = 0.0f64;
    for (i, c) in data.iter().enumerate() {
        let k = report.frequency(i);
        let size = k.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        energy.add(c.norm_sqr());
        if size > k0 {
            tail.add(c.norm_sqr());
        }
        if p.d == 1 && size > 0 && (size as usize) < p.m / 2 {
            max_weighted = max_weighted.max(size as f64 * c.norm());
        }
    }
    report.energy = energy.value();
    report.tail = tail.value() * k0 as f64;
    report.max_weighted = (p.d == 1).then_some(max_weighted);
    report.coeffs = data;
    Ok(report)
}

/// A grid fraction with the functional form it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub threshold: f64,
    pub measured_fraction: f64,
    pub predicted_bound: Option<f64>,
    pub parameters: BTreeMap<String, f64>,
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

fn params<const K: usize>(entries: [(&str, f64); K]) -> BTreeMap<String, f64> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Fraction of retained nodes with `|L_N(x) - mean| > kappa`.
pub fn ldt_empirical(p: &Profile, kappa: f64) -> MeasureEstimate {
    let total = p.values.len() - p.sentinels;
    let count = p.finite_values().filter(|v| (v - p.mean).abs() > kappa).count();
    MeasureEstimate {
        threshold: kappa,
        measured_fraction: fraction(count, total),
        predicted_bound: None,
        parameters: params([("kappa", kappa), ("N", p.n as f64), ("M", p.m as f64)]),
    }
}

fn shifted_difference<F: MatrixFunction>(
    c: &Cocycle<F>,
    n: u64,
    shift: &[f64],
    m: usize,
    threshold: f64,
) -> Result<(usize, usize)> {
    check_power_of_two(m)?;
    let d = c.dim();
    if shift.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: shift.len(),
        });
    }
    let nodes = QuadratureSpec::uniform(m).nodes(d)?;
    let moved: Vec<f64> = nodes
        .chunks(d)
        .flat_map(|x| x.iter().zip(shift).map(|(a, b)| a + b))
        .collect();
    let base = pointwise_exponents(c, n, &nodes, Normalization::Renormalized)?;
    let other = pointwise_exponents(c, n, &moved, Normalization::Renormalized)?;
    let pairs = base.iter().zip(&other).filter(|(a, b)| a.is_finite() && b.is_finite());
    let (mut count, mut total) = (0, 0);
    for (a, b) in pairs {
        total += 1;
        if (a - b).abs() > threshold {
            count += 1;
        }
    }
    Ok((count, total))
}

/// Fraction of nodes with `|L_N(x) - L_N(x + a)| > kappa`, against
/// `kappa^{-3} |a|` with `|a| = sum_j ||a_j||`. The bound is vacuous once it
/// reaches 1.
pub fn cdt_empirical<F: MatrixFunction>(
    c: &Cocycle<F>,
    n: u64,
    a: &[f64],
    kappa: f64,
    m: usize,
) -> Result<MeasureEstimate> {
    let size: f64 = a.iter().map(|&v| dist_to_z(v)).sum();
    let (count, total) = shifted_difference(c, n, a, m, kappa)?;
    Ok(MeasureEstimate {
        threshold: kappa,
        measured_fraction: fraction(count, total),
        predicted_bound: Some(kappa.powi(-3) * size),
        parameters: params([("kappa", kappa), ("a", size), ("N", n as f64), ("M", m as f64)]),
    })
}

/// Fraction of nodes with `|L_N(x) - L_N(x + w)| > C N^{-a}`, against
/// `exp(-N^{1-a})`.
pub fn shift_drift_empirical<F: MatrixFunction>(
    c: &Cocycle<F>,
    n: u64,
    a_exponent: f64,
    c_const: f64,
    m: usize,
) -> Result<MeasureEstimate> {
    if !(a_exponent > 0.0 && a_exponent < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "drift exponent {a_exponent} outside (0, 1)"
        )));
    }
    let threshold = c_const * (n as f64).powf(-a_exponent);
    let omega = c.omega().components().to_vec();
    let (count, total) = shifted_difference(c, n, &omega, m, threshold)?;
    Ok(MeasureEstimate {
        threshold,
        measured_fraction: fraction(count, total),
        predicted_bound: Some((-(n as f64).powf(1.0 - a_exponent)).exp()),
        parameters: params([("a", a_exponent), ("C", c_const), ("N", n as f64), ("M", m as f64)]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LojasiewiczFit {
    /// `(S, b)` in `|{|g| < t}| ~ S t^b`; `None` when fewer than two
    /// thresholds resolve a nonempty sublevel set.
    pub fit: Option<(f64, f64)>,
    pub estimates: Vec<MeasureEstimate>,
    /// Thresholds used in the fit.
    pub fitted: Vec<f64>,
}

/// Fewest grid nodes a sublevel set needs before its fraction enters the fit.
const MIN_FIT_COUNT: usize = 8;

/// Sublevel fractions `|{x : |g(x)| < t}|` and a log-log least-squares fit
/// over thresholds whose sets hold at least a few nodes and at most half the
/// torus.
pub fn lojasiewicz_fit(g: &TrigPoly, t_grid: &[f64], m: usize) -> Result<LojasiewiczFit> {
    if g.is_zero() {
        return Err(Error::IdenticallyZero);
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("thresholds must be positive".into()));
    }
    let nodes = QuadratureSpec::uniform(m).nodes(g.dim())?;
    let mut magnitudes: Vec<f64> = nodes.par_chunks(g.dim()).map(|x| g.eval(x).norm()).collect();
    magnitudes.sort_by(f64::total_cmp);
    let total = magnitudes.len();
    let mut estimates = Vec::with_capacity(t_grid.len());
    let mut points = Vec::new();
    let mut fitted = Vec::new();
    for &t in t_grid {
        let count = magnitudes.partition_point(|&v| v < t);
        let frac = fraction(count, total);
        estimates.push(MeasureEstimate {
            threshold: t,
            measured_fraction: frac,
            predicted_bound: None,
            parameters: params([("t", t), ("M", m as f64)]),
        });
        if count >= MIN_FIT_COUNT && frac <= 0.5 {
            points.push((t.ln(), frac.ln()));
            fitted.push(t);
        }
    }
    let fit = (points.len() >= 2).then(|| {
        let k = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let b = sxy / sxx;
        ((my - b * mx).exp(), b)
    });
    if let (Some((s, b)), true) = (fit, !estimates.is_empty()) {
        for e in &mut estimates {
            e.predicted_bound = Some(s * e.threshold.powf(b));
        }
    }
    Ok(LojasiewiczFit { fit, estimates, fitted })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Row {
    #[serde(rename = "N")]
    pub n: u64,
    pub rms: f64,
    pub excised_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Report {
    pub rows: Vec<L2Row>,
    /// RMS of `ln |det A|` on the grid, clipped at `ln(clip_floor)`.
    pub log_det_rms: f64,
    /// `max rms / min rms` over the rows.
    pub max_min_ratio: f64,
}

/// RMS of `L_N` on an `M^d` midpoint grid for each `N`, plus the RMS of
/// `ln |det A|`.
pub fn l2_uniform_check<F: MatrixFunction>(c: &Cocycle<F>, n_list: &[u64], m: usize) -> Result<L2Report> {
    let rows = n_list
        .iter()
        .map(|&n| {
            let p = Profile::sample(c, n, m, Normalization::Renormalized)?;
            Ok(L2Row {
                n,
                rms: p.rms(),
                excised_mass: fraction(p.sentinels, p.values.len()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let quad = QuadratureSpec::uniform(m);
    let floor_log = quad.clip_floor.ln();
    let sq = quad.integrate(c.dim(), |x| {
        let v = c.matrix().try_eval(x).map(|a| a.det().norm().ln()).unwrap_or(floor_log);
        Some(v.max(floor_log).powi(2))
    })?;
    let max = rows.iter().map(|r| r.rms).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.rms).fold(f64::INFINITY, f64::min);
    Ok(L2Report {
        log_det_rms: sq.mean.sqrt(),
        max_min_ratio: max / min,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{almost_mathieu, discontinuity_example, Mat2, TrigPolyMatrix};
    use crate::torus::Frequency;

    fn constant_cocycle() -> Cocycle {
        let a = TrigPolyMatrix::constant(1, Mat2::real(2.0, 0.0, 0.0, 0.5), 0.5).unwrap();
        Cocycle::new(a, Frequency::golden()).unwrap()
    }

    #[test]
    fn constant_profile() {
        let p = Profile::sample(&constant_cocycle(), 7, 64, Normalization::Raw).unwrap();
        assert!(p.values.iter().all(|v| (v - 2f64.ln()).abs() < 1e-14));
        let f = fourier_coeffs(&p, 4).unwrap();
        assert!((f.coeff(&[0]).re - p.mean).abs() < 1e-14);
        for k in 1..32 {
            assert!(f.coeff(&[k]).norm() < 1e-14);
        }
        assert_eq!(ldt_empirical(&p, 1e-6).measured_fraction, 0.0);
        assert!(Profile::sample(&constant_cocycle(), 7, 48, Normalization::Raw).is_err());
    }

    #[test]
    fn discontinuity_profile_closed_form() {
        let c = Cocycle::new(
            discontinuity_example(vec![1]).unwrap(),
            Frequency::new(vec![0.0]).unwrap(),
        )
        .unwrap();
        let p = Profile::sample(&c, 3, 128, Normalization::Raw).unwrap();
        let e = (-TAU).exp();
        for (i, v) in p.values.iter().enumerate() {
            let x = p.node(i)[0];
            assert!((v - e * (TAU * x).cos().abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn pure_tone_coefficients() {
        for m in [16, 64] {
            let values: Vec<f64> = (0..m).map(|i| (TAU * (i as f64 + 0.5) / m as f64).cos()).collect();
            let p = Profile::from_values(1, m, 0.5, 1, values).unwrap();
            let f = fourier_coeffs(&p, 2).unwrap();
            assert!((f.coeff(&[1]) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
            assert!((f.coeff(&[-1]) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
            for k in 2..(m as i64 / 2) {
                assert!(f.coeff(&[k]).norm() < 1e-12);
            }
            assert!((f.energy - f.mean_square).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_dft_matches_direct_sum() {
        let m = 8;
        let values: Vec<f64> = (0..m * m).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let p = Profile::from_values(2, m, 0.5, 1, values.clone()).unwrap();
        let f = fourier_coeffs(&p, 1).unwrap();
        for k in [[0i64, 0], [1, 0], [0, 1], [2, -3], [-1, 3]] {
            let direct: Complex64 = values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let x = p.node(i);
                    Complex64::from_polar(*v, -TAU * (k[0] as f64 * x[0] + k[1] as f64 * x[1]))
                })
                .sum::<Complex64>()
                / (m * m) as f64;
            assert!((f.coeff(&k) - direct).norm() < 1e-12, "{k:?}");
        }
        assert!((f.energy - f.mean_square).abs() < 1e-10);
    }

    #[test]
    fn sentinels_are_clipped() {
        let mut values = vec![1.0; 16];
        values[3] = f64::NEG_INFINITY;
        let p = Profile::from_values(1, 16, 0.5, 1, values).unwrap();
        assert_eq!(p.sentinels, 1);
        assert_eq!(p.mean, 1.0);
        let f = fourier_coeffs(&p, 2).unwrap();
        assert_eq!(f.clipped, 1);
        assert_eq!(f.clip_level, 22.0);
        assert!((f.coeff(&[0]).re - f.clipped_mean).abs() < 1e-14);
    }

    #[test]
    fn ldt_fraction_monotone() {
        let c = Cocycle::new(almost_mathieu(3.0, 0.0, 0.5).unwrap(), Frequency::golden()).unwrap();
        let p = Profile::sample(&c, 50, 256, Normalization::Renormalized).unwrap();
        assert!(ldt_empirical(&p, 0.0).measured_fraction > 0.99);
        let fr: Vec<f64> = [0.01, 0.05, 0.1, 0.2]
            .iter()
            .map(|&k| ldt_empirical(&p, k).measured_fraction)
            .collect();
        assert!(fr.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn cdt_trivial_cases() {
        let c = Cocycle::new(almost_mathieu(3.0, 0.0, 0.5).unwrap(), Frequency::golden()).unwrap();
        assert_eq!(cdt_empirical(&c, 20, &[0.0], 0.05, 64).unwrap().measured_fraction, 0.0);
        let k = cdt_empirical(&constant_cocycle(), 20, &[0.01], 0.05, 64).unwrap();
        assert_eq!(k.measured_fraction, 0.0);
        assert!((k.predicted_bound.unwrap() - 0.01 / 0.05f64.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn drift_constant_is_zero() {
        let r = shift_drift_empirical(&constant_cocycle(), 40, 0.5, 10.0, 64).unwrap();
        assert_eq!(r.measured_fraction, 0.0);
        assert!((r.threshold - 10.0 / 40f64.sqrt()).abs() < 1e-15);
        assert!(shift_drift_empirical(&constant_cocycle(), 40, 1.0, 10.0, 64).is_err());
    }

    #[test]
    fn lojasiewicz_sine_and_square() {
        let ts: Vec<f64> = (0..8).map(|i| 0.1 * 0.5f64.powi(i)).collect();
        let sine = TrigPoly::sine(vec![1], 1.0);
        let r = lojasiewicz_fit(&sine, &ts, 1 << 16).unwrap();
        let (s, b) = r.fit.unwrap();
        assert!((b - 1.0).abs() < 0.05, "{b}");
        assert!((s - 2.0 / std::f64::consts::PI).abs() < 0.05, "{s}");
        assert!(r
            .estimates
            .windows(2)
            .all(|w| w[0].measured_fraction >= w[1].measured_fraction));

        let sq = sine.mul(&sine).unwrap();
        let ts2: Vec<f64> = (0..8).map(|i| 0.01 * 0.25f64.powi(i)).collect();
        let (_, b2) = lojasiewicz_fit(&sq, &ts2, 1 << 16).unwrap().fit.unwrap();
        assert!((b2 - 0.5).abs() < 0.05, "{b2}");

        let one = TrigPoly::constant(1, Complex64::new(1.0, 0.0));
        let r = lojasiewicz_fit(&one, &[0.5, 0.1], 64).unwrap();
        assert!(r.estimates.iter().all(|e| e.measured_fraction == 0.0));
        assert_eq!(r.fit, None);
        assert_eq!(
            lojasiewicz_fit(&TrigPoly::zero(1), &[0.1], 64).unwrap_err(),
            Error::IdenticallyZero
        );
    }

    #[test]
    fn l2_constant_column() {
        let r = l2_uniform_check(&constant_cocycle(), &[1, 10, 100], 32).unwrap();
        assert!(r.rows.iter().all(|row| (row.rms - 2f64.ln()).abs() < 1e-13));
        assert!((r.max_min_ratio - 1.0).abs() < 1e-12);
        assert!(r.log_det_rms.abs() < 1e-15);
    }

    #[test]
    fn profile_csv_layout() {
        let p = Profile::sample(&constant_cocycle(), 2, 4, Normalization::Raw).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("x1,value\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
