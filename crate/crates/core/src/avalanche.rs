//! Avalanche Principle checks for chains of `SL(2,C)` matrices and for
//! blocks of a cocycle orbit.
//!
//! The residual compares `ln ||A_n ... A_1||` with the telescoped pairwise
//! sum `sum ln ||A_{j+1} A_j|| - sum ln ||A_j||`. Two middle-sum conventions
//! are exposed: over interior indices `j = 2..n-1` (for which an aligned
//! diagonal chain telescopes to exactly zero) and over all `j = 1..n` (which
//! leaves the boundary terms `ln ||A_1|| + ln ||A_n||` in the residual).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::{Cocycle, Mat2, MatrixFunction, Renormalized, UNDERFLOW_FLOOR};
use crate::error::{Error, Result};
use crate::format::sci;
use crate::sum::NeumaierSum;

const UNIMODULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiddleSum {
    /// `j = 2..n-1`
    Interior,
    /// `j = 1..n`
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct APReport {
    pub n: usize,
    pub mu: f64,
    /// `mu > n` for the interior form; `||A_j|| < mu^C` for the all-index form.
    pub hypothesis_min_norm_ok: bool,
    /// `max_gap <= ln(mu) / 2`.
    pub hypothesis_gap_ok: bool,
    pub max_gap: f64,
    pub residual: f64,
    pub bound: f64,
    pub middle_sum: MiddleSum,
    /// `C` in the bound: an absolute constant for the interior form, the
    /// norm-window exponent for the all-index form.
    pub constant: f64,
}

impl APReport {
    pub fn hypotheses_ok(&self) -> bool {
        self.hypothesis_min_norm_ok && self.hypothesis_gap_ok
    }

    pub const CSV_HEADER: &'static str = "n,mu,max_gap,residual,bound";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n,
            sci(self.mu),
            sci(self.max_gap),
            sci(self.residual),
            sci(self.bound)
        )
    }
}

struct ChainLogs {
    /// `ln ||A_j||`
    norms: Vec<f64>,
    /// `s_j = ln ||A_j P_{j-1}||` with `P_{j-1}` the unit-normalized product
    /// `A_{j-1} ... A_1`, so `sum s_j = ln ||A_n ... A_1||`
    steps: Vec<f64>,
    /// `r_j = ln ||A_{j+1} A_j / ||A_j|| ||`, so
    /// `ln ||A_{j+1} A_j|| = ln ||A_j|| + r_j`
    ratios: Vec<f64>,
    max_gap: f64,
}

fn unit(m: Mat2, norm: f64) -> Mat2 {
    // division keeps an entry equal to the norm at exactly 1
    Mat2::new(m.a / norm, m.b / norm, m.c / norm, m.d / norm)
}

fn chain_logs(chain: &[Mat2]) -> Result<ChainLogs> {
    if chain.len() < 3 {
        return Err(Error::ChainTooShort(chain.len()));
    }
    let mut norms = Vec::with_capacity(chain.len());
    for (index, m) in chain.iter().enumerate() {
        let norm = m.norm();
        // det of a matrix with entries of size s carries rounding error ~ eps s^2
        let deviation = (m.det() - 1.0).norm();
        if !(deviation <= UNIMODULAR_TOL * norm.powi(2).max(1.0)) {
            return Err(Error::NotUnimodularChain { index, deviation });
        }
        norms.push(norm);
    }
    let ratios: Vec<f64> = chain
        .windows(2)
        .zip(&norms)
        .map(|(w, &norm)| (w[1] * unit(w[0], norm)).norm().ln())
        .collect();
    let mut steps = Vec::with_capacity(chain.len());
    let mut p = Mat2::IDENTITY;
    for m in chain {
        let q = *m * p;
        let norm = q.norm();
        if !(norm >= UNDERFLOW_FLOOR) {
            steps.push(f64::NEG_INFINITY);
            break;
        }
        p = unit(q, norm);
        steps.push(norm.ln());
    }
    let norms: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let max_gap = ratios
        .iter()
        .zip(&norms[1..])
        .map(|(r, next)| (next - r).abs())
        .fold(0.0, f64::max);
    Ok(ChainLogs {
        norms,
        steps,
        ratios,
        max_gap,
    })
}

/// The interior-sum residual before the absolute value, regrouped as
/// `sum_{j<n} (s_{j+1} - r_j)`; for aligned chains each term is exactly 0.
fn signed_residual(logs: &ChainLogs) -> f64 {
    logs.steps[1..]
        .iter()
        .zip(&logs.ratios)
        .map(|(s, r)| s - r)
        .collect::<NeumaierSum>()
        .value()
}

/// Interior-sum form: hypotheses `min ||A_j|| = mu > n` and
/// `max gap <= ln(mu)/2`; bound `C n / mu`.
pub fn ap_check(chain: &[Mat2], c_assumed: f64) -> Result<APReport> {
    let logs = chain_logs(chain)?;
    let n = chain.len();
    let mu = logs.norms.iter().copied().fold(f64::INFINITY, f64::min).exp();
    Ok(APReport {
        n,
        mu,
        hypothesis_min_norm_ok: mu > n as f64,
        hypothesis_gap_ok: logs.max_gap <= 0.5 * mu.ln(),
        max_gap: logs.max_gap,
        residual: signed_residual(&logs).abs(),
        bound: c_assumed * n as f64 / mu,
        middle_sum: MiddleSum::Interior,
        constant: c_assumed,
    })
}

/// All-index form: hypotheses `mu <= ||A_j|| < mu^C` with `mu = min ||A_j||`
/// and `max gap <= ln(mu)/2`; bound `n / mu^{1/3} + 4 C ln mu`.
pub fn ap_variant_check(chain: &[Mat2], c_exponent: f64) -> Result<APReport> {
    let logs = chain_logs(chain)?;
    let n = chain.len();
    let ln_mu = logs.norms.iter().copied().fold(f64::INFINITY, f64::min);
    let ln_max = logs.norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mu = ln_mu.exp();
    Ok(APReport {
        n,
        mu,
        hypothesis_min_norm_ok: ln_mu > 0.0 && ln_max < c_exponent * ln_mu,
        hypothesis_gap_ok: logs.max_gap <= 0.5 * ln_mu,
        max_gap: logs.max_gap,
        residual: (signed_residual(&logs) + logs.norms[0] + logs.norms[n - 1]).abs(),
        bound: n as f64 / mu.cbrt() + 4.0 * c_exponent * ln_mu,
        middle_sum: MiddleSum::All,
        constant: c_exponent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApConsequenceReport {
    pub n0: u64,
    pub n1: u64,
    pub delta: f64,
    pub constant: f64,
    pub l_n0: f64,
    pub l_2n0: f64,
    pub l_n1: f64,
    /// `L_{N0}(x) > delta`
    pub hyp_exceeds_delta: bool,
    /// `|L_{N0}(x) - L_{2N0}(x)| < L_{N0}(x) / 100`
    pub hyp_doubling_stable: bool,
    /// `|L_N(x) - L_N(x + j N0 w)| < delta / 100` for `N in {N0, 2 N0}`,
    /// `1 <= j <= N1 / N0`
    pub hyp_shift_stable: bool,
    pub max_shift_deviation: f64,
    /// `|L_{N1} + (1/n) sum L_{N0}(x + j N0 w) - (2/n) sum L_{2N0}(x + j N0 w)|`
    pub first_lhs: f64,
    /// `exp(-N0 L_{N0}(x) / 4) + C |L_{N0}(x)| N0 / N1`
    pub first_rhs: f64,
    /// `|L_{N1}(x) + L_{N0}(x) - 2 L_{2N0}(x)|`
    pub second_lhs: f64,
    /// `delta / 20 + C |L_{N0}(x)| N0 / N1`
    pub second_rhs: f64,
    /// Whether both conclusions hold; `None` when a hypothesis fails.
    pub conclusion_holds: Option<bool>,
}

/// Evaluate the block-scale consequence of the variant principle at `x`,
/// using the determinant-renormalized exponents `L_N(x)`.
pub fn ap_consequence_check<F: MatrixFunction>(
    c: &Cocycle<F>,
    x: &[f64],
    n0: u64,
    n1: u64,
    delta: f64,
    c_assumed: f64,
) -> Result<ApConsequenceReport> {
    if n0 == 0 || n1 < n0 || !n1.is_multiple_of(n0) {
        return Err(Error::NotDivisible { n0, n1 });
    }
    if x.len() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            got: x.len(),
        });
    }
    let r = Cocycle::new(Renormalized::with_floor(c.matrix(), UNDERFLOW_FLOOR), c.omega().clone())?;
    let blocks = n1 / n0;
    let mut point = x.to_vec();
    let mut l_at = |n: u64, j: u64| -> f64 {
        r.orbit_point(x, j * n0, &mut point);
        r.iterate_log_norm(n, &point).log_norm_avg
    };
    let l_n0 = l_at(n0, 0);
    let l_2n0 = l_at(2 * n0, 0);
    let l_n1 = l_at(n1, 0);
    let mut max_shift_deviation = 0.0f64;
    for j in 1..=blocks {
        for (n, base) in [(n0, l_n0), (2 * n0, l_2n0)] {
            max_shift_deviation = max_shift_deviation.max((base - l_at(n, j)).abs());
        }
    }
    let mean_n0 = (0..blocks).map(|j| l_at(n0, j)).collect::<NeumaierSum>().value() / blocks as f64;
    let sum_2n0 = (0..blocks.saturating_sub(1))
        .map(|j| l_at(2 * n0, j))
        .collect::<NeumaierSum>()
        .value();
    let tail = c_assumed * l_n0.abs() * n0 as f64 / n1 as f64;

    let hyp_exceeds_delta = l_n0 > delta;
    let hyp_doubling_stable = (l_n0 - l_2n0).abs() < l_n0 / 100.0;
    let hyp_shift_stable = max_shift_deviation < delta / 100.0;
    let first_lhs = (l_n1 + mean_n0 - 2.0 * sum_2n0 / blocks as f64).abs();
    let first_rhs = (-(n0 as f64) * l_n0 / 4.0).exp() + tail;
    let second_lhs = (l_n1 + l_n0 - 2.0 * l_2n0).abs();
    let second_rhs = delta / 20.0 + tail;
    let conclusion_holds = (hyp_exceeds_delta && hyp_doubling_stable && hyp_shift_stable)
        .then_some(first_lhs < first_rhs && second_lhs < second_rhs);
    Ok(ApConsequenceReport {
        n0,
        n1,
        delta,
        constant: c_assumed,
        l_n0,
        l_2n0,
        l_n1,
        hyp_exceeds_delta,
        hyp_doubling_stable,
        hyp_shift_stable,
        max_shift_deviation,
        first_lhs,
        first_rhs,
        second_lhs,
        second_rhs,
        conclusion_holds,
    })
}

/// Random hyperbolic chains `A_j = R(theta_j) diag(s_j, 1/s_j) R(phi_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub chains: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Norms are drawn log-uniformly from `(mu, mu^window_exponent)`.
    pub window_exponent: f64,
    pub seed: u64,
    /// Redraws allowed per chain to meet both hypotheses.
    pub max_redraws: usize,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            chains: 1000,
            n_min: 3,
            n_max: 100,
            mu_min: 1e3,
            mu_max: 1e6,
            window_exponent: 101.0 / 99.0,
            seed: 0,
            max_redraws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub interior: APReport,
    pub all: APReport,
    pub redraws: usize,
}

/// One chain with norm-window lower edge `mu`.
pub fn random_hyperbolic_chain(rng: &mut impl Rng, n: usize, mu: f64, window_exponent: f64) -> Vec<Mat2> {
    let (lo, hi) = (mu.ln(), window_exponent * mu.ln());
    (0..n)
        .map(|_| {
            let s = (lo + (hi - lo) * rng.random::<f64>()).exp();
            let theta = PI * rng.random::<f64>();
            let phi = PI * rng.random::<f64>();
            Mat2::rotation(theta) * Mat2::real(s, 0.0, 0.0, s.recip()) * Mat2::rotation(phi)
        })
        .collect()
}

/// Seeded ensemble of chains meeting both hypotheses of the interior form,
/// each checked under both middle-sum conventions.
///
/// `c_assumed` enters the interior-form bound; the all-index form uses
/// `window_exponent` as its constant.
pub fn ap_ensemble(spec: &EnsembleSpec, c_assumed: f64) -> Result<Vec<EnsembleRun>> {
    if spec.n_min < 3 || spec.n_max < spec.n_min {
        return Err(Error::InvalidArgument("ensemble needs 3 <= n_min <= n_max".into()));
    }
    if !(spec.mu_min > 1.0 && spec.mu_max >= spec.mu_min && spec.window_exponent > 1.0) {
        return Err(Error::InvalidArgument(
            "ensemble needs 1 < mu_min <= mu_max and window exponent > 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut runs = Vec::with_capacity(spec.chains);
    for _ in 0..spec.chains {
        let n = rng.random_range(spec.n_min..=spec.n_max);
        let mu = (spec.mu_min.ln() + (spec.mu_max.ln() - spec.mu_min.ln()) * rng.random::<f64>()).exp();
        let mut redraws = 0;
        loop {
            let chain = random_hyperbolic_chain(&mut rng, n, mu, spec.window_exponent);
            let interior = ap_check(&chain, c_assumed)?;
            if interior.hypotheses_ok() || redraws >= spec.max_redraws {
                let all = ap_variant_check(&chain, spec.window_exponent)?;
                runs.push(EnsembleRun { interior, all, redraws });
                break;
            }
            redraws += 1;
        }
    }
    Ok(runs)
}

/// CSV document `n,mu,max_gap,residual,bound` for a list of reports.
pub fn reports_csv<'a>(reports: impl IntoIterator<Item = &'a APReport>) -> String {
    let mut out = String::from(APReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
