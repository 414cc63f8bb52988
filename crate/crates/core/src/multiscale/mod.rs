//! Scale arithmetic for passing from `L_{N_0}` to larger `N`: hypothesis
//! gates, dyadic ladders of admissible scales, the frequency-splitting
//! induction schedule, and numerical checks of each.
//!
//! Ladder steps always multiply by a power of two, so `N_{s-1} | N_s`. A step
//! takes the largest such multiple not exceeding the binding bound; each step
//! records which bound that was under a stable name (`eq:LiouvCondition`,
//! `Thm:Liouv:cap`, ...). Infinite bounds serialize as `null` and are clamped
//! by the caller's `max_scale`.

mod induction;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use induction::{induction_schedule, InductionParams, TraceEvent};

use crate::cocycle::{Cocycle, MatrixFunction, TrigPolyMatrix};
use crate::error::{Error, Result};
use crate::lyapunov::{l_prime_n, LEEstimate, QuadratureSpec};
use crate::torus::{freq_norm, min_dot_norm, Automorphism, Frequency};

/// Constants left unquantified by the theory, surfaced in every ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "C")]
    pub big_c: f64,
    #[serde(rename = "c")]
    pub small_c: f64,
    #[serde(rename = "C_3")]
    pub c3: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            big_c: 10.0,
            small_c: 0.1,
            c3: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl GateCheck {
    fn less(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs < rhs,
        }
    }

    fn greater(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs > rhs,
        }
    }

    fn vacuous() -> Self {
        Self {
            lhs: 0.0,
            rhs: 0.0,
            holds: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub checks: BTreeMap<String, GateCheck>,
    /// Largest admissible target scale; `None` means unbounded.
    pub admissible: Option<f64>,
    /// `min_{0<|k|<=K0} ||k.w2||` when a Diophantine block was scanned.
    pub scanned_delta: Option<f64>,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.holds)
    }

    fn failures(&self) -> String {
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|(_, c)| !c.holds)
            .map(|(k, _)| k.as_str())
            .collect();
        failed.join(", ")
    }
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidArgument(format!("kappa = {kappa} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidArgument(format!("{name} must be >= 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleParams {
    #[serde(rename = "N0")]
    pub n0: u64,
    pub q0: u64,
    pub omega: Frequency,
    pub rho: f64,
    pub kappa: f64,
    pub constants: Constants,
    pub max_scale: u64,
}

/// Hypotheses for passing from `N0` to `N1` when `||q0 w||` is small.
pub fn liouville_gate(p: &LiouvilleParams) -> Result<GateReport> {
    check_positive("N0", p.n0)?;
    check_positive("q0", p.q0)?;
    check_kappa(p.kappa)?;
    let (q0, n0) = (p.q0 as f64, p.n0 as f64);
    let kc = p.kappa.powf(p.constants.big_c);
    let norm = freq_norm(&p.omega, p.q0);
    let checks = BTreeMap::from([
        (
            "eq:LiouvCondition".to_string(),
            GateCheck::less(norm, kc * p.rho.powi(4) * q0 / n0),
        ),
        ("eq:N0LargeCondition".to_string(), GateCheck::greater(n0 * kc, q0)),
    ]);
    let admissible = p.kappa.powf(p.constants.big_c / 2.0) * p.rho * p.rho * (n0 * q0 / norm).sqrt();
    Ok(GateReport {
        checks,
        admissible: finite_or_none(admissible),
        scanned_delta: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedParams {
    #[serde(rename = "N0")]
    pub n0: u64,
    pub q0: u64,
    #[serde(rename = "K0")]
    pub k0: u64,
    pub omega: Frequency,
    /// `w1` is `omega[..d1]`, `w2` the rest.
    pub d1: usize,
    pub rho: f64,
    pub kappa: f64,
    pub delta: f64,
    pub constants: Constants,
    pub max_scale: u64,
}

fn split(omega: &Frequency, d1: usize) -> Result<(Option<Frequency>, Option<Frequency>)> {
    if d1 > omega.dim() {
        return Err(Error::InvalidArgument(format!(
            "split d1 = {d1} exceeds dimension {}",
            omega.dim()
        )));
    }
    Ok((omega.slice(0..d1), omega.slice(d1..omega.dim())))
}

/// Hypotheses for mixed Liouville/Diophantine frequencies `(w1, w2)`.
///
/// With an empty `w2` the Diophantine hypotheses are vacuous; with an empty
/// `w1` the Liouville one is.
pub fn mixed_gate(p: &MixedParams) -> Result<GateReport> {
    check_positive("N0", p.n0)?;
    check_positive("q0", p.q0)?;
    check_positive("K0", p.k0)?;
    check_kappa(p.kappa)?;
    let (w1, w2) = split(&p.omega, p.d1)?;
    let Constants { big_c, small_c, .. } = p.constants;
    let (q0, n0, k0) = (p.q0 as f64, p.n0 as f64, p.k0 as f64);
    let kc = p.kappa.powf(big_c);
    let norm1 = w1.as_ref().map_or(0.0, |w| freq_norm(w, p.q0));
    let resonant_cap = kc * p.rho.powi(3) * q0 / norm1;

    let mut checks = BTreeMap::new();
    checks.insert(
        "eq:Mixed:hyp1".to_string(),
        if w1.is_some() {
            GateCheck::less(norm1, kc * p.rho.powi(3) * q0 / n0)
        } else {
            GateCheck::vacuous()
        },
    );
    let (scanned_delta, cap) = match &w2 {
        Some(w2) => {
            let scanned = min_dot_norm(w2, p.k0)?.delta;
            if p.delta > scanned {
                return Err(Error::InconsistentDelta {
                    delta: p.delta,
                    scanned,
                });
            }
            checks.insert(
                "eq:Mixed:hyp2".to_string(),
                GateCheck::greater(k0, (p.rho.powf(1.0 + small_c) * p.kappa).powf(-big_c) * q0),
            );
            checks.insert(
                "eq:Mixed:hyp3".to_string(),
                GateCheck::greater(n0, kc.recip() / p.delta * k0),
            );
            (Some(scanned), resonant_cap.min(n0 * (k0 / q0).powf(small_c).exp()))
        }
        None => {
            checks.insert("eq:Mixed:hyp2".to_string(), GateCheck::vacuous());
            checks.insert("eq:Mixed:hyp3".to_string(), GateCheck::vacuous());
            (None, resonant_cap)
        }
    };
    Ok(GateReport {
        checks,
        admissible: finite_or_none(cap),
        scanned_delta,
    })
}

/// One transition `N_{s-1} -> N_s` of a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFlag {
    pub scale: u64,
    /// Value of the binding bound; `None` when every bound was infinite and
    /// `max_scale` clamped the step.
    pub bound: Option<f64>,
    pub truncated_by: String,
    /// Allowed `|L_{N_s} - L_{N_{s-1}}|` before the `C'` factor.
    pub budget: f64,
    pub checks: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LadderParams {
    Liouville(LiouvilleParams),
    Mixed(MixedParams),
    Induction(InductionParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    pub scales: Vec<u64>,
    pub params: LadderParams,
    pub step_flags: Vec<StepFlag>,
    /// Budget for `|L_{N_last} - L_{N_0}|` before the `C'` factor.
    pub total_budget: f64,
    /// Why generation stopped.
    pub halt: String,
    /// Branch log of the induction schedule; empty for other ladders.
    pub trace: Vec<TraceEvent>,
    /// Largeness conditions taken for granted without a numerical check.
    pub assumptions: Vec<String>,
}

impl ScaleLadder {
    fn start(n0: u64, params: LadderParams) -> Self {
        Self {
            scales: vec![n0],
            params,
            step_flags: Vec::new(),
            total_budget: 0.0,
            halt: String::new(),
            trace: Vec::new(),
            assumptions: Vec::new(),
        }
    }

    pub fn last(&self) -> u64 {
        *self.scales.last().expect("ladder starts with N0")
    }

    fn push(&mut self, flag: StepFlag) {
        self.scales.push(flag.scale);
        self.step_flags.push(flag);
    }

    /// Regenerate the ladder from its parameters alone.
    pub fn replay(&self) -> Result<Self> {
        match &self.params {
            LadderParams::Liouville(p) => liouville_ladder(p),
            LadderParams::Mixed(p) => mixed_ladder(p),
            LadderParams::Induction(p) => induction_schedule(p),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ladder serializes")
    }

    /// Divisibility and dyadic-step invariants.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.scales.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == 0 || b % a != 0 || !(b / a).is_power_of_two() {
                return Err(Error::NotDivisible { n0: a, n1: b });
            }
        }
        Ok(())
    }
}

/// A binding bound: `value` compared strictly or not.
struct Bound<'a> {
    name: &'a str,
    value: f64,
    strict: bool,
}

impl Bound<'_> {
    fn admits(&self, n: u64) -> bool {
        let n = n as f64;
        if self.strict {
            n < self.value
        } else {
            n <= self.value
        }
    }
}

/// Largest `2^j prev` admitted by every bound and by `max_scale`, together
/// with the bound that stopped a further doubling.
fn largest_dyadic(prev: u64, bounds: &[Bound], max_scale: u64) -> (u64, String, Option<f64>) {
    let mut n = prev;
    loop {
        let Some(next) = n.checked_mul(2) else {
            return (n, "u64".to_string(), None);
        };
        if next > max_scale {
            return (n, "max_scale".to_string(), None);
        }
        if let Some(b) = bounds.iter().find(|b| !b.admits(next)) {
            return (n, b.name.to_string(), Some(b.value));
        }
        n = next;
    }
}

/// Dyadic ladder from `N0` with `N_s <= N_{s-1}^{2/3} (q0 rho^4/||q0 w||)^{1/3}`
/// and `N_s < kappa^C rho^4 q0/||q0 w||`.
pub fn liouville_ladder(p: &LiouvilleParams) -> Result<ScaleLadder> {
    let gate = liouville_gate(p)?;
    if !gate.passed() {
        return Err(Error::GateFailed(gate.failures()));
    }
    let norm = freq_norm(&p.omega, p.q0);
    let x = p.q0 as f64 * p.rho.powi(4) / norm;
    let cap = p.kappa.powf(p.constants.big_c) * x;
    let budget = p.kappa.powf(1.0 / 6.0);
    let mut ladder = ScaleLadder::start(p.n0, LadderParams::Liouville(p.clone()));
    loop {
        let prev = ladder.last();
        let rec = (prev as f64).powf(2.0 / 3.0) * x.cbrt();
        let bounds = [
            Bound {
                name: "Thm:Liouv:recursion",
                value: rec,
                strict: false,
            },
            Bound {
                name: "Thm:Liouv:cap",
                value: cap,
                strict: true,
            },
        ];
        let (next, stop, value) = largest_dyadic(prev, &bounds, p.max_scale);
        if next == prev {
            ladder.halt = format!("no doubling of {prev} admitted by {stop}");
            break;
        }
        let checks = bounds.iter().map(|b| (b.name.to_string(), b.admits(next))).collect();
        ladder.push(StepFlag {
            scale: next,
            bound: value,
            truncated_by: stop,
            budget,
            checks,
        });
        if norm == 0.0 {
            // resonant: every bound is infinite, one step reaches max_scale
            ladder.halt = "unbounded bounds clamped by max_scale".into();
            break;
        }
    }
    ladder.total_budget = budget;
    Ok(ladder)
}

/// Every `2^j N0` below the mixed-frequency cap.
pub fn mixed_ladder(p: &MixedParams) -> Result<ScaleLadder> {
    let gate = mixed_gate(p)?;
    if !gate.passed() {
        return Err(Error::GateFailed(gate.failures()));
    }
    let cap = gate.admissible.unwrap_or(f64::INFINITY);
    let budget = p.kappa.powf(1.0 / 6.0);
    let mut ladder = ScaleLadder::start(p.n0, LadderParams::Mixed(p.clone()));
    loop {
        let prev = ladder.last();
        let next = match prev.checked_mul(2) {
            Some(n) if n <= p.max_scale => n,
            _ => {
                ladder.halt = format!("doubling {prev} exceeds max_scale");
                break;
            }
        };
        if (next as f64) >= cap {
            ladder.halt = format!("doubling {prev} reaches Thm:Mixed:cap");
            break;
        }
        ladder.push(StepFlag {
            scale: next,
            bound: gate.admissible,
            truncated_by: "dyadic".to_string(),
            budget,
            checks: BTreeMap::from([("Thm:Mixed:cap".to_string(), true)]),
        });
    }
    ladder.total_budget = budget;
    Ok(ladder)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    #[serde(rename = "N_i")]
    pub n_i: u64,
    #[serde(rename = "N_j")]
    pub n_j: u64,
    pub difference: f64,
    pub budget: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderVerification {
    pub values: Vec<LEEstimate>,
    /// Consecutive pairs, then base-to-top.
    pub pairs: Vec<PairCheck>,
    pub c_prime: f64,
}

impl LadderVerification {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.passed)
    }
}

/// `L'_N` at every ladder scale, compared against `C'` times the step budgets.
pub fn ladder_verify<F: MatrixFunction>(
    c: &Cocycle<F>,
    ladder: &ScaleLadder,
    quad: &QuadratureSpec,
    c_prime: f64,
) -> Result<LadderVerification> {
    if ladder.scales.len() < 2 {
        return Err(Error::InvalidArgument("ladder has a single scale".into()));
    }
    let values = ladder
        .scales
        .par_iter()
        .map(|&n| l_prime_n(c, n, quad))
        .collect::<Result<Vec<_>>>()?;
    let pair = |i: usize, j: usize, budget: f64| {
        let difference = (values[i].value - values[j].value).abs();
        PairCheck {
            n_i: values[i].n,
            n_j: values[j].n,
            difference,
            budget: c_prime * budget,
            passed: difference <= c_prime * budget,
        }
    };
    let mut pairs: Vec<PairCheck> = ladder
        .step_flags
        .iter()
        .enumerate()
        .map(|(s, f)| pair(s, s + 1, f.budget))
        .collect();
    pairs.push(pair(0, values.len() - 1, ladder.total_budget));
    Ok(LadderVerification { values, pairs, c_prime })
}

/// `|L'_N(A, w) - L'_N(A o B, B^{-1} w)|` on the lattice `(1/M) Z^d`, which
/// `B` permutes.
pub fn cov_invariance_check(c: &Cocycle<TrigPolyMatrix>, b: &Automorphism, n: u64, m: usize) -> Result<f64> {
    let moved = Cocycle::new(c.matrix().compose(b)?, b.pull_back(c.omega())?)?;
    let quad = QuadratureSpec::lattice(m);
    let lhs = l_prime_n(c, n, &quad)?;
    let rhs = l_prime_n(&moved, n, &quad)?;
    Ok((lhs.value - rhs.value).abs())
}
