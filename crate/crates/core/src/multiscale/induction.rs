//! Plan of the induction on the Diophantine dimension `d2`: scan depths
//! `K_s = K_{s-1}^e`, scales `N_{0,s}`, changes of variables that move an
//! exactly resonant direction into `w1`, and the closing step.
//!
//! The trace is a schedule, not a proof. Every branch is logged with the
//! name of the inequality that decided it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{split, Bound, Constants, LadderParams, ScaleLadder, StepFlag};
use crate::error::{Error, Result};
use crate::torus::{build_automorphism, freq_norm, gcd_all, min_dot_norm, Frequency, SCAN_LIMIT};

/// Largest scan depth the schedule will represent; beyond it `K_s^d` cannot
/// be scanned anyway.
const K_REPRESENTABLE: f64 = 1e18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionParams {
    pub omega: Frequency,
    /// `w1` is `omega[..d1]`, `w2` the rest.
    pub d1: usize,
    pub q0: u64,
    #[serde(rename = "K0")]
    pub k0: u64,
    pub delta0: f64,
    /// `0` means `||q0 w1|| = 0` and an unbounded target scale.
    pub eps0: f64,
    #[serde(rename = "N0")]
    pub n0: u64,
    pub rho: f64,
    pub constants: Constants,
    /// `K_s = K_{s-1}^{k_exponent}`.
    #[serde(default = "default_k_exponent")]
    pub k_exponent: u32,
    pub max_scale: u64,
    /// Largest lattice box `K_s^{d2}` a `delta_s` scan may visit.
    #[serde(default = "default_scan_limit")]
    pub scan_limit: f64,
}

fn default_k_exponent() -> u32 {
    20
}

fn default_scan_limit() -> f64 {
    SCAN_LIMIT
}

impl InductionParams {
    pub fn default_k_exponent() -> u32 {
        default_k_exponent()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: usize,
    pub branch: String,
    #[serde(rename = "K")]
    pub k: u64,
    pub delta: Option<f64>,
    pub argmin_k: Option<Vec<i64>>,
    pub scale: u64,
    pub d1: usize,
    pub q: u64,
    pub eps: f64,
    pub rho: f64,
    pub automorphism: Option<Vec<Vec<i64>>>,
}

fn precondition(name: &str, holds: bool) -> Result<()> {
    if holds {
        Ok(())
    } else {
        Err(Error::PreconditionFailed(name.to_string()))
    }
}

struct State {
    omega: Frequency,
    d1: usize,
    q: u64,
    eps: f64,
    k: u64,
    rho: f64,
}

/// Schedule of scales from `N0` toward `eps0^{-1} K0^{-1}`.
pub fn induction_schedule(p: &InductionParams) -> Result<ScaleLadder> {
    let (w1, w2) = split(&p.omega, p.d1)?;
    if p.q0 == 0 || p.k0 == 0 || p.n0 == 0 || p.k_exponent < 2 {
        return Err(Error::InvalidArgument(
            "q0, K0, N0 must be >= 1 and k_exponent >= 2".into(),
        ));
    }
    let c = p.constants.small_c;
    let (k0, n0) = (p.k0 as f64, p.n0 as f64);
    precondition("q_0 < K_0^{1/10}", (p.q0 as f64) < k0.powf(0.1))?;
    precondition(
        "||q_0 w_1|| <= eps_0",
        w1.as_ref().map_or(0.0, |w| freq_norm(w, p.q0)) <= p.eps0,
    )?;
    precondition("0 < delta_0 <= 1", p.delta0 > 0.0 && p.delta0 <= 1.0)?;
    if let Some(w2) = &w2 {
        precondition(
            "||k.w_2|| >= delta_0 for 0 < |k| <= K_0",
            min_dot_norm(w2, p.k0)?.delta >= p.delta0,
        )?;
    }
    precondition("1/2 K_0^2 delta_0^{-1} <= N_0", 0.5 * k0 * k0 / p.delta0 <= n0)?;
    precondition("N_0 < eps_0^{-1} K_0^{-1}", p.eps0 * n0 * k0 < 1.0)?;
    precondition("rho > K_0^{-c}", p.rho > k0.powf(-c))?;

    // the final target N_1 <= eps_0^{-1} K_0^{-1}, clamped by max_scale
    let target = (p.eps0 * k0).recip().min(p.max_scale as f64);
    let mut ladder = ScaleLadder::start(p.n0, LadderParams::Induction(p.clone()));
    ladder.assumptions.push("K_0 > K'(d_2)".to_string());
    let mut st = State {
        omega: p.omega.clone(),
        d1: p.d1,
        q: p.q0,
        eps: p.eps0,
        k: p.k0,
        rho: p.rho,
    };
    let mut step = 0usize;
    let event = |ladder: &ScaleLadder, st: &State, step, branch: &str| TraceEvent {
        step,
        branch: branch.to_string(),
        k: st.k,
        delta: None,
        argmin_k: None,
        scale: ladder.last(),
        d1: st.d1,
        q: st.q,
        eps: st.eps,
        rho: st.rho,
        automorphism: None,
    };
    loop {
        step += 1;
        let d = st.omega.dim();
        let d2 = d - st.d1;
        if d2 == 0 {
            close(&mut ladder, target, k0.powf(-c / 3.0), "Thm:Liouv");
            ladder.trace.push(event(&ladder, &st, step, "base case d_2 = 0"));
            ladder.halt = "base case d_2 = 0".into();
            break;
        }
        let next_k = (st.k as f64).powi(p.k_exponent as i32);
        let points = next_k.powi(d2 as i32);
        if next_k > K_REPRESENTABLE || points > p.scan_limit {
            ladder.trace.push(event(&ladder, &st, step, "ScanTooLarge"));
            ladder.halt = format!("ScanTooLarge: {points:e} lattice points at K = {next_k:e}");
            break;
        }
        let next_k = st.k.pow(p.k_exponent);
        let w2 = st.omega.slice(st.d1..d).expect("d2 > 0");
        let scan = match min_dot_norm(&w2, next_k) {
            Ok(r) => r,
            Err(Error::ScanTooLarge { points, .. }) => {
                ladder.trace.push(event(&ladder, &st, step, "ScanTooLarge"));
                ladder.halt = format!("ScanTooLarge: {points:e} lattice points at K = {next_k}");
                break;
            }
            Err(e) => return Err(e),
        };
        let delta = scan.delta;
        if delta == 0.0 {
            // exact resonance q' = q1 n1 inside w2: rotate n1 . w2 into w1
            let q1 = gcd_all(&scan.argmin_k);
            let n1: Vec<i64> = scan.argmin_k.iter().map(|v| v / q1).collect();
            let b = build_automorphism(&n1)?.embed(st.d1);
            st.omega = Frequency::new(b.apply(st.omega.components()))?;
            st.d1 += 1;
            st.eps = q1 as f64 * st.eps + st.q as f64 * delta;
            st.q *= q1.unsigned_abs();
            st.rho *= (next_k as f64).powi(1 - d as i32);
            st.k = next_k;
            let mut e = event(&ladder, &st, step, "Lem:CoV");
            e.delta = Some(delta);
            e.argmin_k = Some(scan.argmin_k);
            e.automorphism = Some(b.entries().to_vec());
            ladder.trace.push(e);
            continue;
        }
        let prev = ladder.last();
        let growth = (next_k as f64).powi(2) / delta;
        let bound = growth + prev as f64;
        let mut e = event(&ladder, &st, step, "");
        e.k = next_k;
        e.delta = Some(delta);
        e.argmin_k = Some(scan.argmin_k);
        if bound >= target {
            close(&mut ladder, target, k0.powf(-c), "Thm:Mixed");
            e.branch = "eq:InductiveAssump1 fails".into();
            e.scale = ladder.last();
            ladder.trace.push(e);
            ladder.halt = "target scale reached".into();
            break;
        }
        let (next, _, _) = super::largest_dyadic(
            prev,
            &[Bound {
                name: "eq:RestrN1Cond",
                value: bound,
                strict: false,
            }],
            p.max_scale,
        );
        if next == prev {
            e.branch = "eq:CaseN0good".into();
        } else {
            ladder.push(StepFlag {
                scale: next,
                bound: Some(bound),
                truncated_by: "eq:RestrN1Cond".into(),
                budget: (st.k as f64).powf(-c),
                checks: BTreeMap::from([
                    ("eq:CaseN0good".to_string(), prev as f64 >= growth),
                    ("eq:RestrN1Cond".to_string(), true),
                ]),
            });
            e.branch = "eq:CaseN0bad".into();
            e.scale = next;
        }
        st.k = next_k;
        ladder.trace.push(e);
    }
    ladder.total_budget = ladder.step_flags.iter().map(|f| f.budget).sum();
    Ok(ladder)
}

/// Final dyadic extension up to `target`, if any doubling fits.
fn close(ladder: &mut ScaleLadder, target: f64, budget: f64, name: &str) {
    let prev = ladder.last();
    let bound = Bound {
        name,
        value: target,
        strict: false,
    };
    let (next, _, _) = super::largest_dyadic(prev, &[bound], u64::MAX);
    if next > prev {
        ladder.push(StepFlag {
            scale: next,
            bound: target.is_finite().then_some(target),
            truncated_by: name.to_string(),
            budget,
            checks: BTreeMap::from([(name.to_string(), true)]),
        });
    }
}
