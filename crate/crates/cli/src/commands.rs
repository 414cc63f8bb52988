//! One function per experiment: read its config section, call the library,
//! write the tables and reports.

use std::path::Path;

use cocycle_core::avalanche::{ap_ensemble, APReport};
use cocycle_core::cocycle::{discontinuity_example, Cocycle, Mat2, MatrixFunction, TrigPolyMatrix};
use cocycle_core::deviation::Normalization;
use cocycle_core::deviation::{
    cdt_empirical, fourier_coeffs, l2_uniform_check, ldt_empirical, lojasiewicz_fit, shift_drift_empirical,
    MeasureEstimate, Profile,
};
use cocycle_core::format::{sci, sci_opt};
use cocycle_core::lyapunov::{
    estimates_csv, finite_scale_modulus, l_n_renormalized, l_prime_n, le_extrapolate, LEEstimate, QuadratureKind,
    QuadratureSpec,
};
use cocycle_core::multiscale::{
    cov_invariance_check, induction_schedule, ladder_verify, liouville_ladder, mixed_ladder, LadderParams,
    LadderVerification, ScaleLadder,
};
use cocycle_core::torus::{Automorphism, Frequency};
use serde::Serialize;

use crate::config::{config_error, section, trig_poly, Built, ExperimentConfig};
use crate::output::Writer;
use crate::{Experiment, RunError};

struct Context<'a> {
    config: &'a ExperimentConfig,
    base_dir: &'a Path,
    seed: u64,
}

impl Context<'_> {
    fn frequency(&self) -> Result<Frequency, RunError> {
        section(&self.config.frequency, "frequency")?.build()
    }

    fn cocycle(&self) -> Result<Built, RunError> {
        let omega = self.frequency()?;
        section(&self.config.cocycle, "cocycle")?.build(&omega, self.base_dir)
    }

    /// The configured rule, or the default for `d`; `--seed` reseeds Monte
    /// Carlo rules.
    fn quadrature(&self, d: usize) -> QuadratureSpec {
        let mut q = self
            .config
            .quadrature
            .unwrap_or_else(|| QuadratureSpec::default_for_dim(d));
        if let QuadratureKind::MonteCarlo { ref mut seed, .. } = q.kind {
            if self.seed != self.config.seed {
                *seed = self.seed;
            }
        }
        q
    }
}

pub fn dispatch(exp: Experiment, config: &ExperimentConfig, base_dir: &Path, w: &mut Writer) -> Result<(), RunError> {
    let ctx = Context {
        config,
        base_dir,
        seed: w.meta.seed,
    };
    match exp {
        Experiment::Le => le(&ctx, w),
        Experiment::LeLimit => le_limit(&ctx, w),
        Experiment::Continuity => continuity(&ctx, w),
        Experiment::Ap => ap(&ctx, w),
        Experiment::Ldt => ldt(&ctx, w),
        Experiment::Cdt => cdt(&ctx, w),
        Experiment::Drift => drift(&ctx, w),
        Experiment::Loja => loja(&ctx, w),
        Experiment::L2 => l2(&ctx, w),
        Experiment::Fourier => fourier(&ctx, w),
        Experiment::Ladder => ladder(&ctx, w),
        Experiment::Cov => cov(&ctx, w),
        Experiment::ExampleDiscontinuity => example_discontinuity(&ctx, w),
    }
}

fn estimate<F: MatrixFunction>(
    c: &Cocycle<F>,
    n: u64,
    q: &QuadratureSpec,
    normalization: Normalization,
) -> Result<LEEstimate, RunError> {
    Ok(match normalization {
        Normalization::Raw => l_prime_n(c, n, q)?,
        Normalization::Renormalized => l_n_renormalized(c, n, q)?,
    })
}

#[derive(Serialize)]
struct LeReport {
    normalization: Normalization,
    estimates: Vec<LEEstimate>,
}

fn le(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.le, "le")?;
    let built = ctx.cocycle()?;
    let q = ctx.quadrature(built.cocycle.dim());
    let estimates = spec
        .n
        .iter()
        .map(|&n| estimate(&built.cocycle, n, &q, spec.normalization))
        .collect::<Result<Vec<_>, _>>()?;
    w.csv("le", &estimates_csv(&estimates))?;
    w.json(
        "le",
        &LeReport {
            normalization: spec.normalization,
            estimates,
        },
    )?;
    Ok(())
}

fn le_limit(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.le_limit, "le_limit")?;
    let built = ctx.cocycle()?;
    let q = ctx.quadrature(built.cocycle.dim());
    let ex = le_extrapolate(&built.cocycle, &spec.schedule, &q)?;
    w.csv("le-limit", &estimates_csv(&ex.table))?;
    w.json("le-limit", &ex)?;
    Ok(())
}

fn continuity(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.continuity, "continuity")?;
    let built = ctx.cocycle()?;
    let c = built.polynomial_cocycle("continuity")?;
    let a = c.matrix();
    let dir = spec.direction;
    let perturbations = spec
        .epsilons
        .iter()
        .map(|&e| {
            let bump = Mat2::real(dir[0][0], dir[0][1], dir[1][0], dir[1][1]).scale_real(e);
            a.add(&TrigPolyMatrix::constant(a.dim(), bump, a.rho())?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let q = ctx.quadrature(c.dim());
    let table = finite_scale_modulus(&c, spec.n, &perturbations, &q, spec.strip_points)?;
    let mut csv = String::from("distance,difference,envelope,strip_samples\n");
    for r in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            sci(r.distance),
            sci(r.difference),
            sci(r.envelope),
            r.strip_samples
        ));
    }
    w.csv("continuity", &csv)?;
    w.json("continuity", &table)?;
    Ok(())
}

#[derive(Serialize)]
struct ApSummary {
    chains: usize,
    hypotheses_ok: usize,
    interior_within_bound: usize,
    all_within_bound: usize,
    max_interior_ratio: f64,
    max_all_ratio: f64,
    c_assumed: f64,
}

#[derive(Serialize)]
struct ApDocument<'a> {
    summary: ApSummary,
    interior: Vec<&'a APReport>,
    all: Vec<&'a APReport>,
}

fn ap(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.ap, "ap")?;
    let runs = ap_ensemble(&spec.ensemble(ctx.seed), spec.c_assumed)?;
    let ratio = |r: &APReport| r.residual / r.bound;
    let summary = ApSummary {
        chains: runs.len(),
        hypotheses_ok: runs.iter().filter(|r| r.interior.hypotheses_ok()).count(),
        interior_within_bound: runs.iter().filter(|r| r.interior.residual <= r.interior.bound).count(),
        all_within_bound: runs.iter().filter(|r| r.all.residual <= r.all.bound).count(),
        max_interior_ratio: runs.iter().map(|r| ratio(&r.interior)).fold(0.0, f64::max),
        max_all_ratio: runs.iter().map(|r| ratio(&r.all)).fold(0.0, f64::max),
        c_assumed: spec.c_assumed,
    };
    let mut csv = String::from("chain,middle_sum,n,mu,max_gap,residual,bound,redraws\n");
    for (i, r) in runs.iter().enumerate() {
        for (label, rep) in [("interior", &r.interior), ("all", &r.all)] {
            csv.push_str(&format!(
                "{i},{label},{},{},{},{},{},{}\n",
                rep.n,
                sci(rep.mu),
                sci(rep.max_gap),
                sci(rep.residual),
                sci(rep.bound),
                r.redraws
            ));
        }
    }
    w.csv("ap", &csv)?;
    w.json(
        "ap",
        &ApDocument {
            summary,
            interior: runs.iter().map(|r| &r.interior).collect(),
            all: runs.iter().map(|r| &r.all).collect(),
        },
    )?;
    Ok(())
}

fn measures_csv(first: &str, rows: &[(String, &MeasureEstimate)]) -> String {
    let mut csv = format!("{first},threshold,measured_fraction,predicted_bound\n");
    for (key, e) in rows {
        csv.push_str(&format!(
            "{key},{},{},{}\n",
            sci(e.threshold),
            sci(e.measured_fraction),
            sci_opt(e.predicted_bound)
        ));
    }
    csv
}

#[derive(Serialize)]
struct ProfileSummary {
    #[serde(rename = "N")]
    n: u64,
    m: usize,
    mean: f64,
    rms: f64,
    sentinels: usize,
}

impl From<&Profile> for ProfileSummary {
    fn from(p: &Profile) -> Self {
        Self {
            n: p.n,
            m: p.m,
            mean: p.mean,
            rms: p.rms(),
            sentinels: p.sentinels,
        }
    }
}

#[derive(Serialize)]
struct LdtReport {
    normalization: Normalization,
    profile: ProfileSummary,
    estimates: Vec<MeasureEstimate>,
}

fn ldt(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.ldt, "ldt")?;
    let built = ctx.cocycle()?;
    let p = Profile::sample(&built.cocycle, spec.n, spec.m, spec.normalization)?;
    let estimates: Vec<MeasureEstimate> = spec.kappas.iter().map(|&k| ldt_empirical(&p, k)).collect();
    let rows: Vec<_> = estimates.iter().map(|e| (sci(e.threshold), e)).collect();
    w.csv("ldt", &measures_csv("kappa", &rows))?;
    w.csv("ldt-profile", &p.to_csv())?;
    w.json(
        "ldt",
        &LdtReport {
            normalization: spec.normalization,
            profile: (&p).into(),
            estimates,
        },
    )?;
    Ok(())
}

fn cdt(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.cdt, "cdt")?;
    let built = ctx.cocycle()?;
    let estimates = spec
        .shifts
        .iter()
        .map(|a| cdt_empirical(&built.cocycle, spec.n, a, spec.kappa, spec.m))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<_> = estimates.iter().map(|e| (sci(e.parameters["a"]), e)).collect();
    w.csv("cdt", &measures_csv("a", &rows))?;
    w.json("cdt", &estimates)?;
    Ok(())
}

fn drift(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.drift, "drift")?;
    let built = ctx.cocycle()?;
    let estimates = spec
        .n
        .iter()
        .map(|&n| shift_drift_empirical(&built.cocycle, n, spec.exponent, spec.c, spec.m))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<_> = spec.n.iter().map(|n| n.to_string()).zip(&estimates).collect();
    w.csv("drift", &measures_csv("N", &rows))?;
    w.json("drift", &estimates)?;
    Ok(())
}

fn loja(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.loja, "loja")?;
    let d = spec
        .g
        .first()
        .map(|t| t.k.len())
        .ok_or_else(|| config_error("[loja] g has no terms"))?;
    let g = trig_poly(&spec.g, d)?;
    let fit = lojasiewicz_fit(&g, &spec.thresholds, spec.m)?;
    let rows: Vec<_> = fit.estimates.iter().map(|e| (sci(e.threshold), e)).collect();
    w.csv("loja", &measures_csv("t", &rows))?;
    w.json("loja", &fit)?;
    Ok(())
}

fn l2(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.l2, "l2")?;
    let built = ctx.cocycle()?;
    let report = l2_uniform_check(&built.cocycle, &spec.n, spec.m)?;
    let mut csv = String::from("N,rms,excised_mass\n");
    for r in &report.rows {
        csv.push_str(&format!("{},{},{}\n", r.n, sci(r.rms), sci(r.excised_mass)));
    }
    w.csv("l2", &csv)?;
    w.json("l2", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct FourierSummary {
    normalization: Normalization,
    profile: ProfileSummary,
    k0: u64,
    clip_level: f64,
    clipped: usize,
    max_weighted: Option<f64>,
    tail: f64,
    energy: f64,
    mean_square: f64,
    clipped_mean: f64,
    /// `[re, im]` of the `k = 0` coefficient.
    c0: [f64; 2],
}

fn fourier(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.fourier, "fourier")?;
    let built = ctx.cocycle()?;
    let p = Profile::sample(&built.cocycle, spec.n, spec.m, spec.normalization)?;
    let f = fourier_coeffs(&p, spec.k0)?;
    let c0 = f.coeff(&vec![0; f.d]);
    w.csv("fourier", &f.to_csv())?;
    w.json(
        "fourier",
        &FourierSummary {
            normalization: spec.normalization,
            profile: (&p).into(),
            k0: f.k0,
            clip_level: f.clip_level,
            clipped: f.clipped,
            max_weighted: f.max_weighted,
            tail: f.tail,
            energy: f.energy,
            mean_square: f.mean_square,
            clipped_mean: f.clipped_mean,
            c0: [c0.re, c0.im],
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct LadderDocument {
    ladder: ScaleLadder,
    verification: Option<LadderVerification>,
}

fn ladder(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.ladder, "ladder")?;
    let ladder = match &spec.params {
        LadderParams::Liouville(p) => liouville_ladder(p)?,
        LadderParams::Mixed(p) => mixed_ladder(p)?,
        LadderParams::Induction(p) => induction_schedule(p)?,
    };
    let verification = match spec.verify_c_prime {
        Some(c_prime) => {
            let built = ctx.cocycle()?;
            let q = ctx.quadrature(built.cocycle.dim());
            Some(ladder_verify(&built.cocycle, &ladder, &q, c_prime)?)
        }
        None => None,
    };
    let mut csv = String::from("scale,bound,truncated_by,budget\n");
    csv.push_str(&format!("{},,base,\n", ladder.scales[0]));
    for f in &ladder.step_flags {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            f.scale,
            sci_opt(f.bound),
            f.truncated_by,
            sci(f.budget)
        ));
    }
    w.csv("ladder", &csv)?;
    if let Some(v) = &verification {
        w.csv("ladder-verify", &estimates_csv(&v.values))?;
    }
    w.json("ladder", &LadderDocument { ladder, verification })?;
    Ok(())
}

#[derive(Serialize)]
struct CovReport {
    b: Vec<Vec<i64>>,
    #[serde(rename = "N")]
    n: u64,
    m: usize,
    difference: f64,
}

fn cov(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.cov, "cov")?;
    let built = ctx.cocycle()?;
    let c = built.polynomial_cocycle("cov")?;
    let b = Automorphism::new(spec.b.clone())?;
    let difference = cov_invariance_check(&c, &b, spec.n, spec.m)?;
    w.json(
        "cov",
        &CovReport {
            b: spec.b.clone(),
            n: spec.n,
            m: spec.m,
            difference,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct DiscontinuityReport {
    k: Vec<i64>,
    omega: Frequency,
    resonant: bool,
    /// The limit exponent: `(2/pi) e^{-2 pi sum k}` when `k.w` is an integer, else 0.
    predicted: f64,
    /// `L'_N` at the largest `N`.
    value: f64,
    estimates: Vec<LEEstimate>,
}

fn example_discontinuity(ctx: &Context, w: &mut Writer) -> Result<(), RunError> {
    let spec = section(&ctx.config.example_discontinuity, "example_discontinuity")?;
    let omega = match &ctx.config.frequency {
        Some(f) => f.build()?,
        None => Frequency::new(vec![0.0; spec.k.len()])?,
    };
    let a = discontinuity_example(spec.k.clone())?;
    let c = Cocycle::new(a.clone(), omega.clone())?;
    let q = QuadratureSpec::uniform(spec.m);
    let estimates = spec
        .n
        .iter()
        .map(|&n| l_prime_n(&c, n, &q))
        .collect::<Result<Vec<_>, _>>()?;
    let dot = omega.dot(&spec.k);
    let resonant = (dot - dot.round()).abs() < 1e-12;
    let value = estimates
        .last()
        .ok_or_else(|| config_error("[example_discontinuity] n is empty"))?
        .value;
    w.csv("example-discontinuity", &estimates_csv(&estimates))?;
    w.json(
        "example-discontinuity",
        &DiscontinuityReport {
            k: spec.k.clone(),
            omega,
            resonant,
            predicted: if resonant { a.resonant_exponent() } else { 0.0 },
            value,
            estimates,
        },
    )?;
    Ok(())
}
