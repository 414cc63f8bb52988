//! TOML experiment configuration. The schema is documented in `CONFIG.md`.

use std::path::{Path, PathBuf};

use cocycle_core::avalanche::EnsembleSpec;
use cocycle_core::cocycle::{
    almost_mathieu, discontinuity_example, jacobi, jacobi_periodic, schrodinger, Cocycle, Mat2, MatrixFunction,
    TrigPoly, TrigPolyMatrix,
};
use cocycle_core::deviation::Normalization;
use cocycle_core::lyapunov::QuadratureSpec;
use cocycle_core::multiscale::LadderParams;
use cocycle_core::torus::Frequency;
use num_complex::Complex64;
use serde::Deserialize;

use crate::RunError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub cocycle: Option<CocycleSpec>,
    pub frequency: Option<FrequencySpec>,
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    pub le: Option<LeSpec>,
    pub le_limit: Option<LeLimitSpec>,
    pub continuity: Option<ContinuitySpec>,
    pub ap: Option<ApSpec>,
    pub ldt: Option<LdtSpec>,
    pub cdt: Option<CdtSpec>,
    pub drift: Option<DriftSpec>,
    pub loja: Option<LojaSpec>,
    pub l2: Option<L2Spec>,
    pub fourier: Option<FourierSpec>,
    pub ladder: Option<LadderSpec>,
    pub cov: Option<CovSpec>,
    pub example_discontinuity: Option<DiscontinuitySpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Also render every CSV table as an SVG line plot.
    #[serde(default)]
    pub svg: bool,
}

/// One Fourier mode `(re + i im) e^{2 pi i k.x}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn default_rho() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CocycleSpec {
    AlmostMathieu {
        lambda: f64,
        energy: f64,
        #[serde(default = "default_rho")]
        rho: f64,
    },
    Schrodinger {
        v: Vec<Term>,
        energy: f64,
        #[serde(default = "default_rho")]
        rho: f64,
    },
    Jacobi {
        #[serde(default)]
        v: Vec<Term>,
        a: Vec<Term>,
        energy: f64,
        #[serde(default = "default_rho")]
        rho: f64,
    },
    JacobiPeriodic {
        #[serde(default)]
        v: Vec<Term>,
        a: Vec<Term>,
        v_per: Vec<f64>,
        energy: f64,
        #[serde(default = "default_rho")]
        rho: f64,
    },
    /// Constant real matrix `[[a, b], [c, d]]`.
    Constant {
        m: [[f64; 2]; 2],
        #[serde(default = "default_rho")]
        rho: f64,
    },
    Discontinuity {
        k: Vec<i64>,
    },
    /// A serialized `TrigPolyMatrix`, relative to the config file.
    Matrix {
        path: PathBuf,
    },
}

/// Exactly one of `omega`, `rational` (one `[p, q]` per coordinate) or
/// `golden = true`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    pub omega: Option<Vec<f64>>,
    pub rational: Option<Vec<[i64; 2]>>,
    #[serde(default)]
    pub golden: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeSpec {
    pub n: Vec<u64>,
    #[serde(default = "raw")]
    pub normalization: Normalization,
}

fn raw() -> Normalization {
    Normalization::Raw
}

fn renormalized() -> Normalization {
    Normalization::Renormalized
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeLimitSpec {
    pub schedule: Vec<u64>,
}

/// Perturbations `A + eps * direction` for each `eps`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuitySpec {
    pub n: u64,
    pub epsilons: Vec<f64>,
    #[serde(default = "identity")]
    pub direction: [[f64; 2]; 2],
    #[serde(default = "default_strip_points")]
    pub strip_points: usize,
}

fn identity() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

fn default_strip_points() -> usize {
    64
}

/// Ensemble fields default to [`EnsembleSpec::default`]; the seed comes from
/// the top-level `seed`.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApSpec {
    pub chains: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub window_exponent: f64,
    pub max_redraws: usize,
    pub c_assumed: f64,
}

impl Default for ApSpec {
    fn default() -> Self {
        let e = EnsembleSpec::default();
        Self {
            chains: e.chains,
            n_min: e.n_min,
            n_max: e.n_max,
            mu_min: e.mu_min,
            mu_max: e.mu_max,
            window_exponent: e.window_exponent,
            max_redraws: e.max_redraws,
            c_assumed: 10.0,
        }
    }
}

impl ApSpec {
    pub fn ensemble(&self, seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            chains: self.chains,
            n_min: self.n_min,
            n_max: self.n_max,
            mu_min: self.mu_min,
            mu_max: self.mu_max,
            window_exponent: self.window_exponent,
            seed,
            max_redraws: self.max_redraws,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdtSpec {
    pub n: u64,
    pub m: usize,
    pub kappas: Vec<f64>,
    #[serde(default = "renormalized")]
    pub normalization: Normalization,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdtSpec {
    pub n: u64,
    pub m: usize,
    pub kappa: f64,
    pub shifts: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    pub n: Vec<u64>,
    pub m: usize,
    pub exponent: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LojaSpec {
    pub g: Vec<Term>,
    pub thresholds: Vec<f64>,
    pub m: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L2Spec {
    pub n: Vec<u64>,
    pub m: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub n: u64,
    pub m: usize,
    pub k0: u64,
    #[serde(default = "raw")]
    pub normalization: Normalization,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    pub params: LadderParams,
    /// Run `ladder_verify` with this `C'` against the configured cocycle.
    pub verify_c_prime: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovSpec {
    pub b: Vec<Vec<i64>>,
    pub n: u64,
    pub m: usize,
}

/// `frequency` defaults to `0`, the resonant side.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscontinuitySpec {
    pub k: Vec<i64>,
    pub n: Vec<u64>,
    #[serde(default = "default_discontinuity_grid")]
    pub m: usize,
}

fn default_discontinuity_grid() -> usize {
    4096
}

pub fn config_error(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

pub fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, RunError> {
    s.as_ref()
        .ok_or_else(|| config_error(format!("missing [{name}] section")))
}

pub fn trig_poly(terms: &[Term], d: usize) -> Result<TrigPoly, RunError> {
    if let Some(t) = terms.iter().find(|t| t.k.len() != d) {
        return Err(config_error(format!("mode {:?} does not match dimension {d}", t.k)));
    }
    Ok(TrigPoly::from_terms(
        d,
        terms.iter().map(|t| (t.k.clone(), Complex64::new(t.re, t.im))),
    )?)
}

impl FrequencySpec {
    pub fn build(&self) -> Result<Frequency, RunError> {
        let given = usize::from(self.omega.is_some()) + usize::from(self.rational.is_some()) + usize::from(self.golden);
        if given != 1 {
            return Err(config_error("[frequency] needs exactly one of omega, rational, golden"));
        }
        if self.golden {
            return Ok(Frequency::golden());
        }
        if let Some(r) = &self.rational {
            if r.iter().any(|[_, q]| *q == 0) {
                return Err(config_error("rational frequency with zero denominator"));
            }
            return Ok(Frequency::new(r.iter().map(|[p, q]| *p as f64 / *q as f64).collect())?);
        }
        Ok(Frequency::new(self.omega.clone().unwrap_or_default())?)
    }
}

/// A configured cocycle, keeping the polynomial form when there is one.
pub struct Built {
    pub polynomial: Option<TrigPolyMatrix>,
    pub cocycle: Cocycle<Box<dyn MatrixFunction>>,
}

impl Built {
    pub fn polynomial_cocycle(&self, what: &str) -> Result<Cocycle<TrigPolyMatrix>, RunError> {
        let a = self
            .polynomial
            .clone()
            .ok_or_else(|| config_error(format!("{what} needs a trigonometric polynomial cocycle")))?;
        Ok(Cocycle::new(a, self.cocycle.omega().clone())?)
    }
}

impl CocycleSpec {
    pub fn build(&self, omega: &Frequency, base_dir: &Path) -> Result<Built, RunError> {
        let d = omega.dim();
        let polynomial = match self {
            CocycleSpec::AlmostMathieu { lambda, energy, rho } => {
                if d != 1 {
                    return Err(config_error("almost-mathieu needs a one-dimensional frequency"));
                }
                almost_mathieu(*lambda, *energy, *rho)?
            }
            CocycleSpec::Schrodinger { v, energy, rho } => schrodinger(&trig_poly(v, d)?, *energy, *rho)?,
            CocycleSpec::Jacobi { v, a, energy, rho } => {
                jacobi(&trig_poly(v, d)?, &trig_poly(a, d)?, *energy, omega, *rho)?
            }
            CocycleSpec::JacobiPeriodic {
                v,
                a,
                v_per,
                energy,
                rho,
            } => jacobi_periodic(&trig_poly(v, d)?, &trig_poly(a, d)?, v_per, *energy, omega, *rho)?,
            CocycleSpec::Constant { m, rho } => {
                TrigPolyMatrix::constant(d, Mat2::real(m[0][0], m[0][1], m[1][0], m[1][1]), *rho)?
            }
            CocycleSpec::Matrix { path } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", full.display())))?;
                TrigPolyMatrix::from_json(&text).map_err(|e| config_error(format!("{}: {e}", full.display())))?
            }
            CocycleSpec::Discontinuity { k } => {
                if k.len() != d {
                    return Err(config_error(format!("k = {k:?} does not match dimension {d}")));
                }
                let f: Box<dyn MatrixFunction> = Box::new(discontinuity_example(k.clone())?);
                return Ok(Built {
                    polynomial: None,
                    cocycle: Cocycle::new(f, omega.clone())?,
                });
            }
        };
        let f: Box<dyn MatrixFunction> = Box::new(polynomial.clone());
        Ok(Built {
            polynomial: Some(polynomial),
            cocycle: Cocycle::new(f, omega.clone())?,
        })
    }
}
