//! Finite-scale Lyapunov exponents `L'_N = int (1/N) ln ||A_N(x)|| dx` and
//! their determinant-renormalized counterparts `L_N`.
//!
//! Nodes whose iterate underflows (or hits a singular point of the
//! renormalized cocycle) are excised and their mass reported; the value is
//! the mean over the retained nodes.

mod quadrature;

use serde::{Deserialize, Serialize};

pub use quadrature::{default_clip_floor, Integral, QuadratureKind, QuadratureSpec};

use crate::cocycle::{strip_norm, Cocycle, MatrixFunction, Renormalized, TrigPolyMatrix, UNDERFLOW_FLOOR};
use crate::error::{Error, Result};
use crate::format::{sci, sci_opt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LEEstimate {
    #[serde(rename = "N")]
    pub n: u64,
    pub value: f64,
    pub excised_mass: f64,
    pub quad: QuadratureSpec,
    pub stderr: Option<f64>,
}

impl LEEstimate {
    pub const CSV_HEADER: &'static str = "N,value,excised_mass,stderr";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.n,
            sci(self.value),
            sci(self.excised_mass),
            sci_opt(self.stderr)
        )
    }
}

/// CSV document for a table of estimates, header included.
pub fn estimates_csv(rows: &[LEEstimate]) -> String {
    let mut out = String::from(LEEstimate::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// `L'_N(A, w)` by quadrature of `(1/N) ln ||A_N(x)||`.
pub fn l_prime_n<F: MatrixFunction>(c: &Cocycle<F>, n: u64, quad: &QuadratureSpec) -> Result<LEEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let integral = quad.integrate(c.dim(), |x| c.iterate_log_norm(n, x).finite())?;
    if integral.retained == 0 {
        return Err(Error::AllSamplesSingular);
    }
    Ok(LEEstimate {
        n,
        value: integral.mean,
        excised_mass: integral.excised_mass(),
        quad: *quad,
        stderr: integral.stderr,
    })
}

/// `L_N(A, w) = L'_N(A / |det A|^{1/2}, w)`.
pub fn l_n_renormalized<F: MatrixFunction>(c: &Cocycle<F>, n: u64, quad: &QuadratureSpec) -> Result<LEEstimate> {
    let renormalized = Cocycle::new(Renormalized::with_floor(c.matrix(), UNDERFLOW_FLOOR), c.omega().clone())?;
    l_prime_n(&renormalized, n, quad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetLogIntegral {
    pub value: f64,
    /// Fraction of nodes where `|det|` was raised to the clip floor.
    pub clipped_mass: f64,
    /// `|Q - Q_coarse|` for deterministic rules, the standard error for
    /// Monte Carlo.
    pub error_estimate: f64,
}

/// `int ln |det A(x)| dx`, with `|det|` clipped below at `quad.clip_floor`.
pub fn det_log_integral<F: MatrixFunction>(a: &F, quad: &QuadratureSpec) -> Result<DetLogIntegral> {
    let floor = quad.clip_floor;
    let log_det = |x: &[f64]| -> (f64, bool) {
        match a.try_eval(x) {
            Ok(m) => {
                let det = m.det().norm();
                if det < floor {
                    (floor.ln(), true)
                } else {
                    (det.ln(), false)
                }
            }
            Err(_) => (floor.ln(), true),
        }
    };
    let fine = quad.integrate(a.dim(), |x| Some(log_det(x).0))?;
    let clipped = quad.integrate(a.dim(), |x| Some(if log_det(x).1 { 1.0 } else { 0.0 }))?;
    let error_estimate = match (quad.kind, quad.coarsened()) {
        (QuadratureKind::MonteCarlo { .. }, _) => fine.stderr.unwrap_or(f64::NAN),
        (_, Some(coarse)) => (fine.mean - coarse.integrate(a.dim(), |x| Some(log_det(x).0))?.mean).abs(),
        (_, None) => f64::NAN,
    };
    Ok(DetLogIntegral {
        value: fine.mean,
        clipped_mass: clipped.mean,
        error_estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub table: Vec<LEEstimate>,
    /// The value at the largest scale.
    pub limit: f64,
    /// `|L'_{N_{i+1}} - L'_{N_i}|` along the schedule.
    pub increments: Vec<f64>,
}

/// `L'_N` along an increasing schedule; the last entry is the limit proxy.
pub fn le_extrapolate<F: MatrixFunction>(
    c: &Cocycle<F>,
    schedule: &[u64],
    quad: &QuadratureSpec,
) -> Result<Extrapolation> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "schedule must be non-empty and strictly increasing".into(),
        ));
    }
    let table = schedule
        .iter()
        .map(|&n| l_prime_n(c, n, quad))
        .collect::<Result<Vec<_>>>()?;
    let increments = table.windows(2).map(|w| (w[1].value - w[0].value).abs()).collect();
    Ok(Extrapolation {
        limit: table.last().expect("non-empty").value,
        table,
        increments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub distance: f64,
    pub strip_samples: usize,
    pub difference: f64,
    /// Largest difference among rows at no greater distance.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityTable {
    #[serde(rename = "N")]
    pub n: u64,
    pub base_value: f64,
    /// Rows sorted by distance.
    pub rows: Vec<ContinuityRow>,
    /// `max difference / distance` over rows with positive distance.
    pub max_ratio: f64,
}

/// `(||A - B||_rho, |L_N(A) - L_N(B)|)` for each perturbation `B`.
pub fn finite_scale_modulus(
    c: &Cocycle<TrigPolyMatrix>,
    n: u64,
    perturbations: &[TrigPolyMatrix],
    quad: &QuadratureSpec,
    strip_points: usize,
) -> Result<ContinuityTable> {
    let a = c.matrix();
    let base = l_n_renormalized(c, n, quad)?;
    let mut rows = Vec::with_capacity(perturbations.len());
    for b in perturbations {
        if b.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let dist = strip_norm(a, b, a.rho().min(b.rho()), strip_points)?;
        let value = l_n_renormalized(&Cocycle::new(b.clone(), c.omega().clone())?, n, quad)?.value;
        rows.push(ContinuityRow {
            distance: dist.value,
            strip_samples: dist.samples,
            difference: (value - base.value).abs(),
            envelope: 0.0,
        });
    }
    rows.sort_by(|p, q| p.distance.total_cmp(&q.distance));
    let mut running = 0.0f64;
    for r in &mut rows {
        running = running.max(r.difference);
        r.envelope = running;
    }
    let max_ratio = rows
        .iter()
        .filter(|r| r.distance > 0.0)
        .map(|r| r.difference / r.distance)
        .fold(0.0, f64::max);
    Ok(ContinuityTable {
        n,
        base_value: base.value,
        rows,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{LN_2, PI, TAU};

    use num_complex::Complex64;

    use super::*;
    use crate::cocycle::{almost_mathieu, discontinuity_example, jacobi, schrodinger, Mat2, TrigPoly};
    use crate::torus::Frequency;

    fn freq(w: f64) -> Frequency {
        Frequency::new(vec![w]).unwrap()
    }

    fn diag_const(p: f64, q: f64) -> TrigPolyMatrix {
        TrigPolyMatrix::constant(1, Mat2::real(p, 0.0, 0.0, q), 0.5).unwrap()
    }

    #[test]
    fn constant_diagonal_is_ln2() {
        let c = Cocycle::new(diag_const(2.0, 0.5), Frequency::golden()).unwrap();
        let e = l_prime_n(&c, 17, &QuadratureSpec::uniform(64)).unwrap();
        assert!((e.value - LN_2).abs() < 1e-12);
        assert_eq!(e.excised_mass, 0.0);
        assert_eq!(e.stderr, None);
    }

    #[test]
    fn discontinuity_resonant_value() {
        let c = Cocycle::new(discontinuity_example(vec![1]).unwrap(), freq(0.0)).unwrap();
        let oracle = 2.0 / PI * (-TAU).exp();
        for n in [1, 5] {
            let e = l_prime_n(&c, n, &QuadratureSpec::uniform(4096)).unwrap();
            assert!((e.value - oracle).abs() < 1e-6, "{}", e.value);
        }
    }

    #[test]
    fn renormalized_relations() {
        let s = almost_mathieu(2.0, 0.3, 0.5).unwrap();
        let c = Cocycle::new(s.clone(), Frequency::golden()).unwrap();
        let q = QuadratureSpec::uniform(256);
        let a = l_prime_n(&c, 20, &q).unwrap().value;
        let b = l_n_renormalized(&c, 20, &q).unwrap().value;
        assert!((a - b).abs() < 1e-13);
        assert!(det_log_integral(&s, &q).unwrap().value.abs() < 1e-15);

        let free3 = schrodinger(&TrigPoly::zero(1), 3.0, 0.5)
            .unwrap()
            .scale(Complex64::new(3.0, 0.0));
        let c3 = Cocycle::new(free3, Frequency::golden()).unwrap();
        let lp = l_prime_n(&c3, 30, &q).unwrap().value;
        let ln = l_n_renormalized(&c3, 30, &q).unwrap().value;
        assert!((lp - ln - 3f64.ln()).abs() < 1e-13);

        let e = diag_const(std::f64::consts::E, std::f64::consts::E);
        assert!((det_log_integral(&e, &q).unwrap().value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_det_log_integral() {
        let a = TrigPoly::cosine(vec![1], 1.0);
        let j = jacobi(&TrigPoly::zero(1), &a, 0.5, &Frequency::golden(), 0.5).unwrap();
        let r = det_log_integral(&j, &QuadratureSpec::uniform(1 << 14)).unwrap();
        assert!((r.value + 2.0 * LN_2).abs() < 1e-3, "{}", r.value);
        assert_eq!(r.clipped_mass, 0.0);
        assert!(r.error_estimate > 0.0 && r.error_estimate < 1e-3);
    }

    #[test]
    fn extrapolation_constant_and_elliptic() {
        let c = Cocycle::new(diag_const(3.0, 1.0 / 3.0), Frequency::golden()).unwrap();
        let ex = le_extrapolate(&c, &[1, 2, 4], &QuadratureSpec::uniform(16)).unwrap();
        assert!(ex.increments.iter().all(|&d| d < 1e-14));
        assert!((ex.limit - 3f64.ln()).abs() < 1e-14);

        let free = Cocycle::new(schrodinger(&TrigPoly::zero(1), 1.0, 0.5).unwrap(), Frequency::golden()).unwrap();
        let ex = le_extrapolate(&free, &[100, 200, 400, 800], &QuadratureSpec::uniform(64)).unwrap();
        assert!(ex.limit <= 0.02, "{}", ex.limit);
        assert!(le_extrapolate(&free, &[4, 4], &QuadratureSpec::uniform(8)).is_err());
    }

    #[test]
    fn continuity_table() {
        let a = diag_const(2.0, 0.5);
        let c = Cocycle::new(a.clone(), Frequency::golden()).unwrap();
        let eps = 1e-3;
        let bump = |e: f64| a.add(&diag_const(e, e)).unwrap();
        let t = finite_scale_modulus(
            &c,
            10,
            &[a.clone(), bump(eps), bump(eps / 2.0)],
            &QuadratureSpec::uniform(16),
            16,
        )
        .unwrap();
        assert_eq!(t.rows[0].distance, 0.0);
        assert_eq!(t.rows[0].difference, 0.0);
        assert!((t.rows[2].distance - eps).abs() < 1e-15);
        assert!(t.rows[2].difference <= eps);
        assert!(t.rows[1].difference < t.rows[2].difference);
        assert!(t.max_ratio <= 1.0);
        assert!(t.rows.windows(2).all(|w| w[0].envelope <= w[1].envelope));
    }

    #[test]
    fn csv_header_and_rows() {
        let c = Cocycle::new(diag_const(2.0, 0.5), Frequency::golden()).unwrap();
        let e = l_prime_n(&c, 3, &QuadratureSpec::uniform(4)).unwrap();
        let csv = estimates_csv(&[e]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("N,value,excised_mass,stderr"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "3");
        assert!((row[1].parse::<f64>().unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(row[3], "");
    }
}
