//! Equal-weight quadrature rules on `T^d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use crate::torus::SCAN_LIMIT;

/// Default clip level for log integrands, `e^{-700}`.
pub fn default_clip_floor() -> f64 {
    (-700f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuadratureKind {
    /// Nodes `(i + offset) / M` per coordinate. `offset = 1/2` is the
    /// midpoint rule; `offset = 0` is the lattice `(1/M) Z^d`, which every
    /// integer matrix maps into itself.
    UniformGrid {
        points_per_dim: usize,
        #[serde(default = "midpoint")]
        offset: f64,
    },
    /// Halton sequence in the first `d` prime bases, starting at index 1.
    LowDiscrepancy {
        total_points: usize,
    },
    MonteCarlo {
        total_points: usize,
        seed: u64,
    },
}

fn midpoint() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    #[serde(flatten)]
    pub kind: QuadratureKind,
    #[serde(default = "default_clip_floor")]
    pub clip_floor: f64,
}

impl QuadratureSpec {
    pub fn uniform(points_per_dim: usize) -> Self {
        Self::from_kind(QuadratureKind::UniformGrid {
            points_per_dim,
            offset: 0.5,
        })
    }

    pub fn lattice(points_per_dim: usize) -> Self {
        Self::from_kind(QuadratureKind::UniformGrid {
            points_per_dim,
            offset: 0.0,
        })
    }

    pub fn halton(total_points: usize) -> Self {
        Self::from_kind(QuadratureKind::LowDiscrepancy { total_points })
    }

    pub fn monte_carlo(total_points: usize, seed: u64) -> Self {
        Self::from_kind(QuadratureKind::MonteCarlo { total_points, seed })
    }

    fn from_kind(kind: QuadratureKind) -> Self {
        Self {
            kind,
            clip_floor: default_clip_floor(),
        }
    }

    /// `2^12` midpoints for `d = 1`, `2^7` per coordinate for `d = 2`, and
    /// `2^16` Halton points beyond.
    pub fn default_for_dim(d: usize) -> Self {
        match d {
            1 => Self::uniform(1 << 12),
            2 => Self::uniform(1 << 7),
            _ => Self::halton(1 << 16),
        }
    }

    pub fn with_clip_floor(mut self, clip_floor: f64) -> Self {
        self.clip_floor = clip_floor;
        self
    }

    /// Total number of nodes in dimension `d`.
    pub fn len(&self, d: usize) -> Result<usize> {
        let n = match self.kind {
            QuadratureKind::UniformGrid { points_per_dim, .. } => {
                let total = (points_per_dim as f64).powi(d as i32);
                if total > SCAN_LIMIT {
                    return Err(Error::ScanTooLarge {
                        points: total,
                        limit: SCAN_LIMIT,
                    });
                }
                points_per_dim.pow(d as u32)
            }
            QuadratureKind::LowDiscrepancy { total_points } | QuadratureKind::MonteCarlo { total_points, .. } => {
                total_points
            }
        };
        if n == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        Ok(n)
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.kind, QuadratureKind::UniformGrid { .. })
    }

    /// The same rule with half the resolution, used for error indicators.
    pub fn coarsened(&self) -> Option<Self> {
        let kind = match self.kind {
            QuadratureKind::UniformGrid { points_per_dim, offset } if points_per_dim >= 2 => {
                QuadratureKind::UniformGrid {
                    points_per_dim: points_per_dim / 2,
                    offset,
                }
            }
            QuadratureKind::LowDiscrepancy { total_points } if total_points >= 2 => QuadratureKind::LowDiscrepancy {
                total_points: total_points / 2,
            },
            QuadratureKind::MonteCarlo { total_points, seed } if total_points >= 2 => QuadratureKind::MonteCarlo {
                total_points: total_points / 2,
                seed,
            },
            _ => return None,
        };
        Some(Self { kind, ..*self })
    }

    /// All nodes, node-major with stride `d`.
    pub fn nodes(&self, d: usize) -> Result<Vec<f64>> {
        let n = self.len(d)?;
        let mut out = vec![0.0; n * d];
        match self.kind {
            QuadratureKind::UniformGrid { points_per_dim, offset } => {
                for (i, x) in out.chunks_mut(d).enumerate() {
                    let mut cell = i;
                    // the last coordinate varies fastest
                    for xj in x.iter_mut().rev() {
                        *xj = ((cell % points_per_dim) as f64 + offset) / points_per_dim as f64;
                        cell /= points_per_dim;
                    }
                }
            }
            QuadratureKind::LowDiscrepancy { .. } => {
                let bases = first_primes(d);
                for (i, x) in out.chunks_mut(d).enumerate() {
                    for (xj, &b) in x.iter_mut().zip(&bases) {
                        *xj = radical_inverse(i as u64 + 1, b);
                    }
                }
            }
            QuadratureKind::MonteCarlo { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for v in out.iter_mut() {
                    *v = rng.random::<f64>();
                }
            }
        }
        Ok(out)
    }

    /// Equal-weight average of `f` over the nodes, dropping nodes where `f`
    /// returns `None`.
    ///
    /// Nodes are evaluated in parallel but summed sequentially in node order,
    /// so the result does not depend on the thread count.
    pub fn integrate<F>(&self, d: usize, f: F) -> Result<Integral>
    where
        F: Fn(&[f64]) -> Option<f64> + Sync,
    {
        let nodes = self.nodes(d)?;
        let values: Vec<Option<f64>> = nodes.par_chunks(d).map(&f).collect();
        Ok(Integral::from_samples(&values, !self.is_grid()))
    }
}

/// Result of an equal-weight average with excised nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    /// Mean over retained nodes, `NaN` if none were retained.
    pub mean: f64,
    pub retained: usize,
    pub total: usize,
    pub stderr: Option<f64>,
}

impl Integral {
    pub fn from_samples(values: &[Option<f64>], with_stderr: bool) -> Self {
        let mut sum = NeumaierSum::new();
        let mut retained = 0usize;
        for v in values.iter().flatten() {
            sum.add(*v);
            retained += 1;
        }
        let mean = if retained > 0 {
            sum.value() / retained as f64
        } else {
            f64::NAN
        };
        let stderr = (with_stderr && retained > 1).then(|| {
            let var = values
                .iter()
                .flatten()
                .map(|v| (v - mean).powi(2))
                .collect::<NeumaierSum>()
                .value()
                / (retained - 1) as f64;
            (var / retained as f64).sqrt()
        });
        Self {
            mean,
            retained,
            total: values.len(),
            stderr,
        }
    }

    pub fn excised_mass(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.total - self.retained) as f64 / self.total as f64
        }
    }
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| !c.is_multiple_of(p))
        {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// Van der Corput radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut scale = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * scale;
        i /= b;
        scale *= inv;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_nodes_and_lattice() {
        let q = QuadratureSpec::uniform(4);
        assert_eq!(q.nodes(1).unwrap(), vec![0.125, 0.375, 0.625, 0.875]);
        let l = QuadratureSpec::lattice(2);
        assert_eq!(l.nodes(2).unwrap(), vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.5, 0.5]);
        assert_eq!(QuadratureSpec::default_for_dim(2).len(2).unwrap(), 1 << 14);
        assert!(QuadratureSpec::uniform(1 << 20).len(2).is_err());
    }

    #[test]
    fn halton_first_points() {
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
        let h = QuadratureSpec::halton(3).nodes(2).unwrap();
        let expect = [0.5, 1.0 / 3.0, 0.25, 2.0 / 3.0, 0.75, 1.0 / 9.0];
        for (a, b) in h.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn integrates_trigonometric_moments() {
        // midpoint rule is exact for trig polynomials of degree < M
        let q = QuadratureSpec::uniform(64);
        let r = q
            .integrate(2, |x| Some((std::f64::consts::TAU * (x[0] + 2.0 * x[1])).cos().powi(2)))
            .unwrap();
        assert!((r.mean - 0.5).abs() < 1e-14);
        assert_eq!(r.stderr, None);

        let h = QuadratureSpec::halton(1 << 14)
            .integrate(3, |x| Some(x[0] * x[1] * x[2]))
            .unwrap();
        assert!((h.mean - 0.125).abs() < 1e-3);
        assert!(h.stderr.is_some());
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let a = QuadratureSpec::monte_carlo(100, 7).nodes(2).unwrap();
        let b = QuadratureSpec::monte_carlo(100, 7).nodes(2).unwrap();
        let c = QuadratureSpec::monte_carlo(100, 8).nodes(2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn excision_accounting() {
        let q = QuadratureSpec::uniform(8);
        let r = q.integrate(1, |x| (x[0] > 0.5).then_some(2.0)).unwrap();
        assert_eq!(r.mean, 2.0);
        assert_eq!(r.excised_mass(), 0.5);
    }

    #[test]
    fn spec_serde_shape() {
        let q: QuadratureSpec = serde_json::from_str(r#"{"kind":"uniform-grid","points_per_dim":16}"#).unwrap();
        assert_eq!(q, QuadratureSpec::uniform(16));
        let m: QuadratureSpec =
            serde_json::from_str(r#"{"kind":"monte-carlo","total_points":10,"seed":3,"clip_floor":1e-10}"#).unwrap();
        assert_eq!(m.clip_floor, 1e-10);
    }
}
