//! Built-in reference metrics with known curvature behavior.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{Domain, FinslerMetric};
use crate::scalar::{dot, norm2, Scalar};

/// Curvature class of a metric at the sampled points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Generic,
    Scalar,
    Constant,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Generic => "generic",
            Verdict::Scalar => "scalar",
            Verdict::Constant => "constant",
        })
    }
}

/// Names accepted by [`CatalogMetric::from_key`].
pub const CATALOG_KEYS: [&str; 5] = [
    "euclidean",
    "riemannian_space_form",
    "funk",
    "randers_pflat",
    "perturbed_riemannian",
];

/// Descriptive record of a catalog metric.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub dimension: usize,
    pub domain: Domain,
    pub params: BTreeMap<String, f64>,
    pub expected_verdict: Verdict,
    pub expected_k: Option<f64>,
    pub provenance: &'static str,
}

/// `L = sqrt(a_ij(x) yⁱ yʲ)` with `a = δ + ε S(x)`, `S` a seeded symmetric
/// matrix of trigonometric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedRiemannian {
    n: usize,
    seed: u64,
    epsilon: f64,
    /// Per upper-triangular entry: `(amplitude, frequency vector, phase)` terms.
    terms: Vec<Vec<(f64, Vec<f64>, f64)>>,
}

const PERTURBATION_TERMS: usize = 2;

impl PerturbedRiemannian {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                // Diagonal amplitudes sum to ≤ 1 and off-diagonal ones to ≤ 1/(n−1),
                // so with ε < 1/2 the matrix stays diagonally dominant.
                let budget = if i == j { 1.0 } else { 1.0 / (n.max(2) - 1) as f64 };
                let weights: Vec<f64> = (0..PERTURBATION_TERMS).map(|_| rng.random_range(0.3..1.0)).collect();
                let total: f64 = weights.iter().sum();
                let entry = weights
                    .iter()
                    .map(|w| {
                        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                        let freq = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                        let phase = rng.random_range(0.0..std::f64::consts::TAU);
                        (sign * budget * w / total, freq, phase)
                    })
                    .collect();
                terms.push(entry);
            }
        }
        PerturbedRiemannian {
            n,
            seed,
            epsilon: 0.3,
            terms,
        }
    }

    fn entry_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    /// Row-major `a_ij(x)`.
    pub fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.n;
        let mut upper = Vec::with_capacity(self.terms.len());
        for (idx, entry) in self.terms.iter().enumerate() {
            let mut s = S::zero();
            for (amp, freq, phase) in entry {
                let mut arg = S::from_f64(*phase);
                for (xk, wk) in x.iter().zip(freq) {
                    arg = arg + xk.scale(*wk);
                }
                s = s + arg.sin().scale(*amp);
            }
            upper.push((idx, s));
        }
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s = upper[self.entry_index(i, j)].1.scale(self.epsilon);
                a.push(if i == j { s.add_f64(1.0) } else { s });
            }
        }
        a
    }
}

/// The catalog metrics, each implementing [`FinslerMetric`].
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogMetric {
    /// `L = |y|`.
    Euclidean { n: usize },
    /// Conformal model `a_ij = δ_ij / (1 + κ|x|²/4)²` of sectional curvature `κ`.
    SpaceForm { n: usize, kappa: f64 },
    /// Funk metric on the unit ball, flag curvature `−1/4`.
    Funk { n: usize },
    /// `L = |y| + ⟨x, y⟩` on the unit ball, projectively flat.
    RandersPflat { n: usize },
    PerturbedRiemannian(PerturbedRiemannian),
}

pub fn euclidean(n: usize) -> CatalogMetric {
    CatalogMetric::Euclidean { n }
}

pub fn riemannian_space_form(n: usize, kappa: f64) -> CatalogMetric {
    CatalogMetric::SpaceForm { n, kappa }
}

pub fn funk(n: usize) -> CatalogMetric {
    CatalogMetric::Funk { n }
}

pub fn randers_pflat(n: usize) -> CatalogMetric {
    CatalogMetric::RandersPflat { n }
}

pub fn perturbed_riemannian(n: usize, seed: u64) -> CatalogMetric {
    CatalogMetric::PerturbedRiemannian(PerturbedRiemannian::new(n, seed))
}

impl CatalogMetric {
    /// Builds a catalog metric from its key and named parameters
    /// (`kappa` for the space form, `seed` for the perturbed metric).
    pub fn from_key(key: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match key {
            "riemannian_space_form" => &["kappa"],
            "perturbed_riemannian" => &["seed"],
            _ => &[],
        };
        if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("catalog metric `{key}` takes no parameter `{extra}`")));
        }
        if n == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(match key {
            "euclidean" => euclidean(n),
            "riemannian_space_form" => riemannian_space_form(n, params.get("kappa").copied().unwrap_or(1.0)),
            "funk" => funk(n),
            "randers_pflat" => randers_pflat(n),
            "perturbed_riemannian" => {
                let seed = params.get("seed").copied().unwrap_or(0.0);
                if seed < 0.0 || seed.fract() != 0.0 {
                    return Err(Error::Config(format!("seed must be a nonnegative integer, got {seed}")));
                }
                perturbed_riemannian(n, seed as u64)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown catalog metric `{other}` (expected one of {})",
                    CATALOG_KEYS.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogMetric::Euclidean { .. } => "euclidean",
            CatalogMetric::SpaceForm { .. } => "riemannian_space_form",
            CatalogMetric::Funk { .. } => "funk",
            CatalogMetric::RandersPflat { .. } => "randers_pflat",
            CatalogMetric::PerturbedRiemannian(_) => "perturbed_riemannian",
        }
    }

    pub fn entry(&self) -> CatalogEntry {
        let mut params = BTreeMap::new();
        let (expected_verdict, expected_k, provenance) = match self {
            CatalogMetric::Euclidean { .. } => (Verdict::Constant, Some(0.0), "flat: every curvature block vanishes"),
            CatalogMetric::SpaceForm { kappa, .. } => {
                params.insert("kappa".to_string(), *kappa);
                (
                    Verdict::Constant,
                    Some(*kappa),
                    "conformally flat Riemannian model of constant sectional curvature kappa",
                )
            }
            CatalogMetric::Funk { .. } => (Verdict::Constant, Some(-0.25), "Funk metric of the unit ball, flag curvature -1/4"),
            CatalogMetric::RandersPflat { .. } => (
                Verdict::Scalar,
                None,
                "projectively flat Randers metric: scalar flag curvature that varies with the direction",
            ),
            CatalogMetric::PerturbedRiemannian(p) => {
                params.insert("seed".to_string(), p.seed as f64);
                (Verdict::Generic, None, "generic Riemannian metric, not isotropic")
            }
        };
        CatalogEntry {
            name: self.name(),
            dimension: self.dimension(),
            domain: self.domain(),
            params,
            expected_verdict,
            expected_k,
            provenance,
        }
    }

    /// Row-major `a_ij(x)` for the Riemannian entries.
    pub fn riemannian_matrix(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.dimension();
        match self {
            CatalogMetric::Euclidean { .. } => Some(identity_scaled(n, 1.0)),
            CatalogMetric::SpaceForm { kappa, .. } => Some(identity_scaled(n, conformal_factor(*kappa, x))),
            CatalogMetric::PerturbedRiemannian(p) => Some(p.matrix(x)),
            _ => None,
        }
    }

    /// Equivalent DSL source, for metrics the expression language can state.
    pub fn dsl_source(&self) -> Option<String> {
        match self {
            CatalogMetric::Euclidean { .. } => Some("sqrt(norm2(y))".into()),
            CatalogMetric::SpaceForm { .. } => Some("sqrt(norm2(y)) / (1 + kappa/4 * norm2(x))".into()),
            CatalogMetric::Funk { .. } => {
                Some("(sqrt((1-norm2(x))*norm2(y)+dot(x,y)^2)+dot(x,y))/(1-norm2(x))".into())
            }
            CatalogMetric::RandersPflat { .. } => Some("sqrt(norm2(y)) + dot(x,y)".into()),
            CatalogMetric::PerturbedRiemannian(_) => None,
        }
    }
}

fn identity_scaled(n: usize, s: f64) -> Vec<f64> {
    (0..n * n).map(|k| if k / n == k % n { s } else { 0.0 }).collect()
}

fn conformal_factor<S: Scalar>(kappa: f64, x: &[S]) -> S {
    norm2(x).scale(kappa / 4.0).add_f64(1.0).powi(-2)
}

impl FinslerMetric for CatalogMetric {
    fn dimension(&self) -> usize {
        match self {
            CatalogMetric::Euclidean { n }
            | CatalogMetric::SpaceForm { n, .. }
            | CatalogMetric::Funk { n }
            | CatalogMetric::RandersPflat { n } => *n,
            CatalogMetric::PerturbedRiemannian(p) => p.n,
        }
    }

    fn domain(&self) -> Domain {
        match self {
            CatalogMetric::SpaceForm { kappa, .. } if *kappa < 0.0 => Domain::Ball {
                radius: 2.0 / kappa.abs().sqrt(),
            },
            CatalogMetric::Funk { .. } | CatalogMetric::RandersPflat { .. } => Domain::Ball { radius: 1.0 },
            _ => Domain::Whole,
        }
    }

    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        Ok(match self {
            CatalogMetric::Euclidean { .. } => norm2(y).sqrt(),
            CatalogMetric::SpaceForm { kappa, .. } => (norm2(y) * conformal_factor(*kappa, x)).sqrt(),
            CatalogMetric::Funk { .. } => {
                let xy = dot(x, y);
                let w = (-norm2(x)).add_f64(1.0);
                ((w.clone() * norm2(y) + xy.square()).sqrt() + xy) / w
            }
            CatalogMetric::RandersPflat { .. } => norm2(y).sqrt() + dot(x, y),
            CatalogMetric::PerturbedRiemannian(p) => {
                let a = p.matrix(x);
                let n = p.n;
                let mut q = S::zero();
                for i in 0..n {
                    for j in 0..n {
                        q = q + a[i * n + j].clone() * y[i].clone() * y[j].clone();
                    }
                }
                q.sqrt()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_is_symmetric_and_positive() {
        let m = perturbed_riemannian(3, 7);
        let a = m.riemannian_matrix(&[0.1, -0.3, 0.2]).unwrap();
        for i in 0..3 {
            assert_eq!(a[i * 3 + (i + 1) % 3], a[((i + 1) % 3) * 3 + i]);
            let off: f64 = (0..3).filter(|&j| j != i).map(|j| a[i * 3 + j].abs()).sum();
            assert!(a[i * 3 + i] - off > 0.39);
        }
        assert_eq!(m, perturbed_riemannian(3, 7));
        assert_ne!(m, perturbed_riemannian(3, 8));
    }

    #[test]
    fn funk_reduces_to_euclidean_at_origin() {
        let l: f64 = funk(3).eval(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(l, 1.0);
    }

    #[test]
    fn unknown_key_and_parameter_are_rejected() {
        assert!(CatalogMetric::from_key("hilbert", 3, &BTreeMap::new()).is_err());
        let params = BTreeMap::from([("kappa".to_string(), 1.0)]);
        assert!(CatalogMetric::from_key("funk", 3, &params).is_err());
        assert!(CatalogMetric::from_key("riemannian_space_form", 3, &params).is_ok());
    }
}
