//! Separable Gaussian prior over candidate × stage scores.
//!
//! Candidates and stages each get a latent point in a unit hypercube. A
//! squared-exponential kernel over those points gives the candidate
//! covariance `X` (m×m) and the stage covariance `Sigma` (n×n); the joint
//! prior on the flattened score vector is `N(0, Sigma ⊗ X)`.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, JitterPolicy, LowerTriangular, Matrix};
use crate::rng::{self, derive_seed, STAGE_LATENT_SALT};

/// Hyperparameters of the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Initial candidates.
    pub m: usize,
    /// Stages.
    pub n: usize,
    pub d_x: usize,
    pub d_s: usize,
    pub ell_x: f64,
    pub ell_s: f64,
    pub sigma_x: f64,
    pub sigma_s: f64,
    pub seed: u64,
}

impl Default for PriorSpec {
    /// Base parameters: 500 candidates, three stages, `d_x = 8`, `d_s = 1`,
    /// `ell_x = 1`, `ell_s = 0.2`, unit amplitudes.
    fn default() -> Self {
        Self {
            m: 500,
            n: 3,
            d_x: 8,
            d_s: 1,
            ell_x: 1.0,
            ell_s: 0.2,
            sigma_x: 1.0,
            sigma_s: 1.0,
            seed: 0,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < self.n {
            return Err(Error::InvalidSpec(format!(
                "need m ≥ n ≥ 1, got m={} n={}",
                self.m, self.n
            )));
        }
        if self.d_x < 1 || self.d_s < 1 {
            return Err(Error::InvalidSpec(format!(
                "latent dimensions must be ≥ 1, got d_x={} d_s={}",
                self.d_x, self.d_s
            )));
        }
        for (name, v) in [
            ("ell_x", self.ell_x),
            ("ell_s", self.ell_s),
            ("sigma_x", self.sigma_x),
            ("sigma_s", self.sigma_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn candidate_seed(&self) -> u64 {
        self.seed
    }

    pub fn stage_seed(&self) -> u64 {
        derive_seed(self.seed, STAGE_LATENT_SALT)
    }
}

/// Points in `[0,1]^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentPoints {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl LatentPoints {
    /// Panics if any point has the wrong dimension or leaves the unit cube.
    pub fn new(points: Vec<Vec<f64>>, dim: usize) -> Self {
        assert!(dim >= 1, "latent dimension must be ≥ 1");
        for p in &points {
            assert_eq!(p.len(), dim, "latent point has wrong dimension");
            assert!(
                p.iter().all(|c| (0.0..=1.0).contains(c)),
                "latent coordinate outside [0,1]"
            );
        }
        Self { points, dim }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.points[i]
    }
}

/// `count` points with independent Uniform[0,1] coordinates.
pub fn sample_latent_points<R: Rng + ?Sized>(count: usize, dim: usize, rng: &mut R) -> LatentPoints {
    let points = (0..count)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    LatentPoints { points, dim }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Covariance matrix from the squared-exponential kernel
/// `sigma² · exp(-‖p_i - p_j‖² / (2 · length_scale²))`.
///
/// The result is exactly symmetric with diagonal exactly `sigma²`.
pub fn build_sq_exp_covariance(points: &LatentPoints, sigma: f64, length_scale: f64) -> Matrix {
    let k = points.len();
    let var = sigma * sigma;
    let denom = 2.0 * length_scale * length_scale;
    let mut cov = Matrix::zeros(k, k);
    for i in 0..k {
        cov[(i, i)] = var;
        for j in (i + 1)..k {
            let v = var * (-squared_distance(points.get(i), points.get(j)) / denom).exp();
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Realized prior: latent samples plus the two covariance factors.
///
/// Immutable once built; the Cholesky factor of `X` is computed on first
/// use and cached, so a `PriorModel` can be shared across threads.
#[derive(Debug)]
pub struct PriorModel {
    spec: PriorSpec,
    candidate_latents: LatentPoints,
    stage_latents: LatentPoints,
    candidate_cov: Matrix,
    stage_cov: Matrix,
    candidate_chol: OnceLock<std::result::Result<LowerTriangular, (usize, f64)>>,
}

impl Clone for PriorModel {
    fn clone(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            candidate_latents: self.candidate_latents.clone(),
            stage_latents: self.stage_latents.clone(),
            candidate_cov: self.candidate_cov.clone(),
            stage_cov: self.stage_cov.clone(),
            candidate_chol: self.candidate_chol.clone(),
        }
    }
}

impl PartialEq for PriorModel {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.candidate_latents == other.candidate_latents
            && self.stage_latents == other.stage_latents
            && self.candidate_cov == other.candidate_cov
            && self.stage_cov == other.stage_cov
    }
}

/// Samples latents from `spec.seed` and builds the prior.
///
/// Candidate latents come from `spec.seed` and stage latents from a derived
/// seed, so changing `m` leaves the stage latents untouched (and the first
/// `m` candidates of a larger prior coincide with a smaller one).
pub fn build_prior(spec: &PriorSpec) -> Result<PriorModel> {
    spec.validate()?;
    let mut cand_rng = rng::seeded(spec.candidate_seed());
    let mut stage_rng = rng::seeded(spec.stage_seed());
    let candidate_latents = sample_latent_points(spec.m, spec.d_x, &mut cand_rng);
    let stage_latents = sample_latent_points(spec.n, spec.d_s, &mut stage_rng);
    PriorModel::from_latents(spec.clone(), candidate_latents, stage_latents)
}

impl PriorModel {
    /// Builds a prior from explicit latent samples.
    pub fn from_latents(
        spec: PriorSpec,
        candidate_latents: LatentPoints,
        stage_latents: LatentPoints,
    ) -> Result<Self> {
        spec.validate()?;
        if candidate_latents.len() != spec.m || candidate_latents.dim() != spec.d_x {
            return Err(Error::InvalidSpec(format!(
                "candidate latents are {}×{}, spec wants {}×{}",
                candidate_latents.len(),
                candidate_latents.dim(),
                spec.m,
                spec.d_x
            )));
        }
        if stage_latents.len() != spec.n || stage_latents.dim() != spec.d_s {
            return Err(Error::InvalidSpec(format!(
                "stage latents are {}×{}, spec wants {}×{}",
                stage_latents.len(),
                stage_latents.dim(),
                spec.n,
                spec.d_s
            )));
        }
        let candidate_cov = build_sq_exp_covariance(&candidate_latents, spec.sigma_x, spec.ell_x);
        let stage_cov = build_sq_exp_covariance(&stage_latents, spec.sigma_s, spec.ell_s);
        Ok(Self {
            spec,
            candidate_latents,
            stage_latents,
            candidate_cov,
            stage_cov,
            candidate_chol: OnceLock::new(),
        })
    }

    /// Same candidates, different stage latents.
    pub fn with_stage_latents(&self, stage_latents: LatentPoints) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.n = stage_latents.len();
        spec.d_s = stage_latents.dim();
        let mut out = Self::from_latents(spec, self.candidate_latents.clone(), stage_latents)?;
        // X is unchanged, so the factor can be reused.
        out.candidate_chol = self.candidate_chol.clone();
        Ok(out)
    }

    pub fn spec(&self) -> &PriorSpec {
        &self.spec
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn candidate_latents(&self) -> &LatentPoints {
        &self.candidate_latents
    }

    pub fn stage_latents(&self) -> &LatentPoints {
        &self.stage_latents
    }

    /// `X`, the m×m candidate covariance.
    pub fn candidate_cov(&self) -> &Matrix {
        &self.candidate_cov
    }

    /// `Sigma`, the n×n stage covariance.
    pub fn stage_cov(&self) -> &Matrix {
        &self.stage_cov
    }

    /// Cholesky factor of `X` under the default jitter policy (cached).
    pub fn candidate_cholesky(&self) -> Result<&LowerTriangular> {
        self.candidate_chol
            .get_or_init(|| {
                cholesky_factor(&self.candidate_cov, JitterPolicy::default()).map_err(|e| match e {
                    Error::NotPositiveDefinite { pivot, jitter } => (pivot, jitter),
                    _ => unreachable!("X is square and nonempty"),
                })
            })
            .as_ref()
            .map_err(|&(pivot, jitter)| Error::NotPositiveDefinite { pivot, jitter })
    }
}

/// `(‖s_2 − s_1‖, ‖s_3 − s_1‖)` for the first three stage latents.
pub fn stage_distance_features(stage_latents: &LatentPoints) -> Result<(f64, f64)> {
    if stage_latents.len() < 3 {
        return Err(Error::TooFewStages(stage_latents.len()));
    }
    let s1 = stage_latents.get(0);
    let d12 = squared_distance(stage_latents.get(1), s1).sqrt();
    let d13 = squared_distance(stage_latents.get(2), s1).sqrt();
    Ok((d12, d13))
}
