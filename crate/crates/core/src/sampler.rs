//! Lazy stage-wise sampling from `N(mu, Sigma ⊗ X)`.
//!
//! Only the scores that a pipeline actually needs are drawn. The state kept
//! between stages is
//!
//! * the residual stage covariance for the stages not yet sampled,
//! * the conditional mean of every surviving candidate at every remaining
//!   stage, stored stage-major,
//! * the rows of the Cholesky factor `L` of `X` that belong to survivors.
//!
//! Because the covariance stays separable after conditioning on a whole
//! stage block, the update is a rank-one Schur complement on the small
//! stage covariance plus a Kronecker-structured mean shift:
//!
//! ```text
//! mu_rest' = mu_rest + (Sigma[rest, 0] / Sigma[0, 0]) ⊗ (y - mu_head)
//! Sigma'   = Sigma[rest, rest] - Sigma[rest, 0] Sigma[0, rest] / Sigma[0, 0]
//! ```
//!
//! Screened-out candidates are dropped by deleting their rows from the mean
//! blocks and from `L`; the candidate covariance of the survivors is then
//! `L̃ L̃ᵀ` and samples use `L̃ z` with a full-length `z`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

pub use crate::linalg::{cholesky_factor, JitterPolicy, LowerTriangular};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::prior::PriorModel;

/// Leading stage variances at or below this are treated as zero.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Conditional distribution of all unsampled scores of surviving candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    remaining_stage_cov: Matrix,
    mean: Vec<f64>,
    /// Full factor of `X`; the survivors' rows form `L̃`.
    cand_chol: Arc<Matrix>,
    survivor_ids: Vec<usize>,
    stage_index: usize,
}

/// Fresh sampler at stage 1 with zero mean and all candidates alive.
pub fn init_sampler(prior: &PriorModel) -> Result<SamplerState> {
    let chol = prior.candidate_cholesky()?;
    Ok(SamplerState::from_shared(prior.stage_cov().clone(), chol.shared()))
}

impl SamplerState {
    /// Zero-mean state from a stage covariance and the Cholesky factor of
    /// the candidate covariance.
    pub fn new(stage_cov: Matrix, cand_chol: Matrix) -> Self {
        Self::from_shared(stage_cov, Arc::new(cand_chol))
    }

    pub fn from_shared(stage_cov: Matrix, cand_chol: Arc<Matrix>) -> Self {
        assert!(stage_cov.is_square() && stage_cov.rows() >= 1);
        assert!(cand_chol.is_square() && cand_chol.rows() >= 1);
        let m = cand_chol.rows();
        let n = stage_cov.rows();
        Self {
            remaining_stage_cov: stage_cov,
            mean: vec![0.0; m * n],
            cand_chol,
            survivor_ids: (0..m).collect(),
            stage_index: 1,
        }
    }

    /// Residual stage covariance for the stages not yet sampled.
    pub fn remaining_stage_cov(&self) -> &Matrix {
        &self.remaining_stage_cov
    }

    /// Conditional means, one block of `survivors` entries per remaining stage.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Mean block of the stage that will be sampled next.
    pub fn mean_head(&self) -> &[f64] {
        &self.mean[..self.survivor_count()]
    }

    /// Rows of `L` for the surviving candidates (`survivors × m`).
    pub fn cand_chol_rows(&self) -> Matrix {
        self.cand_chol.select_rows(&self.survivor_ids)
    }

    /// Original candidate count `m` (the length of `z`).
    pub fn candidate_count(&self) -> usize {
        self.cand_chol.cols()
    }

    /// Original (0-based) candidate indices still in the pipeline, ascending.
    pub fn survivor_ids(&self) -> &[usize] {
        &self.survivor_ids
    }

    pub fn survivor_count(&self) -> usize {
        self.survivor_ids.len()
    }

    /// 1-based index of the stage sampled next.
    pub fn stage_index(&self) -> usize {
        self.stage_index
    }

    pub fn remaining_stages(&self) -> usize {
        self.remaining_stage_cov.rows()
    }

    /// Covariance of the surviving candidates, `L̃ L̃ᵀ`.
    pub fn survivor_cov(&self) -> Matrix {
        let rows = self.cand_chol_rows();
        rows.matmul(&rows.transpose())
    }

    /// Draws the current stage's scores for all survivors.
    ///
    /// Always consumes exactly `m` standard normals from `rng`, so that the
    /// random stream stays aligned across allocations.
    pub fn sample_current_stage<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = self.candidate_count();
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        self.scores_from_normals(&z)
    }

    /// `mu_head + sqrt(Sigma[0,0]) · L̃ z` for a given standard-normal vector.
    pub fn scores_from_normals(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.candidate_count());
        let scale = self.remaining_stage_cov[(0, 0)].max(0.0).sqrt();
        self.survivor_ids
            .iter()
            .enumerate()
            .map(|(row, &id)| {
                let l = &self.cand_chol.row(id)[..=id];
                let lz: f64 = l.iter().zip(z).map(|(a, b)| a * b).sum();
                self.mean[row] + scale * lz
            })
            .collect()
    }

    /// Conditions the remaining stages on `observed` (the current stage's
    /// scores for all survivors) and keeps only the survivors at positions
    /// `keep` (strictly increasing, relative to the current survivor list).
    pub fn condition_and_filter(&self, observed: &[f64], keep: &[usize]) -> Result<SamplerState> {
        let s = self.survivor_count();
        let r = self.remaining_stages();
        if r < 2 {
            return Err(Error::InvalidArgument(
                "no later stage to condition on".into(),
            ));
        }
        if observed.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: observed.len(),
            });
        }
        validate_keep(keep, s)?;

        let cov = &self.remaining_stage_cov;
        let lead = cov[(0, 0)];
        let informative = lead > VARIANCE_FLOOR;
        if !informative {
            // A zero-variance stage is a deterministic function of what was
            // already observed; it carries no new information provided its
            // cross-covariances vanish too, as they must for a PSD matrix.
            let bound = VARIANCE_FLOOR.sqrt();
            let cross = (1..r).map(|t| cov[(t, 0)].abs()).fold(0.0, f64::max);
            if lead < -VARIANCE_FLOOR || cross > bound {
                return Err(Error::DegenerateStageVariance(lead));
            }
        }

        let mut mean = Vec::with_capacity(keep.len() * (r - 1));
        for t in 1..r {
            let block = &self.mean[t * s..(t + 1) * s];
            let coef = if informative { cov[(t, 0)] / lead } else { 0.0 };
            mean.extend(
                keep.iter()
                    .map(|&i| block[i] + coef * (observed[i] - self.mean[i])),
            );
        }

        let mut next_cov = Matrix::from_fn(r - 1, r - 1, |a, b| {
            let base = cov[(a + 1, b + 1)];
            if informative {
                base - cov[(a + 1, 0)] * cov[(0, b + 1)] / lead
            } else {
                base
            }
        });
        next_cov.symmetrize();

        Ok(SamplerState {
            remaining_stage_cov: next_cov,
            mean,
            cand_chol: Arc::clone(&self.cand_chol),
            survivor_ids: keep.iter().map(|&i| self.survivor_ids[i]).collect(),
            stage_index: self.stage_index + 1,
        })
    }
}

fn validate_keep(keep: &[usize], current: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("survivor list is empty".into()));
    }
    if keep.len() >= current {
        return Err(Error::InvalidArgument(format!(
            "each stage must screen out at least one candidate: keeping {} of {}",
            keep.len(),
            current
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep[keep.len() - 1] >= current {
        return Err(Error::InvalidArgument(
            "survivor positions must be strictly increasing and in range".into(),
        ));
    }
    Ok(())
}

/// Dense reference constructions used to validate the lazy sampler.
pub mod oracle {
    use super::*;

    /// Largest `n·m` accepted by [`dense_joint_covariance`].
    pub const MAX_DENSE: usize = 2000;

    /// `Sigma ⊗ X` as an explicit `nm × nm` matrix; entry `(j·m + i, l·m + k)`
    /// is `Sigma[j,l] · X[i,k]`.
    pub fn dense_joint_covariance(prior: &PriorModel) -> Result<Matrix> {
        kronecker(prior.stage_cov(), prior.candidate_cov())
    }

    pub fn kronecker(stage_cov: &Matrix, cand_cov: &Matrix) -> Result<Matrix> {
        let n = stage_cov.rows();
        let m = cand_cov.rows();
        if n * m > MAX_DENSE {
            return Err(Error::OracleTooLarge(n * m));
        }
        Ok(Matrix::from_fn(n * m, n * m, |a, b| {
            stage_cov[(a / m, b / m)] * cand_cov[(a % m, b % m)]
        }))
    }
}
