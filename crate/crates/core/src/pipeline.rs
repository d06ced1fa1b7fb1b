//! Pipeline simulation under the pure-exploitation inter-stage policy.
//!
//! One simulation draws a fresh ground truth lazily: stage 1 is sampled for
//! all `m` candidates, the top `m_2` advance, their stage-2 scores are drawn
//! conditionally, and so on. The reward is the best final-stage score among
//! the candidates that reach the last stage.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::prior::PriorModel;
use crate::rng::{self, derive_seed};
use crate::sampler::init_sampler;
use crate::stats;

/// Salt for the observation-noise stream, kept apart from the ground truth.
const NOISE_SALT: u64 = 0x4e_4f49_5345;

/// Default simulation count per allocation.
pub const DEFAULT_SIMS: usize = 200;

/// Monte-Carlo settings shared by every allocation evaluated together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub n_sims: usize,
    pub base_seed: u64,
    /// Std of additive Gaussian noise on the scores the inter-stage policy
    /// sees. Ground truth and reward are unaffected.
    pub noise_std: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            n_sims: DEFAULT_SIMS,
            base_seed: 0,
            noise_std: 0.0,
        }
    }
}

impl SimSettings {
    pub fn new(n_sims: usize, base_seed: u64) -> Self {
        Self {
            n_sims,
            base_seed,
            noise_std: 0.0,
        }
    }
}

/// Identifies the random stream of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSeed {
    pub base: u64,
    /// 1-based simulation index.
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Original candidate ids evaluated at this stage, ascending.
    pub survivors: Vec<usize>,
    /// Ground-truth scores, aligned with `survivors`.
    pub scores: Vec<f64>,
}

/// Everything that happened in one simulated execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub seed: SimSeed,
    pub stages: Vec<StageRecord>,
    pub reward: f64,
}

/// Empirical distribution of the reward of one allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardDistribution {
    pub samples: Vec<f64>,
    pub mean: f64,
    /// Sample variance with n − 1 denominator.
    pub variance: f64,
    pub n_sims: usize,
}

impl RewardDistribution {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let mean = stats::mean(&samples);
        let variance = stats::sample_variance(&samples);
        let n_sims = samples.len();
        Self {
            samples,
            mean,
            variance,
            n_sims,
        }
    }

    /// Monte-Carlo standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.n_sims as f64).sqrt()
    }
}

/// Positions of the `k` largest scores, ascending. Ties go to the smaller
/// position.
pub fn select_survivors_exploit(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k >= scores.len() {
        return Err(Error::InvalidArgument(format!(
            "must keep between 1 and {} of {} candidates, asked for {k}",
            scores.len().saturating_sub(1),
            scores.len()
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    Ok(order)
}

/// Best final-stage score.
pub fn multi_fidelity_reward(final_scores: &[f64]) -> Result<f64> {
    final_scores
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::InvalidArgument("no final-stage scores".into()))
}

fn check_allocation(prior: &PriorModel, alloc: &Allocation) -> Result<()> {
    if alloc.stages() != prior.n() {
        return Err(Error::DimensionMismatch {
            expected: prior.n(),
            got: alloc.stages(),
        });
    }
    if alloc.first() != prior.m() {
        return Err(Error::InvalidAllocation(format!(
            "first stage must evaluate all {} candidates, got {}",
            prior.m(),
            alloc.first()
        )));
    }
    Ok(())
}

/// Runs one pipeline execution. Deterministic in `(prior, alloc, seed, noise_std)`.
pub fn simulate_once(
    prior: &PriorModel,
    alloc: &Allocation,
    seed: SimSeed,
    noise_std: f64,
) -> Result<SimulationTrace> {
    check_allocation(prior, alloc)?;
    let mut truth_rng = rng::stream(seed.base, seed.index);
    let mut noise_rng = rng::stream(derive_seed(seed.base, NOISE_SALT), seed.index);

    let n = alloc.stages();
    let mut state = init_sampler(prior)?;
    let mut stages = Vec::with_capacity(n);
    for j in 0..n {
        let scores = state.sample_current_stage(&mut truth_rng);
        stages.push(StageRecord {
            survivors: state.survivor_ids().to_vec(),
            scores: scores.clone(),
        });
        if j + 1 == n {
            break;
        }
        let keep = if noise_std > 0.0 {
            let observed: Vec<f64> = scores
                .iter()
                .map(|s| s + noise_std * noise_rng.sample::<f64, _>(StandardNormal))
                .collect();
            select_survivors_exploit(&observed, alloc.counts()[j + 1])?
        } else {
            select_survivors_exploit(&scores, alloc.counts()[j + 1])?
        };
        state = state.condition_and_filter(&scores, &keep)?;
    }
    let reward = multi_fidelity_reward(&stages[n - 1].scores)?;
    Ok(SimulationTrace {
        seed,
        stages,
        reward,
    })
}

/// Traces of simulations `1..=n_sims`, in index order.
pub fn simulate_traces(
    prior: &PriorModel,
    alloc: &Allocation,
    settings: &SimSettings,
) -> Result<Vec<SimulationTrace>> {
    (1..=settings.n_sims as u64)
        .into_par_iter()
        .map(|index| {
            simulate_once(
                prior,
                alloc,
                SimSeed {
                    base: settings.base_seed,
                    index,
                },
                settings.noise_std,
            )
        })
        .collect()
}

/// Reward distribution from simulations `1..=n_sims` of `settings.base_seed`.
///
/// Allocations estimated with the same settings see the same ground-truth
/// streams (common random numbers).
pub fn estimate_reward_distribution(
    prior: &PriorModel,
    alloc: &Allocation,
    settings: &SimSettings,
) -> Result<RewardDistribution> {
    if settings.n_sims < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 simulations, got {}",
            settings.n_sims
        )));
    }
    check_allocation(prior, alloc)?;
    // Factor X once before fanning out.
    prior.candidate_cholesky()?;
    let samples = (1..=settings.n_sims as u64)
        .into_par_iter()
        .map(|index| {
            simulate_once(
                prior,
                alloc,
                SimSeed {
                    base: settings.base_seed,
                    index,
                },
                settings.noise_std,
            )
            .map(|t| t.reward)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RewardDistribution::from_samples(samples))
}
