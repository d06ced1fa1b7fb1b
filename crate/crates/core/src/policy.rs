//! Meta-policies over allocations and the no-screening baseline.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{enumerate_allocations, total_cost, Allocation, AllocationSet, CostModel};
use crate::error::{Error, Result};
use crate::pipeline::{estimate_reward_distribution, RewardDistribution, SimSeed, SimSettings};
use crate::prior::PriorModel;
use crate::rng::{self, derive_seed};

const BASELINE_SALT: u64 = 0x5241_4e44_4f4d;

/// Summary of one evaluated allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedAllocation {
    pub alloc: Allocation,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub total_cost: f64,
}

/// Result of the exploitation meta-policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub chosen: Allocation,
    pub reward_dist: RewardDistribution,
    /// In enumeration order (lexicographically descending).
    pub all_evaluated: Vec<EvaluatedAllocation>,
}

impl PolicyOutcome {
    pub fn chosen_summary(&self) -> &EvaluatedAllocation {
        self.all_evaluated
            .iter()
            .find(|e| e.alloc == self.chosen)
            .expect("chosen allocation is in the table")
    }
}

/// Picks the allocation with the highest Monte-Carlo mean reward.
///
/// All allocations share `settings.base_seed`, so they are compared under
/// common random numbers. Ties go to the lexicographically largest
/// allocation.
pub fn xplt_select(
    prior: &PriorModel,
    cost: &CostModel,
    settings: &SimSettings,
    set: AllocationSet,
) -> Result<PolicyOutcome> {
    let allocs = enumerate_allocations(cost, prior.m(), prior.n(), set)?;
    prior.candidate_cholesky()?;
    let dists = allocs
        .par_iter()
        .map(|a| estimate_reward_distribution(prior, a, settings))
        .collect::<Result<Vec<_>>>()?;
    select_best(allocs, dists, cost, xplt_score)
}

/// Same as [`xplt_select`] but ranks allocations by [`ucb_score`].
pub fn ucb_select(
    prior: &PriorModel,
    cost: &CostModel,
    settings: &SimSettings,
    set: AllocationSet,
    c: f64,
) -> Result<PolicyOutcome> {
    let allocs = enumerate_allocations(cost, prior.m(), prior.n(), set)?;
    prior.candidate_cholesky()?;
    let dists = allocs
        .par_iter()
        .map(|a| estimate_reward_distribution(prior, a, settings))
        .collect::<Result<Vec<_>>>()?;
    select_best(allocs, dists, cost, |d| ucb_score(d, c))
}

/// Exploitation score: the expected reward.
pub fn xplt_score(dist: &RewardDistribution) -> f64 {
    dist.mean
}

/// `mean + c · sqrt(variance)`.
pub fn ucb_score(dist: &RewardDistribution, c: f64) -> f64 {
    dist.mean + c * dist.variance.sqrt()
}

fn select_best(
    allocs: Vec<Allocation>,
    dists: Vec<RewardDistribution>,
    cost: &CostModel,
    score: impl Fn(&RewardDistribution) -> f64,
) -> Result<PolicyOutcome> {
    // `allocs` is lexicographically descending, so keeping the first of
    // equal scores favours the largest allocation.
    let mut best = 0;
    for (i, d) in dists.iter().enumerate().skip(1) {
        if score(d) > score(&dists[best]) {
            best = i;
        }
    }
    let all_evaluated = allocs
        .iter()
        .zip(&dists)
        .map(|(a, d)| {
            Ok(EvaluatedAllocation {
                alloc: a.clone(),
                mean: d.mean,
                variance: d.variance,
                std_error: d.std_error(),
                total_cost: total_cost(a, cost)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolicyOutcome {
        chosen: allocs[best].clone(),
        reward_dist: dists.into_iter().nth(best).expect("nonempty"),
        all_evaluated,
    })
}

/// Final-stage trials the baseline can afford: `floor(budget / c_n)`.
pub fn random_baseline_trials(cost: &CostModel) -> Result<usize> {
    cost.validate()?;
    let k = (cost.budget * (1.0 + 1e-12) / cost.final_cost()).floor();
    if k < 1.0 {
        return Err(Error::BudgetBelowOneTrial);
    }
    Ok(k as usize)
}

/// One baseline draw.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDraw {
    /// Candidate ids in draw order; may repeat.
    pub picks: Vec<usize>,
    pub reward: f64,
}

fn baseline_rng(seed: SimSeed) -> rng::ChaCha8Rng {
    rng::stream(derive_seed(seed.base, BASELINE_SALT), seed.index)
}

fn final_stage_scale(prior: &PriorModel) -> f64 {
    let n = prior.n();
    prior.stage_cov()[(n - 1, n - 1)].sqrt()
}

/// Final-stage ground truth of all `m` candidates for one baseline draw.
///
/// The baseline only evaluates the candidates it picks; this exposes the
/// scores of the rest for validation.
pub fn baseline_final_scores(prior: &PriorModel, seed: SimSeed) -> Result<Vec<f64>> {
    let l = prior.candidate_cholesky()?.as_matrix();
    let mut rng = baseline_rng(seed);
    let z: Vec<f64> = (0..prior.m()).map(|_| rng.sample(StandardNormal)).collect();
    let scale = final_stage_scale(prior);
    Ok((0..prior.m())
        .map(|i| scale * l.row(i)[..=i].iter().zip(&z).map(|(a, b)| a * b).sum::<f64>())
        .collect())
}

/// Spends the budget on `trials` uniformly random (with replacement)
/// final-stage evaluations and keeps the best score.
///
/// Scores are drawn jointly from the final-stage marginal `N(0, Sigma_nn · X)`.
/// Repeated picks see the same score. The normals are drawn before the
/// picks, so the first `k` picks are the same for any `trials ≥ k`.
pub fn random_baseline_once(prior: &PriorModel, trials: usize, seed: SimSeed) -> Result<BaselineDraw> {
    if trials == 0 {
        return Err(Error::BudgetBelowOneTrial);
    }
    let m = prior.m();
    let l = prior.candidate_cholesky()?.as_matrix();
    let mut rng = baseline_rng(seed);
    let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let picks: Vec<usize> = (0..trials).map(|_| rng.random_range(0..m)).collect();
    let scale = final_stage_scale(prior);
    let mut seen = vec![false; m];
    let mut reward = f64::NEG_INFINITY;
    for &i in &picks {
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        let score = scale * l.row(i)[..=i].iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        reward = reward.max(score);
    }
    Ok(BaselineDraw { picks, reward })
}

/// Reward distribution of the no-screening random baseline.
pub fn random_baseline_distribution(
    prior: &PriorModel,
    cost: &CostModel,
    settings: &SimSettings,
) -> Result<RewardDistribution> {
    let trials = random_baseline_trials(cost)?;
    random_baseline_with_trials(prior, trials, settings)
}

pub fn random_baseline_with_trials(
    prior: &PriorModel,
    trials: usize,
    settings: &SimSettings,
) -> Result<RewardDistribution> {
    if settings.n_sims < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 simulations, got {}",
            settings.n_sims
        )));
    }
    prior.candidate_cholesky()?;
    let samples = (1..=settings.n_sims as u64)
        .into_par_iter()
        .map(|index| {
            random_baseline_once(
                prior,
                trials,
                SimSeed {
                    base: settings.base_seed,
                    index,
                },
            )
            .map(|d| d.reward)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RewardDistribution::from_samples(samples))
}
