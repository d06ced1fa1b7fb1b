//! Experiment orchestration: sweeps, stage-geometry studies, cost studies.
//!
//! Every study produces a flat list of [`ResultRow`]s ordered by
//! (sweep value, replicate, policy) regardless of how the cells were
//! scheduled, so output is byte-identical across thread counts.

mod config;
pub mod output;
pub mod svg;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, SweepAxis};

use crate::allocation::{Allocation, CostModel};
use crate::error::{Error, Result};
use crate::pipeline::{estimate_reward_distribution, RewardDistribution, SimSettings};
use crate::policy::{random_baseline_distribution, random_baseline_trials, ucb_select, xplt_select, PolicyOutcome};
use crate::prior::{build_prior, sample_latent_points, stage_distance_features, PriorModel};
use crate::rng::{self, derive_seed};
use crate::stats;

const STAGE_PRIOR_SALT: u64 = 0x4845_4154;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Xplt,
    Random,
}

/// Marker written in the `alloc` column of rows whose budget admits no allocation.
pub const INFEASIBLE: &str = "infeasible";

/// One (parameter value, replicate, policy) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub param: String,
    pub value: f64,
    pub replicate: usize,
    pub policy: PolicyName,
    /// Chosen allocation for `xplt`, `trials=k` for `random`, or `infeasible`.
    pub alloc: String,
    pub mean_reward: Option<f64>,
    pub var_reward: Option<f64>,
    pub n_sims: usize,
    pub d12: Option<f64>,
    pub d13: Option<f64>,
    pub wall_s: Option<f64>,
}

impl ResultRow {
    pub fn is_infeasible(&self) -> bool {
        self.alloc == INFEASIBLE
    }

    /// Final-stage count of the chosen allocation (xplt rows only).
    pub fn final_allocation(&self) -> Option<usize> {
        if self.policy != PolicyName::Xplt || self.is_infeasible() {
            return None;
        }
        self.alloc.rsplit(',').next()?.parse().ok()
    }

    pub fn std_error(&self) -> Option<f64> {
        Some((self.var_reward? / self.n_sims as f64).sqrt())
    }
}

struct Cell<'a> {
    param: String,
    value: f64,
    replicate: usize,
    prior: &'a PriorModel,
    cost: CostModel,
    settings: SimSettings,
}

fn distances(prior: &PriorModel) -> (Option<f64>, Option<f64>) {
    match stage_distance_features(prior.stage_latents()) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(_) => (None, None),
    }
}

/// Runs both policies on one cell. Budget infeasibility becomes a marked row.
fn evaluate_cell(cell: &Cell<'_>, config: &ExperimentConfig) -> Result<[ResultRow; 2]> {
    let (d12, d13) = distances(cell.prior);
    let row = |policy, alloc: String, dist: Option<&RewardDistribution>, wall: f64| ResultRow {
        param: cell.param.clone(),
        value: cell.value,
        replicate: cell.replicate,
        policy,
        alloc,
        mean_reward: dist.map(|d| d.mean),
        var_reward: dist.map(|d| d.variance),
        n_sims: cell.settings.n_sims,
        d12,
        d13,
        wall_s: config.timing.then_some(wall),
    };

    let start = Instant::now();
    let xplt = match xplt_select(cell.prior, &cell.cost, &cell.settings, config.allocation_set()) {
        Ok(out) => row(
            PolicyName::Xplt,
            out.chosen.to_string(),
            Some(&out.reward_dist),
            start.elapsed().as_secs_f64(),
        ),
        Err(Error::BudgetInfeasible { .. }) => row(PolicyName::Xplt, INFEASIBLE.into(), None, 0.0),
        Err(e) => return Err(e),
    };

    let start = Instant::now();
    let random = match random_baseline_distribution(cell.prior, &cell.cost, &cell.settings) {
        Ok(dist) => {
            let trials = random_baseline_trials(&cell.cost)?;
            row(
                PolicyName::Random,
                format!("trials={trials}"),
                Some(&dist),
                start.elapsed().as_secs_f64(),
            )
        }
        Err(Error::BudgetBelowOneTrial) => row(PolicyName::Random, INFEASIBLE.into(), None, 0.0),
        Err(e) => return Err(e),
    };
    Ok([xplt, random])
}

fn run_cells(cells: &[Cell<'_>], config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let rows = cells
        .par_iter()
        .map(|c| evaluate_cell(c, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn single_row(
    config: &ExperimentConfig,
    prior: &PriorModel,
    policy: PolicyName,
    alloc: String,
    dist: &RewardDistribution,
    wall: f64,
) -> ResultRow {
    let (d12, d13) = distances(prior);
    ResultRow {
        param: SweepAxis::None.name().to_string(),
        value: 0.0,
        replicate: 0,
        policy,
        alloc,
        mean_reward: Some(dist.mean),
        var_reward: Some(dist.variance),
        n_sims: dist.n_sims,
        d12,
        d13,
        wall_s: config.timing.then_some(wall),
    }
}

fn config_prior(config: &ExperimentConfig) -> Result<PriorModel> {
    config.validate()?;
    build_prior(&config.prior_spec(0)).map_err(|e| match e {
        Error::InvalidSpec(msg) => Error::Config(msg),
        other => other,
    })
}

/// Optimizes the allocation for the config's replicate-0 prior.
///
/// Uses the pure-exploitation score, or the UCB score when `ucb` is given.
pub fn run_optimize(config: &ExperimentConfig, ucb: Option<f64>) -> Result<(PriorModel, PolicyOutcome, ResultRow)> {
    let prior = config_prior(config)?;
    let start = Instant::now();
    let settings = config.sim_settings(0);
    let outcome = match ucb {
        Some(c) => ucb_select(&prior, &config.cost_model(), &settings, config.allocation_set(), c)?,
        None => xplt_select(&prior, &config.cost_model(), &settings, config.allocation_set())?,
    };
    let row = single_row(
        config,
        &prior,
        PolicyName::Xplt,
        outcome.chosen.to_string(),
        &outcome.reward_dist,
        start.elapsed().as_secs_f64(),
    );
    Ok((prior, outcome, row))
}

/// Random baseline on the config's replicate-0 prior.
pub fn run_baseline(config: &ExperimentConfig) -> Result<(PriorModel, ResultRow)> {
    let prior = config_prior(config)?;
    let start = Instant::now();
    let trials = random_baseline_trials(&config.cost_model())?;
    let dist = random_baseline_distribution(&prior, &config.cost_model(), &config.sim_settings(0))?;
    let row = single_row(
        config,
        &prior,
        PolicyName::Random,
        format!("trials={trials}"),
        &dist,
        start.elapsed().as_secs_f64(),
    );
    Ok((prior, row))
}

/// Reward of a fixed allocation on the config's replicate-0 prior.
pub fn run_simulate(config: &ExperimentConfig, alloc: &Allocation) -> Result<(PriorModel, ResultRow)> {
    let prior = config_prior(config)?;
    let start = Instant::now();
    let dist = estimate_reward_distribution(&prior, alloc, &config.sim_settings(0))?;
    let row = single_row(
        config,
        &prior,
        PolicyName::Xplt,
        alloc.to_string(),
        &dist,
        start.elapsed().as_secs_f64(),
    );
    Ok((prior, row))
}

/// Single-parameter sweep: one cell per (value, replicate).
///
/// Priors are rebuilt only when the swept axis is a prior hyperparameter;
/// a budget sweep reuses each replicate's prior for every value.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let values = if config.sweep_axis == SweepAxis::None {
        vec![0.0]
    } else {
        config.sweep_values.clone()
    };

    let mut specs = Vec::new();
    for &v in &values {
        for r in 0..config.replicates {
            specs.push((v, r, config.cell(v, r)));
        }
    }
    // Build each distinct prior once.
    let mut priors: Vec<(crate::prior::PriorSpec, PriorModel)> = Vec::new();
    for (_, _, (spec, _)) in &specs {
        if !priors.iter().any(|(s, _)| s == spec) {
            let prior = build_prior(spec).map_err(|e| match e {
                Error::InvalidSpec(msg) => Error::Config(msg),
                other => other,
            })?;
            priors.push((spec.clone(), prior));
        }
    }

    let cells: Vec<Cell<'_>> = specs
        .into_iter()
        .map(|(value, replicate, (spec, cost))| Cell {
            param: config.sweep_axis.name().to_string(),
            value,
            replicate,
            prior: &priors.iter().find(|(s, _)| *s == spec).expect("built above").1,
            cost,
            settings: config.sim_settings(replicate),
        })
        .collect();
    run_cells(&cells, config)
}

/// Priors sharing the config's candidate latents but with `n_priors`
/// independently sampled stage latents.
pub fn sample_stage_priors(config: &ExperimentConfig, n_priors: usize) -> Result<Vec<PriorModel>> {
    let base = build_prior(&config.prior_spec(0))?;
    base.candidate_cholesky()?;
    let stage_seed = derive_seed(config.seed, STAGE_PRIOR_SALT);
    (0..n_priors)
        .map(|p| {
            let mut rng = rng::stream(stage_seed, p as u64);
            let latents = sample_latent_points(config.n, config.d_s, &mut rng);
            base.with_stage_latents(latents)
        })
        .collect()
}

fn run_stage_priors(config: &ExperimentConfig, n_priors: usize, param: &str) -> Result<Vec<ResultRow>> {
    let priors = sample_stage_priors(config, n_priors)?;
    let cells: Vec<Cell<'_>> = priors
        .iter()
        .enumerate()
        .map(|(p, prior)| Cell {
            param: param.to_string(),
            value: p as f64,
            replicate: 0,
            prior,
            cost: config.cost_model(),
            settings: config.sim_settings(0),
        })
        .collect();
    run_cells(&cells, config)
}

/// Expected rewards over `n_priors` stage geometries, tagged with the
/// stage distances `d12 = ‖s2 − s1‖` and `d13 = ‖s3 − s1‖`.
pub fn run_heatmap(config: &ExperimentConfig, n_priors: usize) -> Result<Vec<ResultRow>> {
    if config.n != 3 {
        return Err(Error::HeatmapStages(config.n));
    }
    config.validate()?;
    run_stage_priors(config, n_priors, "stage_prior")
}

/// Optimal final-stage allocation against expected reward over `n_priors`
/// stage geometries.
pub fn run_throughput(config: &ExperimentConfig, n_priors: usize) -> Result<Vec<ResultRow>> {
    if config.n < 2 {
        return Err(Error::Config("throughput needs at least 2 stages".into()));
    }
    config.validate()?;
    run_stage_priors(config, n_priors, "stage_prior")
}

/// Spearman correlation between `m*_n` and the xplt mean reward; `None` when
/// either is constant or there are fewer than two feasible rows.
pub fn throughput_correlation(rows: &[ResultRow]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| Some((r.final_allocation()? as f64, r.mean_reward?)))
        .unzip();
    stats::spearman(&xs, &ys)
}

/// Rewards under costs `(1, b, b²)` for each base `b` and each configured
/// (budget, m); the row value is the budget ratio `C_max / (b² m)`.
pub fn run_cost_base_study(config: &ExperimentConfig, bases: &[f64]) -> Result<Vec<ResultRow>> {
    if config.n != 3 {
        return Err(Error::Config(format!("cost study defined for 3 stages, got {}", config.n)));
    }
    if let Some(b) = bases.iter().find(|b| b.is_nan() || **b <= 0.0) {
        return Err(Error::Config(format!("cost base must be positive, got {b}")));
    }
    let budgets = if config.budgets.is_empty() {
        vec![config.budget]
    } else {
        config.budgets.clone()
    };
    let ms = if config.ms.is_empty() {
        vec![config.m]
    } else {
        config.ms.clone()
    };
    let mut check = config.clone();
    check.costs = vec![1.0, 1.0, 1.0];
    check.validate()?;

    let mut priors = Vec::new();
    for &m in &ms {
        let spec = crate::prior::PriorSpec { m, ..config.prior_spec(0) };
        priors.push(build_prior(&spec).map_err(|e| Error::Config(e.to_string()))?);
    }
    let mut cells = Vec::new();
    for &b in bases {
        for &budget in &budgets {
            for (prior, &m) in priors.iter().zip(&ms) {
                cells.push(Cell {
                    param: format!("cost_base={b}"),
                    value: budget / (b * b * m as f64),
                    replicate: 0,
                    prior,
                    cost: CostModel {
                        costs: vec![1.0, b, b * b],
                        budget,
                    },
                    settings: config.sim_settings(0),
                });
            }
        }
    }
    run_cells(&cells, config)
}

/// Fraction of feasible priors where screening loses to the baseline, split
/// by whether stage 3 is closer to stage 1 than stage 2 is.
///
/// Returns `(below_diagonal, on_or_above_diagonal)`; either is `None` when
/// its group is empty.
pub fn worse_than_random_fractions(rows: &[ResultRow]) -> (Option<f64>, Option<f64>) {
    let mut below = (0usize, 0usize);
    let mut above = (0usize, 0usize);
    for pair in paired_rows(rows) {
        let (x, r) = pair;
        let (Some(d12), Some(d13), Some(mx), Some(mr)) = (x.d12, x.d13, x.mean_reward, r.mean_reward) else {
            continue;
        };
        let bucket = if d13 < d12 { &mut below } else { &mut above };
        bucket.1 += 1;
        if mx < mr {
            bucket.0 += 1;
        }
    }
    let frac = |(worse, total): (usize, usize)| (total > 0).then(|| worse as f64 / total as f64);
    (frac(below), frac(above))
}

/// (xplt, random) row pairs sharing a cell.
pub fn paired_rows(rows: &[ResultRow]) -> Vec<(&ResultRow, &ResultRow)> {
    rows.iter()
        .filter(|r| r.policy == PolicyName::Xplt)
        .filter_map(|x| {
            rows.iter()
                .find(|r| {
                    r.policy == PolicyName::Random
                        && r.param == x.param
                        && r.value == x.value
                        && r.replicate == x.replicate
                })
                .map(|r| (x, r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            m: 30,
            n_sims: 20,
            budget: 800.0,
            ..Default::default()
        }
    }

    #[test]
    fn sweep_row_accounting() {
        let cfg = ExperimentConfig {
            sweep_axis: SweepAxis::CMax,
            sweep_values: vec![90.0, 800.0, 1500.0],
            replicates: 2,
            ..small()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 2);
        // 90 is below the cheapest allocation (30 + 20 + 100) and one trial.
        assert!(rows[..4].iter().all(ResultRow::is_infeasible));
        assert!(rows[4..].iter().all(|r| !r.is_infeasible()));
        assert_eq!(rows[4].param, "C_max");
        assert_eq!((rows[4].value, rows[4].replicate, rows[4].policy), (800.0, 0, PolicyName::Xplt));
        assert_eq!(rows[5].alloc, "trials=8");
        assert!(rows[4].wall_s.is_none());
    }

    #[test]
    fn rows_parse_final_allocation() {
        let rows = run_sweep(&small()).unwrap();
        let m3 = rows[0].final_allocation().unwrap();
        assert!(rows[0].alloc.ends_with(&format!(",{m3}")));
        assert_eq!(rows[1].final_allocation(), None);
    }

    #[test]
    fn heatmap_requires_three_stages() {
        let cfg = ExperimentConfig { n: 2, costs: vec![1.0, 10.0], ..small() };
        assert!(matches!(run_heatmap(&cfg, 3), Err(Error::HeatmapStages(2))));
    }

    #[test]
    fn heatmap_distances_bounded() {
        let cfg = ExperimentConfig { d_s: 2, ..small() };
        let rows = run_heatmap(&cfg, 6).unwrap();
        assert_eq!(rows.len(), 12);
        for r in &rows {
            let bound = 2f64.sqrt();
            assert!((0.0..=bound).contains(&r.d12.unwrap()));
            assert!((0.0..=bound).contains(&r.d13.unwrap()));
        }
    }

    #[test]
    fn degenerate_throughput_correlation() {
        // Only (30, 2, 1) fits: 30 + 20 + 100.
        let cfg = ExperimentConfig { budget: 150.0, ..small() };
        let rows = run_throughput(&cfg, 5).unwrap();
        assert!(rows.iter().filter(|r| r.policy == PolicyName::Xplt).all(|r| r.alloc == "30,2,1"));
        assert_eq!(throughput_correlation(&rows), None);
    }

    #[test]
    fn cost_study_ratios() {
        let cfg = ExperimentConfig {
            budgets: vec![2000.0, 5000.0, 50_000.0],
            ms: vec![30],
            ..small()
        };
        let rows = run_cost_base_study(&cfg, &[5.0, 10.0]).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2);
        let last = &rows[rows.len() - 2];
        assert_eq!(last.param, "cost_base=10");
        assert!((last.value - 50_000.0 / (100.0 * 30.0)).abs() < 1e-12);
        let xplt_points = rows.iter().filter(|r| r.policy == PolicyName::Xplt).count();
        assert_eq!(xplt_points, 6);
    }

    #[test]
    fn exhaustive_parity_ratio() {
        let cfg = ExperimentConfig {
            budgets: vec![3000.0],
            ms: vec![30],
            ..small()
        };
        let rows = run_cost_base_study(&cfg, &[10.0]).unwrap();
        assert_eq!(rows[0].value, 1.0);
        // With the budget covering every candidate once, the baseline gets m trials.
        assert_eq!(rows[1].alloc, "trials=30");
    }
}
