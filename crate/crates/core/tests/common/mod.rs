//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use stagescreen::linalg::Matrix;
use stagescreen::prior::{LatentPoints, PriorModel, PriorSpec};

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// `Sigma ⊗ X`, indexed `j·m + i` for candidate `i` at stage `j`.
pub fn dense_joint(prior: &PriorModel) -> DMatrix<f64> {
    to_na(prior.stage_cov()).kronecker(&to_na(prior.candidate_cov()))
}

/// Mean and covariance of `y[target]` given `y[observed] = values` for
/// `y ~ N(0, joint)`.
pub fn dense_condition(
    joint: &DMatrix<f64>,
    observed: &[usize],
    values: &[f64],
    target: &[usize],
) -> (DVector<f64>, DMatrix<f64>) {
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |a, b| joint[(rows[a], cols[b])]);
    let t_t = pick(target, target);
    if observed.is_empty() {
        return (DVector::zeros(target.len()), t_t);
    }
    let o_o = pick(observed, observed);
    let t_o = pick(target, observed);
    let chol = o_o.cholesky().expect("observed block is positive definite");
    let y = DVector::from_column_slice(values);
    let mean = &t_o * chol.solve(&y);
    let cov = &t_t - &t_o * chol.solve(&t_o.transpose());
    (mean, cov)
}

/// Every strictly decreasing allocation starting at `m` within budget.
pub fn brute_force_feasible(costs: &[f64], budget: f64, m: usize) -> Vec<Vec<usize>> {
    fn rec(costs: &[f64], budget: f64, prefix: &mut Vec<usize>, spent: f64, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == costs.len() {
            if spent <= budget * (1.0 + 1e-12) {
                out.push(prefix.clone());
            }
            return;
        }
        let prev = *prefix.last().unwrap();
        for k in 1..prev {
            prefix.push(k);
            rec(costs, budget, prefix, spent + costs[prefix.len() - 1] * k as f64, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut prefix = vec![m];
    rec(costs, budget, &mut prefix, costs[0] * m as f64, &mut out);
    out
}

/// Quadratic-time Pareto filter, sorted descending.
pub fn brute_force_pareto(all: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let dominated = |a: &Vec<usize>| {
        all.iter()
            .any(|b| b != a && b.iter().zip(a).all(|(x, y)| x >= y))
    };
    let mut out: Vec<Vec<usize>> = all.iter().filter(|a| !dominated(a)).cloned().collect();
    out.sort();
    out.dedup();
    out.reverse();
    out
}

/// `E[max of k iid N(0,1)]` by Simpson quadrature of `x · k φ(x) Φ(x)^(k-1)`.
pub fn expected_max_iid(k: usize) -> f64 {
    let normal = Normal::standard();
    let (a, b, steps) = (-12.0, 12.0, 24_000usize);
    let h = (b - a) / steps as f64;
    let f = |x: f64| x * k as f64 * normal.pdf(x) * normal.cdf(x).powi(k as i32 - 1);
    let mut s = f(a) + f(b);
    for i in 1..steps {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// `E[max]` over `trials` uniform picks with replacement from `m` iid
/// standard normals: mixes [`expected_max_iid`] over the number of distinct
/// picks.
pub fn expected_max_with_replacement(m: usize, trials: usize) -> f64 {
    // p[j] = P(j distinct after t picks), built one pick at a time.
    let mut p = vec![0.0; trials + 1];
    p[0] = 1.0;
    for _ in 0..trials {
        let mut next = vec![0.0; trials + 1];
        for j in 0..trials {
            if p[j] == 0.0 {
                continue;
            }
            next[j] += p[j] * j as f64 / m as f64;
            next[j + 1] += p[j] * (m - j) as f64 / m as f64;
        }
        p = next;
    }
    (1..=trials).map(|j| p[j] * expected_max_iid(j)).sum()
}

/// A prior whose stage latents are all equal, so every stage is perfectly
/// correlated with the first.
pub fn identical_stages(spec: &PriorSpec) -> PriorModel {
    let base = stagescreen::prior::build_prior(spec).unwrap();
    let s = base.stage_latents().get(0).to_vec();
    base.with_stage_latents(LatentPoints::new(vec![s; spec.n], spec.d_s)).unwrap()
}
