//! Allocations, costs, and enumeration of the cost-feasible allocation set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when comparing a cost against the budget.
const BUDGET_RTOL: f64 = 1e-12;

/// Candidates evaluated at each stage, `m_1 > m_2 > … > m_n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Allocation(Vec<usize>);

impl Allocation {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidAllocation("no stages".into()));
        }
        if counts[counts.len() - 1] < 1 {
            return Err(Error::InvalidAllocation(format!(
                "final stage count must be ≥ 1 in {counts:?}"
            )));
        }
        if counts.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidAllocation(format!(
                "counts must strictly decrease: {counts:?}"
            )));
        }
        Ok(Self(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn stages(&self) -> usize {
        self.0.len()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// True iff `self ≥ other` componentwise and `self ≠ other`.
    pub fn dominates(&self, other: &Allocation) -> Result<bool> {
        if self.stages() != other.stages() {
            return Err(Error::DimensionMismatch {
                expected: self.stages(),
                got: other.stages(),
            });
        }
        Ok(self != other && self.0.iter().zip(&other.0).all(|(a, b)| a >= b))
    }
}

impl TryFrom<Vec<usize>> for Allocation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Allocation::new(v)
    }
}

impl From<Allocation> for Vec<usize> {
    fn from(a: Allocation) -> Self {
        a.0
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Allocation {
    type Err = Error;

    /// Parses `"500,20,18"`.
    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidAllocation(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Allocation::new(counts)
    }
}

/// Per-evaluation stage costs and the total budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl CostModel {
    pub fn new(costs: Vec<f64>, budget: f64) -> Result<Self> {
        let model = Self { costs, budget };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.costs.is_empty() {
            return Err(Error::InvalidArgument("cost vector is empty".into()));
        }
        if let Some(c) = self.costs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidArgument(format!("stage cost must be positive, got {c}")));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "budget must be positive, got {}",
                self.budget
            )));
        }
        Ok(())
    }

    pub fn stages(&self) -> usize {
        self.costs.len()
    }

    pub fn final_cost(&self) -> f64 {
        self.costs[self.costs.len() - 1]
    }

    fn within_budget(&self, spent: f64) -> bool {
        spent <= self.budget * (1.0 + BUDGET_RTOL)
    }

    /// Cheapest feasible allocation cost for `m` initial candidates:
    /// `(m, n-1, n-2, …, 1)`.
    pub fn cheapest_cost(&self, m: usize) -> f64 {
        let n = self.stages();
        self.costs[0] * m as f64
            + (1..n)
                .map(|j| self.costs[j] * (n - j) as f64)
                .sum::<f64>()
    }
}

/// `alloc · costs`.
pub fn total_cost(alloc: &Allocation, cost: &CostModel) -> Result<f64> {
    if alloc.stages() != cost.stages() {
        return Err(Error::DimensionMismatch {
            expected: cost.stages(),
            got: alloc.stages(),
        });
    }
    Ok(alloc
        .counts()
        .iter()
        .zip(&cost.costs)
        .map(|(&k, c)| k as f64 * c)
        .sum())
}

/// Whether `alloc` starts at `m`, strictly decreases, and fits the budget.
pub fn is_feasible(alloc: &Allocation, cost: &CostModel, m: usize) -> bool {
    alloc.first() == m
        && alloc.counts().windows(2).all(|w| w[0] > w[1])
        && alloc.last() >= 1
        && total_cost(alloc, cost).is_ok_and(|c| cost.within_budget(c))
}

/// Which allocations the meta-policy considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationSet {
    /// Feasible allocations not dominated by another feasible allocation.
    #[default]
    Extremal,
    /// Every feasible allocation (for validating the extremal reduction).
    AllFeasible,
}

/// The candidate allocations for `m` initial candidates over `n` stages.
pub fn enumerate_allocations(
    cost: &CostModel,
    m: usize,
    n: usize,
    set: AllocationSet,
) -> Result<Vec<Allocation>> {
    match set {
        AllocationSet::Extremal => enumerate_extremal_allocations(cost, m, n),
        AllocationSet::AllFeasible => enumerate_feasible_allocations(cost, m, n),
    }
}

/// Feasible allocations that no other feasible allocation dominates,
/// sorted lexicographically descending.
///
/// Stages `2..n-1` are enumerated depth-first over their feasible range;
/// the final stage always takes its largest feasible count since any smaller
/// count is dominated by it. The candidates are then pruned for dominance.
pub fn enumerate_extremal_allocations(cost: &CostModel, m: usize, n: usize) -> Result<Vec<Allocation>> {
    let mut found = Vec::new();
    walk(cost, m, n, true, &mut found)?;
    let mut front = pareto_filter(found);
    front.sort_unstable_by(|a, b| b.cmp(a));
    Ok(front)
}

/// Every feasible allocation, sorted lexicographically descending.
pub fn enumerate_feasible_allocations(cost: &CostModel, m: usize, n: usize) -> Result<Vec<Allocation>> {
    let mut found = Vec::new();
    walk(cost, m, n, false, &mut found)?;
    found.sort_unstable_by(|a, b| b.cmp(a));
    Ok(found)
}

fn walk(cost: &CostModel, m: usize, n: usize, last_max_only: bool, out: &mut Vec<Allocation>) -> Result<()> {
    cost.validate()?;
    if cost.stages() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cost.stages(),
        });
    }
    if n == 0 || m < n || !cost.within_budget(cost.cheapest_cost(m)) {
        return Err(Error::BudgetInfeasible {
            cheapest: cost.cheapest_cost(m.max(n)),
        });
    }
    // tail_min[j]: minimum cost of stages j..n (0-based) given they need
    // at least n-j, n-j-1, …, 1 candidates.
    let mut tail_min = vec![0.0; n + 1];
    for j in (1..n).rev() {
        tail_min[j] = tail_min[j + 1] + cost.costs[j] * (n - j) as f64;
    }
    let mut prefix = Vec::with_capacity(n);
    prefix.push(m);
    let spent = cost.costs[0] * m as f64;
    recurse(cost, n, last_max_only, &tail_min, &mut prefix, spent, out);
    Ok(())
}

fn recurse(
    cost: &CostModel,
    n: usize,
    last_max_only: bool,
    tail_min: &[f64],
    prefix: &mut Vec<usize>,
    spent: f64,
    out: &mut Vec<Allocation>,
) {
    let j = prefix.len();
    if j == n {
        out.push(Allocation(prefix.clone()));
        return;
    }
    let prev = prefix[j - 1];
    let lo = n - j;
    // Largest count that leaves room for the minimal tail after stage j.
    let room = cost.budget * (1.0 + BUDGET_RTOL) - spent - tail_min[j + 1];
    let by_budget = (room / cost.costs[j]).floor();
    if by_budget < lo as f64 {
        return;
    }
    let hi = (prev - 1).min(by_budget.min(usize::MAX as f64) as usize);
    if hi < lo {
        return;
    }
    let range: Box<dyn Iterator<Item = usize>> = if j == n - 1 && last_max_only {
        Box::new(std::iter::once(hi))
    } else {
        Box::new((lo..=hi).rev())
    };
    for k in range {
        prefix.push(k);
        recurse(cost, n, last_max_only, tail_min, prefix, spent + cost.costs[j] * k as f64, out);
        prefix.pop();
    }
}

/// Keeps the allocations not dominated by any other in `items`.
pub fn pareto_filter(mut items: Vec<Allocation>) -> Vec<Allocation> {
    items.sort_unstable_by(|a, b| b.cmp(a));
    items.dedup();
    // A dominator is lexicographically larger, so it precedes what it dominates.
    let mut front: Vec<Allocation> = Vec::new();
    for a in items {
        if !front.iter().any(|f| f.dominates(&a).unwrap_or(false)) {
            front.push(a);
        }
    }
    front
}
