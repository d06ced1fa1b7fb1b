//! List the extremal allocations for the base costs and budget.
use stagescreen::allocation::{enumerate_extremal_allocations, enumerate_feasible_allocations, total_cost, CostModel};

fn main() -> stagescreen::Result<()> {
    let cost = CostModel::new(vec![1.0, 10.0, 100.0], 2500.0)?;
    let front = enumerate_extremal_allocations(&cost, 500, 3)?;
    for a in &front {
        println!("{a:>12}  cost {}", total_cost(a, &cost)?);
    }
    let all = enumerate_feasible_allocations(&cost, 500, 3)?;
    println!("{} extremal out of {} feasible", front.len(), all.len());

    let tight = CostModel::new(vec![1.0, 10.0, 100.0], 600.0)?;
    match enumerate_extremal_allocations(&tight, 500, 3) {
        Ok(v) => println!("{v:?}"),
        Err(e) => println!("budget 600: {e}"),
    }
    Ok(())
}
