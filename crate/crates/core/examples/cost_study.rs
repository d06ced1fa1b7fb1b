//! Costs (1, b, b^2) for several bases, indexed by the budget ratio C_max / (b^2 m).
use std::path::Path;

use stagescreen::runner::output::{write_outputs, Format, PlotKind};
use stagescreen::runner::{run_cost_base_study, ExperimentConfig};

fn main() -> stagescreen::Result<()> {
    let cfg = ExperimentConfig {
        budgets: vec![1000.0, 2500.0, 5000.0, 10000.0],
        n_sims: 100,
        ..ExperimentConfig::default()
    };
    let rows = run_cost_base_study(&cfg, &[3.0, 5.0, 10.0])?;
    for r in &rows {
        println!("{:<12} ratio {:>6.3} {:?} {:>12} {:?}", r.param, r.value, r.policy, r.alloc, r.mean_reward);
    }
    for p in write_outputs(&rows, Path::new("out/examples"), "cost_study", &[Format::Csv], Some(PlotKind::CostStudy))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
