//! Expected reward of both policies as the budget grows; writes CSV and SVG.
use std::path::Path;

use stagescreen::runner::output::{write_outputs, Format, PlotKind};
use stagescreen::runner::{run_sweep, ExperimentConfig, SweepAxis};

fn main() -> stagescreen::Result<()> {
    let cfg = ExperimentConfig {
        sweep_axis: SweepAxis::CMax,
        sweep_values: vec![500.0, 1000.0, 2500.0, 5000.0, 10000.0],
        replicates: 2,
        seed: 4,
        ..ExperimentConfig::default()
    };
    let rows = run_sweep(&cfg)?;
    for r in &rows {
        println!("{:>7} r{} {:?} {:>12} {:?}", r.value, r.replicate, r.policy, r.alloc, r.mean_reward);
    }
    let dir = Path::new("out/examples");
    for p in write_outputs(&rows, dir, "budget_sweep", &[Format::Csv], Some(PlotKind::Sweep))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
