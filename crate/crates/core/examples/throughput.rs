//! Final-stage allocation of the optimal policy against its expected reward.
use std::path::Path;

use stagescreen::runner::output::{write_outputs, Format, PlotKind};
use stagescreen::runner::{run_throughput, throughput_correlation, ExperimentConfig};

fn main() -> stagescreen::Result<()> {
    let cfg = ExperimentConfig { n_sims: 100, seed: 61, ..ExperimentConfig::default() };
    let rows = run_throughput(&cfg, 40)?;
    match throughput_correlation(&rows) {
        Some(rho) => println!("spearman(m*_3, reward) = {rho:.3}"),
        None => println!("correlation undefined"),
    }
    for p in write_outputs(&rows, Path::new("out/examples"), "throughput", &[Format::Csv], Some(PlotKind::Throughput))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
