//! Rewards over random stage geometries, plotted at (|s2-s1|, |s3-s1|).
use std::path::Path;

use stagescreen::runner::output::{write_outputs, Format, PlotKind};
use stagescreen::runner::{run_heatmap, worse_than_random_fractions, ExperimentConfig};

fn main() -> stagescreen::Result<()> {
    let cfg = ExperimentConfig { n_sims: 100, seed: 41, ..ExperimentConfig::default() };
    let rows = run_heatmap(&cfg, 40)?;
    let (below, above) = worse_than_random_fractions(&rows);
    println!("fraction worse than random: d13 < d12 {below:.3?}, d13 >= d12 {above:.3?}");
    for p in write_outputs(&rows, Path::new("out/examples"), "heatmap", &[Format::Csv], Some(PlotKind::Heatmap))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
