//! Choose the best allocation and compare against random final-stage trials.
use stagescreen::allocation::{AllocationSet, CostModel};
use stagescreen::pipeline::SimSettings;
use stagescreen::policy::{random_baseline_distribution, random_baseline_trials, ucb_select, xplt_select};
use stagescreen::prior::{build_prior, PriorSpec};

fn main() -> stagescreen::Result<()> {
    let prior = build_prior(&PriorSpec { m: 100, seed: 2, ..PriorSpec::default() })?;
    let cost = CostModel::new(vec![1.0, 10.0, 100.0], 2500.0)?;
    let settings = SimSettings::new(400, 9);

    let out = xplt_select(&prior, &cost, &settings, AllocationSet::Extremal)?;
    for e in &out.all_evaluated {
        let mark = if e.alloc == out.chosen { "*" } else { " " };
        println!("{mark} {:>12}  mean {:.3}  se {:.3}", e.alloc.to_string(), e.mean, e.std_error);
    }
    let random = random_baseline_distribution(&prior, &cost, &settings)?;
    println!(
        "xplt {} -> {:.3}; random ({} trials) -> {:.3}",
        out.chosen,
        out.reward_dist.mean,
        random_baseline_trials(&cost)?,
        random.mean
    );
    let ucb = ucb_select(&prior, &cost, &settings, AllocationSet::Extremal, 1.0)?;
    println!("ucb(c=1) picks {}", ucb.chosen);
    Ok(())
}
