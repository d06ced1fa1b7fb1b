//! Reward distribution of one fixed allocation, plus a single trace.
use stagescreen::pipeline::{estimate_reward_distribution, simulate_once, SimSeed, SimSettings};
use stagescreen::prior::{build_prior, PriorSpec};
use stagescreen::Allocation;

fn main() -> stagescreen::Result<()> {
    let prior = build_prior(&PriorSpec { m: 100, seed: 1, ..PriorSpec::default() })?;
    let alloc: Allocation = "100,30,12".parse()?;

    let trace = simulate_once(&prior, &alloc, SimSeed { base: 5, index: 1 }, 0.0)?;
    for (j, s) in trace.stages.iter().enumerate() {
        println!("stage {}: {} evaluated", j + 1, s.survivors.len());
    }
    println!("reward of simulation 1: {:.3}", trace.reward);

    let dist = estimate_reward_distribution(&prior, &alloc, &SimSettings::new(1000, 5))?;
    println!("{alloc}: mean {:.3} ± {:.3} over {} sims", dist.mean, dist.std_error(), dist.n_sims);

    let noisy = SimSettings { noise_std: 1.0, ..SimSettings::new(1000, 5) };
    let dist = estimate_reward_distribution(&prior, &alloc, &noisy)?;
    println!("with unit observation noise: mean {:.3}", dist.mean);
    Ok(())
}
