//! Walk one pipeline by hand: sample a stage, keep the best, condition, repeat.
use stagescreen::pipeline::select_survivors_exploit;
use stagescreen::prior::{build_prior, PriorSpec};
use stagescreen::rng;
use stagescreen::sampler::init_sampler;

fn main() -> stagescreen::Result<()> {
    let prior = build_prior(&PriorSpec { m: 50, seed: 3, ..PriorSpec::default() })?;
    let keep_counts = [10, 3];
    let mut state = init_sampler(&prior)?;
    let mut rng = rng::seeded(11);
    for stage in 0..prior.n() {
        let scores = state.sample_current_stage(&mut rng);
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "stage {}: {} candidates, best score {best:.3}, stage variance left {:.3}",
            stage + 1,
            state.survivor_count(),
            state.remaining_stage_cov()[(0, 0)]
        );
        let Some(&k) = keep_counts.get(stage) else { break };
        let keep = select_survivors_exploit(&scores, k)?;
        state = state.condition_and_filter(&scores, &keep)?;
        println!("  survivors {:?}", state.survivor_ids());
    }
    Ok(())
}
