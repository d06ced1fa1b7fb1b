//! Build a separable prior and inspect its two covariance factors.
use stagescreen::prior::{build_prior, stage_distance_features, PriorSpec};

fn main() -> stagescreen::Result<()> {
    let spec = PriorSpec { m: 200, seed: 7, ..PriorSpec::default() };
    let prior = build_prior(&spec)?;
    let x = prior.candidate_cov();
    let off: f64 = (0..spec.m).flat_map(|i| (0..spec.m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| x[(i, j)]).sum();
    println!("X: {}x{}, mean off-diagonal {:.3}", x.rows(), x.cols(), off / (spec.m * (spec.m - 1)) as f64);

    let sigma = prior.stage_cov();
    println!("Sigma:");
    for j in 0..sigma.rows() {
        println!("  {:?}", sigma.row(j).iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
    }
    let (d12, d13) = stage_distance_features(prior.stage_latents())?;
    println!("|s2-s1| = {d12:.3}, |s3-s1| = {d13:.3}");
    println!("cholesky jitter: {:e}", prior.candidate_cholesky()?.jitter());
    Ok(())
}
