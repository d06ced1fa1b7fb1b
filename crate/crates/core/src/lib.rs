//! Simulation and allocation optimization for multi-stage screening pipelines.
//!
//! Candidates pass through a sequence of increasingly expensive evaluative
//! stages. Scores are modelled with a separable Gaussian prior
//! `N(0, Sigma ⊗ X)` where `Sigma` relates stages and `X` relates candidates,
//! both built from squared-exponential kernels over random latent points.
//!
//! The crate is organized bottom-up:
//!
//! * [`prior`] samples latent points and builds the two covariance factors.
//! * [`sampler`] draws scores lazily, one stage at a time, conditioning on
//!   everything observed so far and dropping screened-out candidates.
//! * [`allocation`] describes per-stage candidate counts, costs and the
//!   enumeration of budget-feasible, non-dominated allocations.
//! * [`pipeline`] runs the top-k screening policy and collects rewards.
//! * [`policy`] picks the allocation with the best expected reward and
//!   provides the no-screening random baseline.
//! * [`runner`] orchestrates parameter sweeps and writes CSV/JSON/SVG output.

pub mod allocation;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod policy;
pub mod prior;
pub mod rng;
pub mod runner;
pub mod sampler;
pub mod stats;

pub use allocation::{Allocation, CostModel};
pub use error::{Error, Result};
pub use pipeline::{RewardDistribution, SimSettings, SimulationTrace};
pub use policy::PolicyOutcome;
pub use prior::{PriorModel, PriorSpec};
pub use sampler::SamplerState;
