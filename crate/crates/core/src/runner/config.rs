use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::{AllocationSet, CostModel};
use crate::error::{Error, Result};
use crate::pipeline::{SimSettings, DEFAULT_SIMS};
use crate::prior::PriorSpec;
use crate::rng::derive_seed;

const SIM_SALT: u64 = 0x5349_4d53;

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[default]
    None,
    #[serde(rename = "C_max", alias = "c_max")]
    CMax,
    M,
    DS,
    DX,
    EllS,
    EllX,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 7] = [
        SweepAxis::None,
        SweepAxis::CMax,
        SweepAxis::M,
        SweepAxis::DS,
        SweepAxis::DX,
        SweepAxis::EllS,
        SweepAxis::EllX,
    ];

    /// Name written to the `param` column.
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::CMax => "C_max",
            SweepAxis::M => "m",
            SweepAxis::DS => "d_s",
            SweepAxis::DX => "d_x",
            SweepAxis::EllS => "ell_s",
            SweepAxis::EllX => "ell_x",
        }
    }

    /// Whether changing this axis changes the prior.
    pub fn rebuilds_prior(self) -> bool {
        !matches!(self, SweepAxis::None | SweepAxis::CMax)
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepAxis::M | SweepAxis::DS | SweepAxis::DX)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name().to_ascii_lowercase() == norm || serde_name(*a) == norm)
            .ok_or_else(|| Error::Config(format!("unknown sweep axis {s:?}")))
    }
}

fn serde_name(a: SweepAxis) -> String {
    serde_json::to_value(a)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Everything an experiment needs, as one flat record.
///
/// Serialized as a JSON object; every key is optional in the file and falls
/// back to the desk-scale default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub d_x: usize,
    pub d_s: usize,
    pub ell_x: f64,
    pub ell_s: f64,
    pub sigma_x: f64,
    pub sigma_s: f64,
    pub costs: Vec<f64>,
    pub budget: f64,
    pub n_sims: usize,
    pub noise_std: f64,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub replicates: usize,
    pub n_priors: usize,
    /// Cost bases `b` for the cost study, `c = (1, b, b²)`.
    pub bases: Vec<f64>,
    /// Budgets for the cost study; empty means `[budget]`.
    pub budgets: Vec<f64>,
    /// Candidate counts for the cost study; empty means `[m]`.
    pub ms: Vec<usize>,
    pub all_feasible: bool,
    /// Record wall time per row. Off by default since it breaks byte-identical output.
    pub timing: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// Desk-scale defaults: base parameters with 100 candidates.
    fn default() -> Self {
        let base = PriorSpec::default();
        Self {
            m: 100,
            n: base.n,
            d_x: base.d_x,
            d_s: base.d_s,
            ell_x: base.ell_x,
            ell_s: base.ell_s,
            sigma_x: base.sigma_x,
            sigma_s: base.sigma_s,
            costs: vec![1.0, 10.0, 100.0],
            budget: 2500.0,
            n_sims: DEFAULT_SIMS,
            noise_std: 0.0,
            sweep_axis: SweepAxis::None,
            sweep_values: Vec::new(),
            replicates: 1,
            n_priors: 50,
            bases: vec![5.0, 10.0],
            budgets: Vec::new(),
            ms: Vec::new(),
            all_feasible: false,
            timing: false,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Restores the full-size base parameters (500 candidates).
    pub fn paper_scale(mut self) -> Self {
        self.m = PriorSpec::default().m;
        self
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.replicates < 1 {
            return bad("replicates must be ≥ 1".into());
        }
        if self.n_sims < 2 {
            return bad(format!("n_sims must be ≥ 2, got {}", self.n_sims));
        }
        if self.costs.len() != self.n {
            return bad(format!("{} costs for {} stages", self.costs.len(), self.n));
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return bad(format!("noise_std must be ≥ 0, got {}", self.noise_std));
        }
        if self.sweep_values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.sweep_axis != SweepAxis::None && self.sweep_values.is_empty() {
            return bad(format!("sweep over {} needs values", self.sweep_axis));
        }
        if self.sweep_axis.is_integer() && self.sweep_values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return bad(format!("sweep over {} needs positive integers", self.sweep_axis));
        }
        CostModel::new(self.costs.clone(), self.budget).map_err(|e| Error::Config(e.to_string()))?;
        self.prior_spec(0).validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Prior hyperparameters for `replicate`.
    pub fn prior_spec(&self, replicate: usize) -> PriorSpec {
        PriorSpec {
            m: self.m,
            n: self.n,
            d_x: self.d_x,
            d_s: self.d_s,
            ell_x: self.ell_x,
            ell_s: self.ell_s,
            sigma_x: self.sigma_x,
            sigma_s: self.sigma_s,
            seed: derive_seed(self.seed, replicate as u64),
        }
    }

    /// Prior and cost for one sweep cell.
    pub fn cell(&self, value: f64, replicate: usize) -> (PriorSpec, CostModel) {
        let mut spec = self.prior_spec(replicate);
        let mut cost = self.cost_model();
        match self.sweep_axis {
            SweepAxis::None => {}
            SweepAxis::CMax => cost.budget = value,
            SweepAxis::M => spec.m = value as usize,
            SweepAxis::DS => spec.d_s = value as usize,
            SweepAxis::DX => spec.d_x = value as usize,
            SweepAxis::EllS => spec.ell_s = value,
            SweepAxis::EllX => spec.ell_x = value,
        }
        (spec, cost)
    }

    pub fn cost_model(&self) -> CostModel {
        CostModel {
            costs: self.costs.clone(),
            budget: self.budget,
        }
    }

    /// Monte-Carlo settings; replicates get distinct simulation streams.
    pub fn sim_settings(&self, replicate: usize) -> SimSettings {
        SimSettings {
            n_sims: self.n_sims,
            base_seed: derive_seed(self.seed ^ SIM_SALT, replicate as u64),
            noise_std: self.noise_std,
        }
    }

    pub fn allocation_set(&self) -> AllocationSet {
        if self.all_feasible {
            AllocationSet::AllFeasible
        } else {
            AllocationSet::Extremal
        }
    }
}
