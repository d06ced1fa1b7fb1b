use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stagescreen::allocation::Allocation;
use stagescreen::pipeline::simulate_traces;
use stagescreen::runner::output::{self, Format, PlotKind};
use stagescreen::runner::{self, ExperimentConfig, ResultRow, SweepAxis};
use stagescreen::{Error, PriorModel};

#[derive(Parser)]
#[command(name = "stagescreen", version, about = "Budget allocation for multi-stage screening pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick the allocation with the best expected reward.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Rank allocations by mean + c·std instead of the mean.
        #[arg(long, value_name = "C")]
        ucb: Option<f64>,
    },
    /// Reward of the random final-stage-only baseline.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// Reward of one fixed allocation.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated stage counts, e.g. 100,20,5.
        #[arg(long)]
        alloc: Allocation,
    },
    /// Both policies across one swept parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// C_max, m, d_s, d_x, ell_s, ell_x or none.
        #[arg(long)]
        axis: Option<SweepAxis>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Both policies over random stage geometries (3 stages).
    Heatmap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        priors: Option<usize>,
    },
    /// Optimal final-stage allocation against reward over random stage geometries.
    Throughput {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        priors: Option<usize>,
    },
    /// Both policies under costs (1, b, b²).
    CostStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        bases: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        ms: Option<Vec<usize>>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the full-size base parameters (500 candidates).
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sims: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate every feasible allocation, not only the extremal ones.
    #[arg(long)]
    all_feasible: bool,
    /// Write latents and covariance factors as CSV under <out>/prior/.
    #[arg(long)]
    dump_prior: bool,
    /// Write per-simulation traces as JSON lines.
    #[arg(long)]
    trace: bool,
    /// Also write JSON rows.
    #[arg(long)]
    json: bool,
    /// Also write an SVG figure.
    #[arg(long)]
    plots: bool,
    /// Fill the wall_s column.
    #[arg(long)]
    timing: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d_x: Option<usize>,
    #[arg(long)]
    d_s: Option<usize>,
    #[arg(long)]
    ell_x: Option<f64>,
    #[arg(long)]
    ell_s: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    costs: Option<Vec<f64>>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    noise_std: Option<f64>,
}

macro_rules! set {
    ($cfg:ident, $src:ident: $($field:ident),*) => {
        $(if let Some(v) = $src.$field.clone() { $cfg.$field = v; })*
    };
}

impl Common {
    /// Defaults, then the file, then flags.
    fn config(&self) -> stagescreen::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if self.paper_scale {
            cfg = cfg.paper_scale();
        }
        set!(cfg, self: seed, m, n, d_x, d_s, ell_x, ell_s, costs, budget, noise_std);
        if let Some(v) = self.sims {
            cfg.n_sims = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        cfg.all_feasible |= self.all_feasible;
        cfg.timing |= self.timing;
        Ok(cfg)
    }

    fn formats(&self) -> Vec<Format> {
        if self.json {
            vec![Format::Csv, Format::Json]
        } else {
            vec![Format::Csv]
        }
    }
}

fn finish(
    rows: &[ResultRow],
    common: &Common,
    cfg: &ExperimentConfig,
    stem: &str,
    plot: PlotKind,
) -> stagescreen::Result<()> {
    let plot = common.plots.then_some(plot);
    for p in output::write_outputs(rows, &cfg.out_dir, stem, &common.formats(), plot)? {
        eprintln!("wrote {}", p.display());
    }
    if common.dump_prior {
        let prior = stagescreen::prior::build_prior(&cfg.prior_spec(0))?;
        dump(&prior, &cfg.out_dir)?;
    }
    if !rows.is_empty() && rows.iter().all(ResultRow::is_infeasible) {
        let cheapest = cfg.cost_model().cheapest_cost(cfg.m);
        return Err(Error::BudgetInfeasible { cheapest });
    }
    Ok(())
}

fn dump(prior: &PriorModel, out: &Path) -> stagescreen::Result<()> {
    output::dump_prior(prior, &out.join("prior"))?;
    Ok(())
}

fn print_rows(rows: &[ResultRow]) {
    for r in rows {
        let mean = r.mean_reward.map_or("-".into(), |v| format!("{v:.4}"));
        let se = r.std_error().map_or("-".into(), |v| format!("{v:.4}"));
        println!("{}={} r{} {:?} {} mean={mean} se={se}", r.param, r.value, r.replicate, r.policy, r.alloc);
    }
}

fn run(cli: Cli) -> stagescreen::Result<()> {
    let common = match &cli.command {
        Command::Optimize { common, .. }
        | Command::Baseline { common }
        | Command::Simulate { common, .. }
        | Command::Sweep { common, .. }
        | Command::Heatmap { common, .. }
        | Command::Throughput { common, .. }
        | Command::CostStudy { common, .. } => common,
    };
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let mut cfg = common.config()?;

    match &cli.command {
        Command::Optimize { ucb, .. } => {
            let (prior, outcome, row) = runner::run_optimize(&cfg, *ucb)?;
            output::write_outcome_csv(&outcome, &cfg.out_dir.join("optimize_allocations.csv"))?;
            if common.json {
                output::write_outcome_json(&outcome, &cfg.out_dir.join("optimize_allocations.json"))?;
            }
            if common.trace {
                let traces = simulate_traces(&prior, &outcome.chosen, &cfg.sim_settings(0))?;
                output::write_traces(&traces, &cfg.out_dir.join("optimize_traces.jsonl"))?;
            }
            println!("evaluated {} allocations", outcome.all_evaluated.len());
            print_rows(std::slice::from_ref(&row));
            finish(&[row], common, &cfg, "optimize", PlotKind::Sweep)
        }
        Command::Baseline { .. } => {
            let (_, row) = runner::run_baseline(&cfg)?;
            print_rows(std::slice::from_ref(&row));
            finish(&[row], common, &cfg, "baseline", PlotKind::Sweep)
        }
        Command::Simulate { alloc, .. } => {
            let (prior, row) = runner::run_simulate(&cfg, alloc)?;
            if common.trace {
                let traces = simulate_traces(&prior, alloc, &cfg.sim_settings(0))?;
                output::write_traces(&traces, &cfg.out_dir.join("simulate_traces.jsonl"))?;
            }
            print_rows(std::slice::from_ref(&row));
            finish(&[row], common, &cfg, "simulate", PlotKind::Sweep)
        }
        Command::Sweep { axis, values, replicates, .. } => {
            if let Some(a) = axis {
                cfg.sweep_axis = *a;
            }
            if let Some(v) = values {
                cfg.sweep_values = v.clone();
            }
            if let Some(r) = replicates {
                cfg.replicates = *r;
            }
            let rows = runner::run_sweep(&cfg)?;
            print_rows(&rows);
            finish(&rows, common, &cfg, "sweep", PlotKind::Sweep)
        }
        Command::Heatmap { priors, .. } => {
            if let Some(p) = priors {
                cfg.n_priors = *p;
            }
            let rows = runner::run_heatmap(&cfg, cfg.n_priors)?;
            let (below, above) = runner::worse_than_random_fractions(&rows);
            let frac = |f: Option<f64>| f.map_or("n/a".to_string(), |v| format!("{v:.3}"));
            println!("worse than random: d13<d12 {}, d13>=d12 {}", frac(below), frac(above));
            finish(&rows, common, &cfg, "heatmap", PlotKind::Heatmap)
        }
        Command::Throughput { priors, .. } => {
            if let Some(p) = priors {
                cfg.n_priors = *p;
            }
            let rows = runner::run_throughput(&cfg, cfg.n_priors)?;
            match runner::throughput_correlation(&rows) {
                Some(rho) => println!("spearman(m*_n, mean reward) = {rho:.4}"),
                None => println!("spearman(m*_n, mean reward) undefined"),
            }
            finish(&rows, common, &cfg, "throughput", PlotKind::Throughput)
        }
        Command::CostStudy { bases, budgets, ms, .. } => {
            if let Some(b) = bases {
                cfg.bases = b.clone();
            }
            if let Some(b) = budgets {
                cfg.budgets = b.clone();
            }
            if let Some(m) = ms {
                cfg.ms = m.clone();
            }
            let rows = runner::run_cost_base_study(&cfg, &cfg.bases)?;
            print_rows(&rows);
            finish(&rows, common, &cfg, "cost_study", PlotKind::CostStudy)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_)
                | Error::InvalidSpec(_)
                | Error::InvalidAllocation(_)
                | Error::HeatmapStages(_)
                | Error::TooFewStages(_) => 2,
                Error::BudgetInfeasible { .. } | Error::BudgetBelowOneTrial => 3,
                _ => 1,
            })
        }
    }
}
