//! CSV / JSON / SVG writers for result rows and policy outcomes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::svg::{color_ramp, Figure, Marker, Series, Shape};
use super::{paired_rows, PolicyName, ResultRow};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pipeline::SimulationTrace;
use crate::policy::PolicyOutcome;
use crate::prior::{LatentPoints, PriorModel};

/// Header of the result CSV, in `ResultRow` field order.
pub const CSV_HEADER: &str = "param,value,replicate,policy,alloc,mean_reward,var_reward,n_sims,d12,d13,wall_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Which figure to draw for a set of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Mean reward against the swept value, one line per policy.
    Sweep,
    /// `(d12, d13)` scatter coloured by xplt mean reward.
    Heatmap,
    /// Final-stage allocation against xplt mean reward.
    Throughput,
    /// Budget ratio against mean reward.
    CostStudy,
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    ensure_parent(path)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn flush<W: Write>(w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

pub fn rows_to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to write".into()));
    }
    write_text(path, &rows_to_csv_string(rows)?)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Writes `<stem>.csv` and/or `<stem>.json`, plus `<stem>.svg` when `plot`
/// is given. Returns the paths written.
pub fn write_outputs(
    rows: &[ResultRow],
    dir: &Path,
    stem: &str,
    formats: &[Format],
    plot: Option<PlotKind>,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to write".into()));
    }
    let mut written = Vec::new();
    for f in formats {
        let path = match f {
            Format::Csv => {
                let p = dir.join(format!("{stem}.csv"));
                write_csv(rows, &p)?;
                p
            }
            Format::Json => {
                let p = dir.join(format!("{stem}.json"));
                write_json(rows, &p)?;
                p
            }
        };
        written.push(path);
    }
    if let Some(kind) = plot {
        let p = dir.join(format!("{stem}.svg"));
        write_text(&p, &plot_rows(rows, kind).render())?;
        written.push(p);
    }
    Ok(written)
}

#[derive(Serialize)]
struct OutcomeRecord {
    alloc: String,
    mean_reward: f64,
    var_reward: f64,
    std_error: f64,
    total_cost: f64,
    chosen: bool,
}

/// One CSV row per evaluated allocation.
pub fn write_outcome_csv(outcome: &PolicyOutcome, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    for e in &outcome.all_evaluated {
        w.serialize(OutcomeRecord {
            alloc: e.alloc.to_string(),
            mean_reward: e.mean,
            var_reward: e.variance,
            std_error: e.std_error,
            total_cost: e.total_cost,
            chosen: e.alloc == outcome.chosen,
        })?;
    }
    flush(w, path)
}

/// Chosen allocation, its reward summary, and the full table.
pub fn write_outcome_json(outcome: &PolicyOutcome, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Summary {
        chosen: String,
        mean_reward: f64,
        var_reward: f64,
        n_sims: usize,
        table: Vec<serde_json::Value>,
    }
    let table = outcome
        .all_evaluated
        .iter()
        .map(|e| {
            serde_json::json!({
                "alloc": e.alloc.to_string(),
                "mean_reward": e.mean,
                "var_reward": e.variance,
                "std_error": e.std_error,
                "total_cost": e.total_cost,
            })
        })
        .collect();
    write_json(
        &Summary {
            chosen: outcome.chosen.to_string(),
            mean_reward: outcome.reward_dist.mean,
            var_reward: outcome.reward_dist.variance,
            n_sims: outcome.reward_dist.n_sims,
            table,
        },
        path,
    )
}

/// Simulation traces as JSON lines.
pub fn write_traces(traces: &[SimulationTrace], path: &Path) -> Result<()> {
    let mut text = String::new();
    for t in traces {
        text.push_str(&serde_json::to_string(t)?);
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    flush(w, path)
}

pub fn write_latents_csv(points: &LatentPoints, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    for p in points.points() {
        w.write_record(p.iter().map(|v| v.to_string()))?;
    }
    flush(w, path)
}

/// Latents and both covariance factors, for debugging.
pub fn dump_prior(prior: &PriorModel, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = [
        ("candidate_latents.csv", None, Some(prior.candidate_latents())),
        ("stage_latents.csv", None, Some(prior.stage_latents())),
        ("candidate_cov.csv", Some(prior.candidate_cov()), None),
        ("stage_cov.csv", Some(prior.stage_cov()), None),
    ];
    let mut out = Vec::new();
    for (name, matrix, latents) in files {
        let p = dir.join(name);
        if let Some(m) = matrix {
            write_matrix_csv(m, &p)?;
        }
        if let Some(l) = latents {
            write_latents_csv(l, &p)?;
        }
        out.push(p);
    }
    Ok(out)
}

fn policy_color(p: PolicyName) -> &'static str {
    match p {
        PolicyName::Xplt => "#1f77b4",
        PolicyName::Random => "#000000",
    }
}

/// Builds the figure for `rows`.
pub fn plot_rows(rows: &[ResultRow], kind: PlotKind) -> Figure {
    match kind {
        PlotKind::Sweep | PlotKind::CostStudy => line_figure(rows, kind),
        PlotKind::Heatmap => heatmap_figure(rows),
        PlotKind::Throughput => throughput_figure(rows),
    }
}

fn line_figure(rows: &[ResultRow], kind: PlotKind) -> Figure {
    let mut params: Vec<&str> = Vec::new();
    for r in rows {
        if !params.contains(&r.param.as_str()) {
            params.push(&r.param);
        }
    }
    let mut series = Vec::new();
    for (pi, param) in params.iter().enumerate() {
        for policy in [PolicyName::Xplt, PolicyName::Random] {
            // Average replicates at each value.
            let mut points: Vec<(f64, f64, usize)> = Vec::new();
            for r in rows.iter().filter(|r| r.param == *param && r.policy == policy) {
                let Some(mean) = r.mean_reward else { continue };
                match points.iter_mut().find(|p| p.0 == r.value) {
                    Some(p) => {
                        p.1 += mean;
                        p.2 += 1;
                    }
                    None => points.push((r.value, mean, 1)),
                }
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let name = match (kind, policy) {
                (PlotKind::CostStudy, p) => format!("{param} {p:?}").to_lowercase(),
                (_, PolicyName::Xplt) => "xplt".into(),
                (_, PolicyName::Random) => "random".into(),
            };
            let color = if kind == PlotKind::CostStudy && policy == PolicyName::Xplt {
                color_ramp(pi as f64 / params.len().max(2).saturating_sub(1) as f64)
            } else {
                policy_color(policy).to_string()
            };
            series.push(Series {
                name,
                points: points.into_iter().map(|(x, s, c)| (x, s / c as f64)).collect(),
                color,
                dashed: policy == PolicyName::Random,
            });
        }
    }
    let x_label = match kind {
        PlotKind::CostStudy => "C_max / (b² m)".to_string(),
        _ => params.first().copied().unwrap_or("value").to_string(),
    };
    Figure {
        title: "Expected reward".into(),
        x_label,
        y_label: "mean reward".into(),
        series,
        ..Default::default()
    }
}

/// Marker radius shrinking with reward variance.
fn radius(var: Option<f64>) -> f64 {
    let v = var.unwrap_or(1.0).max(0.0);
    (3.0 + 6.0 / (1.0 + 4.0 * v)).min(9.0)
}

fn heatmap_figure(rows: &[ResultRow]) -> Figure {
    let pairs: Vec<_> = paired_rows(rows)
        .into_iter()
        .filter(|(x, r)| x.mean_reward.is_some() && r.mean_reward.is_some() && x.d12.is_some())
        .collect();
    let (lo, hi) = pairs
        .iter()
        .filter_map(|(x, _)| x.mean_reward)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let markers = pairs
        .iter()
        .map(|(x, r)| {
            let mean = x.mean_reward.unwrap_or_default();
            let worse = mean < r.mean_reward.unwrap_or_default();
            Marker {
                x: x.d12.unwrap_or_default(),
                y: x.d13.unwrap_or_default(),
                radius: radius(x.var_reward),
                color: color_ramp(if hi > lo { (mean - lo) / (hi - lo) } else { 0.5 }),
                shape: if worse { Shape::Triangle } else { Shape::Circle },
            }
        })
        .collect();
    Figure {
        title: "Expected reward by stage geometry".into(),
        x_label: "‖s2 − s1‖".into(),
        y_label: "‖s3 − s1‖".into(),
        markers,
        diagonal: true,
        ..Default::default()
    }
}

fn throughput_figure(rows: &[ResultRow]) -> Figure {
    let markers = rows
        .iter()
        .filter_map(|r| {
            Some(Marker {
                x: r.final_allocation()? as f64,
                y: r.mean_reward?,
                radius: radius(r.var_reward),
                color: policy_color(PolicyName::Xplt).into(),
                shape: Shape::Circle,
            })
        })
        .collect();
    Figure {
        title: "Expected optimal reward vs final-stage allocation".into(),
        x_label: "final-stage allocation".into(),
        y_label: "mean reward".into(),
        markers,
        ..Default::default()
    }
}
