//! Trace CSV, curve CSV and JSON summaries.
//!
//! Reals are written with 17 significant digits and `.` as the decimal
//! separator. Price indices in CSV files are 1-based.

use std::io::Write;
use std::path::Path;

use fairprice_core::sim::{AgentMeta, RunTrace};
use serde::Serialize;

use crate::config::ExperimentSpec;
use crate::error::{io_at, Result};
use crate::experiment::{CellResult, CurvePoint};

pub const TRACE_HEADER: &str = "t,group,price_index,accepted,reward,inst_regret,inst_S,inst_U,epoch";
pub const CURVE_HEADER: &str =
    "horizon,runs,mean_regret,stderr_regret,mean_S,stderr_S,mean_U,failures";

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv<W: Write>(trace: &RunTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.group.label(),
            r.price_index + 1,
            u8::from(r.accepted),
            real(r.reward),
            real(r.inst_regret),
            real(r.inst_s),
            real(r.inst_u),
            r.epoch
        )?;
    }
    out.flush()
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.horizon,
            p.runs,
            real(p.mean_regret),
            real(p.stderr_regret),
            real(p.mean_s),
            real(p.stderr_s),
            real(p.mean_u),
            p.failures
        )?;
    }
    out.flush()
}

/// Enough to replay one cell: the full spec plus the cell coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct CellEcho<'a> {
    pub spec: &'a ExperimentSpec,
    pub horizon: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<'a> {
    pub config: CellEcho<'a>,
    pub rounds: Option<u64>,
    pub total_reward: Option<f64>,
    pub cumulative_regret: Option<f64>,
    pub cumulative_s: Option<f64>,
    pub cumulative_u: Option<f64>,
    pub oracle_revenue: Option<f64>,
    pub agent_meta: Option<&'a AgentMeta>,
    pub error: Option<&'a str>,
}

impl<'a> RunSummary<'a> {
    pub fn of(spec: &'a ExperimentSpec, cell: &'a CellResult) -> Self {
        let t = cell.trace.as_ref();
        RunSummary {
            config: CellEcho { spec, horizon: cell.horizon, seed: cell.seed },
            rounds: t.map(|t| t.rounds),
            total_reward: t.map(|t| t.total_reward),
            cumulative_regret: t.map(|t| t.cumulative_regret),
            cumulative_s: t.map(|t| t.cumulative_s),
            cumulative_u: t.map(|t| t.cumulative_u),
            oracle_revenue: t.map(|t| t.oracle_revenue),
            agent_meta: t.map(|t| &t.agent_meta),
            error: cell.error.as_deref(),
        }
    }
}

pub fn cell_stem(cell: &CellResult) -> String {
    format!("T{}_seed{}", cell.horizon, cell.seed)
}

pub fn create_file(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(io_at(path))?;
    Ok(std::io::BufWriter::new(file))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create_file(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).and_then(|_| out.flush()).map_err(io_at(path))
}

/// Writes per-cell traces and summaries plus a merged `summary.json`.
pub fn write_cells(spec: &ExperimentSpec, cells: &[CellResult], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_at(dir))?;
    for cell in cells {
        let stem = cell_stem(cell);
        if spec.output.trace_csv {
            if let Some(trace) = &cell.trace {
                let path = dir.join(format!("trace_{stem}.csv"));
                write_trace_csv(trace, create_file(&path)?).map_err(io_at(&path))?;
            }
        }
        if spec.output.summary_json {
            write_json(&dir.join(format!("summary_{stem}.json")), &RunSummary::of(spec, cell))?;
        }
    }
    if spec.output.summary_json {
        let all: Vec<RunSummary> = cells.iter().map(|c| RunSummary::of(spec, c)).collect();
        write_json(&dir.join("summary.json"), &all)?;
    }
    Ok(())
}
