//! Runs (horizon, seed) cells, aggregates them into curves and fits
//! log-log slopes.

use fairprice_core::fpa::FpaAgent;
use fairprice_core::oracle::{solve_fair_optimal, OracleConfig};
use fairprice_core::sim::{baseline_agent, run_episode_against, Agent, BaselineKind, RunTrace, SimConfig};
use fairprice_core::MarketConfig;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AgentKind, ExperimentSpec};
use crate::error::{Error, Result};

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "FAIRPRICE_THREADS";

pub const MIN_SWEEP_HORIZONS: usize = 3;
pub const MIN_SWEEP_SEEDS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub horizon: u64,
    pub seed: u64,
    pub trace: Option<RunTrace>,
    /// Agent failure; recorded rather than aborting the experiment.
    pub error: Option<String>,
}

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Usage(e.to_string()))
}

pub fn build_agent(
    spec: &ExperimentSpec,
    market: &MarketConfig,
    horizon: u64,
    seed: u64,
    oracle: &OracleConfig,
) -> Result<Box<dyn Agent>> {
    let baseline = |kind| -> Result<Box<dyn Agent>> {
        Ok(baseline_agent(kind, market, oracle, seed)?)
    };
    match spec.agent.kind {
        AgentKind::Fpa => Ok(Box::new(FpaAgent::new(spec.agent.fpa_config(market, horizon, seed))?)),
        AgentKind::BestFixedOracle => baseline(BaselineKind::BestFixedOracle),
        AgentKind::UcbFixed => baseline(BaselineKind::UcbFixed),
        AgentKind::GroupwiseUnconstrainedOracle => baseline(BaselineKind::GroupwiseUnconstrainedOracle),
        AgentKind::FairOracle => baseline(BaselineKind::FairOracle),
    }
}

fn run_cell(spec: &ExperimentSpec, market: &MarketConfig, oracle_revenue: f64, horizon: u64, seed: u64) -> CellResult {
    let oracle = OracleConfig::default();
    let outcome = build_agent(spec, market, horizon, seed, &oracle).and_then(|mut agent| {
        let sim = SimConfig {
            record_every: spec.output.record_every,
            ..SimConfig::new(market.clone(), horizon, seed)
        };
        Ok(run_episode_against(agent.as_mut(), &sim, oracle_revenue)?)
    });
    match outcome {
        Ok(trace) => CellResult { horizon, seed, trace: Some(trace), error: None },
        Err(e) => CellResult { horizon, seed, trace: None, error: Some(e.to_string()) },
    }
}

/// Runs every (horizon, seed) cell in parallel; results are ordered by
/// horizon, then seed, independent of scheduling.
pub fn run_cells(spec: &ExperimentSpec) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let seeds = spec.sweep.seed_list();
    let mut jobs = Vec::new();
    for &horizon in &spec.sweep.horizons {
        let market = spec.environment.market(horizon)?;
        let revenue = solve_fair_optimal(&market, &OracleConfig::default())?.revenue;
        for &seed in &seeds {
            jobs.push((market.clone(), revenue, horizon, seed));
        }
    }
    let pool = thread_pool()?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|(market, revenue, horizon, seed)| run_cell(spec, market, *revenue, *horizon, *seed))
            .collect()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub horizon: u64,
    pub runs: usize,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    pub mean_s: f64,
    pub stderr_s: f64,
    pub mean_u: f64,
    pub failures: usize,
}

/// Sample mean and standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn curve(cells: &[CellResult]) -> Vec<CurvePoint> {
    let mut horizons: Vec<u64> = cells.iter().map(|c| c.horizon).collect();
    horizons.dedup();
    horizons
        .into_iter()
        .map(|horizon| {
            let here: Vec<&CellResult> = cells.iter().filter(|c| c.horizon == horizon).collect();
            let traces: Vec<&RunTrace> = here.iter().filter_map(|c| c.trace.as_ref()).collect();
            let pick = |f: fn(&RunTrace) -> f64| traces.iter().map(|t| f(t)).collect::<Vec<f64>>();
            let (mean_regret, stderr_regret) = mean_stderr(&pick(|t| t.cumulative_regret));
            let (mean_s, stderr_s) = mean_stderr(&pick(|t| t.cumulative_s));
            let (mean_u, _) = mean_stderr(&pick(|t| t.cumulative_u));
            CurvePoint {
                horizon,
                runs: traces.len(),
                mean_regret,
                stderr_regret,
                mean_s,
                stderr_s,
                mean_u,
                failures: here.len() - traces.len(),
            }
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`; `None` unless there are at
/// least two points, all positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub points: Vec<CurvePoint>,
    pub regret_slope: Option<f64>,
    pub s_slope: Option<f64>,
}

pub fn check_sweep_shape(spec: &ExperimentSpec) -> Result<()> {
    let mut horizons = spec.sweep.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    if horizons.len() < MIN_SWEEP_HORIZONS {
        return Err(Error::Usage(format!("a sweep needs at least {MIN_SWEEP_HORIZONS} distinct horizons")));
    }
    if spec.sweep.seed_list().len() < MIN_SWEEP_SEEDS {
        return Err(Error::Usage(format!("a sweep needs at least {MIN_SWEEP_SEEDS} seeds")));
    }
    Ok(())
}

pub fn summarize_sweep(cells: &[CellResult]) -> SweepReport {
    let points = curve(cells);
    let xs: Vec<f64> = points.iter().map(|p| p.horizon as f64).collect();
    let slope = |f: fn(&CurvePoint) -> f64| loglog_slope(&xs, &points.iter().map(f).collect::<Vec<f64>>());
    SweepReport { regret_slope: slope(|p| p.mean_regret), s_slope: slope(|p| p.mean_s), points }
}

pub fn sweep(spec: &ExperimentSpec) -> Result<(Vec<CellResult>, SweepReport)> {
    check_sweep_shape(spec)?;
    let cells = run_cells(spec)?;
    let report = summarize_sweep(&cells);
    Ok((cells, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1e2, 1e3, 1e4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&xs, &[1.0, 0.0, 2.0]), None);
        assert_eq!(loglog_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cells_are_ordered_and_failures_recorded() {
        let mut spec = ExperimentSpec::default();
        spec.sweep.horizons = vec![300, 200];
        spec.sweep.seeds = Some(vec![4, 1]);
        spec.output.record_every = 0;
        let cells = run_cells(&spec).unwrap();
        let order: Vec<(u64, u64)> = cells.iter().map(|c| (c.horizon, c.seed)).collect();
        assert_eq!(order, vec![(300, 4), (300, 1), (200, 4), (200, 1)]);
        assert!(cells.iter().all(|c| c.error.is_none()));
        let points = curve(&cells);
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].runs, 2);
    }

    #[test]
    fn sweep_shape_is_checked() {
        let mut spec = ExperimentSpec::default();
        spec.sweep.horizons = vec![100, 200];
        spec.sweep.count = 5;
        assert!(matches!(check_sweep_shape(&spec), Err(Error::Usage(_))));
        spec.sweep.horizons = vec![100, 200, 400];
        spec.sweep.count = 4;
        assert!(matches!(check_sweep_shape(&spec), Err(Error::Usage(_))));
    }
}
