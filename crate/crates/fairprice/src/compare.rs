//! Paired runs on the example (`P₀`) and its perturbation (`P_ε`).

use fairprice_core::oracle::{solve_fair_optimal, OracleConfig};
use fairprice_core::sim::example_eps_market;
use fairprice_core::Group;
use serde::Serialize;

use crate::config::{ExperimentSpec, Preset};
use crate::error::Result;
use crate::experiment::{curve, run_cells, CellResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmReport {
    pub eps: f64,
    pub oracle_revenue: f64,
    /// Common proposed price of the arm's fair optimum.
    pub oracle_proposed_mean: f64,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    pub mean_s: f64,
    pub stderr_s: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub base: ArmReport,
    pub perturbed: ArmReport,
    pub proposed_mean_gap: f64,
    /// `360ε/(29(29−10ε))`.
    pub predicted_gap: f64,
}

pub fn predicted_proposed_mean_gap(eps: f64) -> f64 {
    360.0 * eps / (29.0 * (29.0 - 10.0 * eps))
}

fn arm(spec: &ExperimentSpec, eps: f64) -> Result<(ArmReport, Vec<CellResult>)> {
    let mut spec = spec.clone();
    spec.environment.preset = Preset::ExampleEps;
    spec.environment.eps = eps;
    let market = example_eps_market(eps)?;
    let optimum = solve_fair_optimal(&market, &OracleConfig::default())?;
    let cells = run_cells(&spec)?;
    let point = &curve(&cells)[0];
    let report = ArmReport {
        eps,
        oracle_revenue: optimum.revenue,
        oracle_proposed_mean: market.grid.mean(optimum.policy.group(Group::One))?,
        mean_regret: point.mean_regret,
        stderr_regret: point.stderr_regret,
        mean_s: point.mean_s,
        stderr_s: point.stderr_s,
        failures: point.failures,
    };
    Ok((report, cells))
}

/// Runs the agent of `spec` on both arms at `horizon` with the same seeds,
/// so the two environments share their random streams.
pub fn compare_lower_bound(
    spec: &ExperimentSpec,
    eps: f64,
    horizon: u64,
) -> Result<(LowerBoundReport, Vec<CellResult>, Vec<CellResult>)> {
    let mut spec = spec.clone();
    spec.sweep.horizons = vec![horizon];
    let (base, base_cells) = arm(&spec, 0.0)?;
    let (perturbed, perturbed_cells) = arm(&spec, eps)?;
    let report = LowerBoundReport {
        horizon,
        seeds: spec.sweep.seed_list(),
        proposed_mean_gap: (base.oracle_proposed_mean - perturbed.oracle_proposed_mean).abs(),
        predicted_gap: predicted_proposed_mean_gap(eps),
        base,
        perturbed,
    };
    Ok((report, base_cells, perturbed_cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_perturbation_gives_identical_arms() {
        let mut spec = ExperimentSpec::default();
        spec.sweep.seeds = Some(vec![1, 2]);
        spec.output.record_every = 0;
        let (report, a, b) = compare_lower_bound(&spec, 0.0, 2_000).unwrap();
        assert_eq!(report.base, report.perturbed);
        assert_eq!(a, b);
        assert_eq!(report.proposed_mean_gap, 0.0);
    }

    #[test]
    fn oracle_gap_matches_prediction() {
        let mut spec = ExperimentSpec::default();
        spec.sweep.seeds = Some(vec![0]);
        spec.output.record_every = 0;
        let (report, _, _) = compare_lower_bound(&spec, 0.01, 500).unwrap();
        assert!((report.base.oracle_proposed_mean - 43.0 / 58.0).abs() < 1e-6);
        assert!((report.proposed_mean_gap - report.predicted_gap).abs() < 1e-5);
    }
}
