//! Offline solvers over the set of procedurally fair policies.
//!
//! Every solver searches over the common accepted price `V_s`; for a fixed
//! `V_s` both fairness constraints are linear in `(π¹, π²)`, so each search
//! point is an exact LP. The search is approximate only in `V_s`.
//!
//! Same-fixed-price policies have `U = S = 0` under any acceptance model and
//! are always evaluated as candidates, which keeps the fair problems feasible.

mod closed_form;
mod ledger;
mod scan;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::pricing::{
    expected_accepted_price, procedural_unfairness, revenue_under, substantive_unfairness_under,
    AcceptanceModel, MarketConfig, PolicyPair, PriceGrid,
};
use crate::Group;

pub use closed_form::{
    alpha_bounds, closed_form_example_optimum, example_model, example_revenue_surface,
    reconstruct_example_policy, AlphaBounds, ClosedForm, EXAMPLE_PRICES, EXAMPLE_Q,
    PROVEN_EPS_MAX, SUPPORTED_EPS_MAX,
};
pub use ledger::{member, EliminationLedger, LedgerEntry, MEMBERSHIP_TOL};

/// Slack on `U` and on the accepted-price band when a solver output is
/// re-checked. LP points within the simplex feasibility tolerance of an
/// infeasible region fail this check.
pub const FAIRNESS_TOL: f64 = 1e-12;

use scan::{line_search, Candidate, Ranking, ScanProblem};

/// Search resolution and acceptance tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleConfig {
    /// Number of intervals in the initial `V_s` grid over `[v₁, v_d]`.
    pub grid_steps_vs: usize,
    /// Rounds of ×10 refinement around the incumbent.
    pub refine_iters: usize,
    /// Largest accepted disagreement between an LP objective value and the
    /// revenue recomputed from the normalized policy.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { grid_steps_vs: 2000, refine_iters: 3, tolerance: 1e-7 }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_steps_vs == 0 || !(self.tolerance > 0.0) {
            return Err(Error::Domain("oracle resolution and tolerance must be positive"));
        }
        Ok(())
    }
}

/// Coordinates of a policy: Group 1 accepted price `V_s`, the gap `α` to the
/// common proposed price, and the accepted-price shift `β` of Group 2.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamPoint {
    pub accepted_price: f64,
    pub gap: f64,
    pub per_group_shift: f64,
}

impl ParamPoint {
    pub fn of(policy: &PolicyPair, model: &AcceptanceModel, grid: &PriceGrid) -> Result<Self> {
        let a1 = expected_accepted_price(&policy.group1, model.curve(Group::One), grid)?;
        let a2 = expected_accepted_price(&policy.group2, model.curve(Group::Two), grid)?;
        let proposed = grid.mean(&policy.group1)?;
        Ok(ParamPoint { accepted_price: a1, gap: proposed - a1, per_group_shift: a2 - a1 })
    }

    /// Common proposed price `V_s + α`.
    pub fn proposed_price(&self) -> f64 {
        self.accepted_price + self.gap
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OracleSolution {
    pub policy: PolicyPair,
    /// Revenue under the model the solver optimized against.
    pub revenue: f64,
    pub point: ParamPoint,
}

/// Maximizes revenue over policies with `U = 0` and `S = 0`.
pub fn solve_fair_optimal(market: &MarketConfig, cfg: &OracleConfig) -> Result<OracleSolution> {
    solve_relaxed_optimal(market, 0.0, cfg)
}

/// Maximizes revenue over policies with `U = 0` and `S ≤ delta`.
pub fn solve_relaxed_optimal(
    market: &MarketConfig,
    delta: f64,
    cfg: &OracleConfig,
) -> Result<OracleSolution> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain("relaxation must be a finite nonnegative number"));
    }
    let problem = ScanProblem {
        grid: &market.grid,
        q: market.q,
        model: &market.model,
        band: delta,
        floors: Vec::new(),
    };
    let accept = |p: &PolicyPair| passes(p, &problem, None);
    maximize_revenue(&problem, cfg, &accept, &[])?.ok_or(Error::Infeasible)
}

/// Approximately maximizes `R(π, F̂)` over ledger members with
/// `S(π, F̂) ≤ delta_s`. `incumbent` (the previous epoch's choice) is
/// evaluated as an extra candidate.
///
/// Returns [`Error::LedgerInfeasible`] when no candidate survives.
pub fn empirical_optimizer(
    fhat: &AcceptanceModel,
    q: f64,
    grid: &PriceGrid,
    delta_s: f64,
    ledger: &EliminationLedger,
    cfg: &OracleConfig,
    incumbent: Option<&PolicyPair>,
) -> Result<OracleSolution> {
    if !(delta_s >= 0.0) || !delta_s.is_finite() {
        return Err(Error::Domain("unfairness radius must be a finite nonnegative number"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidShare(q));
    }
    let problem = ScanProblem {
        grid,
        q,
        model: fhat,
        band: delta_s,
        floors: ledger.entries().iter().map(|e| (&e.fhat, e.revenue_floor)).collect(),
    };
    let accept = |p: &PolicyPair| passes(p, &problem, Some(ledger));
    let extras: Vec<PolicyPair> = incumbent.into_iter().cloned().collect();
    maximize_revenue(&problem, cfg, &accept, &extras)?.ok_or(Error::LedgerInfeasible)
}

/// Approximately solves `argmax_{π ∈ Π_k} π^e(i)`.
///
/// The search is parametrized by `fhat_latest` and `delta_s` (the newest
/// ledger entry's model and radius); all ledger entries are enforced. Among
/// policies within `1e-9` of the best probability, the one with the highest
/// revenue under `fhat_latest` wins, then a same-fixed-price policy, then the
/// lexicographically smallest weights. `extras` are evaluated as additional
/// candidates. An empty ledger yields the same-fixed-price policy on `vᵢ`.
pub fn max_probability_policy(
    index: usize,
    group: Group,
    ledger: &EliminationLedger,
    fhat_latest: &AcceptanceModel,
    delta_s: f64,
    grid: &PriceGrid,
    cfg: &OracleConfig,
    extras: &[PolicyPair],
) -> Result<(PolicyPair, f64)> {
    cfg.validate()?;
    let d = grid.len();
    if index >= d {
        return Err(Error::DimensionMismatch { expected: d, found: index + 1 });
    }
    if ledger.is_empty() {
        return Ok((PolicyPair::fixed_price(d, index), 1.0));
    }
    if !(delta_s >= 0.0) || !delta_s.is_finite() {
        return Err(Error::Domain("unfairness radius must be a finite nonnegative number"));
    }
    let q = ledger.q();
    let problem = ScanProblem {
        grid,
        q,
        model: fhat_latest,
        band: delta_s,
        floors: ledger.entries().iter().map(|e| (&e.fhat, e.revenue_floor)).collect(),
    };
    let accept = |p: &PolicyPair| passes(p, &problem, Some(ledger));
    let score = |policy: PolicyPair, v_s: f64| -> Option<Candidate> {
        let secondary = revenue_under(&policy, fhat_latest, q, grid).ok()?;
        let primary = policy.group(group).weights()[index];
        Some(Candidate { policy, v_s, primary, secondary })
    };

    // Pass 1: the largest achievable probability.
    let objective = problem.probability_objective(group, index);
    let mut eval = |v_s: f64| {
        let policy = problem.solve(&problem.program(v_s, objective.clone()))?;
        if accept(&policy) {
            score(policy, v_s)
        } else {
            None
        }
    };
    let mut seen = Vec::new();
    let (lo, hi) = (grid.lowest(), grid.highest());
    let mut best = line_search(lo, hi, cfg, grid.prices(), &Ranking::PROBABILITY, &mut eval, &mut seen);
    for policy in injected(d, extras) {
        if accept(&policy) {
            if let Some(c) = score(policy, f64::NAN) {
                Ranking::PROBABILITY.offer(&mut best, c);
            }
        }
    }
    let Some(mut best) = best else { return Err(Error::LedgerInfeasible) };

    // Pass 2: best revenue while holding the probability at its maximum.
    let target = best.primary - Ranking::PROBABILITY.primary_tol;
    let revenue = problem.revenue_objective();
    for &(v_s, p) in &seen {
        if p < target {
            continue;
        }
        let mut lp = problem.program(v_s, revenue.clone());
        lp.push_le(problem.probability_objective(group, index).into_iter().map(|a| -a).collect(), -target);
        let Some(policy) = problem.solve(&lp) else { continue };
        if !accept(&policy) {
            continue;
        }
        if let Some(c) = score(policy, v_s) {
            if Ranking::PROBABILITY.prefers(&c, &best) {
                best = c;
            }
        }
    }
    Ok((best.policy, best.primary))
}

fn injected(d: usize, extras: &[PolicyPair]) -> Vec<PolicyPair> {
    let mut out: Vec<PolicyPair> = (0..d).map(|i| PolicyPair::fixed_price(d, i)).collect();
    out.extend(extras.iter().filter(|p| p.dim() == d).cloned());
    out
}

/// Re-checks a candidate against the problem's constraints through the
/// pricing metrics (and, if given, full ledger membership).
fn passes(policy: &PolicyPair, problem: &ScanProblem, ledger: Option<&EliminationLedger>) -> bool {
    let Ok(u) = procedural_unfairness(policy, problem.grid) else { return false };
    if u > FAIRNESS_TOL {
        return false;
    }
    let Ok(s) = substantive_unfairness_under(policy, problem.model, problem.grid) else {
        return false;
    };
    if s > problem.band + FAIRNESS_TOL {
        return false;
    }
    match ledger {
        Some(l) => member(policy, l, problem.grid).unwrap_or(false),
        None => true,
    }
}

fn maximize_revenue(
    problem: &ScanProblem,
    cfg: &OracleConfig,
    accept: &dyn Fn(&PolicyPair) -> bool,
    extras: &[PolicyPair],
) -> Result<Option<OracleSolution>> {
    cfg.validate()?;
    let grid = problem.grid;
    let objective = problem.revenue_objective();
    let score = |policy: PolicyPair, v_s: f64| -> Option<Candidate> {
        let primary = revenue_under(&policy, problem.model, problem.q, grid).ok()?;
        Some(Candidate { policy, v_s, primary, secondary: 0.0 })
    };
    let mut eval = |v_s: f64| {
        let (policy, value) = problem.solve_valued(&problem.program(v_s, objective.clone()))?;
        if !accept(&policy) {
            return None;
        }
        let c = score(policy, v_s)?;
        (math::abs(c.primary - value) <= cfg.tolerance).then_some(c)
    };
    let mut seen = Vec::new();
    let mut best = line_search(
        grid.lowest(),
        grid.highest(),
        cfg,
        grid.prices(),
        &Ranking::REVENUE,
        &mut eval,
        &mut seen,
    );
    for policy in injected(grid.len(), extras) {
        if accept(&policy) {
            if let Some(c) = score(policy, f64::NAN) {
                Ranking::REVENUE.offer(&mut best, c);
            }
        }
    }
    let Some(best) = best else { return Ok(None) };
    let point = ParamPoint::of(&best.policy, problem.model, grid)?;
    Ok(Some(OracleSolution { policy: best.policy, revenue: best.primary, point }))
}
