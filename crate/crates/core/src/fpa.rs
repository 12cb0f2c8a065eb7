//! The fairly-pricing agent.
//!
//! The agent first proposes the highest price for a short warm-up to estimate
//! an acceptance floor `F̂_min`. It then runs doubling epochs. Each epoch
//! executes a roster `A_k` of procedurally fair policies in equal batches,
//! estimates the acceptance curves, and appends an elimination constraint to
//! the ledger. For every surviving (price, group) pair, the next roster keeps
//! the surviving policy most likely to propose that price.
//!
//! Logarithms are natural throughout.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::oracle::{
    empirical_optimizer, max_probability_policy, EliminationLedger, LedgerEntry, OracleConfig,
};
use crate::pricing::{revenue_under, AcceptanceModel, GroupDistribution, PolicyPair, PriceGrid};
use crate::Group;

/// RNG stream reserved for agent-side sampling.
pub const AGENT_STREAM: u64 = 1;

/// Default confidence parameter `ε`.
pub const DEFAULT_ERROR_PROB: f64 = 0.05;
/// Default relaxation constant `L`.
pub const DEFAULT_RELAXATION: f64 = 0.2;
/// Default scale `c` for [`ConstantsMode::Scaled`].
pub const DEFAULT_SCALE: f64 = 2.0;

/// Default revenue radius multiplier `κ_r` for [`ConstantsMode::Scaled`].
pub const SCALED_KAPPA_R: f64 = 0.5;
/// Default fairness radius multiplier `κ_s` for [`ConstantsMode::Scaled`].
pub const SCALED_KAPPA_S: f64 = 0.45;

/// Weights closer than this are treated as the same roster policy.
const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ConstantsMode {
    /// Epoch lengths and radii with the constants of the regret analysis.
    Paper,
    /// `τ_k = ⌈c·√T·2^k⌉` and radii proportional to `c/√τ_k` (see [`epoch_params`]).
    Scaled,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FpaConfig {
    pub horizon: u64,
    pub error_prob: f64,
    pub relaxation_constant: f64,
    /// Group 1 arrival share, known to the seller.
    pub q: f64,
    pub grid: PriceGrid,
    pub constants_mode: ConstantsMode,
    pub scale_factor: f64,
    /// Scaled mode: `δ_r = κ_r·c/√τ_k`.
    pub kappa_r: f64,
    /// Scaled mode: `δ_s = κ_s·c/√τ_k`.
    pub kappa_s: f64,
    pub seed: u64,
    pub oracle: OracleConfig,
}

impl FpaConfig {
    /// Scaled mode with the default constants.
    pub fn new(grid: PriceGrid, q: f64, horizon: u64, seed: u64) -> Self {
        FpaConfig {
            horizon,
            error_prob: DEFAULT_ERROR_PROB,
            relaxation_constant: DEFAULT_RELAXATION,
            q,
            grid,
            constants_mode: ConstantsMode::Scaled,
            scale_factor: DEFAULT_SCALE,
            kappa_r: SCALED_KAPPA_R,
            kappa_s: SCALED_KAPPA_S,
            seed,
            oracle: OracleConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Domain("horizon must be at least 1"));
        }
        if !(self.error_prob > 0.0 && self.error_prob < 1.0) {
            return Err(Error::Domain("error probability must lie in (0, 1)"));
        }
        if !(self.relaxation_constant > 0.0) || !self.relaxation_constant.is_finite() {
            return Err(Error::Domain("relaxation constant must be positive"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidShare(self.q));
        }
        if !(self.scale_factor > 0.0) || !self.scale_factor.is_finite() {
            return Err(Error::Domain("scale factor must be positive"));
        }
        for kappa in [self.kappa_r, self.kappa_s] {
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(Error::Domain("radius multipliers must be positive"));
            }
        }
        Ok(())
    }

    /// Whether `d ≤ T^{1/3}`, the regime the regret bound assumes. Advisory.
    pub fn dimension_within_regime(&self) -> bool {
        (self.grid.len() as f64) <= math::powf(self.horizon as f64, 1.0 / 3.0)
    }

    fn ln_horizon(&self) -> f64 {
        math::ln(self.horizon as f64).max(1.0)
    }
}

/// Length and confidence radii of one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochParams {
    pub tau_k: u64,
    pub delta_r: f64,
    pub delta_s: f64,
}

/// Warm-up length `min(T, max(1, ⌈2·ln T·ln(16/ε)⌉))`.
pub fn warmup_rounds(horizon: u64, error_prob: f64) -> u64 {
    let raw = math::ceil(2.0 * math::ln(horizon as f64) * math::ln(16.0 / error_prob));
    let raw = if raw.is_finite() && raw > 1.0 { raw as u64 } else { 1 };
    raw.min(horizon)
}

fn to_rounds(x: f64) -> u64 {
    let x = math::ceil(x);
    if x >= u64::MAX as f64 / 4.0 {
        u64::MAX / 4
    } else {
        (x as u64).max(1)
    }
}

/// Parameters of epoch `k ≥ 1`.
///
/// Paper mode: with `C_q = 3·max(1/q, 1/(1−q))`, `c_t = max(3, √(3/F̂_min))`
/// and `ℓ = ln(16d·ln T/ε)`,
/// `τ_k = (28C_q/3)·d√T·ℓ·2^k`,
/// `δ_r = 4c_t·ℓ·d^{3/2}·√(C_q/τ_k)` and
/// `δ_s = (32c_t/F̂_min²)·ℓ·d^{3/2}·√(C_q/τ_k)`.
///
/// Scaled mode: `τ_k = ⌈c√T·2^k⌉`, `δ_r = κ_r·c/√τ_k` and `δ_s = κ_s·c/√τ_k`.
pub fn epoch_params(k: usize, cfg: &FpaConfig, fmin_hat: f64) -> Result<EpochParams> {
    if k < 1 {
        return Err(Error::Domain("epochs are numbered from 1"));
    }
    if !(fmin_hat > 0.0) {
        return Err(Error::DegenerateDemand);
    }
    let sqrt_t = math::sqrt(cfg.horizon as f64);
    let doubling = math::powi(2.0, k as i32);
    match cfg.constants_mode {
        ConstantsMode::Paper => {
            let d = cfg.grid.len() as f64;
            let c_q = 3.0 * (1.0 / cfg.q).max(1.0 / (1.0 - cfg.q));
            let c_t = math::sqrt(3.0 / fmin_hat).max(3.0);
            let ell = math::ln(16.0 * d * cfg.ln_horizon() / cfg.error_prob);
            let tau_k = to_rounds(28.0 * c_q / 3.0 * d * sqrt_t * ell * doubling);
            let common = ell * math::powf(d, 1.5) * math::sqrt(c_q / tau_k as f64);
            Ok(EpochParams {
                tau_k,
                delta_r: 4.0 * c_t * common,
                delta_s: 32.0 * c_t / (fmin_hat * fmin_hat) * common,
            })
        }
        ConstantsMode::Scaled => {
            let c = cfg.scale_factor;
            let tau_k = to_rounds(c * sqrt_t * doubling);
            let radius = c / math::sqrt(tau_k as f64);
            Ok(EpochParams {
                tau_k,
                delta_r: cfg.kappa_r * radius,
                delta_s: cfg.kappa_s * radius,
            })
        }
    }
}

/// Per-epoch proposal (`M`) and acceptance (`N`) counts, indexed by group slot.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Counters {
    pub proposed: [Vec<u64>; 2],
    pub accepted: [Vec<u64>; 2],
}

impl Counters {
    pub fn new(d: usize) -> Self {
        Counters { proposed: [vec![0; d], vec![0; d]], accepted: [vec![0; d], vec![0; d]] }
    }

    pub fn total_proposed(&self, group: Group) -> u64 {
        self.proposed[group.slot()].iter().sum()
    }
}

/// What happened in one epoch, for traces.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EpochSummary {
    pub index: usize,
    pub params: EpochParams,
    /// Rounds actually played (less than `τ_k` when the horizon cut in).
    pub rounds: u64,
    pub active_set_size: usize,
    pub fhat: Option<AcceptanceModel>,
    pub incumbent: Option<PolicyPair>,
    pub incumbent_revenue: Option<f64>,
    pub revenue_floor: Option<f64>,
    /// False for the diagnostic elimination computed at the horizon.
    pub applied: bool,
    /// The empirical problem had no surviving candidate.
    pub ledger_infeasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Stage {
    Warmup { remaining: u64 },
    Epoch { k: usize, batch: usize, left: u64 },
    Done,
}

/// Agent state. Drive it with alternating [`FpaAgent::propose_price`] and
/// [`FpaAgent::observe`] calls.
#[derive(Debug, Clone)]
pub struct FpaAgent {
    cfg: FpaConfig,
    stage: Stage,
    rounds_played: u64,
    epoch_rounds: u64,
    pending: Option<(Group, usize)>,
    warmup: Counters,
    fmin_hat: f64,
    params: Option<EpochParams>,
    active: Vec<PolicyPair>,
    batch_rounds: Vec<u64>,
    index_sets: [Vec<bool>; 2],
    ledger: EliminationLedger,
    counters: Counters,
    incumbent: Option<PolicyPair>,
    warmup_policy: PolicyPair,
    history: Vec<EpochSummary>,
    rng: ChaCha8Rng,
}

impl FpaAgent {
    pub fn new(cfg: FpaConfig) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(AGENT_STREAM);
        let remaining = warmup_rounds(cfg.horizon, cfg.error_prob);
        Ok(FpaAgent {
            stage: Stage::Warmup { remaining },
            rounds_played: 0,
            epoch_rounds: 0,
            pending: None,
            warmup: Counters::new(d),
            fmin_hat: 0.0,
            params: None,
            active: Vec::new(),
            batch_rounds: Vec::new(),
            index_sets: [vec![true; d], vec![true; d]],
            ledger: EliminationLedger::new(cfg.q),
            counters: Counters::new(d),
            incumbent: None,
            warmup_policy: PolicyPair::fixed_price(d, d - 1),
            history: Vec::new(),
            rng,
            cfg,
        })
    }

    pub fn config(&self) -> &FpaConfig {
        &self.cfg
    }

    pub fn is_done(&self) -> bool {
        self.stage == Stage::Done
    }

    /// Current epoch: 0 during warm-up.
    pub fn epoch(&self) -> usize {
        match self.stage {
            Stage::Warmup { .. } => 0,
            Stage::Epoch { k, .. } => k,
            Stage::Done => self.history.last().map_or(0, |h| h.index),
        }
    }

    pub fn fmin_hat(&self) -> f64 {
        self.fmin_hat
    }

    pub fn ledger(&self) -> &EliminationLedger {
        &self.ledger
    }

    pub fn active_set(&self) -> &[PolicyPair] {
        &self.active
    }

    pub fn index_set(&self, group: Group) -> &[bool] {
        &self.index_sets[group.slot()]
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn history(&self) -> &[EpochSummary] {
        &self.history
    }

    pub fn epoch_params(&self) -> Option<EpochParams> {
        self.params
    }

    pub fn current_policy(&self) -> Result<&PolicyPair> {
        match self.stage {
            Stage::Warmup { .. } => Ok(&self.warmup_policy),
            Stage::Epoch { batch, .. } => Ok(&self.active[batch]),
            Stage::Done => Err(Error::Exhausted),
        }
    }

    pub fn propose_price(&mut self, group: Group) -> Result<usize> {
        if self.pending.is_some() {
            return Err(Error::Protocol("propose_price called twice without observe"));
        }
        let index = match self.stage {
            Stage::Warmup { .. } => {
                let i = self.cfg.grid.len() - 1;
                self.warmup.proposed[group.slot()][i] += 1;
                i
            }
            Stage::Epoch { batch, .. } => {
                let i = sample(self.active[batch].group(group), &mut self.rng);
                self.counters.proposed[group.slot()][i] += 1;
                i
            }
            Stage::Done => return Err(Error::Exhausted),
        };
        self.pending = Some((group, index));
        Ok(index)
    }

    pub fn observe(&mut self, group: Group, index: usize, accepted: bool) -> Result<()> {
        if self.pending != Some((group, index)) {
            return Err(Error::Protocol("observe does not match the last proposal"));
        }
        self.pending = None;
        self.rounds_played += 1;
        let horizon_reached = self.rounds_played >= self.cfg.horizon;
        match self.stage.clone() {
            Stage::Warmup { remaining } => {
                if accepted {
                    self.warmup.accepted[group.slot()][index] += 1;
                }
                if remaining > 1 {
                    self.stage = Stage::Warmup { remaining: remaining - 1 };
                    return Ok(());
                }
                self.stage = Stage::Done;
                self.fmin_hat = self.estimate_fmin()?;
                if !horizon_reached {
                    self.start_epoch(1)?;
                }
            }
            Stage::Epoch { k, batch, left } => {
                if accepted {
                    self.counters.accepted[group.slot()][index] += 1;
                }
                self.epoch_rounds += 1;
                self.stage = Stage::Epoch { k, batch, left: left - 1 };
                if horizon_reached {
                    self.finish_epoch(k, false)?;
                    self.stage = Stage::Done;
                } else if left == 1 && !self.advance_batch() {
                    self.finish_epoch(k, true)?;
                    self.start_epoch(k + 1)?;
                }
            }
            Stage::Done => return Err(Error::Exhausted),
        }
        Ok(())
    }

    /// Half the smallest per-group acceptance rate of `v_d` during warm-up.
    /// Groups that never arrived are skipped.
    fn estimate_fmin(&self) -> Result<f64> {
        let top = self.cfg.grid.len() - 1;
        let rate = Group::BOTH
            .iter()
            .filter_map(|g| {
                let m = self.warmup.proposed[g.slot()][top];
                (m > 0).then(|| self.warmup.accepted[g.slot()][top] as f64 / m as f64)
            })
            .fold(f64::INFINITY, f64::min);
        let fmin = rate / 2.0;
        if !(fmin > 0.0) || !fmin.is_finite() {
            return Err(Error::DegenerateDemand);
        }
        Ok(fmin)
    }

    fn start_epoch(&mut self, k: usize) -> Result<()> {
        let params = epoch_params(k, &self.cfg, self.fmin_hat)?;
        let remaining = self.cfg.horizon - self.rounds_played;
        let tau = params.tau_k.min(remaining);
        if k == 1 {
            self.active = self.build_roster()?;
        }
        let n = self.active.len() as u64;
        let share = tau / n;
        self.batch_rounds = vec![share; self.active.len()];
        if let Some(last) = self.batch_rounds.last_mut() {
            *last += tau - share * n;
        }
        self.params = Some(params);
        self.counters = Counters::new(self.cfg.grid.len());
        self.epoch_rounds = 0;
        self.stage = Stage::Epoch { k, batch: 0, left: self.batch_rounds[0] };
        if self.batch_rounds[0] == 0 {
            self.advance_batch();
        }
        Ok(())
    }

    /// Moves to the next batch with rounds left; false when the epoch is over.
    fn advance_batch(&mut self) -> bool {
        let Stage::Epoch { k, batch, .. } = self.stage else { return false };
        for next in batch + 1..self.batch_rounds.len() {
            if self.batch_rounds[next] > 0 {
                self.stage = Stage::Epoch { k, batch: next, left: self.batch_rounds[next] };
                return true;
            }
        }
        false
    }

    /// `F̂_e(i) = max(N/M, F̂_min)` on surviving indices with data, else `F̂_min`.
    pub fn estimate_model(&self) -> Result<AcceptanceModel> {
        let d = self.cfg.grid.len();
        let curve = |g: Group| -> Vec<f64> {
            (0..d)
                .map(|i| {
                    let m = self.counters.proposed[g.slot()][i];
                    if self.index_sets[g.slot()][i] && m > 0 {
                        (self.counters.accepted[g.slot()][i] as f64 / m as f64).max(self.fmin_hat)
                    } else {
                        self.fmin_hat
                    }
                })
                .collect()
        };
        AcceptanceModel::from_estimates(curve(Group::One), curve(Group::Two))
    }

    /// Runs the end-of-epoch elimination. When `apply` is false the result is
    /// only recorded for diagnostics.
    fn finish_epoch(&mut self, k: usize, apply: bool) -> Result<()> {
        let params = self.params.ok_or(Error::Protocol("epoch without parameters"))?;
        let fhat = self.estimate_model()?;
        let grid = &self.cfg.grid;
        let q = self.cfg.q;
        let (incumbent, infeasible) = match empirical_optimizer(
            &fhat,
            q,
            grid,
            params.delta_s,
            &self.ledger,
            &self.cfg.oracle,
            self.incumbent.as_ref(),
        ) {
            Ok(sol) => (sol.policy, false),
            Err(Error::LedgerInfeasible) => (best_fixed_price(&fhat, q, grid)?, true),
            Err(e) => return Err(e),
        };
        let incumbent_revenue = revenue_under(&incumbent, &fhat, q, grid)?;
        let floor = incumbent_revenue - params.delta_r - self.cfg.relaxation_constant * params.delta_s;
        let entry = LedgerEntry::new(k, fhat.clone(), params.delta_s, floor)?;
        let summary = EpochSummary {
            index: k,
            params,
            rounds: self.epoch_rounds,
            active_set_size: self.active.len(),
            fhat: Some(fhat),
            incumbent: Some(incumbent.clone()),
            incumbent_revenue: Some(incumbent_revenue),
            revenue_floor: Some(entry.revenue_floor),
            applied: apply,
            ledger_infeasible: infeasible,
        };
        self.history.push(summary);
        if apply {
            self.ledger.push(entry)?;
            self.incumbent = Some(incumbent);
            self.active = self.build_roster()?;
        }
        Ok(())
    }

    /// `A_k`: for each surviving (i, e) the surviving policy maximizing `π^e(i)`.
    fn build_roster(&mut self) -> Result<Vec<PolicyPair>> {
        let d = self.cfg.grid.len();
        let threshold = 1.0 / math::sqrt(self.cfg.horizon as f64);
        let extras: Vec<PolicyPair> = self.incumbent.iter().cloned().collect();
        let (fhat, delta_s) = match self.ledger.last() {
            Some(e) => (e.fhat.clone(), e.delta_s),
            None => (AcceptanceModel::from_estimates(vec![1.0; d], vec![1.0; d])?, 0.0),
        };
        let mut roster: Vec<PolicyPair> = Vec::new();
        for group in Group::BOTH {
            for i in 0..d {
                if !self.index_sets[group.slot()][i] {
                    continue;
                }
                let found = max_probability_policy(
                    i,
                    group,
                    &self.ledger,
                    &fhat,
                    delta_s,
                    &self.cfg.grid,
                    &self.cfg.oracle,
                    &extras,
                );
                let (policy, prob) = match found {
                    Ok(hit) => hit,
                    Err(Error::LedgerInfeasible) => {
                        self.index_sets[group.slot()][i] = false;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                if prob < threshold {
                    self.index_sets[group.slot()][i] = false;
                } else if !roster.iter().any(|p| p.distance(&policy) <= DEDUP_TOL) {
                    roster.push(policy);
                }
            }
        }
        if roster.is_empty() {
            roster.push(match &self.incumbent {
                Some(p) => p.clone(),
                None => PolicyPair::fixed_price(d, d - 1),
            });
        }
        Ok(roster)
    }
}

fn best_fixed_price(model: &AcceptanceModel, q: f64, grid: &PriceGrid) -> Result<PolicyPair> {
    let d = grid.len();
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..d {
        let r = revenue_under(&PolicyPair::fixed_price(d, i), model, q, grid)?;
        if r > best.1 {
            best = (i, r);
        }
    }
    Ok(PolicyPair::fixed_price(d, best.0))
}

/// Inverse-CDF draw that never returns a zero-weight index.
pub(crate) fn sample<R: Rng>(dist: &GroupDistribution, rng: &mut R) -> usize {
    let w = dist.weights();
    if let Some(i) = dist.atom() {
        return i;
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &wi) in w.iter().enumerate() {
        if wi <= 0.0 {
            continue;
        }
        acc += wi;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PriceGrid {
        PriceGrid::new(vec![0.625, 0.7, 1.0]).unwrap()
    }

    #[test]
    fn warmup_length() {
        assert_eq!(warmup_rounds(10_000, 0.05), 107);
        assert_eq!(warmup_rounds(1, 0.05), 1);
        assert_eq!(warmup_rounds(50, 0.05), 46);
    }

    #[test]
    fn paper_constants() {
        let mut cfg = FpaConfig::new(grid(), 0.3, 1_000_000, 0);
        cfg.constants_mode = ConstantsMode::Paper;
        let p = epoch_params(1, &cfg, 0.25).unwrap();
        let ell = (16.0 * 3.0 * (1e6f64).ln() / 0.05).ln();
        let tau = (280.0 / 3.0 * 3.0 * 1000.0 * ell * 2.0).ceil();
        assert_eq!(p.tau_k, tau as u64);
        assert!(p.tau_k > 5_000_000 && p.tau_k < 5_500_000);
        let c_t = 12f64.sqrt();
        let common = ell * 3f64.powf(1.5) * (10.0 / tau).sqrt();
        assert!((p.delta_r - 4.0 * c_t * common).abs() < 1e-12);
        assert!((p.delta_s - 32.0 * c_t / 0.0625 * common).abs() < 1e-9);
        assert!(epoch_params(0, &cfg, 0.25).is_err());
        assert_eq!(epoch_params(1, &cfg, 0.0), Err(Error::DegenerateDemand));
    }

    #[test]
    fn scaled_radii_shrink_by_root_two() {
        let cfg = FpaConfig::new(grid(), 0.3, 1_000_000, 0);
        let a = epoch_params(3, &cfg, 0.25).unwrap();
        let b = epoch_params(4, &cfg, 0.25).unwrap();
        assert_eq!(a.tau_k, 16_000);
        assert_eq!(b.tau_k, 32_000);
        assert!((a.delta_r / b.delta_r - 2f64.sqrt()).abs() < 1e-12);
        assert!((a.delta_s / b.delta_s - 2f64.sqrt()).abs() < 1e-12);
        assert!((a.delta_r - 1.0 / 16_000f64.sqrt()).abs() < 1e-15);
        assert!((a.delta_s - 0.9 / 16_000f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn warmup_proposes_highest_price() {
        let mut agent = FpaAgent::new(FpaConfig::new(grid(), 0.3, 10_000, 1)).unwrap();
        assert_eq!(agent.current_policy().unwrap(), &PolicyPair::fixed_price(3, 2));
        for g in Group::BOTH {
            let i = agent.propose_price(g).unwrap();
            assert_eq!(i, 2);
            agent.observe(g, i, true).unwrap();
        }
    }

    #[test]
    fn horizon_of_one() {
        let mut agent = FpaAgent::new(FpaConfig::new(grid(), 0.3, 1, 1)).unwrap();
        let i = agent.propose_price(Group::One).unwrap();
        assert_eq!(i, 2);
        agent.observe(Group::One, i, true).unwrap();
        assert!(agent.is_done());
        assert_eq!(agent.propose_price(Group::One), Err(Error::Exhausted));
        assert_eq!(agent.current_policy(), Err(Error::Exhausted));
    }

    #[test]
    fn protocol_is_enforced() {
        let mut agent = FpaAgent::new(FpaConfig::new(grid(), 0.3, 100, 1)).unwrap();
        assert!(matches!(agent.observe(Group::One, 2, true), Err(Error::Protocol(_))));
        agent.propose_price(Group::One).unwrap();
        assert!(matches!(agent.propose_price(Group::One), Err(Error::Protocol(_))));
        assert!(matches!(agent.observe(Group::Two, 2, true), Err(Error::Protocol(_))));
    }

    #[test]
    fn fmin_estimate_and_first_roster() {
        // 107 warm-up rounds: 60/80 acceptances in group 1, 20/27 in group 2.
        let mut agent = FpaAgent::new(FpaConfig::new(grid(), 0.3, 10_000, 1)).unwrap();
        for (g, n, acc) in [(Group::One, 80, 60), (Group::Two, 27, 20)] {
            for j in 0..n {
                let i = agent.propose_price(g).unwrap();
                agent.observe(g, i, j < acc).unwrap();
            }
        }
        assert!((agent.fmin_hat() - (20.0 / 27.0) / 2.0).abs() < 1e-15);
        assert_eq!(agent.epoch(), 1);
        let roster = agent.active_set();
        assert_eq!(roster.len(), 3);
        for (i, p) in roster.iter().enumerate() {
            assert_eq!(p.fixed_price_index(), Some(i));
        }
    }

    #[test]
    fn zero_warmup_acceptance_is_degenerate() {
        let mut agent = FpaAgent::new(FpaConfig::new(grid(), 0.3, 10_000, 1)).unwrap();
        let mut last = Ok(());
        for _ in 0..107 {
            let i = agent.propose_price(Group::One).unwrap();
            last = agent.observe(Group::One, i, false);
        }
        assert_eq!(last, Err(Error::DegenerateDemand));
    }

    #[test]
    fn sampling_matches_weights() {
        let dist = GroupDistribution::new(vec![0.0, 25.0 / 29.0, 4.0 / 29.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample(&dist, &mut rng)] += 1;
        }
        assert_eq!(counts[0], 0);
        let p = 25.0 / 29.0;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((counts[1] as f64 / n as f64 - p).abs() < 3.0 * sd);
    }
}
