//! Seeded market simulation.
//!
//! Each round a customer from Group 1 (probability `q`) or Group 2 arrives,
//! the agent proposes a price index, and the customer accepts with
//! probability `F_e(i)`. Regret, `U` and `S` are recorded in expectation for
//! the policy in force, not for the single realized price.
//!
//! The environment draws from stream [`ENV_STREAM`] of its seed. Agents keep
//! their own generators, so swapping agents leaves the arrival and acceptance
//! randomness untouched.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fpa::{sample, EpochSummary, FpaAgent, AGENT_STREAM};
use crate::math;
use crate::oracle::{example_model, solve_fair_optimal, OracleConfig, EXAMPLE_PRICES, EXAMPLE_Q};
use crate::pricing::{
    expected_revenue, procedural_unfairness, substantive_unfairness, AcceptanceModel, MarketConfig,
    PolicyPair, PriceGrid,
};
use crate::Group;

/// RNG stream used by the environment.
pub const ENV_STREAM: u64 = 0;

/// A generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Agent-side facts attached to a trace.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AgentMeta {
    pub name: &'static str,
    pub fmin_hat: Option<f64>,
    pub epochs: Vec<EpochSummary>,
    pub ledger_len: usize,
}

/// An online pricing agent. Calls strictly alternate
/// `propose_price` / `observe`.
pub trait Agent {
    /// The policy the next proposal is drawn from.
    fn current_policy(&self) -> Result<&PolicyPair>;
    fn propose_price(&mut self, group: Group) -> Result<usize>;
    fn observe(&mut self, group: Group, index: usize, accepted: bool) -> Result<()>;
    /// Epoch label for traces; 0 when the agent has no epochs.
    fn epoch(&self) -> usize {
        0
    }
    fn meta(&self) -> AgentMeta;
}

impl Agent for FpaAgent {
    fn current_policy(&self) -> Result<&PolicyPair> {
        FpaAgent::current_policy(self)
    }

    fn propose_price(&mut self, group: Group) -> Result<usize> {
        FpaAgent::propose_price(self, group)
    }

    fn observe(&mut self, group: Group, index: usize, accepted: bool) -> Result<()> {
        FpaAgent::observe(self, group, index, accepted)
    }

    fn epoch(&self) -> usize {
        FpaAgent::epoch(self)
    }

    fn meta(&self) -> AgentMeta {
        AgentMeta {
            name: "fpa",
            fmin_hat: Some(self.fmin_hat()),
            epochs: self.history().to_vec(),
            ledger_len: self.ledger().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SimConfig {
    pub market: MarketConfig,
    pub horizon: u64,
    pub seed: u64,
    /// Keep every `record_every`-th round (rounds 1, 1+n, 1+2n, …);
    /// 0 keeps none. Cumulative metrics always cover every round.
    pub record_every: u64,
    pub oracle: OracleConfig,
}

impl SimConfig {
    pub fn new(market: MarketConfig, horizon: u64, seed: u64) -> Self {
        SimConfig { market, horizon, seed, record_every: 1, oracle: OracleConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RoundRecord {
    /// 1-based round number.
    pub t: u64,
    pub group: Group,
    /// 0-based price index.
    pub price_index: usize,
    pub accepted: bool,
    pub reward: f64,
    pub inst_regret: f64,
    pub inst_s: f64,
    pub inst_u: f64,
    pub epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RunTrace {
    pub records: Vec<RoundRecord>,
    pub rounds: u64,
    pub total_reward: f64,
    pub cumulative_regret: f64,
    pub cumulative_s: f64,
    pub cumulative_u: f64,
    pub oracle_revenue: f64,
    pub agent_meta: AgentMeta,
}

/// Runs `agent` for `sim.horizon` rounds against `sim.market`, measuring
/// regret against the fair optimum.
pub fn run_episode(agent: &mut dyn Agent, sim: &SimConfig) -> Result<RunTrace> {
    let optimum = solve_fair_optimal(&sim.market, &sim.oracle)?;
    run_episode_against(agent, sim, optimum.revenue)
}

/// As [`run_episode`], with a precomputed benchmark revenue.
pub fn run_episode_against(
    agent: &mut dyn Agent,
    sim: &SimConfig,
    oracle_revenue: f64,
) -> Result<RunTrace> {
    if sim.horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1"));
    }
    let market = &sim.market;
    let mut env = stream_rng(sim.seed, ENV_STREAM);
    let mut trace = RunTrace {
        records: Vec::new(),
        rounds: 0,
        total_reward: 0.0,
        cumulative_regret: 0.0,
        cumulative_s: 0.0,
        cumulative_u: 0.0,
        oracle_revenue,
        agent_meta: AgentMeta::default(),
    };
    let mut cached: Option<(PolicyPair, [f64; 3])> = None;
    for t in 1..=sim.horizon {
        let policy = agent.current_policy()?;
        let metrics = match &cached {
            Some((p, m)) if p == policy => *m,
            _ => {
                let m = [
                    oracle_revenue - expected_revenue(policy, market)?,
                    substantive_unfairness(policy, market)?,
                    procedural_unfairness(policy, &market.grid)?,
                ];
                cached = Some((policy.clone(), m));
                m
            }
        };
        let epoch = agent.epoch();
        let group = if env.gen::<f64>() < market.q { Group::One } else { Group::Two };
        let index = agent.propose_price(group)?;
        if index >= market.grid.len() {
            return Err(Error::Protocol("agent proposed an index outside the grid"));
        }
        let accepted = env.gen::<f64>() < market.model.curve(group)[index];
        agent.observe(group, index, accepted)?;

        let reward = if accepted { market.grid.price(index) } else { 0.0 };
        trace.total_reward += reward;
        trace.cumulative_regret += metrics[0];
        trace.cumulative_s += metrics[1];
        trace.cumulative_u += metrics[2];
        trace.rounds = t;
        if sim.record_every > 0 && (t - 1) % sim.record_every == 0 {
            trace.records.push(RoundRecord {
                t,
                group,
                price_index: index,
                accepted,
                reward,
                inst_regret: metrics[0],
                inst_s: metrics[1],
                inst_u: metrics[2],
                epoch,
            });
        }
    }
    trace.agent_meta = agent.meta();
    Ok(trace)
}

/// The three-price motivating example: `q = 0.3`, `v = [5/8, 7/10, 1]`,
/// `F₁ = [3/5, 1/2, 1/2]`, `F₂ = [4/5, 4/5, 1/2]`.
pub fn example1_market() -> MarketConfig {
    example_eps_market(0.0).expect("example market is valid")
}

/// The example with both groups' `0.5` acceptance entries lowered to `0.5 − ε`.
pub fn example_eps_market(eps: f64) -> Result<MarketConfig> {
    let grid = PriceGrid::new(EXAMPLE_PRICES.to_vec())?;
    MarketConfig::new(grid, example_model(eps)?, EXAMPLE_Q)
}

/// Members of the hard pair family: `d` prices `a_i = 4(1+ε)^i` with
/// `ε = √(d/T)`, acceptance `1/a_i`, so every `a_i·F(i) = 1`. For `j ≥ 1`
/// price `j` is bumped to acceptance `(1+ε)/a_j`, lifting its unscaled revenue
/// by exactly `ε`. Prices are reported divided by `a_d`, which leaves
/// acceptance untouched and scales every revenue by `1/a_d`. Both groups are
/// identical and `q = 1/2`.
pub fn lowerbound_family_market(j: usize, d: usize, horizon: u64) -> Result<MarketConfig> {
    if d < 3 {
        return Err(Error::Domain("the family needs at least three prices"));
    }
    if j > d {
        return Err(Error::Domain("bumped index must lie in 0..=d"));
    }
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1"));
    }
    let eps = lowerbound_gap(d, horizon);
    let a: Vec<f64> = (1..=d).map(|i| 4.0 * math::powi(1.0 + eps, i as i32)).collect();
    let top = a[d - 1];
    let prices = a.iter().map(|ai| ai / top).collect();
    let mut accept: Vec<f64> = a.iter().map(|ai| 1.0 / ai).collect();
    if j >= 1 {
        // (1+ε)/a_j equals 1/a_{j−1}; the clamp keeps rounding from breaking monotonicity.
        let bumped = (1.0 + eps) / a[j - 1];
        accept[j - 1] = if j >= 2 { bumped.min(accept[j - 2]) } else { bumped };
    }
    let f_min = accept[d - 1];
    let model = AcceptanceModel::new(accept.clone(), accept, f_min)?;
    MarketConfig::new(PriceGrid::new(prices)?, model, 0.5)
}

/// `ε = √(d/T)`, the revenue gap of the hard family in unscaled units.
pub fn lowerbound_gap(d: usize, horizon: u64) -> f64 {
    math::sqrt(d as f64 / horizon as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BaselineKind {
    /// The same best single price for both groups.
    BestFixedOracle,
    /// UCB1 over single prices shared by both groups.
    UcbFixed,
    /// Each group's own best price; ignores fairness.
    GroupwiseUnconstrainedOracle,
    /// The fair optimum.
    FairOracle,
}

/// A fixed policy, possibly randomized.
#[derive(Debug, Clone)]
pub struct StaticAgent {
    name: &'static str,
    policy: PolicyPair,
    rng: ChaCha8Rng,
    pending: Option<(Group, usize)>,
}

impl StaticAgent {
    pub fn new(name: &'static str, policy: PolicyPair, seed: u64) -> Self {
        StaticAgent { name, policy, rng: stream_rng(seed, AGENT_STREAM), pending: None }
    }
}

impl Agent for StaticAgent {
    fn current_policy(&self) -> Result<&PolicyPair> {
        Ok(&self.policy)
    }

    fn propose_price(&mut self, group: Group) -> Result<usize> {
        if self.pending.is_some() {
            return Err(Error::Protocol("propose_price called twice without observe"));
        }
        let i = sample(self.policy.group(group), &mut self.rng);
        self.pending = Some((group, i));
        Ok(i)
    }

    fn observe(&mut self, group: Group, index: usize, _accepted: bool) -> Result<()> {
        if self.pending.take() != Some((group, index)) {
            return Err(Error::Protocol("observe does not match the last proposal"));
        }
        Ok(())
    }

    fn meta(&self) -> AgentMeta {
        AgentMeta { name: self.name, ..AgentMeta::default() }
    }
}

/// UCB1 over the `d` single prices, rewarding `v_i` on acceptance.
#[derive(Debug, Clone)]
pub struct UcbFixedAgent {
    grid: PriceGrid,
    pulls: Vec<u64>,
    rewards: Vec<f64>,
    arm: usize,
    policy: PolicyPair,
    pending: Option<(Group, usize)>,
}

impl UcbFixedAgent {
    pub fn new(grid: PriceGrid) -> Self {
        let d = grid.len();
        UcbFixedAgent {
            pulls: vec![0; d],
            rewards: vec![0.0; d],
            arm: 0,
            policy: PolicyPair::fixed_price(d, 0),
            pending: None,
            grid,
        }
    }

    fn choose(&self) -> usize {
        if let Some(i) = self.pulls.iter().position(|&n| n == 0) {
            return i;
        }
        let total: u64 = self.pulls.iter().sum();
        let ln_t = math::ln(total as f64);
        let mut best = (0, f64::NEG_INFINITY);
        for (i, (&n, &r)) in self.pulls.iter().zip(&self.rewards).enumerate() {
            let index = r / n as f64 + math::sqrt(2.0 * ln_t / n as f64);
            if index > best.1 {
                best = (i, index);
            }
        }
        best.0
    }
}

impl Agent for UcbFixedAgent {
    fn current_policy(&self) -> Result<&PolicyPair> {
        Ok(&self.policy)
    }

    fn propose_price(&mut self, group: Group) -> Result<usize> {
        if self.pending.is_some() {
            return Err(Error::Protocol("propose_price called twice without observe"));
        }
        self.pending = Some((group, self.arm));
        Ok(self.arm)
    }

    fn observe(&mut self, group: Group, index: usize, accepted: bool) -> Result<()> {
        if self.pending.take() != Some((group, index)) {
            return Err(Error::Protocol("observe does not match the last proposal"));
        }
        self.pulls[index] += 1;
        if accepted {
            self.rewards[index] += self.grid.price(index);
        }
        let next = self.choose();
        if next != self.arm {
            self.arm = next;
            self.policy = PolicyPair::fixed_price(self.grid.len(), next);
        }
        Ok(())
    }

    fn meta(&self) -> AgentMeta {
        AgentMeta { name: "ucb_fixed", ..AgentMeta::default() }
    }
}

/// Index of the best single price, `argmaxᵢ vᵢ(qF₁(i) + (1−q)F₂(i))`.
pub fn best_fixed_index(market: &MarketConfig) -> usize {
    let d = market.grid.len();
    let f1 = market.model.curve(Group::One);
    let f2 = market.model.curve(Group::Two);
    let value = |i: usize| market.grid.price(i) * (market.q * f1[i] + (1.0 - market.q) * f2[i]);
    (0..d).fold(0, |best, i| if value(i) > value(best) { i } else { best })
}

/// Builds a comparison agent. Oracle variants read the true market; the
/// learner only uses its price grid.
pub fn baseline_agent(
    kind: BaselineKind,
    market: &MarketConfig,
    oracle: &OracleConfig,
    seed: u64,
) -> Result<Box<dyn Agent>> {
    let d = market.grid.len();
    Ok(match kind {
        BaselineKind::BestFixedOracle => Box::new(StaticAgent::new(
            "best_fixed_oracle",
            PolicyPair::fixed_price(d, best_fixed_index(market)),
            seed,
        )),
        BaselineKind::UcbFixed => Box::new(UcbFixedAgent::new(market.grid.clone())),
        BaselineKind::GroupwiseUnconstrainedOracle => {
            let best = |g: Group| {
                let f = market.model.curve(g);
                (0..d).fold(0, |b, i| {
                    if market.grid.price(i) * f[i] > market.grid.price(b) * f[b] {
                        i
                    } else {
                        b
                    }
                })
            };
            let policy = PolicyPair::new(
                crate::GroupDistribution::point_mass(d, best(Group::One)),
                crate::GroupDistribution::point_mass(d, best(Group::Two)),
            )?;
            Box::new(StaticAgent::new("groupwise_unconstrained_oracle", policy, seed))
        }
        BaselineKind::FairOracle => {
            let sol = solve_fair_optimal(market, oracle)?;
            Box::new(StaticAgent::new("fair_oracle", sol.policy, seed))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpa::FpaConfig;

    #[test]
    fn presets() {
        let m = example1_market();
        assert!(m.model.is_monotone());
        assert_eq!(best_fixed_index(&m), 2);
        assert_eq!(example_eps_market(0.0).unwrap(), m);
        assert!(example_eps_market(0.01).unwrap().model.is_monotone());
        assert!(example_eps_market(0.5).is_err());
        assert!(example_eps_market(-0.1).is_err());
    }

    #[test]
    fn lowerbound_family_shape() {
        let (d, t) = (3, 10_000);
        let eps = lowerbound_gap(d, t);
        let flat = lowerbound_family_market(0, d, t).unwrap();
        let top = 4.0 * (1.0 + eps).powi(3);
        for i in 0..d {
            let r = flat.grid.price(i) * flat.model.curve(Group::One)[i];
            assert!((r * top - 1.0).abs() < 1e-12);
            assert!(flat.model.curve(Group::One)[i] <= 0.25);
        }
        let bumped = lowerbound_family_market(2, d, t).unwrap();
        let r: Vec<f64> =
            (0..d).map(|i| bumped.grid.price(i) * bumped.model.curve(Group::One)[i] * top).collect();
        assert!((r[1] - r[0] - eps).abs() < 1e-12);
        assert!(r[1] > r[2]);
        assert!(lowerbound_family_market(4, 3, t).is_err());
        assert!(lowerbound_family_market(1, 2, t).is_err());
    }

    #[test]
    fn fixed_price_revenue_is_half() {
        let m = example1_market();
        let mut agent = StaticAgent::new("fixed", PolicyPair::fixed_price(3, 2), 3);
        let sim = SimConfig { record_every: 0, ..SimConfig::new(m, 100_000, 11) };
        let trace = run_episode(&mut agent, &sim).unwrap();
        let n = 100_000.0;
        let mean = trace.total_reward / n;
        // Reward is 1 with probability 1/2.
        assert!((mean - 0.5).abs() < 3.0 * (0.25f64 / n).sqrt());
        assert!((trace.cumulative_regret - n * 3.0 / 290.0).abs() < 1e-6);
        assert_eq!(trace.cumulative_s, 0.0);
        assert_eq!(trace.cumulative_u, 0.0);
    }

    #[test]
    fn fair_oracle_has_zero_expected_regret() {
        let m = example1_market();
        let mut agent = baseline_agent(BaselineKind::FairOracle, &m, &OracleConfig::default(), 5).unwrap();
        let sim = SimConfig::new(m, 10_000, 5);
        let trace = run_episode(agent.as_mut(), &sim).unwrap();
        assert!(trace.cumulative_regret.abs() < 1e-9);
        assert!(trace.cumulative_s < 1e-9);
        assert!(trace.cumulative_u < 1e-9);
        assert_eq!(trace.records.len(), 10_000);
    }

    #[test]
    fn groupwise_oracle_prices() {
        let m = example1_market();
        let agent =
            baseline_agent(BaselineKind::GroupwiseUnconstrainedOracle, &m, &OracleConfig::default(), 0)
                .unwrap();
        let p = agent.current_policy().unwrap();
        assert_eq!(p.group1.atom(), Some(2));
        assert_eq!(p.group2.atom(), Some(1));
    }

    #[test]
    fn replay_is_identical() {
        let m = example1_market();
        let run = || {
            let cfg = FpaConfig::new(m.grid.clone(), m.q, 20_000, 7);
            let mut agent = FpaAgent::new(cfg).unwrap();
            run_episode(&mut agent, &SimConfig::new(m.clone(), 20_000, 7)).unwrap()
        };
        assert_eq!(run(), run());
    }
}
