use fairprice_core::fpa::{FpaAgent, FpaConfig};
use fairprice_core::oracle::{closed_form_example_optimum, solve_fair_optimal, OracleConfig};
use fairprice_core::pricing::procedural_unfairness;
use fairprice_core::sim::{
    baseline_agent, example1_market, example_eps_market, run_episode, stream_rng, Agent,
    BaselineKind, SimConfig, StaticAgent, UcbFixedAgent, ENV_STREAM,
};
use fairprice_core::{Group, GroupDistribution, PolicyPair};
use rand::Rng;

#[test]
fn fpa_invariants_hold_every_round() {
    let market = example1_market();
    let d = market.grid.len();
    let mut agent = FpaAgent::new(FpaConfig::new(market.grid.clone(), market.q, 20_000, 3)).unwrap();
    let mut env = stream_rng(3, ENV_STREAM);
    let mut arrivals = [0u64; 2];
    let mut prev_sets: Option<[Vec<bool>; 2]> = None;
    let mut epoch = agent.epoch();
    while !agent.is_done() {
        let policy = agent.current_policy().unwrap().clone();
        assert!(procedural_unfairness(&policy, &market.grid).unwrap() <= 1e-9);
        assert!(agent.active_set().len() <= 2 * d);
        let group = if env.gen_bool(market.q) { Group::One } else { Group::Two };
        let i = agent.propose_price(group).unwrap();
        let accepted = env.gen_bool(market.model.curve(group)[i]);
        agent.observe(group, i, accepted).unwrap();
        if agent.is_done() {
            break;
        }
        if agent.epoch() != epoch {
            epoch = agent.epoch();
            arrivals = [0, 0];
            let sets = [agent.index_set(Group::One).to_vec(), agent.index_set(Group::Two).to_vec()];
            if let Some(prev) = &prev_sets {
                for s in 0..2 {
                    for k in 0..d {
                        assert!(prev[s][k] || !sets[s][k], "index set grew at epoch {epoch}");
                    }
                }
            }
            prev_sets = Some(sets);
        } else if epoch >= 1 {
            arrivals[group.slot()] += 1;
            for g in Group::BOTH {
                assert_eq!(agent.counters().total_proposed(g), arrivals[g.slot()]);
            }
        }
    }
    assert!(epoch >= 3);
}

#[test]
fn fpa_is_deterministic() {
    let market = example1_market();
    let run = || {
        let mut agent = FpaAgent::new(FpaConfig::new(market.grid.clone(), market.q, 5_000, 11)).unwrap();
        run_episode(&mut agent, &SimConfig::new(market.clone(), 5_000, 11)).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert!(a.cumulative_u <= 1e-9);
}

#[test]
fn static_agent_sampling_matches_policy() {
    let d2 = GroupDistribution::new(vec![0.0, 25.0 / 29.0, 4.0 / 29.0]).unwrap();
    let policy = PolicyPair::new(d2.clone(), d2).unwrap();
    let mut agent = StaticAgent::new("probe", policy, 5);
    let n = 100_000;
    let mut counts = [0u64; 3];
    for _ in 0..n {
        let i = agent.propose_price(Group::Two).unwrap();
        agent.observe(Group::Two, i, false).unwrap();
        counts[i] += 1;
    }
    assert_eq!(counts[0], 0);
    let p = 25.0 / 29.0;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    assert!((counts[1] as f64 - n as f64 * p).abs() <= 3.0 * sigma);
}

#[test]
fn fixed_price_one_earns_half() {
    let market = example1_market();
    let mut agent = StaticAgent::new("fixed", PolicyPair::fixed_price(3, 2), 9);
    let t = 100_000;
    let mut sim = SimConfig::new(market, t, 9);
    sim.record_every = 0;
    let trace = run_episode(&mut agent, &sim).unwrap();
    let mean = trace.total_reward / t as f64;
    let sigma = 0.5 / (t as f64).sqrt();
    assert!((mean - 0.5).abs() <= 3.0 * sigma);
    assert_eq!(trace.cumulative_s, 0.0);
    assert_eq!(trace.cumulative_u, 0.0);
}

#[test]
fn fair_oracle_has_no_regret_or_unfairness() {
    let market = example1_market();
    let mut agent =
        baseline_agent(BaselineKind::FairOracle, &market, &OracleConfig::default(), 4).unwrap();
    let trace = run_episode(agent.as_mut(), &SimConfig::new(market, 10_000, 4)).unwrap();
    assert!(trace.cumulative_regret.abs() <= 1e-9);
    assert!(trace.cumulative_s <= 1e-9);
    assert!(trace.cumulative_u <= 1e-9);
    assert_eq!(trace.records.len(), 10_000);
}

#[test]
fn groupwise_oracle_picks_each_groups_best_price() {
    let market = example1_market();
    let agent =
        baseline_agent(BaselineKind::GroupwiseUnconstrainedOracle, &market, &OracleConfig::default(), 0)
            .unwrap();
    let policy = agent.current_policy().unwrap();
    assert_eq!(policy.group1.atom(), Some(2));
    assert_eq!(policy.group2.atom(), Some(1));
}

#[test]
fn ucb_regret_against_best_fixed_is_small() {
    let market = example1_market();
    let t = 100_000u64;
    let mut agent = UcbFixedAgent::new(market.grid.clone());
    let mut sim = SimConfig::new(market.clone(), t, 21);
    sim.record_every = 0;
    let trace = run_episode(&mut agent, &sim).unwrap();
    let regret_vs_fixed = 0.5 * t as f64 - trace.total_reward;
    assert!(regret_vs_fixed < 0.05 * t as f64);
    assert_eq!(trace.cumulative_u, 0.0);
}

#[test]
fn perturbed_oracle_tracks_closed_form() {
    let market = example_eps_market(0.001).unwrap();
    let sol = solve_fair_optimal(&market, &OracleConfig::default()).unwrap();
    let cf = closed_form_example_optimum(0.001).unwrap();
    assert!((sol.revenue - cf.revenue).abs() <= 1e-4);
}
