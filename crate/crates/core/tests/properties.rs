use fairprice_core::linalg::{
    lp_maximize, solve_linear_system, vertex_enumerate, LinearProgram, LinearSystem,
};
use fairprice_core::pricing::{
    expected_accepted_price, expected_revenue, procedural_unfairness, substantive_unfairness,
    substantive_unfairness_under,
};
use fairprice_core::{AcceptanceModel, Error, Group, GroupDistribution, MarketConfig, PolicyPair, PriceGrid};
use proptest::prelude::*;

fn grid_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.95, d).prop_map(|mut v| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = 0.0;
        for x in v.iter_mut() {
            if *x <= prev + 1e-3 {
                *x = prev + 1e-3;
            }
            prev = *x;
        }
        v
    })
}

fn curve_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, d).prop_map(|mut v| {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

fn dist_strategy(d: usize) -> impl Strategy<Value = GroupDistribution> {
    prop::collection::vec(0.0f64..1.0, d).prop_map(|mut w| {
        w[0] += 1e-3;
        GroupDistribution::normalized(w).unwrap()
    })
}

fn market_strategy() -> impl Strategy<Value = (MarketConfig, PolicyPair, PolicyPair)> {
    (2usize..7).prop_flat_map(|d| {
        (
            grid_strategy(d),
            curve_strategy(d),
            curve_strategy(d),
            0.05f64..0.95,
            dist_strategy(d),
            dist_strategy(d),
            dist_strategy(d),
            dist_strategy(d),
        )
            .prop_map(|(v, f1, f2, q, a1, a2, b1, b2)| {
                let grid = PriceGrid::new(v).unwrap();
                let model = AcceptanceModel::new(f1, f2, 0.05).unwrap();
                let market = MarketConfig::new(grid, model, q).unwrap();
                (market, PolicyPair::new(a1, a2).unwrap(), PolicyPair::new(b1, b2).unwrap())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn revenue_is_linear_in_mixtures((market, a, b) in market_strategy(), lambda in 0.0f64..1.0) {
        let mixed = a.mix(&b, lambda).unwrap();
        let lhs = expected_revenue(&mixed, &market).unwrap();
        let rhs = lambda * expected_revenue(&a, &market).unwrap()
            + (1.0 - lambda) * expected_revenue(&b, &market).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn substantive_gap_ignores_per_group_scaling(
        (market, a, _b) in market_strategy(),
        c1 in 0.1f64..1.0,
        c2 in 0.1f64..1.0,
    ) {
        let s = substantive_unfairness(&a, &market).unwrap();
        let f1: Vec<f64> = market.model.curve(Group::One).iter().map(|f| c1 * f).collect();
        let f2: Vec<f64> = market.model.curve(Group::Two).iter().map(|f| c2 * f).collect();
        let scaled = AcceptanceModel::from_estimates(f1, f2).unwrap();
        let t = substantive_unfairness_under(&a, &scaled, &market.grid).unwrap();
        prop_assert!((s - t).abs() <= 1e-12);
    }

    #[test]
    fn accepted_mean_never_exceeds_proposed_mean((market, a, _b) in market_strategy()) {
        for g in Group::BOTH {
            let dist = a.group(g);
            let accepted = expected_accepted_price(dist, market.model.curve(g), &market.grid).unwrap();
            let proposed = market.grid.mean(dist).unwrap();
            prop_assert!(accepted <= proposed + 1e-12);
        }
    }

    #[test]
    fn same_policy_for_both_groups_has_zero_procedural_gap((market, a, _b) in market_strategy()) {
        let p = PolicyPair::new(a.group1.clone(), a.group1.clone()).unwrap();
        prop_assert_eq!(procedural_unfairness(&p, &market.grid).unwrap(), 0.0);
    }

    #[test]
    fn linear_solve_has_small_residual(
        n in 1usize..8,
        seed in prop::collection::vec(-1.0f64..1.0, 64 + 8),
    ) {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                rows[i][j] = seed[i * 8 + j];
            }
            rows[i][i] += n as f64 + 1.0;
        }
        let rhs: Vec<f64> = seed[64..64 + n].to_vec();
        let sys = LinearSystem::new(rows, rhs.clone()).unwrap();
        let x = solve_linear_system(&sys).unwrap();
        let ax = sys.apply(&x);
        let residual = ax.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(residual <= 1e-12);
    }

    #[test]
    fn linear_solve_is_permutation_invariant(
        n in 2usize..7,
        seed in prop::collection::vec(-1.0f64..1.0, 64 + 8),
        shift in 1usize..6,
    ) {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                rows[i][j] = seed[i * 8 + j];
            }
            rows[i][i] += n as f64;
        }
        let rhs: Vec<f64> = seed[64..64 + n].to_vec();
        let x = solve_linear_system(&LinearSystem::new(rows.clone(), rhs.clone()).unwrap()).unwrap();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let prows = perm.iter().map(|&i| rows[i].clone()).collect();
        let prhs = perm.iter().map(|&i| rhs[i]).collect();
        let y = solve_linear_system(&LinearSystem::new(prows, prhs).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn singular_system_is_rejected() {
    let sys = LinearSystem::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).unwrap();
    assert!(matches!(solve_linear_system(&sys), Err(Error::Singular { .. })));
}

fn random_lp(rng: &mut impl rand::Rng) -> LinearProgram {
    let n = rng.gen_range(2..=5);
    let m = rng.gen_range(1..=5);
    let objective = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut lp = LinearProgram::new(objective).le(vec![1.0; n], rng.gen_range(0.5..3.0));
    for _ in 0..m {
        let row = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        lp = lp.le(row, rng.gen_range(-0.3..1.0));
    }
    if rng.gen_bool(0.3) {
        let row = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        lp = lp.eq(row, rng.gen_range(0.0..1.0));
    }
    lp
}

#[test]
fn simplex_matches_vertex_enumeration() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_240_501);
    let (mut feasible, mut infeasible) = (0, 0);
    for k in 0..500 {
        let lp = random_lp(&mut rng);
        match (lp_maximize(&lp), vertex_enumerate(&lp)) {
            (Ok(a), Ok(b)) => {
                assert!((a.value - b.value).abs() <= 1e-8, "lp {k}: {} vs {}", a.value, b.value);
                assert!(lp.max_violation(&a.x) <= 1e-8);
                feasible += 1;
            }
            (Err(Error::Infeasible), Err(Error::Infeasible)) => infeasible += 1,
            (a, b) => panic!("lp {k}: verdicts differ: {a:?} vs {b:?}"),
        }
    }
    assert!(feasible > 100 && infeasible > 10, "{feasible} feasible, {infeasible} infeasible");
}
