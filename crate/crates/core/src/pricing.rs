//! Domain types and exact policy metrics.
//!
//! For a policy `π = (π¹, π²)` on the grid `v` and acceptance curves `F₁, F₂`:
//!
//! - revenue `R(π) = q·vᵀF₁π¹ + (1−q)·vᵀF₂π²`,
//! - procedural unfairness `U(π) = |vᵀπ¹ − vᵀπ²|`,
//! - substantive unfairness `S(π) = |vᵀF₁π¹ / 𝟙ᵀF₁π¹ − vᵀF₂π² / 𝟙ᵀF₂π²|`,
//! - per-round regret `R(π_*) − R(π)`, which is negative for unfair policies
//!   that beat the fair optimum.
//!
//! All metrics are expectations over the policy's price draws; none of them
//! looks at a realized sale.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::Group;

/// Tolerance on `Σ π(i) = 1` accepted at construction.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Acceptance floor used for generated instances when none is given.
pub const DEFAULT_F_MIN: f64 = 0.05;

/// The fixed, strictly increasing price vector `0 < v₁ < … < v_d ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PriceGrid {
    prices: Vec<f64>,
}

impl PriceGrid {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if prices.len() < 2 {
            return Err(Error::InvalidGrid("need at least two prices"));
        }
        if prices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("prices must be finite"));
        }
        if prices[0] <= 0.0 {
            return Err(Error::InvalidGrid("prices must be positive"));
        }
        if prices[prices.len() - 1] > 1.0 {
            return Err(Error::InvalidGrid("prices must not exceed 1"));
        }
        if prices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("prices must be strictly increasing"));
        }
        Ok(PriceGrid { prices })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Number of prices `d`.
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn lowest(&self) -> f64 {
        self.prices[0]
    }

    pub fn highest(&self) -> f64 {
        self.prices[self.prices.len() - 1]
    }

    pub fn price(&self, index: usize) -> f64 {
        self.prices[index]
    }

    /// Expected proposed price `vᵀπ`.
    pub fn mean(&self, dist: &GroupDistribution) -> Result<f64> {
        check_dim(self.len(), dist.len())?;
        Ok(dot(&self.prices, dist.weights()))
    }
}

/// A probability distribution over the price grid for one group.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GroupDistribution {
    weights: Vec<f64>,
}

impl GroupDistribution {
    /// Validates `weights ∈ [0,1]` and `|Σ weights − 1| ≤ 1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0 || *w > 1.0) {
            return Err(Error::InvalidDistribution("weights must lie in [0, 1]"));
        }
        let total: f64 = weights.iter().sum();
        if math::abs(total - 1.0) > SIMPLEX_TOL {
            return Err(Error::InvalidDistribution("weights must sum to 1"));
        }
        Ok(GroupDistribution { weights })
    }

    /// Explicit renormalization: clips negatives no larger than `1e-9` in
    /// magnitude to zero, then divides by the total.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if !w.is_finite() || *w < -1e-9 {
                return Err(Error::InvalidDistribution("weights must be nonnegative"));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights have no mass"));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(GroupDistribution { weights })
    }

    pub fn point_mass(d: usize, index: usize) -> Self {
        let mut weights = vec![0.0; d];
        weights[index] = 1.0;
        GroupDistribution { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Index of the single atom, if the distribution is a point mass.
    pub fn atom(&self) -> Option<usize> {
        let mut found = None;
        for (i, w) in self.weights.iter().enumerate() {
            if *w == 1.0 {
                found = Some(i);
            } else if *w != 0.0 {
                return None;
            }
        }
        found
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &GroupDistribution, lambda: f64) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain("mixture weight must lie in [0, 1]"));
        }
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        GroupDistribution::normalized(weights)
    }
}

/// One distribution per group: the unit of decision-making.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PolicyPair {
    pub group1: GroupDistribution,
    pub group2: GroupDistribution,
}

impl PolicyPair {
    pub fn new(group1: GroupDistribution, group2: GroupDistribution) -> Result<Self> {
        check_dim(group1.len(), group2.len())?;
        Ok(PolicyPair { group1, group2 })
    }

    /// Both groups are always offered price `index`.
    pub fn fixed_price(d: usize, index: usize) -> Self {
        PolicyPair {
            group1: GroupDistribution::point_mass(d, index),
            group2: GroupDistribution::point_mass(d, index),
        }
    }

    pub fn dim(&self) -> usize {
        self.group1.len()
    }

    pub fn group(&self, group: Group) -> &GroupDistribution {
        match group {
            Group::One => &self.group1,
            Group::Two => &self.group2,
        }
    }

    /// The common atom when both groups always see the same single price.
    pub fn fixed_price_index(&self) -> Option<usize> {
        match (self.group1.atom(), self.group2.atom()) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    /// Componentwise mixture on both groups.
    pub fn mix(&self, other: &PolicyPair, lambda: f64) -> Result<Self> {
        Ok(PolicyPair {
            group1: self.group1.mix(&other.group1, lambda)?,
            group2: self.group2.mix(&other.group2, lambda)?,
        })
    }

    /// L∞ distance over both groups' weights.
    pub fn distance(&self, other: &PolicyPair) -> f64 {
        self.group1
            .weights()
            .iter()
            .zip(other.group1.weights())
            .chain(self.group2.weights().iter().zip(other.group2.weights()))
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max)
    }
}

/// Per-group acceptance probabilities `F_e(i) = P(valuation ≥ v_i)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AcceptanceModel {
    group1: Vec<f64>,
    group2: Vec<f64>,
    f_min: f64,
}

impl AcceptanceModel {
    /// A true demand model: entries in `[0,1]`, nonincreasing in price, and
    /// bounded below by `f_min > 0` at the highest price.
    pub fn new(group1: Vec<f64>, group2: Vec<f64>, f_min: f64) -> Result<Self> {
        if group1.len() != group2.len() {
            return Err(Error::DimensionMismatch { expected: group1.len(), found: group2.len() });
        }
        if group1.is_empty() {
            return Err(Error::InvalidModel("empty acceptance curve"));
        }
        if !(f_min > 0.0 && f_min <= 1.0) {
            return Err(Error::InvalidModel("acceptance floor must lie in (0, 1]"));
        }
        for curve in [&group1, &group2] {
            if curve.iter().any(|f| !f.is_finite() || *f < 0.0 || *f > 1.0) {
                return Err(Error::InvalidModel("acceptance probabilities must lie in [0, 1]"));
            }
            if curve.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::InvalidModel("acceptance must be nonincreasing in price"));
            }
            if curve[curve.len() - 1] < f_min {
                return Err(Error::InvalidModel("highest-price acceptance is below the floor"));
            }
        }
        Ok(AcceptanceModel { group1, group2, f_min })
    }

    /// An estimated model. Entries must lie in `(0,1]` but need not be
    /// monotone; the floor is the smallest entry.
    pub fn from_estimates(group1: Vec<f64>, group2: Vec<f64>) -> Result<Self> {
        if group1.len() != group2.len() {
            return Err(Error::DimensionMismatch { expected: group1.len(), found: group2.len() });
        }
        if group1.is_empty() {
            return Err(Error::InvalidModel("empty acceptance curve"));
        }
        let mut f_min = f64::INFINITY;
        for f in group1.iter().chain(&group2) {
            if !f.is_finite() || *f <= 0.0 || *f > 1.0 {
                return Err(Error::InvalidModel("estimated acceptance must lie in (0, 1]"));
            }
            f_min = f_min.min(*f);
        }
        Ok(AcceptanceModel { group1, group2, f_min })
    }

    pub fn curve(&self, group: Group) -> &[f64] {
        match group {
            Group::One => &self.group1,
            Group::Two => &self.group2,
        }
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn dim(&self) -> usize {
        self.group1.len()
    }

    pub fn is_monotone(&self) -> bool {
        [&self.group1, &self.group2]
            .iter()
            .all(|c| c.windows(2).all(|w| w[1] <= w[0]))
    }
}

/// A complete environment description.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MarketConfig {
    pub grid: PriceGrid,
    pub model: AcceptanceModel,
    /// Proportion of Group 1 among arriving customers.
    pub q: f64,
}

impl MarketConfig {
    pub fn new(grid: PriceGrid, model: AcceptanceModel, q: f64) -> Result<Self> {
        check_dim(grid.len(), model.dim())?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidShare(q));
        }
        Ok(MarketConfig { grid, model, q })
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Arrival probability of `group`.
    pub fn share(&self, group: Group) -> f64 {
        group_share(self.q, group)
    }
}

pub(crate) fn group_share(q: f64, group: Group) -> f64 {
    match group {
        Group::One => q,
        Group::Two => 1.0 - q,
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expected revenue from one group, `vᵀF_eπ^e`.
pub fn group_revenue(dist: &GroupDistribution, accept: &[f64], grid: &PriceGrid) -> Result<f64> {
    check_dim(grid.len(), dist.len())?;
    check_dim(grid.len(), accept.len())?;
    Ok(dist
        .weights()
        .iter()
        .zip(accept)
        .zip(grid.prices())
        .map(|((w, f), v)| v * f * w)
        .sum())
}

/// Probability that a proposed price is accepted, `𝟙ᵀF_eπ^e`.
pub fn acceptance_rate(dist: &GroupDistribution, accept: &[f64]) -> Result<f64> {
    check_dim(dist.len(), accept.len())?;
    Ok(dot(dist.weights(), accept))
}

/// Revenue under an arbitrary (possibly estimated) acceptance model.
pub fn revenue_under(
    policy: &PolicyPair,
    model: &AcceptanceModel,
    q: f64,
    grid: &PriceGrid,
) -> Result<f64> {
    let r1 = group_revenue(&policy.group1, model.curve(Group::One), grid)?;
    let r2 = group_revenue(&policy.group2, model.curve(Group::Two), grid)?;
    Ok(q * r1 + (1.0 - q) * r2)
}

/// `R(π) = q·vᵀF₁π¹ + (1−q)·vᵀF₂π²`.
pub fn expected_revenue(policy: &PolicyPair, market: &MarketConfig) -> Result<f64> {
    revenue_under(policy, &market.model, market.q, &market.grid)
}

/// `U(π) = |vᵀπ¹ − vᵀπ²|`.
pub fn procedural_unfairness(policy: &PolicyPair, grid: &PriceGrid) -> Result<f64> {
    let m1 = grid.mean(&policy.group1)?;
    let m2 = grid.mean(&policy.group2)?;
    Ok(math::abs(m1 - m2))
}

/// Conditional mean of the proposed price given that it was accepted.
///
/// Evaluated as `Σ v_i · (F(i)π(i) / 𝟙ᵀFπ)` so that a point mass on `v_i`
/// returns `v_i` bit-exactly.
pub fn expected_accepted_price(
    dist: &GroupDistribution,
    accept: &[f64],
    grid: &PriceGrid,
) -> Result<f64> {
    check_dim(grid.len(), dist.len())?;
    check_dim(grid.len(), accept.len())?;
    let mass = dot(dist.weights(), accept);
    if !(mass > 0.0) {
        return Err(Error::ZeroAcceptanceMass(Group::One));
    }
    Ok(dist
        .weights()
        .iter()
        .zip(accept)
        .zip(grid.prices())
        .map(|((w, f), v)| v * ((f * w) / mass))
        .sum())
}

/// `S(π)` under an arbitrary acceptance model.
pub fn substantive_unfairness_under(
    policy: &PolicyPair,
    model: &AcceptanceModel,
    grid: &PriceGrid,
) -> Result<f64> {
    let a1 = expected_accepted_price(&policy.group1, model.curve(Group::One), grid)
        .map_err(|e| relabel(e, Group::One))?;
    let a2 = expected_accepted_price(&policy.group2, model.curve(Group::Two), grid)
        .map_err(|e| relabel(e, Group::Two))?;
    Ok(math::abs(a1 - a2))
}

/// `S(π)`: gap between the groups' expected accepted prices.
pub fn substantive_unfairness(policy: &PolicyPair, market: &MarketConfig) -> Result<f64> {
    substantive_unfairness_under(policy, &market.model, &market.grid)
}

/// `R(π_*) − R(π)`; negative when an unfair policy out-earns the fair optimum.
pub fn per_round_regret(
    policy: &PolicyPair,
    market: &MarketConfig,
    optimal_revenue: f64,
) -> Result<f64> {
    Ok(optimal_revenue - expected_revenue(policy, market)?)
}

fn relabel(err: Error, group: Group) -> Error {
    match err {
        Error::ZeroAcceptanceMass(_) => Error::ZeroAcceptanceMass(group),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> MarketConfig {
        let grid = PriceGrid::new(vec![0.625, 0.7, 1.0]).unwrap();
        let model =
            AcceptanceModel::new(vec![0.6, 0.5, 0.5], vec![0.8, 0.8, 0.5], DEFAULT_F_MIN).unwrap();
        MarketConfig::new(grid, model, 0.3).unwrap()
    }

    fn dist(w: &[f64]) -> GroupDistribution {
        GroupDistribution::new(w.to_vec()).unwrap()
    }

    fn optimum() -> PolicyPair {
        PolicyPair::new(
            dist(&[20.0 / 29.0, 0.0, 9.0 / 29.0]),
            dist(&[0.0, 25.0 / 29.0, 4.0 / 29.0]),
        )
        .unwrap()
    }

    #[test]
    fn example1_optimal_revenue() {
        let r = expected_revenue(&optimum(), &example1()).unwrap();
        assert!((r - 74.0 / 145.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_price_revenues() {
        let m = example1();
        let top = expected_revenue(&PolicyPair::fixed_price(3, 2), &m).unwrap();
        assert!((top - 0.5).abs() < 1e-12);
        let low = expected_revenue(&PolicyPair::fixed_price(3, 0), &m).unwrap();
        assert!((low - 0.4625).abs() < 1e-12);
    }

    #[test]
    fn procedural_unfairness_values() {
        let m = example1();
        assert!(procedural_unfairness(&optimum(), &m.grid).unwrap() < 1e-12);
        assert!((m.grid.mean(&optimum().group1).unwrap() - 43.0 / 58.0).abs() < 1e-12);
        let g = PriceGrid::new(vec![0.5, 1.0]).unwrap();
        let p = PolicyPair::new(dist(&[1.0, 0.0]), dist(&[0.0, 1.0])).unwrap();
        assert_eq!(procedural_unfairness(&p, &g).unwrap(), 0.5);
    }

    #[test]
    fn accepted_price_of_optimum_is_eight_elevenths() {
        let m = example1();
        let p = optimum();
        for g in Group::BOTH {
            let a = expected_accepted_price(p.group(g), m.model.curve(g), &m.grid).unwrap();
            assert!((a - 8.0 / 11.0).abs() < 1e-12, "{g:?}: {a}");
        }
        assert!(substantive_unfairness(&p, &m).unwrap() < 1e-12);
    }

    #[test]
    fn point_mass_accepted_price_is_exact() {
        let m = example1();
        for i in 0..3 {
            let p = PolicyPair::fixed_price(3, i);
            assert_eq!(substantive_unfairness(&p, &m).unwrap(), 0.0);
            let a = expected_accepted_price(&p.group1, m.model.curve(Group::One), &m.grid).unwrap();
            assert_eq!(a, m.grid.price(i));
        }
    }

    #[test]
    fn regret_signs() {
        let m = example1();
        let opt = 74.0 / 145.0;
        assert!(per_round_regret(&optimum(), &m, opt).unwrap().abs() < 1e-12);
        let top = per_round_regret(&PolicyPair::fixed_price(3, 2), &m, opt).unwrap();
        assert!((top - 3.0 / 290.0).abs() < 1e-12);
        // each group at its own best price: G1 at 1.0, G2 at 0.7
        let unfair = PolicyPair::new(dist(&[0.0, 0.0, 1.0]), dist(&[0.0, 1.0, 0.0])).unwrap();
        let r = per_round_regret(&unfair, &m, opt).unwrap();
        assert!((r - (opt - 0.542)).abs() < 1e-12);
        assert!(r < 0.0);
    }

    #[test]
    fn zero_mass_is_an_error() {
        let g = PriceGrid::new(vec![0.5, 1.0]).unwrap();
        let model = AcceptanceModel::from_estimates(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let p = PolicyPair::fixed_price(2, 0);
        assert!(substantive_unfairness_under(&p, &model, &g).is_ok());
        let err = expected_accepted_price(&p.group1, &[0.0, 0.0], &g).unwrap_err();
        assert!(matches!(err, Error::ZeroAcceptanceMass(_)));
    }

    #[test]
    fn validation() {
        assert!(PriceGrid::new(vec![0.5]).is_err());
        assert!(PriceGrid::new(vec![0.5, 0.5]).is_err());
        assert!(PriceGrid::new(vec![0.0, 0.5]).is_err());
        assert!(PriceGrid::new(vec![0.5, 1.1]).is_err());
        assert!(GroupDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(GroupDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(GroupDistribution::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        let n = GroupDistribution::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(n.weights(), &[0.25, 0.75]);
        assert!(AcceptanceModel::new(vec![0.5, 0.6], vec![0.5, 0.4], 0.05).is_err());
        assert!(AcceptanceModel::new(vec![0.5, 0.01], vec![0.5, 0.4], 0.05).is_err());
        assert!(AcceptanceModel::new(vec![0.5, 0.5], vec![0.5, 0.4], 0.05).is_ok());
        let grid = PriceGrid::new(vec![0.5, 1.0]).unwrap();
        let model = AcceptanceModel::new(vec![0.5, 0.5], vec![0.5, 0.4], 0.05).unwrap();
        assert!(MarketConfig::new(grid.clone(), model.clone(), 1.0).is_err());
        assert!(MarketConfig::new(grid, model, 0.5).is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        let m = example1();
        let p = PolicyPair::fixed_price(2, 0);
        assert!(matches!(expected_revenue(&p, &m), Err(Error::DimensionMismatch { .. })));
        assert!(procedural_unfairness(&p, &m.grid).is_err());
    }
}
