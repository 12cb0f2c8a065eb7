// Closed forms for the three-price example family
//
//   v = [0.625, 0.7, 1],  q = 0.3,
//   F₁ = [0.6, 0.5−ε, 0.5−ε],  F₂ = [0.8, 0.8, 0.5−ε].
//
// At ε = 0 this is the motivating example whose fair optimum earns 74/145.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{solve_linear_system, LinearSystem};
use crate::pricing::{AcceptanceModel, GroupDistribution, PolicyPair, DEFAULT_F_MIN};
use crate::Group;

pub const EXAMPLE_PRICES: [f64; 3] = [0.625, 0.7, 1.0];
pub const EXAMPLE_Q: f64 = 0.3;

/// Largest `ε` for which the closed-form optimum is proven.
pub const PROVEN_EPS_MAX: f64 = 1e-10;
/// Largest `ε` accepted by [`closed_form_example_optimum`].
pub const SUPPORTED_EPS_MAX: f64 = 0.01;

/// Acceptance model of the example family.
pub fn example_model(eps: f64) -> Result<AcceptanceModel> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Domain("example perturbation must lie in [0, 0.5)"));
    }
    let f_min = DEFAULT_F_MIN.min(0.5 - eps);
    AcceptanceModel::new(vec![0.6, 0.5 - eps, 0.5 - eps], vec![0.8, 0.8, 0.5 - eps], f_min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub policy: PolicyPair,
    pub revenue: f64,
    /// `V_s*`, the common accepted price.
    pub accepted_price: f64,
    /// `α*`, so the common proposed price is `V_s* + α*`.
    pub gap: f64,
    /// False when `ε` lies beyond [`PROVEN_EPS_MAX`].
    pub proven: bool,
}

/// The fair optimum of the example family, valid for `0 ≤ ε ≤ 0.01`.
pub fn closed_form_example_optimum(eps: f64) -> Result<ClosedForm> {
    if !(0.0..=SUPPORTED_EPS_MAX).contains(&eps) {
        return Err(Error::Domain("closed form requires 0 ≤ ε ≤ 0.01"));
    }
    let den = 29.0 - 10.0 * eps;
    let g1 = vec![(20.0 - 40.0 * eps) / den, 0.0, (9.0 + 30.0 * eps) / den];
    let g2 = vec![0.0, (25.0 - 50.0 * eps) / den, (4.0 + 40.0 * eps) / den];
    let policy = PolicyPair::new(GroupDistribution::new(g1)?, GroupDistribution::new(g2)?)?;
    let revenue = 37.0 * (1.0 - 2.0 * eps) * (4.0 + 5.0 * eps) / (10.0 * den);
    let accepted_price = (8.0 + 10.0 * eps) / (11.0 + 10.0 * eps);
    let gap = 3.0 * (1.0 + 10.0 * eps) * (3.0 + 10.0 * eps) / (2.0 * den * (11.0 + 10.0 * eps));
    Ok(ClosedForm { policy, revenue, accepted_price, gap, proven: eps <= PROVEN_EPS_MAX })
}

fn check_accepted_price(eps: f64, v_s: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain("example perturbation must be nonnegative"));
    }
    if 8.0 * v_s - 5.0 == 0.0 || 1.0 - v_s == 0.0 {
        return Err(Error::Pole("accepted price at 5/8 or 1"));
    }
    if !(v_s > 0.625 && v_s < 1.0) {
        return Err(Error::Domain("accepted price must lie in (5/8, 1)"));
    }
    Ok(())
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den == 0.0 {
        return Err(Error::Pole("alpha bound denominator vanishes"));
    }
    Ok(num / den)
}

/// Revenue of the fair policy at `(V_s, α)`:
/// `(71−30ε)/100·V_s + [(100−60ε) − (142−60ε)V_s] / [25(8V_s−5)(1−V_s)] · V_s·α`.
pub fn example_revenue_surface(eps: f64, v_s: f64, alpha: f64) -> Result<f64> {
    check_accepted_price(eps, v_s)?;
    if !(alpha >= 0.0) {
        return Err(Error::Domain("gap must be nonnegative"));
    }
    let base = (71.0 - 30.0 * eps) / 100.0 * v_s;
    let slope = ((100.0 - 60.0 * eps) - (142.0 - 60.0 * eps) * v_s)
        / (25.0 * (8.0 * v_s - 5.0) * (1.0 - v_s));
    Ok(base + slope * v_s * alpha)
}

/// Bounds on `α` at a given `V_s`; the point is feasible iff
/// `max(B2, B3, 0) ≤ α ≤ min(B1, B4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBounds {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

impl AlphaBounds {
    pub fn lower(&self) -> f64 {
        self.b2.max(self.b3).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.b1.min(self.b4)
    }
}

pub fn alpha_bounds(eps: f64, v_s: f64) -> Result<AlphaBounds> {
    check_accepted_price(eps, v_s)?;
    let a = 1.0 + 10.0 * eps;
    let b = 3.0 + 10.0 * eps;
    let up = 8.0 * v_s - 5.0;
    let rest = 1.0 - v_s;
    Ok(AlphaBounds {
        b1: ratio(a * up * rest, a * 8.0 * v_s + 10.0 * (1.0 - 8.0 * eps))?,
        b2: ratio(a * up * (7.0 - 10.0 * v_s), (a * 8.0 * v_s - 2.0 * (1.0 + 28.0 * eps)) * 10.0)?,
        b3: ratio(b * (10.0 * v_s - 7.0) * rest, b * 10.0 * v_s - (6.0 + 100.0 * eps))?,
        b4: ratio(b * up * rest, b * 8.0 * v_s - 80.0 * eps)?,
    })
}

/// Rebuilds the fair policy at `(V_s, α)` by solving, per group,
/// `𝟙ᵀπ = 1`, `vᵀπ = V_s + α`, `(v − V_s)ᵀF_eπ = 0`.
///
/// Fails with [`Error::Domain`] when the solution leaves the simplex.
pub fn reconstruct_example_policy(eps: f64, v_s: f64, alpha: f64) -> Result<PolicyPair> {
    check_accepted_price(eps, v_s)?;
    let model = example_model(eps)?;
    let v = EXAMPLE_PRICES;
    let solve = |group: Group| -> Result<GroupDistribution> {
        let f = model.curve(group);
        let rows = vec![
            vec![1.0; 3],
            v.to_vec(),
            (0..3).map(|i| (v[i] - v_s) * f[i]).collect::<Vec<f64>>(),
        ];
        let x = solve_linear_system(&LinearSystem::new(rows, vec![1.0, v_s + alpha, 0.0])?)?;
        GroupDistribution::normalized(x).map_err(|_| Error::Domain("(V_s, α) is outside the feasible region"))
    };
    PolicyPair::new(solve(Group::One)?, solve(Group::Two)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_values_at_zero() {
        let cf = closed_form_example_optimum(0.0).unwrap();
        assert!((cf.revenue - 74.0 / 145.0).abs() < 1e-15);
        assert!((cf.accepted_price - 8.0 / 11.0).abs() < 1e-15);
        assert!((cf.accepted_price + cf.gap - 43.0 / 58.0).abs() < 1e-15);
        assert!((cf.gap - 9.0 / 638.0).abs() < 1e-15);
        assert!(cf.proven);
        assert!(!closed_form_example_optimum(1e-3).unwrap().proven);
        assert!(closed_form_example_optimum(-1e-9).is_err());
        assert!(closed_form_example_optimum(0.02).is_err());
    }

    #[test]
    fn surface_matches_optimum() {
        let r = example_revenue_surface(0.0, 8.0 / 11.0, 9.0 / 638.0).unwrap();
        assert!((r - 74.0 / 145.0).abs() < 1e-14);
        for eps in [0.0, 1e-3, 1e-2] {
            let v = 0.8;
            let r = example_revenue_surface(eps, v, 0.0).unwrap();
            assert!((r - (71.0 - 30.0 * eps) / 100.0 * v).abs() < 1e-15);
        }
        assert!(matches!(example_revenue_surface(0.0, 0.625, 0.01), Err(Error::Pole(_))));
        assert!(matches!(example_revenue_surface(0.0, 1.0, 0.01), Err(Error::Pole(_))));
        assert!(matches!(example_revenue_surface(0.0, 0.5, 0.01), Err(Error::Domain(_))));
    }

    #[test]
    fn bounds_pinch_at_optimum() {
        let b = alpha_bounds(0.0, 8.0 / 11.0).unwrap();
        assert!((b.b1 - 9.0 / 638.0).abs() < 1e-15);
        assert!((b.b3 - 9.0 / 638.0).abs() < 1e-15);
        assert!(alpha_bounds(0.0, 0.7).unwrap().b3 <= 0.0);
        assert!(alpha_bounds(0.0, 0.66).unwrap().b3 <= 0.0);
        for k in 1..100 {
            let v = 0.625 + 0.375 * k as f64 / 100.0;
            let b = alpha_bounds(0.0, v).unwrap();
            assert!(b.b1 <= b.b4 + 1e-15, "{v}");
        }
    }

    #[test]
    fn reconstruction_at_optimum() {
        let p = reconstruct_example_policy(0.0, 8.0 / 11.0, 9.0 / 638.0).unwrap();
        let cf = closed_form_example_optimum(0.0).unwrap();
        assert!(p.distance(&cf.policy) < 1e-12);
        assert!(reconstruct_example_policy(0.0, 0.9, 0.09).is_err());
    }
}
