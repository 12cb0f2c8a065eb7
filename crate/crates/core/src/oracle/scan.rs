// Accepted-price parametrized search.
//
// Fixing the common Group 1 accepted price V_s turns every fairness
// constraint into a linear one, so each scan point is a single LP over the
// stacked vector x = [π¹; π²]. The outer search over V_s handles the
// remaining one-dimensional non-convexity.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::linalg::{lp_maximize, LinearProgram};
use crate::pricing::{AcceptanceModel, GroupDistribution, PolicyPair, PriceGrid};
use crate::Group;

use super::OracleConfig;

/// Bisection steps used to push the incumbent onto a feasibility boundary.
const POLISH_STEPS: usize = 48;

pub(crate) struct ScanProblem<'a> {
    pub grid: &'a PriceGrid,
    pub q: f64,
    /// Model under which V_s and the accepted-price band are expressed.
    pub model: &'a AcceptanceModel,
    /// Allowed gap between the two groups' accepted prices (0 for exact).
    pub band: f64,
    /// Linear revenue floors `R(π, model) ≥ value`.
    pub floors: Vec<(&'a AcceptanceModel, f64)>,
}

impl ScanProblem<'_> {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn revenue_objective(&self) -> Vec<f64> {
        revenue_row(self.model, self.q, self.grid)
    }

    /// Unit objective selecting `π^e(i)`.
    pub fn probability_objective(&self, group: Group, index: usize) -> Vec<f64> {
        let mut c = vec![0.0; 2 * self.dim()];
        c[group.slot() * self.dim() + index] = 1.0;
        c
    }

    pub fn program(&self, v_s: f64, objective: Vec<f64>) -> LinearProgram {
        let d = self.dim();
        let v = self.grid.prices();
        let f1 = self.model.curve(Group::One);
        let f2 = self.model.curve(Group::Two);

        let mut lp = LinearProgram::new(objective);
        let mut ones1 = vec![0.0; 2 * d];
        let mut ones2 = vec![0.0; 2 * d];
        let mut procedural = vec![0.0; 2 * d];
        let mut accepted1 = vec![0.0; 2 * d];
        for i in 0..d {
            ones1[i] = 1.0;
            ones2[d + i] = 1.0;
            procedural[i] = v[i];
            procedural[d + i] = -v[i];
            accepted1[i] = (v[i] - v_s) * f1[i];
        }
        lp.push_eq(ones1, 1.0);
        lp.push_eq(ones2, 1.0);
        lp.push_eq(procedural, 0.0);
        lp.push_eq(accepted1, 0.0);

        let shifted = |shift: f64| {
            let mut row = vec![0.0; 2 * d];
            for i in 0..d {
                row[d + i] = (v[i] - v_s - shift) * f2[i];
            }
            row
        };
        if self.band > 0.0 {
            // V_s − band ≤ accepted mean of group 2 ≤ V_s + band.
            lp.push_le(shifted(self.band), 0.0);
            lp.push_le(shifted(-self.band).into_iter().map(|a| -a).collect(), 0.0);
        } else {
            lp.push_eq(shifted(0.0), 0.0);
        }

        for (model, floor) in &self.floors {
            if *floor > 0.0 {
                let row = revenue_row(model, self.q, self.grid);
                lp.push_le(row.into_iter().map(|a| -a).collect(), -floor);
            }
        }
        lp
    }

    pub fn solve(&self, lp: &LinearProgram) -> Option<PolicyPair> {
        self.solve_valued(lp).map(|(p, _)| p)
    }

    /// The policy and the LP objective value.
    pub fn solve_valued(&self, lp: &LinearProgram) -> Option<(PolicyPair, f64)> {
        let sol = lp_maximize(lp).ok()?;
        let exact = (self.band == 0.0).then_some(self.model);
        Some((split(&sol.x, self.dim(), self.grid, exact)?, sol.value))
    }
}

pub(crate) fn revenue_row(model: &AcceptanceModel, q: f64, grid: &PriceGrid) -> Vec<f64> {
    let d = grid.len();
    let v = grid.prices();
    let f1 = model.curve(Group::One);
    let f2 = model.curve(Group::Two);
    let mut row = vec![0.0; 2 * d];
    for i in 0..d {
        row[i] = q * v[i] * f1[i];
        row[d + i] = (1.0 - q) * v[i] * f2[i];
    }
    row
}

fn split(x: &[f64], d: usize, grid: &PriceGrid, exact: Option<&AcceptanceModel>) -> Option<PolicyPair> {
    let prices = grid.prices();
    let mut w1 = GroupDistribution::normalized(x[..d].to_vec()).ok()?.weights().to_vec();
    let mut w2 = GroupDistribution::normalized(x[d..2 * d].to_vec()).ok()?.weights().to_vec();
    let polished = exact.is_some_and(|m| {
        let f = [m.curve(Group::One), m.curve(Group::Two)];
        (0..2).all(|_| newton_fair(&mut w1, &mut w2, prices, f))
    });
    if !polished {
        let gap = mean(&w1, prices) - mean(&w2, prices);
        if gap != 0.0 && !shift_mean(&mut w2, prices, gap) {
            shift_mean(&mut w1, prices, -gap);
        }
    }
    PolicyPair::new(GroupDistribution::new(w1).ok()?, GroupDistribution::new(w2).ok()?).ok()
}

fn mean(w: &[f64], prices: &[f64]) -> f64 {
    w.iter().zip(prices).map(|(a, b)| a * b).sum()
}

fn accepted(w: &[f64], prices: &[f64], f: &[f64]) -> (f64, f64) {
    let mass: f64 = w.iter().zip(f).map(|(a, b)| a * b).sum();
    let paid: f64 = w.iter().zip(f).zip(prices).map(|((a, b), v)| a * b * v).sum();
    (paid, mass)
}

/// Moves mass between the cheapest and dearest support points so the mean
/// rises by `delta`. Removes the rounding-level procedural gap left by the LP.
fn shift_mean(w: &mut [f64], prices: &[f64], delta: f64) -> bool {
    let (Some(lo), Some(hi)) = (w.iter().position(|&x| x > 0.0), w.iter().rposition(|&x| x > 0.0)) else {
        return false;
    };
    if lo == hi {
        return false;
    }
    let amount = delta / (prices[hi] - prices[lo]);
    let (from, to, amount) = if amount > 0.0 { (lo, hi, amount) } else { (hi, lo, -amount) };
    if amount > w[from] {
        return false;
    }
    w[from] -= amount;
    w[to] += amount;
    true
}

/// One minimum-norm Newton step driving both the proposed-mean gap and the
/// accepted-price gap to zero, moving mass only between adjacent support
/// points. Returns false (leaving `w1`, `w2` untouched) when the step is
/// unavailable or would leave the simplex.
fn newton_fair(w1: &mut [f64], w2: &mut [f64], prices: &[f64], f: [&[f64]; 2]) -> bool {
    let (p1, m1) = accepted(w1, prices, f[0]);
    let (p2, m2) = accepted(w2, prices, f[1]);
    if !(m1 > 0.0 && m2 > 0.0) {
        return false;
    }
    let r = [mean(w1, prices) - mean(w2, prices), p1 / m1 - p2 / m2];
    if r == [0.0, 0.0] {
        return true;
    }
    // Columns: (group, from, to, ∂r_U, ∂r_S).
    let mut cols: Vec<(usize, usize, usize, f64, f64)> = Vec::new();
    for (g, w, p, m, sign) in [(0, &*w1, p1, m1, 1.0), (1, &*w2, p2, m2, -1.0)] {
        let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        for pair in support.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let fg = f[g];
            let du = prices[b] - prices[a];
            let ds = (prices[b] * fg[b] - prices[a] * fg[a]) / m - p * (fg[b] - fg[a]) / (m * m);
            cols.push((g, a, b, sign * du, sign * ds));
        }
    }
    let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
    for c in &cols {
        g11 += c.3 * c.3;
        g12 += c.3 * c.4;
        g22 += c.4 * c.4;
    }
    let det = g11 * g22 - g12 * g12;
    if !(det > 1e-12 * (g11 * g22).max(f64::MIN_POSITIVE)) {
        return false;
    }
    let y = [(g22 * r[0] - g12 * r[1]) / det, (g11 * r[1] - g12 * r[0]) / det];
    let (mut n1, mut n2) = (w1.to_vec(), w2.to_vec());
    for (g, a, b, du, ds) in cols {
        let t = -(du * y[0] + ds * y[1]);
        let w = if g == 0 { &mut n1 } else { &mut n2 };
        w[a] -= t;
        w[b] += t;
    }
    if n1.iter().chain(&n2).any(|&x| x < 0.0) {
        return false;
    }
    w1.copy_from_slice(&n1);
    w2.copy_from_slice(&n2);
    true
}

#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub policy: PolicyPair,
    /// Scan coordinate, or NaN for injected candidates.
    pub v_s: f64,
    pub primary: f64,
    pub secondary: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ranking {
    pub primary_tol: f64,
    pub secondary_tol: f64,
}

impl Ranking {
    pub const REVENUE: Ranking = Ranking { primary_tol: 0.0, secondary_tol: 0.0 };
    pub const PROBABILITY: Ranking = Ranking { primary_tol: 1e-9, secondary_tol: 1e-12 };

    /// Whether `a` beats `b`: larger primary, then larger secondary, then a
    /// same-fixed-price policy, then lexicographically smaller weights.
    pub fn prefers(&self, a: &Candidate, b: &Candidate) -> bool {
        if a.primary > b.primary + self.primary_tol {
            return true;
        }
        if a.primary < b.primary - self.primary_tol {
            return false;
        }
        if a.secondary > b.secondary + self.secondary_tol {
            return true;
        }
        if a.secondary < b.secondary - self.secondary_tol {
            return false;
        }
        let fa = a.policy.fixed_price_index().is_some();
        let fb = b.policy.fixed_price_index().is_some();
        if fa != fb {
            return fa;
        }
        lexicographic(&a.policy, &b.policy) == Ordering::Less
    }

    pub fn offer(&self, best: &mut Option<Candidate>, cand: Candidate) {
        match best {
            Some(b) if !self.prefers(&cand, b) => {}
            _ => *best = Some(cand),
        }
    }
}

fn lexicographic(a: &PolicyPair, b: &PolicyPair) -> Ordering {
    let wa = a.group1.weights().iter().chain(a.group2.weights());
    let wb = b.group1.weights().iter().chain(b.group2.weights());
    for (x, y) in wa.zip(wb) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => {}
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Grid scan over `[lo, hi]`, then `refine_iters` rounds of ×10 refinement
/// around the incumbent, then boundary bisection when the incumbent sits next
/// to an infeasible point. Every feasible evaluation is appended to `seen`.
pub(crate) fn line_search(
    lo: f64,
    hi: f64,
    cfg: &OracleConfig,
    extra_points: &[f64],
    rank: &Ranking,
    eval: &mut dyn FnMut(f64) -> Option<Candidate>,
    seen: &mut Vec<(f64, f64)>,
) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    let mut probe = |v_s: f64, best: &mut Option<Candidate>, seen: &mut Vec<(f64, f64)>| -> bool {
        match eval(v_s) {
            Some(c) => {
                seen.push((v_s, c.primary));
                rank.offer(best, c);
                true
            }
            None => false,
        }
    };

    let steps = cfg.grid_steps_vs.max(1);
    let width = hi - lo;
    for j in 0..=steps {
        let v_s = if j == steps { hi } else { lo + width * (j as f64) / (steps as f64) };
        probe(v_s, &mut best, seen);
    }
    for &v_s in extra_points {
        if (lo..=hi).contains(&v_s) {
            probe(v_s, &mut best, seen);
        }
    }

    let mut h = width / steps as f64;
    for _ in 0..cfg.refine_iters {
        let Some(center) = best.as_ref().map(|c| c.v_s) else { break };
        let sub = h / 10.0;
        for k in -10i32..=10 {
            if k == 0 {
                continue;
            }
            let v_s = center + sub * k as f64;
            if v_s >= lo && v_s <= hi {
                probe(v_s, &mut best, seen);
            }
        }
        h = sub;
    }

    let Some(center) = best.as_ref().map(|c| c.v_s) else { return None };
    for dir in [-1.0, 1.0] {
        let neighbor = (center + dir * h).clamp(lo, hi);
        if neighbor == center || probe(neighbor, &mut best, seen) {
            continue;
        }
        let (mut inside, mut outside) = (center, neighbor);
        for _ in 0..POLISH_STEPS {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if probe(mid, &mut best, seen) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
    }
    best
}
