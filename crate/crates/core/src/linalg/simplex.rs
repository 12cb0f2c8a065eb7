// Two-phase dense tableau simplex with Bland's rule.

use alloc::vec;
use alloc::vec::Vec;

use super::program::{LinearProgram, LpSolution, SolverTolerances};
use crate::error::{Error, Result};
use crate::math;

const MAX_PIVOTS: usize = 100_000;

struct Tableau {
    rows: usize,
    cols: usize, // excluding rhs
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.cols + 1;
        let p = self.data[row * w + col];
        for j in 0..w {
            self.data[row * w + j] /= p;
        }
        self.data[row * w + col] = 1.0;
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let factor = self.data[r * w + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..w {
                self.data[r * w + j] -= factor * self.data[row * w + j];
            }
            self.data[r * w + col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn remove_row(&mut self, row: usize) {
        let w = self.cols + 1;
        self.data.drain(row * w..(row + 1) * w);
        self.basis.remove(row);
        self.rows -= 1;
    }

    /// Runs simplex iterations maximizing `cost` over the allowed columns.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool], tol: &SolverTolerances) -> Result<()> {
        let mut reduced = vec![0.0; self.cols];
        for _ in 0..MAX_PIVOTS {
            for (j, rc) in reduced.iter_mut().enumerate() {
                let mut z = 0.0;
                for r in 0..self.rows {
                    z += cost[self.basis[r]] * self.at(r, j);
                }
                *rc = cost[j] - z;
            }
            // Bland: lowest-index improving column.
            let entering = (0..self.cols)
                .find(|&j| allowed[j] && !self.basis.contains(&j) && reduced[j] > tol.pivot);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, col);
                if a <= tol.pivot {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = math::abs(ratio - bratio) <= 1e-12 * (1.0 + bratio);
                        if ratio < bratio && !tie
                            || tie && self.basis[r] < self.basis[br]
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(Error::Capacity("simplex pivot limit reached"))
    }
}

/// Maximizes with the default tolerances (pivot `1e-10`, feasibility `1e-9`).
pub fn lp_maximize(lp: &LinearProgram) -> Result<LpSolution> {
    lp_maximize_with(lp, &SolverTolerances::default())
}

/// Two-phase simplex. Returns [`Error::Infeasible`] or [`Error::Unbounded`]
/// when no optimum exists.
pub fn lp_maximize_with(lp: &LinearProgram, tol: &SolverTolerances) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let eqs = lp.eq_constraints();
    let ineqs = lp.ineq_constraints();
    let n_slack = ineqs.len();

    // Rows whose slack cannot start basic need an artificial variable.
    let needs_art = |h: f64| h < 0.0;
    let n_art = eqs.len() + ineqs.iter().filter(|(_, h)| needs_art(*h)).count();
    let cols = n + n_slack + n_art;
    let rows = eqs.len() + ineqs.len();
    let w = cols + 1;

    let mut tab = Tableau { rows, cols, data: vec![0.0; rows * w], basis: vec![0; rows] };
    let mut art = n + n_slack;
    for (r, (row, b)) in eqs.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (j, a) in row.iter().enumerate() {
            tab.data[r * w + j] = sign * a;
        }
        tab.data[r * w + cols] = sign * b;
        tab.data[r * w + art] = 1.0;
        tab.basis[r] = art;
        art += 1;
    }
    for (k, (row, h)) in ineqs.iter().enumerate() {
        let r = eqs.len() + k;
        let slack = n + k;
        let sign = if needs_art(*h) { -1.0 } else { 1.0 };
        for (j, a) in row.iter().enumerate() {
            tab.data[r * w + j] = sign * a;
        }
        tab.data[r * w + slack] = sign;
        tab.data[r * w + cols] = sign * h;
        if needs_art(*h) {
            tab.data[r * w + art] = 1.0;
            tab.basis[r] = art;
            art += 1;
        } else {
            tab.basis[r] = slack;
        }
    }

    let is_art = |j: usize| j >= n + n_slack;
    if n_art > 0 {
        let cost: Vec<f64> = (0..cols).map(|j| if is_art(j) { -1.0 } else { 0.0 }).collect();
        let allowed = vec![true; cols];
        tab.optimize(&cost, &allowed, tol)?;
        let residual: f64 =
            (0..tab.rows).filter(|&r| is_art(tab.basis[r])).map(|r| tab.rhs(r)).sum();
        if residual > tol.feasibility {
            return Err(Error::Infeasible);
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows {
            if is_art(tab.basis[r]) {
                let col = (0..n + n_slack).find(|&j| math::abs(tab.at(r, j)) > tol.pivot);
                match col {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => tab.remove_row(r),
                }
            } else {
                r += 1;
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(lp.objective());
    let allowed: Vec<bool> = (0..cols).map(|j| !is_art(j)).collect();
    tab.optimize(&cost, &allowed, tol)?;

    let mut x = vec![0.0; n];
    for r in 0..tab.rows {
        let j = tab.basis[r];
        if j < n {
            x[j] = tab.rhs(r).max(0.0);
        }
    }
    let value = lp.evaluate(&x);
    Ok(LpSolution { x, value })
}
