use alloc::vec::Vec;

use super::{FEAS_TOL, PIVOT_TOL};
use crate::error::{Error, Result};
use crate::math;

/// `maximize cᵀx  s.t.  A x = b,  G x ≤ h,  x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    eq: Vec<(Vec<f64>, f64)>,
    ineq: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, eq: Vec::new(), ineq: Vec::new() }
    }

    /// Adds `rowᵀx = value`.
    pub fn eq(mut self, row: Vec<f64>, value: f64) -> Self {
        self.eq.push((row, value));
        self
    }

    /// Adds `rowᵀx ≤ value`.
    pub fn le(mut self, row: Vec<f64>, value: f64) -> Self {
        self.ineq.push((row, value));
        self
    }

    /// Adds `rowᵀx ≥ value` (stored as `−rowᵀx ≤ −value`).
    pub fn ge(mut self, row: Vec<f64>, value: f64) -> Self {
        let neg = row.into_iter().map(|a| -a).collect();
        self.ineq.push((neg, -value));
        self
    }

    pub fn push_eq(&mut self, row: Vec<f64>, value: f64) {
        self.eq.push((row, value));
    }

    pub fn push_le(&mut self, row: Vec<f64>, value: f64) {
        self.ineq.push((row, value));
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.eq
    }

    pub fn ineq_constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.ineq
    }

    pub fn num_constraints(&self) -> usize {
        self.eq.len() + self.ineq.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::MalformedProgram("no variables"));
        }
        if self.num_constraints() == 0 {
            return Err(Error::MalformedProgram("at least one constraint is required"));
        }
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if !finite(&self.objective) {
            return Err(Error::MalformedProgram("objective has non-finite entries"));
        }
        for (row, value) in self.eq.iter().chain(&self.ineq) {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            if !finite(row) || !value.is_finite() {
                return Err(Error::MalformedProgram("constraint has non-finite entries"));
            }
        }
        Ok(())
    }

    /// Largest constraint violation of `x` (including `x ≥ 0`).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self.eq.iter().map(|(row, b)| math::abs(dot(row) - b));
        let ineq = self.ineq.iter().map(|(row, h)| dot(row) - h);
        let nonneg = x.iter().map(|xi| -xi);
        eq.chain(ineq).chain(nonneg).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, xi)| c * xi).sum()
    }
}

/// An optimal point and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Numerical thresholds shared by the LP routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerances {
    pub pivot: f64,
    pub feasibility: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances { pivot: PIVOT_TOL, feasibility: FEAS_TOL }
    }
}
