// Exhaustive basic-feasible-solution enumeration; the reference the simplex
// kernel is checked against.

use alloc::vec;
use alloc::vec::Vec;

use super::dense::solve_in_place;
use super::program::{LinearProgram, LpSolution};
use super::{FEAS_TOL, PIVOT_TOL};
use crate::error::{Error, Result};
use crate::math;

pub const VERTEX_MAX_VARS: usize = 8;
pub const VERTEX_MAX_CONSTRAINTS: usize = 16;

/// Enumerates every vertex of `{A x = b, G x ≤ h, x ≥ 0}` and returns the best.
///
/// The feasible region is assumed bounded (unboundedness is not detected).
/// Limited to `n ≤ 8` variables and at most 16 constraints.
pub fn vertex_enumerate(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    if n > VERTEX_MAX_VARS {
        return Err(Error::Capacity("vertex enumeration supports at most 8 variables"));
    }
    if lp.num_constraints() > VERTEX_MAX_CONSTRAINTS {
        return Err(Error::Capacity("vertex enumeration supports at most 16 constraints"));
    }

    let eq_rows = independent_equalities(lp.eq_constraints(), n)?;
    let rank = eq_rows.len();
    if rank > n {
        return Err(Error::Infeasible);
    }

    // Candidate tight constraints: every inequality, then every bound x_i ≥ 0.
    let mut candidates: Vec<(Vec<f64>, f64)> = lp.ineq_constraints().to_vec();
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        candidates.push((row, 0.0));
    }

    let pick = n - rank;
    let mut best: Option<LpSolution> = None;
    let mut chosen: Vec<usize> = (0..pick).collect();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    loop {
        if pick <= candidates.len() {
            for (r, (row, value)) in eq_rows.iter().chain(chosen.iter().map(|&k| &candidates[k])).enumerate() {
                a[r * n..(r + 1) * n].copy_from_slice(row);
                b[r] = *value;
            }
            if solve_in_place(&mut a, &mut b, n, PIVOT_TOL).is_ok() && is_feasible(lp, &b) {
                let value = lp.evaluate(&b);
                if best.as_ref().map_or(true, |s| value > s.value) {
                    let x = b.iter().map(|xi| xi.max(0.0)).collect();
                    best = Some(LpSolution { x, value });
                }
            }
        }
        if !next_combination(&mut chosen, candidates.len()) {
            break;
        }
    }
    best.ok_or(Error::Infeasible)
}

fn is_feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    x.iter().all(|xi| *xi >= -FEAS_TOL)
        && lp
            .eq_constraints()
            .iter()
            .all(|(row, v)| math::abs(dot(row) - v) <= FEAS_TOL * (1.0 + math::abs(*v)))
        && lp
            .ineq_constraints()
            .iter()
            .all(|(row, h)| dot(row) <= h + FEAS_TOL * (1.0 + math::abs(*h)))
}

/// Row-reduces the equality block, dropping dependent rows and rejecting
/// inconsistent ones.
fn independent_equalities(eqs: &[(Vec<f64>, f64)], n: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut m: Vec<Vec<f64>> = eqs
        .iter()
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(*v);
            r
        })
        .collect();
    let mut keep = Vec::new();
    let mut lead = 0;
    let mut rank_rows: Vec<usize> = (0..m.len()).collect();
    for col in 0..n {
        if lead >= m.len() {
            break;
        }
        let (best, mag) = (lead..m.len())
            .map(|r| (r, math::abs(m[r][col])))
            .fold((lead, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= PIVOT_TOL {
            continue;
        }
        m.swap(lead, best);
        rank_rows.swap(lead, best);
        for r in lead + 1..m.len() {
            let f = m[r][col] / m[lead][col];
            if f != 0.0 {
                for j in col..=n {
                    m[r][j] -= f * m[lead][j];
                }
            }
        }
        keep.push(rank_rows[lead]);
        lead += 1;
    }
    for row in &m[lead..] {
        if math::abs(row[n]) > FEAS_TOL * (1.0 + row.iter().map(|x| math::abs(*x)).fold(0.0, f64::max)) {
            return Err(Error::Infeasible);
        }
    }
    keep.sort_unstable();
    Ok(keep.into_iter().map(|k| eqs[k].clone()).collect())
}

fn next_combination(c: &mut [usize], total: usize) -> bool {
    let k = c.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < total - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_textbook() {
        let lp = LinearProgram::new(vec![3.0, 5.0])
            .le(vec![1.0, 0.0], 4.0)
            .le(vec![0.0, 2.0], 12.0)
            .le(vec![3.0, 2.0], 18.0);
        let sol = vertex_enumerate(&lp).unwrap();
        assert!((sol.value - 36.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_equality() {
        let lp = LinearProgram::new(vec![1.0, 0.0]).eq(vec![1.0, 1.0], 1.0);
        let sol = vertex_enumerate(&lp).unwrap();
        assert_eq!(sol.x, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible() {
        let lp = LinearProgram::new(vec![1.0, 1.0])
            .eq(vec![1.0, 1.0], 1.0)
            .eq(vec![1.0, 1.0], 2.0);
        assert_eq!(vertex_enumerate(&lp), Err(Error::Infeasible));
        let lp = LinearProgram::new(vec![1.0, 1.0]).le(vec![1.0, 1.0], -1.0);
        assert_eq!(vertex_enumerate(&lp), Err(Error::Infeasible));
    }

    #[test]
    fn capacity() {
        let lp = LinearProgram::new(vec![1.0; 9]).le(vec![1.0; 9], 1.0);
        assert!(matches!(vertex_enumerate(&lp), Err(Error::Capacity(_))));
    }

    #[test]
    fn combinations() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 4) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
