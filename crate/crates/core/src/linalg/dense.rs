use alloc::vec::Vec;

use super::PIVOT_TOL;
use crate::error::{Error, Result};
use crate::math;

/// Largest system accepted by [`LinearSystem::new`].
pub const MAX_SYSTEM_DIM: usize = 64;

/// A square system `A x = b`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    n: usize,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if n > MAX_SYSTEM_DIM {
            return Err(Error::Capacity("linear systems are limited to 64 unknowns"));
        }
        if rhs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rhs.len() });
        }
        let mut matrix = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            matrix.extend(row);
        }
        Ok(LinearSystem { n, matrix, rhs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::Singular`] when the best available pivot has magnitude
/// at most `1e-10`.
pub fn solve_linear_system(sys: &LinearSystem) -> Result<Vec<f64>> {
    let mut a = sys.matrix.clone();
    let mut b = sys.rhs.clone();
    solve_in_place(&mut a, &mut b, sys.n, PIVOT_TOL)?;
    Ok(b)
}

/// Solves in place; on success `b` holds the solution.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize, tol: f64) -> Result<()> {
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r * n + col]))
            .fold((col, 0.0f64), |best, (r, v)| {
                if math::abs(v) > math::abs(best.1) {
                    (r, v)
                } else {
                    best
                }
            });
        if !(math::abs(pivot) > tol) {
            return Err(Error::Singular { column: col, pivot });
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
            b[r] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in col + 1..n {
            acc -= a[col * n + j] * b[j];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity() {
        let sys = LinearSystem::new(
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![3.0, -1.0, 0.5],
        )
        .unwrap();
        assert_eq!(solve_linear_system(&sys).unwrap(), vec![3.0, -1.0, 0.5]);
    }

    #[test]
    fn needs_row_swap() {
        let sys = LinearSystem::new(vec![vec![0.0, 2.0], vec![1.0, 1.0]], vec![4.0, 3.0]).unwrap();
        let x = solve_linear_system(&sys).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular() {
        let sys = LinearSystem::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).unwrap();
        assert!(matches!(solve_linear_system(&sys), Err(Error::Singular { .. })));
    }

    #[test]
    fn shape_errors() {
        assert!(LinearSystem::new(vec![vec![1.0, 2.0]], vec![1.0]).is_err());
        assert!(LinearSystem::new(vec![vec![1.0]], vec![1.0, 2.0]).is_err());
        assert!(LinearSystem::new(vec![vec![0.0; 65]; 65], vec![0.0; 65]).is_err());
    }
}
