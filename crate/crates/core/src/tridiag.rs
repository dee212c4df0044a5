//! Tridiagonal direct solver (Thomas algorithm).
//!
//! The stepping matrices `I - dt*L` are column-diagonally dominant M-matrices,
//! so elimination without pivoting is stable.

use crate::error::{Error, Result};

/// Prefactored tridiagonal matrix; factor once, solve per step.
#[derive(Debug, Clone)]
pub struct TridiagFactor {
    sub: Vec<f64>,    // sub[i] multiplies x_{i-1} in row i (sub[0] unused)
    cprime: Vec<f64>, // eliminated upper diagonal
    dinv: Vec<f64>,   // inverse pivots
}

impl TridiagFactor {
    /// Factor the matrix with bands (`sub`, `diag`, `sup`), all of length n;
    /// `sub[0]` and `sup[n-1]` are ignored.
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        assert!(n >= 2 && sub.len() == n && sup.len() == n);
        let mut cprime = vec![0.0; n];
        let mut dinv = vec![0.0; n];
        let mut denom = diag[0];
        if denom == 0.0 {
            return Err(Error::SolveBreakdown { row: 0 });
        }
        dinv[0] = 1.0 / denom;
        cprime[0] = sup[0] * dinv[0];
        for i in 1..n {
            denom = diag[i] - sub[i] * cprime[i - 1];
            if denom == 0.0 {
                return Err(Error::SolveBreakdown { row: i });
            }
            dinv[i] = 1.0 / denom;
            if i < n - 1 {
                cprime[i] = sup[i] * dinv[i];
            }
        }
        Ok(TridiagFactor {
            sub: sub.to_vec(),
            cprime,
            dinv,
        })
    }

    pub fn len(&self) -> usize {
        self.dinv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dinv.is_empty()
    }

    /// Solve in place: on entry `x` holds the right-hand side, on exit the solution.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dinv.len();
        assert_eq!(x.len(), n);
        x[0] *= self.dinv[0];
        for i in 1..n {
            x[i] = (x[i] - self.sub[i] * x[i - 1]) * self.dinv[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.cprime[i] * x[i + 1];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
