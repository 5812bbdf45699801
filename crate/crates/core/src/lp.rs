//! Dense two-phase simplex for `min c·x  s.t.  A x = b, x ≥ 0`.
//!
//! Bland's rule throughout, so the method terminates on degenerate problems.
//! Runs over `f64` (with tolerances) or `BigRational` (exactly).

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Feasibility tolerance for the floating-point mode.
pub const FEASIBILITY_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-10;

pub trait LpScalar: Clone + Debug + PartialOrd + Signed {
    /// Values within this of zero are zero for pivoting.
    fn pivot_eps() -> Self;
    /// Phase-1 objective above this means infeasible.
    fn feasibility_eps() -> Self;
    fn to_f64(&self) -> f64;
}

impl LpScalar for f64 {
    fn pivot_eps() -> Self {
        PIVOT_TOL
    }
    fn feasibility_eps() -> Self {
        FEASIBILITY_TOL
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for BigRational {
    fn pivot_eps() -> Self {
        BigRational::zero()
    }
    fn feasibility_eps() -> Self {
        BigRational::zero()
    }
    fn to_f64(&self) -> f64 {
        crate::cnc::ratio_to_f64(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    /// Constraint rows.
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpSolution<T> {
    Optimal { x: Vec<T>, objective: T },
    /// `y` with `yᵀA ≥ 0` and `yᵀb < 0`.
    Infeasible { farkas: Vec<T> },
    Unbounded,
}

struct Tableau<T> {
    /// m rows of `[B⁻¹A | B⁻¹ | B⁻¹b]`.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Number of structural columns.
    cols: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn width(&self) -> usize {
        self.cols + self.rows.len()
    }

    fn rhs(&self, i: usize) -> &T {
        self.rows[i].last().expect("rhs")
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            // keep the pivot column exact in floating point
            row[col] = T::zero();
        }
        self.basis[r] = col;
    }

    /// Reduced costs `c_j − c_Bᵀ B⁻¹ A_j` over the first `limit` columns.
    fn reduced_costs(&self, cost: &[T], limit: usize) -> Vec<T> {
        let mut r: Vec<T> = cost[..limit].to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (rj, v) in r.iter_mut().zip(row) {
                *rj = rj.clone() - cb.clone() * v.clone();
            }
        }
        r
    }

    /// Bland-rule iterations with entering columns restricted to `< limit`.
    /// Returns false if unbounded.
    fn optimize(&mut self, cost: &[T], limit: usize) -> bool {
        let eps = T::pivot_eps();
        loop {
            let r = self.reduced_costs(cost, limit);
            let Some(col) = (0..limit).find(|&j| r[j] < -eps.clone()) else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if *a > eps {
                    let ratio = self.rhs(i).clone() / a.clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((i, _)) => self.pivot(i, col),
            }
        }
    }
}

pub fn solve<T: LpScalar>(lp: &LinearProgram<T>) -> LpSolution<T> {
    let m = lp.a.len();
    let n = lp.c.len();
    // flip rows so b ≥ 0; artificial columns n..n+m start as the basis
    let signs: Vec<T> = lp
        .b
        .iter()
        .map(|v| if v.is_negative() { -T::one() } else { T::one() })
        .collect();
    let rows = (0..m)
        .map(|i| {
            let mut row: Vec<T> = lp.a[i].iter().map(|v| v.clone() * signs[i].clone()).collect();
            row.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
            row.push(lp.b[i].clone() * signs[i].clone());
            row
        })
        .collect();
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        cols: n,
    };
    let width = t.width();
    let phase1: Vec<T> = (0..width).map(|j| if j >= n { T::one() } else { T::zero() }).collect();
    t.optimize(&phase1, width);
    let infeas: T = (0..m)
        .filter(|&i| t.basis[i] >= n)
        .fold(T::zero(), |acc, i| acc + t.rhs(i).clone());
    if infeas > T::feasibility_eps() {
        // phase-1 duals y = c_Bᵀ B⁻¹ are read off the artificial columns
        let r = t.reduced_costs(&phase1, width);
        let farkas = (0..m).map(|i| -(T::one() - r[n + i].clone()) * signs[i].clone()).collect();
        return LpSolution::Infeasible { farkas };
    }
    // drive artificials out of the basis; rows where that fails are redundant
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| t.rows[i][j].abs() > T::pivot_eps()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut cost = lp.c.clone();
    cost.extend((0..width - n).map(|_| T::zero()));
    if !t.optimize(&cost, n) {
        return LpSolution::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        x[bj] = t.rhs(i).clone();
    }
    let objective = x
        .iter()
        .zip(&lp.c)
        .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
    LpSolution::Optimal { x, objective }
}

/// Checks `yᵀA ≥ −tol` and `yᵀb < −tol`; with `tol = 0` the check is exact.
pub fn verify_farkas<T: LpScalar>(lp: &LinearProgram<T>, y: &[T], tol: &T) -> bool {
    let n = lp.c.len();
    let mut ya = vec![T::zero(); n];
    for (row, yi) in lp.a.iter().zip(y) {
        for (acc, v) in ya.iter_mut().zip(row) {
            *acc = acc.clone() + yi.clone() * v.clone();
        }
    }
    let yb = lp.b.iter().zip(y).fold(T::zero(), |acc, (b, yi)| acc + b.clone() * yi.clone());
    ya.iter().all(|v| *v >= -tol.clone()) && yb < -tol.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let lp = LinearProgram {
            a: vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]],
            b: vec![4.0, 6.0],
            c: vec![-1.0, -1.0, 0.0, 0.0],
        };
        let LpSolution::Optimal { x, objective } = solve(&lp) else {
            panic!()
        };
        assert!((objective + 2.8).abs() < 1e-12);
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn exact_infeasibility_certificate() {
        // x + y = 1, x + y = 2
        let lp = LinearProgram {
            a: vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]],
            b: vec![q(1, 1), q(2, 1)],
            c: vec![q(0, 1), q(0, 1)],
        };
        let LpSolution::Infeasible { farkas } = solve(&lp) else {
            panic!()
        };
        assert!(verify_farkas(&lp, &farkas, &BigRational::zero()));
    }

    #[test]
    fn sign_flipped_rows_and_redundancy() {
        // -x = -1, 2x = 2 (redundant), x + y = 3
        let lp = LinearProgram {
            a: vec![vec![-1.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]],
            b: vec![-1.0, 2.0, 3.0],
            c: vec![0.0, 1.0],
        };
        let LpSolution::Optimal { x, objective } = solve(&lp) else {
            panic!()
        };
        assert!((x[0] - 1.0).abs() < 1e-12 && (objective - 2.0).abs() < 1e-12);
        // x = -1 has no nonnegative solution
        let lp = LinearProgram {
            a: vec![vec![1.0]],
            b: vec![-1.0],
            c: vec![0.0],
        };
        let LpSolution::Infeasible { farkas } = solve(&lp) else {
            panic!()
        };
        assert!(verify_farkas(&lp, &farkas, &1e-12));
    }

    #[test]
    fn unbounded() {
        let lp = LinearProgram {
            a: vec![vec![1.0, -1.0]],
            b: vec![0.0],
            c: vec![-1.0, 0.0],
        };
        assert_eq!(solve(&lp), LpSolution::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule
        let lp = LinearProgram {
            a: vec![
                vec![q(1, 4), q(-8, 1), q(-1, 1), q(9, 1), q(1, 1), q(0, 1), q(0, 1)],
                vec![q(1, 2), q(-12, 1), q(-1, 2), q(3, 1), q(0, 1), q(1, 1), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 1)],
            ],
            b: vec![q(0, 1), q(0, 1), q(1, 1)],
            c: vec![q(-3, 4), q(20, 1), q(-1, 2), q(6, 1), q(0, 1), q(0, 1), q(0, 1)],
        };
        let LpSolution::Optimal { objective, .. } = solve(&lp) else {
            panic!()
        };
        assert_eq!(objective, q(-5, 4));
    }
}
