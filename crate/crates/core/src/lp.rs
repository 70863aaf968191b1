//! Exact two-phase simplex over ℚ with Bland's rule. Small dense problems only.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<BigRational>, value: BigRational },
}

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = &*x / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for j in 0..self.rows[i].len() {
                let v = &f * &self.rows[r][j];
                self.rows[i][j] -= v;
            }
            let v = &f * &self.rhs[r];
            self.rhs[i] -= v;
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over the current feasible basis; `allowed` masks entering columns.
    /// Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[BigRational], allowed: &[bool]) -> bool {
        loop {
            // reduced cost c_j − c_B B⁻¹ A_j
            let entering = (0..cost.len()).filter(|&j| allowed[j] && !self.basis.contains(&j)).find(|&j| {
                let mut rc = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    rc -= &cost[b] * &self.rows[i][j];
                }
                rc.is_positive()
            });
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, c);
        }
    }
}

/// Maximizes `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn maximize(c: &[BigRational], a: &[Vec<BigRational>], b: &[BigRational]) -> LpResult {
    let m = a.len();
    let n = c.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<BigRational> = a[i].iter().map(|x| if flip { -x } else { x.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { BigRational::one() } else { BigRational::zero() }));
        rows.push(row);
        rhs.push(if flip { -&b[i] } else { b[i].clone() });
    }
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect() };
    // phase I: minimize the sum of artificials
    let phase1: Vec<BigRational> =
        (0..n + m).map(|j| if j >= n { -BigRational::one() } else { BigRational::zero() }).collect();
    t.optimize(&phase1, &vec![true; n + m]);
    let infeasibility: BigRational = t.basis.iter().zip(&t.rhs).filter(|(&j, _)| j >= n).map(|(_, v)| v.clone()).sum();
    if infeasibility.is_positive() {
        return LpResult::Infeasible;
    }
    // drive remaining artificials out of the basis where possible
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }
    let mut cost: Vec<BigRational> = c.to_vec();
    cost.extend((0..m).map(|_| BigRational::zero()));
    let allowed: Vec<bool> = (0..n + m).map(|j| j < n).collect();
    if !t.optimize(&cost, &allowed) {
        return LpResult::Unbounded;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.rhs[i].clone();
        }
    }
    let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
    LpResult::Optimal { x, value }
}

/// A solution of `A y = b` with every `y_j > 0`, if one exists.
pub fn strictly_positive_solution(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.first().map_or(0, Vec::len);
    // y = z + t·1 with z, t ≥ 0; maximize t with t ≤ 1 kept by a slack column
    let mut rows: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| {
            let mut row = r.clone();
            row.push(r.iter().sum());
            row.push(BigRational::zero());
            row
        })
        .collect();
    let mut bound = vec![BigRational::zero(); n];
    bound.push(BigRational::one());
    bound.push(BigRational::one());
    rows.push(bound);
    let mut rhs = b.to_vec();
    rhs.push(BigRational::one());
    let mut cost = vec![BigRational::zero(); n + 2];
    cost[n] = BigRational::one();
    match maximize(&cost, &rows, &rhs) {
        LpResult::Optimal { x, value } if value.is_positive() => {
            Some((0..n).map(|j| &x[j] + &x[n]).collect())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_lp() {
        // max x + y, x + 2y + s = 4, 3x + y + u = 6
        let c = vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1)];
        let a = vec![vec![q(1, 1), q(2, 1), q(1, 1), q(0, 1)], vec![q(3, 1), q(1, 1), q(0, 1), q(1, 1)]];
        let b = vec![q(4, 1), q(6, 1)];
        match maximize(&c, &a, &b) {
            LpResult::Optimal { value, .. } => assert_eq!(value, q(14, 5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_positive() {
        let a = vec![vec![q(1, 1), q(1, 1)]];
        assert_eq!(maximize(&[q(0, 1), q(0, 1)], &a, &[q(-1, 1)]), LpResult::Infeasible);
        let y = strictly_positive_solution(&a, &[q(1, 1)]).unwrap();
        assert!(y.iter().all(|v| v.is_positive()));
        assert_eq!(&y[0] + &y[1], q(1, 1));
        // y0 + y1 = 1 and y0 = 1 forces y1 = 0
        let a2 = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]];
        assert!(strictly_positive_solution(&a2, &[q(1, 1), q(1, 1)]).is_none());
    }
}
