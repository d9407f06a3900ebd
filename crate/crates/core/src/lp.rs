//! Two-phase dense simplex with Bland's rule.
//!
//! Small problems only: the tableau is dense and reduced costs are recomputed
//! every pivot. Generic over [`Field`] so the same code runs on exact
//! rationals and on binary64 with the [`FLOAT_TOL`](crate::linalg::FLOAT_TOL)
//! tolerance.

use crate::linalg::Field;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<F> {
    Optimal { x: Vec<F>, value: F },
    /// Phase one could not drive the artificial sum to zero; `residual` is
    /// the smallest artificial sum reached.
    Infeasible { residual: F },
    Unbounded,
}

const MAX_PIVOTS: usize = 50_000;

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    basis: Vec<usize>,
}

impl<F: Field> Tableau<F> {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = F::one().div(&self.rows[r][c]);
        for v in self.rows[r].iter_mut() {
            *v = v.mul(&inv);
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].near_zero() {
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v = v.sub(&f.mul(p));
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over the columns in `allowed`. Returns false when unbounded.
    fn optimize(&mut self, cost: &[F], allowed: usize) -> bool {
        let width = self.rows.first().map_or(0, |r| r.len() - 1);
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed.min(width)).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .fold(F::zero(), |acc, (row, &b)| acc.add(&cost[b].mul(&row[j])));
                let rc = cost[j].sub(&z);
                rc > F::zero() && !rc.near_zero()
            });
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > F::zero() && !row[c].near_zero() {
                    let ratio = row[width].div(&row[c]);
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            let diff = ratio.sub(br);
                            if diff.near_zero() {
                                self.basis[i] < self.basis[*bi]
                            } else {
                                ratio < *br
                            }
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
        true
    }
}

/// Maximize `c · x` subject to `A x = b`, `x >= 0`.
pub fn maximize<F: Field>(a: &[Vec<F>], b: &[F], c: &[F]) -> LpOutcome<F> {
    let m = a.len();
    let n = c.len();
    // phase one: artificial column per row, rhs made nonnegative
    let mut rows: Vec<Vec<F>> = Vec::with_capacity(m);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        let flip = *rhs < F::zero();
        let mut r: Vec<F> = row.iter().map(|v| if flip { v.neg() } else { v.clone() }).collect();
        r.extend((0..m).map(|j| if i == j { F::one() } else { F::zero() }));
        r.push(if flip { rhs.neg() } else { rhs.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
    };
    let mut phase1: Vec<F> = vec![F::zero(); n];
    phase1.extend((0..m).map(|_| F::one().neg()));
    t.optimize(&phase1, n + m);
    let width = n + m;
    let residual = t
        .rows
        .iter()
        .zip(&t.basis)
        .filter(|(_, &b)| b >= n)
        .fold(F::zero(), |acc, (row, _)| acc.add(&row[width]));
    if !residual.near_zero() {
        return LpOutcome::Infeasible { residual };
    }
    // drive remaining artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].near_zero()) {
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
    let mut cost = c.to_vec();
    cost.extend((0..m).map(|_| F::zero()));
    if !t.optimize(&cost, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![F::zero(); n];
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        if bv < n {
            x[bv] = row[width].clone();
        }
    }
    let value = x.iter().zip(c).fold(F::zero(), |acc, (xi, ci)| acc.add(&xi.mul(ci)));
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;

    #[test]
    fn small_exact_program() {
        // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![
            vec![rat(1, 1), rat(2, 1), rat(1, 1), rat(0, 1)],
            vec![rat(3, 1), rat(1, 1), rat(0, 1), rat(1, 1)],
        ];
        let b = vec![rat(4, 1), rat(6, 1)];
        let c = vec![rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)];
        match maximize(&a, &b, &c) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, rat(14, 5));
                assert_eq!(x[0], rat(8, 5));
                assert_eq!(x[1], rat(6, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x = -1, x >= 0
        let out = maximize(&[vec![rat(1, 1)]], &[rat(-1, 1)], &[rat(0, 1)]);
        assert!(matches!(out, LpOutcome::Infeasible { .. }));
        // max x s.t. x - y = 0
        let out: LpOutcome<BigRational> =
            maximize(&[vec![rat(1, 1), rat(-1, 1)]], &[rat(0, 1)], &[rat(1, 1), rat(0, 1)]);
        assert_eq!(out, LpOutcome::Unbounded);
    }

    #[test]
    fn float_program_matches_exact() {
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        match maximize(&a, &[4.0, 6.0], &[1.0, 1.0, 0.0, 0.0]) {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.8).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
