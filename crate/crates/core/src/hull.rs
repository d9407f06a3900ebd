//! Is the origin interior to the convex hull of a finite point set?
//!
//! The origin is interior exactly when the points span the ambient space and
//! admit a strictly positive linear dependence. The dependence is searched as
//! `max t` over `sum lambda_p p = 0`, `sum lambda_p = 1`, `lambda_p >= t`, after
//! scaling each nonzero point to unit max-norm so that `t` is comparable
//! across inputs. When the origin is not interior a separating functional `g`
//! with `g . p >= 0` for every point is returned.

use crate::linalg::{self, Field};
use crate::lp::{maximize, LpOutcome};

/// Optimum distance from the boundary below which a binary64 verdict is flagged.
pub const MARGINAL_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct HullVerdict<F> {
    pub interior: bool,
    /// Strictly positive weights with `sum w_p p = 0` and every `w_p >= 1`.
    pub weights: Option<Vec<F>>,
    /// Nonzero `g` with `g . p >= 0` for all points.
    pub witness: Option<Vec<F>>,
    /// The optimal `t`, or minus the phase-one residual when no dependence exists.
    pub margin: f64,
    pub marginal: bool,
}

fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

pub fn origin_interior<F: Field>(points: &[Vec<F>], dim: usize, exact: bool) -> HullVerdict<F> {
    let scaled: Vec<Option<Vec<F>>> = points
        .iter()
        .map(|p| {
            let norm = p.iter().fold(F::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc });
            (!norm.near_zero()).then(|| p.iter().map(|v| v.div(&norm)).collect())
        })
        .collect();
    let live: Vec<(usize, &Vec<F>)> = scaled
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.as_ref().map(|p| (i, p)))
        .collect();

    let rows: Vec<Vec<F>> = live.iter().map(|(_, p)| (*p).clone()).collect();
    let rank = if rows.is_empty() { 0 } else { linalg::rank(&rows) };
    if rank < dim {
        // everything lies on a hyperplane through the origin
        let matrix = if rows.is_empty() { vec![vec![F::zero(); dim]] } else { rows.clone() };
        let g = linalg::null_space(&matrix, dim).into_iter().next();
        let marginal = !exact && rank_is_fragile(&rows, dim);
        return HullVerdict {
            interior: false,
            weights: None,
            witness: g,
            margin: 0.0,
            marginal,
        };
    }

    // variables: lambda_0..k-1, t, s_0..k-1 ; lambda_p - t - s_p = 0
    let k = live.len();
    let nvars = 2 * k + 1;
    let mut a: Vec<Vec<F>> = Vec::new();
    let mut b: Vec<F> = Vec::new();
    for d in 0..dim {
        let mut row = vec![F::zero(); nvars];
        for (j, (_, p)) in live.iter().enumerate() {
            row[j] = p[d].clone();
        }
        a.push(row);
        b.push(F::zero());
    }
    let mut row = vec![F::zero(); nvars];
    for v in row.iter_mut().take(k) {
        *v = F::one();
    }
    a.push(row);
    b.push(F::one());
    for j in 0..k {
        let mut row = vec![F::zero(); nvars];
        row[j] = F::one();
        row[k] = F::one().neg();
        row[k + 1 + j] = F::one().neg();
        a.push(row);
        b.push(F::zero());
    }
    let mut c = vec![F::zero(); nvars];
    c[k] = F::one();

    let (t_star, lambdas) = match maximize(&a, &b, &c) {
        LpOutcome::Optimal { x, value } => (value, Some(x)),
        LpOutcome::Infeasible { residual } => (residual.neg(), None),
        LpOutcome::Unbounded => unreachable!("t is bounded by 1/k"),
    };
    let margin = t_star.to_f64();
    let marginal = !exact && margin.abs() < MARGINAL_TOL;
    let positive = t_star > F::zero() && !t_star.near_zero();

    if positive {
        let lambdas = lambdas.expect("optimal solution");
        let mut weights = vec![F::one(); points.len()];
        for (j, (i, _)) in live.iter().enumerate() {
            // undo the per-point scaling so the weights refer to the raw points
            let norm = points[*i]
                .iter()
                .fold(F::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc });
            weights[*i] = lambdas[j].div(&t_star).div(&norm);
        }
        let min = weights
            .iter()
            .fold(None::<F>, |acc, w| match acc {
                Some(m) if m < *w => Some(m),
                _ => Some(w.clone()),
            })
            .unwrap_or_else(F::one);
        let weights = weights.iter().map(|w| w.div(&min)).collect();
        return HullVerdict {
            interior: true,
            weights: Some(weights),
            witness: None,
            margin,
            marginal,
        };
    }

    HullVerdict {
        interior: false,
        weights: None,
        witness: separating_functional(&rows, dim),
        margin,
        marginal,
    }
}

/// Finds `g` with `g . p >= 0` for all `p` and `sum_p g . p = 1`.
fn separating_functional<F: Field>(points: &[Vec<F>], dim: usize) -> Option<Vec<F>> {
    // variables g+ (dim), g- (dim), s (k)
    let k = points.len();
    let nvars = 2 * dim + k;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (j, p) in points.iter().enumerate() {
        let mut row = vec![F::zero(); nvars];
        for d in 0..dim {
            row[d] = p[d].clone();
            row[dim + d] = p[d].neg();
        }
        row[2 * dim + j] = F::one().neg();
        a.push(row);
        b.push(F::zero());
    }
    let mut row = vec![F::zero(); nvars];
    for d in 0..dim {
        let s = points.iter().fold(F::zero(), |acc, p| acc.add(&p[d]));
        row[d] = s.clone();
        row[dim + d] = s.neg();
    }
    a.push(row);
    b.push(F::one());
    let c = vec![F::zero(); nvars];
    match maximize(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            let g: Vec<F> = (0..dim).map(|d| x[d].sub(&x[dim + d])).collect();
            points
                .iter()
                .all(|p| {
                    let v = dot(&g, p);
                    v >= F::zero() || v.near_zero()
                })
                .then_some(g)
        }
        _ => None,
    }
}

fn rank_is_fragile<F: Field>(rows: &[Vec<F>], dim: usize) -> bool {
    // a rank deficiency that disappears under a tighter tolerance
    let loose: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v.to_f64() * 1e4).collect()).collect();
    !loose.is_empty() && linalg::rank(&loose) >= dim
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn one_dimensional_cases() {
        let v = origin_interior(&[vec![rat(1, 1)], vec![rat(-2, 1)]], 1, true);
        assert!(v.interior);
        let w = v.weights.unwrap();
        assert_eq!(w[0].clone() * rat(1, 1) + w[1].clone() * rat(-2, 1), rat(0, 1));
        let v = origin_interior(&[vec![rat(1, 1)], vec![rat(3, 1)]], 1, true);
        assert!(!v.interior);
        assert!(v.witness.unwrap()[0] > rat(0, 1));
    }

    #[test]
    fn square_around_origin() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]];
        let v = origin_interior(&pts, 2, false);
        assert!(v.interior && !v.marginal);
        // origin on an edge: not interior, witness exists
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]];
        let v = origin_interior(&pts, 2, false);
        assert!(!v.interior);
        let g = v.witness.unwrap();
        assert!(pts.iter().all(|p| g[0] * p[0] + g[1] * p[1] >= -1e-12));
    }

    #[test]
    fn rank_deficient_gets_normal_witness() {
        let pts = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(-1, 1), rat(-1, 1)]];
        let v = origin_interior(&pts, 2, true);
        assert!(!v.interior);
        let g = v.witness.unwrap();
        assert_eq!(g[0].clone() + g[1].clone(), rat(0, 1));
    }
}
