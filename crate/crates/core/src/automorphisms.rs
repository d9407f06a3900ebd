//! Automorphisms of `H_mn` and the normal form used by the densify pipeline.
//!
//! * Type A: a linear map on the `R^(m-1)` factor.
//! * Type B: a linear map on `R^n`.
//! * Type C: the shear `(v, a_mult, b) -> (v + ln(a_mult) alpha, a_mult, b + (a_mult - 1) beta)`.

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::group::{GroupElement, GroupError};
use crate::linalg;
use crate::scalar::{rationalize, Scalar, ScalarError};
use crate::separation::decide_separation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomorphismError {
    #[error("matrix is not square of size {0}")]
    BadMatrix(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("composite automorphism needs at least one factor")]
    EmptyComposite,
    #[error("no type C automorphism normalizes an element with a_mult = 1")]
    UnitMultiplier,
    #[error("input is separated; normal form fails at {step}")]
    Separated { step: String },
    #[error("dimension mismatch")]
    Shape,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Matrix = Vec<Vec<Scalar>>;

#[derive(Clone, Debug, PartialEq)]
pub enum Automorphism {
    TypeA(Matrix),
    TypeB(Matrix),
    TypeC { alpha: Vec<Scalar>, beta: Vec<Scalar> },
    /// Applied right to left: `Composite([f, g])(x) = f(g(x))`.
    Composite(Vec<Automorphism>),
}

fn as_rational_matrix(m: &Matrix) -> Option<Vec<Vec<BigRational>>> {
    m.iter().map(|r| r.iter().map(Scalar::as_rational).collect()).collect()
}

fn check_matrix(m: &Matrix) -> Result<(), AutomorphismError> {
    let k = m.len();
    if m.iter().any(|r| r.len() != k) {
        return Err(AutomorphismError::BadMatrix(k));
    }
    if matrix_inverse(m).is_none() {
        return Err(AutomorphismError::Singular);
    }
    Ok(())
}

/// Inverse, exact when every entry is rational.
pub fn matrix_inverse(m: &Matrix) -> Option<Matrix> {
    if m.is_empty() {
        return Some(Vec::new());
    }
    if let Some(q) = as_rational_matrix(m) {
        let inv = linalg::inverse(&q)?;
        return Some(inv.into_iter().map(|r| r.into_iter().map(Scalar::rational).collect()).collect());
    }
    let f: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(Scalar::evaluate).collect()).collect();
    let inv = linalg::inverse(&f)?;
    Some(inv.into_iter().map(|r| r.into_iter().map(Scalar::Float).collect()).collect())
}

pub fn identity_matrix(k: usize) -> Matrix {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect())
        .collect()
}

fn apply_matrix(m: &Matrix, x: &[Scalar]) -> Vec<Scalar> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(Scalar::zero(), |acc, (a, b)| &acc + &a.mul_or_demote(b))
        })
        .collect()
}

impl Automorphism {
    pub fn type_a(m: Matrix) -> Result<Self, AutomorphismError> {
        check_matrix(&m)?;
        Ok(Automorphism::TypeA(m))
    }

    pub fn type_b(m: Matrix) -> Result<Self, AutomorphismError> {
        check_matrix(&m)?;
        Ok(Automorphism::TypeB(m))
    }

    pub fn composite(parts: Vec<Automorphism>) -> Result<Self, AutomorphismError> {
        if parts.is_empty() {
            return Err(AutomorphismError::EmptyComposite);
        }
        Ok(Automorphism::Composite(parts))
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement, AutomorphismError> {
        let shape = x.shape();
        match self {
            Automorphism::TypeA(m) => {
                if m.len() != shape.m - 1 {
                    return Err(AutomorphismError::Shape);
                }
                Ok(GroupElement {
                    v: apply_matrix(m, &x.v),
                    ..x.clone()
                })
            }
            Automorphism::TypeB(m) => {
                if m.len() != shape.n {
                    return Err(AutomorphismError::Shape);
                }
                Ok(GroupElement {
                    b: apply_matrix(m, &x.b),
                    ..x.clone()
                })
            }
            Automorphism::TypeC { alpha, beta } => {
                if alpha.len() != shape.m - 1 || beta.len() != shape.n {
                    return Err(AutomorphismError::Shape);
                }
                let unit = x.a_mult.is_one() && x.a_mult.is_exact();
                let v = if unit || alpha.iter().all(Scalar::is_zero) {
                    x.v.clone()
                } else {
                    let la = Scalar::Float(x.a_mult.evaluate().ln());
                    x.v.iter().zip(alpha).map(|(v, a)| v + &la.mul_or_demote(a)).collect()
                };
                let d = &x.a_mult - &Scalar::one();
                let b = x.b.iter().zip(beta).map(|(y, c)| y + &d.mul_or_demote(c)).collect();
                Ok(GroupElement {
                    v,
                    a_mult: x.a_mult.clone(),
                    b,
                })
            }
            Automorphism::Composite(parts) => {
                let mut y = x.clone();
                for p in parts.iter().rev() {
                    y = p.apply(&y)?;
                }
                Ok(y)
            }
        }
    }

    pub fn apply_all(&self, xs: &[GroupElement]) -> Result<Vec<GroupElement>, AutomorphismError> {
        xs.iter().map(|x| self.apply(x)).collect()
    }

    pub fn inverse(&self) -> Automorphism {
        match self {
            Automorphism::TypeA(m) => Automorphism::TypeA(matrix_inverse(m).expect("checked invertible")),
            Automorphism::TypeB(m) => Automorphism::TypeB(matrix_inverse(m).expect("checked invertible")),
            Automorphism::TypeC { alpha, beta } => Automorphism::TypeC {
                alpha: alpha.iter().map(Scalar::neg).collect(),
                beta: beta.iter().map(Scalar::neg).collect(),
            },
            Automorphism::Composite(parts) => Automorphism::Composite(parts.iter().rev().map(Automorphism::inverse).collect()),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Automorphism::TypeA(m) | Automorphism::TypeB(m) => *m == identity_matrix(m.len()),
            Automorphism::TypeC { alpha, beta } => alpha.iter().chain(beta).all(Scalar::is_zero),
            Automorphism::Composite(parts) => parts.iter().all(Automorphism::is_identity),
        }
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vec = |xs: &[Scalar]| format!("[{}]", xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "));
        let mat = |m: &Matrix| format!("[{}]", m.iter().map(|r| vec(r)).collect::<Vec<_>>().join(", "));
        match self {
            Automorphism::TypeA(m) => write!(f, "type-a {}", mat(m)),
            Automorphism::TypeB(m) => write!(f, "type-b {}", mat(m)),
            Automorphism::TypeC { alpha, beta } => write!(f, "type-c alpha = {}, beta = {}", vec(alpha), vec(beta)),
            Automorphism::Composite(parts) => {
                let inner: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "compose({})", inner.join(" o "))
            }
        }
    }
}

/// Type C map sending `z = (v, a_mult, b)` to `(0, a_mult, 0)`.
pub fn normalizing_type_c(z: &GroupElement) -> Result<Automorphism, AutomorphismError> {
    let d = &z.a_mult - &Scalar::one();
    if d.is_zero() {
        return Err(AutomorphismError::UnitMultiplier);
    }
    let la = Scalar::Float(z.a_mult.evaluate().ln());
    let alpha = z
        .v
        .iter()
        .map(|v| if v.is_zero() { Ok(Scalar::zero()) } else { v.div(&la).map(|q| q.neg()) })
        .collect::<Result<_, _>>()?;
    let beta = z
        .b
        .iter()
        .map(|y| y.div_or_demote(&d).map(|q| q.neg()))
        .collect::<Result<_, _>>()?;
    Ok(Automorphism::TypeC { alpha, beta })
}

/// One recorded action of the normal-form procedure.
#[derive(Clone, Debug, PartialEq)]
pub enum AuditStep {
    Automorphism { label: String, map: Automorphism },
    Perturbation { index: usize, from: GroupElement, to: GroupElement },
    Note(String),
}

impl fmt::Display for AuditStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditStep::Automorphism { label, map } => write!(f, "{label}: {map}"),
            AuditStep::Perturbation { index, from, to } => write!(f, "perturb element {index}: {from} -> {to}"),
            AuditStep::Note(s) => f.write_str(s),
        }
    }
}

/// Result of bringing a nonseparated set into normal form.
///
/// `elements` is `phi(perturbed)`; `perturbed` is the nearby input set.
/// `z` has `b = 0` and `a_mult > 1`; `basis[i]` has `b = |1 - c_i| e_i`
/// with `c_i != 1`; either `basis[0]` has `c_1 < 1` or `z_prime` has `b = 0`
/// and `a_mult < 1`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub phi: Automorphism,
    pub elements: Vec<GroupElement>,
    pub perturbed: Vec<GroupElement>,
    pub z: usize,
    pub basis: Vec<usize>,
    pub z_prime: Option<usize>,
    pub audit: Vec<AuditStep>,
}

impl NormalForm {
    pub fn c1_below_one(&self) -> bool {
        self.elements[self.basis[0]].a_mult.compare(&Scalar::one()) == std::cmp::Ordering::Less
    }
}

fn type_b_sending(v: &[Scalar], i: usize) -> Result<Automorphism, AutomorphismError> {
    // columns e_1.. e_(i-1), v, e_(i+1).. ; its inverse sends v to e_i and fixes the rest
    let n = v.len();
    let mut cols = identity_matrix(n);
    for (r, vr) in v.iter().enumerate() {
        cols[r][i] = vr.clone();
    }
    let inv = matrix_inverse(&cols).ok_or(AutomorphismError::Singular)?;
    Automorphism::type_b(inv)
}

fn swap_matrix(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = identity_matrix(n);
    m.swap(i, j);
    m
}

fn is_exactly_zero(xs: &[Scalar]) -> bool {
    xs.iter().all(|x| x.is_zero())
}

/// Brings a nonseparated set into the normal form described on [`NormalForm`].
///
/// Elements whose `c_i` equals 1 are moved to a rational `1 - delta` with
/// `delta` chosen so every input coordinate moves by at most `epsilon`.
pub fn normalize_structure(set: &[GroupElement], epsilon: f64) -> Result<NormalForm, AutomorphismError> {
    let verdict = decide_separation(set).map_err(|e| AutomorphismError::Separated { step: e.to_string() })?;
    if verdict.separated {
        return Err(AutomorphismError::Separated {
            step: "base case: no admissible first basis element".into(),
        });
    }
    let shape = set[0].shape();
    let n = shape.n;
    let mut audit = Vec::new();
    let mut parts: Vec<Automorphism> = Vec::new();

    // an element with a_mult > 1, exact ones first
    let z = (0..set.len())
        .filter(|&i| set[i].a_mult.compare(&Scalar::one()) == std::cmp::Ordering::Greater)
        .min_by_key(|&i| (!set[i].is_exact(), !is_exactly_zero(&set[i].b), i))
        .ok_or_else(|| AutomorphismError::Separated {
            step: "type C step: no element with a_mult > 1".into(),
        })?;
    let d = &set[z].a_mult - &Scalar::one();
    let beta = set[z]
        .b
        .iter()
        .map(|y| y.div_or_demote(&d).map(|q| q.neg()))
        .collect::<Result<Vec<_>, _>>()?;
    let c = Automorphism::TypeC {
        alpha: vec![Scalar::zero(); shape.m - 1],
        beta,
    };
    let mut cur = c.apply_all(set)?;
    cur[z].b = vec![Scalar::zero(); n];
    audit.push(AuditStep::Automorphism {
        label: format!("type-c normalization of element {z}"),
        map: c.clone(),
    });
    parts.push(c);

    let mut basis: Vec<usize> = Vec::new();
    let mut z_prime = None;
    for i in 0..n {
        let usable = |k: usize, cur: &[GroupElement]| k != z && !basis.contains(&k) && !is_exactly_zero(&cur[k].b[i..]);
        let below = |k: usize, cur: &[GroupElement]| cur[k].a_mult.compare(&Scalar::one()) == std::cmp::Ordering::Less;
        let pick = if i == 0 {
            (0..cur.len())
                .filter(|&k| usable(k, &cur))
                .min_by_key(|&k| (!below(k, &cur), !cur[k].is_exact(), k))
        } else {
            (0..cur.len()).filter(|&k| usable(k, &cur)).min_by_key(|&k| (!cur[k].is_exact(), k))
        };
        let Some(k) = pick else {
            let step = if i == 0 { "base case".to_string() } else { format!("inductive step {}", i + 1) };
            return Err(AutomorphismError::Separated { step });
        };
        if i == 0 {
            z_prime = (0..cur.len()).find(|&j| j != z && below(j, &cur) && is_exactly_zero(&cur[j].b));
        }
        let j = (i..n).find(|&j| !cur[k].b[j].is_zero()).expect("usable");
        if j != i {
            let p = Automorphism::type_b(swap_matrix(n, i, j))?;
            cur = p.apply_all(&cur)?;
            audit.push(AuditStep::Automorphism {
                label: format!("type-b coordinate swap {} <-> {}", i + 1, j + 1),
                map: p.clone(),
            });
            parts.insert(0, p);
        }
        let t = type_b_sending(&cur[k].b, i)?;
        cur = t.apply_all(&cur)?;
        cur[k].b = (0..n).map(|r| if r == i { Scalar::one() } else { Scalar::zero() }).collect();
        audit.push(AuditStep::Automorphism {
            label: format!("type-b step {}: element {k} to e_{}", i + 1, i + 1),
            map: t.clone(),
        });
        parts.insert(0, t);
        basis.push(k);
    }

    let mut perturbed = set.to_vec();
    let need_c1_below = z_prime.is_none();
    let phi_c = Automorphism::composite(parts.clone())?;
    let beta_norm = match &parts[parts.len() - 1] {
        Automorphism::TypeC { beta, .. } => beta.iter().map(|b| b.evaluate().abs()).fold(0.0, f64::max),
        _ => 0.0,
    };
    let delta = rationalize(epsilon / (2.0 * (1.0 + beta_norm)), 12);
    let delta = if delta > BigRational::from_integer(0.into()) {
        delta
    } else {
        crate::scalar::rat(1, 1_000_000_000_000)
    };
    for (pos, &k) in basis.iter().enumerate() {
        let unit = cur[k].a_mult.compare(&Scalar::one()) == std::cmp::Ordering::Equal;
        let force_below = pos == 0 && need_c1_below && !unit && cur[k].a_mult.compare(&Scalar::one()) != std::cmp::Ordering::Less;
        if force_below {
            return Err(AutomorphismError::Separated {
                step: "base case: no element with c_1 < 1 and no element with a_mult < 1 and b = 0".into(),
            });
        }
        if unit {
            let mut to = cur[k].clone();
            to.a_mult = &Scalar::one() - &Scalar::rational(delta.clone());
            let pre = phi_c.inverse().apply(&to)?;
            audit.push(AuditStep::Perturbation {
                index: k,
                from: set[k].clone(),
                to: pre.clone(),
            });
            perturbed[k] = pre;
            cur[k] = to;
        }
    }

    // rescale e_i to |1 - c_i| e_i
    let diag: Matrix = (0..n)
        .map(|r| {
            (0..n)
                .map(|s| if r == s { (&Scalar::one() - &cur[basis[r]].a_mult).abs() } else { Scalar::zero() })
                .collect()
        })
        .collect();
    let d = Automorphism::type_b(diag)?;
    cur = d.apply_all(&cur)?;
    audit.push(AuditStep::Automorphism {
        label: "type-b rescaling by |1 - c_i|".into(),
        map: d.clone(),
    });
    parts.insert(0, d);

    Ok(NormalForm {
        phi: Automorphism::composite(parts)?,
        elements: cur,
        perturbed,
        z,
        basis,
        z_prime,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> Scalar {
        t.parse().unwrap()
    }

    fn el(v: &[&str], a: &str, b: &[&str]) -> GroupElement {
        GroupElement::new(v.iter().map(|x| s(x)).collect(), s(a), b.iter().map(|x| s(x)).collect()).unwrap()
    }

    #[test]
    fn type_c_normalizes() {
        let z = el(&[], "2", &["3"]);
        let c = normalizing_type_c(&z).unwrap();
        assert_eq!(c, Automorphism::TypeC { alpha: vec![], beta: vec![s("-3")] });
        assert_eq!(c.apply(&z).unwrap(), el(&[], "2", &["0"]));
        let id = normalizing_type_c(&el(&["0"], "3", &["0"])).unwrap();
        assert!(id.is_identity());
        assert_eq!(normalizing_type_c(&el(&[], "1", &["2"])), Err(AutomorphismError::UnitMultiplier));
        let z = el(&["1", "-2"], "5/2", &["1", "4"]);
        let out = normalizing_type_c(&z).unwrap().apply(&z).unwrap();
        assert!(out.v.iter().all(|x| x.evaluate().abs() < 1e-15));
        assert!(out.b.iter().all(Scalar::is_zero));
    }

    #[test]
    fn type_a_swap_and_identity_b() {
        let swap = Automorphism::type_a(swap_matrix(2, 0, 1)).unwrap();
        assert_eq!(swap.apply(&el(&["1", "2"], "3", &["0"])).unwrap(), el(&["2", "1"], "3", &["0"]));
        let id = Automorphism::type_b(identity_matrix(2)).unwrap();
        let x = el(&[], "3", &["1/2", "7"]);
        assert_eq!(id.apply(&x).unwrap(), x);
        assert!(Automorphism::type_b(vec![vec![s("1"), s("2")], vec![s("2"), s("4")]]).is_err());
    }

    #[test]
    fn composite_order_and_inverse() {
        let f = Automorphism::type_b(vec![vec![s("2")]]).unwrap();
        let g = Automorphism::TypeC { alpha: vec![], beta: vec![s("1")] };
        let fg = Automorphism::composite(vec![f.clone(), g.clone()]).unwrap();
        let x = el(&[], "3", &["1"]);
        assert_eq!(fg.apply(&x).unwrap(), f.apply(&g.apply(&x).unwrap()).unwrap());
        assert_eq!(fg.inverse().apply(&fg.apply(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn homomorphism_exact() {
        let c = Automorphism::TypeC { alpha: vec![], beta: vec![s("2/3"), s("-5")] };
        let b = Automorphism::type_b(vec![vec![s("1"), s("2")], vec![s("0"), s("-1/2")]]).unwrap();
        let x = el(&[], "3/2", &["1", "-2"]);
        let y = el(&[], "1/5", &["7/3", "1/9"]);
        for phi in [c, b] {
            let lhs = phi.apply(&x.product(&y).unwrap()).unwrap();
            let rhs = phi.apply(&x).unwrap().product(&phi.apply(&y).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn normal_form_of_small_g2_set() {
        // additive (1, 0), (0, e_i), (-sqrt2, -1, -1)
        crate::scalar::Symbol::intern("sqrt2", 2f64.sqrt()).unwrap();
        let set = vec![
            GroupElement::from_additive(vec![], &s("1"), vec![s("0"), s("0")]),
            GroupElement::from_additive(vec![], &s("0"), vec![s("1"), s("0")]),
            GroupElement::from_additive(vec![], &s("0"), vec![s("0"), s("1")]),
            GroupElement::from_additive(vec![], &s("-sqrt2"), vec![s("-1"), s("-1")]),
        ];
        let nf = normalize_structure(&set, 1e-3).unwrap();
        assert_eq!(nf.z, 0);
        assert!(nf.c1_below_one());
        assert_eq!(nf.basis.len(), 2);
        for (i, &k) in nf.basis.iter().enumerate() {
            let c = nf.elements[k].a_mult.evaluate();
            assert!(c != 1.0);
            for (j, y) in nf.elements[k].b.iter().enumerate() {
                let want = if i == j { (1.0 - c).abs() } else { 0.0 };
                assert!((y.evaluate() - want).abs() < 1e-12);
            }
        }
        for (p, q) in nf.perturbed.iter().zip(&set) {
            assert!(p.distance(q) <= 1e-3);
        }
        let img = nf.phi.apply_all(&nf.perturbed).unwrap();
        for (p, q) in img.iter().zip(&nf.elements) {
            assert!(p.distance(q) < 1e-12);
        }
    }

    #[test]
    fn separated_input_is_rejected() {
        let set = vec![el(&[], "2", &["1"]), el(&[], "1/2", &["3"])];
        assert!(matches!(normalize_structure(&set, 1e-3), Err(AutomorphismError::Separated { .. })));
    }
}
