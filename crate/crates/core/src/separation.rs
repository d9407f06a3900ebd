//! Deciding whether a finite subset of `H_mn` lies in a maximal subsemigroup.
//!
//! Maximal subsemigroups are closed half-spaces whose boundary is a
//! subalgebra. A hyperplane `alpha . X + beta Y + gamma . Z = 0` of the Lie
//! algebra is a subalgebra exactly when `gamma = 0` or `alpha = 0`, giving two
//! families of half-spaces at group level:
//!
//! * type (i): `g . (v, ln a_mult) >= 0`, a pullback from `R^m`;
//! * type (ii): `gamma . b + mu (a_mult - 1) >= 0`.
//!
//! A set is separated when one of the two point clouds `(v, ln a_mult)` or
//! `(b, a_mult - 1)` fails to surround the origin.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::group::{GroupElement, GroupShape};
use crate::hull::{origin_interior, HullVerdict, MARGINAL_TOL};
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeparationError {
    #[error("empty input set")]
    Empty,
    #[error("elements have mixed shapes")]
    ShapeMismatch,
    #[error("operation is defined on G_1 only")]
    NotG1,
    #[error("every boundary curve passes through the identity")]
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    /// `g . (v, ln a_mult) >= 0`.
    TypeI(Vec<Scalar>),
    /// `gamma . b + mu (a_mult - 1) >= 0`.
    TypeII { gamma: Vec<Scalar>, mu: Scalar },
}

impl Functional {
    /// Value of the defining expression at `x`, in binary64.
    pub fn evaluate(&self, x: &GroupElement) -> f64 {
        match self {
            Functional::TypeI(g) => g.iter().zip(x.projection()).map(|(c, p)| c.evaluate() * p).sum(),
            Functional::TypeII { gamma, mu } => {
                gamma.iter().zip(&x.b).map(|(c, y)| c.evaluate() * y.evaluate()).sum::<f64>()
                    + mu.evaluate() * (x.a_mult.evaluate() - 1.0)
            }
        }
    }

    /// Exact value of a type (ii) expression when all scalars allow it.
    pub fn evaluate_exact(&self, x: &GroupElement) -> Option<Scalar> {
        match self {
            Functional::TypeI(_) => None,
            Functional::TypeII { gamma, mu } => {
                let mut acc = mu.mul(&(&x.a_mult - &Scalar::one())).ok()?;
                for (c, y) in gamma.iter().zip(&x.b) {
                    acc = &acc + &c.mul(y).ok()?;
                }
                acc.is_exact().then_some(acc)
            }
        }
    }

    /// Membership in the closed half-space. Exact when possible.
    pub fn contains(&self, x: &GroupElement) -> bool {
        match self.evaluate_exact(x) {
            Some(v) => !v.is_negative(),
            None => self.evaluate(x) >= -1e-9,
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[Scalar]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        match self {
            Functional::TypeI(g) => write!(f, "type-i g = [{}]", join(g)),
            Functional::TypeII { gamma, mu } => write!(f, "type-ii gamma = [{}], mu = {}", join(gamma), mu),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HullCertificates {
    /// Positive weights with `sum w_s (v_s, ln a_s) = 0`.
    pub type_i: Vec<Scalar>,
    /// Positive weights with `sum w_s (b_s, a_s - 1) = 0`.
    pub type_ii: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationVerdict {
    pub separated: bool,
    pub witness: Option<Functional>,
    pub hull_certificates: Option<HullCertificates>,
    pub marginal: bool,
}

fn check_shapes(set: &[GroupElement]) -> Result<GroupShape, SeparationError> {
    let first = set.first().ok_or(SeparationError::Empty)?;
    let shape = first.shape();
    if set.iter().any(|x| x.shape() != shape) {
        return Err(SeparationError::ShapeMismatch);
    }
    Ok(shape)
}

struct Test {
    interior: bool,
    weights: Option<Vec<Scalar>>,
    witness: Option<Vec<Scalar>>,
    marginal: bool,
}

fn from_exact(v: HullVerdict<BigRational>) -> Test {
    let conv = |xs: Vec<BigRational>| xs.into_iter().map(Scalar::rational).collect();
    Test {
        interior: v.interior,
        weights: v.weights.map(conv),
        witness: v.witness.map(conv),
        marginal: false,
    }
}

fn from_float(v: HullVerdict<f64>) -> Test {
    let conv = |xs: Vec<f64>| xs.into_iter().map(Scalar::Float).collect();
    Test {
        interior: v.interior,
        weights: v.weights.map(conv),
        witness: v.witness.map(conv),
        marginal: v.marginal,
    }
}

/// Does `{(v_s, ln a_s)}` surround the origin of `R^m`?
fn type_i_test(set: &[GroupElement], m: usize) -> Test {
    if m == 1 {
        // one dimension: compare a_mult with 1 directly
        let signs: Vec<Ordering> = set.iter().map(|x| (&x.a_mult - &Scalar::one()).signum()).collect();
        let pos = signs.contains(&Ordering::Greater);
        let neg = signs.contains(&Ordering::Less);
        let marginal = set.iter().any(|x| {
            !x.a_mult.is_exact() && {
                let l = x.a_mult.evaluate().ln().abs();
                l > 0.0 && l < MARGINAL_TOL
            }
        });
        if pos && neg {
            let lns: Vec<f64> = set.iter().map(|x| x.a_mult.evaluate().ln()).collect();
            let weights = balance_1d(&lns);
            return Test {
                interior: true,
                weights: Some(weights.into_iter().map(Scalar::Float).collect()),
                witness: None,
                marginal,
            };
        }
        let g = if neg { -1 } else { 1 };
        return Test {
            interior: false,
            weights: None,
            witness: Some(vec![Scalar::int(g)]),
            marginal,
        };
    }
    let points: Vec<Vec<f64>> = set.iter().map(GroupElement::projection).collect();
    from_float(origin_interior(&points, m, false))
}

/// Rescales one side so that `sum w l = 0` with every weight at least 1.
fn balance_1d(lns: &[f64]) -> Vec<f64> {
    let sp: f64 = lns.iter().filter(|l| **l > 0.0).sum();
    let sn: f64 = -lns.iter().filter(|l| **l < 0.0).sum::<f64>();
    let (kp, kn) = if sp < sn { (sn / sp, 1.0) } else { (1.0, sp / sn) };
    lns.iter()
        .map(|l| {
            if *l > 0.0 {
                kp
            } else if *l < 0.0 {
                kn
            } else {
                1.0
            }
        })
        .collect()
}

/// Does `{(b_s, a_s - 1)}` surround the origin of `R^(n+1)`?
fn type_ii_test(set: &[GroupElement], n: usize) -> Test {
    let exact: Option<Vec<Vec<BigRational>>> = set
        .iter()
        .map(|x| {
            let mut p: Vec<BigRational> = x.b.iter().map(Scalar::as_rational).collect::<Option<_>>()?;
            p.push(x.a_mult.as_rational()? - BigRational::from_integer(1.into()));
            Some(p)
        })
        .collect();
    match exact {
        Some(points) => from_exact(origin_interior(&points, n + 1, true)),
        None => {
            let points: Vec<Vec<f64>> = set
                .iter()
                .map(|x| {
                    let mut p: Vec<f64> = x.b.iter().map(Scalar::evaluate).collect();
                    p.push(x.a_mult.evaluate() - 1.0);
                    p
                })
                .collect();
            from_float(origin_interior(&points, n + 1, false))
        }
    }
}

pub fn decide_separation(set: &[GroupElement]) -> Result<SeparationVerdict, SeparationError> {
    let shape = check_shapes(set)?;
    let one = type_i_test(set, shape.m);
    let two = type_ii_test(set, shape.n);
    let marginal = one.marginal || two.marginal;
    if !one.interior {
        return Ok(SeparationVerdict {
            separated: true,
            witness: one.witness.map(Functional::TypeI),
            hull_certificates: None,
            marginal,
        });
    }
    if !two.interior {
        let witness = two.witness.map(|mut g| {
            let mu = g.pop().expect("n + 1 coefficients");
            Functional::TypeII { gamma: g, mu }
        });
        return Ok(SeparationVerdict {
            separated: true,
            witness,
            hull_certificates: None,
            marginal,
        });
    }
    Ok(SeparationVerdict {
        separated: false,
        witness: None,
        hull_certificates: Some(HullCertificates {
            type_i: one.weights.expect("interior has weights"),
            type_ii: two.weights.expect("interior has weights"),
        }),
        marginal,
    })
}

/// Only the type (i) test: is the projection to `R^m` nonseparated?
pub fn projection_nonseparated(set: &[GroupElement]) -> Result<bool, SeparationError> {
    let shape = check_shapes(set)?;
    Ok(type_i_test(set, shape.m).interior)
}

/// Nonseparation of a finite subset of `R^n` under addition.
pub fn euclidean_nonseparated(points: &[Vec<Scalar>]) -> bool {
    let dim = points.first().map_or(0, Vec::len);
    let exact: Option<Vec<Vec<BigRational>>> = points
        .iter()
        .map(|p| p.iter().map(Scalar::as_rational).collect::<Option<Vec<_>>>())
        .collect();
    match exact {
        Some(q) => origin_interior(&q, dim, true).interior,
        None => {
            let f: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(Scalar::evaluate).collect()).collect();
            origin_interior(&f, dim, false).interior
        }
    }
}

/// The two families of hyperplane subalgebras for a shape.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperplaneFamilies {
    pub shape: GroupShape,
    /// Dimension of the coefficient space of type (i) functionals, `m`.
    pub type_i_dim: usize,
    /// Dimension of the coefficient space of type (ii) functionals, `n + 1`.
    pub type_ii_dim: usize,
}

impl fmt::Display for HyperplaneFamilies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "(i)  kernels of alpha . X + beta Y with (alpha, beta) != 0: {}-dimensional family, boundary g . (v, ln a) = 0",
            self.type_i_dim
        )?;
        write!(
            f,
            "(ii) kernels of beta Y + gamma . Z with gamma != 0: {}-dimensional family, boundary gamma . b + beta (a_mult - 1) = 0",
            self.type_ii_dim
        )
    }
}

pub fn classify_hyperplane_subalgebras(shape: GroupShape) -> HyperplaneFamilies {
    HyperplaneFamilies {
        shape,
        type_i_dim: shape.m,
        type_ii_dim: shape.n + 1,
    }
}

/// Coefficients of a linear functional on the Lie algebra, ordered
/// `(alpha on X_1..X_(m-1), beta on Y, gamma on Z_1..Z_n)`.
pub fn kernel_is_subalgebra(shape: GroupShape, f: &[BigRational]) -> bool {
    let alpha_zero = f[..shape.m - 1].iter().all(Zero::is_zero);
    let gamma_zero = f[shape.m..].iter().all(Zero::is_zero);
    gamma_zero || alpha_zero
}

/// The only nonzero brackets are `[Y, Z_j] = Z_j`.
pub fn bracket(shape: GroupShape, x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
    let ya = shape.m - 1;
    let mut out = vec![BigRational::zero(); x.len()];
    for j in shape.m..x.len() {
        out[j] = &x[ya] * &y[j] - &y[ya] * &x[j];
    }
    out
}

/// Brute-force check: draws random pairs from the kernel of `f` and tests
/// whether their bracket stays in the kernel.
pub fn kernel_is_subalgebra_sampled<R: Rng>(shape: GroupShape, f: &[BigRational], samples: usize, rng: &mut R) -> bool {
    let dim = shape.m + shape.n;
    let basis = linalg::null_space(&[f.to_vec()], dim);
    let draw = |rng: &mut R| -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); dim];
        for v in &basis {
            let c = BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into());
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += &c * vi;
            }
        }
        x
    };
    (0..samples).all(|_| {
        let x = draw(rng);
        let y = draw(rng);
        let z = bracket(shape, &x, &y);
        z.iter().zip(f).fold(BigRational::zero(), |acc, (a, b)| acc + a * b).is_zero()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Slope {
    Finite(Scalar),
    Infinite,
}

/// Slope `l` of the boundary curve `y = l (a_mult - 1)` through `x`.
pub fn boundary_slope(x: &GroupElement) -> Result<Slope, SeparationError> {
    if x.shape() != GroupShape::g1() {
        return Err(SeparationError::NotG1);
    }
    let d = &x.a_mult - &Scalar::one();
    if d.is_zero() {
        if x.b[0].is_zero() {
            return Err(SeparationError::Identity);
        }
        return Ok(Slope::Infinite);
    }
    let l = x.b[0]
        .div_or_demote(&d)
        .expect("nonzero denominator");
    Ok(Slope::Finite(l))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quadrant {
    I,
    II,
    III,
    IV,
    Boundary,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quadrant::I => "I",
            Quadrant::II => "II",
            Quadrant::III => "III",
            Quadrant::IV => "IV",
            Quadrant::Boundary => "boundary",
        };
        f.write_str(s)
    }
}

pub fn quadrant_of(x: &GroupElement) -> Quadrant {
    let right = (&x.a_mult - &Scalar::one()).signum();
    let up = x.b.first().map_or(Ordering::Equal, Scalar::signum);
    match (right, up) {
        (Ordering::Greater, Ordering::Greater) => Quadrant::I,
        (Ordering::Less, Ordering::Greater) => Quadrant::II,
        (Ordering::Less, Ordering::Less) => Quadrant::III,
        (Ordering::Greater, Ordering::Less) => Quadrant::IV,
        _ => Quadrant::Boundary,
    }
}

/// Feasible slope for `sign * (y_s - l (a_s - 1)) >= 0` over all `s`.
fn slope_interval(set: &[GroupElement], sign: i64) -> Option<Scalar> {
    let mut lower: Option<Scalar> = None;
    let mut upper: Option<Scalar> = None;
    let s = Scalar::int(sign);
    for x in set {
        let y = s.mul_or_demote(&x.b[0]);
        let d = s.mul_or_demote(&(&x.a_mult - &Scalar::one()));
        // y >= l d with the sign already folded in
        match d.signum() {
            Ordering::Equal => {
                if y.is_negative() {
                    return None;
                }
            }
            Ordering::Greater => {
                let q = y.div_or_demote(&d).expect("nonzero");
                if upper.as_ref().is_none_or(|u| q.compare(u) == Ordering::Less) {
                    upper = Some(q);
                }
            }
            Ordering::Less => {
                let q = y.div_or_demote(&d).expect("nonzero");
                if lower.as_ref().is_none_or(|l| q.compare(l) == Ordering::Greater) {
                    lower = Some(q);
                }
            }
        }
    }
    match (lower, upper) {
        (Some(l), Some(u)) => (l.compare(&u) != Ordering::Greater).then_some(l),
        (Some(l), None) => Some(l),
        (None, Some(u)) => Some(u),
        (None, None) => Some(Scalar::zero()),
    }
}

/// Independent decision on `G_1` by intersecting slope intervals.
pub fn g1_separation_oracle(set: &[GroupElement]) -> Result<SeparationVerdict, SeparationError> {
    check_shapes(set)?;
    if set.iter().any(|x| x.shape() != GroupShape::g1()) {
        return Err(SeparationError::NotG1);
    }
    let side: Vec<Ordering> = set.iter().map(|x| (&x.a_mult - &Scalar::one()).signum()).collect();
    let separated = |w: Functional| SeparationVerdict {
        separated: true,
        witness: Some(w),
        hull_certificates: None,
        marginal: false,
    };
    if side.iter().all(|s| *s != Ordering::Less) {
        return Ok(separated(Functional::TypeI(vec![Scalar::one()])));
    }
    if side.iter().all(|s| *s != Ordering::Greater) {
        return Ok(separated(Functional::TypeI(vec![Scalar::int(-1)])));
    }
    for sign in [1, -1] {
        if let Some(l) = slope_interval(set, sign) {
            let gamma = vec![Scalar::int(sign)];
            let mu = l.mul_or_demote(&Scalar::int(-sign));
            return Ok(separated(Functional::TypeII { gamma, mu }));
        }
    }
    // nonseparated: attach hull weights for the record
    let verdict = decide_separation(set)?;
    Ok(SeparationVerdict {
        separated: false,
        witness: None,
        hull_certificates: verdict.hull_certificates,
        marginal: verdict.marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Symbol};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g1(a: &str, y: &str) -> GroupElement {
        GroupElement::g1(a.parse().unwrap(), y.parse().unwrap())
    }

    #[test]
    fn small_g1_verdicts() {
        let v = decide_separation(&[g1("2", "0"), g1("3", "1")]).unwrap();
        assert!(v.separated);
        assert_eq!(v.witness, Some(Functional::TypeI(vec![Scalar::one()])));

        let ex32 = [g1("1/3", "0"), g1("2", "2"), g1("2", "-2")];
        let v = decide_separation(&ex32).unwrap();
        assert!(!v.separated && !v.marginal);
        assert!(!g1_separation_oracle(&ex32).unwrap().separated);

        let up = [g1("1/3", "0"), g1("2", "2"), g1("2", "5")];
        let v = decide_separation(&up).unwrap();
        assert!(v.separated);
        let w = v.witness.unwrap();
        assert!(matches!(w, Functional::TypeII { .. }));
        assert!(up.iter().all(|x| w.contains(x)));
    }

    #[test]
    fn example_with_irrational_coordinate() {
        Symbol::intern("sqrt3", 3f64.sqrt()).unwrap();
        let set = [g1("1/2", "0"), g1("2", "sqrt3"), g1("2", "-1"), g1("1", "0")];
        assert!(!decide_separation(&set).unwrap().separated);
        assert!(!g1_separation_oracle(&set).unwrap().separated);
        assert!(g1_separation_oracle(&[g1("2", "2")]).unwrap().separated);
    }

    #[test]
    fn hull_weights_balance() {
        let set = [g1("1/3", "0"), g1("2", "2"), g1("2", "-2")];
        let c = decide_separation(&set).unwrap().hull_certificates.unwrap();
        let s1: f64 = c.type_i.iter().zip(&set).map(|(w, x)| w.evaluate() * x.projection()[0]).sum();
        assert!(s1.abs() < 1e-12);
        assert!(c.type_i.iter().chain(&c.type_ii).all(|w| w.evaluate() >= 1.0 - 1e-12));
        for k in 0..2 {
            let s: BigRational = c
                .type_ii
                .iter()
                .zip(&set)
                .map(|(w, x)| {
                    let p = if k == 0 { x.b[0].clone() } else { &x.a_mult - &Scalar::one() };
                    w.as_rational().unwrap() * p.as_rational().unwrap()
                })
                .sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn slopes_and_quadrants() {
        assert_eq!(boundary_slope(&g1("2", "3")).unwrap(), Slope::Finite(Scalar::int(3)));
        assert_eq!(boundary_slope(&g1("2", "0")).unwrap(), Slope::Finite(Scalar::zero()));
        assert_eq!(boundary_slope(&g1("1", "5")).unwrap(), Slope::Infinite);
        assert_eq!(boundary_slope(&g1("1", "0")), Err(SeparationError::Identity));
        assert_eq!(quadrant_of(&g1("2", "1")), Quadrant::I);
        assert_eq!(quadrant_of(&g1("1/2", "-3")), Quadrant::III);
        assert_eq!(quadrant_of(&g1("1", "7")), Quadrant::Boundary);
    }

    #[test]
    fn subalgebra_classification_matches_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = GroupShape::new(2, 1).unwrap();
        // alpha != 0 and gamma != 0
        let bad = [rat(1, 1), rat(0, 1), rat(1, 1)];
        assert!(!kernel_is_subalgebra(shape, &bad));
        assert!(!kernel_is_subalgebra_sampled(shape, &bad, 50, &mut rng));
        for _ in 0..200 {
            let f: Vec<BigRational> = (0..4)
                .map(|_| if rng.gen_bool(0.4) { rat(0, 1) } else { rat(rng.gen_range(-3..=3), 1) })
                .collect();
            if f.iter().all(Zero::is_zero) {
                continue;
            }
            let shape = GroupShape::new(2, 2).unwrap();
            assert_eq!(
                kernel_is_subalgebra(shape, &f),
                kernel_is_subalgebra_sampled(shape, &f, 40, &mut rng),
                "{f:?}"
            );
        }
    }

    #[test]
    fn higher_shape_uses_lp() {
        let x = |v: &str, a: &str, b: &str| {
            GroupElement::new(vec![v.parse().unwrap()], a.parse().unwrap(), vec![b.parse().unwrap()]).unwrap()
        };
        // projection to R^2 lies in a half-plane v >= 0
        let set = [x("1", "2", "1"), x("0", "1/2", "-1"), x("2", "1/3", "3")];
        let v = decide_separation(&set).unwrap();
        assert!(v.separated);
        let w = v.witness.unwrap();
        assert!(set.iter().all(|p| w.evaluate(p) >= -1e-9));
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(decide_separation(&[]), Err(SeparationError::Empty));
    }
}
