//! Elements of `H_mn = R^(m-1) x G_n` in the multiplicative model.
//!
//! A point is `(v, a_mult, b)` with `v` in `R^(m-1)`, `a_mult > 0` and `b` in
//! `R^n`; the product is `(v + v', a_mult * a_mult', b + a_mult * b')`.

use std::fmt;

use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::scalar::{Scalar, ScalarError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("shape must have m >= 1 and n >= 1, got ({m}, {n})")]
    InvalidShape { m: usize, n: usize },
    #[error("element does not match shape ({m}, {n})")]
    ShapeMismatch { m: usize, n: usize },
    #[error("a_mult must be strictly positive, got {0}")]
    NonPositive(String),
    #[error("phi is zero: the product is direct and has no normalized model")]
    DegeneratePhi,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupShape {
    pub m: usize,
    pub n: usize,
}

impl GroupShape {
    pub fn new(m: usize, n: usize) -> Result<Self, GroupError> {
        if m == 0 || n == 0 {
            return Err(GroupError::InvalidShape { m, n });
        }
        Ok(GroupShape { m, n })
    }

    pub fn g1() -> Self {
        GroupShape { m: 1, n: 1 }
    }
}

/// How the first `G_n` coordinate is written in input and in examples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Model {
    Additive,
    #[default]
    Multiplicative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub v: Vec<Scalar>,
    pub a_mult: Scalar,
    pub b: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub v: Vec<Scalar>,
    pub a: Scalar,
    pub b: Vec<Scalar>,
}

/// `(e^a - 1) / a`, with the removable singularity at 0 filled by a series.
pub fn expm1_ratio(a: f64) -> f64 {
    if a.abs() < 1e-4 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 2..=7 {
            term *= a / k as f64;
            sum += term;
        }
        sum
    } else {
        a.exp_m1() / a
    }
}

fn scale_all(xs: &[Scalar], k: &Scalar) -> Result<Vec<Scalar>, ScalarError> {
    xs.iter().map(|x| k.mul(x)).collect()
}

fn scale_or_demote(xs: &[Scalar], k: &Scalar) -> Vec<Scalar> {
    xs.iter().map(|x| k.mul_or_demote(x)).collect()
}

impl GroupElement {
    pub fn new(v: Vec<Scalar>, a_mult: Scalar, b: Vec<Scalar>) -> Result<Self, GroupError> {
        if !a_mult.is_positive() {
            return Err(GroupError::NonPositive(a_mult.to_string()));
        }
        Ok(GroupElement { v, a_mult, b })
    }

    /// `G_1` element `(a_mult, y)`.
    pub fn g1(a_mult: Scalar, y: Scalar) -> Self {
        GroupElement {
            v: Vec::new(),
            a_mult,
            b: vec![y],
        }
    }

    /// Element given with the additive coordinate `a`; `a_mult = e^a` is a
    /// binary64 value unless `a` is exactly zero.
    pub fn from_additive(v: Vec<Scalar>, a: &Scalar, b: Vec<Scalar>) -> Self {
        let a_mult = if a.is_zero() && a.is_exact() {
            Scalar::one()
        } else {
            Scalar::Float(a.evaluate().exp())
        };
        GroupElement { v, a_mult, b }
    }

    pub fn identity(shape: GroupShape) -> Self {
        GroupElement {
            v: vec![Scalar::zero(); shape.m - 1],
            a_mult: Scalar::one(),
            b: vec![Scalar::zero(); shape.n],
        }
    }

    pub fn shape(&self) -> GroupShape {
        GroupShape {
            m: self.v.len() + 1,
            n: self.b.len(),
        }
    }

    pub fn check_shape(&self, shape: GroupShape) -> Result<(), GroupError> {
        if self.shape() != shape {
            return Err(GroupError::ShapeMismatch { m: shape.m, n: shape.n });
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.a_mult.is_one() && self.v.iter().chain(&self.b).all(Scalar::is_zero)
    }

    pub fn is_exact(&self) -> bool {
        self.v.iter().chain(&self.b).chain(std::iter::once(&self.a_mult)).all(Scalar::is_exact)
    }

    pub fn product(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        other.check_shape(self.shape())?;
        let v = self.v.iter().zip(&other.v).map(|(x, y)| x + y).collect();
        let a_mult = self.a_mult.mul(&other.a_mult)?;
        let shifted = scale_all(&other.b, &self.a_mult)?;
        let b = self.b.iter().zip(&shifted).map(|(x, y)| x + y).collect();
        Ok(GroupElement { v, a_mult, b })
    }

    /// Product that falls back to binary64 coordinates instead of failing.
    pub fn product_or_demote(&self, other: &GroupElement) -> GroupElement {
        let v = self.v.iter().zip(&other.v).map(|(x, y)| x + y).collect();
        let a_mult = self.a_mult.mul_or_demote(&other.a_mult);
        let shifted = scale_or_demote(&other.b, &self.a_mult);
        let b = self.b.iter().zip(&shifted).map(|(x, y)| x + y).collect();
        GroupElement { v, a_mult, b }
    }

    /// `(-v, 1/a_mult, -b/a_mult)`. Coordinates that cannot stay in the
    /// exact span are demoted.
    pub fn inverse(&self) -> GroupElement {
        let inv = Scalar::one()
            .div(&self.a_mult)
            .unwrap_or_else(|_| Scalar::Float(1.0 / self.a_mult.evaluate()));
        let b = self
            .b
            .iter()
            .map(|y| {
                y.div(&self.a_mult)
                    .unwrap_or_else(|_| Scalar::Float(y.evaluate() / self.a_mult.evaluate()))
                    .neg()
            })
            .collect();
        GroupElement {
            v: self.v.iter().map(Scalar::neg).collect(),
            a_mult: inv,
            b,
        }
    }

    /// Closed-form integer power `(t v, a^t, b (1 - a^t) / (1 - a))`.
    pub fn power(&self, t: i64) -> GroupElement {
        if t == 0 {
            return GroupElement::identity(self.shape());
        }
        if t == 1 {
            return self.clone();
        }
        let tq = BigRational::from_integer(t.into());
        let v = self.v.iter().map(|x| x.mul_rational(&tq)).collect();
        if let Some(a) = self.a_mult.as_rational() {
            let at = num_traits::pow::Pow::pow(&a, t.unsigned_abs() as u32);
            let at = if t < 0 { at.recip() } else { at };
            let frac = if a.is_one() {
                tq
            } else {
                (BigRational::one() - &at) / (BigRational::one() - &a)
            };
            let b = self.b.iter().map(|y| y.mul_rational(&frac)).collect();
            return GroupElement {
                v,
                a_mult: Scalar::rational(at),
                b,
            };
        }
        let la = self.a_mult.evaluate().ln();
        let tf = t as f64;
        let frac = if la == 0.0 {
            tf
        } else {
            tf * expm1_ratio(tf * la) / expm1_ratio(la)
        };
        let b = self.b.iter().map(|y| Scalar::Float(y.evaluate() * frac)).collect();
        GroupElement {
            v,
            a_mult: Scalar::Float((tf * la).exp()),
            b,
        }
    }

    /// `t`-fold product by repeated multiplication, used to check [`power`](Self::power).
    pub fn iterated(&self, t: i64) -> Result<GroupElement, GroupError> {
        let base = if t < 0 { self.inverse() } else { self.clone() };
        let mut acc = GroupElement::identity(self.shape());
        for _ in 0..t.unsigned_abs() {
            acc = acc.product(&base)?;
        }
        Ok(acc)
    }

    pub fn log(&self) -> AlgebraElement {
        if self.a_mult.is_one() && self.a_mult.is_exact() {
            return AlgebraElement {
                v: self.v.clone(),
                a: Scalar::zero(),
                b: self.b.clone(),
            };
        }
        let x = self.a_mult.evaluate();
        // ln_1p keeps full accuracy when a_mult sits next to 1
        let a = (x - 1.0).ln_1p();
        let k = 1.0 / expm1_ratio(a);
        AlgebraElement {
            v: self.v.clone(),
            a: Scalar::Float(a),
            b: self.b.iter().map(|y| Scalar::Float(y.evaluate() * k)).collect(),
        }
    }

    /// Coordinates as binary64: `(v, a_mult, b)`.
    pub fn evaluate(&self) -> (Vec<f64>, f64, Vec<f64>) {
        (
            self.v.iter().map(Scalar::evaluate).collect(),
            self.a_mult.evaluate(),
            self.b.iter().map(Scalar::evaluate).collect(),
        )
    }

    pub fn flat(&self) -> Vec<f64> {
        let (v, a, b) = self.evaluate();
        v.into_iter().chain(std::iter::once(a)).chain(b).collect()
    }

    /// Max-abs distance over all coordinates of the multiplicative model.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        self.flat()
            .iter()
            .zip(other.flat())
            .fold(0.0, |acc, (x, y)| f64::max(acc, (x - y).abs()))
    }

    /// Projection to `R^m` in additive coordinates `(v, ln a_mult)`.
    pub fn projection(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.v.iter().map(Scalar::evaluate).collect();
        p.push(self.a_mult.evaluate().ln());
        p
    }
}

impl AlgebraElement {
    pub fn exp(&self) -> GroupElement {
        if self.a.is_zero() && self.a.is_exact() {
            return GroupElement {
                v: self.v.clone(),
                a_mult: Scalar::one(),
                b: self.b.clone(),
            };
        }
        let a = self.a.evaluate();
        let k = expm1_ratio(a);
        GroupElement {
            v: self.v.clone(),
            a_mult: Scalar::Float(a.exp()),
            b: self.b.iter().map(|y| Scalar::Float(y.evaluate() * k)).collect(),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.v
            .iter()
            .chain(std::iter::once(&self.a))
            .chain(&self.b)
            .map(Scalar::evaluate)
            .collect()
    }
}

fn fmt_vec(f: &mut fmt::Formatter<'_>, xs: &[Scalar]) -> fmt::Result {
    write!(f, "[")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "]")
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        if !self.v.is_empty() {
            fmt_vec(f, &self.v)?;
            write!(f, "; ")?;
        }
        write!(f, "{}; ", self.a_mult)?;
        fmt_vec(f, &self.b)?;
        write!(f, ")")
    }
}

/// Element of `R^m x R^n` with additive first coordinate, multiplied as
/// `(w + w', b + e^(phi . w) b')`. Used for the additive model of `G_1` and
/// the raw semidirect presentation.
#[derive(Clone, Debug, PartialEq)]
pub struct RawElement {
    pub w: Vec<Scalar>,
    pub b: Vec<Scalar>,
}

/// Change of coordinates from the raw presentation `R^m x_phi R^n` to the
/// normalized `(v, a, b)` model.
///
/// With `p` the first index where `phi` is nonzero, `a = phi . w` and `v` is
/// `w` with coordinate `p` removed. The `v` coordinates are the coefficients
/// on the kernel basis `e_j - (phi_j / phi_p) e_p`, `j != p`.
#[derive(Clone, Debug)]
pub struct StructureIsomorphism {
    pub m: usize,
    pub n: usize,
    pub phi: Vec<Scalar>,
    pivot: usize,
}

pub fn structure_isomorphism(m: usize, n: usize, phi: Vec<Scalar>) -> Result<StructureIsomorphism, GroupError> {
    GroupShape::new(m, n)?;
    if phi.len() != m {
        return Err(GroupError::ShapeMismatch { m, n });
    }
    let pivot = phi.iter().position(|x| !x.is_zero()).ok_or(GroupError::DegeneratePhi)?;
    Ok(StructureIsomorphism { m, n, phi, pivot })
}

impl StructureIsomorphism {
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    fn phi_of(&self, w: &[Scalar]) -> Scalar {
        w.iter()
            .zip(&self.phi)
            .fold(Scalar::zero(), |acc, (x, p)| &acc + &p.mul_or_demote(x))
    }

    pub fn raw_product(&self, x: &RawElement, y: &RawElement) -> RawElement {
        let s = self.phi_of(&x.w);
        let k = if s.is_zero() && s.is_exact() {
            Scalar::one()
        } else {
            Scalar::Float(s.evaluate().exp())
        };
        RawElement {
            w: x.w.iter().zip(&y.w).map(|(p, q)| p + q).collect(),
            b: x.b.iter().zip(&y.b).map(|(p, q)| p + &k.mul_or_demote(q)).collect(),
        }
    }

    /// Additive normalized coordinates `(v, a, b)`.
    pub fn forward(&self, x: &RawElement) -> AlgebraElement {
        let v = x
            .w
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.pivot)
            .map(|(_, s)| s.clone())
            .collect();
        AlgebraElement {
            v,
            a: self.phi_of(&x.w),
            b: x.b.clone(),
        }
    }

    /// Same point as a group element of the multiplicative model.
    pub fn to_group(&self, x: &RawElement) -> GroupElement {
        let n = self.forward(x);
        GroupElement::from_additive(n.v, &n.a, n.b)
    }

    pub fn backward(&self, x: &AlgebraElement) -> Result<RawElement, GroupError> {
        let mut rest = x.a.clone();
        let mut w = Vec::with_capacity(self.m);
        let mut vs = x.v.iter();
        for j in 0..self.m {
            if j == self.pivot {
                w.push(Scalar::zero());
            } else {
                let s = vs.next().ok_or(GroupError::ShapeMismatch { m: self.m, n: self.n })?;
                rest = &rest - &self.phi[j].mul_or_demote(s);
                w.push(s.clone());
            }
        }
        w[self.pivot] = rest.div_or_demote(&self.phi[self.pivot])?;
        Ok(RawElement { w, b: x.b.clone() })
    }
}

/// Product in the additive model of `H_mn`.
pub fn additive_product(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    let k = if x.a.is_zero() && x.a.is_exact() {
        Scalar::one()
    } else {
        Scalar::Float(x.a.evaluate().exp())
    };
    AlgebraElement {
        v: x.v.iter().zip(&y.v).map(|(p, q)| p + q).collect(),
        a: &x.a + &y.a,
        b: x.b.iter().zip(&y.b).map(|(p, q)| p + &k.mul_or_demote(q)).collect(),
    }
}
