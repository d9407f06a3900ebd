//! Exact arithmetic on Q-combinations of `sqrt(d)` and `ln(p) * sqrt(d)`.
//!
//! Here `d` runs over squarefree integers and `p` over primes. These monomials
//! are Q-linearly independent: square roots of distinct squarefree integers
//! are independent, and logarithms of multiplicatively independent algebraic
//! numbers are linearly independent over the algebraic numbers together with 1
//! (Baker). Products with two logarithms are not representable and panic;
//! callers only form determinants with logarithms confined to one row.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg;
use crate::scalar::{Scalar, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub log: Option<u64>,
    pub rad: BTreeSet<u64>,
}

impl Mono {
    fn unit() -> Self {
        Mono {
            log: None,
            rad: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(BTreeMap<Mono, BigRational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn rational(q: BigRational) -> Self {
        let mut p = Poly::zero();
        p.push(Mono::unit(), q);
        p
    }

    pub fn sqrt_prime(p: u64) -> Self {
        let mut out = Poly::zero();
        out.push(
            Mono {
                log: None,
                rad: [p].into_iter().collect(),
            },
            BigRational::one(),
        );
        out
    }

    pub fn ln_prime(p: u64) -> Self {
        let mut out = Poly::zero();
        out.push(
            Mono {
                log: Some(p),
                rad: BTreeSet::new(),
            },
            BigRational::one(),
        );
        out
    }

    fn push(&mut self, m: Mono, q: BigRational) {
        let e = self.0.entry(m).or_insert_with(BigRational::zero);
        *e += q;
        self.0.retain(|_, v| !v.is_zero());
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Mono> {
        self.0.keys()
    }

    pub fn coeff(&self, m: &Mono) -> BigRational {
        self.0.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, q) in &o.0 {
            out.push(m.clone(), q.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in &self.0 {
            out.push(m.clone(), q * k);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-BigRational::one())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, qa) in &self.0 {
            for (mb, qb) in &o.0 {
                let log = match (ma.log, mb.log) {
                    (Some(_), Some(_)) => panic!("product of two logarithms is outside the certificate algebra"),
                    (l, None) | (None, l) => l,
                };
                // sqrt(a) sqrt(b) = sqrt(a b / g^2) * g with g = gcd as sets of primes
                let common: BTreeSet<u64> = ma.rad.intersection(&mb.rad).copied().collect();
                let rad: BTreeSet<u64> = ma.rad.symmetric_difference(&mb.rad).copied().collect();
                let factor = common.iter().fold(BigInt::one(), |acc, p| acc * BigInt::from(*p));
                out.push(Mono { log, rad }, qa * qb * BigRational::from_integer(factor));
            }
        }
        out
    }

    pub fn evaluate(&self) -> f64 {
        self.0
            .iter()
            .map(|(m, q)| {
                let r: f64 = m.rad.iter().map(|p| *p as f64).product::<f64>().sqrt();
                let l = m.log.map_or(1.0, |p| (p as f64).ln());
                q.to_f64().unwrap_or(f64::NAN) * r * l
            })
            .sum()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .map(|(m, q)| {
                let mut parts = vec![q.to_string()];
                if let Some(p) = m.log {
                    parts.push(format!("ln{p}"));
                }
                if !m.rad.is_empty() {
                    let d = m.rad.iter().product::<u64>();
                    parts.push(format!("sqrt{d}"));
                }
                parts.join("*")
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// `p` if the symbol is the square root of a prime `p` minted by
/// [`Symbol::sqrt_prime`].
pub fn sqrt_prime_of(sym: Symbol) -> Option<u64> {
    let label = sym.label();
    let p: u64 = label.strip_prefix("sqrt")?.parse().ok()?;
    let prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
    (prime && (sym.approx() - (p as f64).sqrt()).abs() < 1e-12).then_some(p)
}

/// Embeds an exact scalar whose symbols are all square roots of primes.
pub fn from_scalar(x: &Scalar) -> Option<Poly> {
    let span = x.span()?;
    let mut out = Poly::zero();
    for (sym, q) in span.terms() {
        if *sym == Symbol::ONE {
            out.push(Mono::unit(), q.clone());
        } else {
            let p = sqrt_prime_of(*sym)?;
            out = out.add(&Poly::sqrt_prime(p).scale(q));
        }
    }
    Some(out)
}

/// Prime factorization of a positive integer by trial division; `None` when
/// the number is too large to factor this way.
pub fn factor(n: &BigInt) -> Option<BTreeMap<u64, i64>> {
    let mut n = n.abs().to_u128()?;
    if n > (1u128 << 100) {
        return None;
    }
    let mut out = BTreeMap::new();
    let mut d: u128 = 2;
    while d * d <= n {
        while n % d == 0 {
            *out.entry(d as u64).or_insert(0) += 1;
            n /= d;
        }
        d += if d == 2 { 1 } else { 2 };
        if d > 50_000_000 {
            return None;
        }
    }
    if n > 1 {
        *out.entry(u64::try_from(n).ok()?).or_insert(0) += 1;
    }
    Some(out)
}

/// Exponent vector of a positive rational over the primes.
pub fn prime_exponents(q: &BigRational) -> Option<BTreeMap<u64, i64>> {
    if !q.is_positive() {
        return None;
    }
    let mut out = factor(q.numer())?;
    for (p, e) in factor(q.denom())? {
        *out.entry(p).or_insert(0) -= e;
    }
    out.retain(|_, e| *e != 0);
    Some(out)
}

/// `ln q` for a positive rational as a combination of `ln p`.
pub fn ln_rational(q: &BigRational) -> Option<Poly> {
    let ex = prime_exponents(q)?;
    Some(ex.into_iter().fold(Poly::zero(), |acc, (p, e)| {
        acc.add(&Poly::ln_prime(p).scale(&BigRational::from_integer(e.into())))
    }))
}

/// Determinant by cofactor expansion along the first column.
pub fn det(m: &[Vec<Poly>]) -> Poly {
    match m.len() {
        0 => Poly::rational(BigRational::one()),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Poly::zero();
            for r in 0..n {
                if m[r][0].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = (0..n)
                    .filter(|&i| i != r)
                    .map(|i| m[i][1..].to_vec())
                    .collect();
                let term = m[r][0].mul(&det(&minor));
                acc = if r % 2 == 0 { acc.add(&term) } else { acc.add(&term.neg()) };
            }
            acc
        }
    }
}

/// Q-linear independence of the given values, optionally together with 1.
pub fn independent(values: &[Poly], include_unit: bool) -> bool {
    let mut all: Vec<Poly> = Vec::new();
    if include_unit {
        all.push(Poly::rational(BigRational::one()));
    }
    all.extend(values.iter().cloned());
    let monos: BTreeSet<Mono> = all.iter().flat_map(|p| p.monomials().cloned()).collect();
    let rows: Vec<Vec<BigRational>> = all
        .iter()
        .map(|p| monos.iter().map(|m| p.coeff(m)).collect())
        .collect();
    if monos.is_empty() {
        return all.is_empty();
    }
    linalg::rank(&rows) == all.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn radicals_multiply() {
        let s2 = Poly::sqrt_prime(2);
        let s3 = Poly::sqrt_prime(3);
        assert_eq!(s2.mul(&s2), Poly::rational(rat(2, 1)));
        let s6 = s2.mul(&s3);
        assert!((s6.evaluate() - 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn logs_of_rationals() {
        let l = ln_rational(&rat(12, 5)).unwrap();
        assert!((l.evaluate() - 2.4f64.ln()).abs() < 1e-14);
        assert!(ln_rational(&rat(1, 1)).unwrap().is_zero());
        assert!(!independent(&[ln_rational(&rat(2, 1)).unwrap(), ln_rational(&rat(1, 4)).unwrap()], false));
        assert!(independent(&[ln_rational(&rat(2, 1)).unwrap(), ln_rational(&rat(3, 1)).unwrap()], true));
    }

    #[test]
    fn determinant_matches_float() {
        let m = vec![
            vec![Poly::rational(rat(1, 1)), Poly::sqrt_prime(2)],
            vec![ln_rational(&rat(3, 1)).unwrap(), ln_rational(&rat(1, 2)).unwrap()],
        ];
        let d = det(&m);
        let want = (0.5f64).ln() - 2f64.sqrt() * 3f64.ln();
        assert!((d.evaluate() - want).abs() < 1e-14);
    }

    #[test]
    fn factorization() {
        let f = factor(&BigInt::from(360)).unwrap();
        assert_eq!(f, [(2, 3), (3, 2), (5, 1)].into_iter().collect());
        assert_eq!(prime_exponents(&rat(4, 9)).unwrap(), [(2, 2), (3, -2)].into_iter().collect());
    }
}
