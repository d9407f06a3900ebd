//! Scalars over a fixed rational span of declared irrationals.
//!
//! An exact scalar is a finite Q-linear combination of interned symbols,
//! where the distinguished symbol [`Symbol::ONE`] stands for the rational unit.
//! Every other symbol carries a binary64 approximation and the caller asserts
//! that the declared symbols are Q-linearly independent together with `one`.
//! Exact products leave the span as soon as both operands are irrational; that
//! case is an error rather than a silent conversion, see [`Scalar::demote`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("product leaves the rational span of the declared symbols")]
    LeavesSpan,
    #[error("division by zero")]
    DivisionByZero,
    #[error("symbol `{label}` already declared with approximation {existing}, not {requested}")]
    SymbolMismatch {
        label: String,
        existing: f64,
        requested: f64,
    },
    #[error("symbol `{0}` is reserved")]
    ReservedSymbol(String),
    #[error("symbol approximation for `{0}` must be finite and nonzero")]
    BadApproximation(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("cannot parse scalar `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error("float scalar where an exact value is required")]
    FloatInput,
    #[error("non-finite float")]
    NonFinite,
}

/// An interned irrational constant. `Symbol::ONE` is the rational unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u32);

struct Registry {
    labels: Vec<String>,
    approx: Vec<f64>,
    index: HashMap<String, u32>,
}

fn registry() -> &'static RwLock<Registry> {
    static REG: OnceLock<RwLock<Registry>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut index = HashMap::new();
        index.insert("one".to_string(), 0);
        RwLock::new(Registry {
            labels: vec!["one".to_string()],
            approx: vec![1.0],
            index,
        })
    })
}

impl Symbol {
    pub const ONE: Symbol = Symbol(0);

    /// Declares (or re-declares identically) a symbol.
    pub fn intern(label: &str, approx: f64) -> Result<Symbol, ScalarError> {
        if label == "one" {
            return Err(ScalarError::ReservedSymbol(label.to_string()));
        }
        if !is_identifier(label) {
            return Err(ScalarError::Parse {
                text: label.to_string(),
                reason: "symbol labels must be identifiers".into(),
            });
        }
        if !approx.is_finite() || approx == 0.0 {
            return Err(ScalarError::BadApproximation(label.to_string()));
        }
        {
            let reg = registry().read().expect("symbol registry poisoned");
            if let Some(&id) = reg.index.get(label) {
                return check_same(label, reg.approx[id as usize], approx).map(|_| Symbol(id));
            }
        }
        let mut reg = registry().write().expect("symbol registry poisoned");
        if let Some(&id) = reg.index.get(label) {
            return check_same(label, reg.approx[id as usize], approx).map(|_| Symbol(id));
        }
        let id = reg.labels.len() as u32;
        reg.labels.push(label.to_string());
        reg.approx.push(approx);
        reg.index.insert(label.to_string(), id);
        Ok(Symbol(id))
    }

    pub fn lookup(label: &str) -> Option<Symbol> {
        let reg = registry().read().expect("symbol registry poisoned");
        reg.index.get(label).map(|&id| Symbol(id))
    }

    pub fn label(self) -> String {
        registry().read().expect("symbol registry poisoned").labels[self.0 as usize].clone()
    }

    pub fn approx(self) -> f64 {
        registry().read().expect("symbol registry poisoned").approx[self.0 as usize]
    }

    /// `sqrt2`, `sqrt3`, `sqrt5`, ... : square roots of primes.
    pub fn sqrt_prime(p: u64) -> Symbol {
        Symbol::intern(&format!("sqrt{p}"), (p as f64).sqrt())
            .expect("sqrt<p> labels are reserved for square roots of primes")
    }
}

fn check_same(label: &str, existing: f64, requested: f64) -> Result<(), ScalarError> {
    if (existing - requested).abs() <= 1e-15 * existing.abs().max(1.0) {
        Ok(())
    } else {
        Err(ScalarError::SymbolMismatch {
            label: label.to_string(),
            existing,
            requested,
        })
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The first primes, used to mint fresh symbols.
pub(crate) fn primes() -> impl Iterator<Item = u64> {
    (2u64..).filter(|&k| (2..).take_while(|d| d * d <= k).all(|d| k % d != 0))
}

/// `count` square-root-of-prime symbols that do not occur in `used`.
pub fn fresh_symbols(count: usize, used: &BTreeSet<Symbol>) -> Vec<Symbol> {
    primes()
        .map(Symbol::sqrt_prime)
        .filter(|s| !used.contains(s))
        .take(count)
        .collect()
}

/// A declared list of symbols, as found at the top of an input document.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolTable {
    entries: Vec<(String, f64)>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: &str, approx: f64) -> Result<Symbol, ScalarError> {
        if self.entries.iter().any(|(l, _)| l == label) {
            return Err(ScalarError::Parse {
                text: label.to_string(),
                reason: "duplicate symbol label".into(),
            });
        }
        let sym = Symbol::intern(label, approx)?;
        self.entries.push((label.to_string(), approx));
        Ok(sym)
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.iter().any(|(l, _)| l == label)
    }
}

/// A finite Q-linear combination of symbols with no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span(BTreeMap<Symbol, BigRational>);

impl Span {
    pub fn zero() -> Self {
        Span(BTreeMap::new())
    }

    pub fn rational(q: BigRational) -> Self {
        Span::term(Symbol::ONE, q)
    }

    pub fn term(sym: Symbol, q: BigRational) -> Self {
        let mut map = BTreeMap::new();
        if !q.is_zero() {
            map.insert(sym, q);
        }
        Span(map)
    }

    pub fn coeff(&self, sym: Symbol) -> BigRational {
        self.0.get(&sym).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Symbol, &BigRational)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => self.0.get(&Symbol::ONE).cloned(),
            _ => None,
        }
    }

    fn add_assign(&mut self, other: &Span, sign: i32) {
        for (sym, q) in &other.0 {
            let entry = self.0.entry(*sym).or_insert_with(BigRational::zero);
            if sign >= 0 {
                *entry += q;
            } else {
                *entry -= q;
            }
            if entry.is_zero() {
                self.0.remove(sym);
            }
        }
    }

    fn scale(&self, q: &BigRational) -> Span {
        if q.is_zero() {
            return Span::zero();
        }
        Span(self.0.iter().map(|(s, c)| (*s, c * q)).collect())
    }

    pub fn evaluate(&self) -> f64 {
        self.0
            .iter()
            .map(|(s, q)| q.to_f64().unwrap_or(f64::NAN) * s.approx())
            .sum()
    }

    /// `Some(q)` when `self = q * other` for a rational `q`.
    fn ratio_to(&self, other: &Span) -> Option<BigRational> {
        let (sym, c) = other.0.iter().next()?;
        let q = self.coeff(*sym) / c;
        (other.scale(&q) == *self).then_some(q)
    }
}

/// A real number: an exact span element or a binary64 fallback.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Span),
    Float(f64),
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => a == b,
            _ => false,
        }
    }
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Span::zero())
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn int(k: i64) -> Self {
        Scalar::Exact(Span::rational(BigRational::from_integer(k.into())))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(Span::rational(rat(p, q)))
    }

    pub fn rational(q: BigRational) -> Self {
        Scalar::Exact(Span::rational(q))
    }

    pub fn symbol(sym: Symbol) -> Self {
        Scalar::Exact(Span::term(sym, BigRational::one()))
    }

    pub fn term(q: BigRational, sym: Symbol) -> Self {
        Scalar::Exact(Span::term(sym, q))
    }

    /// Float scalar; non-finite values are rejected.
    pub fn float(x: f64) -> Result<Self, ScalarError> {
        if x.is_finite() {
            Ok(Scalar::Float(x))
        } else {
            Err(ScalarError::NonFinite)
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn span(&self) -> Option<&Span> {
        match self {
            Scalar::Exact(s) => Some(s),
            Scalar::Float(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.span().and_then(Span::as_rational)
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(s) => s.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    pub fn evaluate(&self) -> f64 {
        match self {
            Scalar::Exact(s) => s.evaluate(),
            Scalar::Float(x) => *x,
        }
    }

    /// Explicit conversion to the binary64 fallback.
    pub fn demote(&self) -> Scalar {
        Scalar::Float(self.evaluate())
    }

    /// Sign of the value. Exact for rationals; irrational spans are signed by
    /// their approximation.
    pub fn signum(&self) -> Ordering {
        match self.as_rational() {
            Some(q) => q.cmp(&BigRational::zero()),
            None => self.evaluate().partial_cmp(&0.0).unwrap_or(Ordering::Equal),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    /// Compares two scalars through their difference.
    pub fn compare(&self, other: &Scalar) -> Ordering {
        (self - other).signum()
    }

    pub fn coeff(&self, sym: Symbol) -> Option<BigRational> {
        self.span().map(|s| s.coeff(sym))
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        match self {
            Scalar::Exact(s) => s.0.keys().copied().filter(|s| *s != Symbol::ONE).collect(),
            Scalar::Float(_) => BTreeSet::new(),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let mut out = a.clone();
                out.add_assign(b, 1);
                Scalar::Exact(out)
            }
            _ => Scalar::Float(self.evaluate() + other.evaluate()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let mut out = a.clone();
                out.add_assign(b, -1);
                Scalar::Exact(out)
            }
            _ => Scalar::Float(self.evaluate() - other.evaluate()),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.scale(&-BigRational::one())),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if let Some(q) = a.as_rational() {
                    Ok(Scalar::Exact(b.scale(&q)))
                } else if let Some(q) = b.as_rational() {
                    Ok(Scalar::Exact(a.scale(&q)))
                } else {
                    Err(ScalarError::LeavesSpan)
                }
            }
            _ => Ok(Scalar::Float(self.evaluate() * other.evaluate())),
        }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.scale(q)),
            Scalar::Float(x) => Scalar::Float(x * q.to_f64().unwrap_or(f64::NAN)),
        }
    }

    /// Quotient. Exact when the divisor is rational or the two spans are
    /// proportional.
    pub fn div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if let Some(q) = b.as_rational() {
                    Ok(Scalar::Exact(a.scale(&q.recip())))
                } else if a.is_zero() {
                    Ok(Scalar::zero())
                } else if let Some(q) = a.ratio_to(b) {
                    Ok(Scalar::rational(q))
                } else {
                    Err(ScalarError::LeavesSpan)
                }
            }
            _ => Ok(Scalar::Float(self.evaluate() / other.evaluate())),
        }
    }

    /// `self * other`, falling back to binary64 when the exact product leaves the span.
    pub fn mul_or_demote(&self, other: &Scalar) -> Scalar {
        self.mul(other)
            .unwrap_or_else(|_| Scalar::Float(self.evaluate() * other.evaluate()))
    }

    pub fn div_or_demote(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        match self.div(other) {
            Err(ScalarError::LeavesSpan) => Ok(Scalar::Float(self.evaluate() / other.evaluate())),
            r => r,
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Integer power; exact only for rational bases.
    pub fn powi(&self, t: i64) -> Result<Scalar, ScalarError> {
        if let Some(q) = self.as_rational() {
            if q.is_zero() && t < 0 {
                return Err(ScalarError::DivisionByZero);
            }
            let p = num_traits::pow::Pow::pow(&q, t.unsigned_abs() as u32);
            return Ok(Scalar::rational(if t < 0 { p.recip() } else { p }));
        }
        match (self, t) {
            (_, 0) => Ok(Scalar::one()),
            (_, 1) => Ok(self.clone()),
            (Scalar::Exact(_), _) => Err(ScalarError::LeavesSpan),
            (Scalar::Float(x), _) => Ok(Scalar::Float(x.powi(t as i32))),
        }
    }
}

impl From<i64> for Scalar {
    fn from(k: i64) -> Self {
        Scalar::int(k)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::rational(q)
    }
}

impl std::ops::Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::add(self, rhs)
    }
}

impl std::ops::Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::sub(self, rhs)
    }
}

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let span = match self {
            Scalar::Float(x) => return write!(f, "float:{x:?}"),
            Scalar::Exact(s) => s,
        };
        if span.is_zero() {
            return write!(f, "0");
        }
        for (i, (sym, q)) in span.terms().enumerate() {
            let negative = q.is_negative();
            let mag = q.abs();
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if *sym == Symbol::ONE {
                write!(f, "{}", fmt_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", sym.label())?;
            } else {
                write!(f, "{}*{}", fmt_rational(&mag), sym.label())?;
            }
        }
        Ok(())
    }
}

/// Exact rational from a decimal or `p/q` literal.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_decimal(p)?;
        let q = parse_decimal(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(10.into());
    let factor = num_traits::pow::Pow::pow(&ten, scale.unsigned_abs());
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(if neg { -value } else { value })
}

impl FromStr for Scalar {
    type Err = ScalarError;

    /// Accepts `p/q`, decimals, `2*sqrt3`, `1/2 - sqrt2/3`-style sums and `float:1.25`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ScalarError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        if let Some(rest) = trimmed.strip_prefix("float:") {
            let x: f64 = rest.trim().parse().map_err(|_| err("bad float literal"))?;
            return Scalar::float(x);
        }
        if trimmed.is_empty() {
            return Err(err("empty"));
        }
        let mut span = Span::zero();
        for (sign, term) in split_terms(trimmed).ok_or_else(|| err("malformed sum"))? {
            let (coeff, sym) = parse_term(term).map_err(|e| match e {
                ScalarError::UndeclaredSymbol(_) => e,
                _ => err("malformed term"),
            })?;
            let coeff = if sign < 0 { -coeff } else { coeff };
            span.add_assign(&Span::term(sym, coeff), 1);
        }
        Ok(Scalar::Exact(span))
    }
}

fn split_terms(text: &str) -> Option<Vec<(i32, &str)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut sign = 1;
    let mut start = 0;
    let mut i = 0;
    // a leading sign belongs to the first term
    while i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+' || bytes[i] == b' ') {
        if bytes[i] == b'-' {
            sign = -sign;
        }
        i += 1;
        start = i;
    }
    while i < bytes.len() {
        let c = bytes[i];
        let exponent_sign = i > 0 && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E') && {
            // `1e-3` but not `sqrt2e - 1`: the e must follow a digit run
            let head = &text[start..i - 1];
            !head.is_empty() && head.trim().chars().all(|c| c.is_ascii_digit() || c == '.')
        };
        if (c == b'+' || c == b'-') && !exponent_sign {
            let term = text[start..i].trim();
            if term.is_empty() {
                return None;
            }
            out.push((sign, term));
            sign = if c == b'-' { -1 } else { 1 };
            start = i + 1;
        }
        i += 1;
    }
    let term = text[start..].trim();
    if term.is_empty() {
        return None;
    }
    out.push((sign, term));
    Some(out)
}

fn parse_term(term: &str) -> Result<(BigRational, Symbol), ScalarError> {
    let bad = || ScalarError::Parse {
        text: term.to_string(),
        reason: "malformed term".into(),
    };
    let resolve = |label: &str| -> Result<Symbol, ScalarError> {
        if label == "one" {
            return Ok(Symbol::ONE);
        }
        Symbol::lookup(label).ok_or_else(|| ScalarError::UndeclaredSymbol(label.to_string()))
    };
    let parts: Vec<&str> = term.split('*').map(str::trim).collect();
    match parts.as_slice() {
        [single] => {
            if let Some(q) = parse_rational(single) {
                return Ok((q, Symbol::ONE));
            }
            // `sqrt2/3`
            let (label, denom) = match single.split_once('/') {
                Some((l, d)) => (l.trim(), parse_rational(d).ok_or_else(bad)?),
                None => (*single, BigRational::one()),
            };
            if !is_identifier(label) || denom.is_zero() {
                return Err(bad());
            }
            Ok((denom.recip(), resolve(label)?))
        }
        [coeff, rest] => {
            let q = parse_rational(coeff).ok_or_else(bad)?;
            let (label, denom) = match rest.split_once('/') {
                Some((l, d)) => (l.trim(), parse_rational(d).ok_or_else(bad)?),
                None => (*rest, BigRational::one()),
            };
            if !is_identifier(label) || denom.is_zero() {
                return Err(bad());
            }
            Ok((q / denom, resolve(label)?))
        }
        _ => Err(bad()),
    }
}

/// Exact rational closest to `x` among fractions with denominator `10^digits`.
pub fn rationalize(x: f64, digits: u32) -> BigRational {
    let scale = 10f64.powi(digits as i32);
    let numer = BigInt::from_f64((x * scale).round()).unwrap_or_default();
    BigRational::new(numer, num_traits::pow::Pow::pow(BigInt::from(10), digits))
}

/// Z-linear independence of `{1 (optional), values...}` by exact rank over
/// the symbol basis. For finitely many reals Z- and Q-independence coincide.
pub fn z_linearly_independent(values: &[Scalar], include_unit: bool) -> Result<bool, ScalarError> {
    let spans: Vec<&Span> = values
        .iter()
        .map(|v| v.span().ok_or(ScalarError::FloatInput))
        .collect::<Result<_, _>>()?;
    let mut basis: BTreeSet<Symbol> = spans.iter().flat_map(|s| s.0.keys().copied()).collect();
    basis.insert(Symbol::ONE);
    let basis: Vec<Symbol> = basis.into_iter().collect();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    if include_unit {
        rows.push(Span::rational(BigRational::one()).coefficients(&basis));
    }
    rows.extend(spans.iter().map(|s| s.coefficients(&basis)));
    Ok(linalg::rank(&rows) == rows.len())
}

impl Span {
    pub fn coefficients(&self, basis: &[Symbol]) -> Vec<BigRational> {
        basis.iter().map(|s| self.coeff(*s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2() -> Scalar {
        Scalar::symbol(Symbol::intern("sqrt2", 2f64.sqrt()).unwrap())
    }

    fn sqrt3() -> Scalar {
        Scalar::symbol(Symbol::intern("sqrt3", 3f64.sqrt()).unwrap())
    }

    #[test]
    fn rational_sum() {
        assert_eq!(Scalar::ratio(1, 2).add(&Scalar::ratio(1, 3)), Scalar::ratio(5, 6));
    }

    #[test]
    fn symbol_sum_is_coefficientwise() {
        let s = sqrt2().add(&sqrt2());
        let sym = Symbol::lookup("sqrt2").unwrap();
        assert_eq!(s.coeff(sym), Some(rat(2, 1)));
        assert_eq!(s.symbols().len(), 1);
    }

    #[test]
    fn mixed_sum_falls_back_to_float() {
        let s = sqrt2().add(&Scalar::Float(1.0));
        match s {
            Scalar::Float(x) => assert!((x - (1.0 + 2f64.sqrt())).abs() < 1e-15),
            _ => panic!("expected float"),
        }
    }

    #[test]
    fn products() {
        let s = Scalar::int(2).mul(&sqrt3()).unwrap();
        assert_eq!(s.coeff(Symbol::lookup("sqrt3").unwrap()), Some(rat(2, 1)));
        assert_eq!(sqrt2().mul(&sqrt3()), Err(ScalarError::LeavesSpan));
        assert_eq!(
            Scalar::ratio(1, 2).mul(&Scalar::ratio(-2, 3)).unwrap(),
            Scalar::ratio(-1, 3)
        );
        assert_eq!(sqrt2().demote().mul(&sqrt3()).unwrap().evaluate(), 2f64.sqrt() * 3f64.sqrt());
    }

    #[test]
    fn proportional_division_is_exact() {
        let num = Scalar::int(4).mul(&sqrt3()).unwrap();
        let den = Scalar::int(2).mul(&sqrt3()).unwrap();
        assert_eq!(num.div(&den).unwrap(), Scalar::int(2));
        assert_eq!(sqrt2().div(&sqrt3()), Err(ScalarError::LeavesSpan));
    }

    #[test]
    fn independence_examples() {
        assert!(z_linearly_independent(&[sqrt2()], true).unwrap());
        assert!(!z_linearly_independent(&[Scalar::ratio(-3, 7)], true).unwrap());
        let one_plus = Scalar::one().add(&sqrt2());
        assert!(!z_linearly_independent(&[sqrt2(), one_plus], true).unwrap());
        assert_eq!(
            z_linearly_independent(&[Scalar::Float(1.5)], true),
            Err(ScalarError::FloatInput)
        );
    }

    #[test]
    fn parse_and_display_roundtrip() {
        sqrt2();
        sqrt3();
        for text in ["1/2", "-3", "1/2*sqrt2 + 3/4", "2*sqrt3 - sqrt2", "sqrt2/3", "float:1.25", "1e-3", "0.25"] {
            let s: Scalar = text.parse().unwrap();
            let again: Scalar = s.to_string().parse().unwrap();
            assert_eq!(s, again, "{text}");
        }
        let s: Scalar = "1/2*sqrt2 + 3/4".parse().unwrap();
        assert_eq!(s.coeff(Symbol::ONE), Some(rat(3, 4)));
        assert_eq!("1e-3".parse::<Scalar>().unwrap(), Scalar::ratio(1, 1000));
    }

    #[test]
    fn parse_errors() {
        assert!("1//2".parse::<Scalar>().is_err());
        assert!("".parse::<Scalar>().is_err());
        assert!(matches!(
            "2*nosuchsymbol".parse::<Scalar>(),
            Err(ScalarError::UndeclaredSymbol(_))
        ));
        assert!("1/0".parse::<Scalar>().is_err());
    }

    #[test]
    fn symbol_redeclaration() {
        assert!(Symbol::intern("sqrt2", 2f64.sqrt()).is_ok());
        assert!(matches!(
            Symbol::intern("sqrt2", 1.5),
            Err(ScalarError::SymbolMismatch { .. })
        ));
        assert!(matches!(Symbol::intern("one", 1.0), Err(ScalarError::ReservedSymbol(_))));
    }

    #[test]
    fn fresh_symbols_skip_used() {
        let used: BTreeSet<Symbol> = [Symbol::sqrt_prime(2)].into_iter().collect();
        let fresh = fresh_symbols(2, &used);
        assert_eq!(fresh[0].label(), "sqrt3");
        assert_eq!(fresh[1].label(), "sqrt5");
    }
}
