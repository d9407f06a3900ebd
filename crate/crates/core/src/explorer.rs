//! Bounded exploration of finitely generated subsemigroups: breadth-first word
//! enumeration, quadrant witnesses in `G_1`, the built-in example semigroups
//! with their not-a-group predicates, and CSV export.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::group::{additive_product, AlgebraElement, GroupElement, GroupError, Model};
use crate::scalar::{Scalar, Symbol};
use crate::separation::{decide_separation, quadrant_of, Quadrant};

pub const DEFAULT_MAX_LENGTH: usize = 12;
/// Stop enumerating beyond this many distinct elements.
pub const MAX_ELEMENTS: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplorerError {
    #[error("max_length {0} exceeds the cap {1}")]
    CapExceeded(usize, usize),
    #[error("more than {0} distinct elements")]
    TooManyElements(usize),
    #[error("product of word {0} leaves the exact span")]
    LeavesSpan(String),
    #[error("generators mix models or shapes")]
    Mixed,
    #[error("generators are separated")]
    Separated,
    #[error("quadrant search needs G_1 generators")]
    NotG1,
    #[error("unknown example {0:?} (expected ex31, ex32 or ex33)")]
    UnknownExample(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A group element written in one of the two models.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelElement {
    Multiplicative(GroupElement),
    /// First `G_n` coordinate additive: `(v, a, b)` with `a_mult = e^a`.
    Additive(AlgebraElement),
}

impl ModelElement {
    pub fn model(&self) -> Model {
        match self {
            ModelElement::Multiplicative(_) => Model::Multiplicative,
            ModelElement::Additive(_) => Model::Additive,
        }
    }

    pub fn to_group(&self) -> GroupElement {
        match self {
            ModelElement::Multiplicative(x) => x.clone(),
            ModelElement::Additive(x) => GroupElement::from_additive(x.v.clone(), &x.a, x.b.clone()),
        }
    }

    /// `a_mult` or `a`, as written.
    pub fn first(&self) -> &Scalar {
        match self {
            ModelElement::Multiplicative(x) => &x.a_mult,
            ModelElement::Additive(x) => &x.a,
        }
    }

    pub fn b(&self) -> &[Scalar] {
        match self {
            ModelElement::Multiplicative(x) => &x.b,
            ModelElement::Additive(x) => &x.b,
        }
    }

    pub fn v(&self) -> &[Scalar] {
        match self {
            ModelElement::Multiplicative(x) => &x.v,
            ModelElement::Additive(x) => &x.v,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.v().iter().chain(self.b()).chain(std::iter::once(self.first())).all(Scalar::is_exact)
    }

    pub fn product(&self, o: &ModelElement) -> Result<ModelElement, ExplorerError> {
        match (self, o) {
            (ModelElement::Multiplicative(x), ModelElement::Multiplicative(y)) => {
                if x.shape() != y.shape() {
                    return Err(ExplorerError::Mixed);
                }
                Ok(ModelElement::Multiplicative(x.product_or_demote(y)))
            }
            (ModelElement::Additive(x), ModelElement::Additive(y)) => {
                if x.v.len() != y.v.len() || x.b.len() != y.b.len() {
                    return Err(ExplorerError::Mixed);
                }
                Ok(ModelElement::Additive(additive_product(x, y)))
            }
            _ => Err(ExplorerError::Mixed),
        }
    }

    pub fn inverse(&self) -> ModelElement {
        match self {
            ModelElement::Multiplicative(x) => ModelElement::Multiplicative(x.inverse()),
            ModelElement::Additive(x) => {
                let k = if x.a.is_zero() && x.a.is_exact() {
                    Scalar::one()
                } else {
                    Scalar::Float((-x.a.evaluate()).exp())
                };
                ModelElement::Additive(AlgebraElement {
                    v: x.v.iter().map(Scalar::neg).collect(),
                    a: x.a.neg(),
                    b: x.b.iter().map(|y| k.mul_or_demote(y).neg()).collect(),
                })
            }
        }
    }

    fn key(&self) -> Vec<String> {
        self.v()
            .iter()
            .chain(std::iter::once(self.first()))
            .chain(self.b())
            .map(|x| match x {
                Scalar::Float(f) => rounded(*f),
                exact => exact.to_string(),
            })
            .collect()
    }
}

fn rounded(f: f64) -> String {
    if f.abs() < 1e6 {
        format!("f{}", (f * 1e12).round() as i64)
    } else {
        format!("f{:.12e}", f)
    }
}

impl fmt::Display for ModelElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelElement::Multiplicative(x) => write!(f, "{x}"),
            ModelElement::Additive(x) => {
                let parts: Vec<String> = x.v.iter().chain(std::iter::once(&x.a)).map(ToString::to_string).collect();
                let b: Vec<String> = x.b.iter().map(ToString::to_string).collect();
                write!(f, "({}; [{}])", parts.join("; "), b.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitEntry {
    pub element: ModelElement,
    /// Generator indices, shortest first found.
    pub word: Vec<usize>,
}

impl OrbitEntry {
    pub fn word_label(&self) -> String {
        self.word.iter().map(ToString::to_string).collect::<Vec<_>>().join(".")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordOrbit {
    pub generators: Vec<ModelElement>,
    pub max_length: usize,
    pub elements: Vec<OrbitEntry>,
}

impl WordOrbit {
    pub fn by_length(&self, len: usize) -> impl Iterator<Item = &OrbitEntry> {
        self.elements.iter().filter(move |e| e.word.len() == len)
    }
}

fn check_generators(generators: &[ModelElement]) -> Result<(), ExplorerError> {
    if let Some(g0) = generators.first() {
        let same = generators.iter().all(|g| {
            g.model() == g0.model() && g.v().len() == g0.v().len() && g.b().len() == g0.b().len()
        });
        if !same {
            return Err(ExplorerError::Mixed);
        }
    }
    Ok(())
}

/// Breadth-first search over words, visiting each distinct element once with
/// its shortest word. `visit` returns `false` to stop early.
fn bfs<F>(generators: &[ModelElement], max_length: usize, mut visit: F) -> Result<(), ExplorerError>
where
    F: FnMut(&OrbitEntry) -> bool,
{
    if max_length > DEFAULT_MAX_LENGTH {
        return Err(ExplorerError::CapExceeded(max_length, DEFAULT_MAX_LENGTH));
    }
    check_generators(generators)?;
    let exact_mode = generators
        .iter()
        .all(|g| g.model() == Model::Multiplicative && g.is_exact());
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut frontier: Vec<OrbitEntry> = Vec::new();
    for len in 1..=max_length {
        let mut next = Vec::new();
        let parents: Vec<Option<&OrbitEntry>> = if len == 1 {
            vec![None]
        } else {
            frontier.iter().map(Some).collect()
        };
        for parent in parents {
            for (k, g) in generators.iter().enumerate() {
                let (element, word) = match parent {
                    None => (g.clone(), vec![k]),
                    Some(p) => {
                        let mut w = p.word.clone();
                        w.push(k);
                        (p.element.product(g)?, w)
                    }
                };
                if exact_mode && !element.is_exact() {
                    let label = word.iter().map(ToString::to_string).collect::<Vec<_>>().join(".");
                    return Err(ExplorerError::LeavesSpan(label));
                }
                if !seen.insert(element.key()) {
                    continue;
                }
                if seen.len() > MAX_ELEMENTS {
                    return Err(ExplorerError::TooManyElements(MAX_ELEMENTS));
                }
                let entry = OrbitEntry { element, word };
                if !visit(&entry) {
                    return Ok(());
                }
                next.push(entry);
            }
        }
        frontier = next;
    }
    Ok(())
}

/// All distinct products of words of length `1..=max_length`.
pub fn enumerate_words(generators: &[ModelElement], max_length: usize) -> Result<WordOrbit, ExplorerError> {
    let mut elements = Vec::new();
    bfs(generators, max_length, |e| {
        elements.push(e.clone());
        true
    })?;
    Ok(WordOrbit {
        generators: generators.to_vec(),
        max_length,
        elements,
    })
}

/// For each open quadrant of `G_1` (around the identity), the first word
/// whose product lies in it with `|y| > y_threshold`.
pub fn quadrant_witnesses(
    generators: &[GroupElement],
    y_threshold: f64,
    max_length: usize,
) -> Result<BTreeMap<Quadrant, Option<OrbitEntry>>, ExplorerError> {
    if generators.iter().any(|g| !g.v.is_empty() || g.b.len() != 1) {
        return Err(ExplorerError::NotG1);
    }
    let verdict = decide_separation(generators).map_err(|_| ExplorerError::NotG1)?;
    if verdict.separated {
        return Err(ExplorerError::Separated);
    }
    let mut found: BTreeMap<Quadrant, Option<OrbitEntry>> = [Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV]
        .into_iter()
        .map(|q| (q, None))
        .collect();
    let gens: Vec<ModelElement> = generators.iter().cloned().map(ModelElement::Multiplicative).collect();
    bfs(&gens, max_length, |e| {
        let x = e.element.to_group();
        if x.b[0].evaluate().abs() > y_threshold {
            if let Some(slot @ None) = found.get_mut(&quadrant_of(&x)) {
                *slot = Some(e.clone());
            }
        }
        found.values().any(Option::is_none)
    })?;
    Ok(found)
}

pub type PredicateFn = Arc<dyn Fn(&ModelElement) -> bool + Send + Sync>;

/// A property claimed to hold on the generators and to be closed under products.
#[derive(Clone)]
pub struct SemigroupPredicate {
    pub name: String,
    pub eval: PredicateFn,
}

impl SemigroupPredicate {
    pub fn holds(&self, x: &ModelElement) -> bool {
        (self.eval)(x)
    }
}

impl fmt::Debug for SemigroupPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemigroupPredicate").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug)]
pub struct BuiltinExample {
    pub id: String,
    pub generators: Vec<ModelElement>,
    pub predicate: SemigroupPredicate,
    /// Inverse of `generators[excluded_of]`.
    pub excluded: ModelElement,
    pub excluded_of: usize,
}

fn sqrt_sym(p: u64) -> Symbol {
    Symbol::sqrt_prime(p)
}

fn g1(a: Scalar, y: Scalar) -> ModelElement {
    ModelElement::Multiplicative(GroupElement::g1(a, y))
}

fn integer(q: &BigRational) -> bool {
    q.is_integer()
}

/// Exponents `(p, q)` with `x = 2^p 3^q`, if `x` is of that form.
fn two_three_exponents(x: &BigRational) -> Option<(i64, i64)> {
    if !x.is_positive() {
        return None;
    }
    let split = |n: &num_bigint::BigInt| -> Option<(i64, i64)> {
        let mut n = n.clone();
        let (mut p, mut q) = (0, 0);
        let two = num_bigint::BigInt::from(2);
        let three = num_bigint::BigInt::from(3);
        while (&n % &two).is_zero() {
            n /= &two;
            p += 1;
        }
        while (&n % &three).is_zero() {
            n /= &three;
            q += 1;
        }
        n.is_one().then_some((p, q))
    };
    let (p1, q1) = split(x.numer())?;
    let (p2, q2) = split(x.denom())?;
    Some((p1 - p2, q1 - q2))
}

fn only_symbols(x: &Scalar, allowed: &[Symbol]) -> bool {
    x.is_exact() && x.symbols().iter().all(|s| allowed.contains(s))
}

/// Example semigroups with a not-a-group certificate.
pub fn builtin_example(id: &str) -> Result<BuiltinExample, ExplorerError> {
    match id {
        "ex31" => {
            let r2 = sqrt_sym(2);
            let pairs = [(1, 1, 1), (2, 1, 1), (3, 1, -1), (1, 2, -1), (2, 2, 1), (3, 2, -1)];
            let generators = pairs
                .iter()
                .map(|&(a, b, y)| {
                    let x = &Scalar::int(-a) + &Scalar::term(BigRational::from_integer(b.into()), r2);
                    ModelElement::Additive(AlgebraElement {
                        v: vec![],
                        a: x,
                        b: vec![Scalar::int(y)],
                    })
                })
                .collect::<Vec<_>>();
            let eval: PredicateFn = Arc::new(move |x: &ModelElement| {
                let a = x.first();
                if x.model() != Model::Additive || !only_symbols(a, &[r2]) {
                    return false;
                }
                let c1 = a.coeff(Symbol::ONE).unwrap_or_default();
                let c2 = a.coeff(r2).unwrap_or_default();
                integer(&c1) && integer(&c2) && c1 <= -BigRational::one() && c2 >= BigRational::one()
            });
            Ok(BuiltinExample {
                id: id.into(),
                excluded: generators[0].inverse(),
                excluded_of: 0,
                generators,
                predicate: SemigroupPredicate {
                    name: "first coordinate -a + b sqrt2 with integers a, b >= 1".into(),
                    eval,
                },
            })
        }
        "ex32" => {
            let generators = vec![
                g1(Scalar::ratio(1, 3), Scalar::zero()),
                g1(Scalar::int(2), Scalar::int(2)),
                g1(Scalar::int(2), Scalar::int(-2)),
            ];
            let eval: PredicateFn = Arc::new(|x: &ModelElement| {
                if x.model() != Model::Multiplicative {
                    return false;
                }
                match x.first().as_rational().as_ref().and_then(two_three_exponents) {
                    Some((p, q)) => p >= 0 && q <= 0 && (p, q) != (0, 0),
                    None => false,
                }
            });
            Ok(BuiltinExample {
                id: id.into(),
                excluded: generators[0].inverse(),
                excluded_of: 0,
                generators,
                predicate: SemigroupPredicate {
                    name: "a_mult = 2^p / 3^q with p, q >= 0 not both zero".into(),
                    eval,
                },
            })
        }
        "ex33" => {
            let r3 = sqrt_sym(3);
            let generators = vec![
                g1(Scalar::ratio(1, 2), Scalar::zero()),
                g1(Scalar::int(2), Scalar::symbol(r3)),
                g1(Scalar::int(2), Scalar::int(-1)),
                g1(Scalar::one(), Scalar::zero()),
            ];
            let eval: PredicateFn = Arc::new(move |x: &ModelElement| {
                if x.model() != Model::Multiplicative || x.b().len() != 1 {
                    return false;
                }
                let power_of_two = x
                    .first()
                    .as_rational()
                    .as_ref()
                    .and_then(two_three_exponents)
                    .is_some_and(|(_, q)| q == 0);
                let y = &x.b()[0];
                power_of_two && only_symbols(y, &[r3]) && !y.coeff(r3).unwrap_or_default().is_negative()
            });
            Ok(BuiltinExample {
                id: id.into(),
                excluded: generators[1].inverse(),
                excluded_of: 1,
                generators,
                predicate: SemigroupPredicate {
                    name: "a_mult a power of 2 and sqrt3-coefficient of y >= 0".into(),
                    eval,
                },
            })
        }
        other => Err(ExplorerError::UnknownExample(other.into())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateReport {
    pub predicate: String,
    pub elements_checked: usize,
    pub pairs_checked: usize,
    /// Words of enumerated elements on which the predicate fails.
    pub element_violations: Vec<String>,
    /// Word pairs `(x, y)` with `P(x)`, `P(y)` but not `P(xy)`.
    pub closure_violations: Vec<(String, String)>,
    pub excluded: String,
    pub excluded_fails: bool,
}

impl PredicateReport {
    pub fn passed(&self) -> bool {
        self.element_violations.is_empty() && self.closure_violations.is_empty() && self.excluded_fails
    }
}

impl fmt::Display for PredicateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "predicate: {}", self.predicate)?;
        writeln!(f, "elements checked: {}", self.elements_checked)?;
        writeln!(f, "pairs checked: {}", self.pairs_checked)?;
        for w in &self.element_violations {
            writeln!(f, "violation at word {w}")?;
        }
        for (x, y) in &self.closure_violations {
            writeln!(f, "closure violation: {x} * {y}")?;
        }
        writeln!(
            f,
            "excluded {}: predicate {}",
            self.excluded,
            if self.excluded_fails { "fails (not in S)" } else { "HOLDS" }
        )?;
        write!(f, "result: {}", if self.passed() { "pass" } else { "fail" })
    }
}

pub const DEFAULT_PAIR_CAP: usize = 250_000;

/// Checks the predicate on the orbit, its closure on pairs of orbit elements
/// (at most `pair_cap`, shortest words first), and its failure on `excluded`.
pub fn check_predicate(
    orbit: &WordOrbit,
    p: &SemigroupPredicate,
    excluded: &ModelElement,
    pair_cap: usize,
) -> Result<PredicateReport, ExplorerError> {
    let mut element_violations = Vec::new();
    for e in &orbit.elements {
        if !p.holds(&e.element) {
            element_violations.push(e.word_label());
        }
    }
    let holding: Vec<&OrbitEntry> = orbit.elements.iter().filter(|e| p.holds(&e.element)).collect();
    let side = (pair_cap as f64).sqrt().floor() as usize;
    let mut closure_violations = Vec::new();
    let mut pairs = 0;
    for x in holding.iter().take(side) {
        for y in holding.iter().take(side) {
            pairs += 1;
            if !p.holds(&x.element.product(&y.element)?) {
                closure_violations.push((x.word_label(), y.word_label()));
            }
        }
    }
    Ok(PredicateReport {
        predicate: p.name.clone(),
        elements_checked: orbit.elements.len(),
        pairs_checked: pairs,
        element_violations,
        closure_violations,
        excluded: excluded.to_string(),
        excluded_fails: !p.holds(excluded),
    })
}

/// [`check_predicate`] on all words of length `<= max_length` without storing
/// the last length: the orbit is kept up to `max_length - 1` and its longest
/// words are extended by each generator and checked on the fly. Every element
/// whose shortest word has length `max_length` is among those products.
pub fn predicate_report(
    generators: &[ModelElement],
    p: &SemigroupPredicate,
    excluded: &ModelElement,
    max_length: usize,
    pair_cap: usize,
) -> Result<PredicateReport, ExplorerError> {
    if max_length > DEFAULT_MAX_LENGTH {
        return Err(ExplorerError::CapExceeded(max_length, DEFAULT_MAX_LENGTH));
    }
    check_generators(generators)?;
    let stored = max_length.saturating_sub(1);
    let orbit = enumerate_words(generators, stored)?;
    let mut report = check_predicate(&orbit, p, excluded, pair_cap)?;
    if max_length == 0 {
        return Ok(report);
    }
    let root = OrbitEntry {
        element: ModelElement::Multiplicative(GroupElement::identity(crate::group::GroupShape::g1())),
        word: Vec::new(),
    };
    let parents: Vec<&OrbitEntry> = if stored == 0 {
        vec![&root]
    } else {
        orbit.by_length(stored).collect()
    };
    for parent in parents {
        for (k, g) in generators.iter().enumerate() {
            let x = if parent.word.is_empty() { g.clone() } else { parent.element.product(g)? };
            report.elements_checked += 1;
            if !p.holds(&x) {
                let mut word = parent.word.clone();
                word.push(k);
                report
                    .element_violations
                    .push(word.iter().map(ToString::to_string).collect::<Vec<_>>().join("."));
            }
        }
    }
    Ok(report)
}

fn csv_number(x: f64) -> String {
    format!("{x}")
}

/// Orbit as CSV rows `x,y,tag,word`: `x` is the first coordinate as written
/// (`a_mult`, or `a` in the additive model), `y` the first `b` coordinate and
/// `tag` the quadrant.
pub fn write_orbit_csv<W: Write>(orbit: &WordOrbit, mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,y,tag,word")?;
    for e in &orbit.elements {
        let y = e.element.b().first().map_or(0.0, Scalar::evaluate);
        let tag = quadrant_of(&e.element.to_group());
        writeln!(
            w,
            "{},{},{},{}",
            csv_number(e.element.first().evaluate()),
            csv_number(y),
            tag,
            e.word_label()
        )?;
    }
    Ok(())
}

/// Boundary curves `y = l (e^x - 1)` of `G_1` in the additive coordinate `x`,
/// `points` samples each over `[x_min, x_max]`, plus the border `x = 0`.
pub fn write_boundary_csv<W: Write>(
    slopes: &[f64],
    x_min: f64,
    x_max: f64,
    points: usize,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "x,y,tag")?;
    let step = if points > 1 { (x_max - x_min) / (points - 1) as f64 } else { 0.0 };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &l in slopes {
        for k in 0..points {
            let x = x_min + k as f64 * step;
            let y = l * x.exp_m1();
            lo = lo.min(y);
            hi = hi.max(y);
            writeln!(w, "{},{},slope={}", csv_number(x), csv_number(y), l)?;
        }
    }
    if !slopes.is_empty() {
        let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        let ystep = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
        for k in 0..points {
            writeln!(w, "0,{},border", csv_number(lo + k as f64 * ystep))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mult(a: &str, y: &str) -> ModelElement {
        g1(a.parse().unwrap(), y.parse().unwrap())
    }

    #[test]
    fn powers_of_single_generator() {
        let orbit = enumerate_words(&[mult("2", "0")], 3).unwrap();
        let firsts: Vec<String> = orbit.elements.iter().map(|e| e.element.first().to_string()).collect();
        assert_eq!(firsts, ["2", "4", "8"]);
        assert!(enumerate_words(&[], 5).unwrap().elements.is_empty());
        assert!(matches!(enumerate_words(&[mult("2", "0")], 13), Err(ExplorerError::CapExceeded(13, 12))));
    }

    #[test]
    fn ex32_length_two() {
        let ex = builtin_example("ex32").unwrap();
        let orbit = enumerate_words(&ex.generators, 2).unwrap();
        assert_eq!(orbit.by_length(2).count(), 9);
        // a c = (1/3, 0)(2, -2) = (2/3, -2/3)
        assert!(orbit.elements.iter().any(|e| e.element == mult("2/3", "-2/3")));
        for e in &orbit.elements {
            let mut acc = ex.generators[e.word[0]].clone();
            for &k in &e.word[1..] {
                acc = acc.product(&ex.generators[k]).unwrap();
            }
            assert_eq!(acc, e.element);
        }
    }

    #[test]
    fn ex33_inverse_excluded() {
        let ex = builtin_example("ex33").unwrap();
        assert!(ex.predicate.holds(&mult("2", "sqrt3")));
        assert_eq!(ex.excluded, mult("1/2", "-1/2*sqrt3"));
        assert!(!ex.predicate.holds(&ex.excluded));
    }

    #[test]
    fn builtin_reports_pass() {
        for id in ["ex31", "ex32", "ex33"] {
            let ex = builtin_example(id).unwrap();
            let orbit = enumerate_words(&ex.generators, 5).unwrap();
            let report = check_predicate(&orbit, &ex.predicate, &ex.excluded, 10_000).unwrap();
            assert!(report.passed(), "{id}: {report}");
        }
        assert!(builtin_example("ex34").is_err());
    }

    #[test]
    fn planted_violation_is_named() {
        let ex = builtin_example("ex32").unwrap();
        let mut gens = ex.generators.clone();
        gens.push(mult("3", "0"));
        let orbit = enumerate_words(&gens, 2).unwrap();
        let report = check_predicate(&orbit, &ex.predicate, &ex.excluded, 1000).unwrap();
        assert!(!report.passed());
        assert!(report.element_violations.contains(&"3".to_string()));
        let streamed = predicate_report(&gens, &ex.predicate, &ex.excluded, 1, 1000).unwrap();
        assert_eq!(streamed.element_violations, vec!["3".to_string()]);
    }

    #[test]
    fn streamed_report_covers_full_orbit() {
        let ex = builtin_example("ex32").unwrap();
        let mut gens = ex.generators.clone();
        gens.push(mult("3", "0"));
        let full = enumerate_words(&gens, 3).unwrap();
        let full = check_predicate(&full, &ex.predicate, &ex.excluded, 100).unwrap();
        let streamed = predicate_report(&gens, &ex.predicate, &ex.excluded, 3, 100).unwrap();
        assert!(streamed.elements_checked >= full.elements_checked);
        for w in &full.element_violations {
            assert!(streamed.element_violations.contains(w), "{w}");
        }
        let ok = predicate_report(&ex.generators, &ex.predicate, &ex.excluded, 5, 1000).unwrap();
        assert!(ok.passed());
    }

    #[test]
    fn quadrants_and_separated() {
        let ex = builtin_example("ex32").unwrap();
        let gens: Vec<GroupElement> = ex.generators.iter().map(ModelElement::to_group).collect();
        let w = quadrant_witnesses(&gens, 10.0, 12).unwrap();
        assert!(w.values().all(Option::is_some), "{w:?}");
        let sep = [GroupElement::g1(Scalar::int(2), Scalar::int(1))];
        assert_eq!(quadrant_witnesses(&sep, 1.0, 4), Err(ExplorerError::Separated));
    }

    #[test]
    fn boundary_export() {
        let mut out = Vec::new();
        write_boundary_csv(&[-2.0, 0.0, 1.5], -2.5, 0.9, 400, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 400);
        assert!(text.contains("slope=1.5") && text.contains(",border"));
        let first = text.lines().nth(1).unwrap();
        let y: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
        assert!((y - (-2.0 * (-2.5f64).exp_m1())).abs() < 1e-12);
        let mut empty = Vec::new();
        let orbit = enumerate_words(&[], 3).unwrap();
        write_orbit_csv(&orbit, &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "x,y,tag,word\n");
    }
}
