//! The densify pipeline for `H_mn`.
//!
//! Steps: rationalize, bring into normal form, find a word `z''` with
//! `c < 1` and all-negative `b`, inject fresh square roots and a fresh prime
//! so the limit vectors and the projection carry exact independence data,
//! then certify the closure inside `R^n` with [`kronecker_dense`] and the
//! projection to `R^m` by a determinant test in [`crate::certalg`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{
    apply_rational, kronecker_dense, rational_below, rationalize_coordinate, step, CertificateKind, DensityCertificate,
    DensityError,
};
use crate::automorphisms::{normalize_structure, AuditStep, Automorphism};
use crate::certalg::{self, Poly};
use crate::group::{GroupElement, GroupShape};
use crate::limits::{limit_element, LimitRequest};
use crate::linalg;
use crate::scalar::{fresh_symbols, primes, Scalar, Symbol};
use crate::separation::decide_separation;

const MAX_WORD: usize = 10;
const BEAM: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PipelineCase {
    /// An element with `a_mult < 1` and `b = 0` exists in normal form.
    One,
    /// No such element; the first basis element has `c_1 < 1`.
    Two,
}

/// Density of the projection to `R^m`: with `B` the projections of `basis`
/// as columns and `D_i` the determinant with column `i` replaced by the
/// projection of `p0`, `{D, D_1, ..., D_m}` is Q-independent, so the
/// coordinates of `p0` in `B` are independent with 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionCertificate {
    pub p0: usize,
    pub basis: Vec<usize>,
    /// `D, D_1, ..., D_m`.
    pub determinants: Vec<Poly>,
}

#[derive(Clone, Debug)]
pub struct HmnDensified {
    pub tuple: Vec<GroupElement>,
    pub case: PipelineCase,
    pub phi: Automorphism,
    /// `phi(tuple)`.
    pub normal: Vec<GroupElement>,
    pub z: usize,
    pub basis: Vec<usize>,
    pub z_prime: Option<usize>,
    /// Letters of `z''`, indices into `tuple`.
    pub word: Vec<usize>,
    /// Limit vectors in `phi` coordinates spanning the lattice `F`.
    pub lattice: Vec<Vec<Scalar>>,
    /// Integer vector subtracted from `F^{-1} w`.
    pub shift: Vec<BigInt>,
    /// `F^{-1} w - shift`, all negative.
    pub witness: Vec<Scalar>,
    pub projection: ProjectionCertificate,
    pub certificate: DensityCertificate,
}

fn word_product(els: &[GroupElement], word: &[usize]) -> Result<GroupElement, DensityError> {
    let mut acc = GroupElement::identity(els[0].shape());
    for &k in word {
        acc = acc.product(&els[k])?;
    }
    Ok(acc)
}

fn below_one(x: &Scalar) -> bool {
    x.compare(&Scalar::one()) == Ordering::Less
}

fn good_word(p: &GroupElement) -> bool {
    below_one(&p.a_mult) && p.b.iter().all(Scalar::is_negative)
}

/// Shortest-first search, in binary64, for a word with `c < 1`, all `b < 0`
/// and at least one letter outside `structural`; confirmed exactly.
fn search_word(normal: &[GroupElement], structural: &BTreeSet<usize>) -> Result<Option<Vec<usize>>, DensityError> {
    struct State {
        a: f64,
        b: Vec<f64>,
        word: Vec<usize>,
    }
    let els: Vec<(f64, Vec<f64>)> = normal
        .iter()
        .map(|x| {
            let (_, a, b) = x.evaluate();
            (a, b)
        })
        .collect();
    let score = |s: &State| {
        let scale = 1.0 + s.b.iter().map(|y| y.abs()).fold(0.0, f64::max);
        s.b.iter().copied().fold(f64::MIN, f64::max) / scale + if s.a < 1.0 { 0.0 } else { 1.0 }
    };
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let key = |a: f64, b: &[f64]| -> Vec<i64> {
        std::iter::once(a.ln())
            .chain(b.iter().copied())
            .map(|x| (x * 1e9).round() as i64)
            .collect()
    };
    let mut frontier = vec![State {
        a: 1.0,
        b: vec![0.0; els[0].1.len()],
        word: vec![],
    }];
    for _ in 0..MAX_WORD {
        let mut next = Vec::new();
        for s in &frontier {
            for (k, (ea, eb)) in els.iter().enumerate() {
                let a = s.a * ea;
                if !(1e-8..=1e8).contains(&a) {
                    continue;
                }
                let b: Vec<f64> = s.b.iter().zip(eb).map(|(x, y)| x + s.a * y).collect();
                if !seen.insert(key(a, &b)) {
                    continue;
                }
                let mut word = s.word.clone();
                word.push(k);
                let st = State { a, b, word };
                if st.a < 1.0 - 1e-12
                    && st.b.iter().all(|y| *y < -1e-12)
                    && st.word.iter().any(|l| !structural.contains(l))
                    && good_word(&word_product(normal, &st.word)?)
                {
                    return Ok(Some(st.word));
                }
                next.push(st);
            }
        }
        if next.len() > BEAM {
            next.sort_by(|x, y| score(x).partial_cmp(&score(y)).unwrap_or(Ordering::Equal));
            next.truncate(BEAM);
        }
        frontier = next;
    }
    Ok(None)
}

fn rationalize_element(x: &GroupElement, bound: f64) -> GroupElement {
    let a_bound = bound.min(x.a_mult.evaluate() / 2.0);
    GroupElement {
        v: x.v.iter().map(|y| rationalize_coordinate(y, bound)).collect(),
        a_mult: rationalize_coordinate(&x.a_mult, a_bound),
        b: x.b.iter().map(|y| rationalize_coordinate(y, bound)).collect(),
    }
}

fn rational_a(x: &GroupElement) -> Result<BigRational, DensityError> {
    x.a_mult
        .as_rational()
        .ok_or_else(|| step("a_mult is not rational after rationalization"))
}

/// A prime at least `lower` dividing no numerator or denominator of any `a_mult`.
fn multiplier_prime(lower: f64, tuple: &[GroupElement], avoid: &BTreeSet<u64>) -> Result<u64, DensityError> {
    let qs: Vec<BigRational> = tuple.iter().map(rational_a).collect::<Result<_, _>>()?;
    let lower = lower.clamp(11.0, 1e15) as u64;
    Ok(primes()
        .skip_while(|p| *p < lower)
        .find(|p| {
            let bp = BigInt::from(*p);
            !avoid.contains(p) && qs.iter().all(|q| !(q.numer() % &bp).is_zero() && !(q.denom() % &bp).is_zero())
        })
        .expect("infinitely many primes"))
}

/// Exact projection column `(v, ln a_mult)`.
fn projection_column(x: &GroupElement) -> Option<Vec<Poly>> {
    let mut col: Vec<Poly> = x.v.iter().map(certalg::from_scalar).collect::<Option<_>>()?;
    col.push(certalg::ln_rational(&x.a_mult.as_rational()?)?);
    Some(col)
}

fn determinant_of_columns(cols: &[Vec<Poly>]) -> Poly {
    let m = cols.len();
    let rows: Vec<Vec<Poly>> = (0..m).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    certalg::det(&rows)
}

/// `D, D_1, ..., D_m` for a projection certificate.
fn projection_determinants(tuple: &[GroupElement], p0: usize, basis: &[usize]) -> Option<Vec<Poly>> {
    let cols: Vec<Vec<Poly>> = basis.iter().map(|&k| projection_column(&tuple[k])).collect::<Option<_>>()?;
    let p = projection_column(&tuple[p0])?;
    let mut out = vec![determinant_of_columns(&cols)];
    for i in 0..cols.len() {
        let mut c = cols.clone();
        c[i] = p.clone();
        out.push(determinant_of_columns(&c));
    }
    Some(out)
}

fn projection_basis(tuple: &[GroupElement], p0: usize) -> Option<Vec<usize>> {
    let m = tuple[0].shape().m;
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for k in (0..tuple.len()).filter(|&k| k != p0) {
        let mut trial = rows.clone();
        trial.push(tuple[k].projection());
        if linalg::rank(&trial) == trial.len() {
            rows = trial;
            chosen.push(k);
            if chosen.len() == m {
                return Some(chosen);
            }
        }
    }
    None
}

/// Linear part `M` of `phi` on the `R^n` factor, read off `phi(0, 1, e_i)`.
fn b_linear_part(phi: &Automorphism, shape: GroupShape) -> Result<Vec<Vec<BigRational>>, DensityError> {
    let n = shape.n;
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let e = GroupElement {
            v: vec![Scalar::zero(); shape.m - 1],
            a_mult: Scalar::one(),
            b: (0..n).map(|r| if r == i { Scalar::one() } else { Scalar::zero() }).collect(),
        };
        let img = phi.apply(&e)?;
        let col: Option<Vec<BigRational>> = img.b.iter().map(Scalar::as_rational).collect();
        cols.push(col.ok_or_else(|| step("normal form map is not rational"))?);
    }
    Ok((0..n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect())
}

fn inf_norm(m: &[Vec<BigRational>]) -> f64 {
    m.iter()
        .map(|r| r.iter().map(|x| x.abs().to_f64().unwrap_or(f64::MAX)).sum::<f64>())
        .fold(0.0, f64::max)
}

fn unit(n: usize, i: usize) -> Vec<Scalar> {
    (0..n).map(|r| if r == i { Scalar::one() } else { Scalar::zero() }).collect()
}

fn add_unit(a: &[Scalar], i: usize) -> Vec<Scalar> {
    a.iter()
        .enumerate()
        .map(|(r, x)| if r == i { x + &Scalar::one() } else { x.clone() })
        .collect()
}

/// Pairs `(z0, z)` whose limits span the lattice `F`, and the expected limit.
fn lattice_pairs(
    normal: &[GroupElement],
    case: PipelineCase,
    z: usize,
    basis: &[usize],
    z_prime: Option<usize>,
) -> Vec<(usize, usize, Vec<Scalar>)> {
    let n = basis.len();
    basis
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let c_below = below_one(&normal[k].a_mult);
            match (case, c_below) {
                (_, true) => (k, z, unit(n, i)),
                (PipelineCase::One, false) => (z_prime.expect("case one has z'"), k, unit(n, i)),
                (PipelineCase::Two, false) => (basis[0], k, add_unit(&unit(n, 0), i)),
            }
        })
        .collect()
}

fn limit_of(normal: &[GroupElement], z0: &GroupElement, z: &GroupElement) -> Result<Vec<Scalar>, DensityError> {
    let req = LimitRequest {
        set: normal.to_vec(),
        z0: z0.clone(),
        z: z.clone(),
    };
    Ok(limit_element(&req).map_err(|e| step(format!("limit: {e}")))?.b)
}

fn lattice_inverse(lattice: &[Vec<Scalar>]) -> Result<Vec<Vec<BigRational>>, DensityError> {
    let n = lattice.len();
    let f: Option<Vec<Vec<BigRational>>> = (0..n)
        .map(|r| lattice.iter().map(|c| c[r].as_rational()).collect())
        .collect();
    let f = f.ok_or_else(|| step("limit vectors are not rational"))?;
    linalg::inverse(&f).ok_or_else(|| step("limit vectors are dependent"))
}

fn distance_ok(a: &[GroupElement], b: &[GroupElement], epsilon: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        x.flat()
            .iter()
            .zip(y.flat())
            .all(|(p, q)| (p - q).abs() <= epsilon)
    })
}

fn perturbation(audit: &mut Vec<AuditStep>, index: usize, from: &GroupElement, to: &GroupElement) {
    audit.push(AuditStep::Perturbation {
        index,
        from: from.clone(),
        to: to.clone(),
    });
}

fn exponents_proportional(x: &BTreeMap<u64, i64>, y: &BTreeMap<u64, i64>) -> bool {
    let keys: BTreeSet<u64> = x.keys().chain(y.keys()).copied().collect();
    let v: Vec<(i64, i64)> = keys
        .iter()
        .map(|k| (*x.get(k).unwrap_or(&0), *y.get(k).unwrap_or(&0)))
        .collect();
    v.iter().all(|(a, b)| v.iter().all(|(c, d)| a * d == b * c))
}

/// Moves a nonseparated tuple of `H_mn` by at most `epsilon` per coordinate
/// to one that is multiplicatively dense, with an exact certificate.
pub fn densify_hmn(tuple: &[GroupElement], epsilon: f64) -> Result<HmnDensified, DensityError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(DensityError::BadEpsilon);
    }
    let verdict = decide_separation(tuple).map_err(|e| step(e.to_string()))?;
    if verdict.separated {
        return Err(DensityError::Separated);
    }
    let shape = tuple[0].shape();
    let (m, n) = (shape.m, shape.n);
    let quarter = epsilon / 4.0;
    let mut audit = Vec::new();

    let rational: Vec<GroupElement> = tuple.iter().map(|x| rationalize_element(x, quarter)).collect();
    if rational != tuple {
        audit.push(AuditStep::Note(format!("rationalized coordinates within {quarter}")));
        if decide_separation(&rational).map_err(|e| step(e.to_string()))?.separated {
            return Err(step("rationalization separated the tuple; use a smaller epsilon"));
        }
    }

    let nf = normalize_structure(&rational, quarter)?;
    audit.extend(nf.audit.iter().cloned());
    let case = if nf.z_prime.is_some() {
        PipelineCase::One
    } else if nf.c1_below_one() {
        PipelineCase::Two
    } else {
        return Err(step("case selection: no element with a_mult < 1 and b = 0, and c_1 >= 1"));
    };
    audit.push(AuditStep::Note(format!(
        "case {}: {}",
        if case == PipelineCase::One { 1 } else { 2 },
        if case == PipelineCase::One {
            "element with a_mult < 1 and b = 0 present"
        } else {
            "first basis element has c_1 < 1"
        }
    )));
    let phi = nf.phi.clone();
    let mut structural: BTreeSet<usize> = nf.basis.iter().copied().collect();
    structural.insert(nf.z);
    structural.extend(nf.z_prime);

    let word = search_word(&nf.elements, &structural)?
        .ok_or_else(|| step(format!("no word of length <= {MAX_WORD} with c < 1 and all b < 0")))?;
    audit.push(AuditStep::Note(format!("word for z'': {word:?}")));
    let y = *word.iter().find(|k| !structural.contains(k)).expect("search guarantees a free letter");

    let mut candidates = vec![y];
    candidates.extend((0..tuple.len()).filter(|k| !structural.contains(k) && *k != y));
    let mut used: BTreeSet<Symbol> = nf.perturbed.iter().flat_map(|x| {
        x.v.iter().chain(&x.b).chain(std::iter::once(&x.a_mult)).flat_map(Scalar::symbols).collect::<Vec<_>>()
    }).collect();
    let mut chosen = None;
    for &p0 in &candidates {
        let Some(pbasis) = projection_basis(&nf.perturbed, p0) else {
            continue;
        };
        let mut cur = nf.perturbed.clone();
        let mut steps = Vec::new();
        let mut avoid = BTreeSet::new();
        for &k in if p0 == y { vec![y] } else { vec![y, p0] }.iter() {
            let a = rational_a(&cur[k])?;
            let q = multiplier_prime(4.0 * a.to_f64().unwrap_or(f64::MAX) / epsilon + 1.0, &cur, &avoid)?;
            avoid.insert(q);
            let mut to = cur[k].clone();
            to.a_mult = Scalar::rational(a * BigRational::new((q - 1).into(), q.into()));
            perturbation(&mut steps, k, &cur[k], &to);
            steps.push(AuditStep::Note(format!("element {k}: a_mult scaled by (q - 1)/q with fresh prime q = {q}")));
            cur[k] = to;
        }
        let mut local_used = used.clone();
        if m >= 2 {
            let fresh = fresh_symbols(m - 1, &local_used);
            local_used.extend(fresh.iter().copied());
            let root_max = fresh.iter().map(|s| s.approx()).fold(0.0, f64::max);
            let e = rational_below(quarter / root_max);
            let mut to = cur[p0].clone();
            to.v = to.v.iter().zip(&fresh).map(|(x, s)| x + &Scalar::term(-e.clone(), *s)).collect();
            perturbation(&mut steps, p0, &cur[p0], &to);
            cur[p0] = to;
        }
        let Some(dets) = projection_determinants(&cur, p0, &pbasis) else {
            continue;
        };
        if dets[0].is_zero() || !certalg::independent(&dets, false) {
            continue;
        }
        chosen = Some((p0, pbasis, dets, cur, steps));
        used = local_used;
        break;
    }
    let (p0, pbasis, dets, mut cur, steps) = chosen.ok_or_else(|| step("projection certificate: no element yields independent determinants"))?;
    audit.extend(steps);
    audit.push(AuditStep::Note(format!(
        "projection certificate: element {p0} against basis {pbasis:?}, determinants Q-independent"
    )));

    let normal = phi.apply_all(&cur)?;
    let zpp = word_product(&normal, &word)?;
    if !good_word(&zpp) {
        return Err(step("z'' lost c < 1 or b < 0 after the multiplier perturbation"));
    }
    let c_ex = certalg::prime_exponents(&zpp.a_mult.as_rational().expect("rational"));
    let a_ex = certalg::prime_exponents(&normal[nf.z].a_mult.as_rational().expect("rational"));
    if let (Some(c), Some(a)) = (c_ex, a_ex) {
        audit.push(AuditStep::Note(format!(
            "ln c / ln a irrational: {}",
            !exponents_proportional(&c, &a)
        )));
    }

    // perturb b of y so that b'' moves by kappa * eta in phi coordinates
    let mut kappa = BigRational::zero();
    let mut prefix = BigRational::one();
    for &k in &word {
        if k == y {
            kappa += &prefix;
        }
        prefix *= normal[k].a_mult.as_rational().expect("rational");
    }
    let mm = b_linear_part(&phi, shape)?;
    let m_inv = linalg::inverse(&mm).ok_or_else(|| step("normal form map is singular on R^n"))?;
    let fresh = fresh_symbols(n, &used);
    let root_max = fresh.iter().map(|s| s.approx()).fold(0.0, f64::max);
    let e = rational_below(quarter / (inf_norm(&m_inv).max(1e-300) * root_max));
    let eta: Vec<Scalar> = fresh.iter().map(|s| Scalar::term(-e.clone(), *s)).collect();
    let xi = apply_rational(&m_inv, &eta);
    let mut to = cur[y].clone();
    to.b = to.b.iter().zip(&xi).map(|(p, q)| p + q).collect();
    perturbation(&mut audit, y, &cur[y], &to);
    cur[y] = to;
    audit.push(AuditStep::Note(format!("b of element {y} moved by fresh roots; z'' shifts by kappa = {kappa} times eta")));

    let normal = phi.apply_all(&cur)?;
    let zpp = word_product(&normal, &word)?;
    if !good_word(&zpp) {
        return Err(step("z'' lost c < 1 or b < 0 after the root perturbation"));
    }
    let one_minus_c = &Scalar::one() - &zpp.a_mult;
    let mut kb = vec![one_minus_c.clone()];
    kb.extend(zpp.b.iter().cloned());
    audit.push(AuditStep::Note(format!(
        "{{1 - c, b''}} Z-independent: {}",
        crate::scalar::z_linearly_independent(&kb, false)?
    )));
    let chain = zpp.b.windows(2).all(|w| w[1].evaluate() < w[0].evaluate() - 2.0 * one_minus_c.evaluate());
    audit.push(AuditStep::Note(format!("chain condition b_(i+1) < b_i - 2(1 - c): {chain} (not required)")));

    let pairs = lattice_pairs(&normal, case, nf.z, &nf.basis, nf.z_prime);
    let mut lattice = Vec::with_capacity(n);
    for (z0, z1, expected) in &pairs {
        let got = limit_of(&normal, &normal[*z0], &normal[*z1])?;
        if &got != expected {
            return Err(step(format!("limit of ({z0}, {z1}) is not the expected lattice vector")));
        }
        audit.push(AuditStep::Note(format!("limit of elements ({z0}, {z1}): ({})", super::join(&got))));
        lattice.push(got);
    }
    let w = limit_of(&normal, &zpp, &normal[nf.z])?;
    audit.push(AuditStep::Note(format!("limit of (z'', element {}): ({})", nf.z, super::join(&w))));
    let f_inv = lattice_inverse(&lattice)?;
    if case == PipelineCase::Two && lattice.iter().enumerate().any(|(i, c)| *c != unit(n, i)) {
        let as_scalar: Vec<Vec<Scalar>> = f_inv.iter().map(|r| r.iter().cloned().map(Scalar::rational).collect()).collect();
        audit.push(AuditStep::Automorphism {
            label: "type-b basis correction to limit-vector coordinates".into(),
            map: Automorphism::type_b(as_scalar)?,
        });
    }
    let alpha = apply_rational(&f_inv, &w);
    let shift: Vec<BigInt> = alpha
        .iter()
        .map(|x| if x.is_negative() { BigInt::zero() } else { BigInt::from(x.evaluate().ceil() as i64) })
        .collect();
    if shift.iter().any(|k| !k.is_zero()) {
        audit.push(AuditStep::Note(format!(
            "coordinates of w not all negative; subtracting integer vector {shift:?} (the closure inside R^n is a group containing the lattice)"
        )));
    }
    let witness: Vec<Scalar> = alpha
        .iter()
        .zip(&shift)
        .map(|(x, k)| x - &Scalar::rational(BigRational::from_integer(k.clone())))
        .collect();
    let mut kdata: Vec<Vec<Scalar>> = (0..n).map(|i| unit(n, i)).collect();
    kdata.push(witness.clone());
    let kv = kronecker_dense(&kdata)?;
    if !kv.dense {
        return Err(step(format!("kronecker step: {}", kv.reason.unwrap_or_default())));
    }

    if decide_separation(&cur).map_err(|e| step(e.to_string()))?.separated {
        return Err(step("perturbed tuple is separated"));
    }
    if !distance_ok(tuple, &cur, epsilon) {
        return Err(step("perturbation exceeded epsilon"));
    }
    let mut values = vec![Scalar::one()];
    values.extend(witness.iter().cloned());
    Ok(HmnDensified {
        tuple: cur,
        case,
        phi,
        normal,
        z: nf.z,
        basis: nf.basis,
        z_prime: nf.z_prime,
        word,
        lattice: lattice.clone(),
        shift,
        witness,
        projection: ProjectionCertificate {
            p0,
            basis: pbasis,
            determinants: dets,
        },
        certificate: DensityCertificate {
            kind: CertificateKind::HmnPipeline,
            basis_elements: lattice,
            independent_values: values,
            audit,
        },
    })
}

/// Re-derives every claim of an `H_mn` certificate from the output tuple.
pub fn verify_hmn(original: &[GroupElement], out: &HmnDensified, epsilon: f64) -> Result<(), String> {
    let err = |e: DensityError| e.to_string();
    if original.len() != out.tuple.len() || !distance_ok(original, &out.tuple, epsilon) {
        return Err("output is not within epsilon of the input".into());
    }
    if decide_separation(&out.tuple).map_err(|e| e.to_string())?.separated {
        return Err("output is separated".into());
    }
    let normal = out.phi.apply_all(&out.tuple).map_err(|e| e.to_string())?;
    let n = out.basis.len();
    let z = &normal[out.z];
    if !(z.a_mult.compare(&Scalar::one()) == Ordering::Greater && z.b.iter().all(Scalar::is_zero)) {
        return Err("z is not (x, a > 1, 0) in normal form".into());
    }
    for (i, &k) in out.basis.iter().enumerate() {
        let c = &normal[k].a_mult;
        let d = (&Scalar::one() - c).abs();
        if c.is_one() || normal[k].b != unit(n, i).iter().map(|u| u.mul_or_demote(&d)).collect::<Vec<_>>() {
            return Err(format!("basis element {k} is not |1 - c| e_{}", i + 1));
        }
    }
    match (out.case, out.z_prime) {
        (PipelineCase::One, Some(k)) => {
            if !(below_one(&normal[k].a_mult) && normal[k].b.iter().all(Scalar::is_zero)) {
                return Err("z' is not (x, a < 1, 0)".into());
            }
        }
        (PipelineCase::Two, _) => {
            if !below_one(&normal[out.basis[0]].a_mult) {
                return Err("case 2 needs c_1 < 1".into());
            }
        }
        _ => return Err("case 1 without z'".into()),
    }
    let zpp = word_product(&normal, &out.word).map_err(err)?;
    if !good_word(&zpp) {
        return Err("z'' does not have c < 1 and b < 0".into());
    }
    for ((z0, z1, expected), got) in lattice_pairs(&normal, out.case, out.z, &out.basis, out.z_prime)
        .iter()
        .zip(&out.lattice)
    {
        if expected != got || limit_of(&normal, &normal[*z0], &normal[*z1]).map_err(err)? != *got {
            return Err("lattice vector does not match its limit".into());
        }
    }
    let w = limit_of(&normal, &zpp, &normal[out.z]).map_err(err)?;
    let alpha = apply_rational(&lattice_inverse(&out.lattice).map_err(err)?, &w);
    let witness: Vec<Scalar> = alpha
        .iter()
        .zip(&out.shift)
        .map(|(x, k)| x - &Scalar::rational(BigRational::from_integer(k.clone())))
        .collect();
    if witness != out.witness {
        return Err("witness does not match the limit of z''".into());
    }
    let mut kdata: Vec<Vec<Scalar>> = (0..n).map(|i| unit(n, i)).collect();
    kdata.push(witness);
    if !kronecker_dense(&kdata).map_err(err)?.dense {
        return Err("Kronecker test fails on the witness".into());
    }
    let pc = &out.projection;
    let dets = projection_determinants(&out.tuple, pc.p0, &pc.basis).ok_or("projection entries outside the certificate algebra")?;
    if dets != pc.determinants || dets[0].is_zero() || !certalg::independent(&dets, false) {
        return Err("projection determinants are not Q-independent".into());
    }
    Ok(())
}
