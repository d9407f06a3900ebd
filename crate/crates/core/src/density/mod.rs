//! Density certificates.
//!
//! A finite set `S` of `R^n` generates a dense additive semigroup when it
//! contains the standard basis and some `v` with all coordinates negative such
//! that `{1, v_1, ..., v_n}` is Z-independent. [`kronecker_dense`] checks this
//! exactly; [`densify_euclidean`] and [`densify_hmn`] move a nonseparated
//! tuple by at most `epsilon` to one carrying such a certificate.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::automorphisms::{AuditStep, AutomorphismError};
use crate::linalg;
use crate::lp::{maximize, LpOutcome};
use crate::scalar::{fresh_symbols, rationalize, Scalar, ScalarError, Symbol};
use crate::separation::euclidean_nonseparated;

mod generators;
mod hmn;

pub use generators::{construct_minimal_generators, minimal_count, GenerationMode, GeneratorSpec, GroupKind};

pub use hmn::{densify_hmn, verify_hmn, HmnDensified, PipelineCase, ProjectionCertificate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("exact input required: binary64 coordinates admit no exact certificate")]
    FloatInput,
    #[error("vectors have mixed or zero dimension")]
    Shape,
    #[error("epsilon must be positive and finite")]
    BadEpsilon,
    #[error("input is separated")]
    Separated,
    #[error("{step}")]
    Step { step: String },
    #[error(transparent)]
    Automorphism(#[from] AutomorphismError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Group(#[from] crate::group::GroupError),
}

pub(crate) fn step(s: impl Into<String>) -> DensityError {
    DensityError::Step { step: s.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    KroneckerEuclidean,
    HmnPipeline,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::KroneckerEuclidean => "kronecker-euclidean",
            CertificateKind::HmnPipeline => "hmn-pipeline",
        })
    }
}

/// Witnesses for [`kronecker_dense`]: `basis[i]` is the index of `e_i`,
/// `witness` the index of the all-negative vector.
#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerCertificate {
    pub basis: Vec<usize>,
    pub witness: usize,
    /// `1, v_1, ..., v_n`.
    pub independent_values: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerVerdict {
    pub dense: bool,
    pub certificate: Option<KroneckerCertificate>,
    /// Why the test failed, when it did.
    pub reason: Option<String>,
}

fn check_dims(s: &[Vec<Scalar>]) -> Result<usize, DensityError> {
    let n = s.first().map_or(0, Vec::len);
    if n == 0 || s.iter().any(|v| v.len() != n) {
        return Err(DensityError::Shape);
    }
    Ok(n)
}

fn unit_index(s: &[Vec<Scalar>], i: usize) -> Option<usize> {
    s.iter().position(|v| {
        v.iter()
            .enumerate()
            .all(|(j, x)| if j == i { x.is_one() } else { x.is_zero() })
    })
}

/// Exact Kronecker test on a finite subset of `R^n`.
pub fn kronecker_dense(s: &[Vec<Scalar>]) -> Result<KroneckerVerdict, DensityError> {
    let n = check_dims(s)?;
    if s.iter().flatten().any(|x| !x.is_exact()) {
        return Err(DensityError::FloatInput);
    }
    let fail = |r: String| KroneckerVerdict {
        dense: false,
        certificate: None,
        reason: Some(r),
    };
    let mut basis = Vec::with_capacity(n);
    for i in 0..n {
        match unit_index(s, i) {
            Some(k) => basis.push(k),
            None => return Ok(fail(format!("standard basis vector e_{} missing", i + 1))),
        }
    }
    let mut negative = false;
    for (k, v) in s.iter().enumerate() {
        if !v.iter().all(Scalar::is_negative) {
            continue;
        }
        negative = true;
        if crate::scalar::z_linearly_independent(v, true)? {
            let mut values = vec![Scalar::one()];
            values.extend(v.iter().cloned());
            return Ok(KroneckerVerdict {
                dense: true,
                certificate: Some(KroneckerCertificate {
                    basis,
                    witness: k,
                    independent_values: values,
                }),
                reason: None,
            });
        }
    }
    Ok(fail(if negative {
        "every all-negative vector has coordinates Z-dependent with 1".into()
    } else {
        "no vector with all coordinates negative".into()
    }))
}

/// Fraction of the `cells^n` grid cells of the torus visited by
/// `t v mod 1` for `t = 1..=t_max`.
pub fn torus_coverage(v: &[f64], t_max: u64, cells: usize) -> f64 {
    let n = v.len();
    let total = cells.pow(n as u32);
    let mut seen = vec![false; total];
    let mut hit = 0usize;
    let mut x = vec![0.0f64; n];
    for t in 1..=t_max {
        let mut idx = 0usize;
        for (i, xi) in x.iter_mut().enumerate() {
            // recompute from t to avoid drift
            *xi = (t as f64 * v[i]).rem_euclid(1.0);
            let c = ((*xi * cells as f64) as usize).min(cells - 1);
            idx = idx * cells + c;
        }
        if !seen[idx] {
            seen[idx] = true;
            hit += 1;
            if hit == total {
                break;
            }
        }
    }
    hit as f64 / total as f64
}

/// A certificate for a densified tuple.
///
/// `basis_elements` are the coordinates in which the Kronecker data are
/// stated (the columns of the change of basis, or the limit vectors of the
/// pipeline); `independent_values` are `1, v_1, ..., v_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityCertificate {
    pub kind: CertificateKind,
    pub basis_elements: Vec<Vec<Scalar>>,
    pub independent_values: Vec<Scalar>,
    pub audit: Vec<AuditStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EuclideanDensified {
    pub tuple: Vec<Vec<Scalar>>,
    /// Change of basis `A`: the tuple in `A^{-1}` coordinates contains the
    /// standard basis.
    pub change_of_basis: Vec<Vec<BigRational>>,
    /// Nonnegative integer word `k` with `sum k_j A^{-1} s_j` all negative.
    pub word: Vec<u64>,
    pub certificate: DensityCertificate,
}

fn rational_matrix(cols: &[Vec<Scalar>]) -> Option<Vec<Vec<BigRational>>> {
    // rows indexed by coordinate
    let n = cols.first()?.len();
    (0..n)
        .map(|r| cols.iter().map(|c| c[r].as_rational()).collect())
        .collect()
}

/// `A^{-1} s` for a rational `A^{-1}` and an exact vector.
pub(crate) fn apply_rational(m: &[Vec<BigRational>], s: &[Scalar]) -> Vec<Scalar> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(s)
                .fold(Scalar::zero(), |acc, (q, x)| &acc + &x.mul_rational(q))
        })
        .collect()
}

/// Digits `d` with `10^-d <= bound`.
pub(crate) fn digits_for(bound: f64) -> u32 {
    let mut d = 1;
    while 10f64.powi(-(d as i32)) > bound && d < 30 {
        d += 1;
    }
    d
}

/// Largest `p / 10^d` not above `x`, for `x > 0`.
pub(crate) fn rational_below(x: f64) -> BigRational {
    let d = digits_for(x / 10.0);
    let scale = 10f64.powi(d as i32);
    let numer = BigInt::from((x * scale).floor() as i128);
    BigRational::new(numer, num_traits::pow::Pow::pow(BigInt::from(10), d))
}

/// Replaces every coordinate that is not rational by a rational within `bound`.
pub(crate) fn rationalize_coordinate(x: &Scalar, bound: f64) -> Scalar {
    if x.is_rational() {
        x.clone()
    } else {
        Scalar::rational(rationalize(x.evaluate(), digits_for(bound / 2.0)))
    }
}

fn all_symbols(s: &[Vec<Scalar>]) -> BTreeSet<Symbol> {
    s.iter().flatten().flat_map(Scalar::symbols).collect()
}

/// Greedy choice of `n` linearly independent columns.
fn independent_columns(t: &[Vec<BigRational>], n: usize) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    for (j, col) in t.iter().enumerate() {
        let mut rows: Vec<Vec<BigRational>> = chosen.iter().map(|&k| t[k].clone()).collect();
        rows.push(col.clone());
        if linalg::rank(&rows) == rows.len() {
            chosen.push(j);
            if chosen.len() == n {
                return Some(chosen);
            }
        }
    }
    None
}

/// Smallest nonnegative integer word `k` with `sum k_j t_j` all negative,
/// obtained by rounding up a scaled LP solution of `sum mu_j t_j = -1`.
pub(crate) fn negative_word(t: &[Vec<BigRational>]) -> Option<Vec<u64>> {
    let n = t.first()?.len();
    let a: Vec<Vec<BigRational>> = (0..n).map(|r| t.iter().map(|c| c[r].clone()).collect()).collect();
    let b = vec![-BigRational::one(); n];
    let c = vec![-BigRational::one(); t.len()];
    let mu = match maximize(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => x,
        _ => return None,
    };
    let mut scale = BigRational::one();
    for _ in 0..64 {
        let k: Vec<BigInt> = mu.iter().map(|m| (m * &scale).ceil().to_integer()).collect();
        let sum: Vec<BigRational> = (0..n)
            .map(|r| {
                t.iter()
                    .zip(&k)
                    .fold(BigRational::zero(), |acc, (col, kj)| acc + &col[r] * BigRational::from_integer(kj.clone()))
            })
            .collect();
        if sum.iter().all(|x| x.is_negative()) {
            return k.iter().map(|x| x.to_u64()).collect();
        }
        scale *= BigRational::from_integer(2.into());
    }
    None
}

/// Moves a nonseparated tuple of `R^n` by at most `epsilon` per coordinate
/// to one whose additive semigroup is dense, with a Kronecker certificate.
pub fn densify_euclidean(tuple: &[Vec<Scalar>], epsilon: f64) -> Result<EuclideanDensified, DensityError> {
    let n = check_dims(tuple)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(DensityError::BadEpsilon);
    }
    if tuple.iter().flatten().all(Scalar::is_exact) {
        let v = kronecker_dense(tuple)?;
        if let Some(cert) = v.certificate {
            return Ok(EuclideanDensified {
                tuple: tuple.to_vec(),
                change_of_basis: linalg::identity(n),
                word: (0..tuple.len()).map(|j| u64::from(j == cert.witness)).collect(),
                certificate: DensityCertificate {
                    kind: CertificateKind::KroneckerEuclidean,
                    basis_elements: cert.basis.iter().map(|&k| tuple[k].clone()).collect(),
                    independent_values: cert.independent_values,
                    audit: vec![AuditStep::Note("input already certified: no perturbation".into())],
                },
            });
        }
    }
    if !euclidean_nonseparated(tuple) {
        return Err(DensityError::Separated);
    }
    let mut audit = Vec::new();
    let mut cur: Vec<Vec<Scalar>> = tuple
        .iter()
        .map(|v| v.iter().map(|x| rationalize_coordinate(x, epsilon / 4.0)).collect())
        .collect();
    if cur != tuple {
        audit.push(AuditStep::Note(format!("rationalized coordinates within {}", epsilon / 4.0)));
        if !euclidean_nonseparated(&cur) {
            return Err(step("rationalization separated the tuple; use a smaller epsilon"));
        }
    }
    let q: Vec<Vec<BigRational>> = cur
        .iter()
        .map(|v| v.iter().map(|x| x.as_rational().expect("rationalized")).collect())
        .collect();
    let basis = independent_columns(&q, n).ok_or_else(|| step("tuple does not span R^n"))?;
    let a_cols: Vec<Vec<Scalar>> = basis.iter().map(|&k| cur[k].clone()).collect();
    let a = rational_matrix(&a_cols).expect("rational");
    let a_inv = linalg::inverse(&a).expect("independent columns");
    let t: Vec<Vec<BigRational>> = q.iter().map(|s| linalg::mat_vec(&a_inv, s)).collect();
    audit.push(AuditStep::Note(format!(
        "change of basis to elements {:?} as standard basis",
        basis
    )));
    let word = negative_word(&t).ok_or_else(|| step("no nonnegative word with all-negative sum"))?;
    let star = (0..t.len())
        .find(|j| !basis.contains(j) && word[*j] >= 1)
        .ok_or_else(|| step("all-negative word uses only basis elements"))?;
    audit.push(AuditStep::Note(format!("all-negative word {word:?}; perturbing element {star}")));

    // perturb t_star by eta = -eps' (sqrt p_1, ..., sqrt p_n); s_star moves by A eta
    let fresh = fresh_symbols(n, &all_symbols(&cur));
    let a_norm = a
        .iter()
        .map(|r| r.iter().map(|x| x.abs().to_f64().unwrap_or(f64::MAX)).sum::<f64>())
        .fold(0.0, f64::max);
    let root_max = fresh.iter().map(|s| s.approx()).fold(0.0, f64::max);
    let eps_prime = rational_below(epsilon / (2.0 * a_norm * root_max));
    let eta: Vec<Scalar> = fresh
        .iter()
        .map(|sym| Scalar::term(-eps_prime.clone(), *sym))
        .collect();
    let shift = apply_rational(&a, &eta);
    let before = cur[star].clone();
    cur[star] = cur[star].iter().zip(&shift).map(|(x, d)| x + d).collect();
    audit.push(AuditStep::Note(format!(
        "element {star}: ({}) -> ({})",
        join(&before),
        join(&cur[star])
    )));

    let transformed: Vec<Vec<Scalar>> = cur.iter().map(|s| apply_rational(&a_inv, s)).collect();
    let v = word_sum(&transformed, &word);
    let mut with_v = transformed.clone();
    with_v.push(v.clone());
    let verdict = kronecker_dense(&with_v)?;
    if !verdict.dense {
        return Err(step(verdict.reason.unwrap_or_default()));
    }
    let mut values = vec![Scalar::one()];
    values.extend(v);
    Ok(EuclideanDensified {
        tuple: cur,
        change_of_basis: a,
        word,
        certificate: DensityCertificate {
            kind: CertificateKind::KroneckerEuclidean,
            basis_elements: a_cols,
            independent_values: values,
            audit,
        },
    })
}

pub(crate) fn join(v: &[Scalar]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn word_sum(t: &[Vec<Scalar>], word: &[u64]) -> Vec<Scalar> {
    let n = t[0].len();
    (0..n)
        .map(|r| {
            t.iter().zip(word).fold(Scalar::zero(), |acc, (col, k)| {
                &acc + &col[r].mul_rational(&BigRational::from_integer((*k).into()))
            })
        })
        .collect()
}

/// Re-derives a Euclidean certificate from scratch.
pub fn verify_euclidean(original: &[Vec<Scalar>], out: &EuclideanDensified, epsilon: f64) -> Result<(), String> {
    if original.len() != out.tuple.len() {
        return Err("tuple length changed".into());
    }
    for (x, y) in original.iter().zip(&out.tuple) {
        for (p, q) in x.iter().zip(y) {
            if (p.evaluate() - q.evaluate()).abs() > epsilon {
                return Err(format!("coordinate moved by more than {epsilon}"));
            }
        }
    }
    let a_inv = linalg::inverse(&out.change_of_basis).ok_or("change of basis is singular")?;
    let t: Vec<Vec<Scalar>> = out.tuple.iter().map(|s| apply_rational(&a_inv, s)).collect();
    let v = word_sum(&t, &out.word);
    if !v.iter().all(Scalar::is_negative) {
        return Err("word sum is not all negative".into());
    }
    let mut with_v = t;
    with_v.push(v.clone());
    let verdict = kronecker_dense(&with_v).map_err(|e| e.to_string())?;
    if !verdict.dense {
        return Err(verdict.reason.unwrap_or_default());
    }
    let mut expected = vec![Scalar::one()];
    expected.extend(v);
    if out.certificate.independent_values != expected {
        return Err("certificate values do not match the word sum".into());
    }
    if !crate::scalar::z_linearly_independent(&expected, false).map_err(|e| e.to_string())? {
        return Err("certificate values are dependent".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> Scalar {
        t.parse().unwrap()
    }

    fn vecs(rows: &[&[&str]]) -> Vec<Vec<Scalar>> {
        rows.iter().map(|r| r.iter().map(|x| s(x)).collect()).collect()
    }

    fn sqrt(p: u64) {
        Symbol::sqrt_prime(p);
    }

    #[test]
    fn kronecker_examples() {
        sqrt(2);
        sqrt(3);
        let v = kronecker_dense(&vecs(&[&["1"], &["-sqrt2"]])).unwrap();
        assert!(v.dense);
        assert_eq!(v.certificate.unwrap().witness, 1);
        let v = kronecker_dense(&vecs(&[&["1"], &["-1"]])).unwrap();
        assert!(!v.dense);
        let v = kronecker_dense(&vecs(&[&["1", "0"], &["0", "1"], &["-sqrt2", "-sqrt3"]])).unwrap();
        assert!(v.dense);
        // sqrt2 and 2 sqrt2 are dependent
        let v = kronecker_dense(&vecs(&[&["1", "0"], &["0", "1"], &["-sqrt2", "-2*sqrt2"]])).unwrap();
        assert!(!v.dense);
        let v = kronecker_dense(&vecs(&[&["0", "1"], &["-sqrt2", "-sqrt3"]])).unwrap();
        assert!(!v.dense);
        assert_eq!(kronecker_dense(&[vec![Scalar::Float(1.0)]]), Err(DensityError::FloatInput));
    }

    #[test]
    fn torus_coverage_rational_stalls() {
        assert_eq!(torus_coverage(&[-2f64.sqrt()], 100_000, 10), 1.0);
        assert!(torus_coverage(&[-0.5], 100_000, 10) <= 0.2);
    }

    #[test]
    fn euclidean_one_dimensional() {
        let tuple = vecs(&[&["1"], &["-1"]]);
        let out = densify_euclidean(&tuple, 1e-3).unwrap();
        assert_eq!(out.tuple[0], vec![s("1")]);
        assert!(!out.tuple[1][0].is_rational());
        assert!((out.tuple[1][0].evaluate() + 1.0).abs() <= 1e-3);
        assert!(out.tuple[1][0].evaluate() < -1.0);
        verify_euclidean(&tuple, &out, 1e-3).unwrap();
    }

    #[test]
    fn euclidean_unchanged_and_separated() {
        sqrt(2);
        let tuple = vecs(&[&["1"], &["-sqrt2"]]);
        let out = densify_euclidean(&tuple, 1e-3).unwrap();
        assert_eq!(out.tuple, tuple);
        assert_eq!(densify_euclidean(&vecs(&[&["1"], &["2"]]), 1e-3), Err(DensityError::Separated));
    }

    #[test]
    fn euclidean_general_basis() {
        let tuple = vecs(&[&["2", "1"], &["-1", "3"], &["-1", "-5"], &["1/3", "1/7"]]);
        let out = densify_euclidean(&tuple, 1e-2).unwrap();
        verify_euclidean(&tuple, &out, 1e-2).unwrap();
        assert!(out.certificate.independent_values.len() == 3);
    }
}
