//! Minimal generating sets of `G_n` and `H_mn`, as closed semigroups and as
//! closed groups.
//!
//! Free parameters: `a_i = 1/2` where a contracting multiplier is needed,
//! `a = 2` where an expanding one is needed. The all-negative vector is
//! `v = -(1 + sigma / 100) * (sum of the basis) - k * pi(z)` with `sigma` a
//! fresh square root and `k >= m` the least integer making `v_m < 0`.

use std::collections::BTreeSet;
use std::fmt;

use crate::group::{GroupElement, GroupError, GroupShape};
use crate::scalar::{fresh_symbols, Scalar, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Gn,
    Hmn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerationMode {
    ClosedSemigroup,
    ClosedGroup,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Gn => "Gn",
            GroupKind::Hmn => "Hmn",
        })
    }
}

impl fmt::Display for GenerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenerationMode::ClosedSemigroup => "closed-semigroup",
            GenerationMode::ClosedGroup => "closed-group",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub group: GroupKind,
    pub m: usize,
    pub n: usize,
    pub mode: GenerationMode,
    pub elements: Vec<GroupElement>,
    /// Which construction produced the set.
    pub construction: String,
}

/// Smallest size of a generating set. For `G_n`, `m` is ignored.
pub fn minimal_count(group: GroupKind, m: usize, n: usize, mode: GenerationMode) -> usize {
    match (group, mode) {
        (GroupKind::Gn, GenerationMode::ClosedSemigroup) => n + 2,
        (GroupKind::Gn, GenerationMode::ClosedGroup) => n + 1,
        (GroupKind::Hmn, GenerationMode::ClosedSemigroup) => (n + 2).max(m + 1),
        (GroupKind::Hmn, GenerationMode::ClosedGroup) => (m + 1).max(n + 1),
    }
}

fn sqrt2() -> Symbol {
    Symbol::sqrt_prime(2)
}

fn unit(k: usize, i: usize) -> Vec<Scalar> {
    (0..k).map(|r| if r == i { Scalar::one() } else { Scalar::zero() }).collect()
}

fn scaled_unit(k: usize, i: usize, c: &Scalar) -> Vec<Scalar> {
    (0..k).map(|r| if r == i { c.clone() } else { Scalar::zero() }).collect()
}

fn additive(v: Vec<Scalar>, a: Scalar, b: Vec<Scalar>) -> GroupElement {
    GroupElement::from_additive(v, &a, b)
}

/// The element `(v, e^{v_m}, |1 - e^{v_m}| b_dir)` built from the basis
/// `pi(z_i) = (e_i, ln_i)` for `i < m` and `pi(z) = (0, ln_z)`.
fn negative_element(m: usize, basis_ln: &[f64], ln_z: f64, b_dir: &[f64]) -> GroupElement {
    let sigma = fresh_symbols(1, &[sqrt2()].into_iter().collect::<BTreeSet<_>>())[0];
    let scale = &Scalar::one() + &Scalar::term(crate::scalar::rat(1, 100), sigma);
    let v: Vec<Scalar> = (0..m - 1).map(|_| scale.neg()).collect();
    let sum_ln: f64 = basis_ln.iter().sum::<f64>() + ln_z;
    let mut k = m as f64;
    let last = |k: f64| -scale.evaluate() * sum_ln - k * ln_z;
    while last(k) >= 0.0 {
        k += 1.0;
    }
    let vm = last(k);
    let amp = (1.0 - vm.exp()).abs();
    GroupElement {
        v,
        a_mult: Scalar::Float(vm.exp()),
        b: b_dir.iter().map(|d| Scalar::Float(amp * d)).collect(),
    }
}

fn gn_semigroup(n: usize) -> Vec<GroupElement> {
    let mut s = vec![additive(vec![], Scalar::one(), vec![Scalar::zero(); n])];
    s.extend((0..n).map(|i| additive(vec![], Scalar::zero(), unit(n, i))));
    s.push(additive(vec![], Scalar::symbol(sqrt2()).neg(), vec![Scalar::int(-1); n]));
    s
}

fn gn_group(n: usize) -> Vec<GroupElement> {
    let r2 = Scalar::symbol(sqrt2());
    let coeff = Scalar::Float(2f64.sqrt().exp() - 1.0);
    let mut s = vec![additive(vec![], Scalar::int(-1), vec![Scalar::zero(); n])];
    s.extend((0..n).map(|i| additive(vec![], r2.clone(), scaled_unit(n, i, &coeff))));
    s
}

fn half() -> Scalar {
    Scalar::ratio(1, 2)
}

fn hmn_semigroup(m: usize, n: usize) -> (Vec<GroupElement>, &'static str) {
    let ln_half = 0.5f64.ln();
    let z = GroupElement {
        v: vec![Scalar::zero(); m - 1],
        a_mult: Scalar::int(2),
        b: vec![Scalar::zero(); n],
    };
    let mut s = Vec::new();
    let mut basis_ln = Vec::new();
    let label = if m <= n + 1 {
        for i in 0..m - 1 {
            s.push(GroupElement {
                v: unit(m - 1, i),
                a_mult: half(),
                b: unit(n, i),
            });
            basis_ln.push(ln_half);
        }
        s.push(z);
        for i in m - 1..n {
            s.push(GroupElement {
                v: vec![Scalar::zero(); m - 1],
                a_mult: half(),
                b: scaled_unit(n, i, &half()),
            });
        }
        "semigroup case m <= n + 1"
    } else {
        for i in 0..n {
            s.push(GroupElement {
                v: unit(m - 1, i),
                a_mult: half(),
                b: scaled_unit(n, i, &half()),
            });
            basis_ln.push(ln_half);
        }
        s.push(z);
        for i in n..m - 1 {
            s.push(GroupElement {
                v: unit(m - 1, i),
                a_mult: Scalar::one(),
                b: vec![Scalar::zero(); n],
            });
            basis_ln.push(0.0);
        }
        "semigroup case m > n + 1"
    };
    s.push(negative_element(m, &basis_ln, 2f64.ln(), &vec![-1.0; n]));
    (s, label)
}

fn hmn_group(m: usize, n: usize) -> (Vec<GroupElement>, &'static str) {
    if m > n {
        let (s, _) = hmn_semigroup(m, n);
        return (s, "group case m > n (semigroup set)");
    }
    let r2 = 2f64.sqrt();
    let amp = Scalar::Float((1.0 - (-r2).exp()).abs());
    let a = Scalar::Float((-r2).exp());
    let mut s = vec![GroupElement {
        v: vec![Scalar::zero(); m - 1],
        a_mult: Scalar::Float(1f64.exp()),
        b: vec![Scalar::zero(); n],
    }];
    for i in 0..n - 1 {
        s.push(GroupElement {
            v: if i < m - 1 { unit(m - 1, i) } else { vec![Scalar::zero(); m - 1] },
            a_mult: a.clone(),
            b: scaled_unit(n, i, &amp),
        });
    }
    let basis_ln = vec![-r2; m - 1];
    let mut e_n = vec![0.0; n];
    e_n[n - 1] = 1.0;
    s.push(negative_element(m, &basis_ln, 1.0, &e_n));
    (s, "group case n >= m")
}

/// The explicit generating sets of minimal size.
pub fn construct_minimal_generators(
    group: GroupKind,
    m: usize,
    n: usize,
    mode: GenerationMode,
) -> Result<GeneratorSpec, GroupError> {
    let m = if group == GroupKind::Gn { 1 } else { m };
    GroupShape::new(m, n)?;
    let (elements, construction) = match (group, mode) {
        (GroupKind::Gn, GenerationMode::ClosedSemigroup) => (gn_semigroup(n), "G_n semigroup"),
        (GroupKind::Gn, GenerationMode::ClosedGroup) => (gn_group(n), "G_n group"),
        (GroupKind::Hmn, GenerationMode::ClosedSemigroup) => hmn_semigroup(m, n),
        (GroupKind::Hmn, GenerationMode::ClosedGroup) => hmn_group(m, n),
    };
    debug_assert_eq!(elements.len(), minimal_count(group, m, n, mode));
    Ok(GeneratorSpec {
        group,
        m,
        n,
        mode,
        elements,
        construction: construction.into(),
    })
}

impl GeneratorSpec {
    /// The set whose nonseparation is claimed: `S`, or `S ∪ S^{-1}` for groups.
    pub fn checked_set(&self) -> Vec<GroupElement> {
        let mut s = self.elements.clone();
        if self.mode == GenerationMode::ClosedGroup {
            s.extend(self.elements.iter().map(GroupElement::inverse));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::decide_separation;

    #[test]
    fn counts() {
        assert_eq!(minimal_count(GroupKind::Gn, 1, 3, GenerationMode::ClosedSemigroup), 5);
        assert_eq!(minimal_count(GroupKind::Hmn, 4, 1, GenerationMode::ClosedSemigroup), 5);
        assert_eq!(minimal_count(GroupKind::Hmn, 2, 2, GenerationMode::ClosedGroup), 3);
        assert_eq!(minimal_count(GroupKind::Gn, 1, 3, GenerationMode::ClosedGroup), 4);
    }

    #[test]
    fn g2_semigroup_set() {
        let g = construct_minimal_generators(GroupKind::Gn, 1, 2, GenerationMode::ClosedSemigroup).unwrap();
        assert_eq!(g.elements.len(), 4);
        let logs: Vec<f64> = g.elements.iter().map(|x| x.a_mult.evaluate().ln()).collect();
        let want = [1.0, 0.0, 0.0, -2f64.sqrt()];
        for (l, w) in logs.iter().zip(want) {
            assert!((l - w).abs() < 1e-15);
        }
        assert_eq!(g.elements[3].b, vec![Scalar::int(-1), Scalar::int(-1)]);
        assert_eq!(g.elements[1].b, vec![Scalar::one(), Scalar::zero()]);
    }

    #[test]
    fn g1_group_set() {
        let g = construct_minimal_generators(GroupKind::Gn, 1, 1, GenerationMode::ClosedGroup).unwrap();
        assert_eq!(g.elements.len(), 2);
        assert!((g.elements[0].a_mult.evaluate() - (-1f64).exp()).abs() < 1e-15);
        assert!((g.elements[1].b[0].evaluate() - (2f64.sqrt().exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn all_small_shapes_nonseparated() {
        for m in 1..=3 {
            for n in 1..=3 {
                for mode in [GenerationMode::ClosedSemigroup, GenerationMode::ClosedGroup] {
                    let g = construct_minimal_generators(GroupKind::Hmn, m, n, mode).unwrap();
                    assert_eq!(g.elements.len(), minimal_count(GroupKind::Hmn, m, n, mode));
                    let v = decide_separation(&g.checked_set()).unwrap();
                    assert!(!v.separated, "m = {m}, n = {n}, {mode}");
                }
            }
        }
    }
}
