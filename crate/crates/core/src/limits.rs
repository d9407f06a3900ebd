//! Limits of products of powers `z0^t0 z1^t1 ... z^t`.
//!
//! When `a_mult(z0) < 1 < a_mult(z)` and the projected set surrounds the
//! origin, suitable integer exponents drive the product to
//! `(0, 1, b0 / (1 - a0) + b / (a - 1))`. [`realize_limit`] finds such
//! exponents by scanning for times `t` at which `t * alpha` is close to an
//! integer vector.

use std::cmp::Ordering;
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use thiserror::Error;

use crate::group::{expm1_ratio, GroupElement};
use crate::lp::{maximize, LpOutcome};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("z0 requires a_mult < 1")]
    Z0NotContracting,
    #[error("z requires a_mult > 1")]
    ZNotExpanding,
    #[error("elements have mixed shapes")]
    Shape,
    #[error("projection is separated: no positive weights balance the projected elements")]
    Separated,
    #[error("weights must be positive and match the number of factors ({0})")]
    BadWeights(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitRequest {
    pub set: Vec<GroupElement>,
    pub z0: GroupElement,
    pub z: GroupElement,
}

impl LimitRequest {
    fn check(&self) -> Result<(), LimitError> {
        let shape = self.z0.shape();
        if self.z.shape() != shape || self.set.iter().any(|x| x.shape() != shape) {
            return Err(LimitError::Shape);
        }
        if self.z0.a_mult.compare(&Scalar::one()) != Ordering::Less {
            return Err(LimitError::Z0NotContracting);
        }
        if self.z.a_mult.compare(&Scalar::one()) != Ordering::Greater {
            return Err(LimitError::ZNotExpanding);
        }
        Ok(())
    }
}

/// `(0, 1, b0 / (1 - a0) + b / (a - 1))`, exact whenever the divisions are.
pub fn limit_element(req: &LimitRequest) -> Result<GroupElement, LimitError> {
    req.check()?;
    let one = Scalar::one();
    let d0 = &one - &req.z0.a_mult;
    let d1 = &req.z.a_mult - &one;
    let part = |y: &Scalar, d: &Scalar| {
        y.div(d)
            .unwrap_or_else(|_| Scalar::Float(y.evaluate() / d.evaluate()))
    };
    let b = req
        .z0
        .b
        .iter()
        .zip(&req.z.b)
        .map(|(p, q)| &part(p, &d0) + &part(q, &d1))
        .collect();
    Ok(GroupElement {
        v: vec![Scalar::zero(); req.z0.v.len()],
        a_mult: Scalar::one(),
        b,
    })
}

/// `x_0^t_0 ... x_k^t_k` in binary64, accumulating `ln a_mult` so that large
/// exponents neither overflow nor cancel.
pub fn product_of_powers(factors: &[GroupElement], exponents: &[i64]) -> GroupElement {
    let m1 = factors[0].v.len();
    let n = factors[0].b.len();
    let mut v = vec![0.0; m1];
    let mut b = vec![0.0; n];
    let mut log_prefix: f64 = 0.0;
    for (x, &t) in factors.iter().zip(exponents) {
        let (xv, xa, xb) = x.evaluate();
        let la = xa.ln();
        let tf = t as f64;
        // (1 - a^t) / (1 - a), computed through expm1 ratios; equals t at a = 1
        let frac = if la == 0.0 { tf } else { tf * expm1_ratio(tf * la) / expm1_ratio(la) };
        let k = log_prefix.exp() * frac;
        for (acc, y) in b.iter_mut().zip(&xb) {
            *acc += k * y;
        }
        for (acc, y) in v.iter_mut().zip(&xv) {
            *acc += tf * y;
        }
        log_prefix += tf * la;
    }
    GroupElement {
        v: v.into_iter().map(Scalar::Float).collect(),
        a_mult: Scalar::Float(log_prefix.exp()),
        b: b.into_iter().map(Scalar::Float).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub t: u64,
    pub exponents: Vec<i64>,
    pub element: GroupElement,
    /// Max-abs distance to the target.
    pub distance: f64,
    /// Max distance of `t * alpha` to the integer lattice.
    pub torus: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTrace {
    pub target: GroupElement,
    /// Factors in product order: `z0`, the middle elements, `z`.
    pub factors: Vec<GroupElement>,
    pub weights: Vec<f64>,
    pub steps: Vec<TraceStep>,
    pub complete: bool,
}

impl ConvergenceTrace {
    pub fn achieved(&self) -> f64 {
        self.steps.last().map_or(f64::INFINITY, |s| s.distance)
    }

    /// CSV with columns `t`, the coordinates of each recorded product and `distance`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m1 = self.target.v.len();
        let n = self.target.b.len();
        let mut header = vec!["t".to_string()];
        header.extend((1..=m1).map(|i| format!("v{i}")));
        header.push("a_mult".into());
        header.extend((1..=n).map(|i| format!("b{i}")));
        header.push("distance".into());
        writeln!(w, "{}", header.join(","))?;
        for s in &self.steps {
            let coords: Vec<String> = s.element.flat().iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{},{},{:e}", s.t, coords.join(","), s.distance)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LimitOptions<'a> {
    pub tol: f64,
    pub max_t: u64,
    /// Lower bound on the balancing weights before rescaling.
    pub delta: f64,
    /// Fixed weights in product order, bypassing the weight LP.
    pub weights: Option<Vec<f64>>,
    pub cancel: Option<&'a AtomicBool>,
}

impl Default for LimitOptions<'_> {
    fn default() -> Self {
        LimitOptions {
            tol: 1e-9,
            max_t: 1_000_000,
            delta: 1e-3,
            weights: None,
            cancel: None,
        }
    }
}

/// Orders the middle elements by nondecreasing `ln a_mult`.
fn product_order(req: &LimitRequest) -> Vec<GroupElement> {
    let mut mid = req.set.clone();
    mid.sort_by(|x, y| x.a_mult.evaluate().partial_cmp(&y.a_mult.evaluate()).unwrap_or(Ordering::Equal));
    let mut out = vec![req.z0.clone()];
    out.extend(mid);
    out.push(req.z.clone());
    out
}

/// Weights `alpha >= 0` with `sum alpha_i pi(x_i) = 0`, first and last at
/// least `delta`, minimizing the total, then scaled so the smallest positive
/// weight is 1. Weights within 1e-9 of a simple fraction are snapped to it.
fn balancing_weights(factors: &[GroupElement], delta: f64) -> Result<Vec<f64>, LimitError> {
    let k = factors.len();
    let pts: Vec<Vec<f64>> = factors.iter().map(GroupElement::projection).collect();
    let dim = pts[0].len();
    // alpha_0 = delta + x_0, alpha_last = delta + x_last, others x_i
    let mut a = Vec::new();
    let mut b = Vec::new();
    for d in 0..dim {
        a.push((0..k).map(|i| pts[i][d]).collect::<Vec<_>>());
        b.push(-delta * (pts[0][d] + pts[k - 1][d]));
    }
    let c = vec![-1.0; k];
    let x = match maximize(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => x,
        _ => return Err(LimitError::Separated),
    };
    let mut alpha: Vec<f64> = x;
    alpha[0] += delta;
    alpha[k - 1] += delta;
    let min = alpha.iter().copied().filter(|w| *w > 1e-12).fold(f64::INFINITY, f64::min);
    Ok(alpha
        .into_iter()
        .map(|w| if w > 1e-12 { snap(w / min) } else { 0.0 })
        .collect())
}

fn snap(x: f64) -> f64 {
    for q in 1..=1000u32 {
        let p = (x * q as f64).round();
        if (x * q as f64 - p).abs() < 1e-9 * q as f64 {
            return p / q as f64;
        }
    }
    x
}

fn torus_distance(t: u64, weights: &[f64]) -> (f64, Vec<i64>) {
    let mut worst: f64 = 0.0;
    let ex = weights
        .iter()
        .map(|w| {
            let x = t as f64 * w;
            let r = x.round();
            worst = worst.max((x - r).abs());
            r as i64
        })
        .collect();
    (worst, ex)
}

pub fn realize_limit(req: &LimitRequest, tol: f64, max_t: u64) -> Result<ConvergenceTrace, LimitError> {
    realize_limit_with(
        req,
        &LimitOptions {
            tol,
            max_t,
            ..LimitOptions::default()
        },
    )
}

pub fn realize_limit_with(req: &LimitRequest, opts: &LimitOptions<'_>) -> Result<ConvergenceTrace, LimitError> {
    let target = limit_element(req)?;
    let factors = product_order(req);
    let weights = match &opts.weights {
        Some(w) => {
            if w.len() != factors.len() || w.iter().any(|x| x.is_nan() || *x < 0.0) || w[0] <= 0.0 || w[w.len() - 1] <= 0.0 {
                return Err(LimitError::BadWeights(factors.len()));
            }
            w.clone()
        }
        None => balancing_weights(&factors, opts.delta)?,
    };
    let mut steps = Vec::new();
    let mut best = f64::INFINITY;
    let mut complete = false;
    for t in 1..=opts.max_t {
        if let Some(flag) = opts.cancel {
            if t % 1024 == 0 && flag.load(AtomicOrdering::Relaxed) {
                break;
            }
        }
        let (torus, exponents) = torus_distance(t, &weights);
        if torus > best {
            continue;
        }
        best = torus;
        let element = product_of_powers(&factors, &exponents);
        let distance = element.distance(&target);
        steps.push(TraceStep {
            t,
            exponents,
            element,
            distance,
            torus,
        });
        if distance < opts.tol {
            complete = true;
            break;
        }
    }
    Ok(ConvergenceTrace {
        target,
        factors,
        weights,
        steps,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(a: &str, y: &str) -> GroupElement {
        GroupElement::g1(a.parse().unwrap(), y.parse().unwrap())
    }

    fn worked() -> LimitRequest {
        LimitRequest {
            set: vec![],
            z0: g1("1/2", "1"),
            z: g1("2", "1"),
        }
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(limit_element(&worked()).unwrap(), g1("1", "3"));
        let req = LimitRequest {
            set: vec![],
            z0: g1("1/2", "0"),
            z: g1("2", "0"),
        };
        assert!(limit_element(&req).unwrap().is_identity());
        let bad = LimitRequest {
            set: vec![],
            z0: g1("2", "1"),
            z: g1("2", "1"),
        };
        assert_eq!(limit_element(&bad), Err(LimitError::Z0NotContracting));
    }

    #[test]
    fn worked_trace() {
        let trace = realize_limit(&worked(), 1e-6, 1_000_000).unwrap();
        assert!(trace.complete);
        assert_eq!(trace.weights, vec![1.0, 1.0]);
        assert_eq!(trace.steps.last().unwrap().t, 22);
        let s10 = &trace.steps[9];
        assert_eq!(s10.t, 10);
        assert!((s10.element.b[0].evaluate() - 2.9970703125).abs() < 1e-12);
        for s in &trace.steps {
            let want = 3.0 - 3.0 * 2f64.powi(-(s.t as i32));
            assert!((s.element.b[0].evaluate() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn irrational_ratio_converges() {
        // ln a0 = -sqrt2 * ln a, so alpha = (1, sqrt2)
        let a = 2f64;
        let z0 = GroupElement::g1(Scalar::Float(a.powf(-std::f64::consts::SQRT_2)), Scalar::one());
        let req = LimitRequest {
            set: vec![],
            z0,
            z: g1("2", "1"),
        };
        let trace = realize_limit(&req, 1e-6, 1_000_000).unwrap();
        assert!(trace.complete, "achieved {}", trace.achieved());
    }

    #[test]
    fn product_of_powers_matches_exact() {
        let xs = [g1("1/2", "3"), g1("1", "2"), g1("3", "-1")];
        let ex = [4, 3, 2];
        let mut exact = xs[0].power(4);
        exact = exact.product(&xs[1].power(3)).unwrap();
        exact = exact.product(&xs[2].power(2)).unwrap();
        assert!(product_of_powers(&xs, &ex).distance(&exact) < 1e-12);
    }

    #[test]
    fn csv_export() {
        let trace = realize_limit(&worked(), 1e-2, 100).unwrap();
        let mut out = Vec::new();
        trace.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,a_mult,b1,distance\n1,"));
    }

    #[test]
    fn cancellation_stops_scan() {
        let flag = AtomicBool::new(true);
        let opts = LimitOptions {
            tol: 0.0,
            max_t: 10_000,
            cancel: Some(&flag),
            ..LimitOptions::default()
        };
        let trace = realize_limit_with(&worked(), &opts).unwrap();
        assert!(!trace.complete);
        assert!(trace.steps.len() < 10_000);
    }
}
