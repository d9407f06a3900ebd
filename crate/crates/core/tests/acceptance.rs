//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hmn::density::{
    construct_minimal_generators, kronecker_dense, minimal_count, torus_coverage, GenerationMode, GroupKind,
};
use hmn::explorer::{builtin_example, predicate_report, quadrant_witnesses, ModelElement, DEFAULT_PAIR_CAP};
use hmn::group::{AlgebraElement, GroupElement, GroupShape};
use hmn::limits::{limit_element, realize_limit, LimitRequest};
use hmn::scalar::{rat, Scalar, Symbol};
use hmn::separation::{decide_separation, g1_separation_oracle, Quadrant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn small_rational(rng: &mut impl Rng) -> BigRational {
    rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

fn positive_rational(rng: &mut impl Rng) -> BigRational {
    rat(rng.gen_range(1..=7), rng.gen_range(1..=5))
}

fn exact_scalar(rng: &mut impl Rng) -> Scalar {
    let r = Scalar::rational(small_rational(rng));
    if rng.gen_bool(0.3) {
        &r + &Scalar::term(small_rational(rng), Symbol::sqrt_prime(2))
    } else {
        r
    }
}

fn exact_element(rng: &mut impl Rng, shape: GroupShape) -> GroupElement {
    GroupElement {
        v: (0..shape.m - 1).map(|_| exact_scalar(rng)).collect(),
        a_mult: Scalar::rational(positive_rational(rng)),
        b: (0..shape.n).map(|_| exact_scalar(rng)).collect(),
    }
}

fn algebraic_laws() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = 0;
    let shapes = [(1, 1), (2, 2), (3, 1)];
    for &(m, n) in &shapes {
        let shape = GroupShape::new(m, n).unwrap();
        let e = GroupElement::identity(shape);
        for _ in 0..10_000 {
            let x = exact_element(&mut rng, shape);
            let y = exact_element(&mut rng, shape);
            let z = exact_element(&mut rng, shape);
            let assoc = x.product(&y).unwrap().product(&z).unwrap() == x.product(&y.product(&z).unwrap()).unwrap();
            let ident = x.product(&e).unwrap() == x && e.product(&x).unwrap() == x;
            let inv = x.product(&x.inverse()).unwrap().is_identity() && x.inverse().product(&x).unwrap().is_identity();
            let t = rng.gen_range(-6..=6);
            let power = x.power(t) == x.iterated(t).unwrap();
            if !(assoc && ident && inv && power) {
                failures += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 30.0,
        format!("3 x 10^4 instances, {failures} failures, {secs:.1} s (limit 30 s)"),
    )
}

/// `(e^a - 1) / a` by its Taylor series, for `|a| <= 1e-4`.
fn series_ratio(a: f64) -> f64 {
    1.0 + a / 2.0 + a * a / 6.0 + a * a * a / 24.0
}

fn exp_log_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut series_worst: f64 = 0.0;
    let mut small = 0;
    for i in 0..10_000 {
        let a = if i % 2 == 0 {
            small += 1;
            let mag = 10f64.powf(rng.gen_range(-12.0..-4.0));
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        } else {
            rng.gen_range(-5.0..5.0)
        };
        let x = AlgebraElement {
            v: vec![Scalar::Float(rng.gen_range(-3.0..3.0))],
            a: Scalar::Float(a),
            b: (0..2).map(|_| Scalar::Float(rng.gen_range(-3.0..3.0))).collect(),
        };
        let g = x.exp();
        if a.abs() <= 1e-4 {
            for (yb, xb) in g.b.iter().zip(&x.b) {
                let want = xb.evaluate() * series_ratio(a);
                series_worst = series_worst.max((yb.evaluate() - want).abs());
            }
        }
        let back = g.log();
        for (p, q) in back.flat().iter().zip(x.flat()) {
            worst = worst.max((p - q).abs());
        }
    }
    outcome(
        worst < 1e-12 && series_worst < 1e-12,
        format!("10^4 samples ({small} with |a| in [1e-12, 1e-4]), max roundtrip error {worst:e}, max deviation from series {series_worst:e} (limit 1e-12)"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut disagree, mut marginal, mut errors) = (0, 0, 0);
    let total = 10_000;
    for _ in 0..total {
        let k = rng.gen_range(1..=6);
        let set: Vec<GroupElement> = (0..k)
            .map(|_| loop {
                let a = if rng.gen_bool(0.15) { rat(1, 1) } else { positive_rational(&mut rng) };
                let y = if rng.gen_bool(0.15) { rat(0, 1) } else { small_rational(&mut rng) };
                let x = GroupElement::g1(Scalar::rational(a), Scalar::rational(y));
                if !x.is_identity() {
                    break x;
                }
            })
            .collect();
        match (decide_separation(&set), g1_separation_oracle(&set)) {
            (Ok(d), Ok(o)) => {
                if d.marginal || o.marginal {
                    marginal += 1;
                } else if d.separated != o.separated {
                    disagree += 1;
                }
            }
            _ => errors += 1,
        }
    }
    let rate = marginal as f64 / total as f64;
    outcome(
        disagree == 0 && errors == 0 && rate < 0.01,
        format!("10^4 sets, {disagree} disagreements, {errors} errors, marginal rate {:.2}% (limit 1%)", rate * 100.0),
    )
}

fn example_verdicts() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    // generators as printed in the examples; ex31 by its (a, b) samples
    let r3 = Symbol::sqrt_prime(3);
    let r2 = Symbol::sqrt_prime(2);
    let printed: Vec<(&str, Vec<(Scalar, Scalar)>)> = vec![
        (
            "ex32",
            vec![
                (Scalar::ratio(1, 3), Scalar::zero()),
                (Scalar::int(2), Scalar::int(2)),
                (Scalar::int(2), Scalar::int(-2)),
            ],
        ),
        (
            "ex33",
            vec![
                (Scalar::ratio(1, 2), Scalar::zero()),
                (Scalar::int(2), Scalar::symbol(r3)),
                (Scalar::int(2), Scalar::int(-1)),
                (Scalar::one(), Scalar::zero()),
            ],
        ),
    ];
    for id in ["ex31", "ex32", "ex33"] {
        let ex = builtin_example(id).unwrap();
        let as_printed = match printed.iter().find(|(i, _)| *i == id) {
            Some((_, want)) => {
                ex.generators.len() == want.len()
                    && ex.generators.iter().zip(want).all(|(g, (a, y))| g.first() == a && g.b() == [y.clone()])
            }
            None => {
                ex.generators.len() == 6
                    && ex.generators.iter().all(|g| {
                        let x = g.first();
                        (1..=3).any(|a| {
                            (1..=3).any(|b| *x == &Scalar::int(-a) + &Scalar::term(rat(b, 1), r2))
                        })
                    })
            }
        };
        let group: Vec<GroupElement> = ex.generators.iter().map(ModelElement::to_group).collect();
        let verdict = decide_separation(&group).unwrap();
        let report = predicate_report(&ex.generators, &ex.predicate, &ex.excluded, 8, DEFAULT_PAIR_CAP).unwrap();
        let ok = as_printed && !verdict.separated && report.passed() && report.excluded_fails;
        pass &= ok;
        lines.push(format!(
            "{id}: generators as printed {as_printed}, {}, predicate {} on {} elements / {} pairs, excluded inverse fails {}",
            if verdict.separated { "separated" } else { "nonseparated" },
            if report.passed() { "pass" } else { "FAIL" },
            report.elements_checked,
            report.pairs_checked,
            report.excluded_fails
        ));
    }
    outcome(pass, lines.join("; "))
}

/// Limit point computed directly from the coordinates, in binary64.
fn limit_oracle(z0: &GroupElement, z: &GroupElement) -> Vec<f64> {
    let (a0, a) = (z0.a_mult.evaluate(), z.a_mult.evaluate());
    z0.b.iter()
        .zip(&z.b)
        .map(|(p, q)| p.evaluate() / (1.0 - a0) + q.evaluate() / (a - 1.0))
        .collect()
}

fn random_request(rng: &mut impl Rng, shape: GroupShape) -> LimitRequest {
    // integer exponents of 2 and rational v, balanced by integer weights
    let k = if shape.m == 1 { rng.gen_range(0..=2) } else { rng.gen_range(1..=3) };
    let count = k + 2;
    let w: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=3)).collect();
    let mut proj: Vec<Vec<f64>> = Vec::new();
    for i in 0..count - 1 {
        let mut p: Vec<f64> = (0..shape.m - 1).map(|_| rng.gen_range(-4..=4) as f64).collect();
        let e = match i {
            0 => -(rng.gen_range(1..=3) as f64),
            _ => rng.gen_range(-2..=2) as f64,
        };
        p.push(e);
        proj.push(p);
    }
    let last: Vec<f64> = (0..shape.m)
        .map(|d| -(0..count - 1).map(|i| w[i] as f64 * proj[i][d]).sum::<f64>() / w[count - 1] as f64)
        .collect();
    proj.push(last);
    let to_element = |p: &[f64], rng: &mut dyn rand::RngCore| GroupElement {
        v: p[..shape.m - 1].iter().map(|x| Scalar::Float(*x)).collect(),
        a_mult: Scalar::Float(2f64.powf(p[shape.m - 1])),
        b: (0..shape.n).map(|_| Scalar::rational(rat(rng.gen_range(-5..=5), rng.gen_range(1..=3)))).collect(),
    };
    let elems: Vec<GroupElement> = proj.iter().map(|p| to_element(p, rng)).collect();
    LimitRequest {
        z0: elems[0].clone(),
        set: elems[1..count - 1].to_vec(),
        z: elems[count - 1].clone(),
    }
}

fn limit_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut requests = 0;
    for shape in [GroupShape::g1(), GroupShape::new(2, 2).unwrap()] {
        let mut done = 0;
        while done < 100 {
            let req = random_request(&mut rng, shape);
            if req.z.a_mult.evaluate() <= 1.0 {
                continue;
            }
            done += 1;
            requests += 1;
            let target = limit_element(&req).unwrap();
            let oracle = limit_oracle(&req.z0, &req.z);
            let agree = target.b.iter().zip(&oracle).all(|(x, y)| (x.evaluate() - y).abs() < 1e-9 * (1.0 + y.abs()));
            match realize_limit(&req, 1e-7, 1_000_000) {
                Ok(trace) => {
                    let d = trace.achieved();
                    worst = worst.max(d);
                    if !(agree && d < 1e-6) {
                        failures.push(format!("({}, {}) distance {d:e}", shape.m, shape.n));
                    }
                }
                Err(e) => failures.push(format!("({}, {}) {e}", shape.m, shape.n)),
            }
        }
    }
    // worked instance
    let req = LimitRequest {
        set: vec![],
        z0: GroupElement::g1(Scalar::ratio(1, 2), Scalar::one()),
        z: GroupElement::g1(Scalar::int(2), Scalar::one()),
    };
    let trace = realize_limit(&req, 1e-12, 1_000_000).unwrap();
    let target_ok = limit_element(&req).unwrap().b == vec![Scalar::int(3)];
    let closed_form = trace
        .steps
        .iter()
        .map(|s| (s.element.b[0].evaluate() - (3.0 - 3.0 * 2f64.powi(-(s.t as i32)))).abs())
        .fold(0.0, f64::max);
    let steps_ok = !trace.steps.is_empty() && trace.steps.iter().all(|s| s.exponents == vec![s.t as i64; 2]);
    let pass = failures.is_empty() && target_ok && steps_ok && closed_form < 1e-12;
    outcome(
        pass,
        format!(
            "{requests} requests (G_1, H_22), worst distance {worst:e} (limit 1e-6), failures {:?}; worked trace {} steps, max deviation from 3 - 3*2^-t {closed_form:e} (limit 1e-12)",
            failures,
            trace.steps.len()
        ),
    )
}

fn constructions() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for mode in [GenerationMode::ClosedSemigroup, GenerationMode::ClosedGroup] {
        for n in 1..=5 {
            let want = match mode {
                GenerationMode::ClosedSemigroup => n + 2,
                GenerationMode::ClosedGroup => n + 1,
            };
            let g = construct_minimal_generators(GroupKind::Gn, 1, n, mode).unwrap();
            checked += 1;
            if minimal_count(GroupKind::Gn, 1, n, mode) != want
                || g.elements.len() != want
                || decide_separation(&g.checked_set()).unwrap().separated
            {
                bad.push(format!("G_{n} {mode}"));
            }
            for m in 1..=5 {
                let want = match mode {
                    GenerationMode::ClosedSemigroup => (n + 2).max(m + 1),
                    GenerationMode::ClosedGroup => (m + 1).max(n + 1),
                };
                let g = construct_minimal_generators(GroupKind::Hmn, m, n, mode).unwrap();
                checked += 1;
                if minimal_count(GroupKind::Hmn, m, n, mode) != want
                    || g.elements.len() != want
                    || decide_separation(&g.checked_set()).unwrap().separated
                {
                    bad.push(format!("H_{m}{n} {mode}"));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} constructions checked, failures {bad:?}"))
}

fn lower_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found = Vec::new();
    let mut total = 0;
    for n in 1..=4 {
        let shape = GroupShape::new(1, n).unwrap();
        for _ in 0..1000 {
            let set: Vec<GroupElement> = (0..n + 1).map(|_| exact_element(&mut rng, shape)).collect();
            total += 1;
            match decide_separation(&set) {
                Ok(v) if v.separated => {}
                _ => found.push(set.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")),
            }
        }
    }
    outcome(
        found.is_empty(),
        format!("{total} subsets of size n + 1 in G_n, n <= 4; nonseparated findings {found:?}"),
    )
}

fn kronecker() -> Outcome {
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let c1 = torus_coverage(&[-r2], 100_000, 10);
    let c2 = torus_coverage(&[-r2, -r3], 100_000, 10);
    // v = -3/7: the orbit has 7 points, so 7 cells at most
    let stall_short = torus_coverage(&[-3.0 / 7.0], 7, 10);
    let stall_long = torus_coverage(&[-3.0 / 7.0], 100_000, 10);
    let s = |x: &str| -> Scalar {
        Symbol::sqrt_prime(2);
        Symbol::sqrt_prime(3);
        x.parse().unwrap()
    };
    let dense1 = kronecker_dense(&[vec![s("1")], vec![s("-sqrt2")]]).unwrap().dense;
    let dense2 = kronecker_dense(&[
        vec![s("1"), s("0")],
        vec![s("0"), s("1")],
        vec![s("-sqrt2"), s("-sqrt3")],
    ])
    .unwrap()
    .dense;
    let rational = kronecker_dense(&[vec![s("1")], vec![s("-3/7")]]).unwrap().dense;
    let pass = c1 == 1.0 && c2 == 1.0 && stall_short == stall_long && stall_long < 1.0 && dense1 && dense2 && !rational;
    outcome(
        pass,
        format!(
            "coverage -sqrt2: {c1}, (-sqrt2, -sqrt3): {c2} (t <= 1e5); -3/7 stalls at {stall_long} (same at t = 7: {stall_short}); kronecker_dense: {dense1}, {dense2}, rational {rational}"
        ),
    )
}

fn expected_quadrant(a: f64, y: f64) -> Option<Quadrant> {
    match (a > 1.0, a < 1.0, y > 0.0, y < 0.0) {
        (true, _, true, _) => Some(Quadrant::I),
        (_, true, true, _) => Some(Quadrant::II),
        (_, true, _, true) => Some(Quadrant::III),
        (true, _, _, true) => Some(Quadrant::IV),
        _ => None,
    }
}

fn quadrants() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for id in ["ex32", "ex33"] {
        let ex = builtin_example(id).unwrap();
        let g: Vec<GroupElement> = ex.generators.iter().map(ModelElement::to_group).collect();
        let found = quadrant_witnesses(&g, 10.0, 12).unwrap();
        let mut parts = Vec::new();
        for q in [Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV] {
            let ok = match found.get(&q).and_then(Option::as_ref) {
                Some(entry) => {
                    // replay the word with the G_1 product (a, y)(a', y') = (a a', y + a y')
                    let (a, y) = entry.word.iter().fold((1.0, 0.0), |(a, y), &i| {
                        (a * g[i].a_mult.evaluate(), y + a * g[i].b[0].evaluate())
                    });
                    let ok = entry.word.len() <= 12 && y.abs() > 10.0 && expected_quadrant(a, y) == Some(q);
                    parts.push(format!("{q} {}", entry.word_label()));
                    ok
                }
                None => {
                    parts.push(format!("{q} not found"));
                    false
                }
            };
            pass &= ok;
        }
        lines.push(format!("{id}: {}", parts.join(", ")));
    }
    outcome(pass, lines.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("algebraic laws", algebraic_laws),
        ("exp/log roundtrip", exp_log_roundtrip),
        ("separation oracle equivalence", oracle_equivalence),
        ("example verdicts", example_verdicts),
        ("limit convergence", limit_convergence),
        ("minimal constructions", constructions),
        ("lower-bound falsification", lower_bound),
        ("kronecker corroboration", kronecker),
        ("quadrant witnesses", quadrants),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {failed} criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
