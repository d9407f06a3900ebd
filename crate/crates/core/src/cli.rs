//! Command-line front end. [`run`] is the whole program minus process exit.
//!
//! Exit codes: 0 success (nonseparated, dense, verified, passed), 1 usage,
//! parse or runtime error, 2 negative outcome (separated, not dense,
//! incomplete limit trace, failed predicate report), 3 marginal verdict.
//!
//! `--format structured` prints one JSON object with `schema_version` 1.

use std::fs::File;
use std::io::{BufWriter, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::density::{
    construct_minimal_generators, densify_euclidean, densify_hmn, kronecker_dense, minimal_count, torus_coverage,
    verify_euclidean, verify_hmn, GenerationMode, GroupKind, PipelineCase,
};
use crate::document::InputDocument;
use crate::explorer::{
    builtin_example, enumerate_words, predicate_report, quadrant_witnesses, write_boundary_csv, write_orbit_csv,
    ModelElement, DEFAULT_MAX_LENGTH, DEFAULT_PAIR_CAP,
};
use crate::group::{GroupElement, GroupShape};
use crate::limits::{limit_element, realize_limit, LimitRequest};
use crate::scalar::{z_linearly_independent, Scalar, Symbol};
use crate::separation::{decide_separation, Functional};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_T: u64 = 1_000_000;
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GroupArg {
    Gn,
    Hmn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Semigroup,
    Group,
}

#[derive(Parser, Debug)]
#[command(name = "hmn", version, about = "Separation, limits and density in the groups H_mn")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Tolerance for limit realization.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest time scanned by limit realization.
    #[arg(long, global = true)]
    max_t: Option<u64>,
    /// Word length cap for orbit enumeration (at most 12).
    #[arg(long, global = true)]
    max_length: Option<usize>,
    /// Seed recorded with every result. All algorithms are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (trace, cloud or document, depending on the command).
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a set lies in a maximal subsemigroup.
    Check {
        /// Input document, or builtin:<id>.
        file: String,
        #[arg(long)]
        set: Option<String>,
    },
    /// Limit of z0^t0 ... z^t and a realizing trace.
    Limit {
        file: String,
        #[arg(long)]
        z0: String,
        #[arg(long)]
        z: String,
        /// Middle factors.
        #[arg(long)]
        set: Option<String>,
    },
    /// Perturb a nonseparated tuple to a dense one with a certificate.
    Densify {
        file: String,
        #[arg(long, conflicts_with = "vectors")]
        set: Option<String>,
        /// Densify a tuple of vectors in R^n instead of group elements.
        #[arg(long)]
        vectors: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Kronecker density tests.
    Kronecker {
        /// Document holding the vectors.
        file: Option<String>,
        /// Named vector set: is its additive semigroup dense in R^n?
        #[arg(long)]
        vectors: Option<String>,
        /// Comma-separated reals: is `t v mod 1` dense on the torus?
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<String>,
        /// Grid cells per axis for the coverage corroboration.
        #[arg(long, default_value_t = 10)]
        cells: usize,
    },
    /// Minimal generating sets.
    Generators {
        #[arg(long, value_enum)]
        group: GroupArg,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Enumerate words, find quadrant witnesses, export clouds.
    Explore {
        file: Option<String>,
        #[arg(long)]
        set: Option<String>,
        /// Report quadrant witnesses with |y| above this threshold.
        #[arg(long)]
        quadrants: Option<f64>,
        /// Write boundary curves with these slopes instead of an orbit.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        boundary: Vec<f64>,
        #[arg(long, default_value_t = -2.5, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 0.85, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Builtin examples: verdict and predicate report.
    Examples {
        /// ex31, ex32, ex33; all when omitted.
        id: Option<String>,
    },
}

struct Ctx {
    format: Format,
    tol: Option<f64>,
    max_t: Option<u64>,
    max_length: Option<usize>,
    seed: u64,
    out: Option<String>,
}

type CmdResult = Result<(i32, String, Value), String>;

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn strs(xs: &[Scalar]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn element_json(x: &GroupElement) -> Value {
    json!({ "v": strs(&x.v), "a_mult": x.a_mult.to_string(), "b": strs(&x.b) })
}

fn functional_json(f: &Functional) -> Value {
    match f {
        Functional::TypeI(g) => json!({ "type": "type-i", "g": strs(g) }),
        Functional::TypeII { gamma, mu } => json!({ "type": "type-ii", "gamma": strs(gamma), "mu": mu.to_string() }),
    }
}

fn create(path: &str) -> Result<BufWriter<File>, String> {
    File::create(path).map(BufWriter::new).map_err(|e| format!("cannot write {path}: {e}"))
}

impl Ctx {
    fn max_length(&self, doc: Option<&InputDocument>) -> usize {
        self.max_length
            .or(doc.and_then(|d| d.options.max_length))
            .unwrap_or(DEFAULT_MAX_LENGTH)
    }

    fn check(&self, file: &str, set: Option<&str>) -> CmdResult {
        let doc = InputDocument::load(file).map_err(err)?;
        let name = doc.resolve_set_name(set).map_err(err)?;
        let s = doc.set(&name).map_err(err)?;
        let verdict = decide_separation(&s).map_err(err)?;
        let word = if verdict.separated { "separated" } else { "nonseparated" };
        let mut text = format!("set: {name} ({} elements)\nverdict: {word}\n", s.len());
        if let Some(w) = &verdict.witness {
            text += &format!("witness: {w}\n");
        }
        if let Some(h) = &verdict.hull_certificates {
            text += &format!("type-i hull weights: [{}]\n", strs(&h.type_i).join(", "));
            text += &format!("type-ii hull weights: [{}]\n", strs(&h.type_ii).join(", "));
        }
        text += &format!("marginal: {}\n", verdict.marginal);
        let value = json!({
            "set": name,
            "verdict": word,
            "marginal": verdict.marginal,
            "witness": verdict.witness.as_ref().map(functional_json),
            "hull_weights": verdict.hull_certificates.as_ref().map(|h| json!({
                "type_i": strs(&h.type_i),
                "type_ii": strs(&h.type_ii),
            })),
        });
        let code = if verdict.marginal {
            3
        } else if verdict.separated {
            2
        } else {
            0
        };
        Ok((code, text, value))
    }

    fn limit(&self, file: &str, z0: &str, z: &str, set: Option<&str>) -> CmdResult {
        let doc = InputDocument::load(file).map_err(err)?;
        let req = LimitRequest {
            set: match set {
                Some(name) => doc.set(name).map_err(err)?,
                None => Vec::new(),
            },
            z0: doc.element(z0).map_err(err)?,
            z: doc.element(z).map_err(err)?,
        };
        let tol = self.tol.or(doc.options.tol).unwrap_or(DEFAULT_TOL);
        let max_t = self.max_t.or(doc.options.max_t).unwrap_or(DEFAULT_MAX_T);
        let target = limit_element(&req).map_err(err)?;
        let trace = realize_limit(&req, tol, max_t).map_err(err)?;
        if let Some(path) = &self.out {
            let mut w = create(path)?;
            trace.write_csv(&mut w).and_then(|_| w.flush()).map_err(err)?;
        }
        let last_t = trace.steps.last().map_or(0, |s| s.t);
        let text = format!(
            "target: {target}\nachieved distance: {:e}\ntolerance: {tol:e}\nsteps: {}\nlast t: {last_t}\ncomplete: {}\n",
            trace.achieved(),
            trace.steps.len(),
            trace.complete
        );
        let value = json!({
            "target": element_json(&target),
            "achieved": trace.achieved(),
            "tol": tol,
            "max_t": max_t,
            "steps": trace.steps.len(),
            "last_t": last_t,
            "weights": trace.weights,
            "complete": trace.complete,
            "trace_file": self.out,
        });
        Ok((if trace.complete { 0 } else { 2 }, text, value))
    }

    fn densify(&self, file: &str, set: Option<&str>, vectors: Option<&str>, epsilon: Option<f64>) -> CmdResult {
        let doc = InputDocument::load(file).map_err(err)?;
        let eps = epsilon.or(doc.options.epsilon).unwrap_or(DEFAULT_EPSILON);
        if let Some(name) = vectors {
            let tuple = doc.vectors(name).map_err(err)?;
            let out = densify_euclidean(tuple, eps).map_err(err)?;
            let verified = verify_euclidean(tuple, &out, eps);
            let mut text = format!("kind: {}\nepsilon: {eps:e}\n", out.certificate.kind);
            for (i, v) in out.tuple.iter().enumerate() {
                text += &format!("x{}: [{}]\n", i + 1, strs(v).join(", "));
            }
            text += &format!("word: {:?}\n", out.word);
            text += &format!("independent values: [{}]\n", strs(&out.certificate.independent_values).join(", "));
            text += &verification_line(&verified);
            let value = json!({
                "kind": out.certificate.kind.to_string(),
                "epsilon": eps,
                "tuple": out.tuple.iter().map(|v| strs(v)).collect::<Vec<_>>(),
                "word": out.word,
                "independent_values": strs(&out.certificate.independent_values),
                "audit": out.certificate.audit.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "verified": verified.is_ok(),
                "verification_error": verified.as_ref().err(),
            });
            return Ok((if verified.is_ok() { 0 } else { 2 }, text, value));
        }
        let name = doc.resolve_set_name(set).map_err(err)?;
        let tuple = doc.set(&name).map_err(err)?;
        let out = densify_hmn(&tuple, eps).map_err(err)?;
        let verified = verify_hmn(&tuple, &out, eps);
        let case = match out.case {
            PipelineCase::One => "one",
            PipelineCase::Two => "two",
        };
        let mut text = format!("kind: {}\ncase: {case}\nepsilon: {eps:e}\n", out.certificate.kind);
        for (i, x) in out.tuple.iter().enumerate() {
            text += &format!("x{}: {x}\n", i + 1);
        }
        text += &format!(
            "word: {}\n",
            out.word.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(".")
        );
        text += &format!("independent values: [{}]\n", strs(&out.certificate.independent_values).join(", "));
        text += "audit:\n";
        for step in &out.certificate.audit {
            text += &format!("  {step}\n");
        }
        text += &verification_line(&verified);
        let value = json!({
            "kind": out.certificate.kind.to_string(),
            "case": case,
            "epsilon": eps,
            "tuple": out.tuple.iter().map(element_json).collect::<Vec<_>>(),
            "word": out.word,
            "lattice": out.lattice.iter().map(|v| strs(v)).collect::<Vec<_>>(),
            "witness": strs(&out.witness),
            "projection_determinants": out.projection.determinants.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "independent_values": strs(&out.certificate.independent_values),
            "audit": out.certificate.audit.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "verified": verified.is_ok(),
            "verification_error": verified.as_ref().err(),
        });
        Ok((if verified.is_ok() { 0 } else { 2 }, text, value))
    }

    fn kronecker(&self, file: Option<&str>, vectors: Option<&str>, values: &[String], cells: usize) -> CmdResult {
        let t_max = self.max_t.unwrap_or(DEFAULT_MAX_T);
        if !values.is_empty() {
            let xs: Vec<Scalar> = values.iter().map(|s| parse_scalar(s)).collect::<Result<_, _>>()?;
            let v: Vec<Scalar> = xs.iter().filter(|x| !x.is_one()).cloned().collect();
            if v.is_empty() {
                return Err("no values besides 1".into());
            }
            let dense = z_linearly_independent(&v, true).map_err(err)?;
            let approx: Vec<f64> = v.iter().map(Scalar::evaluate).collect();
            let cover = torus_coverage(&approx, t_max, cells);
            let text = format!(
                "values: [1, {}]\ndense: {dense}\ncoverage: {cover} of the {cells}^{} grid cells for t <= {t_max}\n",
                strs(&v).join(", "),
                v.len()
            );
            let value = json!({
                "mode": "torus",
                "values": strs(&v),
                "dense": dense,
                "coverage": cover,
                "cells": cells,
                "t_max": t_max,
            });
            return Ok((if dense { 0 } else { 2 }, text, value));
        }
        let file = file.ok_or("kronecker needs --values or a document with --vectors")?;
        let doc = InputDocument::load(file).map_err(err)?;
        let name = match vectors {
            Some(n) => n.to_string(),
            None if doc.vectors.len() == 1 => doc.vectors.keys().next().cloned().unwrap_or_default(),
            None => return Err("choose a vector set with --vectors".into()),
        };
        let s = doc.vectors(&name).map_err(err)?;
        let verdict = kronecker_dense(s).map_err(err)?;
        let mut text = format!("vectors: {name}\ndense: {}\n", verdict.dense);
        if let Some(c) = &verdict.certificate {
            text += &format!(
                "witness: x{}\nindependent values: [{}]\n",
                c.witness + 1,
                strs(&c.independent_values).join(", ")
            );
        }
        if let Some(r) = &verdict.reason {
            text += &format!("reason: {r}\n");
        }
        let value = json!({
            "mode": "semigroup",
            "vectors": name,
            "dense": verdict.dense,
            "witness": verdict.certificate.as_ref().map(|c| c.witness),
            "independent_values": verdict.certificate.as_ref().map(|c| strs(&c.independent_values)),
            "reason": verdict.reason,
        });
        Ok((if verdict.dense { 0 } else { 2 }, text, value))
    }

    fn generators(&self, group: GroupArg, m: usize, n: usize, mode: ModeArg) -> CmdResult {
        let group = match group {
            GroupArg::Gn => GroupKind::Gn,
            GroupArg::Hmn => GroupKind::Hmn,
        };
        let mode = match mode {
            ModeArg::Semigroup => GenerationMode::ClosedSemigroup,
            ModeArg::Group => GenerationMode::ClosedGroup,
        };
        let spec = construct_minimal_generators(group, m, n, mode).map_err(err)?;
        let verdict = decide_separation(&spec.checked_set()).map_err(err)?;
        let count = minimal_count(group, spec.m, n, mode);
        if let Some(path) = &self.out {
            let mut doc = InputDocument::empty(GroupShape::new(spec.m, n).map_err(err)?, Default::default());
            doc.sets.insert(
                "S".into(),
                spec.elements.iter().cloned().map(ModelElement::Multiplicative).collect(),
            );
            if mode == GenerationMode::ClosedGroup {
                doc.sets.insert(
                    "S_with_inverses".into(),
                    spec.checked_set().into_iter().map(ModelElement::Multiplicative).collect(),
                );
            }
            let mut w = create(path)?;
            w.write_all(doc.to_toml().as_bytes()).and_then(|_| w.flush()).map_err(err)?;
        }
        let word = if verdict.separated { "separated" } else { "nonseparated" };
        let mut text = format!(
            "group: {group}\nshape: ({}, {n})\nmode: {mode}\nconstruction: {}\nminimal count: {count}\n",
            spec.m, spec.construction
        );
        for (i, x) in spec.elements.iter().enumerate() {
            text += &format!("x{}: {x}\n", i + 1);
        }
        text += &format!("verified: {word}\n");
        let value = json!({
            "group": group.to_string(),
            "m": spec.m,
            "n": n,
            "mode": mode.to_string(),
            "construction": spec.construction,
            "minimal_count": count,
            "elements": spec.elements.iter().map(element_json).collect::<Vec<_>>(),
            "verified": word,
        });
        Ok((if verdict.separated { 2 } else { 0 }, text, value))
    }

    #[allow(clippy::too_many_arguments)]
    fn explore(
        &self,
        file: Option<&str>,
        set: Option<&str>,
        quadrants: Option<f64>,
        boundary: &[f64],
        x_min: f64,
        x_max: f64,
        points: usize,
    ) -> CmdResult {
        if !boundary.is_empty() {
            let path = self.out.as_ref().ok_or("boundary curves need --out")?;
            let mut w = create(path)?;
            write_boundary_csv(boundary, x_min, x_max, points, &mut w)
                .and_then(|_| w.flush())
                .map_err(err)?;
            let text = format!("wrote {} boundary curves and the border to {path}\n", boundary.len());
            let value = json!({ "boundary": boundary, "x_min": x_min, "x_max": x_max, "points": points, "file": path });
            return Ok((0, text, value));
        }
        let doc = InputDocument::load(file.ok_or("explore needs a document")?).map_err(err)?;
        let name = doc.resolve_set_name(set).map_err(err)?;
        let gens = doc.model_set(&name).map_err(err)?;
        let max_length = self.max_length(Some(&doc));
        let mut text = format!("set: {name}\nmax length: {max_length}\n");
        let mut value = json!({ "set": name, "max_length": max_length });
        if let Some(threshold) = quadrants {
            let g: Vec<GroupElement> = gens.iter().map(ModelElement::to_group).collect();
            let found = quadrant_witnesses(&g, threshold, max_length).map_err(err)?;
            let mut all = true;
            let mut q = serde_json::Map::new();
            for (quad, entry) in &found {
                all &= entry.is_some();
                let line = match entry {
                    Some(e) => format!("{} at {}", e.word_label(), e.element),
                    None => "not found".into(),
                };
                text += &format!("quadrant {quad}: {line}\n");
                q.insert(
                    quad.to_string(),
                    entry.as_ref().map_or(Value::Null, |e| json!({ "word": e.word_label(), "element": e.element.to_string() })),
                );
            }
            value["quadrants"] = Value::Object(q);
            value["threshold"] = json!(threshold);
            return Ok((if all { 0 } else { 2 }, text, value));
        }
        let orbit = enumerate_words(gens, max_length).map_err(err)?;
        for len in 1..=max_length {
            text += &format!("length {len}: {} new elements\n", orbit.by_length(len).count());
        }
        text += &format!("total: {}\n", orbit.elements.len());
        value["total"] = json!(orbit.elements.len());
        if let Some(path) = &self.out {
            let mut w = create(path)?;
            write_orbit_csv(&orbit, &mut w).and_then(|_| w.flush()).map_err(err)?;
            value["file"] = json!(path);
        }
        Ok((0, text, value))
    }

    fn examples(&self, id: Option<&str>) -> CmdResult {
        let ids: Vec<&str> = match id {
            Some(i) => vec![i],
            None => vec!["ex31", "ex32", "ex33"],
        };
        let max_length = self.max_length(None);
        let mut text = String::new();
        let mut reports = Vec::new();
        let mut ok = true;
        for id in ids {
            let ex = builtin_example(id).map_err(err)?;
            let g: Vec<GroupElement> = ex.generators.iter().map(ModelElement::to_group).collect();
            let verdict = decide_separation(&g).map_err(err)?;
            let report = predicate_report(&ex.generators, &ex.predicate, &ex.excluded, max_length, DEFAULT_PAIR_CAP)
                .map_err(err)?;
            let word = if verdict.separated { "separated" } else { "nonseparated" };
            ok &= !verdict.separated && report.passed();
            text += &format!("== {id} ==\nverdict: {word}\nmax length: {max_length}\n{report}\n");
            reports.push(json!({
                "id": id,
                "verdict": word,
                "predicate": report.predicate,
                "elements_checked": report.elements_checked,
                "pairs_checked": report.pairs_checked,
                "element_violations": report.element_violations,
                "closure_violations": report.closure_violations,
                "excluded": report.excluded,
                "excluded_fails": report.excluded_fails,
                "passed": report.passed(),
            }));
        }
        Ok((if ok { 0 } else { 2 }, text, json!({ "max_length": max_length, "examples": reports })))
    }
}

fn verification_line(v: &Result<(), String>) -> String {
    match v {
        Ok(()) => "verified: true\n".into(),
        Err(e) => format!("verified: false ({e})\n"),
    }
}

fn parse_scalar(s: &str) -> Result<Scalar, String> {
    for word in s.split(|c: char| !c.is_ascii_alphanumeric()) {
        if let Some(p) = word.strip_prefix("sqrt").and_then(|d| d.parse::<u64>().ok()) {
            if p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0) {
                Symbol::sqrt_prime(p);
            }
        }
    }
    s.parse::<Scalar>().map_err(err)
}

/// Runs the program on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, errout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(errout, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let ctx = Ctx {
        format: cli.format,
        tol: cli.tol,
        max_t: cli.max_t,
        max_length: cli.max_length,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        out: cli.out.clone(),
    };
    let (name, result) = match &cli.command {
        Command::Check { file, set } => ("check", ctx.check(file, set.as_deref())),
        Command::Limit { file, z0, z, set } => ("limit", ctx.limit(file, z0, z, set.as_deref())),
        Command::Densify {
            file,
            set,
            vectors,
            epsilon,
        } => ("densify", ctx.densify(file, set.as_deref(), vectors.as_deref(), *epsilon)),
        Command::Kronecker {
            file,
            vectors,
            values,
            cells,
        } => ("kronecker", ctx.kronecker(file.as_deref(), vectors.as_deref(), values, *cells)),
        Command::Generators { group, m, n, mode } => ("generators", ctx.generators(*group, *m, *n, *mode)),
        Command::Explore {
            file,
            set,
            quadrants,
            boundary,
            x_min,
            x_max,
            points,
        } => (
            "explore",
            ctx.explore(file.as_deref(), set.as_deref(), *quadrants, boundary, *x_min, *x_max, *points),
        ),
        Command::Examples { id } => ("examples", ctx.examples(id.as_deref())),
    };
    match result {
        Ok((code, text, mut value)) => {
            let written = match ctx.format {
                Format::Text => write!(out, "{text}"),
                Format::Structured => {
                    value["schema_version"] = json!(SCHEMA_VERSION);
                    value["command"] = json!(name);
                    value["seed"] = json!(ctx.seed);
                    value["exit_code"] = json!(code);
                    writeln!(out, "{value}")
                }
            };
            if written.is_err() {
                return 1;
            }
            code
        }
        Err(e) => {
            match ctx.format {
                Format::Text => {
                    let _ = writeln!(errout, "error: {e}");
                }
                Format::Structured => {
                    let v = json!({ "schema_version": SCHEMA_VERSION, "command": name, "error": e, "exit_code": 1 });
                    let _ = writeln!(out, "{v}");
                }
            }
            1
        }
    }
}
