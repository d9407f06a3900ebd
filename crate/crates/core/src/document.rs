//! TOML input documents shared by every command.
//!
//! ```toml
//! shape = { m = 1, n = 1 }
//! model = "multiplicative"
//!
//! [symbols]
//! t = 0.7390851332151607
//!
//! [[sets.S]]
//! a = "2"
//! b = ["1 + sqrt2"]
//!
//! [elements.z0]
//! a = "1/2"
//! b = ["1"]
//!
//! [vectors]
//! T = [["-sqrt2"]]
//!
//! [options]
//! tol = 1e-9
//! ```
//!
//! Scalars are strings in the grammar of [`Scalar`]'s `FromStr`, or TOML
//! integers. TOML floats become binary64 scalars. `sqrtP` for a prime `P` is
//! always available; other symbols must be declared under `[symbols]`.
//! `builtin = "ex32"` loads a builtin example into set `S` and element
//! `excluded`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::explorer::{builtin_example, ModelElement};
use crate::group::{AlgebraElement, GroupElement, GroupShape, Model};
use crate::scalar::{Scalar, Symbol, SymbolTable};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{0}")]
    Toml(String),
    #[error("line {line}: {message}")]
    At { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_t: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputDocument {
    pub shape: GroupShape,
    pub model: Model,
    pub symbols: SymbolTable,
    pub sets: BTreeMap<String, Vec<ModelElement>>,
    pub elements: BTreeMap<String, ModelElement>,
    pub vectors: BTreeMap<String, Vec<Vec<Scalar>>>,
    pub options: DocOptions,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShape {
    m: usize,
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    #[serde(default)]
    v: Vec<Spanned<RawScalar>>,
    a: Spanned<RawScalar>,
    #[serde(default)]
    b: Vec<Spanned<RawScalar>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    shape: Option<RawShape>,
    model: Option<Spanned<String>>,
    builtin: Option<Spanned<String>>,
    #[serde(default)]
    symbols: BTreeMap<String, f64>,
    #[serde(default)]
    sets: BTreeMap<String, Vec<RawElement>>,
    #[serde(default)]
    elements: BTreeMap<String, RawElement>,
    #[serde(default)]
    vectors: BTreeMap<String, Vec<Vec<Spanned<RawScalar>>>>,
    #[serde(default)]
    options: DocOptions,
}

#[derive(Serialize)]
struct OutShape {
    m: usize,
    n: usize,
}

#[derive(Serialize)]
struct OutElement {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    v: Vec<String>,
    a: String,
    b: Vec<String>,
}

#[derive(Serialize)]
struct OutDocument {
    shape: OutShape,
    model: &'static str,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    symbols: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    sets: BTreeMap<String, Vec<OutElement>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    elements: BTreeMap<String, OutElement>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    vectors: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "is_default")]
    options: DocOptions,
}

fn is_default(o: &DocOptions) -> bool {
    *o == DocOptions::default()
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&c| c == b'\n').count() + 1
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Interns every `sqrtP` with `P` prime mentioned in `text`.
fn intern_sqrt_primes(text: &str) {
    let bytes = text.as_bytes();
    let mut i = 0;
    while let Some(pos) = text[i..].find("sqrt") {
        let start = i + pos;
        let mut end = start + 4;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        let boundary = start == 0 || !(bytes[start - 1].is_ascii_alphanumeric() || bytes[start - 1] == b'_');
        let tail_ok = end == bytes.len() || !(bytes[end].is_ascii_alphabetic() || bytes[end] == b'_');
        if boundary && tail_ok && end > start + 4 {
            if let Ok(p) = text[start + 4..end].parse::<u64>() {
                if is_prime(p) {
                    Symbol::sqrt_prime(p);
                }
            }
        }
        i = end;
    }
}

fn symbols_of(x: &Scalar) -> Vec<Symbol> {
    x.span()
        .map(|s| s.terms().map(|(sym, _)| *sym).filter(|s| *s != Symbol::ONE).collect())
        .unwrap_or_default()
}

fn is_sqrt_prime(sym: Symbol) -> bool {
    crate::certalg::sqrt_prime_of(sym).is_some()
}

struct Ctx<'a> {
    text: &'a str,
    declared: &'a SymbolTable,
}

impl Ctx<'_> {
    fn at(&self, span: std::ops::Range<usize>, message: impl Into<String>) -> DocumentError {
        DocumentError::At {
            line: line_of(self.text, span.start),
            message: message.into(),
        }
    }

    fn scalar(&self, raw: &Spanned<RawScalar>) -> Result<Scalar, DocumentError> {
        let x = match raw.get_ref() {
            RawScalar::Int(k) => Scalar::int(*k),
            RawScalar::Float(f) => Scalar::float(*f).map_err(|e| self.at(raw.span(), e.to_string()))?,
            RawScalar::Text(s) => {
                intern_sqrt_primes(s);
                s.parse::<Scalar>().map_err(|e| self.at(raw.span(), e.to_string()))?
            }
        };
        for sym in symbols_of(&x) {
            if !self.declared.contains(&sym.label()) && !is_sqrt_prime(sym) {
                return Err(self.at(raw.span(), format!("symbol `{}` is not declared", sym.label())));
            }
        }
        Ok(x)
    }

    fn scalars(&self, raw: &[Spanned<RawScalar>]) -> Result<Vec<Scalar>, DocumentError> {
        raw.iter().map(|r| self.scalar(r)).collect()
    }

    fn element(&self, raw: &RawElement, shape: GroupShape, model: Model) -> Result<ModelElement, DocumentError> {
        let v = self.scalars(&raw.v)?;
        let a = self.scalar(&raw.a)?;
        let b = self.scalars(&raw.b)?;
        if v.len() != shape.m - 1 || b.len() != shape.n {
            return Err(self.at(
                raw.a.span(),
                format!(
                    "element has shape ({}, {}), document shape is ({}, {})",
                    v.len() + 1,
                    b.len(),
                    shape.m,
                    shape.n
                ),
            ));
        }
        Ok(match model {
            Model::Multiplicative => {
                ModelElement::Multiplicative(GroupElement::new(v, a, b).map_err(|e| self.at(raw.a.span(), e.to_string()))?)
            }
            Model::Additive => ModelElement::Additive(AlgebraElement { v, a, b }),
        })
    }
}

fn parse_model(s: &str) -> Option<Model> {
    match s {
        "multiplicative" => Some(Model::Multiplicative),
        "additive" => Some(Model::Additive),
        _ => None,
    }
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Multiplicative => "multiplicative",
        Model::Additive => "additive",
    }
}

impl InputDocument {
    pub fn empty(shape: GroupShape, model: Model) -> Self {
        InputDocument {
            shape,
            model,
            symbols: SymbolTable::new(),
            sets: BTreeMap::new(),
            elements: BTreeMap::new(),
            vectors: BTreeMap::new(),
            options: DocOptions::default(),
        }
    }

    /// A builtin example as a document: set `S` and element `excluded`.
    pub fn builtin(id: &str) -> Result<Self, DocumentError> {
        let ex = builtin_example(id).map_err(|e| DocumentError::Invalid(e.to_string()))?;
        let model = ex.generators.first().map_or(Model::Multiplicative, ModelElement::model);
        let mut doc = InputDocument::empty(GroupShape::g1(), model);
        doc.sets.insert("S".into(), ex.generators);
        doc.elements.insert("excluded".into(), ex.excluded);
        Ok(doc)
    }

    /// A file path, or `builtin:<id>`.
    pub fn load(path: &str) -> Result<Self, DocumentError> {
        if let Some(id) = path.strip_prefix("builtin:") {
            return Self::builtin(id);
        }
        let text = std::fs::read_to_string(Path::new(path)).map_err(|source| DocumentError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let raw: RawDocument = toml::from_str(text).map_err(|e| DocumentError::Toml(e.to_string()))?;
        let mut doc = match &raw.builtin {
            Some(id) => Self::builtin(id.get_ref()).map_err(|e| DocumentError::At {
                line: line_of(text, id.span().start),
                message: e.to_string(),
            })?,
            None => {
                let shape = raw
                    .shape
                    .as_ref()
                    .ok_or_else(|| DocumentError::Invalid("missing `shape = { m = .., n = .. }`".into()))?;
                let shape = GroupShape::new(shape.m, shape.n).map_err(|e| DocumentError::Invalid(e.to_string()))?;
                InputDocument::empty(shape, Model::default())
            }
        };
        if let Some(shape) = &raw.shape {
            if (shape.m, shape.n) != (doc.shape.m, doc.shape.n) {
                return Err(DocumentError::Invalid("shape conflicts with the builtin example".into()));
            }
        }
        if let Some(m) = &raw.model {
            let model = parse_model(m.get_ref()).ok_or_else(|| DocumentError::At {
                line: line_of(text, m.span().start),
                message: format!("unknown model `{}` (expected additive or multiplicative)", m.get_ref()),
            })?;
            if raw.builtin.is_some() && model != doc.model {
                return Err(DocumentError::Invalid("model conflicts with the builtin example".into()));
            }
            doc.model = model;
        }
        for (label, approx) in &raw.symbols {
            doc.symbols
                .insert(label, *approx)
                .map_err(|e| DocumentError::Invalid(format!("symbol `{label}`: {e}")))?;
        }
        let ctx = Ctx {
            text,
            declared: &doc.symbols,
        };
        let mut sets = BTreeMap::new();
        for (name, raw_set) in &raw.sets {
            let set = raw_set
                .iter()
                .map(|r| ctx.element(r, doc.shape, doc.model))
                .collect::<Result<Vec<_>, _>>()?;
            sets.insert(name.clone(), set);
        }
        let mut elements = BTreeMap::new();
        for (name, r) in &raw.elements {
            elements.insert(name.clone(), ctx.element(r, doc.shape, doc.model)?);
        }
        let mut vectors = BTreeMap::new();
        for (name, rows) in &raw.vectors {
            let rows = rows.iter().map(|r| ctx.scalars(r)).collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = rows.first() {
                if rows.iter().any(|r| r.len() != first.len()) {
                    return Err(DocumentError::Invalid(format!("vectors `{name}` have different lengths")));
                }
            }
            vectors.insert(name.clone(), rows);
        }
        for (name, set) in sets {
            if doc.sets.insert(name.clone(), set).is_some() {
                return Err(DocumentError::Invalid(format!("set `{name}` is already defined by the builtin")));
            }
        }
        for (name, x) in elements {
            if doc.elements.insert(name.clone(), x).is_some() {
                return Err(DocumentError::Invalid(format!("element `{name}` is already defined by the builtin")));
            }
        }
        doc.vectors = vectors;
        doc.options = raw.options;
        Ok(doc)
    }

    fn all_scalars(&self) -> impl Iterator<Item = &Scalar> {
        let elems = self.sets.values().flatten().chain(self.elements.values());
        elems
            .flat_map(|x| x.v().iter().chain(std::iter::once(x.first())).chain(x.b()))
            .chain(self.vectors.values().flatten().flatten())
    }

    /// Canonical TOML text. Every symbol in use is declared explicitly.
    pub fn to_toml(&self) -> String {
        let mut symbols: BTreeMap<String, f64> = self.symbols.entries().iter().cloned().collect();
        let used: BTreeSet<Symbol> = self.all_scalars().flat_map(symbols_of).collect();
        for sym in used {
            symbols.entry(sym.label()).or_insert_with(|| sym.approx());
        }
        let out_el = |x: &ModelElement| OutElement {
            v: x.v().iter().map(ToString::to_string).collect(),
            a: x.first().to_string(),
            b: x.b().iter().map(ToString::to_string).collect(),
        };
        let doc = OutDocument {
            shape: OutShape {
                m: self.shape.m,
                n: self.shape.n,
            },
            model: model_name(self.model),
            symbols,
            sets: self
                .sets
                .iter()
                .map(|(k, s)| (k.clone(), s.iter().map(out_el).collect()))
                .collect(),
            elements: self.elements.iter().map(|(k, x)| (k.clone(), out_el(x))).collect(),
            vectors: self
                .vectors
                .iter()
                .map(|(k, rows)| {
                    let rows = rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
                    (k.clone(), rows)
                })
                .collect(),
            options: self.options.clone(),
        };
        toml::to_string(&doc).expect("document serializes")
    }

    pub fn model_set(&self, name: &str) -> Result<&[ModelElement], DocumentError> {
        self.sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| DocumentError::Invalid(format!("no set named `{name}`")))
    }

    /// A named set in the multiplicative model.
    pub fn set(&self, name: &str) -> Result<Vec<GroupElement>, DocumentError> {
        Ok(self.model_set(name)?.iter().map(ModelElement::to_group).collect())
    }

    /// The named set, or the only set when `name` is `None`.
    pub fn resolve_set_name(&self, name: Option<&str>) -> Result<String, DocumentError> {
        match name {
            Some(n) => self.model_set(n).map(|_| n.to_string()),
            None if self.sets.len() == 1 => Ok(self.sets.keys().next().cloned().unwrap_or_default()),
            None if self.sets.is_empty() => Err(DocumentError::Invalid("document has no sets".into())),
            None => Err(DocumentError::Invalid(format!(
                "document has several sets ({}); choose one with --set",
                self.sets.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn element(&self, name: &str) -> Result<GroupElement, DocumentError> {
        self.elements
            .get(name)
            .map(ModelElement::to_group)
            .ok_or_else(|| DocumentError::Invalid(format!("no element named `{name}`")))
    }

    pub fn vectors(&self, name: &str) -> Result<&[Vec<Scalar>], DocumentError> {
        self.vectors
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| DocumentError::Invalid(format!("no vectors named `{name}`")))
    }
}
