//! JSON file format for randomizations.
//!
//! ```json
//! {
//!   "theory": {"kind": "dlo"},
//!   "atoms": [{"name": "w1", "weight": "1/2"}, {"name": "w2", "weight": "1/2"}],
//!   "elements": {"a": ["0", "1"], "b": ["1", "0"]}
//! }
//! ```
//!
//! A finite theory is written `{"kind": "finite_enum", "n": 2}` and its
//! element values may be JSON integers. Weights and values are exact
//! fraction strings; no floating point is accepted.

use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{MeasureError, Partition};
use crate::rational::{format_fraction, parse_fraction, Rational};
use crate::randvar::{RandElem, RandError, Randomization};
use crate::theory::{Theory, TheoryError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TheorySpec {
    Dlo,
    FiniteEnum { n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub name: String,
    pub weight: String,
}

/// A value as written in the file: a fraction string or a JSON integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Int(i64),
    Text(String),
}

impl fmt::Display for ValueSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSpec::Int(k) => write!(f, "{k}"),
            ValueSpec::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizationFile {
    pub theory: TheorySpec,
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub elements: IndexMap<String, Vec<ValueSpec>>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    WeightSum(MeasureError),
    #[error("{0}")]
    Length(RandError),
    #[error("{0}")]
    Domain(String),
}

impl LoadError {
    /// Exit status for this error: 4 for a weight sum other than 1, 5 for a
    /// value list of the wrong length, 6 for a value outside the domain, and
    /// 2 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LoadError::WeightSum(_) => 4,
            LoadError::Length(_) => 5,
            LoadError::Domain(_) => 6,
            _ => 2,
        }
    }
}

impl RandomizationFile {
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        serde_json::from_str(text).map_err(|e| LoadError::Parse {
            line: e.line(),
            column: e.column(),
            msg: strip_position(&e.to_string()),
        })
    }

    pub fn to_randomization(&self) -> Result<Randomization, LoadError> {
        let theory = match self.theory {
            TheorySpec::Dlo => Theory::dlo(),
            TheorySpec::FiniteEnum { n } => Theory::finite_enum(n).map_err(|e: TheoryError| LoadError::Invalid(e.to_string()))?,
        };
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let w = parse_fraction(&a.weight)
                .map_err(|_| LoadError::Invalid(format!("atom `{}`: bad weight `{}`", a.name, a.weight)))?;
            atoms.push((a.name.clone(), w));
        }
        let partition = Partition::new(atoms).map_err(|e| match e {
            MeasureError::WeightSum(_) => LoadError::WeightSum(e),
            other => LoadError::Invalid(other.to_string()),
        })?;
        let mut r = Randomization::new(theory, partition, []).expect("no elements yet");
        for (name, values) in &self.elements {
            let mut parsed = Vec::with_capacity(values.len());
            for (atom, v) in values.iter().enumerate() {
                let q = match v {
                    ValueSpec::Int(k) => Rational::from_integer((*k).into()),
                    ValueSpec::Text(s) => parse_fraction(s).map_err(|_| {
                        LoadError::Invalid(format!("element `{name}` at atom {}: bad value `{s}`", atom + 1))
                    })?,
                };
                parsed.push(q);
            }
            r.insert(name.clone(), RandElem::new(parsed)).map_err(|e| match e {
                RandError::LengthMismatch { .. } => LoadError::Length(e),
                RandError::Domain { .. } => LoadError::Domain(e.to_string()),
                other => LoadError::Invalid(other.to_string()),
            })?;
        }
        Ok(r)
    }

    /// The file describing `r`, with values as fraction strings.
    pub fn from_randomization(r: &Randomization) -> Self {
        let p = r.partition();
        RandomizationFile {
            theory: match r.theory().domain_size() {
                None => TheorySpec::Dlo,
                Some(n) => TheorySpec::FiniteEnum { n },
            },
            atoms: p
                .names()
                .iter()
                .zip(p.weights())
                .map(|(name, w)| AtomSpec {
                    name: name.clone(),
                    weight: format_fraction(w),
                })
                .collect(),
            elements: r
                .elements()
                .iter()
                .map(|(k, e)| {
                    (
                        k.clone(),
                        e.values().iter().map(|v| ValueSpec::Text(format_fraction(v))).collect(),
                    )
                })
                .collect(),
        }
    }
}

// serde_json appends " at line L column C" to its messages
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_owned(),
        None => msg.to_owned(),
    }
}

pub fn parse(text: &str) -> Result<Randomization, LoadError> {
    RandomizationFile::parse(text)?.to_randomization()
}

pub fn load(path: impl AsRef<Path>) -> Result<Randomization, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const R0: &str = r#"{
        "theory": {"kind": "dlo"},
        "atoms": [{"name": "w1", "weight": "1/2"}, {"name": "w2", "weight": "1/2"}],
        "elements": {"a": ["0", "1"], "b": ["1", "0"]}
    }"#;

    #[test]
    fn loads_r0() {
        let r = parse(R0).unwrap();
        assert_eq!(r.atoms(), 2);
        assert_eq!(r.elements().keys().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn round_trips() {
        let r = parse(R0).unwrap();
        let text = serde_json::to_string(&RandomizationFile::from_randomization(&r)).unwrap();
        let back = parse(&text).unwrap();
        assert_eq!(back.partition(), r.partition());
        assert_eq!(back.elements(), r.elements());
    }

    #[test]
    fn weight_sum_error() {
        let text = R0.replace(r#""weight": "1/2"}]"#, r#""weight": "1/3"}]"#);
        let e = parse(&text).unwrap_err();
        assert_eq!(e.to_string(), "weights sum to 5/6");
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn domain_error() {
        let text = r#"{"theory": {"kind": "finite_enum", "n": 2},
            "atoms": [{"name": "w1", "weight": "1/2"}, {"name": "w2", "weight": "1/2"}],
            "elements": {"b": [0, 3]}}"#;
        let e = parse(text).unwrap_err();
        assert!(e.to_string().starts_with("value out of domain"), "{e}");
        assert_eq!(e.exit_code(), 6);
    }

    #[test]
    fn length_error() {
        let text = R0.replace(r#"["1", "0"]"#, r#"["1"]"#);
        let e = parse(&text).unwrap_err();
        assert_eq!(e.exit_code(), 5);
    }

    #[test]
    fn parse_error_has_location() {
        let e = parse("{\n  \"theory\": ,\n}").unwrap_err();
        match &e {
            LoadError::Parse { line, .. } => assert_eq!(*line, 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn floats_are_rejected() {
        let text = R0.replace(r#"["0", "1"]"#, "[0.5, 1]");
        assert_eq!(parse(&text).unwrap_err().exit_code(), 2);
    }
}
