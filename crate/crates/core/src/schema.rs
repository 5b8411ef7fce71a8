//! JSON file formats for problems and solutions.
//!
//! Problem files name labels by identifier and write rationals as `"p/q"`
//! strings (plain JSON integers and finite decimals are also accepted).
//! Solution files bind to a problem through the SHA-256 of its canonical form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{GameSolution, Method};
use crate::problem::{zero_one_loss, FiniteProblem, Marginal, RandomizedHypothesis};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawLoss {
    Named(String),
    Matrix(Vec<Vec<Value>>),
}

/// A problem file before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProblem {
    pub domain: Vec<Value>,
    pub labels: Vec<Value>,
    pub hypotheses: Vec<Vec<Value>>,
    pub loss: RawLoss,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub marginals: BTreeMap<String, Vec<Value>>,
}

fn identifier(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(Error::Parse(format!("identifier must be a string or number, got {other}"))),
    }
}

fn number(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

impl RawProblem {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_problem(problem: &FiniteProblem) -> Self {
        let labels = problem.labels();
        let loss = if problem.is_zero_one() {
            RawLoss::Named("zero_one".into())
        } else {
            RawLoss::Matrix(
                problem
                    .loss_matrix()
                    .iter()
                    .map(|row| row.iter().map(|v| Value::String(format_rational(v))).collect())
                    .collect(),
            )
        };
        Self {
            domain: problem.domain().iter().cloned().map(Value::String).collect(),
            labels: labels.iter().cloned().map(Value::String).collect(),
            hypotheses: problem
                .hypotheses()
                .iter()
                .map(|row| row.iter().map(|&y| Value::String(labels[y].clone())).collect())
                .collect(),
            loss,
            marginals: problem
                .marginals()
                .iter()
                .map(|(name, m)| {
                    let w = m.weights().iter().map(|v| Value::String(format_rational(v))).collect();
                    (name.clone(), w)
                })
                .collect(),
        }
    }

    /// Compact JSON with fixed key order; the input to [`problem_hash`].
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("raw problem serializes")
    }

    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("raw problem serializes");
        s.push('\n');
        s
    }
}

/// Checks every invariant of a raw problem and builds the validated form.
pub fn validate_problem(raw: &RawProblem) -> Result<FiniteProblem> {
    let domain = raw.domain.iter().map(identifier).collect::<Result<Vec<_>>>()?;
    let labels = raw.labels.iter().map(identifier).collect::<Result<Vec<_>>>()?;
    for (what, ids) in [("domain point", &domain), ("label", &labels)] {
        for j in 1..ids.len() {
            if ids[..j].contains(&ids[j]) {
                return Err(Error::OutOfRangeEntry(format!("duplicate {what} {:?}", ids[j])));
            }
        }
    }
    let hypotheses = raw
        .hypotheses
        .iter()
        .enumerate()
        .map(|(h, row)| {
            row.iter()
                .map(|v| {
                    let id = identifier(v)?;
                    labels.iter().position(|l| *l == id).ok_or_else(|| {
                        Error::OutOfRangeEntry(format!("hypothesis {h} emits unknown label {id:?}"))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let loss = match &raw.loss {
        RawLoss::Named(name) if name == "zero_one" => zero_one_loss(labels.len()),
        RawLoss::Named(name) => return Err(Error::Parse(format!("unknown loss {name:?}"))),
        RawLoss::Matrix(rows) => rows
            .iter()
            .map(|row| row.iter().map(number).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?,
    };
    let mut problem = FiniteProblem::new(domain, labels, hypotheses, loss)?;
    for (name, weights) in &raw.marginals {
        let w = weights.iter().map(number).collect::<Result<Vec<_>>>()?;
        problem = problem.with_marginal(name.clone(), Marginal::new(w)?)?;
    }
    Ok(problem)
}

pub fn parse_problem(text: &str) -> Result<FiniteProblem> {
    validate_problem(&RawProblem::from_json(text)?)
}

/// Hex SHA-256 of the problem's canonical JSON.
pub fn problem_hash(problem: &FiniteProblem) -> String {
    let digest = Sha256::digest(problem.canonical_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Persisted form of a [`GameSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub problem_hash: String,
    pub marginal: String,
    pub marginal_weights: Vec<String>,
    pub n: usize,
    pub method: Method,
    /// `"rational"` or `"f64"`.
    pub scalar: String,
    pub value: String,
    pub adversary_prior: Vec<String>,
    pub duality_gap: String,
    pub converged: bool,
    pub degenerate: bool,
    pub iterations: usize,
}

fn scalar_tag<S: Scalar>() -> &'static str {
    if S::EXACT {
        "rational"
    } else if std::mem::size_of::<S>() == 4 {
        "f32"
    } else {
        "f64"
    }
}

fn text_value<S: Scalar>(text: &str) -> Result<S> {
    S::from_text(text).ok_or_else(|| Error::Parse(format!("bad number {text:?}")))
}

impl SolutionFile {
    pub fn from_solution<S: Scalar>(sol: &GameSolution<S>, problem_hash: &str) -> Self {
        Self {
            problem_hash: problem_hash.to_string(),
            marginal: sol.marginal_id.clone(),
            marginal_weights: sol.marginal.weights().iter().map(format_rational).collect(),
            n: sol.n,
            method: sol.method,
            scalar: scalar_tag::<S>().to_string(),
            value: sol.value.to_text(),
            adversary_prior: sol.adversary_prior.weights().iter().map(Scalar::to_text).collect(),
            duality_gap: sol.duality_gap.to_text(),
            converged: sol.converged,
            degenerate: sol.degenerate,
            iterations: sol.iterations,
        }
    }

    /// Rebuilds the solution; `S` must match the stored scalar tag.
    pub fn to_solution<S: Scalar>(&self) -> Result<GameSolution<S>> {
        if self.scalar != scalar_tag::<S>() {
            return Err(Error::Parse(format!(
                "solution stores {} values, {} requested",
                self.scalar,
                scalar_tag::<S>()
            )));
        }
        let weights = self
            .marginal_weights
            .iter()
            .map(|w| parse_rational(w))
            .collect::<Result<Vec<_>>>()?;
        let prior = self
            .adversary_prior
            .iter()
            .map(|w| text_value::<S>(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(GameSolution {
            value: text_value(&self.value)?,
            adversary_prior: RandomizedHypothesis::new(prior)?,
            method: self.method,
            duality_gap: text_value(&self.duality_gap)?,
            n: self.n,
            marginal_id: self.marginal.clone(),
            marginal: Marginal::new(weights)?,
            degenerate: self.degenerate,
            iterations: self.iterations,
            converged: self.converged,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serializes");
        s.push('\n');
        s
    }
}
