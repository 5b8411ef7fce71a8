//! Finite learning problems and the loss/error functionals over them.
//!
//! A [`FiniteProblem`] is a domain `X`, a label set `Y`, a hypothesis table
//! `H ⊆ Y^X` and a bounded metric loss on `Y`. All probabilities that come
//! from a problem file are exact rationals; the functionals are generic over
//! [`Scalar`] so callers pick exact or floating evaluation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::LearnerSpec;
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Default ceiling on the number of weighted samples an exact enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

/// A validated finite supervised learning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProblem {
    domain: Vec<String>,
    labels: Vec<String>,
    hypotheses: Vec<Vec<usize>>,
    loss: Vec<Vec<Rational>>,
    marginals: BTreeMap<String, Marginal>,
}

impl FiniteProblem {
    /// Builds a problem from index-coded hypotheses, checking every invariant.
    ///
    /// Checks run in a fixed order (class, entries, duplicates, metric) and the
    /// first violation is returned.
    pub fn new(
        domain: Vec<String>,
        labels: Vec<String>,
        hypotheses: Vec<Vec<usize>>,
        loss: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::OutOfRangeEntry("domain is empty".into()));
        }
        if labels.is_empty() {
            return Err(Error::OutOfRangeEntry("label set is empty".into()));
        }
        if hypotheses.is_empty() {
            return Err(Error::EmptyClass);
        }
        for (h, row) in hypotheses.iter().enumerate() {
            if row.len() != domain.len() {
                return Err(Error::OutOfRangeEntry(format!(
                    "hypothesis {h} has {} outputs, domain has {} points",
                    row.len(),
                    domain.len()
                )));
            }
            if let Some(&y) = row.iter().find(|&&y| y >= labels.len()) {
                return Err(Error::OutOfRangeEntry(format!(
                    "hypothesis {h} emits label index {y} outside Y"
                )));
            }
        }
        for second in 1..hypotheses.len() {
            if let Some(first) = (0..second).find(|&f| hypotheses[f] == hypotheses[second]) {
                return Err(Error::DuplicateHypothesis { first, second });
            }
        }
        let k = labels.len();
        if loss.len() != k || loss.iter().any(|row| row.len() != k) {
            return Err(Error::OutOfRangeEntry(format!("loss matrix must be {k}x{k}")));
        }
        let one = Rational::one();
        for (a, row) in loss.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if *v < Rational::zero() || *v > one {
                    return Err(Error::OutOfRangeEntry(format!(
                        "loss({}, {}) = {} is outside [0, 1]",
                        labels[a],
                        labels[b],
                        crate::scalar::format_rational(v)
                    )));
                }
            }
        }
        check_metric(&labels, &loss)?;
        Ok(Self {
            domain,
            labels,
            hypotheses,
            loss,
            marginals: BTreeMap::new(),
        })
    }

    /// Attaches a named marginal; its length must match the domain.
    pub fn with_marginal(mut self, name: impl Into<String>, marg: Marginal) -> Result<Self> {
        if marg.len() != self.domain.len() {
            return Err(Error::InvalidDistribution(format!(
                "marginal has {} weights, domain has {} points",
                marg.len(),
                self.domain.len()
            )));
        }
        self.marginals.insert(name.into(), marg);
        Ok(self)
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn hypotheses(&self) -> &[Vec<usize>] {
        &self.hypotheses
    }

    pub fn hypothesis(&self, h: usize) -> &[usize] {
        &self.hypotheses[h]
    }

    pub fn num_points(&self) -> usize {
        self.domain.len()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn num_hypotheses(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn loss(&self, a: usize, b: usize) -> &Rational {
        &self.loss[a][b]
    }

    pub fn loss_matrix(&self) -> &[Vec<Rational>] {
        &self.loss
    }

    /// Loss matrix converted into `S`.
    pub fn loss_as<S: Scalar>(&self) -> Vec<Vec<S>> {
        self.loss
            .iter()
            .map(|row| row.iter().map(S::from_rational).collect())
            .collect()
    }

    pub fn is_zero_one(&self) -> bool {
        self.loss.iter().enumerate().all(|(a, row)| {
            row.iter()
                .enumerate()
                .all(|(b, v)| if a == b { v.is_zero() } else { v.is_one() })
        })
    }

    pub fn marginals(&self) -> &BTreeMap<String, Marginal> {
        &self.marginals
    }

    /// Looks up a named marginal; `"uniform"` resolves even when not declared.
    pub fn marginal(&self, name: &str) -> Result<Marginal> {
        match self.marginals.get(name) {
            Some(m) => Ok(m.clone()),
            None if name == "uniform" => Ok(Marginal::uniform(self.num_points())),
            None => Err(Error::InvalidQuery(format!("no marginal named {name:?}"))),
        }
    }

    pub fn check_hypothesis(&self, h: usize) -> Result<()> {
        if h < self.num_hypotheses() {
            Ok(())
        } else {
            Err(Error::OutOfRangeEntry(format!("hypothesis index {h}")))
        }
    }

    pub fn check_sample(&self, sample: &LabeledSample) -> Result<()> {
        for &(x, y) in sample.pairs() {
            if x >= self.num_points() || y >= self.num_labels() {
                return Err(Error::OutOfRangeEntry(format!("sample pair ({x}, {y})")));
            }
        }
        Ok(())
    }

    /// Canonical JSON used for content hashing.
    pub(crate) fn canonical_json(&self) -> String {
        crate::schema::RawProblem::from_problem(self).to_canonical_json()
    }
}

fn check_metric(labels: &[String], loss: &[Vec<Rational>]) -> Result<()> {
    let k = labels.len();
    let name = |i: usize| labels[i].clone();
    for a in 0..k {
        if !loss[a][a].is_zero() {
            return Err(Error::NonMetricLoss {
                a: name(a),
                b: name(a),
                c: name(a),
                reason: "nonzero self-distance".into(),
            });
        }
    }
    for a in 0..k {
        for b in 0..k {
            if a != b && loss[a][b].is_zero() {
                return Err(Error::NonMetricLoss {
                    a: name(a),
                    b: name(b),
                    c: name(b),
                    reason: "zero distance between distinct labels".into(),
                });
            }
            if loss[a][b] != loss[b][a] {
                return Err(Error::NonMetricLoss {
                    a: name(a),
                    b: name(b),
                    c: name(a),
                    reason: "asymmetric".into(),
                });
            }
        }
    }
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if loss[a][c] > &loss[a][b] + &loss[b][c] {
                    return Err(Error::NonMetricLoss {
                        a: name(a),
                        b: name(b),
                        c: name(c),
                        reason: "triangle inequality fails".into(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// The 0-1 loss on `k` labels.
pub fn zero_one_loss(k: usize) -> Vec<Vec<Rational>> {
    (0..k)
        .map(|a| {
            (0..k)
                .map(|b| if a == b { Rational::zero() } else { Rational::one() })
                .collect()
        })
        .collect()
}

/// Probability vector over the domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marginal {
    weights: Vec<Rational>,
}

impl Marginal {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty marginal".into()));
        }
        if weights.iter().any(|w| *w < Rational::zero()) {
            return Err(Error::InvalidDistribution("negative weight".into()));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {}",
                crate::scalar::format_rational(&total)
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(BigInt::one(), BigInt::from(n));
        Self {
            weights: vec![w; n],
        }
    }

    /// Point mass at `x` over `n` points.
    pub fn point_mass(n: usize, x: usize) -> Self {
        let weights = (0..n)
            .map(|i| if i == x { Rational::one() } else { Rational::zero() })
            .collect();
        Self { weights }
    }

    /// Empirical distribution of a multiset of points (multiplicities kept).
    pub fn empirical(n: usize, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDistribution("no points".into()));
        }
        let mut weights = vec![Rational::zero(); n];
        let unit = Rational::new(BigInt::one(), BigInt::from(points.len()));
        for &x in points {
            if x >= n {
                return Err(Error::OutOfRangeEntry(format!("point index {x}")));
            }
            weights[x] += &unit;
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> &Rational {
        &self.weights[x]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices with positive mass, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&x| self.weights[x] > Rational::zero())
            .collect()
    }

    pub fn weights_as<S: Scalar>(&self) -> Vec<S> {
        self.weights.iter().map(S::from_rational).collect()
    }
}

/// Ordered sequence of `(point index, label index)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledSample {
    pairs: Vec<(usize, usize)>,
}

impl LabeledSample {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Points labeled by hypothesis `truth`.
    pub fn labeled_by(points: &[usize], truth: usize, problem: &FiniteProblem) -> Self {
        let row = problem.hypothesis(truth);
        Self {
            pairs: points.iter().map(|&x| (x, row[x])).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(x, _)| x)
    }

    /// The sample with position `i` removed.
    pub fn without(&self, i: usize) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.remove(i);
        Self { pairs }
    }

    /// Human-readable form using the problem's identifiers.
    pub fn describe(&self, problem: &FiniteProblem) -> String {
        let inner: Vec<String> = self
            .pairs
            .iter()
            .map(|&(x, y)| format!("({},{})", problem.domain()[x], problem.labels()[y]))
            .collect();
        format!("({})", inner.join(","))
    }
}

impl fmt::Display for LabeledSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (x, y)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({x},{y})")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn sums_to_one<S: Scalar>(xs: &[S]) -> bool {
    let total = crate::scalar::sum(xs);
    if S::EXACT {
        total == S::one()
    } else {
        (total - S::one()).abs().to_f64() <= 1e-9
    }
}

/// Per-point label distributions: a `|X| x |Y|` row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Predictor<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        for (x, row) in rows.iter().enumerate() {
            if row.iter().any(|p| *p < S::zero()) || !sums_to_one(row) {
                return Err(Error::InvalidDistribution(format!(
                    "predictor row {x} is not a distribution"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// A deterministic predictor emitting `labels[x]` at each point.
    pub fn deterministic(labels: &[usize], num_labels: usize) -> Self {
        let rows = labels
            .iter()
            .map(|&y| {
                (0..num_labels)
                    .map(|k| if k == y { S::one() } else { S::zero() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn of_hypothesis(problem: &FiniteProblem, h: usize) -> Self {
        Self::deterministic(problem.hypothesis(h), problem.num_labels())
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[S] {
        &self.rows[x]
    }

    pub fn num_points(&self) -> usize {
        self.rows.len()
    }

    /// Label vector when every row is a point mass.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| {
                let mut hit = None;
                for (y, p) in row.iter().enumerate() {
                    if p.is_one() {
                        hit = Some(y);
                    } else if !p.is_zero() {
                        return None;
                    }
                }
                hit
            })
            .collect()
    }

    pub fn cast<T: Scalar>(&self) -> Predictor<T> {
        Predictor {
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|p| T::from_rational(&p.to_rational())).collect())
                .collect(),
        }
    }
}

/// A probability vector over the hypothesis class.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedHypothesis<S> {
    weights: Vec<S>,
}

impl<S: Scalar> RandomizedHypothesis<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if weights.iter().any(|w| *w < S::zero()) {
            return Err(Error::InvalidDistribution("negative weight".into()));
        }
        if !sums_to_one(&weights) {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {}",
                crate::scalar::sum(&weights).to_text()
            )));
        }
        Ok(Self { weights })
    }

    /// Normalizes nonnegative weights with positive total.
    pub fn normalized(weights: Vec<S>) -> Result<Self> {
        let total = crate::scalar::sum(&weights);
        if !total.is_positive_tol() {
            return Err(Error::InvalidDistribution("zero total mass".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total.clone()).collect())
    }

    pub fn uniform(k: usize) -> Self {
        let w = S::one() / S::from_usize(k);
        Self {
            weights: vec![w; k],
        }
    }

    pub fn point_mass(k: usize, h: usize) -> Self {
        Self {
            weights: (0..k)
                .map(|i| if i == h { S::one() } else { S::zero() })
                .collect(),
        }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, h: usize) -> &S {
        &self.weights[h]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&h| self.weights[h] > S::zero())
            .collect()
    }

    /// Total-variation distance (half the L1 distance).
    pub fn total_variation(&self, other: &Self) -> S {
        let l1 = self
            .weights
            .iter()
            .zip(&other.weights)
            .fold(S::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
        l1 / S::from_usize(2)
    }

    /// Converts to exact rationals, renormalizing so the sum is exactly one.
    pub fn to_exact(&self) -> RandomizedHypothesis<Rational> {
        let raw: Vec<Rational> = self
            .weights
            .iter()
            .map(|w| {
                let r = w.to_rational();
                if r < Rational::zero() {
                    Rational::zero()
                } else {
                    r
                }
            })
            .collect();
        let total: Rational = raw.iter().sum();
        RandomizedHypothesis {
            weights: raw.into_iter().map(|w| w / &total).collect(),
        }
    }

    pub fn cast<T: Scalar>(&self) -> RandomizedHypothesis<T> {
        RandomizedHypothesis {
            weights: self
                .weights
                .iter()
                .map(|w| T::from_rational(&w.to_rational()))
                .collect(),
        }
    }
}

/// `(1/n) Σ_i E_{ŷ~pred(x_i)} ℓ(ŷ, y_i)`.
pub fn empirical_risk<S: Scalar>(
    pred: &Predictor<S>,
    sample: &LabeledSample,
    problem: &FiniteProblem,
) -> Result<S> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    problem.check_sample(sample)?;
    let loss = problem.loss_as::<S>();
    let mut total = S::zero();
    for &(x, y) in sample.pairs() {
        total = total + expected_row_loss(pred.row(x), y, &loss);
    }
    Ok(total / S::from_usize(sample.len()))
}

/// `E_{ŷ~row} ℓ(ŷ, target)`.
pub(crate) fn expected_row_loss<S: Scalar>(row: &[S], target: usize, loss: &[Vec<S>]) -> S {
    row.iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .fold(S::zero(), |acc, (y, p)| acc + p.clone() * loss[y][target].clone())
}

/// `Σ_x D(x) E_{ŷ~pred(x)} ℓ(ŷ, h*(x))`.
pub fn true_error<S: Scalar>(
    pred: &Predictor<S>,
    marg: &Marginal,
    truth: usize,
    problem: &FiniteProblem,
) -> Result<S> {
    problem.check_hypothesis(truth)?;
    let loss = problem.loss_as::<S>();
    let row = problem.hypothesis(truth);
    let mut total = S::zero();
    for x in marg.support() {
        total = total
            + S::from_rational(marg.weight(x)) * expected_row_loss(pred.row(x), row[x], &loss);
    }
    Ok(total)
}

/// Indices of hypotheses that agree with every labeled pair of `sample`.
pub fn consistent_set(sample: &LabeledSample, problem: &FiniteProblem) -> Vec<usize> {
    (0..problem.num_hypotheses())
        .filter(|&h| {
            let row = problem.hypothesis(h);
            sample.pairs().iter().all(|&(x, y)| row[x] == y)
        })
        .collect()
}

/// Options for exact sample enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enumeration {
    pub cap: u128,
    /// Emit one representative per multiset with multinomial weight.
    ///
    /// Only valid for learners whose output does not depend on sample order.
    pub collapse: bool,
}

impl Default for Enumeration {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            collapse: false,
        }
    }
}

impl Enumeration {
    pub fn with_cap(cap: u128) -> Self {
        Self {
            cap,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub sample: LabeledSample,
    pub probability: Rational,
}

pub(crate) fn check_cap(base: usize, n: usize, cap: u128) -> Result<()> {
    let required = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::EnumerationCapExceeded { required, cap });
    }
    Ok(())
}

/// Calls `visit` on every sequence in `alphabet^n`, last position fastest.
pub(crate) fn for_each_sequence(alphabet: &[usize], n: usize, mut visit: impl FnMut(&[usize])) {
    if n == 0 {
        visit(&[]);
        return;
    }
    if alphabet.is_empty() {
        return;
    }
    let mut digits = vec![0usize; n];
    let mut seq: Vec<usize> = vec![alphabet[0]; n];
    loop {
        visit(&seq);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < alphabet.len() {
                seq[pos] = alphabet[digits[pos]];
                break;
            }
            digits[pos] = 0;
            seq[pos] = alphabet[0];
        }
    }
}

/// Calls `visit` on every non-decreasing sequence in `alphabet^n`, one per multiset.
///
/// `alphabet` must be sorted.
pub fn for_each_sorted_sequence(alphabet: &[usize], n: usize, mut visit: impl FnMut(&[usize])) {
    for_each_sequence(alphabet, n, |seq| {
        if seq.windows(2).all(|w| w[0] <= w[1]) {
            visit(seq);
        }
    });
}

/// Every size-`n` sample from `marg` labeled by `truth`, with its probability.
pub fn enumerate_weighted_samples(
    marg: &Marginal,
    truth: usize,
    n: usize,
    problem: &FiniteProblem,
    opts: &Enumeration,
) -> Result<Vec<WeightedSample>> {
    problem.check_hypothesis(truth)?;
    let support = marg.support();
    let mut out = Vec::new();
    if opts.collapse {
        let required = multiset_count(support.len(), n);
        if required > opts.cap {
            return Err(Error::EnumerationCapExceeded {
                required,
                cap: opts.cap,
            });
        }
        for_each_sequence(&support, n, |seq| {
            if seq.windows(2).all(|w| w[0] <= w[1]) {
                let probability = multinomial(seq) * sequence_probability(marg, seq);
                out.push(WeightedSample {
                    sample: LabeledSample::labeled_by(seq, truth, problem),
                    probability,
                });
            }
        });
    } else {
        check_cap(support.len(), n, opts.cap)?;
        for_each_sequence(&support, n, |seq| {
            out.push(WeightedSample {
                sample: LabeledSample::labeled_by(seq, truth, problem),
                probability: sequence_probability(marg, seq),
            });
        });
    }
    Ok(out)
}

pub(crate) fn sequence_probability(marg: &Marginal, seq: &[usize]) -> Rational {
    seq.iter().fold(Rational::one(), |acc, &x| acc * marg.weight(x))
}

fn multiset_count(k: usize, n: usize) -> u128 {
    // C(k + n - 1, n)
    if k == 0 {
        return u128::from(n == 0);
    }
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c.saturating_mul(k as u128 + i) / (i + 1);
    }
    c
}

fn multinomial(sorted: &[usize]) -> Rational {
    let mut result = BigInt::one();
    let mut run = 0usize;
    let mut denom = BigInt::one();
    for (i, x) in sorted.iter().enumerate() {
        result *= BigInt::from(i + 1);
        if i > 0 && sorted[i - 1] == *x {
            run += 1;
        } else {
            run = 1;
        }
        denom *= BigInt::from(run);
    }
    Rational::new(result, denom)
}

/// Exact `E_{S~D_{h*}^n} L_{D_{h*}}(A(S))`, integrating randomized outputs analytically.
pub fn expected_error_exact(
    learner: &LearnerSpec,
    marg: &Marginal,
    truth: usize,
    n: usize,
    problem: &FiniteProblem,
    opts: &Enumeration,
) -> Result<Rational> {
    let mut total = Rational::zero();
    for ws in enumerate_weighted_samples(marg, truth, n, problem, opts)? {
        let pred = learner.predict(marg, &ws.sample, problem)?;
        total += ws.probability * true_error(&pred, marg, truth, problem)?;
    }
    Ok(total)
}

/// Monte-Carlo estimate with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub half_width: f64,
}

/// Seeded sampler over a marginal's support.
pub(crate) struct MarginalSampler {
    support: Vec<usize>,
    index: WeightedIndex<f64>,
}

impl MarginalSampler {
    pub(crate) fn new(marg: &Marginal) -> Self {
        let support = marg.support();
        let weights: Vec<f64> = support.iter().map(|&x| marg.weight(x).to_f64()).collect();
        let index = WeightedIndex::new(weights).expect("marginal has positive support");
        Self { support, index }
    }

    pub(crate) fn draw<R: rand::Rng>(&self, rng: &mut R) -> usize {
        self.support[self.index.sample(rng)]
    }

    pub(crate) fn draw_sample<R: rand::Rng>(
        &self,
        rng: &mut R,
        n: usize,
        truth: usize,
        problem: &FiniteProblem,
    ) -> LabeledSample {
        let points: Vec<usize> = (0..n).map(|_| self.draw(rng)).collect();
        LabeledSample::labeled_by(&points, truth, problem)
    }
}

/// Independent generator for trial `trial`; results do not depend on trial order.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn expected_error_mc(
    learner: &LearnerSpec,
    marg: &Marginal,
    truth: usize,
    n: usize,
    trials: usize,
    seed: u64,
    problem: &FiniteProblem,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidQuery("trials must be at least 1".into()));
    }
    problem.check_hypothesis(truth)?;
    let sampler = MarginalSampler::new(marg);
    let mut cache: HashMap<LabeledSample, f64> = HashMap::new();
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let sample = sampler.draw_sample(&mut rng, n, truth, problem);
        let err = match cache.get(&sample) {
            Some(&e) => e,
            None => {
                let pred = learner.predict(marg, &sample, problem)?;
                let e = true_error(&pred, marg, truth, problem)?.to_f64();
                cache.insert(sample, e);
                e
            }
        };
        sum += err;
        sum_sq += err * err;
    }
    let n_trials = trials as f64;
    let mean = sum / n_trials;
    let var = if trials > 1 {
        ((sum_sq - n_trials * mean * mean) / (n_trials - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: mean,
        half_width: 1.96 * (var / n_trials).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::p1;
    use crate::scalar::rat;

    fn labels(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("y{i}")).collect()
    }

    fn metric_problem(loss: Vec<Vec<Rational>>) -> Result<FiniteProblem> {
        FiniteProblem::new(
            vec!["x".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0], vec![1]],
            loss,
        )
    }

    fn sym3(ab: Rational, bc: Rational, ac: Rational) -> Vec<Vec<Rational>> {
        let z = Rational::zero();
        vec![
            vec![z.clone(), ab.clone(), ac.clone()],
            vec![ab, z.clone(), bc.clone()],
            vec![ac, bc, z],
        ]
    }

    #[test]
    fn zero_one_on_three_labels_is_accepted() {
        assert!(metric_problem(zero_one_loss(3)).is_ok());
    }

    #[test]
    fn triangle_with_slack_is_accepted() {
        assert!(metric_problem(sym3(rat(9, 10), rat(9, 10), rat(1, 1))).is_ok());
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let err = metric_problem(sym3(rat(1, 10), rat(1, 10), rat(1, 2))).unwrap_err();
        match err {
            Error::NonMetricLoss { a, b, c, .. } => assert_eq!((a, b, c), ("a".into(), "b".into(), "c".into())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_rejections() {
        let l = zero_one_loss(2);
        let d = vec!["x1".to_string(), "x2".to_string()];
        assert_eq!(
            FiniteProblem::new(d.clone(), labels(2), vec![], l.clone()).unwrap_err(),
            Error::EmptyClass
        );
        assert_eq!(
            FiniteProblem::new(d.clone(), labels(2), vec![vec![0, 1], vec![0, 1]], l.clone())
                .unwrap_err(),
            Error::DuplicateHypothesis { first: 0, second: 1 }
        );
        assert!(matches!(
            FiniteProblem::new(d.clone(), labels(2), vec![vec![0, 2]], l.clone()),
            Err(Error::OutOfRangeEntry(_))
        ));
        let mut too_big = l.clone();
        too_big[0][1] = rat(3, 2);
        too_big[1][0] = rat(3, 2);
        assert!(matches!(
            FiniteProblem::new(d.clone(), labels(2), vec![vec![0, 1]], too_big),
            Err(Error::OutOfRangeEntry(_))
        ));
        let mut asym = l;
        asym[0][1] = rat(1, 2);
        assert!(matches!(
            FiniteProblem::new(d, labels(2), vec![vec![0, 1]], asym),
            Err(Error::NonMetricLoss { .. })
        ));
    }

    #[test]
    fn empirical_risk_examples() {
        let p = p1();
        let s = LabeledSample::new(vec![(0, 0), (1, 1)]);
        let h2 = Predictor::<Rational>::of_hypothesis(&p, 1);
        assert_eq!(empirical_risk(&h2, &s, &p).unwrap(), rat(0, 1));
        let h1 = Predictor::<Rational>::of_hypothesis(&p, 0);
        assert_eq!(empirical_risk(&h1, &s, &p).unwrap(), rat(1, 2));
        let coin = Predictor::new(vec![vec![rat(1, 2), rat(1, 2)]; 2]).unwrap();
        assert_eq!(empirical_risk(&coin, &s, &p).unwrap(), rat(1, 2));
        assert_eq!(
            empirical_risk(&coin, &LabeledSample::empty(), &p).unwrap_err(),
            Error::EmptySample
        );
    }

    #[test]
    fn true_error_examples() {
        let p = p1();
        let h1 = Predictor::<Rational>::of_hypothesis(&p, 0);
        let u = Marginal::uniform(2);
        assert_eq!(true_error(&h1, &u, 0, &p).unwrap(), rat(0, 1));
        assert_eq!(true_error(&h1, &u, 1, &p).unwrap(), rat(1, 2));
        let skew = Marginal::new(vec![rat(4, 5), rat(1, 5)]).unwrap();
        assert_eq!(true_error(&h1, &skew, 1, &p).unwrap(), rat(1, 5));
        // the same computation in binary64 and binary32
        let e64: f64 = true_error(&h1.cast(), &skew, 1, &p).unwrap();
        let e32: f32 = true_error(&h1.cast(), &skew, 1, &p).unwrap();
        assert!((e64 - 0.2).abs() < 1e-15);
        assert!((e32 - 0.2).abs() < 1e-6);
    }

    #[test]
    fn consistent_set_examples() {
        let p = p1();
        assert_eq!(consistent_set(&LabeledSample::empty(), &p), vec![0, 1]);
        assert_eq!(consistent_set(&LabeledSample::new(vec![(0, 0)]), &p), vec![0, 1]);
        assert_eq!(consistent_set(&LabeledSample::new(vec![(1, 1)]), &p), vec![1]);
    }

    #[test]
    fn enumeration_examples() {
        let p = p1();
        let opts = Enumeration::default();
        let u = Marginal::uniform(2);
        let zero = enumerate_weighted_samples(&u, 0, 0, &p, &opts).unwrap();
        assert_eq!(zero.len(), 1);
        assert!(zero[0].sample.is_empty());
        assert_eq!(zero[0].probability, rat(1, 1));
        let two = enumerate_weighted_samples(&u, 0, 2, &p, &opts).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.iter().all(|w| w.probability == rat(1, 4)));
        let skew = Marginal::new(vec![rat(4, 5), rat(1, 5)]).unwrap();
        let one = enumerate_weighted_samples(&skew, 1, 1, &p, &opts).unwrap();
        let probs: Vec<_> = one.iter().map(|w| w.probability.clone()).collect();
        assert_eq!(probs, vec![rat(4, 5), rat(1, 5)]);
        assert_eq!(one[1].sample, LabeledSample::new(vec![(1, 1)]));
    }

    #[test]
    fn enumeration_cap_is_an_error() {
        let p = p1();
        let err = enumerate_weighted_samples(
            &Marginal::uniform(2),
            0,
            5,
            &p,
            &Enumeration::with_cap(16),
        )
        .unwrap_err();
        assert_eq!(err, Error::EnumerationCapExceeded { required: 32, cap: 16 });
    }

    #[test]
    fn collapsed_enumeration_matches_sequences() {
        let p = p1();
        let m = Marginal::new(vec![rat(2, 7), rat(5, 7)]).unwrap();
        let full = enumerate_weighted_samples(&m, 1, 3, &p, &Enumeration::default()).unwrap();
        let coll = enumerate_weighted_samples(
            &m,
            1,
            3,
            &p,
            &Enumeration {
                collapse: true,
                ..Enumeration::default()
            },
        )
        .unwrap();
        assert_eq!(full.len(), 8);
        assert_eq!(coll.len(), 4);
        let total: Rational = coll.iter().map(|w| w.probability.clone()).sum();
        assert_eq!(total, rat(1, 1));
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        let a = expected_error_exact(&bayes, &m, 1, 3, &p, &Enumeration::default()).unwrap();
        let b = expected_error_exact(
            &bayes,
            &m,
            1,
            3,
            &p,
            &Enumeration {
                collapse: true,
                ..Enumeration::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn expected_error_examples() {
        let p = p1();
        let u = Marginal::uniform(2);
        let opts = Enumeration::default();
        for n in 0..4 {
            let c = LearnerSpec::Constant(1);
            assert_eq!(expected_error_exact(&c, &u, 1, n, &p, &opts).unwrap(), rat(0, 1));
        }
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        assert_eq!(expected_error_exact(&bayes, &u, 0, 1, &p, &opts).unwrap(), rat(1, 8));
        assert_eq!(expected_error_exact(&bayes, &u, 1, 1, &p, &opts).unwrap(), rat(1, 8));
    }

    #[test]
    fn monte_carlo_examples() {
        let p = p1();
        let u = Marginal::uniform(2);
        let c = LearnerSpec::Constant(0);
        let est = expected_error_mc(&c, &u, 0, 3, 100, 5, &p).unwrap();
        assert_eq!(est, McEstimate { estimate: 0.0, half_width: 0.0 });
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        let est = expected_error_mc(&bayes, &u, 0, 1, 100_000, 11, &p).unwrap();
        assert!((est.estimate - 0.125).abs() < 0.01, "{est:?}");
        let again = expected_error_mc(&bayes, &u, 0, 1, 100_000, 11, &p).unwrap();
        assert_eq!(est, again);
    }

    #[test]
    fn sequence_enumeration_order() {
        let mut seen = Vec::new();
        for_each_sequence(&[3, 5], 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![3, 3], vec![3, 5], vec![5, 3], vec![5, 5]]);
    }
}
