//! Bayesian learners, the KL distributional regularizer and the learner
//! descriptions evaluated by every other module.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::problem::{consistent_set, FiniteProblem, LabeledSample, Marginal, Predictor, RandomizedHypothesis};
use crate::reductions::properize;
use crate::scalar::{Rational, Scalar};

/// A finitely described learner.
///
/// Every variant receives the marginal alongside the sample (distribution-fixed
/// semantics); only [`LearnerSpec::Properized`] actually reads it.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerSpec {
    /// Emits the prior conditioned on the sample's consistent set.
    Bayesian(RandomizedHypothesis<Rational>),
    /// Always emits one hypothesis.
    Constant(usize),
    /// Explicit map from samples to predictors.
    Table(TableLearner),
    /// Rounds the inner learner's output to its nearest hypothesis.
    Properized(Box<LearnerSpec>),
}

/// Lookup-table learner with an optional default for unlisted samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableLearner {
    entries: BTreeMap<LabeledSample, Predictor<Rational>>,
    fallback: Option<Predictor<Rational>>,
}

impl TableLearner {
    pub fn new(entries: BTreeMap<LabeledSample, Predictor<Rational>>) -> Self {
        Self {
            entries,
            fallback: None,
        }
    }

    /// A table that answers `pred` on every sample.
    pub fn constant(pred: Predictor<Rational>) -> Self {
        Self {
            entries: BTreeMap::new(),
            fallback: Some(pred),
        }
    }

    pub fn with_fallback(mut self, pred: Predictor<Rational>) -> Self {
        self.fallback = Some(pred);
        self
    }

    pub fn insert(&mut self, sample: LabeledSample, pred: Predictor<Rational>) {
        self.entries.insert(sample, pred);
    }

    pub fn entries(&self) -> &BTreeMap<LabeledSample, Predictor<Rational>> {
        &self.entries
    }

    pub fn get(&self, sample: &LabeledSample) -> Option<&Predictor<Rational>> {
        self.entries.get(sample).or(self.fallback.as_ref())
    }
}

impl LearnerSpec {
    /// Predictor emitted on `sample`; randomized outputs are reported by their
    /// per-point label distributions.
    pub fn predict(
        &self,
        marg: &Marginal,
        sample: &LabeledSample,
        problem: &FiniteProblem,
    ) -> Result<Predictor<Rational>> {
        match self {
            LearnerSpec::Bayesian(prior) => {
                let post = posterior(prior, sample, problem)?;
                Ok(pushforward(&post, problem))
            }
            LearnerSpec::Constant(h) => {
                problem.check_hypothesis(*h)?;
                Ok(Predictor::of_hypothesis(problem, *h))
            }
            LearnerSpec::Table(table) => table
                .get(sample)
                .cloned()
                .ok_or_else(|| Error::LearnerUndefined(sample.describe(problem))),
            LearnerSpec::Properized(inner) => {
                let pred = inner.predict(marg, sample, problem)?;
                Ok(Predictor::of_hypothesis(problem, properize(&pred, marg, problem)))
            }
        }
    }

    /// Draws the learner's internal randomness and returns a deterministic labeling.
    ///
    /// Bayesian learners draw a whole hypothesis from the posterior; table rows
    /// with mixed labels are drawn independently per point.
    pub fn realize<R: Rng>(
        &self,
        marg: &Marginal,
        sample: &LabeledSample,
        problem: &FiniteProblem,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        match self {
            LearnerSpec::Bayesian(prior) => {
                let post = posterior(prior, sample, problem)?;
                let w: Vec<f64> = post.weights().iter().map(Scalar::to_f64).collect();
                let idx = WeightedIndex::new(w).map_err(|_| Error::ZeroEvidence)?;
                Ok(problem.hypothesis(idx.sample(rng)).to_vec())
            }
            _ => {
                let pred = self.predict(marg, sample, problem)?;
                if let Some(labels) = pred.as_deterministic() {
                    return Ok(labels);
                }
                pred.rows()
                    .iter()
                    .map(|row| {
                        let w: Vec<f64> = row.iter().map(Scalar::to_f64).collect();
                        WeightedIndex::new(w)
                            .map(|d| d.sample(rng))
                            .map_err(|e| Error::InvalidDistribution(e.to_string()))
                    })
                    .collect()
            }
        }
    }

    pub fn is_bayesian(&self) -> bool {
        matches!(self, LearnerSpec::Bayesian(_))
    }
}

/// Restriction of `prior` to the hypotheses consistent with `sample`, renormalized.
pub fn posterior<S: Scalar>(
    prior: &RandomizedHypothesis<S>,
    sample: &LabeledSample,
    problem: &FiniteProblem,
) -> Result<RandomizedHypothesis<S>> {
    if prior.len() != problem.num_hypotheses() {
        return Err(Error::InvalidDistribution(format!(
            "prior has {} weights, class has {} hypotheses",
            prior.len(),
            problem.num_hypotheses()
        )));
    }
    problem.check_sample(sample)?;
    if sample.is_empty() {
        return Ok(prior.clone());
    }
    let consistent = consistent_set(sample, problem);
    let mut restricted = vec![S::zero(); prior.len()];
    for &h in &consistent {
        restricted[h] = prior.weight(h).clone();
    }
    let evidence = crate::scalar::sum(&restricted);
    if !evidence.is_positive_tol() {
        return Err(Error::ZeroEvidence);
    }
    RandomizedHypothesis::new(restricted.into_iter().map(|w| w / evidence.clone()).collect())
}

/// Prior mass of the consistent set.
pub fn evidence<S: Scalar>(
    prior: &RandomizedHypothesis<S>,
    sample: &LabeledSample,
    problem: &FiniteProblem,
) -> S {
    consistent_set(sample, problem)
        .into_iter()
        .fold(S::zero(), |acc, h| acc + prior.weight(h).clone())
}

/// Pushforward of a randomized hypothesis through `h ↦ h(x)` at every point.
pub fn pushforward<S: Scalar>(dist: &RandomizedHypothesis<S>, problem: &FiniteProblem) -> Predictor<S> {
    let mut rows = vec![vec![S::zero(); problem.num_labels()]; problem.num_points()];
    for (h, w) in dist.weights().iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for (x, &y) in problem.hypothesis(h).iter().enumerate() {
            rows[x][y] = rows[x][y].clone() + w.clone();
        }
    }
    Predictor::new(rows).expect("pushforward of a distribution is stochastic")
}

/// Posterior predictive label distribution at point `x`.
pub fn bayes_predictive<S: Scalar>(
    prior: &RandomizedHypothesis<S>,
    sample: &LabeledSample,
    x: usize,
    problem: &FiniteProblem,
) -> Result<Vec<S>> {
    if x >= problem.num_points() {
        return Err(Error::OutOfRangeEntry(format!("point index {x}")));
    }
    let post = posterior(prior, sample, problem)?;
    let mut out = vec![S::zero(); problem.num_labels()];
    for (h, w) in post.weights().iter().enumerate() {
        let y = problem.hypothesis(h)[x];
        out[y] = out[y].clone() + w.clone();
    }
    Ok(out)
}

/// `Σ_h p(h) ln(p(h)/q(h))` with `0·ln(0/q) = 0` and `+∞` on support violations.
pub fn kl_divergence<S: Scalar>(p: &RandomizedHypothesis<S>, q: &RandomizedHypothesis<S>) -> f64 {
    let mut total = 0.0;
    for (a, b) in p.weights().iter().zip(q.weights()) {
        if a.is_zero() {
            continue;
        }
        if b.is_zero() {
            return f64::INFINITY;
        }
        let (a, b) = (a.to_f64(), b.to_f64());
        total += a * (a / b).ln();
    }
    total.max(0.0)
}

/// Settings for the iterative information projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSrm {
    /// Mirror-descent step in `(0, 1]`.
    pub step: f64,
    pub max_iterations: usize,
    /// Stop once successive iterates differ by less than this in L1.
    pub threshold: f64,
}

impl Default for NumericSrm {
    fn default() -> Self {
        Self {
            step: 0.5,
            max_iterations: 10_000,
            threshold: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SrmMode {
    ClosedForm,
    Numeric(NumericSrm),
}

/// Minimizer of `KL(P ‖ prior)` over distributions supported on the consistent set.
pub fn distributional_srm<S: Scalar>(
    prior: &RandomizedHypothesis<S>,
    sample: &LabeledSample,
    problem: &FiniteProblem,
    mode: SrmMode,
) -> Result<RandomizedHypothesis<S>> {
    match mode {
        SrmMode::ClosedForm => posterior(prior, sample, problem),
        SrmMode::Numeric(cfg) => {
            problem.check_sample(sample)?;
            let support: Vec<usize> = consistent_set(sample, problem)
                .into_iter()
                .filter(|&h| prior.weight(h).is_positive_tol())
                .collect();
            if support.is_empty() {
                return Err(Error::ZeroEvidence);
            }
            let log_q: Vec<f64> = support.iter().map(|&h| prior.weight(h).to_f64().ln()).collect();
            let projected = mirror_descent(&log_q, cfg)?;
            let mut weights = vec![S::zero(); prior.len()];
            for (&h, p) in support.iter().zip(projected) {
                weights[h] = S::from_f64(p);
            }
            RandomizedHypothesis::normalized(weights)
        }
    }
}

/// Entropic mirror descent on `KL(P ‖ Q)` over the simplex, in log space.
///
/// With step `η` the update is `P ← P^(1-η) Q^η / Z`, started from uniform.
fn mirror_descent(log_q: &[f64], cfg: NumericSrm) -> Result<Vec<f64>> {
    let k = log_q.len();
    let mut log_p = vec![-(k as f64).ln(); k];
    let mut p: Vec<f64> = log_p.iter().map(|l| l.exp()).collect();
    for _ in 0..cfg.max_iterations {
        let mut next: Vec<f64> = log_p
            .iter()
            .zip(log_q)
            .map(|(lp, lq)| (1.0 - cfg.step) * lp + cfg.step * lq)
            .collect();
        let z = log_sum_exp(&next);
        next.iter_mut().for_each(|l| *l -= z);
        let next_p: Vec<f64> = next.iter().map(|l| l.exp()).collect();
        let diff: f64 = next_p.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        log_p = next;
        p = next_p;
        if diff < cfg.threshold {
            return Ok(p);
        }
    }
    // gradient of KL(P‖Q) is ln(P/Q) + 1; report its norm projected onto the simplex
    let g: Vec<f64> = log_p.iter().zip(log_q).map(|(lp, lq)| lp - lq + 1.0).collect();
    let mean = g.iter().sum::<f64>() / k as f64;
    let gradient_norm = g.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
    Err(Error::NumericNonconvergence { gradient_norm })
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub enum MixtureVerdict {
    Equal,
    Unequal(Rational),
}

/// Both sides of the mixture identity for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureReport {
    /// `Σ_i p_i · posterior(Q_i, S)`.
    pub mixture_of_posteriors: RandomizedHypothesis<Rational>,
    /// `posterior(Σ_i p_i Q_i, S)`.
    pub posterior_of_mixture: RandomizedHypothesis<Rational>,
    pub distance: Rational,
    pub verdict: MixtureVerdict,
    /// `Q_i(consistent set)` per component.
    pub evidence: Vec<Rational>,
}

impl MixtureReport {
    pub fn equal_evidence(&self) -> bool {
        self.evidence.windows(2).all(|w| w[0] == w[1])
    }
}

/// Compares the mixture of posteriors with the posterior of the mixed prior.
pub fn mix_bayesians_compare(
    priors: &[RandomizedHypothesis<Rational>],
    weights: &[Rational],
    sample: &LabeledSample,
    problem: &FiniteProblem,
) -> Result<MixtureReport> {
    if priors.is_empty() || priors.len() != weights.len() {
        return Err(Error::InvalidQuery(
            "need one mixture weight per prior".into(),
        ));
    }
    let weights = RandomizedHypothesis::new(weights.to_vec())?;
    let evidence: Vec<Rational> = priors.iter().map(|q| evidence(q, sample, problem)).collect();
    let offending: Vec<usize> = (0..priors.len()).filter(|&i| evidence[i].is_zero()).collect();
    if !offending.is_empty() {
        return Err(Error::ComponentZeroEvidence(offending));
    }
    let k = problem.num_hypotheses();
    let mut mixed_post = vec![Rational::zero(); k];
    let mut mixed_prior = vec![Rational::zero(); k];
    for (q, p) in priors.iter().zip(weights.weights()) {
        let post = posterior(q, sample, problem)?;
        for h in 0..k {
            mixed_post[h] += p * post.weight(h);
            mixed_prior[h] += p * q.weight(h);
        }
    }
    let mixture_of_posteriors = RandomizedHypothesis::new(mixed_post)?;
    let posterior_of_mixture = posterior(&RandomizedHypothesis::new(mixed_prior)?, sample, problem)?;
    let distance = mixture_of_posteriors.total_variation(&posterior_of_mixture);
    let verdict = if distance.is_zero() {
        MixtureVerdict::Equal
    } else {
        MixtureVerdict::Unequal(distance.clone())
    };
    Ok(MixtureReport {
        mixture_of_posteriors,
        posterior_of_mixture,
        distance,
        verdict,
        evidence,
    })
}
