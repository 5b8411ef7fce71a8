//! The distribution-fixed learning game for one `(problem, marginal, n)`.
//!
//! The adversary picks the true hypothesis, the learner picks a map from
//! size-`n` samples to predictors, and the payoff is the learner's expected
//! error. [`solve_game`] finds the value and an adversary-optimal prior;
//! [`build_proper_learner`] turns that prior into a Bayesian learner.

use std::collections::{BTreeMap, HashSet};

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{LearnerSpec, TableLearner};
use crate::error::{Error, Result};
use crate::lp::solve_zero_sum;
use crate::problem::{
    check_cap, expected_error_exact, for_each_sequence, sequence_probability, Enumeration,
    FiniteProblem, LabeledSample, Marginal, Predictor, RandomizedHypothesis,
};
use crate::scalar::{rat, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactLp,
    MultiplicativeWeights,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactLp => "exact_lp",
            Method::MultiplicativeWeights => "multiplicative_weights",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Target primal-dual gap for the iterative method.
    pub tolerance: f64,
    /// Maximum number of best-response evaluations.
    pub iteration_cap: usize,
    /// Rounds of multiplicative-weights play before the restricted-game polish.
    pub mw_rounds: usize,
    pub enumeration: Enumeration,
}

impl SolverConfig {
    pub fn exact() -> Self {
        Self {
            method: Method::ExactLp,
            tolerance: 1e-9,
            iteration_cap: 10_000,
            mw_rounds: 0,
            enumeration: Enumeration::default(),
        }
    }

    pub fn iterative() -> Self {
        Self {
            method: Method::MultiplicativeWeights,
            tolerance: 1e-6,
            iteration_cap: 10_000,
            mw_rounds: 200,
            enumeration: Enumeration::default(),
        }
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.enumeration.cap = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.iteration_cap == 0 || self.enumeration.cap == 0 {
            return Err(Error::InvalidQuery(
                "solver tolerance must be positive and caps at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::exact()
    }
}

/// Minimax value and adversary-optimal prior.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution<S> {
    pub value: S,
    pub adversary_prior: RandomizedHypothesis<S>,
    pub method: Method,
    pub duality_gap: S,
    pub n: usize,
    pub marginal_id: String,
    pub marginal: Marginal,
    /// The final restricted game had a degenerate optimal basis, so the
    /// returned prior may be one of several optimal vertices.
    pub degenerate: bool,
    /// Best-response evaluations performed.
    pub iterations: usize,
    pub converged: bool,
}

impl<S: Scalar> GameSolution<S> {
    pub fn with_marginal_id(mut self, id: impl Into<String>) -> Self {
        self.marginal_id = id.into();
        self
    }
}

/// A realizable labeled sample with its probability weight `Π_i D(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizableSample<S> {
    pub sample: LabeledSample,
    pub weight: S,
    pub consistent: Vec<usize>,
}

/// Precomputed sample space of the game in scalar type `S`.
#[derive(Debug, Clone)]
pub struct GameInstance<S> {
    hypotheses: Vec<Vec<usize>>,
    num_labels: usize,
    loss: Vec<Vec<S>>,
    point_weight: Vec<S>,
    support: Vec<usize>,
    samples: Vec<RealizableSample<S>>,
}

impl<S: Scalar> GameInstance<S> {
    /// Enumerates every realizable size-`n` sample supported on `supp(D)`.
    pub fn new(problem: &FiniteProblem, marg: &Marginal, n: usize, opts: &Enumeration) -> Result<Self> {
        if marg.len() != problem.num_points() {
            return Err(Error::InvalidDistribution("marginal length mismatch".into()));
        }
        let support = marg.support();
        check_cap(support.len(), n, opts.cap)?;
        let mut samples = Vec::new();
        for_each_sequence(&support, n, |seq| {
            let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for (h, row) in problem.hypotheses().iter().enumerate() {
                let labels: Vec<usize> = seq.iter().map(|&x| row[x]).collect();
                groups.entry(labels).or_default().push(h);
            }
            let weight = S::from_rational(&sequence_probability(marg, seq));
            for (labels, consistent) in groups {
                samples.push(RealizableSample {
                    sample: LabeledSample::new(seq.iter().copied().zip(labels).collect()),
                    weight: weight.clone(),
                    consistent,
                });
            }
        });
        Ok(Self {
            hypotheses: problem.hypotheses().to_vec(),
            num_labels: problem.num_labels(),
            loss: problem.loss_as(),
            point_weight: marg.weights_as(),
            support,
            samples,
        })
    }

    pub fn samples(&self) -> &[RealizableSample<S>] {
        &self.samples
    }

    pub fn num_hypotheses(&self) -> usize {
        self.hypotheses.len()
    }

    /// `ε*(Λ)` and the deterministic arg-min labeling for every sample.
    ///
    /// Ties go to the lowest label index; the sum runs in a fixed order.
    pub fn best_response(&self, prior: &[S]) -> (S, Vec<Vec<usize>>) {
        let num_points = self.point_weight.len();
        let mut value = S::zero();
        let mut labels = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            let mut choice = vec![0usize; num_points];
            let mut sample_value = S::zero();
            for (x, slot) in choice.iter_mut().enumerate() {
                let mut best: Option<S> = None;
                for y in 0..self.num_labels {
                    let cost = s.consistent.iter().fold(S::zero(), |acc, &h| {
                        acc + prior[h].clone() * self.loss[self.hypotheses[h][x]][y].clone()
                    });
                    if best.as_ref().map_or(true, |b| cost < *b) {
                        best = Some(cost);
                        *slot = y;
                    }
                }
                if !self.point_weight[x].is_zero() {
                    sample_value = sample_value + self.point_weight[x].clone() * best.unwrap_or_else(S::zero);
                }
            }
            value = value + s.weight.clone() * sample_value;
            labels.push(choice);
        }
        (value, labels)
    }

    /// `ε(h, A)` for every `h`, where `A` emits `labels[s]` on sample `s`.
    pub fn learner_errors(&self, labels: &[Vec<usize>]) -> Vec<S> {
        let mut errors = vec![S::zero(); self.hypotheses.len()];
        for (s, choice) in self.samples.iter().zip(labels) {
            for &h in &s.consistent {
                let row = &self.hypotheses[h];
                let e = self.support.iter().fold(S::zero(), |acc, &x| {
                    acc + self.point_weight[x].clone() * self.loss[choice[x]][row[x]].clone()
                });
                errors[h] = errors[h].clone() + s.weight.clone() * e;
            }
        }
        errors
    }

    /// Table learner emitting `labels[s]` on sample `s`.
    pub fn table(&self, labels: &[Vec<usize>]) -> TableLearner {
        let mut t = TableLearner::default();
        for (s, choice) in self.samples.iter().zip(labels) {
            t.insert(s.sample.clone(), Predictor::deterministic(choice, self.num_labels));
        }
        t
    }

    /// Per-truth expected error of the Bayesian learner with `prior`.
    pub fn bayes_errors(&self, prior: &[S]) -> Result<Vec<S>> {
        let num_points = self.point_weight.len();
        let mut errors = vec![S::zero(); self.hypotheses.len()];
        for s in &self.samples {
            let evidence = s.consistent.iter().fold(S::zero(), |acc, &h| acc + prior[h].clone());
            if !evidence.is_positive_tol() {
                return Err(Error::ZeroEvidence);
            }
            let mut predictive = vec![vec![S::zero(); self.num_labels]; num_points];
            for &h in &s.consistent {
                if prior[h].is_zero() {
                    continue;
                }
                let p = prior[h].clone() / evidence.clone();
                for &x in &self.support {
                    let y = self.hypotheses[h][x];
                    predictive[x][y] = predictive[x][y].clone() + p.clone();
                }
            }
            for &h in &s.consistent {
                let row = &self.hypotheses[h];
                let mut e = S::zero();
                for &x in &self.support {
                    let inner = predictive[x].iter().enumerate().fold(S::zero(), |acc, (y, p)| {
                        if p.is_zero() {
                            acc
                        } else {
                            acc + p.clone() * self.loss[y][row[x]].clone()
                        }
                    });
                    e = e + self.point_weight[x].clone() * inner;
                }
                errors[h] = errors[h].clone() + s.weight.clone() * e;
            }
        }
        Ok(errors)
    }
}

/// `ε*(Λ)` and the arg-min table learner for prior `Λ`.
pub fn best_response<S: Scalar>(
    prior: &RandomizedHypothesis<S>,
    marg: &Marginal,
    n: usize,
    problem: &FiniteProblem,
    opts: &Enumeration,
) -> Result<(S, LearnerSpec)> {
    if prior.len() != problem.num_hypotheses() {
        return Err(Error::InvalidDistribution("prior length mismatch".into()));
    }
    let inst = GameInstance::<S>::new(problem, marg, n, opts)?;
    let (value, labels) = inst.best_response(prior.weights());
    Ok((value, LearnerSpec::Table(inst.table(&labels))))
}

/// Solves the game to its minimax value.
///
/// Both methods grow a set of deterministic learners and re-solve the
/// restricted matrix game; a column enters when the best response to the
/// current adversary prior beats the restricted value. `ExactLp` starts from
/// a single best response and terminates with a zero duality gap. The
/// iterative method first plays `mw_rounds` of multiplicative-weights
/// dynamics (adversary on Hedge, learner on best response) to seed the
/// column set, then polishes until the gap is within `tolerance`.
pub fn solve_game<S: Scalar>(
    problem: &FiniteProblem,
    marg: &Marginal,
    n: usize,
    cfg: &SolverConfig,
) -> Result<GameSolution<S>> {
    cfg.validate()?;
    let inst = GameInstance::<S>::new(problem, marg, n, &cfg.enumeration)?;
    let k = problem.num_hypotheses();
    let mut columns: Vec<Vec<S>> = Vec::new();
    let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::new();
    let mut iterations = 0usize;

    let mut add = |labels: Vec<Vec<usize>>, columns: &mut Vec<Vec<S>>| {
        if seen.insert(labels.clone()) {
            columns.push(inst.learner_errors(&labels));
            true
        } else {
            false
        }
    };

    if cfg.method == Method::MultiplicativeWeights {
        let rounds = cfg.mw_rounds.min(cfg.iteration_cap).max(1);
        let eta = (8.0 * (k as f64).ln() / rounds as f64).sqrt();
        let mut log_w = vec![0.0f64; k];
        for _ in 0..rounds {
            let m = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = log_w.iter().map(|l| (l - m).exp()).collect();
            let z: f64 = w.iter().sum();
            let prior: Vec<S> = w.iter().map(|v| S::from_f64(v / z)).collect();
            let (_, labels) = inst.best_response(&prior);
            let gains: Vec<f64> = inst.learner_errors(&labels).iter().map(Scalar::to_f64).collect();
            for (l, g) in log_w.iter_mut().zip(&gains) {
                *l += eta * g;
            }
            iterations += 1;
            add(labels, &mut columns);
        }
    } else {
        let uniform = vec![S::one() / S::from_usize(k); k];
        let (_, labels) = inst.best_response(&uniform);
        iterations += 1;
        add(labels, &mut columns);
    }

    let tol = if S::EXACT { S::zero() } else { S::from_f64(cfg.tolerance) };
    loop {
        // payoff rows are hypotheses (maximizer), columns are learners
        let payoff: Vec<Vec<S>> = (0..k)
            .map(|h| columns.iter().map(|c| c[h].clone()).collect())
            .collect();
        let restricted = solve_zero_sum(&payoff, 100_000)?;
        let prior = clamp_to_simplex(restricted.maximizer);
        let (response, labels) = inst.best_response(prior.weights());
        iterations += 1;
        let gap = restricted.value.clone() - response;
        let gap = if gap < S::zero() { S::zero() } else { gap };
        let solution = |converged: bool, gap: S| GameSolution {
            value: restricted.value.clone(),
            adversary_prior: prior.clone(),
            method: cfg.method,
            duality_gap: gap,
            n,
            marginal_id: String::new(),
            marginal: marg.clone(),
            degenerate: restricted.degenerate,
            iterations,
            converged,
        };
        if gap <= tol {
            return Ok(solution(true, gap));
        }
        if !add(labels, &mut columns) {
            // no new column can close the gap: floating-point stall
            return Err(Error::IterationCapExceeded {
                best_value: restricted.value.to_f64(),
                gap: gap.to_f64(),
                prior: prior.weights().iter().map(Scalar::to_f64).collect(),
            });
        }
        if iterations >= cfg.iteration_cap {
            return Err(Error::IterationCapExceeded {
                best_value: restricted.value.to_f64(),
                gap: gap.to_f64(),
                prior: prior.weights().iter().map(Scalar::to_f64).collect(),
            });
        }
    }
}

fn clamp_to_simplex<S: Scalar>(weights: Vec<S>) -> RandomizedHypothesis<S> {
    let clamped: Vec<S> = weights
        .into_iter()
        .map(|w| if w < S::zero() { S::zero() } else { w })
        .collect();
    RandomizedHypothesis::normalized(clamped).expect("optimal dual has positive mass")
}

/// The Bayesian learner whose prior is the adversary-optimal prior.
pub fn build_proper_learner<S: Scalar>(sol: &GameSolution<S>) -> LearnerSpec {
    LearnerSpec::Bayesian(sol.adversary_prior.to_exact())
}

/// `num / den`, with `0/0 = 1` and `x/0 = ∞` for `x > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
}

impl Ratio {
    pub fn of(num: &Rational, den: &Rational) -> Self {
        if den.is_zero() {
            if num.is_zero() {
                Ratio::Finite(Rational::one())
            } else {
                Ratio::Infinite
            }
        } else {
            Ratio::Finite(num / den)
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ratio::Finite(r) => r.to_f64(),
            Ratio::Infinite => f64::INFINITY,
        }
    }

    pub fn at_most(&self, bound: &Rational) -> bool {
        match self {
            Ratio::Finite(r) => r <= bound,
            Ratio::Infinite => false,
        }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&crate::scalar::format_rational(r)),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub per_truth: Vec<Rational>,
    pub max: Rational,
    /// `max / value` when a game value was supplied.
    pub ratio: Option<Ratio>,
}

/// Exact expected error of `learner` against every truth.
pub fn evaluate_worstcase(
    learner: &LearnerSpec,
    marg: &Marginal,
    n: usize,
    problem: &FiniteProblem,
    opts: &Enumeration,
    game_value: Option<&Rational>,
) -> Result<WorstCase> {
    let per_truth = (0..problem.num_hypotheses())
        .map(|h| expected_error_exact(learner, marg, h, n, problem, opts))
        .collect::<Result<Vec<_>>>()?;
    let max = per_truth.iter().max().cloned().unwrap_or_else(Rational::zero);
    let ratio = game_value.map(|v| Ratio::of(&max, v));
    Ok(WorstCase {
        per_truth,
        max,
        ratio,
    })
}

/// Settings for the derivative-free search over Bayesian priors.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSearch {
    /// Number of prior evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Optional starting prior; it and light smoothings toward uniform are tried first.
    pub hint: Option<RandomizedHypothesis<Rational>>,
}

impl PriorSearch {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            hint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorSearchResult {
    pub prior: RandomizedHypothesis<Rational>,
    pub worst_case: Rational,
    pub ratio: Ratio,
    pub evaluations: usize,
}

/// Seeded multi-start plus pairwise mass-transfer refinement over the prior simplex.
///
/// When `game_value` is `None` the exact game is solved to compute the ratio.
pub fn search_proper_prior(
    problem: &FiniteProblem,
    marg: &Marginal,
    n: usize,
    search: &PriorSearch,
    opts: &Enumeration,
    game_value: Option<&Rational>,
) -> Result<PriorSearchResult> {
    if search.budget == 0 {
        return Err(Error::InvalidQuery("search budget must be at least 1".into()));
    }
    let value = match game_value {
        Some(v) => v.clone(),
        None => {
            solve_game::<Rational>(problem, marg, n, &SolverConfig::exact().with_cap(opts.cap))?.value
        }
    };
    let inst = GameInstance::<Rational>::new(problem, marg, n, opts)?;
    let k = problem.num_hypotheses();
    let mut rng = crate::problem::trial_rng(search.seed, 0);
    let mut evaluations = 0usize;
    let mut best: Option<(Vec<Rational>, Rational)> = None;

    let evaluate = |prior: &[Rational], best: &mut Option<(Vec<Rational>, Rational)>, evaluations: &mut usize| -> bool {
        *evaluations += 1;
        let Ok(errors) = inst.bayes_errors(prior) else {
            return false;
        };
        let worst = errors.into_iter().max().unwrap_or_else(Rational::zero);
        let better = best.as_ref().map_or(true, |(_, b)| worst < *b);
        if better {
            *best = Some((prior.to_vec(), worst));
        }
        better
    };

    let uniform = vec![rat(1, k as i64); k];
    let mut starts = vec![uniform.clone()];
    if let Some(hint) = &search.hint {
        starts.push(hint.weights().to_vec());
        for t in [rat(1, 1000), rat(1, 100), rat(1, 10)] {
            let one_minus = Rational::one() - &t;
            starts.push(
                hint.weights()
                    .iter()
                    .zip(&uniform)
                    .map(|(h, u)| h * &one_minus + u * &t)
                    .collect(),
            );
        }
    }
    let start_budget = (search.budget / 4).max(starts.len().min(search.budget)).max(1);
    let mut next_start = 0;
    while evaluations < start_budget {
        let prior = if next_start < starts.len() {
            next_start += 1;
            starts[next_start - 1].clone()
        } else {
            random_prior(&mut rng, k)
        };
        evaluate(&prior, &mut best, &mut evaluations);
    }

    let min_step = rat(1, 1 << 20);
    let mut step = rat(1, 4);
    while evaluations < search.budget {
        let Some((current, _)) = best.clone() else {
            let prior = random_prior(&mut rng, k);
            evaluate(&prior, &mut best, &mut evaluations);
            continue;
        };
        let mut improved = false;
        'moves: for i in 0..k {
            for j in 0..k {
                if i == j || current[i].is_zero() || evaluations >= search.budget {
                    continue;
                }
                let delta = if current[i] < step { current[i].clone() } else { step.clone() };
                let mut cand = current.clone();
                cand[i] -= &delta;
                cand[j] += &delta;
                if evaluate(&cand, &mut best, &mut evaluations) {
                    improved = true;
                    break 'moves;
                }
            }
        }
        if evaluations >= search.budget {
            break;
        }
        if !improved {
            step /= rat(2, 1);
            if step < min_step {
                // local optimum at this resolution; restart from a random prior
                step = rat(1, 4);
                let prior = random_prior(&mut rng, k);
                evaluate(&prior, &mut best, &mut evaluations);
            }
        }
    }

    let (prior, worst_case) = best.expect("uniform prior has full support");
    Ok(PriorSearchResult {
        ratio: Ratio::of(&worst_case, &value),
        prior: RandomizedHypothesis::new(prior)?,
        worst_case,
        evaluations,
    })
}

fn random_prior<R: Rng>(rng: &mut R, k: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=12)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| rat(w, total)).collect()
}
