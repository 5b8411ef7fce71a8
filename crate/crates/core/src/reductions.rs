//! Properization, the transductive model, the leave-one-out and factor-`e`
//! checks, confidence boosting and sample-complexity sweeps.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bayes::LearnerSpec;
use crate::error::{Error, Result};
use crate::game::{solve_game, Ratio, SolverConfig};
use crate::problem::{
    check_cap, empirical_risk, enumerate_weighted_samples, expected_error_exact, expected_row_loss,
    for_each_sequence, sequence_probability, trial_rng, true_error, Enumeration, FiniteProblem,
    LabeledSample, Marginal, MarginalSampler, McEstimate, Predictor,
};
use crate::scalar::{Rational, Scalar};

/// `E_{x~D} E ℓ(f(x), g(x))` with independent draws from the two rows.
pub fn dist_between<S: Scalar>(f: &Predictor<S>, g: &Predictor<S>, marg: &Marginal, problem: &FiniteProblem) -> S {
    let loss = problem.loss_as::<S>();
    let mut total = S::zero();
    for x in marg.support() {
        let mut inner = S::zero();
        for (a, pa) in f.row(x).iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, pb) in g.row(x).iter().enumerate() {
                if !pb.is_zero() {
                    inner = inner + pa.clone() * pb.clone() * loss[a][b].clone();
                }
            }
        }
        total = total + S::from_rational(marg.weight(x)) * inner;
    }
    total
}

/// Nearest hypothesis to `pred` under [`dist_between`]; ties go to the lowest index.
pub fn properize<S: Scalar>(pred: &Predictor<S>, marg: &Marginal, problem: &FiniteProblem) -> usize {
    let mut best = 0;
    let mut best_dist: Option<S> = None;
    for h in 0..problem.num_hypotheses() {
        let d = dist_between(&Predictor::<S>::of_hypothesis(problem, h), pred, marg, problem);
        if best_dist.as_ref().map_or(true, |b| d < *b) {
            best = h;
            best_dist = Some(d);
        }
    }
    best
}

/// Largest of two ratios, treating `Infinite` as the top element.
pub fn max_ratio(a: Ratio, b: Ratio) -> Ratio {
    match (&a, &b) {
        (Ratio::Infinite, _) => a,
        (_, Ratio::Infinite) => b,
        (Ratio::Finite(x), Ratio::Finite(y)) => {
            if y > x {
                b
            } else {
                a
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProperizationReport {
    pub samples_checked: usize,
    pub max_ratio: Ratio,
    pub violations: usize,
    /// `(truth, sample, inner error, properized error)` of the first violation.
    pub first_violation: Option<(usize, LabeledSample, Rational, Rational)>,
}

impl ProperizationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `L(Properized(inner)(S)) ≤ 2·L(inner(S))` on every truth and realizable sample.
pub fn properization_bound_check(
    inner: &LearnerSpec,
    marg: &Marginal,
    n: usize,
    problem: &FiniteProblem,
    opts: &Enumeration,
) -> Result<ProperizationReport> {
    let two = Rational::from_integer(BigInt::from(2));
    let mut report = ProperizationReport {
        samples_checked: 0,
        max_ratio: Ratio::Finite(Rational::zero()),
        violations: 0,
        first_violation: None,
    };
    for truth in 0..problem.num_hypotheses() {
        for ws in enumerate_weighted_samples(marg, truth, n, problem, opts)? {
            let pred = inner.predict(marg, &ws.sample, problem)?;
            let inner_err = true_error(&pred, marg, truth, problem)?;
            let h = properize(&pred, marg, problem);
            let proper_err = true_error(&Predictor::of_hypothesis(problem, h), marg, truth, problem)?;
            report.samples_checked += 1;
            report.max_ratio = max_ratio(report.max_ratio, Ratio::of(&proper_err, &inner_err));
            if proper_err > &two * &inner_err {
                report.violations += 1;
                if report.first_violation.is_none() {
                    report.first_violation = Some((truth, ws.sample.clone(), inner_err, proper_err));
                }
            }
        }
    }
    Ok(report)
}

/// An unlabeled sequence of `m ≥ 2` points labeled by `truth`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransductiveInstance {
    points: Vec<usize>,
    truth: usize,
}

impl TransductiveInstance {
    pub fn new(points: Vec<usize>, truth: usize, problem: &FiniteProblem) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidQuery("transductive instances need at least two points".into()));
        }
        if let Some(&x) = points.iter().find(|&&x| x >= problem.num_points()) {
            return Err(Error::OutOfRangeEntry(format!("point index {x}")));
        }
        problem.check_hypothesis(truth)?;
        Ok(Self { points, truth })
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn truth(&self) -> usize {
        self.truth
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Uniform distribution over the points with multiplicity.
    pub fn empirical_marginal(&self, problem: &FiniteProblem) -> Marginal {
        Marginal::empirical(problem.num_points(), &self.points).expect("instance is nonempty")
    }

    fn held_out(&self, i: usize) -> Vec<usize> {
        let mut rest = self.points.clone();
        rest.remove(i);
        rest
    }
}

fn rational_of(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Transductive error with the learner given the instance's empirical marginal.
pub fn transductive_error(learner: &LearnerSpec, inst: &TransductiveInstance, problem: &FiniteProblem) -> Result<Rational> {
    transductive_error_with(learner, inst, &inst.empirical_marginal(problem), problem)
}

/// `(1/m) Σ_i E ℓ(A(S_{-i})(x_i), h*(x_i))` with the learner given `marg`.
pub fn transductive_error_with(
    learner: &LearnerSpec,
    inst: &TransductiveInstance,
    marg: &Marginal,
    problem: &FiniteProblem,
) -> Result<Rational> {
    let loss = problem.loss_matrix();
    let truth = problem.hypothesis(inst.truth);
    let mut total = Rational::zero();
    for (i, &x) in inst.points.iter().enumerate() {
        let train = LabeledSample::labeled_by(&inst.held_out(i), inst.truth, problem);
        let pred = learner.predict(marg, &train, problem)?;
        total += expected_row_loss(pred.row(x), truth[x], loss);
    }
    Ok(total / rational_of(inst.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooReport {
    /// `E_{S~D^m} L_D(A(S))`.
    pub expected_error: Rational,
    /// `E_{S~D^{m+1}} E_i ℓ(A(S_{-i})(x_i), y_i)`.
    pub leave_one_out: Rational,
    /// Largest transductive error over size-`m+1` instances on `supp(D)`.
    pub max_transductive: Rational,
}

impl LooReport {
    pub fn identity_holds(&self) -> bool {
        self.expected_error == self.leave_one_out
    }

    pub fn inequality_holds(&self) -> bool {
        self.expected_error <= self.max_transductive
    }
}

/// Computes both sides of the leave-one-out argument exactly for one truth.
pub fn loo_bound_check(
    learner: &LearnerSpec,
    marg: &Marginal,
    truth: usize,
    m: usize,
    problem: &FiniteProblem,
    opts: &Enumeration,
) -> Result<LooReport> {
    if m == 0 {
        return Err(Error::InvalidQuery("leave-one-out check needs m ≥ 1".into()));
    }
    problem.check_hypothesis(truth)?;
    let expected_error = expected_error_exact(learner, marg, truth, m, problem, opts)?;
    let support = marg.support();
    check_cap(support.len(), m + 1, opts.cap)?;
    let mut leave_one_out = Rational::zero();
    let mut max_transductive: Option<Rational> = None;
    let mut failure = None;
    for_each_sequence(&support, m + 1, |seq| {
        if failure.is_some() {
            return;
        }
        let inst = TransductiveInstance {
            points: seq.to_vec(),
            truth,
        };
        match transductive_error_with(learner, &inst, marg, problem) {
            Ok(err) => {
                leave_one_out += sequence_probability(marg, seq) * &err;
                if max_transductive.as_ref().map_or(true, |b| err > *b) {
                    max_transductive = Some(err);
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(LooReport {
        expected_error,
        leave_one_out,
        max_transductive: max_transductive.unwrap_or_else(Rational::zero),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransductiveMode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluated {
    Exact(Rational),
    Estimate(McEstimate),
}

impl Evaluated {
    pub fn to_f64(&self) -> f64 {
        match self {
            Evaluated::Exact(r) => r.to_f64(),
            Evaluated::Estimate(e) => e.estimate,
        }
    }
}

/// Transductive error of the learner `B` built from a distribution-fixed learner.
///
/// On held-out `x_i`, `B` returns the observed label if `x_i` occurs among the
/// other points; otherwise it trains the inner learner, with marginal
/// `Unif(S_X)`, on `m-1` points drawn uniformly from the other points.
pub fn df_to_transductive(
    df_learner: &LearnerSpec,
    inst: &TransductiveInstance,
    mode: TransductiveMode,
    problem: &FiniteProblem,
    opts: &Enumeration,
) -> Result<Evaluated> {
    let m = inst.len();
    let marg = inst.empirical_marginal(problem);
    let loss = problem.loss_matrix();
    let truth = problem.hypothesis(inst.truth);
    match mode {
        TransductiveMode::Exact => {
            check_cap(m - 1, m - 1, opts.cap)?;
            let mut total = Rational::zero();
            for (i, &x) in inst.points.iter().enumerate() {
                let rest = inst.held_out(i);
                if rest.contains(&x) {
                    continue;
                }
                let positions: Vec<usize> = (0..rest.len()).collect();
                let mut held = Rational::zero();
                let mut failure = None;
                for_each_sequence(&positions, m - 1, |idx| {
                    if failure.is_some() {
                        return;
                    }
                    let pts: Vec<usize> = idx.iter().map(|&j| rest[j]).collect();
                    let train = LabeledSample::labeled_by(&pts, inst.truth, problem);
                    match df_learner.predict(&marg, &train, problem) {
                        Ok(pred) => held += expected_row_loss(pred.row(x), truth[x], loss),
                        Err(e) => failure = Some(e),
                    }
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                let count = BigInt::from(m - 1).pow((m - 1) as u32);
                total += held / Rational::from_integer(count);
            }
            Ok(Evaluated::Exact(total / rational_of(m)))
        }
        TransductiveMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidQuery("trials must be at least 1".into()));
            }
            let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
            for t in 0..trials {
                let mut rng = trial_rng(seed, t as u64);
                let mut err = 0.0;
                for (i, &x) in inst.points.iter().enumerate() {
                    let rest = inst.held_out(i);
                    if rest.contains(&x) {
                        continue;
                    }
                    let pts: Vec<usize> = (0..m - 1)
                        .map(|_| rest[rand::Rng::gen_range(&mut rng, 0..rest.len())])
                        .collect();
                    let train = LabeledSample::labeled_by(&pts, inst.truth, problem);
                    let pred = df_learner.predict(&marg, &train, problem)?;
                    err += expected_row_loss(pred.row(x), truth[x], loss).to_f64();
                }
                err /= m as f64;
                sum += err;
                sum_sq += err * err;
            }
            let k = trials as f64;
            let mean = sum / k;
            let var = if trials > 1 { ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0) } else { 0.0 };
            Ok(Evaluated::Estimate(McEstimate {
                estimate: mean,
                half_width: 1.96 * (var / k).sqrt(),
            }))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorEReport {
    pub b_error: Rational,
    /// Expected error of the inner learner under `Unif(S_X)` at size `m-1`.
    pub df_error: Rational,
    /// `b_error / df_error` (`0/0 = 1`).
    pub ratio: Ratio,
}

impl FactorEReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.b_error.to_f64() <= std::f64::consts::E * self.df_error.to_f64() + slack
    }
}

/// Compares `B`'s transductive error with `e` times the inner learner's expected error.
pub fn factor_e_check(
    df_learner: &LearnerSpec,
    inst: &TransductiveInstance,
    problem: &FiniteProblem,
    opts: &Enumeration,
) -> Result<FactorEReport> {
    let Evaluated::Exact(b_error) = df_to_transductive(df_learner, inst, TransductiveMode::Exact, problem, opts)? else {
        unreachable!("exact mode returns an exact value");
    };
    let marg = inst.empirical_marginal(problem);
    let df_error = expected_error_exact(df_learner, &marg, inst.truth, inst.len() - 1, problem, opts)?;
    Ok(FactorEReport {
        ratio: Ratio::of(&b_error, &df_error),
        b_error,
        df_error,
    })
}

/// `(1 - 1/m)^{m-1}`, exactly.
pub fn avoidance_probability(m: u64) -> Result<Rational> {
    if m < 2 {
        return Err(Error::InvalidQuery("avoidance probability needs m ≥ 2".into()));
    }
    let base = Rational::new(BigInt::from(m - 1), BigInt::from(m));
    let exp = u32::try_from(m - 1).map_err(|_| Error::InvalidQuery("m too large for exact power".into()))?;
    Ok(num_traits::pow::Pow::pow(&base, exp))
}

/// `(1 - 1/m)^{m-1}` in binary64, accurate for large `m`.
pub fn avoidance_probability_f64(m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidQuery("avoidance probability needs m ≥ 2".into()));
    }
    let m = m as f64;
    Ok(((m - 1.0) * (-1.0 / m).ln_1p()).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    pub k: usize,
    /// Validation sample size; `0` selects the first copy.
    pub v: usize,
    pub n: usize,
    pub epsilon: Rational,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostReport {
    pub failures: usize,
    pub trials: usize,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub std_error: f64,
}

/// Simulates train-`k`-copies-then-validate and counts selected errors above `ε`.
///
/// Each copy commits to one realized predictor, so a Bayesian copy draws a
/// whole hypothesis from its posterior.
pub fn confidence_boost(
    base: &LearnerSpec,
    cfg: &BoostConfig,
    marg: &Marginal,
    truth: usize,
    problem: &FiniteProblem,
) -> Result<BoostReport> {
    if cfg.k == 0 || cfg.trials == 0 {
        return Err(Error::InvalidQuery("k and trials must be at least 1".into()));
    }
    problem.check_hypothesis(truth)?;
    let sampler = MarginalSampler::new(marg);
    let labels = problem.num_labels();
    let mut failures = 0usize;
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let mut copies = Vec::with_capacity(cfg.k);
        for _ in 0..cfg.k {
            let sample = sampler.draw_sample(&mut rng, cfg.n, truth, problem);
            let realized = base.realize(marg, &sample, problem, &mut rng)?;
            copies.push(Predictor::<Rational>::deterministic(&realized, labels));
        }
        let selected = if cfg.v == 0 {
            0
        } else {
            let validation = sampler.draw_sample(&mut rng, cfg.v, truth, problem);
            let mut best = 0;
            let mut best_risk: Option<Rational> = None;
            for (j, c) in copies.iter().enumerate() {
                let r = empirical_risk(c, &validation, problem)?;
                if best_risk.as_ref().map_or(true, |b| r < *b) {
                    best = j;
                    best_risk = Some(r);
                }
            }
            best
        };
        if true_error(&copies[selected], marg, truth, problem)? > cfg.epsilon {
            failures += 1;
        }
    }
    let rate = failures as f64 / cfg.trials as f64;
    Ok(BoostReport {
        failures,
        trials: cfg.trials,
        rate,
        std_error: (rate * (1.0 - rate) / cfg.trials as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Classic,
    DistributionFixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleComplexityQuery {
    pub epsilon: Rational,
    pub delta: Rational,
    pub model: Model,
    pub n_max: usize,
}

impl SampleComplexityQuery {
    pub fn new(epsilon: Rational, delta: Rational, model: Model, n_max: usize) -> Result<Self> {
        let open_unit = |r: &Rational| r > &Rational::zero() && r < &Rational::one();
        if !open_unit(&epsilon) || !open_unit(&delta) || n_max == 0 {
            return Err(Error::InvalidQuery("need 0 < ε, δ < 1 and n_max ≥ 1".into()));
        }
        Ok(Self {
            epsilon,
            delta,
            model,
            n_max,
        })
    }
}

/// Result of a sweep up to `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Complexity {
    Found(usize),
    /// No `n ≤ n_max` works.
    NotFound { n_max: usize },
}

impl std::fmt::Display for Complexity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Complexity::Found(n) => write!(f, "{n}"),
            Complexity::NotFound { n_max } => write!(f, ">{n_max}"),
        }
    }
}

/// Exact game values at `n = 1..=n_max`.
pub fn value_sweep(problem: &FiniteProblem, marg: &Marginal, n_max: usize, cfg: &SolverConfig) -> Result<Vec<Rational>> {
    (1..=n_max)
        .map(|n| solve_game::<Rational>(problem, marg, n, cfg).map(|s| s.value))
        .collect()
}

/// Smallest `n` such that every value on `[n, n_max]` passes `ok`.
fn window_threshold(values: &[Rational], ok: impl Fn(&Rational) -> bool) -> Complexity {
    let n_max = values.len();
    let mut first = None;
    for n in (1..=n_max).rev() {
        if ok(&values[n - 1]) {
            first = Some(n);
        } else {
            break;
        }
    }
    first.map_or(Complexity::NotFound { n_max }, Complexity::Found)
}

/// Smallest `n` whose game value stays `≤ ε` on the whole window `[n, n_max]`.
///
/// Sizes start at 1.
pub fn sample_complexity_df(
    problem: &FiniteProblem,
    marg: &Marginal,
    q: &SampleComplexityQuery,
    cfg: &SolverConfig,
) -> Result<Complexity> {
    if q.model != Model::DistributionFixed {
        return Err(Error::InvalidQuery("query model must be distribution_fixed".into()));
    }
    let values = value_sweep(problem, marg, q.n_max, cfg)?;
    Ok(window_threshold(&values, |v| *v <= q.epsilon))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicBracket {
    /// Largest distribution-fixed complexity at `ε` over the grid.
    pub lower: Complexity,
    /// Largest distribution-fixed complexity at `ε/e` over the grid. This is
    /// relative to the grid only; the classic complexity ranges over every marginal.
    pub upper_witness: Complexity,
    pub per_marginal: Vec<(Complexity, Complexity)>,
}

/// Grid bracket on the classic expected-error sample complexity.
pub fn classic_bracket(
    problem: &FiniteProblem,
    grid: &[Marginal],
    q: &SampleComplexityQuery,
    cfg: &SolverConfig,
) -> Result<ClassicBracket> {
    if q.model != Model::Classic {
        return Err(Error::InvalidQuery("query model must be classic".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidQuery("marginal grid is empty".into()));
    }
    let eps_over_e = q.epsilon.to_f64() / std::f64::consts::E;
    let mut per_marginal = Vec::with_capacity(grid.len());
    for marg in grid {
        let values = value_sweep(problem, marg, q.n_max, cfg)?;
        let lower = window_threshold(&values, |v| *v <= q.epsilon);
        let upper = window_threshold(&values, |v| v.to_f64() <= eps_over_e);
        per_marginal.push((lower, upper));
    }
    let lower = per_marginal.iter().map(|p| p.0).max().expect("grid is nonempty");
    let upper_witness = per_marginal.iter().map(|p| p.1).max().expect("grid is nonempty");
    Ok(ClassicBracket {
        lower,
        upper_witness,
        per_marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::TableLearner;
    use crate::fixtures::{p1, singleton};
    use crate::problem::RandomizedHypothesis;
    use crate::scalar::rat;

    fn det(labels: &[usize]) -> Predictor<Rational> {
        Predictor::deterministic(labels, 2)
    }

    #[test]
    fn distance_examples() {
        let p = p1();
        let u = Marginal::uniform(2);
        assert_eq!(dist_between(&det(&[0, 1]), &det(&[0, 1]), &u, &p), rat(0, 1));
        assert_eq!(dist_between(&det(&[0, 0]), &det(&[0, 1]), &u, &p), rat(1, 2));
        assert_eq!(dist_between(&det(&[1, 1]), &det(&[0, 1]), &u, &p), rat(1, 2));
        let f = Predictor::new(vec![vec![rat(1, 3), rat(2, 3)], vec![rat(1, 1), rat(0, 1)]]).unwrap();
        let g = det(&[1, 0]);
        assert_eq!(dist_between(&f, &g, &u, &p), dist_between(&g, &f, &u, &p));
    }

    #[test]
    fn properize_examples() {
        let p = p1();
        let u = Marginal::uniform(2);
        assert_eq!(properize(&det(&[0, 1]), &u, &p), 1);
        assert_eq!(properize(&det(&[1, 1]), &u, &p), 1);
        assert_eq!(properize(&det(&[0, 1]), &Marginal::point_mass(2, 0), &p), 0);
    }

    #[test]
    fn properization_bound_examples() {
        let p = p1();
        let u = Marginal::uniform(2);
        let opts = Enumeration::default();
        let r = properization_bound_check(&LearnerSpec::Constant(0), &u, 1, &singleton(), &opts).unwrap();
        assert!(r.passed());
        let improper = LearnerSpec::Table(TableLearner::constant(det(&[1, 1])));
        let r = properization_bound_check(&improper, &u, 1, &p, &opts).unwrap();
        assert!(r.passed());
        // under truth h2 the inner error is 1/2 and the properized error 0
        let pred = improper.predict(&u, &LabeledSample::empty(), &p).unwrap();
        assert_eq!(true_error(&pred, &u, 1, &p).unwrap(), rat(1, 2));
        assert_eq!(properize(&pred, &u, &p), 1);
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        assert!(properization_bound_check(&bayes, &p.marginal("skew").unwrap(), 2, &p, &opts).unwrap().passed());
    }

    #[test]
    fn transductive_examples() {
        let p = p1();
        let inst = TransductiveInstance::new(vec![0, 1], 1, &p).unwrap();
        assert_eq!(transductive_error(&LearnerSpec::Constant(1), &inst, &p).unwrap(), rat(0, 1));
        let mut t = TableLearner::default();
        t.insert(LabeledSample::new(vec![(1, 1)]), det(&[0, 1]));
        t.insert(LabeledSample::new(vec![(0, 0)]), det(&[0, 0]));
        assert_eq!(transductive_error(&LearnerSpec::Table(t), &inst, &p).unwrap(), rat(1, 2));
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        assert_eq!(transductive_error(&bayes, &inst, &p).unwrap(), rat(1, 4));
        assert!(TransductiveInstance::new(vec![0], 1, &p).is_err());
    }

    #[test]
    fn loo_examples() {
        let p = p1();
        let u = Marginal::uniform(2);
        let opts = Enumeration::default();
        let r = loo_bound_check(&LearnerSpec::Constant(1), &u, 1, 1, &p, &opts).unwrap();
        assert_eq!((r.expected_error.clone(), r.max_transductive.clone()), (rat(0, 1), rat(0, 1)));
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        let r = loo_bound_check(&bayes, &u, 1, 1, &p, &opts).unwrap();
        assert_eq!(r.expected_error, rat(1, 8));
        assert!(r.identity_holds());
        assert!(r.inequality_holds());
        assert!(r.max_transductive >= rat(1, 8));
        for m in 1..=3 {
            for truth in 0..2 {
                let r = loo_bound_check(&bayes, &p.marginal("skew").unwrap(), truth, m, &p, &opts).unwrap();
                assert!(r.identity_holds() && r.inequality_holds());
            }
        }
    }

    #[test]
    fn df_to_transductive_examples() {
        let p = p1();
        let opts = Enumeration::default();
        let inst = TransductiveInstance::new(vec![0, 1], 1, &p).unwrap();
        let got = df_to_transductive(&LearnerSpec::Constant(1), &inst, TransductiveMode::Exact, &p, &opts).unwrap();
        assert_eq!(got, Evaluated::Exact(rat(0, 1)));
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        let got = df_to_transductive(&bayes, &inst, TransductiveMode::Exact, &p, &opts).unwrap();
        assert_eq!(got, Evaluated::Exact(rat(1, 4)));
        let mc = df_to_transductive(&bayes, &inst, TransductiveMode::MonteCarlo { trials: 50, seed: 1 }, &p, &opts)
            .unwrap();
        assert!((mc.to_f64() - 0.25).abs() < 1e-12);
        let fe = factor_e_check(&bayes, &inst, &p, &opts).unwrap();
        assert_eq!(fe.b_error, rat(1, 4));
        assert!(fe.holds(1e-12));
        assert!(std::f64::consts::E * fe.df_error.to_f64() >= 0.25);
        // a repeated point is answered from the sample
        let dup = TransductiveInstance::new(vec![1, 1, 0], 1, &p).unwrap();
        assert!(factor_e_check(&bayes, &dup, &p, &opts).unwrap().holds(1e-12));
    }

    #[test]
    fn avoidance_examples() {
        assert_eq!(avoidance_probability(2).unwrap(), rat(1, 2));
        assert_eq!(avoidance_probability(3).unwrap(), rat(4, 9));
        assert!(avoidance_probability(1).is_err());
        let big = avoidance_probability_f64(1_000_000).unwrap();
        assert!((big - (-1.0f64).exp()).abs() < 1e-6);
        assert!((avoidance_probability_f64(3).unwrap() - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn boost_examples() {
        let p = p1();
        let u = Marginal::uniform(2);
        let cfg = BoostConfig {
            k: 3,
            v: 5,
            n: 1,
            epsilon: rat(1, 100),
            trials: 200,
            seed: 4,
        };
        let r = confidence_boost(&LearnerSpec::Constant(1), &cfg, &u, 1, &p).unwrap();
        assert_eq!(r.failures, 0);
        let bayes = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
        let single = BoostConfig {
            k: 1,
            v: 0,
            epsilon: rat(1, 4),
            trials: 2000,
            ..cfg.clone()
        };
        let a = confidence_boost(&bayes, &single, &u, 1, &p).unwrap();
        assert!((a.rate - 0.25).abs() < 4.0 * a.std_error);
        let boosted = BoostConfig { k: 5, v: 20, ..single.clone() };
        let b = confidence_boost(&bayes, &boosted, &u, 1, &p).unwrap();
        assert!(b.rate < a.rate);
        assert_eq!(confidence_boost(&bayes, &boosted, &u, 1, &p).unwrap(), b);
    }

    #[test]
    fn complexity_examples() {
        let p = p1();
        let cfg = SolverConfig::exact();
        let q = SampleComplexityQuery::new(rat(1, 8), rat(1, 10), Model::DistributionFixed, 3).unwrap();
        assert_eq!(sample_complexity_df(&p, &Marginal::uniform(2), &q, &cfg).unwrap(), Complexity::Found(1));
        assert_eq!(
            sample_complexity_df(&singleton(), &Marginal::uniform(2), &q, &cfg).unwrap(),
            Complexity::Found(1)
        );
        let tight = SampleComplexityQuery::new(rat(1, 100), rat(1, 10), Model::DistributionFixed, 3).unwrap();
        let values = value_sweep(&p, &Marginal::uniform(2), 3, &cfg).unwrap();
        let expected = window_threshold(&values, |v| *v <= rat(1, 100));
        assert_eq!(sample_complexity_df(&p, &Marginal::uniform(2), &tight, &cfg).unwrap(), expected);

        let classic = SampleComplexityQuery { model: Model::Classic, ..q.clone() };
        let grid = vec![Marginal::uniform(2), p.marginal("skew").unwrap()];
        let b = classic_bracket(&p, &grid, &classic, &cfg).unwrap();
        assert_eq!(b.lower, Complexity::Found(1));
        assert!(b.lower <= b.upper_witness);
        let one = classic_bracket(&p, &grid[..1], &classic, &cfg).unwrap();
        assert_eq!(one.lower, sample_complexity_df(&p, &grid[0], &q, &cfg).unwrap());
        assert!(SampleComplexityQuery::new(rat(0, 1), rat(1, 2), Model::Classic, 1).is_err());
    }
}
