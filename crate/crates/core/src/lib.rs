//! Minimax learners for finite distribution-fixed learning games.
//!
//! Problems are finite (`X`, `Y`, `H`, metric loss). Exact arithmetic uses
//! [`Rational`]; most functionals are generic over [`Scalar`] and also run in
//! `f64` or `f32`.

pub mod bayes;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod lp;
pub mod oracle;
pub mod problem;
pub mod reductions;
pub mod scalar;
pub mod schema;

pub use bayes::{
    bayes_predictive, distributional_srm, evidence, kl_divergence, mix_bayesians_compare, posterior,
    pushforward, LearnerSpec, MixtureReport, MixtureVerdict, NumericSrm, SrmMode, TableLearner,
};
pub use error::{Error, Result};
pub use game::{
    best_response, build_proper_learner, evaluate_worstcase, search_proper_prior, solve_game,
    GameSolution, Method, PriorSearch, PriorSearchResult, Ratio, SolverConfig, WorstCase,
};
pub use oracle::{cross_check, enumerate_deterministic_learners, matrix_game_value, OracleBudget};
pub use problem::{
    consistent_set, empirical_risk, enumerate_weighted_samples, expected_error_exact, expected_error_mc,
    true_error, Enumeration, FiniteProblem, LabeledSample, Marginal, McEstimate, Predictor,
    RandomizedHypothesis, DEFAULT_ENUMERATION_CAP,
};
pub use scalar::{Rational, Scalar};
pub use schema::{parse_problem, problem_hash, validate_problem, RawProblem, SolutionFile};

pub type ExactSolution = GameSolution<Rational>;
pub type FloatSolution = GameSolution<f64>;
pub type ExactPredictor = Predictor<Rational>;
pub type FloatPredictor = Predictor<f64>;
pub type ExactHypothesis = RandomizedHypothesis<Rational>;
pub type FloatHypothesis = RandomizedHypothesis<f64>;
pub type SingleHypothesis = RandomizedHypothesis<f32>;
