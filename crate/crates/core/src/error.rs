use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("loss is not a metric on labels ({a}, {b}, {c}): {reason}")]
    NonMetricLoss {
        a: String,
        b: String,
        c: String,
        reason: String,
    },

    #[error("hypotheses {first} and {second} are identical")]
    DuplicateHypothesis { first: usize, second: usize },

    #[error("hypothesis class is empty")]
    EmptyClass,

    #[error("entry out of range: {0}")]
    OutOfRangeEntry(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("empirical risk of an empty sample is undefined")]
    EmptySample,

    #[error("enumeration needs {required} samples, cap is {cap}")]
    EnumerationCapExceeded { required: u128, cap: u128 },

    #[error("prior assigns zero mass to every hypothesis consistent with the sample")]
    ZeroEvidence,

    #[error("components {0:?} have zero evidence on the sample")]
    ComponentZeroEvidence(Vec<usize>),

    #[error("numeric minimization did not converge (gradient norm {gradient_norm:e})")]
    NumericNonconvergence { gradient_norm: f64 },

    #[error("iteration cap reached: best value {best_value}, gap {gap:e}")]
    IterationCapExceeded {
        best_value: f64,
        gap: f64,
        prior: Vec<f64>,
    },

    #[error("oracle budget exceeded: {required} learners needed, budget {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    #[error("learner is undefined on sample {0}")]
    LearnerUndefined(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("invalid query: {0}")]
    InvalidQuery(String),
}
