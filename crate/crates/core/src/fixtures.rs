//! Small named problems used across tests, examples and the CLI.

use crate::problem::{zero_one_loss, FiniteProblem, Marginal};
use crate::scalar::rat;

/// Two points, binary labels, `H = {(0,0), (0,1)}`, 0-1 loss.
///
/// Carries the marginals `uniform` and `skew = (4/5, 1/5)`.
pub fn p1() -> FiniteProblem {
    FiniteProblem::new(
        vec!["x1".into(), "x2".into()],
        vec!["0".into(), "1".into()],
        vec![vec![0, 0], vec![0, 1]],
        zero_one_loss(2),
    )
    .and_then(|p| p.with_marginal("uniform", Marginal::uniform(2)))
    .and_then(|p| p.with_marginal("skew", Marginal::new(vec![rat(4, 5), rat(1, 5)])?))
    .expect("fixture is valid")
}

/// A single-hypothesis problem on two points.
pub fn singleton() -> FiniteProblem {
    FiniteProblem::new(
        vec!["x1".into(), "x2".into()],
        vec!["0".into(), "1".into()],
        vec![vec![0, 1]],
        zero_one_loss(2),
    )
    .expect("fixture is valid")
}

/// Three hypotheses on two points where a sample at `x1` labeled 0 keeps `{h1, h2}`.
pub fn three_hypotheses() -> FiniteProblem {
    FiniteProblem::new(
        vec!["x1".into(), "x2".into()],
        vec!["0".into(), "1".into()],
        vec![vec![0, 0], vec![0, 1], vec![1, 0]],
        zero_one_loss(2),
    )
    .expect("fixture is valid")
}
