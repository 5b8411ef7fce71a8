use properlab::fixtures::p1;
use properlab::scalar::rat;
use properlab::{solve_game, ExactSolution, FloatSolution, SolverConfig};

#[test]
fn p1_value_across_scalars() {
    let problem = p1();
    let marg = problem.marginal("uniform").unwrap();
    let exact: ExactSolution = solve_game(&problem, &marg, 1, &SolverConfig::exact()).unwrap();
    assert_eq!(exact.value, rat(1, 8));
    let float: FloatSolution = solve_game(&problem, &marg, 1, &SolverConfig::iterative()).unwrap();
    assert!((float.value - 0.125).abs() <= 1e-6);
    let single = solve_game::<f32>(&problem, &marg, 1, &SolverConfig::iterative()).unwrap();
    assert!((single.value - 0.125).abs() <= 1e-4);
}

#[test]
fn skewed_marginal_value_drops_with_n() {
    let problem = p1();
    let marg = problem.marginal("skew").unwrap();
    let v1 = solve_game::<properlab::Rational>(&problem, &marg, 1, &SolverConfig::exact()).unwrap().value;
    let v2 = solve_game::<properlab::Rational>(&problem, &marg, 2, &SolverConfig::exact()).unwrap().value;
    assert!(v2 <= v1);
}
