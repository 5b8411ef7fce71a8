use num_traits::{One, Zero};
use proptest::prelude::*;

use properlab::problem::zero_one_loss;
use properlab::scalar::rat;
use properlab::{
    best_response, enumerate_weighted_samples, expected_error_exact, Enumeration, Error, FiniteProblem,
    LearnerSpec, Marginal, RandomizedHypothesis, Rational,
};

fn problem_strategy() -> impl Strategy<Value = (FiniteProblem, Marginal)> {
    (1usize..=3, 2usize..=3)
        .prop_flat_map(|(nx, ny)| {
            let rows = prop::collection::btree_set(prop::collection::vec(0..ny, nx), 1..=4);
            let weights = prop::collection::vec(0i64..5, nx);
            (Just(nx), Just(ny), rows, weights)
        })
        .prop_filter("marginal needs mass", |(_, _, _, w)| w.iter().any(|&v| v > 0))
        .prop_map(|(nx, ny, rows, w)| {
            let total: i64 = w.iter().sum();
            let problem = FiniteProblem::new(
                (0..nx).map(|i| format!("x{i}")).collect(),
                (0..ny).map(|y| y.to_string()).collect(),
                rows.into_iter().collect(),
                zero_one_loss(ny),
            )
            .unwrap();
            let marg = Marginal::new(w.into_iter().map(|v| rat(v, total)).collect()).unwrap();
            (problem, marg)
        })
}

fn prior_strategy(k: usize) -> impl Strategy<Value = RandomizedHypothesis<Rational>> {
    prop::collection::vec(0i64..6, k)
        .prop_filter("prior needs mass", |w| w.iter().any(|&v| v > 0))
        .prop_map(|w| {
            let total: i64 = w.iter().sum();
            RandomizedHypothesis::new(w.into_iter().map(|v| rat(v, total)).collect()).unwrap()
        })
}

fn prior_value(prior: &RandomizedHypothesis<Rational>, marg: &Marginal, n: usize, problem: &FiniteProblem) -> Rational {
    best_response::<Rational>(prior, marg, n, problem, &Enumeration::default()).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sample_probabilities_sum_to_one((problem, marg) in problem_strategy(), n in 0usize..=3, collapse: bool) {
        let opts = Enumeration { collapse, ..Enumeration::default() };
        for truth in 0..problem.num_hypotheses() {
            let total = enumerate_weighted_samples(&marg, truth, n, &problem, &opts)
                .unwrap()
                .iter()
                .fold(Rational::zero(), |acc, s| acc + &s.probability);
            prop_assert_eq!(total, Rational::one());
        }
    }

    #[test]
    fn best_response_value_is_concave(
        ((problem, marg), a, b) in problem_strategy().prop_flat_map(|(p, m)| {
            let k = p.num_hypotheses();
            (Just((p, m)), prior_strategy(k), prior_strategy(k))
        }),
        n in 1usize..=2,
    ) {
        let mid = RandomizedHypothesis::new(
            a.weights().iter().zip(b.weights()).map(|(x, y)| (x + y) / Rational::from_integer(2.into())).collect(),
        ).unwrap();
        let va = prior_value(&a, &marg, n, &problem);
        let vb = prior_value(&b, &marg, n, &problem);
        let vm = prior_value(&mid, &marg, n, &problem);
        prop_assert!(vm * Rational::from_integer(2.into()) >= va + vb);
    }

    #[test]
    fn best_response_beats_constant_learners(
        ((problem, marg), prior) in problem_strategy().prop_flat_map(|(p, m)| {
            let k = p.num_hypotheses();
            (Just((p, m)), prior_strategy(k))
        }),
        n in 1usize..=2,
    ) {
        let opts = Enumeration::default();
        let (value, learner) = best_response::<Rational>(&prior, &marg, n, &problem, &opts).unwrap();
        let bayes_risk = |l: &LearnerSpec| {
            (0..problem.num_hypotheses()).fold(Rational::zero(), |acc, h| {
                acc + prior.weight(h) * expected_error_exact(l, &marg, h, n, &problem, &opts).unwrap()
            })
        };
        prop_assert_eq!(bayes_risk(&learner), value.clone());
        for h in 0..problem.num_hypotheses() {
            prop_assert!(value <= bayes_risk(&LearnerSpec::Constant(h)));
        }
        if prior.weights().iter().all(|w| !w.is_zero()) {
            prop_assert!(value <= bayes_risk(&LearnerSpec::Bayesian(prior.clone())));
        }
    }

    #[test]
    fn triangle_violations_are_rejected(d in 1i64..10) {
        // d(0,2) = d(1,2) = d/20 < 1/2 makes d(0,1) = 1 too long
        let small = rat(d, 20);
        let loss = vec![
            vec![Rational::zero(), Rational::one(), small.clone()],
            vec![Rational::one(), Rational::zero(), small.clone()],
            vec![small.clone(), small, Rational::zero()],
        ];
        let err = FiniteProblem::new(vec!["x".into()], vec!["a".into(), "b".into(), "c".into()], vec![vec![0]], loss);
        let rejected = matches!(err, Err(Error::NonMetricLoss { .. }));
        prop_assert!(rejected);
    }
}
