//! Brute-force ground truth over every deterministic learner.
//!
//! A deterministic learner assigns one predictor in `Y^X` to each realizable
//! sample, so there are `|Y|^(|X|·r)` of them for `r` realizable samples.
//! Learners are streamed in lexicographic order (last sample fastest) and
//! never materialized. The full `|H| × #learners` matrix game is solved by a
//! revised simplex whose pricing pass scans that stream with integer
//! arithmetic; this shares no code with the solver in [`crate::game`] beyond
//! the sample space and the problem functionals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bayes::TableLearner;
use crate::error::{Error, Result};
use crate::game::{solve_game, GameInstance, SolverConfig};
use crate::problem::{Enumeration, FiniteProblem, Marginal, Predictor, DEFAULT_ENUMERATION_CAP};
use crate::scalar::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_learners: u64,
    pub max_samples: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_learners: 1_000_000,
            max_samples: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Cost tables and sizes of one oracle instance.
struct Space {
    inst: GameInstance<Rational>,
    num_points: usize,
    num_labels: usize,
    /// `|Y|^|X|`.
    predictors: usize,
    learners: u64,
    /// `cost[s][f][h]`: contribution of predictor `f` on sample `s` to `ε(h, ·)`.
    cost: Vec<Vec<Vec<Rational>>>,
}

fn learner_count_big(predictors: &BigInt, samples: usize) -> BigInt {
    num_traits::pow(predictors.clone(), samples)
}

impl Space {
    fn new(problem: &FiniteProblem, marg: &Marginal, n: usize, budget: &OracleBudget) -> Result<Self> {
        if budget.max_learners == 0 || budget.max_samples == 0 {
            return Err(Error::InvalidQuery("oracle budget must be positive".into()));
        }
        let inst = GameInstance::<Rational>::new(problem, marg, n, &Enumeration::with_cap(budget.max_samples))?;
        let num_points = problem.num_points();
        let num_labels = problem.num_labels();
        let predictors = BigInt::from(num_labels).pow(num_points as u32);
        let required = learner_count_big(&predictors, inst.samples().len());
        let learners = match required.to_u64() {
            Some(c) if c <= budget.max_learners => c,
            _ => {
                return Err(Error::BudgetExceeded {
                    required: required.to_string(),
                    budget: budget.max_learners,
                })
            }
        };
        let predictors = predictors.to_usize().expect("bounded by the learner budget");
        let loss = problem.loss_matrix();
        let mut cost = Vec::with_capacity(inst.samples().len());
        for s in inst.samples() {
            let mut per_pred = Vec::with_capacity(predictors);
            for f in 0..predictors {
                let labels = decode(f, num_points, num_labels);
                let row = (0..problem.num_hypotheses())
                    .map(|h| {
                        if !s.consistent.contains(&h) {
                            return Rational::zero();
                        }
                        let truth = problem.hypothesis(h);
                        let d = marg
                            .support()
                            .iter()
                            .fold(Rational::zero(), |acc, &x| acc + marg.weight(x) * &loss[labels[x]][truth[x]]);
                        &s.weight * d
                    })
                    .collect();
                per_pred.push(row);
            }
            cost.push(per_pred);
        }
        Ok(Self {
            inst,
            num_points,
            num_labels,
            predictors,
            learners,
            cost,
        })
    }

    fn digits(&self, mut index: u64) -> Vec<usize> {
        let r = self.cost.len();
        let mut d = vec![0usize; r];
        for slot in d.iter_mut().rev() {
            *slot = (index % self.predictors as u64) as usize;
            index /= self.predictors as u64;
        }
        d
    }

    fn table(&self, digits: &[usize]) -> TableLearner {
        let mut t = TableLearner::default();
        for (s, &f) in self.inst.samples().iter().zip(digits) {
            let labels = decode(f, self.num_points, self.num_labels);
            t.insert(s.sample.clone(), Predictor::deterministic(&labels, self.num_labels));
        }
        t
    }
}

/// Label vector of predictor index `f`, first point most significant.
fn decode(mut f: usize, num_points: usize, num_labels: usize) -> Vec<usize> {
    let mut labels = vec![0; num_points];
    for slot in labels.iter_mut().rev() {
        *slot = f % num_labels;
        f /= num_labels;
    }
    labels
}

/// Streaming iterator over every deterministic learner.
pub struct DeterministicLearners {
    space: Space,
    next: u64,
}

impl DeterministicLearners {
    /// Exact number of learners, `|Y^X|^r`.
    pub fn total(&self) -> u64 {
        self.space.learners
    }

    pub fn realizable_samples(&self) -> usize {
        self.space.cost.len()
    }
}

impl Iterator for DeterministicLearners {
    type Item = TableLearner;

    fn next(&mut self) -> Option<TableLearner> {
        if self.next >= self.space.learners {
            return None;
        }
        let t = self.space.table(&self.space.digits(self.next));
        self.next += 1;
        Some(t)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.space.learners - self.next) as usize;
        (left, Some(left))
    }
}

pub fn enumerate_deterministic_learners(
    problem: &FiniteProblem,
    marg: &Marginal,
    n: usize,
    budget: &OracleBudget,
) -> Result<DeterministicLearners> {
    Ok(DeterministicLearners {
        space: Space::new(problem, marg, n, budget)?,
        next: 0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleValue {
    pub value: Rational,
    pub adversary: Vec<Rational>,
    /// `min` over deterministic learners of `max_h ε(h, A)`.
    pub deterministic_minimax: Rational,
    /// LP primal and dual objectives agree.
    pub duality_holds: bool,
    pub learners: u64,
    pub pivots: usize,
}

/// Integer payoff columns `P[h][j] = L·ε(h, A_j) + 1` for a common denominator `L`.
struct IntegerMatrix {
    scale: BigInt,
    cost: Vec<Vec<Vec<BigInt>>>,
    small: Option<Vec<Vec<Vec<i128>>>>,
    k: usize,
}

impl IntegerMatrix {
    fn new(space: &Space, k: usize) -> Self {
        let mut scale = BigInt::one();
        for per_pred in &space.cost {
            for row in per_pred {
                for v in row {
                    scale = scale.lcm(v.denom());
                }
            }
        }
        let cost: Vec<Vec<Vec<BigInt>>> = space
            .cost
            .iter()
            .map(|per_pred| {
                per_pred
                    .iter()
                    .map(|row| row.iter().map(|v| (v * &scale).to_integer()).collect())
                    .collect()
            })
            .collect();
        // every column total is at most `scale + 1`; keep i128 when products stay far from overflow
        let small = if scale.bits() <= 60 {
            Some(
                cost.iter()
                    .map(|pp| pp.iter().map(|r| r.iter().map(|v| v.to_i128().unwrap()).collect()).collect())
                    .collect(),
            )
        } else {
            None
        };
        Self { scale, cost, small, k }
    }

    fn column(&self, digits: &[usize]) -> Vec<BigInt> {
        let mut col = vec![BigInt::one(); self.k];
        for (s, &f) in digits.iter().enumerate() {
            for (h, c) in col.iter_mut().enumerate() {
                *c += &self.cost[s][f][h];
            }
        }
        col
    }
}

/// Visits every learner's integer column in lexicographic order, updating
/// column sums incrementally as the odometer turns.
fn scan_columns<T>(
    cost: &[Vec<Vec<T>>],
    predictors: usize,
    k: usize,
    mut visit: impl FnMut(u64, &[T]),
) where
    T: Clone + One + Zero + std::ops::AddAssign + std::ops::SubAssign,
{
    let r = cost.len();
    let mut digits = vec![0usize; r];
    let mut col = vec![T::one(); k];
    for per_pred in cost {
        for (h, c) in col.iter_mut().enumerate() {
            *c += per_pred[0][h].clone();
        }
    }
    let mut index = 0u64;
    loop {
        visit(index, &col);
        index += 1;
        let mut pos = r;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            let old = digits[pos];
            let new = if old + 1 < predictors { old + 1 } else { 0 };
            for (h, c) in col.iter_mut().enumerate() {
                *c -= cost[pos][old][h].clone();
                *c += cost[pos][new][h].clone();
            }
            digits[pos] = new;
            if new != 0 {
                break;
            }
        }
    }
}

/// Revised simplex on `max Σ u  s.t.  P u ≤ 1, u ≥ 0` over streamed columns.
struct RevisedSimplex {
    k: usize,
    /// Basis variables: `0..k` are slacks, `k + j` is learner `j`.
    basis: Vec<u64>,
    columns: Vec<Vec<Rational>>,
    inverse: Vec<Vec<Rational>>,
    x: Vec<Rational>,
    pivots: usize,
    bland: bool,
}

impl RevisedSimplex {
    fn new(k: usize) -> Self {
        let identity: Vec<Vec<Rational>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        Self {
            k,
            basis: (0..k as u64).collect(),
            columns: identity.clone(),
            inverse: identity,
            x: vec![Rational::one(); k],
            pivots: 0,
            bland: false,
        }
    }

    fn cost(&self, var: u64) -> Rational {
        if var < self.k as u64 {
            Rational::zero()
        } else {
            Rational::one()
        }
    }

    /// Simplex multipliers `y = c_B B^{-1}`.
    fn duals(&self) -> Vec<Rational> {
        (0..self.k)
            .map(|j| {
                (0..self.k).fold(Rational::zero(), |acc, i| acc + self.cost(self.basis[i]) * &self.inverse[i][j])
            })
            .collect()
    }

    /// Pivots `column` (variable `var`) into the basis; returns false when unbounded.
    fn pivot(&mut self, var: u64, column: Vec<Rational>) -> bool {
        let d: Vec<Rational> = (0..self.k)
            .map(|i| (0..self.k).fold(Rational::zero(), |acc, j| acc + &self.inverse[i][j] * &column[j]))
            .collect();
        let mut leave: Option<usize> = None;
        for i in 0..self.k {
            if !d[i].is_positive() {
                continue;
            }
            leave = match leave {
                None => Some(i),
                Some(r) => {
                    let a = &self.x[i] / &d[i];
                    let b = &self.x[r] / &d[r];
                    if a < b || (a == b && self.basis[i] < self.basis[r]) {
                        Some(i)
                    } else {
                        Some(r)
                    }
                }
            };
        }
        let Some(r) = leave else {
            return false;
        };
        if self.x[r].is_zero() {
            self.bland = true;
        }
        let piv = d[r].clone();
        let row_r: Vec<Rational> = self.inverse[r].iter().map(|v| v / &piv).collect();
        let x_r = &self.x[r] / &piv;
        for i in 0..self.k {
            if i == r || d[i].is_zero() {
                continue;
            }
            for j in 0..self.k {
                let delta = &d[i] * &row_r[j];
                self.inverse[i][j] -= delta;
            }
            let delta = &d[i] * &x_r;
            self.x[i] -= delta;
        }
        self.inverse[r] = row_r;
        self.x[r] = x_r;
        self.basis[r] = var;
        self.columns[r] = column;
        self.pivots += 1;
        true
    }
}

/// Common denominator form of the duals, `y = num / den` with `den > 0`.
fn integer_duals(y: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let den = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let num = y.iter().map(|v| (v * &den).to_integer()).collect();
    (num, den)
}

/// Solves the full matrix game over all deterministic learners.
pub fn matrix_game_value(
    problem: &FiniteProblem,
    marg: &Marginal,
    n: usize,
    budget: &OracleBudget,
) -> Result<OracleValue> {
    let space = Space::new(problem, marg, n, budget)?;
    let k = problem.num_hypotheses();
    let m = IntegerMatrix::new(&space, k);

    let mut det_best: Option<BigInt> = None;
    let mut lp = RevisedSimplex::new(k);
    loop {
        let y = lp.duals();
        let (y_num, y_den) = integer_duals(&y);
        // entering candidate: (variable, reduced cost numerator)
        let mut enter: Option<(u64, BigInt)> = None;
        let mut consider = |var: u64, reduced: BigInt, bland: bool| {
            if !reduced.is_positive() {
                return;
            }
            let better = match &enter {
                None => true,
                Some((_, best)) => !bland && reduced > *best,
            };
            if better {
                enter = Some((var, reduced));
            }
        };
        for (i, yi) in y_num.iter().enumerate() {
            consider(i as u64, -yi.clone(), lp.bland);
        }
        let first_pass = det_best.is_none();
        let bland = lp.bland;
        let y_small: Option<Vec<i128>> = y_num
            .iter()
            .chain(std::iter::once(&y_den))
            .all(|v| v.bits() <= 60)
            .then(|| y_num.iter().map(|v| v.to_i128().unwrap()).collect());
        match (&m.small, &y_small) {
            (Some(cost), Some(ys)) => {
                let den = y_den.to_i128().unwrap();
                let mut best_small: Option<(u64, i128)> = None;
                let mut det_small: Option<i128> = None;
                scan_columns(cost, space.predictors, k, |j, col| {
                    if first_pass {
                        let worst = *col.iter().max().unwrap();
                        if det_small.map_or(true, |b| worst < b) {
                            det_small = Some(worst);
                        }
                    }
                    if bland && best_small.is_some() {
                        return;
                    }
                    let dot: i128 = col.iter().zip(ys).map(|(c, y)| c * y).sum();
                    let reduced = den - dot;
                    if reduced > 0 && best_small.map_or(true, |(_, b)| !bland && reduced > b) {
                        best_small = Some((j, reduced));
                    }
                });
                if let Some(d) = det_small {
                    det_best = Some(BigInt::from(d));
                }
                if let Some((j, r)) = best_small {
                    consider(k as u64 + j, BigInt::from(r), bland);
                }
            }
            _ => {
                let mut best_big: Option<(u64, BigInt)> = None;
                let mut det_big: Option<BigInt> = None;
                scan_columns(&m.cost, space.predictors, k, |j, col| {
                    if first_pass {
                        let worst = col.iter().max().unwrap().clone();
                        if det_big.as_ref().map_or(true, |b| worst < *b) {
                            det_big = Some(worst);
                        }
                    }
                    if bland && best_big.is_some() {
                        return;
                    }
                    let dot: BigInt = col.iter().zip(&y_num).map(|(c, y)| c * y).sum();
                    let reduced = &y_den - dot;
                    if reduced.is_positive()
                        && best_big.as_ref().map_or(true, |(_, b)| !bland && reduced > *b)
                    {
                        best_big = Some((j, reduced));
                    }
                });
                if det_big.is_some() {
                    det_best = det_big;
                }
                if let Some((j, r)) = best_big {
                    consider(k as u64 + j, r, bland);
                }
            }
        }
        let Some((var, _)) = enter else {
            break;
        };
        let column: Vec<Rational> = if var < k as u64 {
            (0..k).map(|i| if i as u64 == var { Rational::one() } else { Rational::zero() }).collect()
        } else {
            m.column(&space.digits(var - k as u64)).into_iter().map(Rational::from_integer).collect()
        };
        if !lp.pivot(var, column) {
            return Err(Error::Unbounded);
        }
    }

    let y = lp.duals();
    let dual_total = y.iter().fold(Rational::zero(), |a, v| a + v);
    let primal_total = (0..k).fold(Rational::zero(), |a, i| a + lp.cost(lp.basis[i]) * &lp.x[i]);
    let scale = Rational::from_integer(m.scale.clone());
    let value = (Rational::one() / &dual_total - Rational::one()) / &scale;
    let adversary = y.iter().map(|v| v / &dual_total).collect();
    let det = det_best.expect("at least one learner");
    Ok(OracleValue {
        value,
        adversary,
        deterministic_minimax: (Rational::from_integer(det) - Rational::one()) / scale,
        duality_holds: primal_total == dual_total,
        learners: space.learners,
        pivots: lp.pivots,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub solver_value: Rational,
    pub oracle: OracleValue,
    /// Named assertions with their verdicts, in a fixed order.
    pub assertions: BTreeMap<&'static str, bool>,
}

impl CrossCheck {
    pub fn passed(&self) -> bool {
        self.assertions.values().all(|&v| v)
    }
}

/// Compares the game solver with the full-matrix oracle.
pub fn cross_check(
    problem: &FiniteProblem,
    marg: &Marginal,
    n: usize,
    budget: &OracleBudget,
) -> Result<CrossCheck> {
    let oracle = matrix_game_value(problem, marg, n, budget)?;
    let cfg = SolverConfig::exact().with_cap(budget.max_samples);
    let solver_value = solve_game::<Rational>(problem, marg, n, &cfg)?.value;
    let mut assertions = BTreeMap::new();
    assertions.insert("value_matches_solver", oracle.value == solver_value);
    assertions.insert("no_deterministic_learner_below_value", oracle.deterministic_minimax >= oracle.value);
    assertions.insert("lp_duality", oracle.duality_holds);
    Ok(CrossCheck {
        solver_value,
        oracle,
        assertions,
    })
}
