//! Dense tableau simplex with Bland's rule, generic over [`Scalar`].
//!
//! Solves `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`, so the slack basis is
//! feasible and no phase one is needed. Over [`Rational`](crate::Rational)
//! every pivot is exact.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub rows: Vec<Vec<S>>,
    pub rhs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub value: S,
    pub primal: Vec<S>,
    /// Shadow price of each constraint row.
    pub dual: Vec<S>,
    pub pivots: usize,
    /// Some basic variable sits at zero in the optimal basis.
    pub degenerate: bool,
}

/// Maximizes the program, pivoting at most `max_pivots` times.
pub fn maximize<S: Scalar>(lp: &LinearProgram<S>, max_pivots: usize) -> Result<LpSolution<S>> {
    let m = lp.rows.len();
    let n = lp.objective.len();
    if lp.rhs.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidQuery("ragged linear program".into()));
    }
    if lp.rhs.iter().any(|b| *b < S::zero()) {
        return Err(Error::InvalidQuery("right-hand side must be nonnegative".into()));
    }
    let width = n + m + 1;
    let rhs_col = n + m;
    let mut tab: Vec<Vec<S>> = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        let mut t = vec![S::zero(); width];
        t[..n].clone_from_slice(row);
        t[n + i] = S::one();
        t[rhs_col] = lp.rhs[i].clone();
        tab.push(t);
    }
    let mut z = vec![S::zero(); width];
    for (j, c) in lp.objective.iter().enumerate() {
        z[j] = -c.clone();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;
    let neg_tol = -S::tolerance();

    loop {
        // Bland: lowest-index improving column
        let Some(col) = (0..n + m).find(|&j| z[j] < neg_tol) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !tab[i][col].is_positive_tol() {
                continue;
            }
            leave = match leave {
                None => Some(i),
                Some(r) => {
                    let lhs = tab[i][rhs_col].clone() * tab[r][col].clone();
                    let rhs = tab[r][rhs_col].clone() * tab[i][col].clone();
                    if lhs < rhs || (lhs == rhs && basis[i] < basis[r]) {
                        Some(i)
                    } else {
                        Some(r)
                    }
                }
            };
        }
        let Some(row) = leave else {
            return Err(Error::Unbounded);
        };
        if pivots >= max_pivots {
            return Err(Error::IterationCapExceeded {
                best_value: z[rhs_col].to_f64(),
                gap: f64::NAN,
                prior: Vec::new(),
            });
        }
        pivot(&mut tab, &mut z, row, col);
        basis[row] = col;
        pivots += 1;
    }

    let mut primal = vec![S::zero(); n];
    let mut degenerate = false;
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            primal[b] = tab[i][rhs_col].clone();
        }
        if tab[i][rhs_col].is_zero_tol() {
            degenerate = true;
        }
    }
    Ok(LpSolution {
        value: z[rhs_col].clone(),
        primal,
        dual: z[n..n + m].to_vec(),
        pivots,
        degenerate,
    })
}

fn pivot<S: Scalar>(tab: &mut [Vec<S>], z: &mut [S], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let pivot_row = tab[row].clone();
    let eliminate = |target: &mut [S]| {
        let f = target[col].clone();
        if f.is_zero() {
            return;
        }
        for (t, r) in target.iter_mut().zip(&pivot_row) {
            if !r.is_zero() {
                *t = t.clone() - f.clone() * r.clone();
            }
        }
    };
    for (i, t) in tab.iter_mut().enumerate() {
        if i != row {
            eliminate(t);
        }
    }
    eliminate(z);
}

/// Optimal strategies and value of a finite zero-sum matrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution<S> {
    pub value: S,
    /// Mixed strategy of the row player, who maximizes.
    pub maximizer: Vec<S>,
    /// Mixed strategy of the column player, who minimizes.
    pub minimizer: Vec<S>,
    pub degenerate: bool,
    pub pivots: usize,
}

/// Solves the game whose `payoff[i][j]` the row player receives.
pub fn solve_zero_sum<S: Scalar>(payoff: &[Vec<S>], max_pivots: usize) -> Result<MatrixGameSolution<S>> {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidQuery("empty payoff matrix".into()));
    }
    let min = payoff
        .iter()
        .flatten()
        .cloned()
        .fold(payoff[0][0].clone(), |a, b| if b < a { b } else { a });
    // shift every entry to at least one so the scaled program is bounded and feasible
    let shift = S::one() - min;
    let lp = LinearProgram {
        objective: vec![S::one(); cols],
        rows: payoff
            .iter()
            .map(|r| r.iter().map(|v| v.clone() + shift.clone()).collect())
            .collect(),
        rhs: vec![S::one(); rows],
    };
    let sol = maximize(&lp, max_pivots)?;
    let total = sol.value.clone();
    let maximizer = sol.dual.iter().map(|y| y.clone() / total.clone()).collect();
    let minimizer = sol.primal.iter().map(|u| u.clone() / total.clone()).collect();
    Ok(MatrixGameSolution {
        value: S::one() / total - shift,
        maximizer,
        minimizer,
        degenerate: sol.degenerate,
        pivots: sol.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn r(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|row| row.iter().map(|&v| rat(v, 1)).collect()).collect()
    }

    #[test]
    fn textbook_program() {
        let lp = LinearProgram {
            objective: vec![rat(3, 1), rat(5, 1)],
            rows: r(&[&[1, 0], &[0, 2], &[3, 2]]),
            rhs: vec![rat(4, 1), rat(12, 1), rat(18, 1)],
        };
        let sol = maximize(&lp, 100).unwrap();
        assert_eq!(sol.value, rat(36, 1));
        assert_eq!(sol.primal, vec![rat(2, 1), rat(6, 1)]);
        assert_eq!(sol.dual, vec![rat(0, 1), rat(3, 2), rat(1, 1)]);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        let lp = LinearProgram {
            objective: vec![rat(3, 4), rat(-150, 1), rat(1, 50), rat(-6, 1)],
            rows: vec![
                vec![rat(1, 4), rat(-60, 1), rat(-1, 25), rat(9, 1)],
                vec![rat(1, 2), rat(-90, 1), rat(-1, 50), rat(3, 1)],
                vec![rat(0, 1), rat(0, 1), rat(1, 1), rat(0, 1)],
            ],
            rhs: vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        };
        let sol = maximize(&lp, 1000).unwrap();
        assert_eq!(sol.value, rat(1, 20));
        let float: LinearProgram<f64> = LinearProgram {
            objective: lp.objective.iter().map(Scalar::to_f64).collect(),
            rows: lp.rows.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
            rhs: lp.rhs.iter().map(Scalar::to_f64).collect(),
        };
        assert!((maximize(&float, 1000).unwrap().value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let lp = LinearProgram {
            objective: vec![rat(1, 1)],
            rows: r(&[&[-1]]),
            rhs: vec![rat(1, 1)],
        };
        assert_eq!(maximize(&lp, 10).unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn cyclic_three_action_game() {
        let g = r(&[&[0, -1, 1], &[1, 0, -1], &[-1, 1, 0]]);
        let sol = solve_zero_sum(&g, 100).unwrap();
        assert_eq!(sol.value, rat(0, 1));
        assert_eq!(sol.maximizer, vec![rat(1, 3); 3]);
        assert_eq!(sol.minimizer, vec![rat(1, 3); 3]);
    }

    #[test]
    fn matching_pennies_skewed() {
        // value 1/5 for [[1, 0], [0, 1/4]] with row strategy (1/5, 4/5)
        let g = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 4)]];
        let sol = solve_zero_sum(&g, 100).unwrap();
        assert_eq!(sol.value, rat(1, 5));
        assert_eq!(sol.maximizer, vec![rat(1, 5), rat(4, 5)]);
    }
}
