//! File-level commands behind the `properlab` binary.

use std::fs;
use std::path::Path;

use properlab::{parse_problem, problem_hash, solve_game, FiniteProblem, Method, Rational, SolutionFile, SolverConfig};

use crate::certify::{certify, CertifyOptions, Report};
use crate::exit::{CliError, CliResult};

pub fn read_problem(path: &Path) -> CliResult<FiniteProblem> {
    let text = fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    Ok(parse_problem(&text)?)
}

pub fn read_solution(path: &Path) -> CliResult<SolutionFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    Ok(SolutionFile::from_json(&text)?)
}

pub fn validate(path: &Path) -> CliResult<FiniteProblem> {
    read_problem(path)
}

#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub marginal: String,
    pub n: usize,
    pub method: Method,
    pub tolerance: Option<f64>,
    pub cap: u128,
}

/// Solves a problem file; exact solves store rationals, iterative ones binary64.
pub fn solve(path: &Path, args: &SolveArgs) -> CliResult<SolutionFile> {
    let problem = read_problem(path)?;
    let marg = problem.marginal(&args.marginal)?;
    let hash = problem_hash(&problem);
    let mut cfg = match args.method {
        Method::ExactLp => SolverConfig::exact(),
        Method::MultiplicativeWeights => SolverConfig::iterative(),
    }
    .with_cap(args.cap);
    if let Some(tol) = args.tolerance {
        cfg.tolerance = tol;
    }
    let file = match args.method {
        Method::ExactLp => {
            let sol = solve_game::<Rational>(&problem, &marg, args.n, &cfg)?.with_marginal_id(&args.marginal);
            SolutionFile::from_solution(&sol, &hash)
        }
        Method::MultiplicativeWeights => {
            let sol = solve_game::<f64>(&problem, &marg, args.n, &cfg)?.with_marginal_id(&args.marginal);
            SolutionFile::from_solution(&sol, &hash)
        }
    };
    Ok(file)
}

pub fn certify_files(problem: &Path, solution: &Path, opts: &CertifyOptions) -> CliResult<Report> {
    let p = read_problem(problem)?;
    let s = read_solution(solution)?;
    let id = problem
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into());
    certify(&id, &p, &s, opts)
}
