//! Seeded random problem corpus and the batch solve/certify driver.

use std::fs;
use std::path::Path;

use properlab::game::Ratio;
use properlab::problem::zero_one_loss;
use properlab::reductions::max_ratio;
use properlab::scalar::{format_rational, rat};
use properlab::{
    problem_hash, solve_game, FiniteProblem, Marginal, Rational, RawProblem, SolutionFile,
    SolverConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{certify, CertifyOptions, Report};
use crate::exit::{CliError, CliResult};

/// Name of the marginal every corpus problem carries.
pub const MARGINAL: &str = "corpus";

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub points: (usize, usize),
    pub labels: (usize, usize),
    pub hypotheses: (usize, usize),
    pub sizes: (usize, usize),
    pub max_denominator: i64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            count: 50,
            points: (2, 4),
            labels: (2, 3),
            hypotheses: (2, 6),
            sizes: (1, 3),
            max_denominator: 20,
        }
    }
}

impl CorpusSpec {
    fn validate(&self) -> CliResult<()> {
        let ranges = [self.points, self.labels, self.hypotheses, self.sizes];
        if ranges.iter().any(|(lo, hi)| lo > hi) || self.points.0 < 1 || self.labels.0 < 1 || self.hypotheses.0 < 1 {
            return Err(CliError::parse("corpus ranges must be nonempty and positive"));
        }
        if self.max_denominator < self.points.1 as i64 {
            return Err(CliError::parse("max denominator must be at least the largest domain size"));
        }
        Ok(())
    }
}

/// One generated problem with its corpus marginal and sample size.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub problem: FiniteProblem,
    pub n: usize,
}

/// Distances in `[1/2, 1]` satisfy every triangle inequality.
const METRIC_DISTANCES: [(i64, i64); 5] = [(1, 2), (2, 3), (3, 4), (5, 6), (1, 1)];

fn random_loss(rng: &mut ChaCha8Rng, k: usize) -> Vec<Vec<Rational>> {
    if rng.gen_bool(0.5) {
        return zero_one_loss(k);
    }
    let mut loss = zero_one_loss(k);
    for a in 0..k {
        for b in a + 1..k {
            let (p, q) = *METRIC_DISTANCES.choose(rng).expect("nonempty");
            loss[a][b] = rat(p, q);
            loss[b][a] = rat(p, q);
        }
    }
    loss
}

fn random_marginal(rng: &mut ChaCha8Rng, points: usize, max_denominator: i64) -> Marginal {
    if rng.gen_bool(0.5) {
        return Marginal::uniform(points);
    }
    let q = rng.gen_range(points as i64..=max_denominator);
    // random composition of q into `points` nonnegative parts, not all zero
    let mut cuts: Vec<i64> = (0..points - 1).map(|_| rng.gen_range(0..=q)).collect();
    cuts.sort_unstable();
    let mut weights = Vec::with_capacity(points);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(q)) {
        weights.push(rat(c - prev, q));
        prev = c;
    }
    Marginal::new(weights).expect("composition sums to one")
}

/// Generates instance `index` of the corpus; independent of every other index.
pub fn generate_instance(spec: &CorpusSpec, index: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let nx = rng.gen_range(spec.points.0..=spec.points.1);
    let ny = rng.gen_range(spec.labels.0..=spec.labels.1);
    let table_size = (ny as u64).pow(nx as u32);
    let nh = rng.gen_range(spec.hypotheses.0..=spec.hypotheses.1).min(table_size as usize);
    let n = rng.gen_range(spec.sizes.0..=spec.sizes.1);
    let mut hypotheses: Vec<Vec<usize>> = Vec::with_capacity(nh);
    while hypotheses.len() < nh {
        let row: Vec<usize> = (0..nx).map(|_| rng.gen_range(0..ny)).collect();
        if !hypotheses.contains(&row) {
            hypotheses.push(row);
        }
    }
    let loss = random_loss(&mut rng, ny);
    let marg = random_marginal(&mut rng, nx, spec.max_denominator);
    let problem = FiniteProblem::new(
        (1..=nx).map(|i| format!("x{i}")).collect(),
        (0..ny).map(|y| y.to_string()).collect(),
        hypotheses,
        loss,
    )
    .and_then(|p| p.with_marginal(MARGINAL, marg))
    .expect("generated problems satisfy every invariant");
    Instance {
        id: format!("instance_{index:03}"),
        problem,
        n,
    }
}

pub fn generate(spec: &CorpusSpec) -> CliResult<Vec<Instance>> {
    spec.validate()?;
    Ok((0..spec.count).map(|i| generate_instance(spec, i)).collect())
}

/// Result of solving and certifying one instance.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub instance: Instance,
    pub solution: Option<SolutionFile>,
    pub report: Option<Report>,
    pub error: Option<String>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.report.as_ref().is_some_and(Report::ok)
    }
}

/// Solves and certifies one instance.
pub fn run_instance(inst: &Instance, opts: &CertifyOptions) -> Outcome {
    let result = (|| -> CliResult<(SolutionFile, Report)> {
        let marg = inst.problem.marginal(MARGINAL)?;
        let cfg = SolverConfig::exact().with_cap(opts.cap);
        let sol = solve_game::<Rational>(&inst.problem, &marg, inst.n, &cfg)?.with_marginal_id(MARGINAL);
        let file = SolutionFile::from_solution(&sol, &problem_hash(&inst.problem));
        let report = certify(&inst.id, &inst.problem, &file, opts)?;
        Ok((file, report))
    })();
    match result {
        Ok((file, report)) => Outcome {
            instance: inst.clone(),
            solution: Some(file),
            report: Some(report),
            error: None,
        },
        Err(e) => Outcome {
            instance: inst.clone(),
            solution: None,
            report: None,
            error: Some(e.message),
        },
    }
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    instance: &'a str,
    points: usize,
    labels: usize,
    hypotheses: usize,
    n: usize,
    value: String,
    factor2_ratio: String,
    witness: &'a str,
    factor_e_ratio: String,
    oracle: String,
    mandatory_pass: usize,
    mandatory_fail: usize,
    status: String,
}

fn summary_row(o: &Outcome) -> SummaryRow<'_> {
    let p = &o.instance.problem;
    let mut row = SummaryRow {
        instance: &o.instance.id,
        points: p.num_points(),
        labels: p.num_labels(),
        hypotheses: p.num_hypotheses(),
        n: o.instance.n,
        value: String::new(),
        factor2_ratio: String::new(),
        witness: "",
        factor_e_ratio: String::new(),
        oracle: String::new(),
        mandatory_pass: 0,
        mandatory_fail: 0,
        status: if o.ok() { "ok".into() } else { "failed".into() },
    };
    if let Some(r) = &o.report {
        row.value = format_rational(&r.value);
        row.factor2_ratio = r.factor2_ratio.to_string();
        row.witness = &r.witness;
        row.factor_e_ratio = r.factor_e_ratio.to_string();
        row.oracle = r.row("oracle_value").map(|x| x.verdict.to_string()).unwrap_or_default();
        for x in r.rows.iter().filter(|x| x.category == crate::certify::Category::Mandatory) {
            match x.verdict {
                crate::certify::Verdict::Pass => row.mandatory_pass += 1,
                crate::certify::Verdict::Fail => row.mandatory_fail += 1,
                _ => {}
            }
        }
    }
    if let Some(e) = &o.error {
        row.status = format!("error: {e}");
    }
    row
}

/// Aggregate figures over a corpus run.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub instances: usize,
    pub passed: usize,
    pub errors: usize,
    pub oracle_checked: usize,
    pub max_factor2_ratio: Ratio,
    pub max_factor_e_ratio: Ratio,
}

pub fn aggregate(outcomes: &[Outcome]) -> Aggregate {
    let mut agg = Aggregate {
        instances: outcomes.len(),
        passed: outcomes.iter().filter(|o| o.ok()).count(),
        errors: outcomes.iter().filter(|o| o.error.is_some()).count(),
        oracle_checked: 0,
        max_factor2_ratio: Ratio::Finite(Rational::from_integer(0.into())),
        max_factor_e_ratio: Ratio::Finite(Rational::from_integer(0.into())),
    };
    for r in outcomes.iter().filter_map(|o| o.report.as_ref()) {
        agg.max_factor2_ratio = max_ratio(agg.max_factor2_ratio.clone(), r.factor2_ratio.clone());
        agg.max_factor_e_ratio = max_ratio(agg.max_factor_e_ratio.clone(), r.factor_e_ratio.clone());
        if r.row("oracle_value").is_some_and(|x| x.verdict == crate::certify::Verdict::Pass) {
            agg.oracle_checked += 1;
        }
    }
    agg
}

/// Runs the whole corpus in parallel and, if `out` is given, writes one
/// directory per instance plus `summary.csv` and `aggregate.csv`.
pub fn run_corpus(spec: &CorpusSpec, opts: &CertifyOptions, out: Option<&Path>) -> CliResult<Vec<Outcome>> {
    let instances = generate(spec)?;
    let outcomes: Vec<Outcome> = instances.par_iter().map(|i| run_instance(i, opts)).collect();
    if let Some(dir) = out {
        write_outputs(dir, &outcomes)?;
    }
    Ok(outcomes)
}

pub fn write_outputs(dir: &Path, outcomes: &[Outcome]) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    let mut summary = csv::Writer::from_writer(Vec::new());
    for o in outcomes {
        let sub = dir.join(&o.instance.id);
        fs::create_dir_all(&sub)?;
        fs::write(sub.join("problem.json"), RawProblem::from_problem(&o.instance.problem).to_pretty_json())?;
        if let Some(sol) = &o.solution {
            fs::write(sub.join("solution.json"), sol.to_json())?;
        }
        if let Some(r) = &o.report {
            fs::write(sub.join("certify.csv"), r.to_csv()?)?;
        }
        summary.serialize(summary_row(o))?;
    }
    let bytes = summary.into_inner().map_err(|e| CliError::parse(e.to_string()))?;
    fs::write(dir.join("summary.csv"), bytes)?;

    let agg = aggregate(outcomes);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "value"])?;
    for (k, v) in [
        ("instances", agg.instances.to_string()),
        ("passed", agg.passed.to_string()),
        ("errors", agg.errors.to_string()),
        ("oracle_checked", agg.oracle_checked.to_string()),
        ("max_factor2_ratio", agg.max_factor2_ratio.to_string()),
        ("max_factor_e_ratio", agg.max_factor_e_ratio.to_string()),
    ] {
        w.write_record([k, v.as_str()])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::parse(e.to_string()))?;
    fs::write(dir.join("aggregate.csv"), bytes)?;
    Ok(())
}
