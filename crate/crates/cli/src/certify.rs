//! Per-instance certification report.

use std::fmt;

use num_traits::Zero;
use properlab::bayes::{distributional_srm, mix_bayesians_compare, posterior, MixtureVerdict, SrmMode};
use properlab::game::{GameInstance, PriorSearch, Ratio};
use properlab::oracle::{cross_check, OracleBudget};
use properlab::problem::for_each_sorted_sequence;
use properlab::reductions::{
    factor_e_check, loo_bound_check, max_ratio, properization_bound_check, sample_complexity_df,
    classic_bracket, Model, SampleComplexityQuery, TransductiveInstance,
};
use properlab::scalar::{format_rational, parse_rational, rat};
use properlab::{
    build_proper_learner, evaluate_worstcase, problem_hash, search_proper_prior, solve_game, Enumeration,
    Error, ExactHypothesis, FiniteProblem, LearnerSpec, Marginal, Method, Rational, Scalar, SolutionFile,
    SolverConfig,
};
use serde::Serialize;

use crate::exit::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
    Observed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
            Verdict::Observed => "observed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Mandatory,
    Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub instance: String,
    pub quantity: String,
    pub lhs: String,
    pub rhs: String,
    pub ratio: String,
    pub verdict: Verdict,
    pub category: Category,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub search_budget: usize,
    pub seed: u64,
    pub cap: u128,
    pub oracle: OracleBudget,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            search_budget: 200,
            seed: 0,
            cap: properlab::DEFAULT_ENUMERATION_CAP,
            oracle: OracleBudget::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<Row>,
    pub value: Rational,
    pub factor2_ratio: Ratio,
    /// Which prior certified the factor-2 bound.
    pub witness: String,
    pub factor_e_ratio: Ratio,
}

impl Report {
    /// True iff no mandatory row failed.
    pub fn ok(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.category == Category::Observation || r.verdict != Verdict::Fail)
    }

    pub fn row(&self, quantity: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

struct Rows<'a> {
    instance: &'a str,
    rows: Vec<Row>,
}

impl Rows<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        quantity: &str,
        lhs: impl Into<String>,
        rhs: impl Into<String>,
        ratio: impl Into<String>,
        verdict: Verdict,
        category: Category,
        note: impl Into<String>,
    ) {
        self.rows.push(Row {
            instance: self.instance.to_string(),
            quantity: quantity.to_string(),
            lhs: lhs.into(),
            rhs: rhs.into(),
            ratio: ratio.into(),
            verdict,
            category,
            note: note.into(),
        });
    }

    fn check(&mut self, quantity: &str, lhs: impl Into<String>, rhs: impl Into<String>, ratio: impl Into<String>, ok: bool, note: impl Into<String>) {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.push(quantity, lhs, rhs, ratio, verdict, Category::Mandatory, note);
    }
}

fn fr(r: &Rational) -> String {
    format_rational(r)
}

fn within_factor_two(worst: &Rational, value: &Rational) -> bool {
    let two = rat(2, 1);
    *worst <= &two * value || worst.to_f64() <= 2.0 * value.to_f64() + 1e-9
}

/// Loads the marginal and size stored in a solution file.
pub fn solution_marginal(file: &SolutionFile) -> CliResult<Marginal> {
    let weights = file
        .marginal_weights
        .iter()
        .map(|w| parse_rational(w))
        .collect::<properlab::Result<Vec<_>>>()?;
    Ok(Marginal::new(weights)?)
}

/// Certifies a solution against its problem; a hash mismatch is an error.
pub fn certify(instance: &str, problem: &FiniteProblem, file: &SolutionFile, opts: &CertifyOptions) -> CliResult<Report> {
    let hash = problem_hash(problem);
    if file.problem_hash != hash {
        return Err(CliError::mismatch(format!(
            "solution is bound to problem {} but the problem hashes to {hash}",
            file.problem_hash
        )));
    }
    let marg = solution_marginal(file)?;
    if marg.len() != problem.num_points() {
        return Err(CliError::mismatch("solution marginal does not fit the problem"));
    }
    let n = file.n;
    let enumeration = Enumeration::with_cap(opts.cap);
    let exact_cfg = SolverConfig::exact().with_cap(opts.cap);
    let exact = solve_game::<Rational>(problem, &marg, n, &exact_cfg)?;
    let value = exact.value.clone();
    let mut rows = Rows { instance, rows: Vec::new() };

    // stored value against an independent exact re-solve
    match file.scalar.as_str() {
        "rational" => {
            let sol = file.to_solution::<Rational>()?;
            let ok = sol.value == value && sol.duality_gap.is_zero() && sol.method == Method::ExactLp;
            rows.check("game_value", fr(&sol.value), fr(&value), "", ok, "exact re-solve");
        }
        _ => {
            let sol = file.to_solution::<f64>()?;
            let ok = (sol.value - value.to_f64()).abs() <= 1e-6 && sol.duality_gap <= 1e-6;
            rows.check(
                "game_value",
                sol.value.to_text(),
                fr(&value),
                "",
                ok,
                format!("gap {}", sol.duality_gap.to_text()),
            );
        }
    }

    let iterative = solve_game::<f64>(problem, &marg, n, &SolverConfig::iterative().with_cap(opts.cap));
    match iterative {
        Ok(sol) => {
            let diff = (sol.value - value.to_f64()).abs();
            rows.check(
                "iterative_agreement",
                sol.value.to_text(),
                fr(&value),
                "",
                diff <= 1e-6 && sol.duality_gap <= 1e-6,
                format!("gap {:e} diff {:e}", sol.duality_gap, diff),
            );
        }
        Err(e) => rows.check("iterative_agreement", "", fr(&value), "", false, e.to_string()),
    }

    // factor 2: the adversary prior first, prior search as fallback
    let star = build_proper_learner(&exact);
    let star_result = evaluate_worstcase(&star, &marg, n, problem, &enumeration, Some(&value));
    let (prior, worst, witness, note) = match star_result {
        Ok(wc) if within_factor_two(&wc.max, &value) => (
            exact.adversary_prior.clone(),
            wc.max,
            "adversary_prior",
            String::new(),
        ),
        other => {
            let why = match &other {
                Ok(wc) => format!("adversary prior worst case {}", fr(&wc.max)),
                Err(e) => format!("adversary prior: {e}"),
            };
            let search = PriorSearch {
                budget: opts.search_budget,
                seed: opts.seed,
                hint: Some(exact.adversary_prior.clone()),
            };
            let found = search_proper_prior(problem, &marg, n, &search, &enumeration, Some(&value))?;
            match other {
                Ok(wc) if wc.max <= found.worst_case => (exact.adversary_prior.clone(), wc.max, "adversary_prior", why),
                _ => (found.prior, found.worst_case, "prior_search", why),
            }
        }
    };
    let factor2_ratio = Ratio::of(&worst, &value);
    rows.check(
        "factor2",
        fr(&worst),
        fr(&(&value * rat(2, 1))),
        factor2_ratio.to_string(),
        within_factor_two(&worst, &value),
        format!("witness {witness}{}{note}", if note.is_empty() { "" } else { "; " }),
    );
    let bayes = LearnerSpec::Bayesian(prior.clone());

    match cross_check(problem, &marg, n, &opts.oracle) {
        Ok(cc) => {
            let failed: Vec<&str> = cc.assertions.iter().filter(|(_, v)| !**v).map(|(k, _)| *k).collect();
            rows.check(
                "oracle_value",
                fr(&cc.oracle.value),
                fr(&cc.solver_value),
                "",
                cc.passed(),
                format!(
                    "learners {} deterministic_minimax {}{}",
                    cc.oracle.learners,
                    fr(&cc.oracle.deterministic_minimax),
                    if failed.is_empty() { String::new() } else { format!(" failed {}", failed.join(" ")) }
                ),
            );
        }
        Err(Error::BudgetExceeded { required, budget }) => rows.push(
            "oracle_value",
            "",
            fr(&value),
            "",
            Verdict::Skipped,
            Category::Mandatory,
            format!("requires {required} learners over budget {budget}"),
        ),
        Err(e) => return Err(e.into()),
    }

    let inst = GameInstance::<Rational>::new(problem, &marg, n, &enumeration)?;
    let (_, labels) = inst.best_response(exact.adversary_prior.weights());
    let table = LearnerSpec::Table(inst.table(&labels));
    for (quantity, inner) in [("properization_best_response", &table), ("properization_bayes", &bayes)] {
        let r = properization_bound_check(inner, &marg, n, problem, &enumeration)?;
        rows.check(
            quantity,
            r.violations.to_string(),
            r.samples_checked.to_string(),
            r.max_ratio.to_string(),
            r.passed(),
            "violations over samples checked",
        );
    }

    let mut identity = 0;
    let mut inequality = 0;
    let truths = problem.num_hypotheses();
    for truth in 0..truths {
        let r = loo_bound_check(&bayes, &marg, truth, n, problem, &enumeration)?;
        identity += usize::from(r.identity_holds());
        inequality += usize::from(r.inequality_holds());
    }
    rows.check("loo_identity", identity.to_string(), truths.to_string(), "", identity == truths, "truths holding");
    rows.check("loo_inequality", inequality.to_string(), truths.to_string(), "", inequality == truths, "truths holding");

    // factor e over every instance of size n+1 on supp(D); the Bayesian
    // witness ignores point order, so one representative per multiset suffices
    let mut factor_e_ratio = Ratio::Finite(Rational::zero());
    let mut checked = 0usize;
    let mut holding = 0usize;
    let mut failure = None;
    for_each_sorted_sequence(&marg.support(), n + 1, |points| {
        if failure.is_some() {
            return;
        }
        for truth in 0..truths {
            let inst = TransductiveInstance::new(points.to_vec(), truth, problem).expect("points are in range");
            match factor_e_check(&bayes, &inst, problem, &enumeration) {
                Ok(r) => {
                    checked += 1;
                    holding += usize::from(r.holds(1e-12));
                    factor_e_ratio = max_ratio(factor_e_ratio.clone(), r.ratio);
                }
                Err(e) => failure = Some(e),
            }
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    rows.check(
        "factor_e",
        holding.to_string(),
        checked.to_string(),
        factor_e_ratio.to_string(),
        holding == checked,
        "instances holding; ratio is the largest B error over inner error",
    );

    let mut srm_cases = 0usize;
    let mut srm_equal = 0usize;
    let mut mixture_cases = 0usize;
    let mut mixture_equal = 0usize;
    let mut equal_evidence_cases = 0usize;
    let mut equal_evidence_equal = 0usize;
    let uniform = ExactHypothesis::uniform(truths);
    let components = [prior.clone(), uniform];
    let half = [rat(1, 2), rat(1, 2)];
    for s in inst.samples() {
        match posterior(&prior, &s.sample, problem) {
            Ok(post) => {
                srm_cases += 1;
                let srm = distributional_srm(&prior, &s.sample, problem, SrmMode::ClosedForm)?;
                srm_equal += usize::from(srm == post);
            }
            Err(Error::ZeroEvidence) => {}
            Err(e) => return Err(e.into()),
        }
        match mix_bayesians_compare(&components, &half, &s.sample, problem) {
            Ok(r) => {
                mixture_cases += 1;
                let equal = r.verdict == MixtureVerdict::Equal;
                mixture_equal += usize::from(equal);
                if r.equal_evidence() {
                    equal_evidence_cases += 1;
                    equal_evidence_equal += usize::from(equal);
                }
            }
            Err(Error::ComponentZeroEvidence(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    rows.check("srm_closed_form", srm_equal.to_string(), srm_cases.to_string(), "", srm_equal == srm_cases, "samples with positive evidence");
    rows.check(
        "mixture_equal_evidence",
        equal_evidence_equal.to_string(),
        equal_evidence_cases.to_string(),
        "",
        equal_evidence_equal == equal_evidence_cases,
        "equal-evidence samples with identical sides",
    );

    let epsilon = rat(1, 4);
    let grid = [Marginal::uniform(problem.num_points()), marg.clone()];
    let df_query = SampleComplexityQuery::new(epsilon.clone(), rat(1, 10), Model::DistributionFixed, n)?;
    let classic_query = SampleComplexityQuery::new(epsilon, rat(1, 10), Model::Classic, n)?;
    let bracket = classic_bracket(problem, &grid, &classic_query, &exact_cfg)?;
    let mut df_ok = true;
    let mut df_values = Vec::new();
    for g in &grid {
        let c = sample_complexity_df(problem, g, &df_query, &exact_cfg)?;
        df_ok &= c <= bracket.lower;
        df_values.push(c.to_string());
    }
    rows.check(
        "df_below_classic",
        df_values.join(" "),
        bracket.lower.to_string(),
        "",
        df_ok,
        format!("epsilon 1/4; grid upper witness {}", bracket.upper_witness),
    );

    rows.push(
        "mixture_identity",
        mixture_equal.to_string(),
        mixture_cases.to_string(),
        "",
        Verdict::Observed,
        Category::Observation,
        "samples where mixture of posteriors equals posterior of mixture",
    );
    let next = solve_game::<Rational>(problem, &marg, n + 1, &exact_cfg);
    match next {
        Ok(next) => rows.push(
            "value_monotone",
            fr(&next.value),
            fr(&value),
            "",
            if next.value <= value { Verdict::Observed } else { Verdict::Fail },
            Category::Observation,
            format!("value at n={} against n={n}", n + 1),
        ),
        Err(Error::EnumerationCapExceeded { required, .. }) => rows.push(
            "value_monotone",
            "",
            fr(&value),
            "",
            Verdict::Skipped,
            Category::Observation,
            format!("n+1 needs {required} samples"),
        ),
        Err(e) => return Err(e.into()),
    }

    Ok(Report {
        rows: rows.rows,
        value,
        factor2_ratio,
        witness: witness.to_string(),
        factor_e_ratio,
    })
}
