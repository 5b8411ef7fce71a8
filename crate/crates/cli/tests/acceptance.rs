//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process;

use properlab::fixtures::{p1, three_hypotheses};
use properlab::game::Ratio;
use properlab::reductions::{
    avoidance_probability, avoidance_probability_f64, confidence_boost, sample_complexity_df, BoostConfig,
    Complexity, Model, SampleComplexityQuery,
};
use properlab::scalar::{format_rational, rat};
use properlab::{
    distributional_srm, mix_bayesians_compare, problem_hash, solve_game, LabeledSample, LearnerSpec,
    MixtureVerdict, NumericSrm, Rational, RandomizedHypothesis, SolutionFile, SolverConfig, SrmMode,
};
use properlab_cli::certify::{certify, CertifyOptions, Report, Verdict};
use properlab_cli::corpus::{aggregate, run_corpus, CorpusSpec, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcomes {
    lines: Vec<(usize, bool, String)>,
}

impl Outcomes {
    fn record(&mut self, n: usize, ok: bool, detail: String) {
        println!("criterion {n}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
        self.lines.push((n, ok, detail));
    }
}

fn reports(outcomes: &[Outcome]) -> Vec<&Report> {
    outcomes.iter().filter_map(|o| o.report.as_ref()).collect()
}

/// Counts (pass, fail, skipped) for one row across the corpus.
fn tally(outcomes: &[Outcome], quantity: &str) -> (usize, usize, usize) {
    let mut t = (0, 0, 0);
    for r in reports(outcomes) {
        match r.row(quantity).map(|x| x.verdict) {
            Some(Verdict::Pass) => t.0 += 1,
            Some(Verdict::Skipped) => t.2 += 1,
            _ => t.1 += 1,
        }
    }
    t
}

fn rows_pass(outcomes: &[Outcome], quantities: &[&str]) -> (bool, String) {
    let errors = outcomes.iter().filter(|o| o.report.is_none()).count();
    let mut ok = errors == 0;
    let mut parts = Vec::new();
    for q in quantities {
        let (p, f, s) = tally(outcomes, q);
        ok &= f == 0;
        parts.push(format!("{q} {p} pass {f} fail {s} skipped"));
    }
    if errors > 0 {
        parts.push(format!("{errors} instances errored"));
    }
    (ok, parts.join("; "))
}

fn p1_report() -> (Report, SolutionFile) {
    let problem = p1();
    let marg = problem.marginal("uniform").unwrap();
    let sol = solve_game::<Rational>(&problem, &marg, 1, &SolverConfig::exact())
        .unwrap()
        .with_marginal_id("uniform");
    let file = SolutionFile::from_solution(&sol, &problem_hash(&problem));
    let report = certify("p1", &problem, &file, &CertifyOptions::default()).unwrap();
    (report, file)
}

fn srm_numeric_pairs(count: usize) -> (usize, f64) {
    let spec = CorpusSpec { seed: 1234, ..CorpusSpec::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cfg = SrmMode::Numeric(NumericSrm::default());
    let mut within = 0;
    let mut worst = 0.0f64;
    for i in 0..count {
        let problem = properlab_cli::corpus::generate_instance(&spec, i % 200).problem;
        let k = problem.num_hypotheses();
        let prior = RandomizedHypothesis::<f64>::normalized((0..k).map(|_| rng.gen_range(0.01..1.0)).collect()).unwrap();
        let truth = rng.gen_range(0..k);
        let m = rng.gen_range(0..=3);
        let points: Vec<usize> = (0..m).map(|_| rng.gen_range(0..problem.num_points())).collect();
        let sample = LabeledSample::labeled_by(&points, truth, &problem);
        let exact = distributional_srm(&prior, &sample, &problem, SrmMode::ClosedForm).unwrap();
        let numeric = distributional_srm(&prior, &sample, &problem, cfg).unwrap();
        let tv = exact.total_variation(&numeric);
        worst = worst.max(tv);
        if tv <= 1e-8 {
            within += 1;
        }
    }
    (within, worst)
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_files(root, &path, out);
        } else {
            out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
        }
    }
}

fn main() {
    let mut out = Outcomes { lines: Vec::new() };
    let spec = CorpusSpec::default();
    let opts = CertifyOptions::default();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let corpus = run_corpus(&spec, &opts, Some(dir_a.path())).unwrap();
    let agg = aggregate(&corpus);
    let (p1_rep, p1_file) = p1_report();

    // 1: oracle equality and iterative agreement
    let (oracle_ok, oracle_detail) = rows_pass(&corpus, &["oracle_value", "iterative_agreement"]);
    let p1_oracle = p1_rep.row("oracle_value").is_some_and(|r| r.verdict == Verdict::Pass);
    out.record(
        1,
        oracle_ok && agg.oracle_checked > 0 && p1_oracle,
        format!("{oracle_detail}; p1 oracle {}", if p1_oracle { "pass" } else { "fail" }),
    );

    // 2: factor 2
    let (f2_ok, f2_detail) = rows_pass(&corpus, &["factor2"]);
    let p1_ratio_one = p1_rep.factor2_ratio == Ratio::Finite(rat(1, 1));
    out.record(
        2,
        f2_ok && p1_file.value == "1/8" && p1_ratio_one,
        format!(
            "{f2_detail}; max ratio {}; p1 value {} ratio {}",
            agg.max_factor2_ratio, p1_file.value, p1_rep.factor2_ratio
        ),
    );

    // 3: SRM closed form and numeric agreement
    let (srm_ok, srm_detail) = rows_pass(&corpus, &["srm_closed_form"]);
    let (within, worst) = srm_numeric_pairs(500);
    out.record(
        3,
        srm_ok && within == 500,
        format!("{srm_detail}; numeric {within}/500 within 1e-8 TV, worst {worst:.2e}"),
    );

    // 4: properization
    let (prop_ok, prop_detail) = rows_pass(&corpus, &["properization_best_response", "properization_bayes"]);
    out.record(4, prop_ok, prop_detail);

    // 5: leave-one-out, factor e, avoidance probability
    let (loo_ok, loo_detail) = rows_pass(&corpus, &["loo_identity", "loo_inequality", "factor_e"]);
    let inv_e = (-1.0f64).exp();
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for m in 2..=10_000u64 {
        let f = avoidance_probability_f64(m).unwrap();
        monotone &= f <= prev && f >= inv_e;
        prev = f;
    }
    let f2 = avoidance_probability(2).unwrap();
    out.record(
        5,
        loo_ok && monotone && f2 == rat(1, 2),
        format!(
            "{loo_detail}; max factor_e ratio {}; f(m) decreasing and >= 1/e on 2..10^4: {monotone}; f(2) = {}",
            agg.max_factor_e_ratio,
            format_rational(&f2)
        ),
    );

    // 6: distribution-fixed complexity below classic
    let (df_ok, df_detail) = rows_pass(&corpus, &["df_below_classic"]);
    let problem = p1();
    let marg = problem.marginal("uniform").unwrap();
    let q = SampleComplexityQuery::new(rat(1, 8), rat(1, 10), Model::DistributionFixed, 4).unwrap();
    let p1_df = sample_complexity_df(&problem, &marg, &q, &SolverConfig::exact()).unwrap();
    out.record(
        6,
        df_ok && p1_df == Complexity::Found(1),
        format!("{df_detail}; p1 n(1/8) = {p1_df}"),
    );

    // 7: mixture identity under equal evidence, and the unequal-evidence fixture
    let (mix_ok, mix_detail) = rows_pass(&corpus, &["mixture_equal_evidence"]);
    let three = three_hypotheses();
    let q1 = RandomizedHypothesis::<Rational>::uniform(3);
    let q2 = RandomizedHypothesis::new(vec![rat(1, 10), rat(3, 10), rat(3, 5)]).unwrap();
    let sample = LabeledSample::new(vec![(0, 0)]);
    let report = mix_bayesians_compare(&[q1, q2], &[rat(1, 2), rat(1, 2)], &sample, &three).unwrap();
    let fixture_ok = report.verdict == MixtureVerdict::Unequal(rat(1, 32));
    out.record(
        7,
        mix_ok && fixture_ok,
        format!("{mix_detail}; fixture distance {}", format_rational(&report.distance)),
    );

    // 8: confidence boosting
    let base = LearnerSpec::Bayesian(RandomizedHypothesis::uniform(2));
    let boost = |k, v| {
        let cfg = BoostConfig {
            k,
            v,
            n: 1,
            epsilon: rat(1, 4),
            trials: 10_000,
            seed: 8,
        };
        confidence_boost(&base, &cfg, &marg, 0, &problem).unwrap()
    };
    let single = boost(1, 0);
    let boosted = boost(5, 20);
    let margin = 3.0 * (single.std_error.powi(2) + boosted.std_error.powi(2)).sqrt();
    out.record(
        8,
        boosted.rate + margin < single.rate,
        format!(
            "k=1 rate {:.4} (se {:.4}); k=5 v=20 rate {:.4} (se {:.4}); 3 sigma margin {:.4}",
            single.rate, single.std_error, boosted.rate, boosted.std_error, margin
        ),
    );

    // 9: corpus determinism
    run_corpus(&spec, &opts, Some(dir_b.path())).unwrap();
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    collect_files(dir_a.path(), dir_a.path(), &mut a);
    collect_files(dir_b.path(), dir_b.path(), &mut b);
    let bytes: usize = a.values().map(Vec::len).sum();
    out.record(
        9,
        !a.is_empty() && a == b,
        format!("{} files, {bytes} bytes, identical across two runs: {}", a.len(), a == b),
    );

    println!(
        "corpus: {}/{} instances passed, {} errors, oracle checked {}",
        agg.passed, agg.instances, agg.errors, agg.oracle_checked
    );
    let failed: Vec<usize> = out.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        process::exit(1);
    }
}
