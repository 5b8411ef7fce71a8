use std::fs;
use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use properlab::{Method, OracleBudget, DEFAULT_ENUMERATION_CAP};
use properlab_cli::certify::CertifyOptions;
use properlab_cli::commands::{certify_files, solve, validate, SolveArgs};
use properlab_cli::corpus::{aggregate, run_corpus, CorpusSpec};
use properlab_cli::{CliError, CliResult, ExitCode, CAP_ENV};

#[derive(Parser)]
#[command(name = "properlab", version, about = "Exact minimax learners for finite PAC problems")]
struct Cli {
    /// Largest enumeration (learners or samples) allowed before giving up.
    #[arg(long, global = true, env = CAP_ENV, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Mw,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a problem file and check its invariants.
    Validate { problem: PathBuf },
    /// Solve the minimax game of a problem at one marginal and sample size.
    Solve {
        problem: PathBuf,
        #[arg(long)]
        marginal: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[arg(long)]
        tol: Option<f64>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive every checked quantity of a solution and write a CSV report.
    Certify {
        problem: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate, solve and certify a seeded random corpus.
    Corpus {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Validate { problem } => {
            validate(&problem)?;
            println!("ok");
            Ok(ExitCode::Ok)
        }
        Command::Solve {
            problem,
            marginal,
            n,
            method,
            tol,
            out,
        } => {
            let args = SolveArgs {
                marginal,
                n,
                method: match method {
                    MethodArg::Exact => Method::ExactLp,
                    MethodArg::Mw => Method::MultiplicativeWeights,
                },
                tolerance: tol,
                cap: cli.cap,
            };
            let file = solve(&problem, &args)?;
            match out {
                Some(path) => fs::write(path, file.to_json())?,
                None => print!("{}", file.to_json()),
            }
            Ok(ExitCode::Ok)
        }
        Command::Certify {
            problem,
            solution,
            out,
            budget,
            seed,
        } => {
            let opts = CertifyOptions {
                search_budget: budget,
                seed,
                cap: cli.cap,
                oracle: OracleBudget::default(),
            };
            let report = certify_files(&problem, &solution, &opts)?;
            let csv = report.to_csv()?;
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            if report.ok() {
                Ok(ExitCode::Ok)
            } else {
                Err(CliError::new(ExitCode::Solver, "one or more mandatory checks failed"))
            }
        }
        Command::Corpus {
            seed,
            count,
            out,
            budget,
        } => {
            let spec = CorpusSpec {
                seed,
                count,
                ..CorpusSpec::default()
            };
            let opts = CertifyOptions {
                search_budget: budget,
                cap: cli.cap,
                ..CertifyOptions::default()
            };
            let outcomes = run_corpus(&spec, &opts, Some(&out))?;
            let agg = aggregate(&outcomes);
            println!(
                "{}/{} instances passed, {} errors, oracle checked {}",
                agg.passed, agg.instances, agg.errors, agg.oracle_checked
            );
            if agg.passed == agg.instances {
                Ok(ExitCode::Ok)
            } else {
                Err(CliError::new(ExitCode::Solver, "corpus has failing instances"))
            }
        }
    }
}

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    };
    process::exit(code as i32);
}
