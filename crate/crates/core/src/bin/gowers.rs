use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gowers::acceptance;
use gowers::analysis::gowers_norm;
use gowers::analysis::{random_phase, BoundedFunction};
use gowers::integrate::{integrate_csm, integrate_ncsm};
use gowers::mforms::{MultiaffineForm, MultilinearForm};
use gowers::ncpoly::NcPoly;
use gowers::par::Exec;
use gowers::pipeline::{run_inverse_pipeline, PipelineOptions, Strategy};
use gowers::rank::{self, PrankResult};
use gowers::symmetrize::{symmetrize_classical_p3, symmetrize_nonclassical_p2, CorrelationWitness};
use gowers::{Error, Prime};

#[derive(Parser)]
#[command(name = "gowers", version, about = "Exact higher-order Fourier analysis over F_p^n")]
struct Cli {
    /// Run every kernel on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Space {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Gowers norms of a function file, or of a random phase on F_p^n.
    Norm {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        space: Space,
        /// Only this order; default prints U2, U3 and U4.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Analytic rank, a flattening certificate and an exact partition-rank search.
    Rank {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        space: Space,
        /// Arity of a random form.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1 << 20)]
        budget: u128,
        /// Write the best certificate here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve d^k P = T for a form file.
    Integrate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        classical_only: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Symmetrize the trilinear part of a witness file.
    Symmetrize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the inverse pipeline on a function file.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Random)]
        strategy: StrategyArg,
        /// Triaffine form file for `--strategy supplied`.
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Polynomial file for `--strategy guess`.
        #[arg(long)]
        guess: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Candidates for the random search and the U^3 oracle.
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long)]
        classical_only: bool,
        /// Refuse when ||f||_U4 is below this.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long)]
        quick: bool,
        /// Only this criterion.
        #[arg(long)]
        only: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Supplied,
    Guess,
    Random,
    Exhaustive,
}

/// Errors mapped to exit codes.
enum Failure {
    Usage(String),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Parse { .. } | Error::UnsupportedPrime(_) => Failure::Usage(e.to_string()),
            _ => Failure::Assertion(e.to_string()),
        }
    }
}

type Out = Result<(), Failure>;

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, report: &Option<PathBuf>) -> Out {
    match report {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn space_of(s: &Space) -> Result<(Prime, usize), Failure> {
    match (s.p, s.n) {
        (Some(p), Some(n)) => Ok((Prime::new(p)?, n)),
        _ => Err(Failure::Usage("without --input, both --p and --n are required".into())),
    }
}

fn norm(input: &Option<PathBuf>, space: &Space, d: Option<usize>, exec: Exec) -> Out {
    let f = match input {
        Some(path) => BoundedFunction::parse(&read(path)?)?,
        None => {
            let (p, n) = space_of(space)?;
            random_phase(p, n, 2, space.seed)
        }
    };
    let orders: Vec<usize> = match d {
        Some(0) => return Err(Failure::Usage("--d must be at least 1".into())),
        Some(d) => vec![d],
        None => vec![2, 3, 4],
    };
    for d in orders {
        let v = gowers_norm(&f, d, exec)?;
        println!("U{d}: ||f||^{} = {}  ||f|| = {:.12}", 1usize << d, v.power, v.norm);
    }
    Ok(())
}

fn rank_cmd(input: &Option<PathBuf>, space: &Space, k: usize, budget: u128, report: &Option<PathBuf>, exec: Exec) -> Out {
    let t = match input {
        Some(path) => MultilinearForm::parse(&read(path)?)?,
        None => {
            use rand::{Rng, SeedableRng};
            let (p, n) = space_of(space)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(space.seed);
            MultilinearForm::from_fn(p, n, k, |_| rng.gen_range(0..p.get()))?
        }
    };
    let p = t.prime();
    let ar = rank::analytic_rank(&t, exec)?;
    println!("bias = {}\narank = {:.6}", ar.bias, ar.arank);
    if t.arity() == 2 {
        println!("matrix rank = {}", rank::bilinear_rank(&t)?.rank);
    }
    let mut best = rank::flattening_certificate(&t)?;
    println!("flattening certificate: {} terms", best.len());
    match rank::prank_search(&t, best.len(), budget) {
        Ok(PrankResult::Exact { rank, certificate }) => {
            println!("prank = {rank}");
            best = certificate;
        }
        Ok(PrankResult::Unknown { lower_bound, cap }) => println!("prank in [{lower_bound}, {cap}]"),
        Err(e) => println!("prank search skipped: {e}"),
    }
    if !rank::verify_certificate(&best).ok || !rank::arank_below_length(&ar, p, best.len()) {
        return Err(Failure::Assertion("certificate check failed".into()));
    }
    match report {
        Some(_) => emit(&best.to_text(), report),
        None => Ok(()),
    }
}

fn integrate_cmd(input: &PathBuf, classical_only: bool, report: &Option<PathBuf>, exec: Exec) -> Out {
    let t = MultilinearForm::parse(&read(input)?)?;
    let poly: NcPoly = if classical_only { integrate_csm(&t, exec)? } else { integrate_ncsm(&t, exec)? };
    emit(&poly.to_text(), report)
}

fn symmetrize_cmd(input: &PathBuf, report: &Option<PathBuf>, exec: Exec) -> Out {
    let w = CorrelationWitness::parse(&read(input)?, exec)?;
    let t = w.phi.multilinear_part();
    let w = if w.trilinear().is_some() { w } else { gowers::symmetrize::multiaffine_cs(&w, exec)?.witness };
    let rep = match t.prime().get() {
        2 => symmetrize_nonclassical_p2(&t, &w, None, exec)?,
        3 => symmetrize_classical_p3(&t, &w, None, exec)?,
        p => return Err(Failure::Usage(format!("symmetrize supports p = 2, 3, not {p}"))),
    };
    emit(&rep.to_text(), report)?;
    if rep.ledger.all_hold() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("{} ledger entries fail", rep.ledger.failures().len())))
    }
}

#[allow(clippy::too_many_arguments)]
fn pipeline_cmd(
    input: &PathBuf,
    strategy: StrategyArg,
    phi: &Option<PathBuf>,
    guess: &Option<PathBuf>,
    seed: u64,
    budget: Option<u128>,
    classical_only: bool,
    delta: f64,
    report: &Option<PathBuf>,
    exec: Exec,
) -> Out {
    let f = BoundedFunction::parse(&read(input)?)?;
    let strategy = match strategy {
        StrategyArg::Supplied => {
            let path = phi.as_ref().ok_or_else(|| Failure::Usage("--strategy supplied needs --phi".into()))?;
            Strategy::Supplied(MultiaffineForm::parse(&read(path)?)?)
        }
        StrategyArg::Guess => {
            let path = guess.as_ref().ok_or_else(|| Failure::Usage("--strategy guess needs --guess".into()))?;
            Strategy::FromPolynomialGuess(NcPoly::parse(&read(path)?)?)
        }
        StrategyArg::Random => Strategy::RandomSearch { budget: budget.unwrap_or(64) as usize, seed },
        StrategyArg::Exhaustive => Strategy::ExhaustiveTrilinear,
    };
    let mut opts = PipelineOptions::new(strategy);
    opts.classical_only = classical_only;
    opts.exec = exec;
    if let Some(b) = budget {
        opts.budget = opts.budget.max(b);
    }
    let rep = run_inverse_pipeline(&f, delta, &opts)?;
    emit(&rep.to_text(), report)?;
    if report.is_some() {
        println!("final correlation^2 = {}", rep.final_correlation.modulus_sq());
    }
    if rep.ledger.all_hold() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("{} ledger entries fail", rep.ledger.failures().len())))
    }
}

fn selftest(quick: bool, only: Option<usize>, exec: Exec) -> Out {
    let outcomes = match only {
        Some(id) if (1..=10).contains(&id) => vec![acceptance::run(id, quick, exec)],
        Some(id) => return Err(Failure::Usage(format!("no criterion {id}"))),
        None => acceptance::run_all(quick, exec),
    };
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("{failed} criteria failed")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    let result = match &cli.cmd {
        Cmd::Norm { input, space, d } => norm(input, space, *d, exec),
        Cmd::Rank { input, space, k, budget, report } => rank_cmd(input, space, *k, *budget, report, exec),
        Cmd::Integrate { input, classical_only, report } => integrate_cmd(input, *classical_only, report, exec),
        Cmd::Symmetrize { input, report } => symmetrize_cmd(input, report, exec),
        Cmd::Pipeline { input, strategy, phi, guess, seed, budget, classical_only, delta, report } => {
            pipeline_cmd(input, *strategy, phi, guess, *seed, *budget, *classical_only, *delta, report, exec)
        }
        Cmd::Selftest { quick, only } => selftest(*quick, *only, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
