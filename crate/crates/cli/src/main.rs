//! Command-line front end.
//!
//! Exit codes: 0 when the answer is positive (satisfiable, verified, all
//! claims hold), 1 when it is negative, 2 when a budget ran out, 3 for bad
//! input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdterms::counterexamples::{run_suite, SuiteConfig};
use sdterms::maltsev::{
    build_condition, construct_grid_from_bracket, solve_condition, verify_solution, BracketShape,
    SchemaName, SolveBudget, SolveOutcome, Witness,
};
use sdterms::semiring::{
    assemble_decreased_terms, derive_decrease_certificate, expand_search, grid_equations,
    verify_certificate, Certificate, EquationSet, DEFAULT_SUMMAND_BUDGET,
};
use sdterms::subpower::{DEFAULT_MAX_APPLICATIONS, DEFAULT_MAX_TUPLES};
use sdterms::{Budget, Error, FiniteAlgebra};

#[derive(Parser)]
#[command(
    name = "sdterms",
    version,
    about = "Maltsev conditions, semiring certificates and rational counterexamples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for terms satisfying a condition schema in a finite algebra.
    Solve {
        #[command(flatten)]
        schema: SchemaArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check a witness against a condition schema.
    Verify {
        #[command(flatten)]
        schema: SchemaArgs,
        /// File with one `(symbol term)` entry per symbol.
        #[arg(long)]
        witness: PathBuf,
    },
    /// Derive a certificate of `n-1 ~ n` over the grid equations.
    SemiringDerive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Also write the extracted `(n-1) x n x m'` grid terms here, as
        /// shared definitions.
        #[arg(long)]
        terms: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify a certificate file.
    SemiringCheck {
        #[arg(long)]
        certificate: PathBuf,
        #[command(flatten)]
        equations: EquationArgs,
    },
    /// Search for a certificate of `left ~ right`.
    SemiringSearch {
        #[command(flatten)]
        equations: EquationArgs,
        #[arg(long, allow_hyphen_values = true)]
        left: String,
        #[arg(long, allow_hyphen_values = true)]
        right: String,
        #[arg(long, default_value_t = DEFAULT_SUMMAND_BUDGET)]
        budget_summands: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build grid terms from bracket terms.
    GridFromBracket {
        #[arg(long)]
        algebra: PathBuf,
        /// Bracket terms `b1..b2n`, one `(symbol term)` entry each.
        #[arg(long)]
        witness: PathBuf,
        /// The bracket bijection, e.g. `2,1,4,3`.
        #[arg(long, value_delimiter = ',', required = true)]
        phi: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the sampled checks of the rational counterexamples.
    Counterexamples {
        #[arg(long)]
        seed: u64,
        /// Instances per claim.
        #[arg(long, default_value_t = 1_000)]
        samples: usize,
        /// Instances for the sorting lemma and monotonicity.
        #[arg(long, default_value_t = 10_000)]
        dense_samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SchemaArgs {
    /// Algebra JSON file.
    #[arg(long)]
    algebra: PathBuf,
    /// One of m1m2, grid, wnu, nu, siggers, glued-wnu, weakest-idempotent, bracket.
    #[arg(long)]
    schema: String,
    /// Comma-separated schema parameters.
    #[arg(long, value_delimiter = ',')]
    params: Vec<usize>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest closure the solver may generate.
    #[arg(long, default_value_t = DEFAULT_MAX_TUPLES)]
    budget_tuples: usize,
    /// Operation applications allowed while generating closures.
    #[arg(long, default_value_t = DEFAULT_MAX_APPLICATIONS)]
    budget_applications: u64,
    /// Candidate checks allowed during backtracking.
    #[arg(long, default_value_t = sdterms::maltsev::DEFAULT_MAX_NODES)]
    budget_nodes: u64,
}

#[derive(Args)]
struct EquationArgs {
    /// Equation file: an `alphabet` line and one `e <polynomial>` per equation.
    #[arg(long, conflicts_with = "grid")]
    equations: Option<PathBuf>,
    /// Grid equations for `n,m`.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// How a command ended, apart from input errors.
enum Status {
    Positive,
    Negative,
    Exhausted,
}

impl Status {
    fn code(self) -> ExitCode {
        ExitCode::from(match self {
            Status::Positive => 0,
            Status::Negative => 1,
            Status::Exhausted => 2,
        })
    }
}

type Outcome = Result<Status, Error>;

fn emit(output: &OutputArgs, text: &str) -> Result<(), Error> {
    match &output.output {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)
        .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_schema(
    args: &SchemaArgs,
) -> Result<(FiniteAlgebra, sdterms::maltsev::ConditionSchema), Error> {
    let algebra = FiniteAlgebra::load(&args.algebra)?;
    let name: SchemaName = args.schema.parse()?;
    Ok((algebra, build_condition(name, &args.params)?))
}

fn load_equations(args: &EquationArgs) -> Result<EquationSet, Error> {
    match (&args.equations, &args.grid) {
        (Some(path), None) => EquationSet::from_text(&read_file(path)?),
        (None, Some(nm)) => match nm[..] {
            [n, m] => grid_equations(n, m),
            _ => Err(Error::InvalidParameter("--grid takes `n,m`".into())),
        },
        _ => Err(Error::InvalidParameter(
            "give exactly one of --equations or --grid".into(),
        )),
    }
}

fn solve(schema: &SchemaArgs, budget: &BudgetArgs, output: &OutputArgs) -> Outcome {
    let (algebra, condition) = load_schema(schema)?;
    let budget = SolveBudget {
        closure: Budget {
            max_tuples: budget.budget_tuples,
            max_applications: budget.budget_applications,
        },
        max_nodes: budget.budget_nodes,
    };
    match solve_condition(&algebra, &condition, budget)? {
        SolveOutcome::Sat(witness) => {
            if !verify_solution(&algebra, &condition, &witness)? {
                return Err(Error::Precondition(
                    "the solver produced a witness that does not verify".into(),
                ));
            }
            emit(output, &witness.to_string())?;
            Ok(Status::Positive)
        }
        SolveOutcome::Unsat => {
            eprintln!("UNSAT: {}", condition.name);
            Ok(Status::Negative)
        }
        SolveOutcome::Exhausted(why) => {
            eprintln!("EXHAUSTED: {why}");
            Ok(Status::Exhausted)
        }
    }
}

fn verify(schema: &SchemaArgs, witness: &Path) -> Outcome {
    let (algebra, condition) = load_schema(schema)?;
    let witness: Witness = read_file(witness)?.parse()?;
    if verify_solution(&algebra, &condition, &witness)? {
        println!("verified {}", condition.name);
        Ok(Status::Positive)
    } else {
        println!("refuted {}", condition.name);
        Ok(Status::Negative)
    }
}

fn semiring_derive(n: usize, m: usize, terms: Option<&Path>, output: &OutputArgs) -> Outcome {
    let eqs = grid_equations(n, m)?;
    let cert = derive_decrease_certificate(n, m)?;
    if !verify_certificate(&cert, &eqs)? {
        return Err(Error::Precondition(
            "derived certificate does not verify".into(),
        ));
    }
    emit(output, &cert.to_text(&eqs.alphabet))?;
    if let Some(path) = terms {
        let dec = assemble_decreased_terms(&cert, n, m)?;
        eprintln!(
            "extracted {} x {} x {} grid terms",
            dec.n,
            dec.n + 1,
            dec.m_prime
        );
        write_file(path, &dec.to_shared_text())?;
    }
    Ok(Status::Positive)
}

fn semiring_check(certificate: &Path, equations: &EquationArgs) -> Outcome {
    let eqs = load_equations(equations)?;
    let (alphabet, cert) = Certificate::from_text(&read_file(certificate)?)?;
    if alphabet.names() != eqs.alphabet.names() {
        return Err(Error::Parse(
            "certificate alphabet differs from the equations' alphabet".into(),
        ));
    }
    match verify_certificate(&cert, &eqs) {
        Ok(true) => {
            println!("verified {} steps", cert.step_count());
            Ok(Status::Positive)
        }
        Ok(false) => {
            println!("refuted: the replays do not reach the common expansion");
            Ok(Status::Negative)
        }
        Err(e @ Error::Replay { .. }) => {
            println!("refuted: {e}");
            Ok(Status::Negative)
        }
        Err(e) => Err(e),
    }
}

fn semiring_search(
    equations: &EquationArgs,
    left: &str,
    right: &str,
    budget: usize,
    output: &OutputArgs,
) -> Outcome {
    let eqs = load_equations(equations)?;
    let p = eqs.alphabet.parse_polynomial(left)?;
    let q = eqs.alphabet.parse_polynomial(right)?;
    match expand_search(&p, &q, &eqs, budget) {
        Ok(cert) => {
            emit(output, &cert.to_text(&eqs.alphabet))?;
            Ok(Status::Positive)
        }
        Err(Error::Exhausted(why)) => {
            eprintln!("EXHAUSTED: {why}");
            Ok(Status::Exhausted)
        }
        Err(e) => Err(e),
    }
}

fn grid_from_bracket(
    algebra: &Path,
    witness: &Path,
    phi: &[usize],
    output: &OutputArgs,
) -> Outcome {
    let algebra = FiniteAlgebra::load(algebra)?;
    let witness: Witness = read_file(witness)?.parse()?;
    let shape = BracketShape::new(phi.to_vec())?;
    let grid = construct_grid_from_bracket(&algebra, &witness, &shape)?;
    emit(output, &grid.to_string())?;
    Ok(Status::Positive)
}

fn counterexamples(
    seed: u64,
    samples: usize,
    dense_samples: usize,
    output: &OutputArgs,
) -> Outcome {
    let config = SuiteConfig {
        samples,
        dense_samples,
        ..SuiteConfig::new(seed)
    };
    let reports = run_suite(&config)?;
    let text: String = reports.iter().map(|r| format!("{r}\n")).collect();
    emit(output, &text)?;
    Ok(if reports.iter().all(|r| r.holds()) {
        Status::Positive
    } else {
        Status::Negative
    })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve {
            schema,
            budget,
            output,
        } => solve(&schema, &budget, &output),
        Command::Verify { schema, witness } => verify(&schema, &witness),
        Command::SemiringDerive {
            n,
            m,
            terms,
            output,
        } => semiring_derive(n, m, terms.as_deref(), &output),
        Command::SemiringCheck {
            certificate,
            equations,
        } => semiring_check(&certificate, &equations),
        Command::SemiringSearch {
            equations,
            left,
            right,
            budget_summands,
            output,
        } => semiring_search(&equations, &left, &right, budget_summands, &output),
        Command::GridFromBracket {
            algebra,
            witness,
            phi,
            output,
        } => grid_from_bracket(&algebra, &witness, &phi, &output),
        Command::Counterexamples {
            seed,
            samples,
            dense_samples,
            output,
        } => counterexamples(seed, samples, dense_samples, &output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(status) => status.code(),
        Err(Error::Exhausted(why)) => {
            eprintln!("EXHAUSTED: {why}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
