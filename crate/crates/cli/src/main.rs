//! `clone-forge`: batch verification and small clone computations.
//!
//! Exit codes: 0 success (certified / preserved), 1 negative result,
//! 2 bad input or parameters, 3 budget or guard exhausted (inconclusive).

mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clone_forge::closure::{close_at_arity, lambda_bounded, ClosureLimits};
use clone_forge::format::{closure_docs, BundleDoc, OperationDoc, RelationDoc};
use clone_forge::witness::{certify, CheckMode, Status, VerifyConfig};
use clone_forge::{
    build_thm2, build_thm3, image, preserves, Budget, ConstructionBundle, Domain, Error, Operation,
    Relation,
};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "clone-forge",
    version,
    about = "Finite clone algebra and lower-bound certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Maximum number of column selections a naive scan may enumerate.
    #[arg(long, global = true, env = "CLONE_FORGE_BUDGET", default_value_t = clone_forge::relations::DEFAULT_BUDGET)]
    budget: u64,

    /// Preservation checker for condition 2.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,

    /// Worker thread cap (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Write the result document to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a construction and certify its lower bound.
    Verify(Construction),
    /// Check whether an operation preserves a relation.
    Preserve {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long, value_name = "FILE")]
        rel: PathBuf,
    },
    /// Compute the image f(rel).
    Image {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long, value_name = "FILE")]
        rel: PathBuf,
    },
    /// The m-ary part of the clone generated by the given operations.
    Closure {
        #[arg(long = "gen", value_name = "FILE")]
        generators: Vec<PathBuf>,
        #[arg(long)]
        arity: usize,
        /// Domain size; required when no generators are given.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Bounded search for the least generating arity of a clone.
    Lambda {
        #[arg(long = "gen", value_name = "FILE")]
        generators: Vec<PathBuf>,
        #[arg(long)]
        max_arity: usize,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Number of essential variables of an operation.
    Ess {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
    },
    /// Write a construction (relations plus rule descriptors) as JSON.
    ExportBundle(Construction),
}

#[derive(Args, Debug)]
struct Construction {
    #[arg(value_enum)]
    family: Family,
    #[arg(long)]
    n: u32,
    /// Near-unanimity arity parameter (g is (d+1)-ary); fixed to 2 for thm2.
    #[arg(long)]
    d: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Thm2,
    Thm3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Auto,
    Naive,
    Indicator,
}

impl From<Mode> for CheckMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Auto => CheckMode::Auto,
            Mode::Naive => CheckMode::Naive,
            Mode::Indicator => CheckMode::Indicator,
        }
    }
}

/// A failed run: exit code plus message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_budget() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// What a command produced: its document, a text rendering, and exit code.
struct Outcome {
    json: serde_json::Value,
    text: String,
    code: u8,
}

impl Outcome {
    fn new(doc: &impl Serialize, text: String, code: u8) -> Result<Self, Failure> {
        let json = serde_json::to_value(doc).map_err(|e| invalid(e.to_string()))?;
        Ok(Self { json, text, code })
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let raw = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_op(path: &Path) -> Result<Operation, Failure> {
    Ok(read_json::<OperationDoc>(path)?.to_operation()?)
}

fn load_rel(path: &Path) -> Result<Relation, Failure> {
    Ok(read_json::<RelationDoc>(path)?.to_relation()?)
}

fn build(c: &Construction) -> Result<ConstructionBundle, Failure> {
    match c.family {
        Family::Thm2 => {
            if let Some(d) = c.d.filter(|&d| d != 2) {
                return Err(invalid(format!("thm2 has d = 2, got --d {d}")));
            }
            Ok(build_thm2(c.n)?)
        }
        Family::Thm3 => {
            let d = c.d.ok_or_else(|| invalid("thm3 needs --d"))?;
            Ok(build_thm3(c.n, d)?)
        }
    }
}

fn generators_and_domain(
    paths: &[PathBuf],
    n: Option<u32>,
) -> Result<(Vec<Operation>, Domain), Failure> {
    let gens = paths
        .iter()
        .map(|p| load_op(p))
        .collect::<Result<Vec<_>, _>>()?;
    let domain = match (gens.first(), n) {
        (Some(g), Some(n)) if g.domain().size() != n => {
            return Err(invalid(format!(
                "--n {n} disagrees with generator domain {}",
                g.domain().size()
            )))
        }
        (Some(g), _) => g.domain(),
        (None, Some(n)) => Domain::new(n)?,
        (None, None) => return Err(invalid("no generators given; pass --n")),
    };
    Ok((gens, domain))
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let budget = Budget::new(cli.budget);
    match &cli.command {
        Command::Verify(c) => {
            let bundle = build(c)?;
            let config = VerifyConfig {
                mode: cli.mode.into(),
                budget,
            };
            let cert = certify(&bundle, &config);
            let code = match cert.status {
                Status::Certified => 0,
                Status::Failed => 1,
                Status::Inconclusive => 3,
            };
            Outcome::new(&cert, report::certificate(&cert), code)
        }
        Command::Preserve { op, rel } => {
            let (op, rel) = (load_op(op)?, load_rel(rel)?);
            let result = preserves(&op, &rel, budget)?;
            #[derive(Serialize)]
            struct Doc<'a> {
                preserved: bool,
                counterexample: Option<&'a clone_forge::Counterexample>,
            }
            let doc = Doc {
                preserved: result.holds(),
                counterexample: result.counterexample(),
            };
            let text = report::preservation(&result);
            Outcome::new(&doc, text, if result.holds() { 0 } else { 1 })
        }
        Command::Image { op, rel } => {
            let (op, rel) = (load_op(op)?, load_rel(rel)?);
            let img = image(&op, &rel, budget)?;
            Outcome::new(&RelationDoc::from_relation(&img), report::relation(&img), 0)
        }
        Command::Closure {
            generators,
            arity,
            n,
        } => {
            let (gens, domain) = generators_and_domain(generators, *n)?;
            let set = close_at_arity(domain, &gens, *arity, &ClosureLimits::default())?;
            let docs = closure_docs(&set);
            let text = report::closure(&set);
            Outcome::new(&docs, text, 0)
        }
        Command::Lambda {
            generators,
            max_arity,
            n,
        } => {
            let (gens, domain) = generators_and_domain(generators, *n)?;
            let verdict = lambda_bounded(domain, &gens, *max_arity, &ClosureLimits::default())?;
            let text = report::lambda(&verdict);
            Outcome::new(&verdict, text, 0)
        }
        Command::Ess { op } => {
            let op = load_op(op)?;
            let positions = op.essential_variables();
            let count = positions.iter().filter(|&&e| e).count();
            #[derive(Serialize)]
            struct Doc {
                essential_variables: usize,
                positions: Vec<bool>,
            }
            Outcome::new(
                &Doc {
                    essential_variables: count,
                    positions,
                },
                count.to_string(),
                0,
            )
        }
        Command::ExportBundle(c) => {
            let doc = BundleDoc::from_bundle(&build(c)?)?;
            let text = serde_json::to_string_pretty(&doc).map_err(|e| invalid(e.to_string()))?;
            Outcome::new(&doc, text, 0)
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), Failure> {
    let body = if cli.json {
        serde_json::to_string_pretty(&outcome.json).map_err(|e| invalid(e.to_string()))?
    } else {
        outcome.text.clone()
    };
    match &cli.out {
        Some(path) => fs::write(path, body + "\n")
            .map_err(|e| invalid(format!("cannot write {}: {e}", path.display()))),
        None => match writeln!(std::io::stdout().lock(), "{body}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(invalid(format!("cannot write to stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(&cli).and_then(|outcome| {
        emit(&cli, &outcome)?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
