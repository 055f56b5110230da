//! The `qtlab` command line. [`run`] does all the work and returns the exit
//! code and both output streams, so it can be driven in-process.
//!
//! Exit codes: 0 success, 1 negative decision (invalid matrix, proven
//! impossibility, unmet precondition), 2 usage or input error, 3 internal
//! invariant violation.

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qtlab::cohomology::{
    build_ring, facial_restriction, integral_torsion, product_structure, search_nilpotents, GradedRing,
    ProductSearchOutcome, RationalRing,
};
use qtlab::enumeration::census;
use qtlab::exact::{Gf2, Scalar};
use qtlab::isotropy::{is_action_free, isotropy_of_pattern, CoordinatePattern};
use qtlab::normal_form::{bott_tower, classify, NormalFormResult};
use qtlab::{CoefficientMode, Error, Shape, VectorMatrix};
use serde_json::{json, Value};

pub const DEFAULT_HEIGHT: u64 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn json(code: i32, body: Value) -> Self {
        CommandResult {
            code,
            stdout: format!("{body}\n"),
            stderr: String::new(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        CommandResult {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {}\n", message.into()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qtlab", version, about = "Quasitoric manifolds and small covers over products of simplices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Read the matrix from this file instead of stdin.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Work over GF(2) (small covers); integer input is reduced mod 2.
    #[arg(long)]
    gf2: bool,
}

#[derive(Args, Debug)]
struct Height {
    /// Numerator and denominator bound for the coefficient grid.
    #[arg(long, env = "QTLAB_HEIGHT", default_value_t = DEFAULT_HEIGHT)]
    height: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that every principal minor is a unit.
    Validate(Input),
    /// List every principal minor of every submatrix.
    Minors(Input),
    /// Negate columns so that every diagonal component is 1.
    Normalize(Input),
    /// Conjugate to the unipotent or cyclic normal form.
    Classify(Input),
    /// Describe a unipotent matrix as a tower of projective bundles.
    Tower(Input),
    /// Relations, graded bases and ranks of the cohomology ring.
    Cohomology(Input),
    /// Ranks of the graded pieces.
    Betti(Input),
    /// Ring of the facial submanifold obtained by dropping one factor.
    Restrict {
        #[command(flatten)]
        input: Input,
        /// Factor to drop (1-based).
        #[arg(long)]
        factor: usize,
    },
    /// Search for degree-one classes x with x^(N+1) = 0.
    NilpotentSearch {
        #[command(flatten)]
        input: Input,
        /// N.
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        height: Height,
        /// Allowed generators, 1-based and comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<usize>>,
    },
    /// Search for a basis x_i with x_i^(n_i+1) = 0.
    ProductSearch {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        height: Height,
    },
    /// Isotropy group of a coordinate pattern, or freeness over all vertices.
    Isotropy {
        #[command(flatten)]
        input: Input,
        /// JSON list of coordinate lists, one per factor, e.g. [[0],[1,2]].
        #[arg(long)]
        pattern: Option<String>,
    },
    /// Enumerate and classify every valid matrix with bounded entries.
    Census {
        /// Comma separated dimensions n_1,...,n_m.
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        /// Off-diagonal entries range over [-bound, bound].
        #[arg(long, default_value_t = 2)]
        bound: i64,
        /// Group matrices up to conjugation.
        #[arg(long)]
        dedupe: bool,
        #[arg(long)]
        gf2: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write one JSON file per representative into this directory
        /// (implies --dedupe).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the command line with the process's stdin.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_stdin(argv, &mut std::io::stdin())
}

/// Runs the command line, taking matrix input from `stdin` when `--file`
/// is absent.
pub fn run_with_stdin<I, T>(argv: I, stdin: &mut dyn Read) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandResult {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CommandResult {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command, stdin) {
        Ok(result) => result,
        Err(failure) => failure.into_result(),
    }
}

enum Failure {
    Usage(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn into_result(self) -> CommandResult {
        match self {
            Failure::Usage(message) => CommandResult::usage(message),
            Failure::Library(e) => {
                let code = match &e {
                    _ if e.is_invariant_violation() => 3,
                    Error::NotNormalized
                    | Error::NotValid
                    | Error::NotUnipotent
                    | Error::InvalidDiagonal { .. }
                    | Error::PermutationSearchExceeded { .. } => 1,
                    _ => 2,
                };
                let mut result = CommandResult::json(code, json!({ "error": e.to_string() }));
                result.stderr = format!("error: {e}\n");
                if code == 2 {
                    result.stdout.clear();
                }
                result
            }
        }
    }
}

fn read_matrix(input: &Input, stdin: &mut dyn Read) -> Result<VectorMatrix, Failure> {
    let (text, source) = match &input.file {
        Some(path) => (
            std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
            path.display().to_string(),
        ),
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
            (s, "stdin".to_string())
        }
    };
    let a = VectorMatrix::from_json_str(&text).map_err(|e| Failure::Usage(format!("{source}: {e}")))?;
    Ok(if input.gf2 { a.to_gf2() } else { a })
}

fn validity(a: &VectorMatrix) -> CommandResult {
    let v = a.is_valid();
    CommandResult::json(if v.valid { 0 } else { 1 }, v.to_json())
}

fn ring_json(a: &VectorMatrix) -> Result<Value, Error> {
    Ok(match a.mode() {
        CoefficientMode::Integer => {
            let ring: RationalRing = build_ring(a)?;
            let mut v = ring.to_json();
            v["integral"] = integral_torsion(a)?.to_json();
            v
        }
        CoefficientMode::Gf2 => build_ring::<Gf2>(a)?.to_json(),
    })
}

fn ranks(a: &VectorMatrix) -> Result<Vec<usize>, Error> {
    Ok(match a.mode() {
        CoefficientMode::Integer => build_ring::<qtlab::exact::Rational>(a)?.poincare_ranks(),
        CoefficientMode::Gf2 => build_ring::<Gf2>(a)?.poincare_ranks(),
    })
}

fn restricted<F: Scalar>(a: &VectorMatrix, j: usize) -> Result<Value, Error> {
    let ring: GradedRing<F> = facial_restriction(a, j)?;
    let mut v = ring.to_json();
    v["factor"] = json!(j + 1);
    v["matrix"] = ring.matrix().to_json();
    Ok(v)
}

fn write_representatives(dir: &Path, report: &qtlab::enumeration::CensusReport) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    for (i, rep) in report.representatives.iter().flatten().enumerate() {
        let path = dir.join(format!("{:05}.json", i + 1));
        std::fs::write(&path, format!("{}\n", rep.matrix.to_json()))
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn dispatch(command: Command, stdin: &mut dyn Read) -> Result<CommandResult, Failure> {
    Ok(match command {
        Command::Validate(input) => validity(&read_matrix(&input, stdin)?),
        Command::Minors(input) => CommandResult::json(0, read_matrix(&input, stdin)?.principal_minors().to_json()),
        Command::Normalize(input) => {
            let (b, flips) = read_matrix(&input, stdin)?.normalize_signs()?;
            let mut v = b.to_json();
            v["flips"] = flips.to_json();
            CommandResult::json(0, v)
        }
        Command::Classify(input) => {
            let result = classify(&read_matrix(&input, stdin)?)?;
            let code = if matches!(result, NormalFormResult::Invalid { .. }) { 1 } else { 0 };
            CommandResult::json(code, result.to_json())
        }
        Command::Tower(input) => {
            let (sigma, tower) = bott_tower(&read_matrix(&input, stdin)?)?;
            CommandResult::json(0, json!({ "sigma": sigma.one_based(), "tower": tower.to_json() }))
        }
        Command::Cohomology(input) => CommandResult::json(0, ring_json(&read_matrix(&input, stdin)?)?),
        Command::Betti(input) => CommandResult::json(0, json!({ "ranks": ranks(&read_matrix(&input, stdin)?)? })),
        Command::Restrict { input, factor } => {
            let a = read_matrix(&input, stdin)?;
            if factor == 0 || factor > a.factors() {
                return Err(Failure::Usage(format!("--factor must lie in 1..={}", a.factors())));
            }
            let v = match a.mode() {
                CoefficientMode::Integer => restricted::<qtlab::exact::Rational>(&a, factor - 1)?,
                CoefficientMode::Gf2 => restricted::<Gf2>(&a, factor - 1)?,
            };
            CommandResult::json(0, v)
        }
        Command::NilpotentSearch {
            input,
            degree,
            height,
            support,
        } => {
            let a = read_matrix(&input, stdin)?;
            let ring: RationalRing = build_ring(&a)?;
            let support = match support {
                Some(s) if s.contains(&0) => return Err(Failure::Usage("--support is 1-based".into())),
                Some(s) => Some(s.iter().map(|i| i - 1).collect::<Vec<_>>()),
                None => None,
            };
            let s = search_nilpotents(&ring, degree, height.height, support.as_deref())?;
            CommandResult::json(if s.status() == "disproved" { 1 } else { 0 }, s.to_json())
        }
        Command::ProductSearch { input, height } => {
            let out = product_structure(&read_matrix(&input, stdin)?, height.height)?;
            let code = if matches!(out, ProductSearchOutcome::Disproved { .. }) { 1 } else { 0 };
            CommandResult::json(code, out.to_json())
        }
        Command::Isotropy { input, pattern } => {
            let a = read_matrix(&input, stdin)?;
            match pattern {
                None => CommandResult::json(0, json!({ "free": is_action_free(&a)? })),
                Some(p) => {
                    let sets: Vec<Vec<usize>> =
                        serde_json::from_str(&p).map_err(|e| Failure::Usage(format!("--pattern: {e}")))?;
                    let pattern = CoordinatePattern::new(&a, sets)?;
                    CommandResult::json(0, isotropy_of_pattern(&a, &pattern)?.to_json())
                }
            }
        }
        Command::Census {
            shape,
            bound,
            dedupe,
            gf2,
            jobs,
            out,
        } => {
            let shape = Shape::new(shape)?;
            if bound < 0 {
                return Err(Failure::Usage("--bound must be nonnegative".into()));
            }
            let mode = if gf2 { CoefficientMode::Gf2 } else { CoefficientMode::Integer };
            let report = census(&shape, mode, bound, dedupe || out.is_some(), jobs.max(1))?;
            if let Some(dir) = &out {
                write_representatives(dir, &report)?;
            }
            CommandResult::json(0, report.to_json())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(e: Error) -> i32 {
        Failure::Library(e).into_result().code
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(code(Error::InvariantViolation("x".into())), 3);
        assert_eq!(code(Error::NotValid), 1);
        assert_eq!(code(Error::NotUnipotent), 1);
        assert_eq!(code(Error::MixedRings), 2);
        let r = Failure::Library(Error::NotNormalized).into_result();
        assert!(r.stdout.contains("\"error\""));
        let r = Failure::Library(Error::ModeMismatch { expected: "int" }).into_result();
        assert!(r.stdout.is_empty() && r.stderr.starts_with("error: "));
    }

    #[test]
    fn usage_errors_leave_stdout_empty() {
        let r = run_with_stdin(["qtlab", "nilpotent-search"], &mut "".as_bytes());
        assert_eq!(r.code, 2);
        assert!(r.stdout.is_empty());
    }
}
