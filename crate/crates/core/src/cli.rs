//! Command-line front end: flag parsing, report assembly, output, and exit
//! codes. The binary is a thin wrapper over [`run`], which takes its streams
//! and the fallback seed as arguments so tests can drive it in-process.
//!
//! Exit codes: 0 success, 1 validation failure (the input or a derived
//! object breaks an operator invariant), 2 bad input (malformed files,
//! malformed flags, missing seed, anything outside the desk-scale guard).
//!
//! All reports are JSON with a fixed field order, so identical runs —
//! including the seed — produce byte-identical output.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::decompose::reconstruct_term_sum;
use crate::error::{Error, Result};
use crate::estimator::{
    allocate_shots, estimate_observable, estimate_observable_exact, same_preparation,
    shot_noise_study, uniform_plan, ApplyMode, HadamardTestRecord, PartSelection,
};
use crate::io::{decompose_to_terms, dense_of_operator, load_operator_from_path, LoadedOperator};
use crate::simulator::{AnsatzCircuit, Gate};
use crate::sparse::{
    Branch, PhaseClass, QueryCounter, SelfInverseTerm, WeightedTermList, MAX_DENSE_QUBITS,
};
use crate::vqe::{optimize, OptimizerKind, ShotBudget, StopReason, VqeConfig};

/// Ansatz used by `vqe` when no template file is given.
const DEFAULT_VQE_TEMPLATE: &str =
    r#"{"layers": 2, "entangler": "cnot_ring", "rotations": ["ry"]}"#;

/// Shot grid measured by `bench-shots`.
const BENCH_SHOT_GRID: [u64; 4] = [100, 1_000, 10_000, 100_000];
const BENCH_SEEDS_PER_POINT: u64 = 100;
/// Preparation angle for the bench ansatz: one RY(0.7) per qubit keeps the
/// state away from computational-basis eigenstates so every term has
/// nonzero variance.
const BENCH_PREP_ANGLE: f64 = 0.7;

#[derive(Parser)]
#[command(
    name = "sparse-vqe",
    version,
    about = "Decompose, estimate, and minimize sparse Hermitian operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose an operator into weighted self-inverse terms.
    Decompose(DecomposeArgs),
    /// Estimate <v|H|u> (or an expectation value when v = u) term by term.
    Estimate(EstimateArgs),
    /// Minimize the estimated energy over ansatz parameters.
    Vqe(VqeArgs),
    /// Check every operator invariant, optionally against a decomposition
    /// report.
    Verify(VerifyArgs),
    /// Measure how the sampled-energy spread scales with shots per term.
    BenchShots(BenchShotsArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    /// Operator file (COO entries or ladder monomials).
    input: PathBuf,
    /// Target reconstruction accuracy (max-norm of the residual).
    #[arg(long)]
    gamma: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Operator file (COO entries or ladder monomials).
    input: PathBuf,
    /// Target reconstruction accuracy for the decomposition.
    #[arg(long)]
    gamma: f64,
    /// Shots per term per part.
    #[arg(long, group = "budget")]
    shots: Option<u64>,
    /// Skip sampling and report the exact value.
    #[arg(long, group = "budget")]
    exact: bool,
    /// Allocate shots for a target standard error instead of uniformly.
    #[arg(long, group = "budget")]
    epsilon: Option<f64>,
    /// Base seed for all sampling streams (falls back to SPARSE_VQE_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// How terms act on the state: matrix action, or the oracle-query
    /// register sequence (which charges query counters).
    #[arg(long, value_enum, default_value_t = ModeArg::Direct)]
    mode: ModeArg,
    /// Ansatz template for the ket preparation U (default: no gates).
    #[arg(long)]
    ansatz: Option<PathBuf>,
    /// Comma-separated parameters for U.
    #[arg(long)]
    theta: Option<String>,
    /// Ansatz template for the bra preparation V (default: same as U).
    #[arg(long)]
    ansatz_v: Option<PathBuf>,
    /// Comma-separated parameters for V.
    #[arg(long)]
    theta_v: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VqeArgs {
    /// Operator file (COO entries or ladder monomials).
    input: PathBuf,
    /// Target reconstruction accuracy for the decomposition.
    #[arg(long)]
    gamma: f64,
    /// Shots per term per evaluation.
    #[arg(long, group = "budget")]
    shots: Option<u64>,
    /// Evaluate the objective exactly (the default).
    #[arg(long, group = "budget")]
    exact: bool,
    /// Allocate shots per evaluation for this target standard error.
    #[arg(long, group = "budget")]
    epsilon: Option<f64>,
    /// Base seed for initialization and sampling (falls back to
    /// SPARSE_VQE_SEED; exact runs default to 0).
    #[arg(long)]
    seed: Option<u64>,
    /// How terms act on the state during evaluations.
    #[arg(long, value_enum, default_value_t = ModeArg::Direct)]
    mode: ModeArg,
    /// Ansatz template file (default: 2 layers, cnot_ring, ry rotations).
    #[arg(long)]
    ansatz: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Simplex)]
    optimizer: OptimizerArg,
    /// Cap on objective evaluations.
    #[arg(long, default_value_t = 2000)]
    max_iters: u64,
    /// Best-energy improvement below this counts as no progress.
    #[arg(long, default_value_t = 1e-9)]
    f_tol: f64,
    /// Independent starts sharing the evaluation budget.
    #[arg(long, default_value_t = 1)]
    restarts: u64,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Operator file (COO entries or ladder monomials).
    input: PathBuf,
    /// Also decompose at this accuracy and check the emitted terms.
    #[arg(long)]
    gamma: Option<f64>,
    /// Check a previously written `decompose` report against this input.
    #[arg(long)]
    decomposition: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchShotsArgs {
    /// Operator file (COO entries or ladder monomials).
    input: PathBuf,
    /// Base seed for the sampling streams (falls back to SPARSE_VQE_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Target reconstruction accuracy for the decomposition.
    #[arg(long, default_value_t = 1e-3)]
    gamma: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Direct,
    Oracle,
}

impl From<ModeArg> for ApplyMode {
    fn from(m: ModeArg) -> ApplyMode {
        match m {
            ModeArg::Direct => ApplyMode::Direct,
            ModeArg::Oracle => ApplyMode::OracleFaithful,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptimizerArg {
    Simplex,
    Spsa,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(o: OptimizerArg) -> OptimizerKind {
        match o {
            OptimizerArg::Simplex => OptimizerKind::Simplex,
            OptimizerArg::Spsa => OptimizerKind::Spsa,
        }
    }
}

/// Parse `argv` (including the program name) and execute one subcommand.
/// Output goes to the given streams; `env_seed` is the value of
/// SPARSE_VQE_SEED if the caller found one. Returns the process exit code.
pub fn run(
    argv: &[String],
    stdout: &mut dyn std::io::Write,
    stderr: &mut dyn std::io::Write,
    env_seed: Option<u64>,
) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    2
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Decompose(args) => run_decompose(&args, stdout),
        Command::Estimate(args) => run_estimate(&args, stdout, env_seed),
        Command::Vqe(args) => run_vqe(&args, stdout, env_seed),
        Command::Verify(args) => run_verify(&args, stdout),
        Command::BenchShots(args) => run_bench_shots(&args, stdout, env_seed),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code_for(&err)
        }
    }
}

/// 1 for semantic validation failures, 2 for malformed or out-of-scope
/// input. Format violations (mirrored COO entries, duplicate monomials,
/// bad tolerances) are bad input, not validation findings.
fn exit_code_for(err: &Error) -> i32 {
    if err.is_validation_failure() {
        1
    } else {
        2
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn std::io::Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::BadInput(format!("serializing report: {e}")))
}

fn to_line_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::BadInput(format!("serializing report: {e}")))
}

fn require_seed(flag: Option<u64>, env_seed: Option<u64>) -> Result<u64> {
    flag.or(env_seed).ok_or_else(|| {
        Error::BadInput("sampled runs need a seed: pass --seed or set SPARSE_VQE_SEED".into())
    })
}

fn parse_theta(text: Option<&str>) -> Result<Vec<f64>> {
    let Some(text) = text else {
        return Ok(Vec::new());
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::BadInput(format!("theta value {piece:?}: {e}")))
        })
        .collect()
}

fn load_ansatz(path: Option<&Path>, num_qubits: usize) -> Result<AnsatzCircuit> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
            AnsatzCircuit::from_template_json(&text, num_qubits)
        }
        None => Ok(AnsatzCircuit::identity(num_qubits)),
    }
}

/// One row of a decomposition report: the term's classification and weight.
/// Partner and sign functions are re-derivable from the input file, so the
/// report carries only the metadata.
#[derive(Serialize, Deserialize, PartialEq, Clone, Copy)]
struct TermRow {
    class: PhaseClass,
    l: usize,
    branch: Branch,
    coefficient: f64,
}

#[derive(Serialize, Deserialize)]
struct DecomposeReport {
    gamma: f64,
    #[serde(rename = "L")]
    num_bits: usize,
    #[serde(rename = "Lambda")]
    lambda: f64,
    term_count: usize,
    fallback_split_used: bool,
    /// Max-norm difference between the re-summed terms and the input;
    /// null when the operator is too large to reconstruct densely.
    measured_error: Option<f64>,
    terms: Vec<TermRow>,
}

fn term_rows(terms: &WeightedTermList<SelfInverseTerm>) -> Vec<TermRow> {
    terms
        .terms
        .iter()
        .map(|w| TermRow {
            class: w.term.phase_class(),
            l: w.term.bit_index(),
            branch: w.term.branch(),
            coefficient: w.coefficient,
        })
        .collect()
}

fn build_decompose_report(op: &LoadedOperator, gamma: f64) -> Result<DecomposeReport> {
    let d = decompose_to_terms(op, gamma)?;
    let measured_error = if op.num_qubits() <= MAX_DENSE_QUBITS {
        let sum = reconstruct_term_sum(&d.terms, op.num_qubits())?;
        let input = dense_of_operator(op)?;
        Some(sum.max_norm_diff(&input))
    } else {
        None
    };
    Ok(DecomposeReport {
        gamma,
        num_bits: d.plan.num_bits,
        lambda: d.plan.lambda,
        term_count: d.terms.terms.len(),
        fallback_split_used: d.fallback_split_used,
        measured_error,
        terms: term_rows(&d.terms),
    })
}

fn run_decompose(args: &DecomposeArgs, stdout: &mut dyn std::io::Write) -> Result<i32> {
    let op = load_operator_from_path(&args.input)?;
    let report = build_decompose_report(&op, args.gamma)?;
    emit(
        &format!("{}\n", to_pretty_json(&report)?),
        args.out.as_deref(),
        stdout,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct EstimateReport {
    /// [real part, imaginary part] of the estimated <v|H|u>.
    estimate: [f64; 2],
    std_error: f64,
    total_shots: u64,
    records: Vec<HadamardTestRecord>,
}

fn run_estimate(
    args: &EstimateArgs,
    stdout: &mut dyn std::io::Write,
    env_seed: Option<u64>,
) -> Result<i32> {
    let op = load_operator_from_path(&args.input)?;
    let n = op.num_qubits();
    let decomposition = decompose_to_terms(&op, args.gamma)?;
    let terms = &decomposition.terms;

    let u = load_ansatz(args.ansatz.as_deref(), n)?;
    let theta_u = parse_theta(args.theta.as_deref())?;
    let (v, theta_v) = if args.ansatz_v.is_none() && args.theta_v.is_none() {
        (u.clone(), theta_u.clone())
    } else {
        let v = match args.ansatz_v.as_deref() {
            Some(path) => load_ansatz(Some(path), n)?,
            None => u.clone(),
        };
        (v, parse_theta(args.theta_v.as_deref())?)
    };

    let report = if args.exact {
        let value = estimate_observable_exact(terms, &u, &theta_u, &v, &theta_v)?;
        EstimateReport {
            estimate: [value.re, value.im],
            std_error: 0.0,
            total_shots: 0,
            records: Vec::new(),
        }
    } else {
        let seed = require_seed(args.seed, env_seed)?;
        let parts = if same_preparation(&u, &theta_u, &v, &theta_v) {
            PartSelection::ReOnly
        } else {
            PartSelection::ReIm
        };
        let plan = match (args.shots, args.epsilon) {
            (Some(shots), None) => uniform_plan(terms.terms.len(), shots, parts),
            (None, Some(epsilon)) => {
                let coefficients: Vec<f64> = terms.terms.iter().map(|w| w.coefficient).collect();
                allocate_shots(&coefficients, epsilon, parts)?
            }
            _ => {
                return Err(Error::BadInput(
                    "estimate needs exactly one of --shots, --exact, --epsilon".into(),
                ))
            }
        };
        let counter = QueryCounter::new();
        let (value, std_error, records) = estimate_observable(
            terms,
            &u,
            &theta_u,
            &v,
            &theta_v,
            &plan,
            seed,
            args.mode.into(),
            &counter,
        )?;
        let total_shots = records.iter().map(|r| r.shots).sum();
        EstimateReport {
            estimate: [value.re, value.im],
            std_error,
            total_shots,
            records,
        }
    };
    emit(
        &format!("{}\n", to_pretty_json(&report)?),
        args.out.as_deref(),
        stdout,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct VqeSummary {
    best_theta: Vec<f64>,
    best_energy: f64,
    converged: bool,
    stop_reason: StopReason,
    evaluations: usize,
    total_shots: u64,
}

fn run_vqe(args: &VqeArgs, stdout: &mut dyn std::io::Write, env_seed: Option<u64>) -> Result<i32> {
    let op = load_operator_from_path(&args.input)?;
    let n = op.num_qubits();
    let decomposition = decompose_to_terms(&op, args.gamma)?;

    let ansatz = match args.ansatz.as_deref() {
        Some(path) => load_ansatz(Some(path), n)?,
        None => AnsatzCircuit::from_template_json(DEFAULT_VQE_TEMPLATE, n)?,
    };

    let budget = match (args.shots, args.epsilon) {
        (Some(shots), None) => ShotBudget::PerTerm(shots),
        (None, Some(epsilon)) => ShotBudget::Epsilon(epsilon),
        (None, None) => ShotBudget::Exact,
        (Some(_), Some(_)) => {
            return Err(Error::BadInput(
                "vqe takes at most one of --shots, --exact, --epsilon".into(),
            ))
        }
    };
    let seed = match budget {
        ShotBudget::Exact => args.seed.or(env_seed).unwrap_or(0),
        _ => require_seed(args.seed, env_seed)?,
    };

    let config = VqeConfig {
        optimizer: args.optimizer.into(),
        max_iters: args.max_iters,
        f_tol: args.f_tol,
        seed,
        budget,
        restarts: args.restarts,
        mode: args.mode.into(),
    };
    let trace = optimize(&decomposition.terms, &ansatz, &config)?;

    let mut text = String::new();
    for record in &trace.iterations {
        text.push_str(&to_line_json(record)?);
        text.push('\n');
    }
    let summary = VqeSummary {
        best_theta: trace.best_theta.clone(),
        best_energy: trace.best_energy,
        converged: trace.converged,
        stop_reason: trace.stop_reason,
        evaluations: trace.iterations.len(),
        total_shots: trace.iterations.last().map(|r| r.total_shots).unwrap_or(0),
    };
    text.push_str(&to_line_json(&summary)?);
    text.push('\n');
    emit(&text, args.out.as_deref(), stdout)?;
    Ok(0)
}

#[derive(Serialize)]
struct CheckRow {
    name: String,
    passed: bool,
    detail: Option<String>,
}

#[derive(Serialize)]
struct VerifyReport {
    input_kind: &'static str,
    num_qubits: usize,
    checks: Vec<CheckRow>,
    passed: bool,
}

fn push_check(rows: &mut Vec<CheckRow>, name: impl Into<String>, detail: Option<String>) {
    rows.push(CheckRow {
        name: name.into(),
        passed: detail.is_none(),
        detail,
    });
}

/// Fold one object's validation report into the check rows under a scope
/// prefix.
fn push_validation(rows: &mut Vec<CheckRow>, scope: &str, report: crate::sparse::ValidationReport) {
    for check in report.checks {
        push_check(
            rows,
            format!("{scope}: {}", check.name),
            check.counterexample,
        );
    }
}

fn verify_operator(op: &LoadedOperator, rows: &mut Vec<CheckRow>) -> Result<()> {
    match op {
        LoadedOperator::Coo(h) => {
            push_validation(rows, "oracle", h.validate()?);
        }
        LoadedOperator::Monomials {
            num_modes,
            monomials,
        } => match crate::fermion::build_pair_terms(monomials) {
            Err(Error::NotConjugateClosed(detail)) => {
                push_check(rows, "conjugate closure", Some(detail));
            }
            Err(other) => return Err(other),
            Ok(pairs) => {
                push_check(rows, "conjugate closure", None);
                for (i, pair) in pairs.iter().enumerate() {
                    match crate::fermion::pair_to_one_sparse(pair, *num_modes) {
                        Err(Error::NotOneSparse {
                            state,
                            first,
                            second,
                        }) => {
                            push_check(
                                rows,
                                format!("pair {i}: one-sparsity"),
                                Some(format!("state {state} maps to both {first} and {second}")),
                            );
                        }
                        Err(other) => return Err(other),
                        Ok(piece) => {
                            push_validation(rows, &format!("pair {i}"), piece.validate()?);
                        }
                    }
                }
            }
        },
    }
    Ok(())
}

fn verify_decomposition(
    op: &LoadedOperator,
    gamma: f64,
    report: Option<&DecomposeReport>,
    rows: &mut Vec<CheckRow>,
) -> Result<()> {
    let d = decompose_to_terms(op, gamma)?;

    // Every emitted term must hold its own invariants.
    let mut bad = None;
    'terms: for (i, w) in d.terms.terms.iter().enumerate() {
        for check in w.term.validate()?.checks {
            if !check.passed {
                bad = Some(format!(
                    "term {i}: {}: {}",
                    check.name,
                    check.counterexample.unwrap_or_default()
                ));
                break 'terms;
            }
        }
        if !(w.coefficient > 0.0 && w.coefficient.is_finite()) {
            bad = Some(format!(
                "term {i}: coefficient {} not positive",
                w.coefficient
            ));
            break;
        }
    }
    push_check(rows, "emitted terms hold their invariants", bad);

    let measured = if op.num_qubits() <= MAX_DENSE_QUBITS {
        let sum = reconstruct_term_sum(&d.terms, op.num_qubits())?;
        let input = dense_of_operator(op)?;
        let diff = sum.max_norm_diff(&input);
        push_check(
            rows,
            "re-summed terms reproduce the input within the residual bound",
            (diff > d.terms.residual_error_bound).then(|| {
                format!(
                    "max-norm difference {diff:e} exceeds bound {:e}",
                    d.terms.residual_error_bound
                )
            }),
        );
        Some(diff)
    } else {
        None
    };

    let Some(report) = report else {
        return Ok(());
    };

    let mut header_bad = None;
    if report.num_bits != d.plan.num_bits {
        header_bad = Some(format!(
            "L: report {} vs re-derived {}",
            report.num_bits, d.plan.num_bits
        ));
    } else if report.lambda != d.plan.lambda {
        header_bad = Some(format!(
            "Lambda: report {} vs re-derived {}",
            report.lambda, d.plan.lambda
        ));
    } else if report.fallback_split_used != d.fallback_split_used {
        header_bad = Some(format!(
            "fallback_split_used: report {} vs re-derived {}",
            report.fallback_split_used, d.fallback_split_used
        ));
    } else if report.term_count != d.terms.terms.len() {
        header_bad = Some(format!(
            "term_count: report {} vs re-derived {}",
            report.term_count,
            d.terms.terms.len()
        ));
    }
    push_check(rows, "report header matches re-derivation", header_bad);

    let rederived = term_rows(&d.terms);
    let mut rows_bad = None;
    if report.terms.len() != rederived.len() {
        rows_bad = Some(format!(
            "report lists {} terms, re-derivation produced {}",
            report.terms.len(),
            rederived.len()
        ));
    } else {
        for (i, (a, b)) in report.terms.iter().zip(&rederived).enumerate() {
            if a != b {
                rows_bad = Some(format!(
                    "term {i}: report ({:?}, l={}, {:?}, {}) vs re-derived ({:?}, l={}, {:?}, {})",
                    a.class, a.l, a.branch, a.coefficient, b.class, b.l, b.branch, b.coefficient
                ));
                break;
            }
        }
    }
    push_check(rows, "report terms match re-derivation", rows_bad);

    if let (Some(reported), Some(measured)) = (report.measured_error, measured) {
        push_check(
            rows,
            "re-summed terms reproduce the input within the reported measured_error",
            (measured > reported + 1e-12)
                .then(|| format!("max-norm difference {measured:e} exceeds reported {reported:e}")),
        );
    }
    Ok(())
}

fn run_verify(args: &VerifyArgs, stdout: &mut dyn std::io::Write) -> Result<i32> {
    let op = load_operator_from_path(&args.input)?;
    let mut rows = Vec::new();
    verify_operator(&op, &mut rows)?;

    let report = match args.decomposition.as_deref() {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
            let report: DecomposeReport = serde_json::from_str(&text)
                .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
            Some(report)
        }
        None => None,
    };
    if let (Some(flag_gamma), Some(report)) = (args.gamma, report.as_ref()) {
        push_check(
            &mut rows,
            "requested gamma matches the report",
            (flag_gamma != report.gamma)
                .then(|| format!("--gamma {flag_gamma} vs report gamma {}", report.gamma)),
        );
    }
    let gamma = report.as_ref().map(|r| r.gamma).or(args.gamma);
    if let Some(gamma) = gamma {
        verify_decomposition(&op, gamma, report.as_ref(), &mut rows)?;
    }

    let verify_report = VerifyReport {
        input_kind: op.kind_name(),
        num_qubits: op.num_qubits(),
        passed: rows.iter().all(|r| r.passed),
        checks: rows,
    };
    emit(
        &format!("{}\n", to_pretty_json(&verify_report)?),
        args.out.as_deref(),
        stdout,
    )?;
    Ok(if verify_report.passed { 0 } else { 1 })
}

fn run_bench_shots(
    args: &BenchShotsArgs,
    stdout: &mut dyn std::io::Write,
    env_seed: Option<u64>,
) -> Result<i32> {
    let seed = require_seed(args.seed, env_seed)?;
    let op = load_operator_from_path(&args.input)?;
    let n = op.num_qubits();
    let decomposition = decompose_to_terms(&op, args.gamma)?;

    let gates: Vec<Gate> = (0..n).map(|q| Gate::Ry(q, q)).collect();
    let prep = AnsatzCircuit::new(n, gates, n)?;
    let theta = vec![BENCH_PREP_ANGLE; n];

    let study = shot_noise_study(
        &decomposition.terms,
        &prep,
        &theta,
        &BENCH_SHOT_GRID,
        BENCH_SEEDS_PER_POINT,
        seed,
    )?;
    emit(
        &format!("{}\n", to_pretty_json(&study)?),
        args.out.as_deref(),
        stdout,
    )?;
    Ok(0)
}
