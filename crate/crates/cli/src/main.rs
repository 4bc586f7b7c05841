//! `geninv` — command-line front end for the generator-invariant laboratory.
//!
//! Every run prints one JSON report to stdout: the echoed command line, a
//! SHA-256 digest of each input file, the requested zero-test mode, the
//! command's results (each numeric value carries both its exact rational
//! form and a decimal rendering), and a ledger of named property checks.
//! Exit codes: `0` when all checks pass, `2` when a property check fails,
//! `1` on usage errors (bad flags, unreadable files, malformed input).
//!
//! Commands that produce an artifact (`generate` writes a certificate,
//! `gen-instance` an instance file) write it to `--out`; every other
//! command copies its report there when `--out` is given.

use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use geninv_core::algebra::{Mode, Operator};
use geninv_core::bounds::{
    delta0_hyperfinite, entropy_upper_bounds, free_product_bound, interpolated_fgf_scaling,
    ExtRational, FreeProductKind,
};
use geninv_core::check::NamedCheck;
use geninv_core::entropy::TupleCompression;
use geninv_core::error::Error as CoreError;
use geninv_core::generation::{generation_threshold, run_generation, verify_certificate};
use geninv_core::instance::{
    certificate_from_json, certificate_to_json, hyperfinite_spec_from_json, parse_rational,
    supports_from_json, Instance,
};
use geninv_core::invariant::invariant_family;
use geninv_core::minimize::{minimize, SearchBudget};
use geninv_core::random::{random_instance, InstanceShape};
use geninv_core::scalar::format_rational;
use geninv_core::scaling::{amplify, amplify_self_adjoint, compress};
use geninv_core::selfadjoint::{generator_count_bounds, split_sa};

#[derive(Parser)]
#[command(
    name = "geninv",
    version,
    about = "Exact computations with the generator invariant of tracial matrix models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Zero-test mode: "exact", or a rational tolerance such as "1/1000000"
    #[arg(long, global = true, default_value = "exact")]
    mode: String,

    /// Seed for randomized searches and instance generation
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Evaluation cap: annealing steps for minimize, product budget for
    /// span closures
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Destination for the command's artifact (certificate or instance),
    /// or a copy of the report for commands without one
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the invariant of a named family against a named partition
    Invariant(InvariantArgs),
    /// Search equal-trace coarsenings of an atom frame for the smallest value
    Minimize(MinimizeArgs),
    /// Run the slot construction and emit a generation certificate
    Generate(GenerateArgs),
    /// Re-check every property of a generation certificate
    Verify(VerifyArgs),
    /// Compress a family to a corner and check the quadratic ratio
    Compress(CompressArgs),
    /// Lift a corner family to the whole factor through transport isometries
    Amplify(AmplifyArgs),
    /// Split a self-adjoint family into triangular and diagonal parts
    SplitSa(SplitSaArgs),
    /// Closed-form calculators for invariant and entropy bounds
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Dimension of a tuple compression's range, formula against rank
    Dim(DimArgs),
    /// Write a deterministic random instance file
    GenInstance(GenInstanceArgs),
}

#[derive(Args)]
struct InvariantArgs {
    /// Instance file
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated operator names forming the family
    #[arg(long)]
    set: String,
    /// Partition name
    #[arg(long)]
    partition: String,
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    set: String,
    /// Partition whose parts are the atom frame to coarsen
    #[arg(long)]
    atoms: String,
    /// Search only groupings with exactly this many parts
    #[arg(long)]
    parts: Option<usize>,
    /// Atom count up to which every grouping is enumerated
    #[arg(long, default_value_t = 11)]
    exhaustive_cap: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    set: String,
    #[arg(long)]
    partition: String,
    /// Expected family size (checked against --set when given)
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate file
    #[arg(long)]
    cert: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    set: String,
    #[arg(long)]
    partition: String,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    set: String,
    /// Equal-trace partition with n·k parts
    #[arg(long)]
    partition: String,
    /// Compression ratio denominator
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct AmplifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated names of the corner family
    #[arg(long)]
    corner_set: String,
    /// Trace of the corner projection (derives a coordinate corner when
    /// --corner-parts is not given)
    #[arg(long)]
    corner_trace: Option<String>,
    /// Comma-separated operator names resolving the corner projection
    #[arg(long)]
    corner_parts: Option<String>,
    /// Ceiling for the trace of one refinement atom (default: one
    /// coordinate, 1/d)
    #[arg(long)]
    max_atom_trace: Option<String>,
    /// Lift transports as self-adjoint pairs (v + v*, i(v − v*))
    #[arg(long)]
    self_adjoint: bool,
}

#[derive(Args)]
struct SplitSaArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    set: String,
    /// Equal-trace partition to split along
    #[arg(long)]
    partition: String,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Free entropy dimension of a hyperfinite algebra from its trace data
    Delta0 {
        /// JSON file: {"diffuse_weight": "a/b", "atoms": [{"dim": k, "weight": "a/b"}]}
        #[arg(long)]
        spec: PathBuf,
    },
    /// Invariant bound for a free product of two factors
    FreeProduct {
        /// Invariant of the first factor ("inf" allowed)
        #[arg(long)]
        gm: String,
        /// Invariant of the second factor ("inf" allowed)
        #[arg(long)]
        gn: String,
        /// "general", "amalgamated", or "hyperfinite:<spec.json>"
        #[arg(long, default_value = "general")]
        kind: String,
    },
    /// Rescaled rank of an interpolated free-group factor compression
    Fgf {
        /// Free-rank parameter (> 1)
        #[arg(long)]
        r: String,
        /// Compression trace (0 < λ ≤ 1)
        #[arg(long)]
        lambda: String,
    },
    /// Window of achievable generator counts from an invariant value
    Gens {
        /// Invariant value ("inf" allowed)
        #[arg(long)]
        g: String,
    },
    /// Upper bound on free entropy dimension from an invariant value
    Entropy {
        /// Invariant of the generating set
        #[arg(long)]
        i: String,
        /// The generating set is self-adjoint
        #[arg(long)]
        self_adjoint: bool,
    },
}

#[derive(Args)]
struct DimArgs {
    /// Matrix size
    #[arg(long)]
    k: usize,
    /// Number of band projections (must divide k)
    #[arg(long)]
    p: usize,
    /// JSON file {"supports": [[[i, j], ...] per operator]}
    #[arg(long)]
    support: PathBuf,
    /// Count real dimensions of the self-adjoint subspace
    #[arg(long)]
    self_adjoint: bool,
}

#[derive(Args)]
struct GenInstanceArgs {
    /// Comma-separated block dimensions, e.g. "4" or "2,3"
    #[arg(long, default_value = "4")]
    blocks: String,
    /// Number of operators
    #[arg(long, default_value_t = 2)]
    ops: usize,
    /// Fill probability for entries, a rational in [0, 1]
    #[arg(long, default_value = "1/3")]
    sparsity: String,
    /// Symmetrize every operator
    #[arg(long)]
    self_adjoint: bool,
    /// Part count for the coordinate partition "P"
    #[arg(long, default_value_t = 2)]
    parts: usize,
    /// Conjugate the instance by a random rational unitary
    #[arg(long)]
    rotate: bool,
}

/// A usage-level failure: printed to stderr, exit code 1.
struct Usage(String);

impl<E: Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

/// What a command hands back to `main` for report assembly.
struct Outcome {
    results: Value,
    checks: Vec<NamedCheck>,
    /// Artifact text for `--out` (report goes there when `None`).
    artifact: Option<String>,
}

impl Outcome {
    fn new(results: Value) -> Self {
        Outcome { results, checks: Vec::new(), artifact: None }
    }
}

/// Tracks every file read so the report can carry input digests.
#[derive(Default)]
struct Inputs {
    digests: Vec<(String, String)>,
}

impl Inputs {
    fn read(&mut self, path: &PathBuf) -> Result<String, Usage> {
        let text = fs::read_to_string(path)
            .map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
        let digest = format!("{:x}", Sha256::digest(text.as_bytes()));
        self.digests.push((path.display().to_string(), digest));
        Ok(text)
    }
}

fn rat_json(r: &BigRational) -> Value {
    let decimal = r.to_f64().map_or_else(|| "nan".to_string(), |f| f.to_string());
    json!({ "rational": format_rational(r), "decimal": decimal })
}

fn ext_json(r: &ExtRational) -> Value {
    let decimal = match r.as_finite() {
        Some(f) => f.to_f64().map_or_else(|| "nan".to_string(), |v| v.to_string()),
        None => "inf".to_string(),
    };
    json!({ "rational": r.to_string(), "decimal": decimal })
}

fn checks_json(checks: &[NamedCheck]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect(),
    )
}

fn parse_mode(text: &str) -> Result<Mode, Usage> {
    if text == "exact" {
        return Ok(Mode::Exact);
    }
    let eps = parse_rational(text)
        .map_err(|e| Usage(format!("--mode must be \"exact\" or a rational tolerance: {e}")))?;
    Ok(Mode::float(eps))
}

fn check(name: &str, passed: bool, detail: String) -> NamedCheck {
    NamedCheck { name: name.to_string(), passed, detail }
}

fn parse_ext(text: &str) -> Result<ExtRational, Usage> {
    if text == "inf" || text == "infinity" {
        return Ok(ExtRational::Infinite);
    }
    Ok(ExtRational::finite(parse_rational(text)?))
}

fn load_instance(inputs: &mut Inputs, path: &PathBuf) -> Result<Instance, Usage> {
    let text = inputs.read(path)?;
    Instance::from_json(&text).map_err(Usage::from)
}

fn cmd_invariant(a: &InvariantArgs, mode: &Mode, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    let inst = load_instance(inputs, &a.input)?;
    let family = inst.family(&a.set)?;
    let partition = inst.partition(&a.partition)?;
    let inv = invariant_family(&family, partition, mode)?;
    let patterns: Vec<Value> = inv
        .patterns
        .iter()
        .map(|pat| {
            let cells: Vec<Value> = pat
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, hit)| **hit)
                        .map(move |(j, _)| json!([i, j]))
                })
                .collect();
            Value::Array(cells)
        })
        .collect();
    Ok(Outcome::new(json!({
        "value": rat_json(&inv.value),
        "per_element": inv.per_element.iter().map(rat_json).collect::<Vec<_>>(),
        "triple_count": inv.triple_count,
        "partition": {
            "name": a.partition,
            "parts": partition.len(),
            "traces": partition.traces().iter().map(|t| format_rational(t)).collect::<Vec<_>>(),
        },
        "support_pattern": patterns,
    })))
}

fn cmd_minimize(
    a: &MinimizeArgs,
    mode: &Mode,
    seed: u64,
    budget: Option<u64>,
    inputs: &mut Inputs,
) -> Result<Outcome, Usage> {
    let inst = load_instance(inputs, &a.input)?;
    let family = inst.family(&a.set)?;
    let atoms = inst.partition(&a.atoms)?;
    let search = SearchBudget {
        exhaustive_cap: a.exhaustive_cap,
        anneal_steps: budget.unwrap_or(SearchBudget::default().anneal_steps),
        seed,
    };
    let outcome = minimize(&family, atoms, mode, a.parts, &search)?;
    Ok(Outcome::new(json!({
        "value": rat_json(&outcome.value),
        "grouping": outcome.grouping,
        "exhaustive": outcome.exhaustive,
        "evaluations": outcome.evaluations,
        "witness_parts": outcome.partition.len(),
        "witness_traces": outcome
            .partition
            .traces()
            .iter()
            .map(|t| format_rational(t))
            .collect::<Vec<_>>(),
    })))
}

fn cmd_generate(a: &GenerateArgs, mode: &Mode, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    let inst = load_instance(inputs, &a.input)?;
    let family = inst.family(&a.set)?;
    let partition = inst.partition(&a.partition)?;
    if let Some(n) = a.n {
        if n != family.len() {
            return Err(Usage(format!(
                "--n {n} does not match the {} elements named by --set",
                family.len()
            )));
        }
    }
    let threshold = generation_threshold(family.len(), partition.len());
    match run_generation(&family, partition, mode) {
        Ok(cert) => {
            let checks = verify_certificate(&cert, &family, partition, mode)?;
            let text = certificate_to_json(&cert);
            Ok(Outcome {
                results: json!({
                    "n": cert.n,
                    "k": cert.k,
                    "triple_count": cert.triples.len(),
                    "threshold": rat_json(&threshold),
                    "lambda": rat_json(&cert.lambda),
                    "final_generators": cert.final_generators.len(),
                }),
                checks,
                artifact: Some(text),
            })
        }
        Err(CoreError::ThresholdViolated(detail)) => Ok(Outcome {
            results: json!({
                "n": family.len(),
                "k": partition.len(),
                "threshold": rat_json(&threshold),
            }),
            checks: vec![check("threshold", false, detail)],
            artifact: None,
        }),
        Err(e) => Err(Usage::from(e)),
    }
}

fn cmd_verify(a: &VerifyArgs, mode: &Mode, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    let inst = load_instance(inputs, &a.input)?;
    let family = inst.family(&a.set)?;
    let partition = inst.partition(&a.partition)?;
    let cert_text = inputs.read(&a.cert)?;
    let cert = certificate_from_json(&cert_text, inst.algebra())?;
    let checks = verify_certificate(&cert, &family, partition, mode)?;
    let failed: Vec<&str> =
        checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(Outcome {
        results: json!({
            "n": cert.n,
            "k": cert.k,
            "triple_count": cert.triples.len(),
            "failed_checks": failed,
        }),
        checks,
        artifact: None,
    })
}

fn cmd_compress(a: &CompressArgs, mode: &Mode, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    let inst = load_instance(inputs, &a.input)?;
    let family = inst.family(&a.set)?;
    let partition = inst.partition(&a.partition)?;
    let plan = compress(&family, partition, a.n, mode)?;
    let checks = plan.verify(mode);
    Ok(Outcome {
        results: json!({
            "n": plan.n,
            "k": plan.k,
            "corner_value": rat_json(&plan.corner_value),
            "ambient_value": rat_json(&plan.ambient_value),
            "corner_cells": plan.corner_cells,
            "compressed_family": plan.family.len(),
            "corner_trace": rat_json(&plan.corner.trace_re()),
        }),
        checks,
        artifact: None,
    })
}

fn cmd_amplify(
    a: &AmplifyArgs,
    mode: &Mode,
    budget: Option<u64>,
    inputs: &mut Inputs,
) -> Result<Outcome, Usage> {
    let inst = load_instance(inputs, &a.input)?;
    let family = inst.family(&a.corner_set)?;
    let algebra = inst.algebra().clone();
    if !algebra.is_factor() {
        return Err(Usage("amplification needs a single-block instance".into()));
    }
    let d = algebra.blocks()[0].dim;

    let corner_parts = match (&a.corner_parts, &a.corner_trace) {
        (Some(names), _) => {
            let parts = inst.family(names)?;
            if let Some(t) = &a.corner_trace {
                let t = parse_rational(t)?;
                let total: BigRational =
                    parts.iter().map(|p| p.trace_re()).fold(BigRational::from_integer(0.into()), |acc, x| acc + x);
                if total != t {
                    return Err(Usage(format!(
                        "--corner-trace {} does not match the resolution's total trace {}",
                        format_rational(&t),
                        format_rational(&total)
                    )));
                }
            }
            parts
        }
        (None, Some(trace)) => {
            let t = parse_rational(trace)?;
            let rank = &t * BigRational::from_integer((d as i64).into());
            if !rank.is_integer() {
                return Err(Usage(format!(
                    "--corner-trace {} is not a multiple of 1/{d}",
                    format_rational(&t)
                )));
            }
            let rank = rank.to_integer().to_usize().ok_or_else(|| {
                Usage("corner rank does not fit a machine word".into())
            })?;
            if rank == 0 || rank > d {
                return Err(Usage(format!("corner rank {rank} is outside 1..={d}")));
            }
            (0..rank)
                .map(|i| geninv_core::algebra::Operator::matrix_unit(&algebra, 0, i, i))
                .collect()
        }
        (None, None) => {
            return Err(Usage(
                "amplify needs --corner-parts or --corner-trace to fix the corner".into(),
            ))
        }
    };

    let max_atom = match &a.max_atom_trace {
        Some(t) => parse_rational(t)?,
        None => BigRational::new(1.into(), (d as i64).into()),
    };
    let plan = if a.self_adjoint {
        amplify_self_adjoint(&family, &corner_parts, &max_atom, mode)?
    } else {
        amplify(&family, &corner_parts, &max_atom, mode)?
    };
    let mut checks = plan.verify(mode);
    let span = plan.span_dimension(budget.map(|b| b as usize))?;
    let ambient = algebra.linear_dim();
    checks.push(check(
        "full_generation",
        span == ambient,
        format!("lifted family spans {span} of {ambient} dimensions"),
    ));
    Ok(Outcome {
        results: json!({
            "copy_count": plan.copy_count,
            "corner_trace": rat_json(&plan.corner.trace_re()),
            "corner_value": rat_json(&plan.corner_value),
            "value": rat_json(&plan.value),
            "slack_bound": rat_json(&plan.slack_bound),
            "max_atom_trace": rat_json(&plan.max_atom_trace),
            "hermitian": plan.hermitian,
            "lifted_family": plan.family.len(),
            "partition_parts": plan.partition.len(),
            "span_dimension": span,
        }),
        checks,
        artifact: None,
    })
}

fn cmd_split_sa(a: &SplitSaArgs, mode: &Mode, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    let inst = load_instance(inputs, &a.input)?;
    let family = inst.family(&a.set)?;
    let partition = inst.partition(&a.partition)?;
    let split = split_sa(&family, partition, mode)?;
    let checks = split.verify(mode);
    Ok(Outcome {
        results: json!({
            "x_value": rat_json(&split.x_value),
            "y_value": rat_json(&split.y_value),
            "z_value": rat_json(&split.z_value),
            "identity": "2·I(Y;Q) + I(Z;Q) = I(X;Q)",
            "family_size": split.source.len(),
        }),
        checks,
        artifact: None,
    })
}

fn cmd_bounds(b: &BoundsCommand, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    match b {
        BoundsCommand::Delta0 { spec } => {
            let text = inputs.read(spec)?;
            let hspec = hyperfinite_spec_from_json(&text)?;
            let value = delta0_hyperfinite(&hspec);
            Ok(Outcome::new(json!({
                "delta0": rat_json(&value),
                "diffuse_weight": format_rational(hspec.diffuse_weight()),
                "atoms": hspec
                    .atoms()
                    .iter()
                    .map(|(k, w)| json!({ "dim": k, "weight": format_rational(w) }))
                    .collect::<Vec<_>>(),
            })))
        }
        BoundsCommand::FreeProduct { gm, gn, kind } => {
            let gm = parse_ext(gm)?;
            let gn = parse_ext(gn)?;
            let kind = if kind == "general" {
                FreeProductKind::General
            } else if kind == "amalgamated" {
                FreeProductKind::AmalgamatedDiffuse
            } else if let Some(path) = kind.strip_prefix("hyperfinite:") {
                let text = inputs.read(&PathBuf::from(path))?;
                FreeProductKind::Hyperfinite(hyperfinite_spec_from_json(&text)?)
            } else {
                return Err(Usage(format!(
                    "--kind {kind} is not \"general\", \"amalgamated\", or \
                     \"hyperfinite:<spec.json>\""
                )));
            };
            let bound = free_product_bound(&gm, &gn, &kind)?;
            Ok(Outcome::new(json!({
                "bound": ext_json(&bound.value),
                "is_upper_bound": bound.is_upper_bound,
                "provenance": bound.provenance.to_string(),
            })))
        }
        BoundsCommand::Fgf { r, lambda } => {
            let r = parse_rational(r)?;
            let lambda = parse_rational(lambda)?;
            let scaled = interpolated_fgf_scaling(&r, &lambda)?;
            Ok(Outcome::new(json!({
                "rank": rat_json(&r),
                "lambda": rat_json(&lambda),
                "scaled_rank": rat_json(&scaled),
            })))
        }
        BoundsCommand::Gens { g } => {
            let g = parse_ext(g)?;
            let window = generator_count_bounds(&g)?;
            Ok(Outcome::new(json!({
                "invariant": ext_json(&g),
                "low": ext_json(&window.low),
                "high": ext_json(&window.high),
                "sa_invariant": ext_json(&window.sa_invariant),
            })))
        }
        BoundsCommand::Entropy { i, self_adjoint } => {
            let i = parse_rational(i)?;
            let bound = entropy_upper_bounds(&i, *self_adjoint)?;
            Ok(Outcome::new(json!({
                "invariant": rat_json(&i),
                "self_adjoint": self_adjoint,
                "entropy_dimension_bound": rat_json(&bound),
            })))
        }
    }
}

fn cmd_dim(a: &DimArgs, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    let text = inputs.read(&a.support)?;
    let supports = supports_from_json(&text)?;
    let tc = TupleCompression::banded(a.k, a.p, supports, a.self_adjoint)?;
    match tc.range_dimension() {
        Ok(dim) => Ok(Outcome {
            results: json!({
                "k": a.k,
                "p": a.p,
                "self_adjoint": a.self_adjoint,
                "operators": tc.operator_count(),
                "support_density": rat_json(&tc.support_density()),
                "range_dimension": dim,
            }),
            checks: vec![check(
                "dimension_formula",
                true,
                format!("closed formula and rank computation agree on {dim}"),
            )],
            artifact: None,
        }),
        Err(CoreError::Internal(detail)) => Ok(Outcome {
            results: json!({ "k": a.k, "p": a.p, "self_adjoint": a.self_adjoint }),
            checks: vec![check("dimension_formula", false, detail)],
            artifact: None,
        }),
        Err(e) => Err(Usage::from(e)),
    }
}

fn cmd_gen_instance(a: &GenInstanceArgs, seed: u64) -> Result<Outcome, Usage> {
    let block_dims: Vec<usize> = a
        .blocks
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|e| Usage(format!("--blocks: {e}"))))
        .collect::<Result<_, _>>()?;
    let shape = InstanceShape {
        block_dims,
        operator_count: a.ops,
        sparsity: parse_rational(&a.sparsity)?,
        self_adjoint: a.self_adjoint,
        partition_parts: a.parts,
        rotate: a.rotate,
    };
    let inst = random_instance(seed, &shape)?;
    let text = inst.to_json();
    Ok(Outcome {
        results: json!({
            "seed": seed,
            "operators": inst.operators().len(),
            "partitions": inst.partitions().len(),
            "blocks": inst
                .algebra()
                .blocks()
                .iter()
                .map(|b| json!({ "dim": b.dim, "weight": format_rational(&b.weight) }))
                .collect::<Vec<_>>(),
        }),
        checks: Vec::new(),
        artifact: Some(text),
    })
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> Result<Outcome, Usage> {
    let mode = parse_mode(&cli.mode)?;
    match &cli.command {
        Command::Invariant(a) => cmd_invariant(a, &mode, inputs),
        Command::Minimize(a) => cmd_minimize(a, &mode, cli.seed, cli.budget, inputs),
        Command::Generate(a) => cmd_generate(a, &mode, inputs),
        Command::Verify(a) => cmd_verify(a, &mode, inputs),
        Command::Compress(a) => cmd_compress(a, &mode, inputs),
        Command::Amplify(a) => cmd_amplify(a, &mode, cli.budget, inputs),
        Command::SplitSa(a) => cmd_split_sa(a, &mode, inputs),
        Command::Bounds(b) => cmd_bounds(b, inputs),
        Command::Dim(a) => cmd_dim(a, inputs),
        Command::GenInstance(a) => cmd_gen_instance(a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };

    let echoed: Vec<String> = std::env::args().skip(1).collect();
    let mut inputs = Inputs::default();
    let outcome = match dispatch(&cli, &mut inputs) {
        Ok(o) => o,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };

    let all_passed = outcome.checks.iter().all(|c| c.passed);
    let digests: Value = Value::Array(
        inputs
            .digests
            .iter()
            .map(|(path, hash)| json!({ "file": path, "sha256": hash }))
            .collect(),
    );
    let report = json!({
        "command": echoed.join(" "),
        "inputs": digests,
        "mode": cli.mode,
        "results": outcome.results,
        "checks": checks_json(&outcome.checks),
        "ok": all_passed,
    });
    let rendered = format!("{:#}\n", report);
    println!("{}", rendered.trim_end());

    if let Some(path) = &cli.out {
        let payload = outcome.artifact.as_deref().unwrap_or(&rendered);
        if let Err(e) = fs::write(path, payload) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }

    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
