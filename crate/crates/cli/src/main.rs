//! `onesided`: command-line front end for the one-sided operator toolkit.
//!
//! Exit codes: 0 when everything passes, 1 when an assertion fails, 2 on
//! configuration, hypothesis or I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use onesided::commutators::{commutator_s, commutator_t};
use onesided::dsl::{parse_function_dsl, parse_weight_dsl};
use onesided::grid::{Grid, HGrid};
use onesided::operators::{
    default_kernel, validate_kernel, DyadicRange, Extension, KernelPolicy, KernelSpec, Maximal, Side,
    SingularIntegral, SquareFunction, SupportSide, ValidationGrids, ValidationOptions,
};
use onesided::spaces::{
    bmo_norm, lip_norm, triebel_functional, triebel_norm, weighted_lip_norm, weighted_lp_norm, IntervalFamily,
    LipForm, NormParams, NormSide,
};
use onesided::verify::{run_suite, ExperimentConfig, ReportFormat, VerificationReport};
use onesided::weights::{class_constant, membership_study, ClassTag, Family, PointGrid, TripleFamily, Weight};
use onesided::Error;

#[derive(Parser, Debug)]
#[command(name = "onesided", version, about = "One-sided maximal, singular and square-function toolkit")]
struct Cli {
    /// Experiment configuration: a TOML file or a preset name (`demo`).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Seed of the random test functions.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid nodes (replaces the configured grid sizes for `verify`).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Domain `LO,HI` of the single-shot commands.
    #[arg(long, global = true, allow_hyphen_values = true, default_value = "-8,8")]
    domain: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Class {
    Ap,
    ApPlus,
    ApMinus,
    A1,
    A1Plus,
    A1Minus,
}

impl From<Class> for ClassTag {
    fn from(c: Class) -> Self {
        match c {
            Class::Ap => ClassTag::Ap,
            Class::ApPlus => ClassTag::ApPlus,
            Class::ApMinus => ClassTag::ApMinus,
            Class::A1 => ClassTag::A1,
            Class::A1Plus => ClassTag::A1Plus,
            Class::A1Minus => ClassTag::A1Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormKind {
    Bmo,
    Lip,
    WeightedLip,
    Lp,
    TriebelFunctional,
    Triebel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Op {
    MaximalPlus,
    MaximalMinus,
    Singular,
    Square,
    CommutatorT,
    CommutatorS,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the class constant of a weight.
    CheckWeight {
        /// Weight in the function DSL, e.g. `power(-0.375)`.
        #[arg(long)]
        weight: String,
        #[arg(long, value_enum)]
        class: Class,
        /// Exponent; ignored (taken as 1) for A_1 classes.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Subgrid nodes of the triple family.
        #[arg(long, default_value_t = 48)]
        subgrid: usize,
        /// Run a nested refinement ladder of this many steps instead.
        #[arg(long)]
        ladder: Option<usize>,
    },
    /// Estimate (B1, B2, B3) of a kernel and report violated conditions.
    ValidateKernel {
        /// Levels J of the default kernel.
        #[arg(long, default_value_t = 6)]
        levels: u32,
        /// CSV file of `x,K(x)` knots with x < 0, replacing the default kernel.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Sampling density level of the validator.
        #[arg(long, default_value_t = 0)]
        level: u32,
    },
    /// Evaluate a norm or functional of a DSL function.
    Norm {
        #[arg(long)]
        function: String,
        #[arg(long, value_enum)]
        kind: NormKind,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Weight in the function DSL (μ for weighted-lip, w otherwise).
        #[arg(long)]
        weight: Option<String>,
        /// Point of the Triebel-Lizorkin functional.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
    },
    /// Evaluate an operator at points.
    OperatorEval {
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long)]
        function: String,
        /// Symbol b of the commutators.
        #[arg(long)]
        symbol: Option<String>,
        /// Evaluation points (repeatable).
        #[arg(long, required = true, allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long, allow_hyphen_values = true)]
        n_min: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        n_max: Option<i32>,
    },
    /// Run the configured verification suites.
    Verify {
        /// Record the wall time in the report (breaks byte-identical output).
        #[arg(long)]
        timings: bool,
    },
    /// Convert a JSON report to another format.
    ReportConvert {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    /// Exit code 1.
    Assertion(String),
    /// Exit code 2.
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(format!("i/o error: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn parse_domain(s: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Failure::Error(format!("invalid domain '{s}', expected LO,HI"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn write_output(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(cli: &Cli, v: &Value) -> Outcome {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Error(e.to_string()))?;
    s.push('\n');
    write_output(cli.out.as_deref(), &s)
}

fn load_config(spec: &str) -> Result<ExperimentConfig, Failure> {
    if let Some(c) = ExperimentConfig::preset(spec) {
        return Ok(c);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::Error(format!("cannot read config '{spec}': {e}")))?;
    Ok(ExperimentConfig::from_toml(&text)?)
}

fn load_kernel_table(path: &Path) -> Result<KernelSpec, Failure> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_path(path)
        .map_err(|e| Failure::Error(format!("cannot read kernel table: {e}")))?;
    let mut knots = Vec::new();
    for rec in rdr.deserialize::<(f64, f64)>() {
        knots.push(rec.map_err(|e| Failure::Error(format!("kernel table: {e}")))?);
    }
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table").to_string();
    Ok(KernelSpec::from_table(name, SupportSide::NegativeAxis, knots)?)
}

fn single_grid(cli: &Cli) -> Result<Grid, Failure> {
    let (lo, hi) = parse_domain(&cli.domain)?;
    Ok(Grid::new(lo, hi, cli.grid.unwrap_or(2001))?)
}

fn check_weight(cli: &Cli, weight: &str, class: Class, p: f64, subgrid: usize, ladder: Option<usize>) -> Outcome {
    let grid = single_grid(cli)?;
    let tag = ClassTag::from(class);
    let p = if tag.is_a1() { 1.0 } else { p };
    let make = |g: Grid| parse_weight_dsl(weight, &g, cli.seed.unwrap_or(0));
    if let Some(steps) = ladder {
        let study = membership_study(make, grid, subgrid, p, tag, steps, 0.05)?;
        return emit_json(cli, &json!({ "weight": weight, "study": study }));
    }
    let w = make(grid)?;
    let family = if tag.is_a1() {
        Family::Points(PointGrid::default_for(&grid))
    } else {
        Family::Triples(TripleFamily::from_subgrid(&grid, subgrid)?)
    };
    let est = class_constant(&w, p, tag, &family)?;
    emit_json(cli, &json!({ "weight": weight, "grid_n": grid.len(), "estimate": est }))
}

fn validate(cli: &Cli, levels: u32, table: Option<&Path>, level: u32) -> Outcome {
    let k = match table {
        Some(p) => load_kernel_table(p)?,
        None => default_kernel(levels),
    };
    let fine = validate_kernel(&k, &ValidationGrids::standard(level), ValidationOptions::default())?;
    let coarse = if level > 0 {
        Some(validate_kernel(&k, &ValidationGrids::standard(level - 1), ValidationOptions::default())?)
    } else {
        None
    };
    let drift = coarse.as_ref().map(|c| c.drift(&fine));
    let valid = fine.is_valid();
    emit_json(cli, &json!({ "kernel": k.name(), "valid": valid, "report": fine, "drift_from_coarser": drift }))?;
    if valid {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("kernel '{}' violates its conditions", k.name())))
    }
}

#[allow(clippy::too_many_arguments)]
fn norm(cli: &Cli, function: &str, kind: NormKind, alpha: f64, p: f64, weight: Option<&str>, x: Option<f64>) -> Outcome {
    let grid = single_grid(cli)?;
    let seed = cli.seed.unwrap_or(0);
    let f = parse_function_dsl(function, &grid, seed)?;
    let w = match weight {
        Some(s) => Some(parse_weight_dsl(s, &grid, seed)?),
        None => None,
    };
    let family = IntervalFamily::default_for(&grid);
    let hs = HGrid::default_for(&grid);
    let value = match kind {
        NormKind::Bmo => json!(bmo_norm(&f, &family)?),
        NormKind::Lip => json!(lip_norm(&f, alpha, LipForm::Quotient, &family, &hs)?),
        NormKind::WeightedLip => {
            let mu = match w {
                Some(w) => w,
                None => Weight::constant(grid, 1.0)?,
            };
            json!(weighted_lip_norm(&f, alpha, &mu, p, &family)?)
        }
        NormKind::Lp => json!(weighted_lp_norm(&f, p, w.as_ref())?),
        NormKind::TriebelFunctional => {
            let x = x.ok_or_else(|| Failure::Error("--x is required for the functional".into()))?;
            let hs = hs.clipped(grid.hi() - x).ok_or_else(|| Failure::Error(format!("no scale fits at x = {x}")))?;
            json!(triebel_functional(&f, x, alpha, Side::Plus, &hs)?)
        }
        NormKind::Triebel => {
            let params = NormParams::new(p, alpha, w, NormSide::Plus)?;
            let xs: Vec<f64> = grid.nodes().collect();
            json!(triebel_norm(&f, &params, &xs, &hs)?)
        }
    };
    emit_json(cli, &json!({ "function": function, "kind": format!("{kind:?}"), "grid_n": grid.len(), "value": value }))
}

#[allow(clippy::too_many_arguments)]
fn operator_eval(
    cli: &Cli,
    op: Op,
    function: &str,
    symbol: Option<&str>,
    xs: &[f64],
    levels: u32,
    n_min: Option<i32>,
    n_max: Option<i32>,
) -> Outcome {
    let grid = single_grid(cli)?;
    let seed = cli.seed.unwrap_or(0);
    let f = parse_function_dsl(function, &grid, seed)?;
    let b = match symbol {
        Some(s) => Some(parse_function_dsl(s, &grid, seed)?),
        None => None,
    };
    let need_b = || b.as_ref().ok_or_else(|| Failure::Error("--symbol is required for commutators".into()));
    let range = match (n_min, n_max) {
        (Some(a), Some(c)) => DyadicRange::new(a, c)?,
        (None, None) => DyadicRange::default_for(&grid)?,
        _ => return Err(Failure::Error("give both --n-min and --n-max or neither".into())),
    };
    let sq = SquareFunction::new(range, Extension::ClosedForm);
    let singular = match op {
        Op::Singular | Op::CommutatorT => {
            let k = default_kernel(levels);
            let rep = validate_kernel(&k, &ValidationGrids::standard(0), ValidationOptions::default())?;
            Some(SingularIntegral::new(&k.with_constants(rep.constants), grid, KernelPolicy::Warn)?)
        }
        _ => None,
    };
    let hs = HGrid::default_for(&grid);
    let mut values = Vec::with_capacity(xs.len());
    for &x in xs {
        let v = match op {
            Op::MaximalPlus | Op::MaximalMinus => {
                let side = if op == Op::MaximalPlus { Side::Plus } else { Side::Minus };
                Maximal::new(&f)
                    .eval_clipped(x, side, &hs)?
                    .ok_or_else(|| Failure::Error(format!("no scale fits at x = {x}")))?
            }
            Op::Singular => singular.as_ref().expect("built above").at(&f, x)?,
            Op::Square => sq.eval(&f, x)?,
            Op::CommutatorT => commutator_t(need_b()?, singular.as_ref().expect("built above"), &f, x)?,
            Op::CommutatorS => commutator_s(need_b()?, &f, x, &sq)?,
        };
        values.push(json!({ "x": x, "value": v }));
    }
    emit_json(cli, &json!({ "op": format!("{op:?}"), "function": function, "grid_n": grid.len(), "values": values }))
}

fn verify(cli: &Cli, timings: bool) -> Outcome {
    let spec = cli.config.as_deref().ok_or_else(|| Failure::Error("verify needs --config <path|demo>".into()))?;
    let mut cfg = load_config(spec)?;
    if let Some(s) = cli.seed {
        cfg.family.seed = s;
    }
    if let Some(n) = cli.grid {
        cfg.grid_sizes = vec![n];
    }
    let start = Instant::now();
    let mut report = run_suite(&cfg)?;
    if timings {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    for s in &report.suites {
        eprintln!("{} {}", if s.pass { "PASS" } else { "FAIL" }, s.suite.name());
        for a in s.assertions.iter().filter(|a| !a.pass) {
            eprintln!("  failed: {}: {}", a.name, a.detail);
        }
    }
    let format = cli.format.unwrap_or(Format::Json).into();
    write_output(cli.out.as_deref(), &report.render(format)?)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Assertion("some assertions failed".into()))
    }
}

fn convert(cli: &Cli, input: &Path) -> Outcome {
    let text = std::fs::read_to_string(input)?;
    let report = VerificationReport::from_json(&text)?;
    let format = cli.format.unwrap_or(Format::Csv).into();
    write_output(cli.out.as_deref(), &report.render(format)?)
}

fn run(cli: &Cli) -> Outcome {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Error(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::CheckWeight { weight, class, p, subgrid, ladder } => {
            check_weight(cli, weight, *class, *p, *subgrid, *ladder)
        }
        Command::ValidateKernel { levels, table, level } => validate(cli, *levels, table.as_deref(), *level),
        Command::Norm { function, kind, alpha, p, weight, x } => {
            norm(cli, function, *kind, *alpha, *p, weight.as_deref(), *x)
        }
        Command::OperatorEval { op, function, symbol, x, levels, n_min, n_max } => {
            operator_eval(cli, *op, function, symbol.as_deref(), x, *levels, *n_min, *n_max)
        }
        Command::Verify { timings } => verify(cli, *timings),
        Command::ReportConvert { input } => convert(cli, input),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(m)) => {
            eprintln!("fail: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Error(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
