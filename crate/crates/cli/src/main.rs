//! Command-line front end: reads four-cell documents, runs the library
//! operations, and prints JSON reports.
//!
//! Exit codes: 0 success, 1 input/validation error, 2 undefined-quantity
//! error, 3 verification failure. Reports go to stdout, diagnostics to
//! stderr.

use std::io::Read;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use biasbound::{
    adjust_interval, bound_report, classify_numeric, decomposition, find_nonnecessity_witness,
    selected_joint, simulate_study, verify_result, Constraint, InteractionScale, IntervalEstimate,
    ResultId, SamplerConfig, SamplerMode, SelectionModel, Variable,
};

use biasbound_cli::error::CliError;
use biasbound_cli::input::{Format, InputDocument};
use biasbound_cli::report::{
    print_report, AdjustBody, AssociationMeasures, ClassifyBody, InteractionMeasures, MeasuresBody,
    RecodeBody, SimulateBody, StratumVerdict, VerifyBody, WitnessBody,
};

#[derive(Parser)]
#[command(
    name = "biasbound",
    version,
    about = "Selection-bias direction analysis and sensitivity adjustment for 2x2 exposure-outcome data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Association and interaction measures, with the selected-versus-true
    /// odds ratio decomposition when a target is present
    Measures(MeasuresArgs),
    /// Bound direction for the true odds ratio, from stated assumptions or
    /// numerically from a selection model
    Classify(ClassifyArgs),
    /// Divide an observed odds ratio and its limits by a multiplier value or
    /// range
    Adjust(AdjustArgs),
    /// Verify a bound rule by sampling, or search for a non-necessity
    /// witness
    Verify(VerifyArgs),
    /// Simulate a finite study drawn from a target and selection model
    Simulate(SimulateArgs),
    /// Relabel a variable 1 <-> 0 throughout a document
    Recode(RecodeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input document path; '-' reads stdin
    #[arg(short, long, default_value = "-")]
    input: String,
    /// Input wire format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl InputArgs {
    fn load(&self) -> Result<InputDocument, CliError> {
        let bytes = if self.input == "-" {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf)?;
            buf
        } else {
            std::fs::read(&self.input)?
        };
        InputDocument::parse(&bytes, self.format)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Rr,
    Or,
    Rd,
}

impl From<ScaleArg> for InteractionScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Rr => InteractionScale::RiskRatio,
            ScaleArg::Or => InteractionScale::OddsRatio,
            ScaleArg::Rd => InteractionScale::RiskDifference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    #[value(alias = "E")]
    E,
    #[value(alias = "D")]
    D,
}

impl From<WhichArg> for Variable {
    fn from(w: WhichArg) -> Self {
        match w {
            WhichArg::E => Variable::Exposure,
            WhichArg::D => Variable::Outcome,
        }
    }
}

#[derive(Args)]
struct MeasuresArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Scale whose interaction measure must be defined; without it,
    /// undefined measures are reported as null
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Interaction scale, required when deriving assumptions from a
    /// selection block
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// Numerical tolerance for sign extraction
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Observed odds ratio; adds a bound statement to the report
    #[arg(long)]
    point: Option<f64>,
    /// Lower confidence limit for --point
    #[arg(long, requires = "point")]
    lo: Option<f64>,
    /// Upper confidence limit for --point
    #[arg(long, requires = "point")]
    hi: Option<f64>,
    /// Confidence level for --lo/--hi
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

#[derive(Clone, Copy, Debug)]
struct RangePair {
    lo: f64,
    hi: f64,
}

fn parse_range_pair(s: &str) -> Result<RangePair, String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'LO,HI', got '{s}'"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{v}' is not a number"))
    };
    Ok(RangePair {
        lo: parse(lo)?,
        hi: parse(hi)?,
    })
}

#[derive(Args)]
struct AdjustArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Observed odds ratio; when absent, a counts block is required and the
    /// estimate comes from the Woolf interval
    #[arg(long)]
    point: Option<f64>,
    /// Lower confidence limit for --point
    #[arg(long, requires = "point")]
    lo: Option<f64>,
    /// Upper confidence limit for --point
    #[arg(long, requires = "point")]
    hi: Option<f64>,
    /// Confidence level
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Add 0.5 to every count cell before the Woolf interval
    #[arg(long)]
    continuity: bool,
    /// Single multiplier value to divide by
    #[arg(
        long,
        conflicts_with = "inter_rr_range",
        required_unless_present = "inter_rr_range"
    )]
    inter_rr: Option<f64>,
    /// Multiplier range 'LO,HI' to sweep
    #[arg(long, value_parser = parse_range_pair)]
    inter_rr_range: Option<RangePair>,
}

fn parse_result_id(s: &str) -> Result<ResultId, String> {
    ResultId::from_str(s).map_err(|e| e.to_string())
}

fn parse_constraint(s: &str) -> Result<Constraint, String> {
    Constraint::from_str(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct VerifyArgs {
    /// Rule to verify (R1, R2a, R2b, R3a, R3b, R4a-RR, R4a-OR, R4a-RD,
    /// R4b-RR, R4b-OR, R4b-RD)
    #[arg(long, value_parser = parse_result_id)]
    result: ResultId,
    /// Number of models to sample
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Enumerate a grid at this per-axis resolution instead of sampling
    #[arg(long, conflicts_with = "n")]
    grid: Option<u64>,
    /// RNG seed
    #[arg(long, env = "BIASBOUND_SEED", default_value_t = 0)]
    seed: u64,
    /// Hypothesis set the sampler enforces; defaults to the rule's own
    #[arg(long, value_parser = parse_constraint)]
    constraint: Option<Constraint>,
    /// Search for a model violating the hypotheses yet satisfying the
    /// conclusion, instead of verifying
    #[arg(long)]
    witness: bool,
    /// Worker threads (reports do not depend on this)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Individuals to draw
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// RNG seed
    #[arg(long, env = "BIASBOUND_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RecodeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Variable to relabel
    #[arg(long, value_enum)]
    which: WhichArg,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Measures(args) => run_measures(args),
        Command::Classify(args) => run_classify(args),
        Command::Adjust(args) => run_adjust(args),
        Command::Verify(args) => run_verify(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Recode(args) => run_recode(args),
    }
}

fn run_measures(args: MeasuresArgs) -> Result<i32, CliError> {
    let doc = args.input.load()?;
    let sel = doc.require_selection()?;
    if let Some(scale) = args.scale {
        // The requested scale's measure must exist; boundary and zero cells
        // surface as undefined-quantity errors.
        match scale.into() {
            InteractionScale::RiskRatio => {
                sel.inter_rr()?;
            }
            InteractionScale::OddsRatio => {
                sel.inter_or()?;
            }
            InteractionScale::RiskDifference => {}
        }
    }
    let mut body = MeasuresBody {
        target: None,
        selected: None,
        interaction: InteractionMeasures {
            inter_rr: sel.inter_rr().ok(),
            inter_or: sel.inter_or().ok(),
            inter_rd: sel.inter_rd(),
        },
        decomposition: None,
    };
    if let Some(t) = doc.target()? {
        body.target = Some(AssociationMeasures::of(&t));
        if let Ok(q) = selected_joint(&t, &sel) {
            body.selected = Some(AssociationMeasures::of(&q));
        }
        body.decomposition = decomposition(&t, &sel).ok();
    }
    print_report("measures", &body);
    Ok(0)
}

fn run_classify(args: ClassifyArgs) -> Result<i32, CliError> {
    let doc = args.input.load()?;
    let est = match (args.point, args.lo, args.hi) {
        (None, _, _) => None,
        (Some(p), None, None) => Some(IntervalEstimate::degenerate(p, args.level)?),
        (Some(p), Some(lo), Some(hi)) => Some(IntervalEstimate::new(p, lo, hi, args.level)?),
        _ => {
            return Err(CliError::Usage {
                message: "--lo and --hi must be given together".to_string(),
            })
        }
    };

    if let Some(strata) = &doc.strata {
        let mut out = Vec::new();
        for s in strata {
            let (derived, verdict) = if let Some(a) = s.assumptions {
                (false, biasbound::classify(&a))
            } else if let Some(cells) = s.selection {
                let sel = SelectionModel::new(cells).expect("validated at parse");
                let scale = require_scale(args.scale)?;
                let target = s
                    .target
                    .map(|c| biasbound::TargetJoint::new(c).expect("validated at parse"));
                (
                    true,
                    classify_numeric(target.as_ref(), &sel, scale, args.tol)?,
                )
            } else {
                return Err(CliError::Usage {
                    message: format!(
                        "stratum '{}' needs an assumptions or selection block",
                        s.label
                    ),
                });
            };
            out.push(StratumVerdict {
                label: s.label.clone(),
                derived,
                verdict,
            });
        }
        print_report(
            "classify",
            &ClassifyBody {
                derived: None,
                verdict: None,
                strata: Some(out),
                bound: None,
            },
        );
        return Ok(0);
    }

    let (derived, verdict) = if let Some(a) = doc.assumptions {
        (false, biasbound::classify(&a))
    } else {
        let sel = doc.require_selection()?;
        let scale = require_scale(args.scale)?;
        let target = doc.target()?;
        (
            true,
            classify_numeric(target.as_ref(), &sel, scale, args.tol)?,
        )
    };
    let bound = est.map(|e| bound_report(&e, &verdict));
    print_report(
        "classify",
        &ClassifyBody {
            derived: Some(derived),
            verdict: Some(verdict),
            strata: None,
            bound,
        },
    );
    Ok(0)
}

fn require_scale(scale: Option<ScaleArg>) -> Result<InteractionScale, CliError> {
    scale.map(Into::into).ok_or_else(|| CliError::Usage {
        message: "--scale is required when deriving assumptions from a selection block".to_string(),
    })
}

fn run_adjust(args: AdjustArgs) -> Result<i32, CliError> {
    let est = if let Some(p) = args.point {
        match (args.lo, args.hi) {
            (None, None) => IntervalEstimate::degenerate(p, args.level)?,
            (Some(lo), Some(hi)) => IntervalEstimate::new(p, lo, hi, args.level)?,
            _ => {
                return Err(CliError::Usage {
                    message: "--lo and --hi must be given together".to_string(),
                })
            }
        }
    } else {
        let doc = args.input.load()?;
        let counts = doc.require_counts()?;
        biasbound::woolf_ci(&counts, args.level, args.continuity)?
    };
    let (lo, hi) = match (args.inter_rr, args.inter_rr_range) {
        (Some(v), None) => (v, v),
        (None, Some(r)) => (r.lo, r.hi),
        _ => unreachable!("clap enforces exactly one"),
    };
    let adjusted = adjust_interval(&est, (lo, hi))?;
    print_report(
        "adjust",
        &AdjustBody {
            estimate: est,
            inter_rr_lo: lo,
            inter_rr_hi: hi,
            adjusted,
        },
    );
    Ok(0)
}

fn run_verify(args: VerifyArgs) -> Result<i32, CliError> {
    let constraint = args.constraint.unwrap_or(Constraint::Result(args.result));
    let cfg = match args.grid {
        Some(resolution) => SamplerConfig {
            mode: SamplerMode::Grid,
            count: resolution,
            seed: args.seed,
            constraint,
        },
        None => SamplerConfig::random(args.n, args.seed, constraint),
    };
    let body = |cfg: &SamplerConfig| -> Result<i32, CliError> {
        if args.witness {
            let witness = find_nonnecessity_witness(args.result, cfg)?;
            print_report(
                "verify",
                &WitnessBody {
                    result_id: args.result,
                    mode: cfg.mode,
                    requested: cfg.count,
                    seed: cfg.seed,
                    witness,
                },
            );
            Ok(0)
        } else {
            let report = verify_result(args.result, cfg)?;
            let passed = report.passed();
            print_report(
                "verify",
                &VerifyBody {
                    mode: cfg.mode,
                    requested: cfg.count,
                    constraint: constraint.to_string(),
                    report,
                },
            );
            Ok(if passed { 0 } else { 3 })
        }
    };
    match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage {
                message: format!("cannot build thread pool: {e}"),
            })?
            .install(|| body(&cfg)),
        None => body(&cfg),
    }
}

fn run_simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let doc = args.input.load()?;
    let target = doc.require_target()?;
    let sel = doc.require_selection()?;
    let sample = simulate_study(&target, &sel, args.n, args.seed)?;
    let expected = biasbound::selected_or(&target, &sel).ok();
    print_report("simulate", &SimulateBody::from_sample(&sample, expected));
    Ok(0)
}

fn run_recode(args: RecodeArgs) -> Result<i32, CliError> {
    let doc = args.input.load()?;
    let which: Variable = args.which.into();
    let document = doc.recode(which)?;
    print_report("recode", &RecodeBody { which, document });
    Ok(0)
}
