//! `dlim` command-line front end.
//!
//! Every command writes one JSON document to standard output. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; every checked inequality holds |
//! | 1 | a certificate inequality or `--verify` check failed |
//! | 2 | parse or validation error (including usage errors) |
//! | 3 | hypothesis violation: the instance does not meet the premises |
//! | 4 | selector and exhaustive oracle disagree |
//! | 5 | internal error |

#![allow(clippy::result_large_err)]

mod inputs;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dlim_core::bergelson::{
    default_b, AveragingIdentity, DensityRatioCertificate, OracleResult, SelectionMismatch,
};
use dlim_core::instance::read_json;
use dlim_core::witness::{verify_backward, verify_forward, CertificateMismatch, DConvVerdict};
use dlim_core::{
    averaging_identity_check, backward_pipeline, d_lim_verdict, default_checkpoints,
    density_ratio_certificate, fip_oracle, forward_functional, generate_instance, select_common_point,
    upper_density, verify_selection, weak_d_convergence_check, BackwardCertificate, DensityError,
    DensityEstimate, ForwardCertificate, GenerateProfile, IndexSet, InstanceError, Rational,
    SelectionError, SelectionResult, SetFamily, WitnessError, WitnessParams,
};

use inputs::Sources;

#[derive(Debug)]
pub enum CliError {
    Instance(InstanceError),
    Density(DensityError),
    Selection(SelectionError),
    Witness(WitnessError),
    Usage(String),
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Instance(e) => write!(f, "{e}"),
            CliError::Density(e) => write!(f, "{e}"),
            CliError::Selection(e) => write!(f, "{e}"),
            CliError::Witness(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Instance(e)
    }
}
impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        CliError::Density(e)
    }
}
impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        CliError::Selection(e)
    }
}
impl From<WitnessError> for CliError {
    fn from(e: WitnessError) -> Self {
        CliError::Witness(e)
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;
pub const EXIT_ORACLE_MISMATCH: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;

fn selection_exit(e: &SelectionError) -> u8 {
    match e {
        SelectionError::EmptyIndexPrefix
        | SelectionError::NoPositivePoint
        | SelectionError::PrefixDensityTooLow { .. } => EXIT_HYPOTHESIS,
        _ => EXIT_INPUT,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Instance(_) | CliError::Density(_) | CliError::Usage(_) => EXIT_INPUT,
            CliError::Selection(e) => selection_exit(e),
            CliError::Witness(e) => match e {
                WitnessError::HypothesisViolation { .. }
                | WitnessError::TailViolation { .. }
                | WitnessError::ZeroFunctional => EXIT_HYPOTHESIS,
                WitnessError::Selection(s) => selection_exit(s),
                WitnessError::InvariantBroken(_) => EXIT_INTERNAL,
                _ => EXIT_INPUT,
            },
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Instance(InstanceError::Io { .. }) => "IoError",
            CliError::Instance(InstanceError::Parse { .. }) => "ParseError",
            CliError::Instance(InstanceError::Validation { .. }) => "ValidationError",
            CliError::Density(DensityError::HorizonExceeded { .. }) => "HorizonExceeded",
            CliError::Density(_) => "DensityError",
            CliError::Selection(SelectionError::EmptyIndexPrefix)
            | CliError::Witness(WitnessError::Selection(SelectionError::EmptyIndexPrefix)) => "EmptyIndexPrefix",
            CliError::Selection(SelectionError::NoPositivePoint)
            | CliError::Witness(WitnessError::Selection(SelectionError::NoPositivePoint)) => "NoPositivePoint",
            CliError::Selection(SelectionError::PrefixDensityTooLow { .. }) => "PrefixDensityTooLow",
            CliError::Selection(SelectionError::TooLargeForOracle { .. }) => "TooLargeForOracle",
            CliError::Selection(_) => "SelectionError",
            CliError::Witness(WitnessError::HypothesisViolation { .. }) => "HypothesisViolation",
            CliError::Witness(WitnessError::TailViolation { .. }) => "TailViolation",
            CliError::Witness(WitnessError::InvariantBroken(_)) => "InternalError",
            CliError::Witness(_) => "WitnessError",
            CliError::Usage(_) => "UsageError",
            CliError::Internal(_) => "InternalError",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut err = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Instance(e) = self {
            if let Some(p) = e.pointer() {
                err["pointer"] = json!(p);
            }
        }
        json!({ "error": err })
    }
}

#[derive(Parser, Debug)]
#[command(name = "dlim", version, about = "Exact density, d-limit, selection and witness certificates")]
pub struct Cli {
    /// Human-readable summary on standard error.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Use a generated instance (default profile) for inputs not given as files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Instance bundle supplying inputs not given as files.
    #[arg(long, global = true)]
    pub instance: Option<PathBuf>,
    /// Re-check a previously emitted report against the inputs instead of
    /// computing a new one.
    #[arg(long, global = true, value_name = "REPORT")]
    pub verify: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prefix-count density estimate of an index set.
    Density(DensityArgs),
    /// Truncated d-limit verdict for a sequence.
    Dlim(DlimArgs),
    /// Common-point selection with its density-ratio certificate.
    Bergelson(BergelsonArgs),
    /// Exhaustive largest intersecting subfamily.
    Oracle(OracleArgs),
    /// Witness pipelines between functionals and point sequences.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Weak d-convergence verdict for each functional.
    Dconv(DconvArgs),
    /// Emit a generated instance bundle.
    Generate(GenerateArgs),
    /// Run a check over a range of generated instances.
    Batch(BatchArgs),
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long = "index-set", alias = "I")]
    pub index_set: Option<PathBuf>,
    /// Comma-separated prefix lengths.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
    /// Horizon for default power-of-two checkpoints.
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Args, Debug)]
pub struct DlimArgs {
    #[arg(long)]
    pub sequence: Option<PathBuf>,
    /// Sequence name inside the bundle.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub limit: Rational,
    #[arg(long)]
    pub r: Rational,
    #[arg(long = "N", alias = "n")]
    pub n: u64,
    /// Largest exception density still read as zero.
    #[arg(long)]
    pub tolerance: Rational,
}

#[derive(Args, Debug)]
pub struct FamilyInputs {
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// JSON object mapping index to member points.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// I_0; defaults to the indices listed in the family file.
    #[arg(long = "index-set", alias = "I0")]
    pub index_set: Option<PathBuf>,
    /// Family name inside the bundle.
    #[arg(long)]
    pub name: Option<String>,
    /// Declared lower bound on every set's measure.
    #[arg(long)]
    pub a: Option<Rational>,
}

#[derive(Args, Debug)]
pub struct BergelsonArgs {
    #[command(flatten)]
    pub inputs: FamilyInputs,
    /// Density threshold for admitted prefixes; defaults to density(I_0) - 1/10.
    #[arg(long)]
    pub b: Option<Rational>,
    /// Prefix length; defaults to the family horizon.
    #[arg(long)]
    pub eta: Option<u64>,
    #[arg(long)]
    pub positive: bool,
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub inputs: FamilyInputs,
    #[arg(long)]
    pub eta: Option<u64>,
    #[arg(long)]
    pub positive: bool,
}

#[derive(Args, Debug)]
pub struct FunctionInputs {
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Bounded family file: {"bound": .., "functions": {n: {point: value}}}.
    #[arg(long = "family-f")]
    pub family_f: Option<PathBuf>,
    #[arg(long = "index-set", alias = "I")]
    pub index_set: Option<PathBuf>,
    /// Prefix length; defaults to the number of functions.
    #[arg(long = "N", alias = "n")]
    pub n: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum WitnessCommand {
    /// Functional ⇒ witness points.
    Backward {
        #[command(flatten)]
        inputs: FunctionInputs,
        #[arg(long)]
        functional: Option<PathBuf>,
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        s: Option<Rational>,
        #[arg(long)]
        delta: Option<Rational>,
    },
    /// Witness points ⇒ evaluation functional.
    Forward {
        #[command(flatten)]
        inputs: FunctionInputs,
        /// JSON list of point names x_1..x_K.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        r: Rational,
    },
}

#[derive(Args, Debug)]
pub struct DconvArgs {
    #[command(flatten)]
    pub inputs: FunctionInputs,
    /// JSON list of functionals.
    #[arg(long)]
    pub functionals: Option<PathBuf>,
    #[arg(long)]
    pub r: Rational,
    #[arg(long)]
    pub tolerance: Rational,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long = "family-size")]
    pub family_size: Option<usize>,
    #[arg(long)]
    pub a: Option<Rational>,
    #[arg(long)]
    pub b: Option<Rational>,
    #[arg(long = "zero-weight-points")]
    pub zero_weight_points: Option<usize>,
    #[arg(long)]
    pub r: Option<Rational>,
    #[arg(long)]
    pub bound: Option<Rational>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchKind {
    /// Selector guarantee, averaging identity and (optionally) oracle agreement.
    Selector,
    /// Backward pipeline followed by the forward functional.
    Roundtrip,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    #[arg(long, value_enum)]
    pub kind: BatchKind,
    #[arg(long, default_value_t = 0)]
    pub from: u64,
    #[arg(long, default_value_t = 100)]
    pub count: u64,
    #[arg(long)]
    pub oracle: bool,
}

/// Report, exit code and summary lines of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: u8,
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(report: impl Serialize, ok: bool, summary: Vec<String>) -> Result<Self, CliError> {
        Ok(Outcome {
            report: serde_json::to_value(report).map_err(|e| CliError::Internal(e.to_string()))?,
            exit_code: if ok { EXIT_OK } else { EXIT_CHECK_FAILED },
            summary,
        })
    }

    fn verified(result: Result<(), String>) -> Self {
        match result {
            Ok(()) => Outcome {
                report: json!({ "verified": true }),
                exit_code: EXIT_OK,
                summary: vec!["certificate re-verified".into()],
            },
            Err(reason) => Outcome {
                report: json!({ "verified": false, "reason": reason }),
                exit_code: EXIT_CHECK_FAILED,
                summary: vec![format!("verification failed: {reason}")],
            },
        }
    }

    pub fn from_error(e: &CliError) -> Self {
        Outcome {
            report: e.to_json(),
            exit_code: e.exit_code(),
            summary: vec![format!("{}: {e}", e.kind())],
        }
    }
}

fn load_report<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    Ok(read_json(path)?)
}

fn compare<T: PartialEq>(recorded: &T, fresh: &T) -> Result<(), String> {
    if recorded == fresh {
        Ok(())
    } else {
        Err("recorded report differs from recomputation".into())
    }
}

/// Runs a parsed invocation.
pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome::from_error(&e),
    }
}

/// Parses `args` (including the program name) and runs them. Usage errors,
/// unknown commands included, map to exit code 2.
pub fn run_args<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            Outcome {
                report: if code == EXIT_OK {
                    json!({ "help": e.to_string() })
                } else {
                    CliError::Usage(e.to_string()).to_json()
                },
                exit_code: code,
                summary: vec![e.to_string()],
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let sources = || Sources::load(cli.instance.as_deref(), cli.seed);
    match &cli.command {
        Command::Density(args) => density_cmd(cli, &sources()?, args),
        Command::Dlim(args) => dlim_cmd(cli, &sources()?, args),
        Command::Bergelson(args) => bergelson_cmd(cli, &sources()?, args),
        Command::Oracle(args) => oracle_cmd(cli, &sources()?, args),
        Command::Witness(w) => witness_cmd(cli, &sources()?, w),
        Command::Dconv(args) => dconv_cmd(cli, &sources()?, args),
        Command::Generate(args) => generate_cmd(cli, args),
        Command::Batch(args) => batch_cmd(args),
    }
}

fn density_cmd(cli: &Cli, src: &Sources, args: &DensityArgs) -> Result<Outcome, CliError> {
    let set = src
        .index_set(args.index_set.as_ref())?
        .ok_or_else(|| CliError::Usage("--index-set is required".into()))?;
    let checkpoints = if !args.checkpoints.is_empty() {
        args.checkpoints.clone()
    } else {
        let horizon = args.horizon.or(set.horizon()).unwrap_or(1 << 12);
        default_checkpoints(horizon)
    };
    let est = upper_density(&set, &checkpoints)?;
    if let Some(path) = &cli.verify {
        let recorded: DensityEstimate = load_report(path)?;
        return Ok(Outcome::verified(compare(&recorded, &est)));
    }
    let mut summary = vec![format!(
        "upper {} / lower {} at horizon {}",
        est.upper_at_horizon, est.lower_at_horizon, est.horizon
    )];
    if let Some(x) = &est.exact {
        summary.push(format!("exact density {x}"));
    }
    let ok = est.lower_at_horizon <= est.upper_at_horizon;
    Outcome::new(est, ok, summary)
}

fn dlim_cmd(cli: &Cli, src: &Sources, args: &DlimArgs) -> Result<Outcome, CliError> {
    let seq = src.sequence(args.sequence.as_ref(), args.name.as_deref())?;
    let v = d_lim_verdict(&seq, &args.limit, &args.r, args.n, &args.tolerance)?;
    if let Some(path) = &cli.verify {
        return Ok(Outcome::verified(compare(&load_report(path)?, &v)));
    }
    let summary = vec![format!(
        "d-lim = {}: {} (exception density {} vs tolerance {})",
        v.limit,
        if v.holds { "holds" } else { "fails" },
        v.density.decisive_value(),
        v.tolerance
    )];
    Outcome::new(v, true, summary)
}

fn family_of(src: &Sources, inputs: &FamilyInputs) -> Result<SetFamily, CliError> {
    src.set_family(
        inputs.space.as_ref(),
        inputs.family.as_ref(),
        inputs.index_set.as_ref(),
        inputs.name.as_deref(),
        inputs.a.as_ref(),
        None,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub oracle: OracleResult,
    pub selector_size: u64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BergelsonReport {
    pub selection: SelectionResult,
    pub averaging_identity: AveragingIdentity,
    pub certificate: DensityRatioCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
    pub holds: bool,
}

fn oracle_check(fam: &SetFamily, eta: u64, positive: bool, sel: &SelectionResult) -> Result<OracleCheck, CliError> {
    let oracle = fip_oracle(fam, eta, positive)?;
    let selector_size = sel.cardinality_bound.selected_size;
    Ok(OracleCheck {
        matches: oracle.max_size == selector_size,
        oracle,
        selector_size,
    })
}

fn bergelson_cmd(cli: &Cli, src: &Sources, args: &BergelsonArgs) -> Result<Outcome, CliError> {
    let fam = family_of(src, &args.inputs)?;
    let eta = args.eta.unwrap_or(fam.horizon());
    let b = match &args.b {
        Some(b) => b.clone(),
        None => default_b(fam.index_set()).ok_or_else(|| {
            CliError::Usage("--b is required when I_0 has no exact density above 1/10".into())
        })?,
    };

    if let Some(path) = &cli.verify {
        let recorded: BergelsonReport = load_report(path)?;
        let check = || -> Result<(), String> {
            verify_selection(&fam, &recorded.selection).map_err(|e: SelectionMismatch| e.to_string())?;
            let cert = density_ratio_certificate(&fam, &recorded.selection, recorded.certificate.eta, &recorded.certificate.b)
                .map_err(|e| e.to_string())?;
            compare(&recorded.certificate, &cert)?;
            if !cert.holds {
                return Err("density-ratio certificate does not hold".into());
            }
            let identity = averaging_identity_check(&fam, recorded.selection.horizon).map_err(|e| e.to_string())?;
            compare(&recorded.averaging_identity, &identity)?;
            if let Some(o) = &recorded.oracle {
                let fresh = oracle_check(&fam, recorded.selection.horizon, recorded.selection.restrict_positive, &recorded.selection)
                    .map_err(|e| e.to_string())?;
                compare(o, &fresh)?;
            }
            Ok(())
        };
        return Ok(Outcome::verified(check()));
    }

    let selection = select_common_point(&fam, eta, args.positive)?;
    let identity = averaging_identity_check(&fam, eta)?;
    let certificate = density_ratio_certificate(&fam, &selection, eta, &b)?;
    let oracle = if args.oracle {
        Some(oracle_check(&fam, eta, args.positive, &selection)?)
    } else {
        None
    };
    let holds = selection.cardinality_bound.verified && identity.holds && certificate.holds;
    let mismatch = oracle.as_ref().is_some_and(|o| !o.matches);
    let mut summary = vec![
        format!(
            "witness {} selects {} of {} sets (required {})",
            selection.witness,
            selection.cardinality_bound.selected_size,
            selection.cardinality_bound.prefix_size,
            selection.cardinality_bound.required
        ),
        format!(
            "|I∧η|/η = {} >= F·|I0∧η|/η = {} > a·b = {}: {}",
            certificate.selected_ratio, certificate.product, certificate.ab, certificate.holds
        ),
    ];
    if let Some(o) = &oracle {
        summary.push(format!("oracle max {} (selector {})", o.oracle.max_size, o.selector_size));
    }
    let mut out = Outcome::new(
        BergelsonReport {
            selection,
            averaging_identity: identity,
            certificate,
            oracle,
            holds,
        },
        holds,
        summary,
    )?;
    if mismatch {
        out.exit_code = EXIT_ORACLE_MISMATCH;
    }
    Ok(out)
}

fn oracle_cmd(cli: &Cli, src: &Sources, args: &OracleArgs) -> Result<Outcome, CliError> {
    let fam = family_of(src, &args.inputs)?;
    let eta = args.eta.unwrap_or(fam.horizon());
    let selection = select_common_point(&fam, eta, args.positive)?;
    let check = oracle_check(&fam, eta, args.positive, &selection)?;
    if let Some(path) = &cli.verify {
        return Ok(Outcome::verified(compare(&load_report::<OracleCheck>(path)?, &check)));
    }
    let summary = vec![format!(
        "oracle max {} over {} subfamilies; selector {}",
        check.oracle.max_size, check.oracle.subsets_examined, check.selector_size
    )];
    let matches = check.matches;
    let mut out = Outcome::new(check, true, summary)?;
    if !matches {
        out.exit_code = EXIT_ORACLE_MISMATCH;
    }
    Ok(out)
}

fn function_setup(
    src: &Sources,
    inputs: &FunctionInputs,
) -> Result<(dlim_core::BoundedFamily, IndexSet, u64), CliError> {
    let fam = src.bounded_family(inputs.space.as_ref(), inputs.family_f.as_ref())?;
    let index_set = src
        .index_set(inputs.index_set.as_ref())?
        .ok_or_else(|| CliError::Usage("--index-set is required".into()))?;
    let n = inputs.n.unwrap_or(fam.horizon());
    Ok((fam, index_set, n))
}

fn witness_cmd(cli: &Cli, src: &Sources, cmd: &WitnessCommand) -> Result<Outcome, CliError> {
    match cmd {
        WitnessCommand::Backward {
            inputs,
            functional,
            r,
            s,
            delta,
        } => {
            let (fam, index_set, n) = function_setup(src, inputs)?;
            let t = src.functional(fam.space(), functional.as_ref())?;
            if let Some(path) = &cli.verify {
                let recorded: BackwardCertificate = load_report(path)?;
                let result = verify_backward(&fam, &t, &index_set, &recorded).map_err(|e: CertificateMismatch| e.to_string());
                return Ok(Outcome::verified(result));
            }
            let params = WitnessParams {
                s: s.clone(),
                delta: delta.clone(),
            };
            let cert = backward_pipeline(&fam, &t, &index_set, n, r, &params)?;
            let summary = vec![
                format!("s = {}, δ = {}, (r-s)/M = {}", cert.s, cert.delta, cert.measure_bound),
                format!(
                    "J has {} of {} indices; witness {}; tail minima >= δ: {}",
                    cert.density.selected_ratio.times(n),
                    cert.density.base_ratio.times(n),
                    cert.selection.witness,
                    cert.tail_above_delta
                ),
            ];
            let ok = cert.holds;
            Outcome::new(cert, ok, summary)
        }
        WitnessCommand::Forward { inputs, points, r } => {
            let (fam, index_set, n) = function_setup(src, inputs)?;
            let pts: Vec<String> = read_json(points)?;
            if let Some(path) = &cli.verify {
                let recorded: ForwardCertificate = load_report(path)?;
                let result = verify_forward(&fam, &index_set, &recorded).map_err(|e| e.to_string());
                return Ok(Outcome::verified(result));
            }
            let cert = forward_functional(&fam, &pts, &index_set, n, r)?;
            let summary = vec![format!(
                "evaluation at {} exceeds r = {} on {} indices",
                cert.witness,
                cert.r,
                cert.checked.len()
            )];
            let ok = cert.holds;
            Outcome::new(cert, ok, summary)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DconvReport {
    pub verdicts: Vec<DConvVerdict>,
    pub holds_all: bool,
}

fn dconv_cmd(cli: &Cli, src: &Sources, args: &DconvArgs) -> Result<Outcome, CliError> {
    let fam = src.bounded_family(args.inputs.space.as_ref(), args.inputs.family_f.as_ref())?;
    let ts = src.functionals(fam.space(), args.functionals.as_ref())?;
    let n = args.inputs.n.unwrap_or(fam.horizon());
    let verdicts = weak_d_convergence_check(&fam, &ts, &args.r, n, &args.tolerance)?;
    let report = DconvReport {
        holds_all: verdicts.iter().all(|v| v.verdict.holds),
        verdicts,
    };
    if let Some(path) = &cli.verify {
        return Ok(Outcome::verified(compare(&load_report(path)?, &report)));
    }
    let summary = report
        .verdicts
        .iter()
        .map(|v| {
            format!(
                "functional #{}: {} (exception density {})",
                v.functional,
                if v.verdict.holds { "d-converges to 0" } else { "fails" },
                v.verdict.density.decisive_value()
            )
        })
        .collect();
    Outcome::new(report, true, summary)
}

fn generate_cmd(cli: &Cli, args: &GenerateArgs) -> Result<Outcome, CliError> {
    let d = GenerateProfile::default();
    let profile = GenerateProfile {
        points: args.points.unwrap_or(d.points),
        family_size: args.family_size.unwrap_or(d.family_size),
        a: args.a.clone().unwrap_or(d.a),
        b: args.b.clone().unwrap_or(d.b),
        zero_weight_points: args.zero_weight_points.unwrap_or(d.zero_weight_points),
        r: args.r.clone().unwrap_or(d.r),
        bound: args.bound.clone().unwrap_or(d.bound),
    };
    let seed = cli.seed.unwrap_or(1);
    let bundle = generate_instance(seed, &profile).map_err(|e| {
        CliError::Instance(InstanceError::Validation {
            pointer: "/profile".into(),
            message: e.to_string(),
        })
    })?;
    let summary = vec![format!("generated instance for seed {seed}")];
    Ok(Outcome {
        report: bundle.to_json_value(),
        exit_code: EXIT_OK,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
struct BatchEntry {
    seed: u64,
    ok: bool,
    exit_code: u8,
    detail: String,
}

fn batch_selector(seed: u64, oracle: bool) -> BatchEntry {
    let run = || -> Result<(bool, u8, String), CliError> {
        let bundle = generate_instance(seed, &GenerateProfile::default())
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let fam = &bundle.families["F"].family;
        let n = fam.horizon();
        let sel = select_common_point(fam, n, false)?;
        let id = averaging_identity_check(fam, n)?;
        let mut ok = sel.cardinality_bound.verified && id.holds;
        let mut code = if ok { EXIT_OK } else { EXIT_CHECK_FAILED };
        let mut detail = format!("{}/{} selected", sel.cardinality_bound.selected_size, sel.cardinality_bound.prefix_size);
        if oracle {
            let o = fip_oracle(fam, n, false)?;
            detail.push_str(&format!(", oracle {}", o.max_size));
            if o.max_size != sel.cardinality_bound.selected_size {
                ok = false;
                code = EXIT_ORACLE_MISMATCH;
            }
        }
        Ok((ok, code, detail))
    };
    match run() {
        Ok((ok, exit_code, detail)) => BatchEntry { seed, ok, exit_code, detail },
        Err(e) => BatchEntry {
            seed,
            ok: false,
            exit_code: e.exit_code(),
            detail: e.to_string(),
        },
    }
}

fn batch_roundtrip(seed: u64) -> BatchEntry {
    let run = || -> Result<(bool, String), CliError> {
        let bundle = generate_instance(seed, &GenerateProfile::default())
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let profile = bundle.profile.clone().expect("generated bundle records its profile");
        let fam = &bundle.bounded_families["f"].family;
        let t = &bundle.functionals["T"].functional;
        let i = &bundle.index_sets["I0"];
        let n = fam.horizon();
        let back = backward_pipeline(fam, t, i, n, &profile.r, &WitnessParams::default())?;
        let r2 = &back.delta / Rational::from_integer(2);
        let fwd = forward_functional(fam, &back.points, &back.j, n, &r2)?;
        Ok((back.holds && fwd.holds, format!("|J| = {}, δ = {}", back.points.len(), back.delta)))
    };
    match run() {
        Ok((ok, detail)) => BatchEntry {
            seed,
            ok,
            exit_code: if ok { EXIT_OK } else { EXIT_CHECK_FAILED },
            detail,
        },
        Err(e) => BatchEntry {
            seed,
            ok: false,
            exit_code: e.exit_code(),
            detail: e.to_string(),
        },
    }
}

fn batch_cmd(args: &BatchArgs) -> Result<Outcome, CliError> {
    let seeds: Vec<u64> = (args.from..args.from.saturating_add(args.count)).collect();
    // par_iter + collect keeps seed order regardless of completion order.
    let entries: Vec<BatchEntry> = seeds
        .par_iter()
        .map(|&s| match args.kind {
            BatchKind::Selector => batch_selector(s, args.oracle),
            BatchKind::Roundtrip => batch_roundtrip(s),
        })
        .collect();
    let failures = entries.iter().filter(|e| !e.ok).count();
    let exit_code = entries.iter().map(|e| e.exit_code).max().unwrap_or(EXIT_OK);
    let summary = vec![format!("{} instances, {} failures", entries.len(), failures)];
    Ok(Outcome {
        report: json!({ "instances": entries, "failures": failures }),
        exit_code,
        summary,
    })
}
