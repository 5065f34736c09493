//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 unphysical input,
//! 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::gaussian::{validate_bona_fide, LocalInvariants};
use crate::io::{parse_state_file, read_input, write_output, StateFile};
use crate::optimizer::{minimize_reid, DEFAULT_RESTARTS};
use crate::report::sig12;
use crate::sampler::{
    empirical_min_variance, empirical_products_from_batches, sample_pair, BasisEstimates,
    EmpiricalProducts, SampleBatch, DEFAULT_BINS, DEFAULT_SAMPLES,
};
use crate::states::StateSpec;
use crate::steering::{full_report, reid_optimal_transform, reid_product, SteeringReport};
use crate::sweep;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_R_MIN: f64 = 0.01;
pub const DEFAULT_R_MAX: f64 = 3.0;
pub const DEFAULT_R_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Success = 0,
    Input = 1,
    Unphysical = 2,
    Numerical = 3,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Schema(_) | Error::InvalidArgument(_) | Error::InsufficientSamples { .. } => {
            ExitCode::Input
        }
        Error::NotSymmetric { .. }
        | Error::NonFinite
        | Error::UnphysicalState { .. }
        | Error::NotPositiveDefinite
        | Error::InvalidMixture(_)
        | Error::UnphysicalMixture(_)
        | Error::InvalidStandardForm { .. }
        | Error::NotSymplectic { .. }
        | Error::SingularParams { .. } => ExitCode::Unphysical,
        Error::NoConvergence { .. }
        | Error::SingularBlock { .. }
        | Error::SingularMarginal { .. }
        | Error::DegenerateVariance => ExitCode::Numerical,
    }
}

#[derive(Debug)]
enum Failure {
    Io(PathBuf, std::io::Error),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> ExitCode {
        match self {
            Self::Io(..) => ExitCode::Input,
            Self::Lib(e) => exit_code(e),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Self::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Alice steers Bob.
    #[default]
    AToB,
    /// Bob steers Alice; parties are swapped before any computation.
    BToA,
}

#[derive(Debug, Parser)]
#[command(
    name = "cvsteer",
    version,
    about = "EPR-steering measures for two-mode Gaussian and Gaussian-mixture states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the uncertainty principle for a covariance matrix.
    Validate(IoArgs),
    /// Steering measures, criteria and key-rate bounds.
    Measure(MeasureArgs),
    /// Minimize the Reid product over local Gaussian unitaries.
    Optimize(OptimizeArgs),
    /// Reid product of a rotated two-mode squeezed vacuum versus squeezing.
    SweepFig1(SweepArgs),
    /// Monte Carlo homodyne estimation of inference variances.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// State file (JSON); `-` reads standard input.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; standard output when omitted or `-`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum, default_value_t)]
    pub direction: Direction,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum, default_value_t)]
    pub direction: Direction,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random starts, in [-2, 2]^4, besides the closed-form start.
    #[arg(long, default_value_t = DEFAULT_RESTARTS, value_parser = parse_count)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = DEFAULT_R_MIN)]
    pub r_min: f64,
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    pub r_max: f64,
    #[arg(long, default_value_t = DEFAULT_R_STEPS, value_parser = parse_count)]
    pub r_steps: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum, default_value_t)]
    pub direction: Direction,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Samples per basis; accepts `1e6`.
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = parse_count)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_BINS, value_parser = parse_count)]
    pub bins: usize,
    /// Measure in the basis where the Reid product is minimal.
    #[arg(long)]
    pub reid_optimal: bool,
    /// Also write raw outcomes to `<PREFIX>_xx.csv` and `<PREFIX>_pp.csv`,
    /// each with a JSON sidecar.
    #[arg(long, value_name = "PREFIX")]
    pub raw_csv: Option<PathBuf>,
}

/// Positive integer, also in exponent notation (`1e6`).
fn parse_count(s: &str) -> std::result::Result<usize, String> {
    let n = match s.parse::<usize>() {
        Ok(n) => n,
        Err(_) => {
            let x: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
            if !(x.fract() == 0.0 && x >= 0.0 && x <= usize::MAX as f64) {
                return Err(format!("not a non-negative integer: {s}"));
            }
            x as usize
        }
    };
    if n == 0 {
        return Err("must be positive".into());
    }
    Ok(n)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                ExitCode::Input as i32
            } else {
                let _ = write!(out, "{text}");
                ExitCode::Success as i32
            };
        }
    };
    match execute(&cli.command, out, err) {
        Ok(()) => ExitCode::Success as i32,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code() as i32
        }
    }
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Validate(a) => cmd_validate(a, out),
        Command::Measure(a) => cmd_measure(a, out, err),
        Command::Optimize(a) => cmd_optimize(a, out),
        Command::SweepFig1(a) => cmd_sweep_fig1(a, out),
        Command::Sample(a) => cmd_sample(a, out),
    }
}

fn load(path: &Path) -> std::result::Result<StateFile, Failure> {
    let text = read_input(path).map_err(|e| Failure::Io(path.to_owned(), e))?;
    Ok(parse_state_file(&text)?)
}

fn load_state(path: &Path, direction: Direction) -> std::result::Result<StateSpec, Failure> {
    let state = load(path)?.into_state()?;
    Ok(match direction {
        Direction::AToB => state,
        Direction::BToA => state.swap_parties(),
    })
}

fn emit(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> CmdResult {
    let shown = path
        .map(Path::to_owned)
        .unwrap_or_else(|| PathBuf::from("-"));
    write_output(path, bytes, &mut *out).map_err(|e| Failure::Io(shown, e))
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T, out: &mut dyn Write) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    emit(path, text.as_bytes(), out)
}

fn to_stdout(path: Option<&Path>) -> bool {
    path.is_none_or(|p| p.as_os_str() == "-")
}

#[derive(Debug, Serialize)]
struct ValidationReport {
    bona_fide: bool,
    #[serde(serialize_with = "sig12")]
    min_eigenvalue: f64,
    #[serde(serialize_with = "sig12")]
    nu_minus: f64,
    #[serde(serialize_with = "sig12")]
    nu_plus: f64,
    #[serde(serialize_with = "sig12_invariants")]
    local_invariants: LocalInvariants,
}

fn sig12_invariants<S: serde::Serializer>(
    inv: &LocalInvariants,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("LocalInvariants", 4)?;
    for (name, v) in [
        ("det_a", inv.det_a),
        ("det_b", inv.det_b),
        ("det_c", inv.det_c),
        ("det_sigma", inv.det_sigma),
    ] {
        st.serialize_field(name, &crate::report::round_sig12(v))?;
    }
    st.end()
}

fn cmd_validate(a: &IoArgs, out: &mut dyn Write) -> CmdResult {
    let cm = match load(&a.input)? {
        StateFile::Gaussian(f) => validate_bona_fide(&f.matrix())?,
        mixture => mixture.into_state()?.cm(),
    };
    let (nu_minus, nu_plus) = cm.symplectic_eigenvalues();
    let report = ValidationReport {
        bona_fide: true,
        min_eigenvalue: cm.min_uncertainty_eigenvalue(),
        nu_minus: nu_minus.min(nu_plus),
        nu_plus: nu_plus.max(nu_minus),
        local_invariants: cm.local_invariants(),
    };
    emit_json(a.output.as_deref(), &report, out)
}

fn summary(r: &SteeringReport, direction: Direction, source: &str) -> String {
    let verdict = |v: bool| if v { "violated" } else { "not violated" };
    let dir = match direction {
        Direction::AToB => "a-to-b",
        Direction::BToA => "b-to-a (parties swapped)",
    };
    format!(
        "state: {source}, direction: {dir}\n\
         G(A->B) = {:.6}   G(B->A) = {:.6}\n\
         det M_B = {:.6}   det M_A = {:.6}\n\
         Reid product (as given) = {:.6}: Reid criterion {}\n\
         Gaussian steering criterion A->B: {}\n\
         key rate bound (as given) = {:.6}   optimal key rate bound = {:.6}\n",
        r.g_a_to_b,
        r.g_b_to_a,
        r.det_m_b,
        r.det_m_a,
        r.reid_product_as_given,
        verdict(r.reid_violated),
        verdict(r.wiseman_violated_a_to_b),
        r.key_rate_bound,
        r.optimal_key_rate_bound,
    )
}

fn cmd_measure(a: &MeasureArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let state = load_state(&a.io.input, a.direction)?;
    let report = full_report(&state.cm())?;
    let text = summary(&report, a.direction, &state.descriptor());
    let path = a.io.output.as_deref();
    emit_json(path, &report, out)?;
    let sink: &mut dyn Write = if to_stdout(path) { err } else { out };
    sink.write_all(text.as_bytes())
        .map_err(|e| Failure::Io(PathBuf::from("-"), e))
}

fn cmd_optimize(a: &OptimizeArgs, out: &mut dyn Write) -> CmdResult {
    let state = load_state(&a.io.input, a.direction)?;
    let result = minimize_reid(&state.cm(), a.restarts, a.seed)?;
    emit_json(a.io.output.as_deref(), &result, out)
}

fn cmd_sweep_fig1(a: &SweepArgs, out: &mut dyn Write) -> CmdResult {
    let grid = sweep::r_grid(a.r_min, a.r_max, a.r_steps)?;
    let rows = sweep::sweep(&grid)?;
    let mut buf = Vec::new();
    sweep::write_csv(&rows, &mut buf).expect("writing to memory");
    emit(a.output.as_deref(), &buf, out)
}

#[derive(Debug, Serialize)]
struct BinSensitivity {
    bins: usize,
    #[serde(serialize_with = "sig12")]
    min_product: f64,
}

#[derive(Debug, Serialize)]
struct SampleReport {
    source: String,
    direction: Direction,
    reid_optimal_basis: bool,
    samples: usize,
    bins: usize,
    seed: u64,
    /// Reid product of the measured state's covariance matrix.
    #[serde(serialize_with = "sig12")]
    reid_product: f64,
    #[serde(serialize_with = "sig12")]
    inf_product: f64,
    #[serde(serialize_with = "sig12")]
    inf_product_sigma: f64,
    #[serde(serialize_with = "sig12")]
    min_product: f64,
    #[serde(serialize_with = "sig12")]
    min_product_sigma: f64,
    #[serde(serialize_with = "sig12")]
    gap: f64,
    #[serde(serialize_with = "sig12")]
    gap_sigma: f64,
    #[serde(serialize_with = "sig12")]
    gap_significance: f64,
    xx: BasisEstimates,
    pp: BasisEstimates,
    bin_sensitivity: Vec<BinSensitivity>,
}

fn bin_sensitivity(xx: &SampleBatch, pp: &SampleBatch, bins: usize) -> Vec<BinSensitivity> {
    let mut counts = vec![bins / 2, bins, bins * 2];
    counts.dedup();
    counts
        .into_iter()
        .filter(|&b| b >= 1)
        .filter_map(|b| {
            let mx = empirical_min_variance(xx, b).ok()?;
            let mp = empirical_min_variance(pp, b).ok()?;
            Some(BinSensitivity {
                bins: b,
                min_product: mx * mp,
            })
        })
        .collect()
}

fn write_raw(prefix: &Path, batch: &SampleBatch) -> CmdResult {
    let tag = match batch.basis {
        crate::sampler::Basis::XX => "xx",
        crate::sampler::Basis::PP => "pp",
    };
    let mut base = prefix.as_os_str().to_owned();
    base.push(format!("_{tag}"));
    let csv_path = PathBuf::from(format!("{}.csv", base.to_string_lossy()));
    let json_path = PathBuf::from(format!("{}.json", base.to_string_lossy()));
    let mut csv = Vec::new();
    batch.write_csv(&mut csv).expect("writing to memory");
    std::fs::write(&csv_path, csv).map_err(|e| Failure::Io(csv_path, e))?;
    let mut side = serde_json::to_string_pretty(&batch.sidecar()).expect("sidecar serializes");
    side.push('\n');
    std::fs::write(&json_path, side).map_err(|e| Failure::Io(json_path, e))
}

fn cmd_sample(a: &SampleArgs, out: &mut dyn Write) -> CmdResult {
    let mut state = load_state(&a.io.input, a.direction)?;
    if a.reid_optimal {
        state = state.transformed(&reid_optimal_transform(&state.cm(), 0.0)?);
    }
    let (xx, pp) = sample_pair(&state, a.samples, a.seed)?;
    let p: EmpiricalProducts = empirical_products_from_batches(&xx, &pp, a.bins, a.seed)?;
    if let Some(prefix) = &a.raw_csv {
        write_raw(prefix, &xx)?;
        write_raw(prefix, &pp)?;
    }
    let report = SampleReport {
        source: state.descriptor(),
        direction: a.direction,
        reid_optimal_basis: a.reid_optimal,
        samples: p.samples,
        bins: p.bins,
        seed: p.seed,
        reid_product: reid_product(&state.cm())?,
        inf_product: p.inf_product,
        inf_product_sigma: p.inf_product_sigma,
        min_product: p.min_product,
        min_product_sigma: p.min_product_sigma,
        gap: p.gap(),
        gap_sigma: p.gap_sigma,
        gap_significance: p.gap_significance(),
        xx: p.xx,
        pp: p.pp,
        bin_sensitivity: bin_sensitivity(&xx, &pp, a.bins),
    };
    emit_json(a.io.output.as_deref(), &report, out)
}
