//! Command-line front end. The binary is a thin wrapper around [`run`].

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{analyze, to_json, AnalysisConfig};
use crate::efficiency::{
    extract_efficiency_db, ratio_grid, variance_vs_ratio_curve, EfficiencyBudget, Uncertain,
    DEFAULT_K_SIGMA,
};
use crate::error::{invalid, Error, Result};
use crate::ratio::squeeze_from_ratio;
use crate::synth::{synthesize_input_trace, NoiseSpec, RampDistortion, ScanSpec};
use crate::trace::{fmt_sig, Trace};
use crate::variance::{ChannelModel, LobeExcess, QuadratureEllipse, SqueezeState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNANALYZABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "squeeze-ratio",
    version,
    about = "Ratio-method analysis of squeezed-light homodyne traces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic phase-scanned trace as CSV.
    Simulate(SimulateArgs),
    /// Analyze a trace CSV and print the JSON report.
    Analyze(AnalyzeArgs),
    /// Convert a crossing ratio to r and the minimum-uncertainty state.
    InvertRatio(InvertRatioArgs),
    /// Total efficiency from one detected quadrature level.
    Efficiency(EfficiencyArgs),
    /// Detected squeezing/anti-squeezing versus crossing ratio, as CSV.
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Squeezing parameter.
    #[arg(long, default_value_t = 0.948)]
    pub r: f64,
    /// Squeezing angle, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta_s: f64,
    /// Total channel efficiency.
    #[arg(long, default_value_t = 0.77)]
    pub eta: f64,
    #[arg(long, default_value_t = -59.4, allow_hyphen_values = true)]
    pub qnl_dbm: f64,
    /// Dark-noise level; omit with --no-dark.
    #[arg(long, default_value_t = -70.0, allow_hyphen_values = true)]
    pub dark_dbm: f64,
    #[arg(long)]
    pub no_dark: bool,
    /// Number of monotone PZT sweeps.
    #[arg(long, default_value_t = 18)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 128)]
    pub samples_per_sweep: usize,
    /// Start of each forward sweep, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_start: Option<f64>,
    /// End of each forward sweep, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_end: Option<f64>,
    /// Ramp distortion coefficients c2,c3,… of D(u) = u + Σ c_k (u^k − u).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ramp: Vec<f64>,
    /// Gaussian measurement noise, dB.
    #[arg(long, default_value_t = 0.2)]
    pub noise_db: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Multiply the anti-squeezed variance by this factor with noise added
    /// only inside the anti-squeezed lobe, producing a non-minimum-uncertainty
    /// state that keeps the QNL crossings.
    #[arg(long, default_value_t = 1.0)]
    pub excess_antisqueezing: f64,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trace CSV, or `-` for standard input.
    pub trace: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub qnl_dbm: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub dark_dbm: Option<f64>,
    /// Number of monotone sweeps; read from the trace metadata by default.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Detector quantum efficiency (for the escape efficiency).
    #[arg(long, requires_all = ["eta_vis", "eta_opt"])]
    pub eta_det: Option<f64>,
    /// Homodyne visibility efficiency.
    #[arg(long, requires_all = ["eta_det", "eta_opt"])]
    pub eta_vis: Option<f64>,
    /// Propagation (optical) efficiency.
    #[arg(long, requires_all = ["eta_det", "eta_vis"])]
    pub eta_opt: Option<f64>,
    /// Consistency threshold in combined standard deviations.
    #[arg(long, default_value_t = DEFAULT_K_SIGMA)]
    pub k_sigma: f64,
    /// Extra uncertainty on the detected levels, dB.
    #[arg(long, default_value_t = 0.0)]
    pub level_sigma_db: f64,
    /// Uncertainty of the QNL-to-dark gap, dB.
    #[arg(long, default_value_t = 0.0)]
    pub gap_sigma_db: f64,
    /// Suspected ramp distortion coefficients; reports the systematic shift.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ramp: Vec<f64>,
    /// Report file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Do not print the summary.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct InvertRatioArgs {
    #[arg(long)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    /// Detected level relative to the QNL, dB.
    #[arg(long, allow_hyphen_values = true)]
    pub det_db: f64,
    /// Minimum-uncertainty level of the same quadrature, dB.
    #[arg(long, allow_hyphen_values = true)]
    pub mu_db: f64,
    /// QNL minus dark noise, dB; no dark noise when omitted.
    #[arg(long)]
    pub gap_db: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub det_sigma_db: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu_sigma_db: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gap_sigma_db: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Channel efficiencies, one curve each.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.9, 0.77, 0.6, 0.5])]
    pub eta: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub ratio_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub ratio_max: f64,
    #[arg(long, default_value_t = 91)]
    pub points: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoCrossings
        | Error::InsufficientScan { .. }
        | Error::NoValidTriple
        | Error::TraceTooShort { .. } => EXIT_UNANALYZABLE,
        _ => EXIT_USAGE,
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Analyze(a) => analyze_cmd(&a),
        Command::InvertRatio(a) => {
            let est = squeeze_from_ratio(a.ratio, a.sigma)?;
            emit(a.output.as_ref(), &to_json(&est)?)
        }
        Command::Efficiency(a) => {
            let gap = match a.gap_db {
                Some(g) => Uncertain::new(g, a.gap_sigma_db),
                None => Uncertain::exact(f64::INFINITY),
            };
            let est = extract_efficiency_db(
                Uncertain::new(a.det_db, a.det_sigma_db),
                Uncertain::new(a.mu_db, a.mu_sigma_db),
                gap,
            )?;
            emit(a.output.as_ref(), &to_json(&est)?)
        }
        Command::Curve(a) => emit(
            a.output.as_ref(),
            &curve_csv(&a.eta, a.ratio_min, a.ratio_max, a.points)?,
        ),
    }
}

/// Trace generated by `simulate` for the given arguments.
pub fn simulate_trace(a: &SimulateArgs) -> Result<Trace> {
    let state = SqueezeState::new(a.r, a.theta_s)?;
    let dark = if a.no_dark {
        f64::NEG_INFINITY
    } else {
        a.dark_dbm
    };
    let chan = ChannelModel::from_dbm(a.eta, a.qnl_dbm, dark)?;
    let defaults = ScanSpec::default();
    let scan = ScanSpec::sweeps(a.sweeps, a.samples_per_sweep)
        .with_range(
            a.theta_start.unwrap_or(defaults.theta_start),
            a.theta_end.unwrap_or(defaults.theta_end),
        )
        .with_distortion(RampDistortion::new(a.ramp.clone())?);
    let noise = NoiseSpec::new(a.noise_db, a.seed)?;
    let mut trace = if a.excess_antisqueezing == 1.0 {
        synthesize_input_trace(&state, &chan, &scan, &noise)?
    } else {
        let input = LobeExcess::new(QuadratureEllipse::from(state), a.excess_antisqueezing)?;
        synthesize_input_trace(&input, &chan, &scan, &noise)?
    };
    trace.meta_mut().extra.insert("r".into(), fmt_sig(a.r));
    if a.excess_antisqueezing != 1.0 {
        trace.meta_mut().extra.insert(
            "excess_antisqueezing".into(),
            fmt_sig(a.excess_antisqueezing),
        );
    }
    Ok(trace)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    emit(a.output.as_ref(), &simulate_trace(a)?.to_csv_string())
}

fn analyze_cmd(a: &AnalyzeArgs) -> Result<()> {
    let trace = if a.trace.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Trace::read_csv(BufReader::new(s.as_bytes()))?
    } else {
        Trace::load(&a.trace)?
    };
    let budget = match (a.eta_det, a.eta_vis, a.eta_opt) {
        (Some(d), Some(v), Some(o)) => Some(EfficiencyBudget::new(d, v, o)?),
        _ => None,
    };
    let config = AnalysisConfig {
        qnl_dbm: a.qnl_dbm,
        dark_dbm: a.dark_dbm,
        n_sweeps: a.sweeps,
        budget,
        k_sigma: a.k_sigma,
        level_sigma_db: a.level_sigma_db,
        gap_sigma_db: a.gap_sigma_db,
        ramp_distortion: if a.ramp.is_empty() {
            None
        } else {
            Some(RampDistortion::new(a.ramp.clone())?)
        },
    };
    let report = analyze(&trace, &config)?;
    if !a.quiet {
        eprint!("{}", report.summary());
    }
    emit(a.output.as_ref(), &to_json(&report)?)
}

/// CSV with columns `eta,ratio,sq_db,asq_db`.
pub fn curve_csv(etas: &[f64], ratio_min: f64, ratio_max: f64, points: usize) -> Result<String> {
    if etas.is_empty() {
        return Err(invalid("eta", "need at least one efficiency"));
    }
    let grid = ratio_grid(ratio_min, ratio_max, points)?;
    let mut out = String::from("eta,ratio,sq_db,asq_db\n");
    for &eta in etas {
        for p in variance_vs_ratio_curve(eta, &grid)? {
            out += &format!(
                "{},{},{},{}\n",
                fmt_sig(eta),
                fmt_sig(p.ratio),
                fmt_sig(p.sq_db),
                fmt_sig(p.asq_db)
            );
        }
    }
    Ok(out)
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
