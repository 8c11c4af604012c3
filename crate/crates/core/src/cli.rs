//! Command-line front end.
//!
//! Exit codes: 0 success, 1 computation failure, 2 no stationary state,
//! 64 usage error, 74 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::{integrate, IntegrationConfig, MomentState};
use crate::error::Error;
use crate::gaussian::Tolerances;
use crate::laser::{AtomCavityParams, LaserParams};
use crate::output::{self, BoundaryRow, Format};
use crate::sweep::{
    evaluate_record, find_one_way_boundary, run_grid, run_sweep, Axis, FixedParams, GridSpec,
    Param, Status, SweepOptions, SweepSpec, SweepRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NO_STATIONARY_STATE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "cascade-steering",
    version,
    about = "Steady-state steering and Renyi-2 entanglement of a nondegenerate three-level cascade laser"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a single stationary point and print one record.
    #[command(args_override_self = true)]
    Steady {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Integrate the moment equations with fixed-step RK4.
    #[command(args_override_self = true)]
    Dynamics {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Step size in ms.
        #[arg(long)]
        dt: Option<f64>,
        /// Final time in ms.
        #[arg(long)]
        tmax: Option<f64>,
        /// Steady state is declared when every derivative component is below this.
        #[arg(long, default_value_t = 1e-6)]
        convergence_tol: f64,
        /// Write every N-th step.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Initial state (only the vacuum is supported).
        #[arg(long, value_enum, default_value_t = InitState::Vacuum)]
        init: InitState,
    },
    /// Sweep one parameter over a uniform range.
    #[command(args_override_self = true)]
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Swept parameter.
        #[arg(long, value_enum)]
        param: Option<ParamArg>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Worker threads; output order does not depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Evaluate a 2-D grid, written row-major (x varies fastest).
    #[command(args_override_self = true)]
    Grid {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Column axis as name:start:end:steps, name one of gain, kappa, eta.
        #[arg(long)]
        x: Option<String>,
        /// Row axis as name:start:end:steps.
        #[arg(long)]
        y: Option<String>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Bisect for the inversion at which c2 -> c1 steering vanishes (the crossing nearest --to).
    #[command(args_override_self = true)]
    Boundary {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Lower end of the eta search interval.
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        /// Upper end of the eta search interval.
        #[arg(long, default_value_t = 1.0)]
        to: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Linear gain A in kHz.
    #[arg(short = 'A', long = "gain", conflicts_with_all = ["rho", "epsilon", "gamma"])]
    pub gain: Option<f64>,
    /// Atom injection rate rho in kHz (derives A together with --epsilon, --gamma).
    #[arg(long, requires_all = ["epsilon", "gamma"])]
    pub rho: Option<f64>,
    /// Atom-field coupling epsilon in kHz.
    #[arg(long, requires_all = ["rho", "gamma"])]
    pub epsilon: Option<f64>,
    /// Atomic decay gamma in kHz.
    #[arg(long, requires_all = ["rho", "epsilon"])]
    pub gamma: Option<f64>,
    /// Cavity decay kappa in kHz.
    #[arg(short = 'k', long)]
    pub kappa: Option<f64>,
    /// Population inversion eta.
    #[arg(short = 'e', long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output file (stdout when omitted).
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Steering threshold in nats.
    #[arg(long)]
    pub eps_steer: Option<f64>,
    /// key=value file of default flag values; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Gain,
    Kappa,
    Eta,
}

impl From<ParamArg> for Param {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Gain => Param::Gain,
            ParamArg::Kappa => Param::Kappa,
            ParamArg::Eta => Param::Eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitState {
    Vacuum,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(path: Option<&Path>, e: io::Error) -> Self {
        let target = path.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        CliError {
            code: EXIT_IO,
            message: format!("{target}: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::InvalidSpec(_) | Error::StepTooLarge { .. } => {
                EXIT_USAGE
            }
            Error::NoStationaryState { .. } => EXIT_NO_STATIONARY_STATE,
            _ => EXIT_FAILURE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse_with_config(&args) {
        Ok(cli) => cli,
        Err(e) if e.code == EXIT_OK => {
            print!("{}", e.message);
            return EXIT_OK;
        }
        Err(e) => {
            eprintln!("{}", e.message.trim_end());
            return e.code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn try_parse(args: &[OsString]) -> Result<Cli, CliError> {
    Cli::try_parse_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError {
                code: EXIT_OK,
                message: e.to_string(),
            },
            _ => CliError::usage(e.to_string()),
        }
    })
}

/// Config values are spliced in right after the subcommand so that any flag
/// given on the command line overrides them.
fn parse_with_config(args: &[OsString]) -> Result<Cli, CliError> {
    let cli = try_parse(args)?;
    let Some(path) = cli.command.common().config.clone() else {
        return Ok(cli);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(Some(&path), e))?;
    let injected = config_args(&text).map_err(|m| CliError::usage(format!("{}: {m}", path.display())))?;
    let mut merged = args[..2].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&args[2..]);
    try_parse(&merged)
}

/// Turns `key = value` lines into `--key value` pairs. `#` starts a comment.
pub fn config_args(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key '{key}'", i + 1));
        }
        out.push(format!("--{key}").into());
        out.push(value.trim().into());
    }
    Ok(out)
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Steady { common, .. }
            | Command::Dynamics { common, .. }
            | Command::Sweep { common, .. }
            | Command::Grid { common, .. }
            | Command::Boundary { common, .. } => common,
        }
    }
}

impl ParamArgs {
    fn resolved_gain(&self) -> Result<Option<f64>, CliError> {
        match (self.gain, self.rho, self.epsilon, self.gamma) {
            (Some(a), ..) => Ok(Some(a)),
            (None, Some(rho), Some(eps), Some(gamma)) => {
                let atoms = AtomCavityParams::new(rho, eps, gamma)?;
                if let Some(kappa) = self.kappa {
                    if let Some(w) = atoms.good_cavity_warning(kappa) {
                        eprintln!("warning: {w}");
                    }
                }
                Ok(Some(crate::laser::derive_gain(&atoms)?))
            }
            _ => Ok(None),
        }
    }

    fn fixed(&self) -> Result<FixedParams, CliError> {
        Ok(FixedParams {
            gain: self.resolved_gain()?,
            kappa: self.kappa,
            eta: self.eta,
        })
    }

    fn require_all(&self) -> Result<(f64, f64, f64), CliError> {
        let f = self.fixed()?;
        match (f.gain, f.kappa, f.eta) {
            (Some(a), Some(k), Some(e)) => Ok((a, k, e)),
            _ => Err(CliError::usage(
                "need -A/--gain (or --rho, --epsilon, --gamma), -k/--kappa and -e/--eta",
            )),
        }
    }
}

fn tolerances(common: &CommonArgs) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Some(eps) = common.eps_steer {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(CliError::usage("--eps-steer must be finite and >= 0"));
        }
        tol.steer = eps;
    }
    Ok(tol)
}

fn with_output<F>(common: &CommonArgs, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match &common.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(Some(path), e))?;
            let mut w = BufWriter::new(file);
            write(&mut w)
                .and_then(|()| w.flush())
                .map_err(|e| CliError::io(Some(path), e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| CliError::io(None, e))
        }
    }
}

fn report_flagged(records: &[SweepRecord]) {
    let flagged = records
        .iter()
        .filter(|r| r.status() == Status::NoStationaryState)
        .count();
    if flagged > 0 {
        eprintln!("warning: {flagged} point(s) without a stationary state were flagged");
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Steady { params, common } => {
            let (a, k, e) = params.require_all()?;
            let p = LaserParams::new(a, k, e)?;
            let record = evaluate_record(&p, &tolerances(&common)?)?;
            if record.status() == Status::NoStationaryState {
                return Err(Error::NoStationaryState {
                    gain: a,
                    kappa: k,
                    eta: e,
                }
                .into());
            }
            let format = common.format.into();
            with_output(&common, |w| match format {
                Format::Csv => output::write_records_csv(w, &[record]),
                Format::Json => {
                    serde_json::to_writer_pretty(&mut *w, &output::RecordRow::from(&record))?;
                    writeln!(w)
                }
            })?;
            Ok(EXIT_OK)
        }
        Command::Dynamics {
            params,
            common,
            dt,
            tmax,
            convergence_tol,
            stride,
            init: InitState::Vacuum,
        } => {
            let (a, k, e) = params.require_all()?;
            let p = LaserParams::with_any_inversion(a, k, e)?;
            let cfg = IntegrationConfig {
                dt: dt.ok_or_else(|| CliError::usage("--dt is required"))?,
                t_max: tmax.ok_or_else(|| CliError::usage("--tmax is required"))?,
                convergence_tol,
                sample_stride: stride,
            };
            let traj = integrate(&p, &MomentState::vacuum(), &cfg)?;
            with_output(&common, |w| {
                output::write_trajectory(w, &traj, common.format.into())
            })?;
            if traj.converged {
                eprintln!(
                    "converged at t = {} ms after {} steps",
                    traj.final_time, traj.steps
                );
            } else {
                eprintln!(
                    "warning: not converged by t = {} ms (convergence_tol = {convergence_tol})",
                    traj.final_time
                );
            }
            Ok(EXIT_OK)
        }
        Command::Sweep {
            params,
            common,
            param,
            from,
            to,
            steps,
            threads,
        } => {
            let missing = || CliError::usage("sweep needs --param, --from, --to and --steps");
            let axis = Axis::new(
                param.ok_or_else(missing)?.into(),
                from.ok_or_else(missing)?,
                to.ok_or_else(missing)?,
                steps.ok_or_else(missing)?,
            );
            let spec = SweepSpec {
                axis,
                fixed: params.fixed()?,
            };
            let opts = sweep_options(&common, threads)?;
            let records = run_sweep(&spec, &opts)?;
            with_output(&common, |w| output::write_records(w, &records, common.format.into()))?;
            report_flagged(&records);
            Ok(EXIT_OK)
        }
        Command::Grid {
            params,
            common,
            x,
            y,
            threads,
        } => {
            let x = Axis::parse(&x.ok_or_else(|| CliError::usage("grid needs --x"))?)?;
            let y = Axis::parse(&y.ok_or_else(|| CliError::usage("grid needs --y"))?)?;
            let spec = GridSpec {
                x,
                y,
                fixed: params.fixed()?,
            };
            let opts = sweep_options(&common, threads)?;
            let grid = run_grid(&spec, &opts)?;
            with_output(&common, |w| {
                output::write_records(w, &grid.records, common.format.into())
            })?;
            report_flagged(&grid.records);
            Ok(EXIT_OK)
        }
        Command::Boundary {
            params,
            common,
            from,
            to,
        } => {
            let f = params.fixed()?;
            let (Some(a), Some(k)) = (f.gain, f.kappa) else {
                return Err(CliError::usage("boundary needs -A/--gain (or atom parameters) and -k/--kappa"));
            };
            if f.eta.is_some() {
                return Err(CliError::usage("boundary searches eta; do not pass -e/--eta"));
            }
            let tol = tolerances(&common)?;
            let found = match find_one_way_boundary(a, k, from, to, &tol) {
                Ok(eta) => Some(eta),
                Err(Error::NotFound) => None,
                Err(e) => return Err(e.into()),
            };
            let row = BoundaryRow {
                a_khz: a,
                kappa_khz: k,
                eta_lo: from,
                eta_hi: to,
                eta_star: found,
                status: if found.is_some() { "found" } else { "not_found" }.into(),
            };
            with_output(&common, |w| output::write_boundary(w, &row, common.format.into()))?;
            Ok(EXIT_OK)
        }
    }
}

fn sweep_options(common: &CommonArgs, threads: usize) -> Result<SweepOptions, CliError> {
    if threads == 0 {
        return Err(CliError::usage("--threads must be >= 1"));
    }
    Ok(SweepOptions {
        tolerances: tolerances(common)?,
        threads,
    })
}
