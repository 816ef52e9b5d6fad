//! Command-line front end: file formats and the `focusfocus` subcommands.

pub mod invfile;
pub mod modelfile;
pub mod rational;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use focusfocus::moduli::{act, canonicalize, check_constraints, equivalent, from_vungoc, to_vungoc};
use focusfocus::powerseries::multi_indices;
use focusfocus::recovery::{fit_action_series, read_csv, roundtrip, sample_grid, write_csv};
use focusfocus::{
    ActionSeries, FitReport, GlueError, GluedSystem, GroupElement, InvariantTupleFull, InvariantTupleMinimal,
    ModuliError, PiRational, RecoveryError, SamplingGrid, TransitionSeries, TruncatedSeries,
};
use num_rational::BigRational;

pub use invfile::InvariantFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Moduli(#[from] ModuliError),
    #[error("{0}")]
    Numeric(String),
}

impl From<GlueError> for CliError {
    fn from(e: GlueError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<RecoveryError> for CliError {
    fn from(e: RecoveryError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numeric(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "focusfocus", version, about = "Invariants and glued models of focus-focus fibers with several pinch points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Smallest sampling radius as a fraction of the base radius.
    #[arg(long, default_value_t = 1e-4)]
    pub rmin: f64,
    /// Largest sampling radius as a fraction of the base radius.
    #[arg(long, default_value_t = 1e-2)]
    pub rmax: f64,
    #[arg(long, default_value_t = 6)]
    pub radii: usize,
    #[arg(long, default_value_t = 16)]
    pub angles: usize,
}

impl GridArgs {
    fn grid(&self) -> SamplingGrid {
        SamplingGrid { rmin: self.rmin, rmax: self.rmax, radii: self.radii, angles: self.angles }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report violated identity, cocycle and compatibility relations.
    Validate { file: PathBuf },
    /// Write the full tuple generated by a file.
    Expand {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply γ_X^gx ∘ θ^rot ∘ γ_Y^gy.
    Act {
        file: PathBuf,
        #[arg(long)]
        gx: bool,
        #[arg(long)]
        gy: bool,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        rot: i64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the canonical representative of the orbit and the element reaching it.
    Canon {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exit 0 if the two tuples lie in one orbit, 1 otherwise.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        /// Compare coefficients numerically with this absolute tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Switch the action between the s0 and S normalizations.
    Convert {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a glued model and write it as a model file.
    Build {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Truncate the input series to this order first.
        #[arg(long)]
        order: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Measure periods over the sampling grid and write them as CSV.
    Periods {
        model: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit the action series of a model and write it as an invariant file.
    Extract {
        model: PathBuf,
        /// Fit these samples instead of measuring new ones.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 3)]
        fit_order: u32,
        #[arg(long)]
        workers: Option<usize>,
        /// Tolerance of the continued-fraction rationalization.
        #[arg(long, default_value_t = 1e-12)]
        rational_tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the fit report here instead of the auxiliary stream.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build, measure and fit, then compare with the input coefficients.
    Roundtrip {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long)]
        order: Option<u32>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 3)]
        fit_order: u32,
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Validate { file } => {
            let full = read_invariants(&file)?.full()?;
            let violations = check_constraints(&full);
            for v in &violations {
                println!("{v}");
            }
            if violations.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                println!("{} violation(s)", violations.len());
                Ok(1)
            }
        }
        Command::Expand { file, output } => {
            let full = read_invariants(&file)?.full()?;
            emit(output.as_deref(), &InvariantFile::Full(full).print())?;
            Ok(0)
        }
        Command::Act { file, gx, gy, rot, output } => {
            let inv = read_invariants(&file)?;
            let full = inv.full()?;
            let g = GroupElement::new(full.k(), gx, rot, gy);
            let moved = inv.same_layout(act(&g, &full))?;
            emit(output.as_deref(), &moved.print())?;
            Ok(0)
        }
        Command::Canon { file, output } => {
            let inv = read_invariants(&file)?;
            let (canon, g) = canonicalize(&inv.full()?);
            emit(output.as_deref(), &inv.same_layout(canon)?.print())?;
            writeln!(aux(output.as_deref()), "element {g}").map_err(stdio)?;
            Ok(0)
        }
        Command::Equiv { first, second, tol } => {
            let a = read_invariants(&first)?.full()?;
            let b = read_invariants(&second)?.full()?;
            if a.k() != b.k() || a.order() != b.order() {
                return Err(CliError::Usage(format!(
                    "k/order mismatch: ({}, {}) vs ({}, {})",
                    a.k(),
                    a.order(),
                    b.k(),
                    b.order()
                )));
            }
            let same = match tol {
                None => equivalent(&a, &b)?,
                Some(t) => GroupElement::enumerate(a.k()).iter().any(|g| tuples_close(&act(g, &a), &b, t)),
            };
            println!("{}", if same { "equivalent" } else { "not equivalent" });
            Ok(if same { 0 } else { 1 })
        }
        Command::Convert { file, output } => {
            let converted = match read_invariants(&file)? {
                InvariantFile::VuNgoc { big_s, g_consec } => {
                    let k = g_consec.len() + 1;
                    InvariantFile::Minimal(InvariantTupleMinimal::new(k, from_vungoc(&big_s), g_consec)?)
                }
                InvariantFile::Minimal(m) => InvariantFile::VuNgoc {
                    big_s: to_vungoc(m.s0()),
                    g_consec: m.g_consec().to_vec(),
                },
                InvariantFile::Full(_) => {
                    return Err(CliError::Usage("convert expects a minimal file or one with series S".into()))
                }
            };
            emit(output.as_deref(), &converted.print())?;
            Ok(0)
        }
        Command::Build { file, delta, order, output } => {
            let data = load_minimal(&file, order)?;
            let sys = GluedSystem::build(&data, delta)?;
            emit(output.as_deref(), &modelfile::print(&sys))?;
            Ok(0)
        }
        Command::Periods { model, grid, workers, output } => {
            let sys = read_model(&model)?;
            let samples = sample_grid(&sys, &grid.grid(), workers)?;
            let mut buf = Vec::new();
            write_csv(&samples, &mut buf).map_err(stdio)?;
            emit(output.as_deref(), &String::from_utf8(buf).expect("csv is ASCII"))?;
            Ok(0)
        }
        Command::Extract { model, samples, grid, fit_order, workers, rational_tol, output, report } => {
            let sys = read_model(&model)?;
            let samples = match samples {
                Some(path) => read_csv(io::BufReader::new(open(&path)?))?,
                None => sample_grid(&sys, &grid.grid(), workers)?,
            };
            let fit = fit_action_series(&samples, fit_order)?;
            let data = fitted_tuple(&sys, &fit, rational_tol)?;
            emit(output.as_deref(), &InvariantFile::Minimal(data).print())?;
            let text = fit_report_text(&fit);
            match report {
                Some(path) => write_file(&path, &text)?,
                None => aux(output.as_deref()).write_all(text.as_bytes()).map_err(stdio)?,
            }
            Ok(0)
        }
        Command::Roundtrip { file, delta, order, grid, fit_order, workers } => {
            let data = load_minimal(&file, order)?;
            let rep = roundtrip(&data, delta, &grid.grid(), fit_order, workers)?;
            println!("u0_radius {:.6e}", rep.u0_radius);
            print!("{}", fit_report_text(&rep.fit));
            println!("{:>3} {:>3} {:>24} {:>24} {:>10} {:>10}  result", "i", "j", "expected", "fitted", "error", "tol");
            for c in &rep.checks {
                println!(
                    "{:>3} {:>3} {:>24.16e} {:>24.16e} {:>10.3e} {:>10.1e}  {}",
                    c.i,
                    c.j,
                    c.expected,
                    c.fitted,
                    c.error,
                    c.tolerance,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            let failed = rep.checks.iter().filter(|c| !c.pass).count();
            println!("{} of {} coefficients pass", rep.checks.len() - failed, rep.checks.len());
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

fn stdio(e: io::Error) -> CliError {
    CliError::Io { path: "<stdio>".into(), source: e }
}

fn open(path: &Path) -> Result<fs::File, CliError> {
    fs::File::open(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

fn with_path(path: &Path, e: CliError) -> CliError {
    match e {
        CliError::Parse { line, msg } => CliError::Usage(format!("{}: line {line}: {msg}", path.display())),
        other => other,
    }
}

pub fn read_invariants(path: &Path) -> Result<InvariantFile, CliError> {
    InvariantFile::parse(&read_text(path)?).map_err(|e| with_path(path, e))
}

pub fn read_model(path: &Path) -> Result<GluedSystem, CliError> {
    modelfile::parse(&read_text(path)?).map_err(|e| with_path(path, e))
}

/// Primary output goes to the file if given, otherwise to stdout.
fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_file(path, text),
        None => io::stdout().write_all(text.as_bytes()).map_err(stdio),
    }
}

/// Secondary text goes to stdout when the primary output is a file, otherwise to stderr.
fn aux(output: Option<&Path>) -> Box<dyn Write> {
    match output {
        Some(_) => Box::new(io::stdout()),
        None => Box::new(io::stderr()),
    }
}

fn load_minimal(path: &Path, order: Option<u32>) -> Result<InvariantTupleMinimal, CliError> {
    let data = read_invariants(path)?.minimal()?;
    match order {
        None => Ok(data),
        Some(n) if n == 0 || n > data.order() => {
            Err(CliError::Usage(format!("--order {n} must lie in 1..={}", data.order())))
        }
        Some(n) => {
            let cut = |s: &TruncatedSeries| s.truncate(n).map_err(|e| CliError::Usage(e.to_string()));
            let s0 = ActionSeries::new(cut(data.s0().as_series())?);
            let g = data
                .g_consec()
                .iter()
                .map(|g| Ok(TransitionSeries::new(cut(g.as_series())?).map_err(ModuliError::from)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(InvariantTupleMinimal::new(data.k(), s0, g)?)
        }
    }
}

fn series_close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64, periodic_x: bool) -> bool {
    multi_indices(a.order()).all(|(i, j)| {
        let d = a.coeff(i, j).to_f64() - b.coeff(i, j).to_f64();
        let d = if periodic_x && (i, j) == (1, 0) { d - std::f64::consts::TAU * (d / std::f64::consts::TAU).round() } else { d };
        d.abs() <= tol
    })
}

fn tuples_close(a: &InvariantTupleFull, b: &InvariantTupleFull, tol: f64) -> bool {
    let k = a.k();
    (0..k).all(|j| series_close(a.s(j).as_series(), b.s(j).as_series(), tol, true))
        && (0..k).all(|j| (0..k).all(|l| series_close(a.g(j, l).as_series(), b.g(j, l).as_series(), tol, false)))
}

fn rationalized(value: f64, tol: f64) -> Result<BigRational, CliError> {
    rational::rationalize(value, tol).ok_or_else(|| CliError::Numeric(format!("cannot rationalize {value}")))
}

/// Fitted `s₀` with the model's transitions `g_{j,j+1} = G̃_{0,j+1} ∘ G̃_{0,j}⁻¹`, all rationalized.
fn fitted_tuple(sys: &GluedSystem, fit: &FitReport, tol: f64) -> Result<InvariantTupleMinimal, CliError> {
    let order = fit.fit_order;
    let mut s0 = TruncatedSeries::zero(order);
    for &(i, j, v) in &fit.coefficients {
        s0.set_coeff(i, j, PiRational::rational(rationalized(v, tol)?)).map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    let mut charts = Vec::with_capacity(sys.k());
    for j in 0..sys.k() {
        let mut g = TruncatedSeries::zero(order);
        for &(a, b, v) in sys.chart(j).poly().terms() {
            if a + b <= order {
                g.set_coeff(a, b, PiRational::rational(rationalized(v, tol)?))
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
            }
        }
        charts.push(TransitionSeries::new(g).map_err(|e| CliError::Numeric(format!("chart {j}: {e}")))?);
    }
    let g_consec = charts
        .windows(2)
        .map(|w| w[1].compose(&w[0].invert()).map_err(|e| CliError::Numeric(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InvariantTupleMinimal::new(sys.k(), ActionSeries::new(s0), g_consec)?)
}

fn fit_report_text(fit: &FitReport) -> String {
    let mut out = format!(
        "fit_order {}\nsamples {}\nradius_range {:.6e} {:.6e}\ncondition {:.6e}\nresidual_rms {:.6e}\n",
        fit.fit_order, fit.samples, fit.radius_range.0, fit.radius_range.1, fit.condition, fit.residual_rms
    );
    for &(i, j, v) in &fit.coefficients {
        out.push_str(&format!("fitted {i} {j} {v:.16e}\n"));
    }
    out
}
