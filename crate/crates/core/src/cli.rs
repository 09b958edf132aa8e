//! Command-line front end: argument parsing, report assembly and exit codes.
//!
//! [`run`] does all the work and returns the report text, so the binary only
//! has to print it and translate [`CliError`] into a process exit code.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bell::{chsh_max, chsh_oracle, random_entangled_state, ChshSettings};
use crate::error::Error;
use crate::grid::{
    demo_sum_diff_with_tol, double_gaussian_profile, gaussian_profile, odd_profile, Grid,
    SumDiffReport,
};
use crate::io::{
    format_f64, parse_bijection, parse_observable, parse_tps, to_json, FormatError, StateFile,
};
use crate::par::{map_indexed, Execution};
use crate::qcf::{default_witness_threshold, qcf, qcf_local_with_threshold, Verdict};
use crate::schmidt::{schmidt, DEFAULT_TRUNCATION_TOL};
use crate::spin::{chi_basis, demo_spins, spin_samples, SpinConfig, SpinReport};
use crate::state::{Observable, StateVector};
use crate::tps::{IndexBijection, TensorProductStructure};

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const DIMENSION: i32 = 3;
    pub const UNKNOWN_OBSERVABLE: i32 = 4;
    pub const GRID: i32 = 5;
    pub const BIJECTION: i32 = 6;
}

/// Smallest second Schmidt coefficient accepted for the random states of the
/// bell demo.
pub const BELL_DEMO_MIN_SECOND: f64 = 0.05;

/// Names accepted by `--obs-a` / `--obs-b` besides a matrix file path.
pub const OBSERVABLE_NAMES: [&str; 5] = ["identity", "pauli-x", "pauli-y", "pauli-z", "position"];

#[derive(Debug, Parser)]
#[command(
    name = "tensorfact",
    version,
    about = "Factorizability of pure states under changes of tensor product structure"
)]
pub struct Cli {
    /// Relative Schmidt truncation tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run sweeps on the current thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schmidt decomposition of a state file.
    Schmidt {
        state: PathBuf,
        /// Structure file overriding the one in the state file.
        #[arg(long)]
        tps: Option<PathBuf>,
    },
    /// Quantum covariance of two observables.
    Qcf {
        state: PathBuf,
        #[arg(long = "obs-a")]
        obs_a: String,
        #[arg(long = "obs-b")]
        obs_b: String,
        /// Treat A as acting on the first factor and B on the second.
        #[arg(long)]
        local: bool,
        #[arg(long)]
        tps: Option<PathBuf>,
        /// Grid spacing used by the `position` observable.
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        /// Witness threshold; defaults to D·1e-12.
        #[arg(long = "witness-tol")]
        witness_tol: Option<f64>,
    },
    /// Worked examples.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        #[arg(long, default_value_t = 129)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma1: f64,
        #[arg(long, default_value_t = 2.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 4.0)]
        sep: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Sweep sigma2 over `START:END:N` (coords only).
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Record a relabeled structure in a state file.
    Refactor {
        state: PathBuf,
        /// `sumdiff`, `swap`, `identity` or a bijection file.
        #[arg(long)]
        bijection: String,
    },
    /// Maximal CHSH value of a two-qubit state.
    Chsh {
        state: PathBuf,
        #[arg(long)]
        tps: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Coords,
    Spins,
    Bell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Dimension { .. } | Error::Shape(_) | Error::Sizing { .. } => exit::DIMENSION,
            Error::EvenGrid { .. } => exit::GRID,
            Error::InvalidBijection(_) => exit::BIJECTION,
            _ => exit::FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        let code = match e {
            FormatError::Parse { .. } | FormatError::Malformed(_) => exit::PARSE,
            FormatError::Dimension(_) => exit::DIMENSION,
            FormatError::Bijection(_) => exit::BIJECTION,
        };
        CliError::new(code, e.to_string())
    }
}

/// Report text plus warnings meant for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub seed: u64,
    pub tolerance_overrides: BTreeMap<String, f64>,
    /// Taken from `SOURCE_DATE_EPOCH` when set, so reruns stay byte-identical.
    pub timestamp: Option<String>,
    pub version: String,
}

impl RunManifest {
    fn new(cli: &Cli, subcommand: &str, parameters: Value) -> Self {
        let mut tolerance_overrides = BTreeMap::new();
        if let Some(t) = cli.tol {
            tolerance_overrides.insert("truncation".to_string(), t);
        }
        if let Command::Qcf {
            witness_tol: Some(w),
            ..
        } = &cli.command
        {
            tolerance_overrides.insert("witness".to_string(), *w);
        }
        Self {
            subcommand: subcommand.to_string(),
            parameters,
            seed: cli.seed,
            tolerance_overrides,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: T,
}

fn report<T: Serialize>(manifest: &RunManifest, result: T) -> String {
    to_json(&Report { manifest, result })
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::new(exit::FAILURE, e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::new(exit::FAILURE, e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new(exit::FAILURE, e.to_string()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        CliError::new(
            exit::FAILURE,
            format!("cannot read {}: {e}", path.display()),
        )
    })
}

fn load_state(
    path: &Path,
    tps: Option<&Path>,
    warnings: &mut Vec<String>,
) -> Result<StateFile, CliError> {
    let loaded = StateFile::parse(&read(path)?).map_err(|e| CliError::from(e).prefixed(path))?;
    warnings.extend(
        loaded
            .warnings
            .iter()
            .map(|w| format!("{}: {w}", path.display())),
    );
    let mut file = loaded.value;
    if let Some(p) = tps {
        let structure = parse_tps(&read(p)?).map_err(|e| CliError::from(e).prefixed(p))?;
        if structure.global_dim() != file.state.dim() {
            return Err(CliError::new(
                exit::DIMENSION,
                format!(
                    "{}: structure is {}x{} but the state has {} amplitudes",
                    p.display(),
                    structure.d1(),
                    structure.d2(),
                    file.state.dim()
                ),
            ));
        }
        file.tps = structure;
    }
    Ok(file)
}

impl CliError {
    fn prefixed(self, path: &Path) -> Self {
        CliError::new(self.code, format!("{}: {}", path.display(), self.message))
    }
}

fn truncation_tol(cli: &Cli) -> Result<f64, CliError> {
    match cli.tol {
        None => Ok(DEFAULT_TRUNCATION_TOL),
        Some(t) if t.is_finite() && t >= 0.0 => Ok(t),
        Some(t) => Err(CliError::new(
            exit::PARSE,
            format!("--tol must be a non-negative number, got {t}"),
        )),
    }
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn pauli(which: char) -> Observable {
    let z0 = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let rows = match which {
        'x' => [[z0, one], [one, z0]],
        'y' => [[z0, -i], [i, z0]],
        _ => [[one, z0], [z0, -one]],
    };
    let m = crate::linalg::ComplexMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()])
        .expect("2x2 literal");
    Observable::new(m).expect("Pauli matrices are Hermitian")
}

/// Resolves an observable name or matrix file for a space of dimension `dim`.
pub fn resolve_observable(name: &str, dim: usize, spacing: f64) -> Result<Observable, CliError> {
    let needs_qubit = |op: Observable| {
        if dim == 2 {
            Ok(op)
        } else {
            Err(CliError::new(
                exit::DIMENSION,
                format!("{name} acts on dimension 2, but the target space has dimension {dim}"),
            ))
        }
    };
    match name {
        "identity" => Ok(Observable::identity(dim)),
        "pauli-x" => needs_qubit(pauli('x')),
        "pauli-y" => needs_qubit(pauli('y')),
        "pauli-z" => needs_qubit(pauli('z')),
        "position" => {
            let center = (dim as f64 - 1.0) / 2.0;
            let values: Vec<f64> = (0..dim).map(|i| (i as f64 - center) * spacing).collect();
            Ok(Observable::diagonal(&values))
        }
        path if Path::new(path).is_file() => {
            let op = parse_observable(&read(Path::new(path))?)
                .map_err(|e| CliError::from(e).prefixed(Path::new(path)))?;
            if op.dim() != dim {
                return Err(CliError::new(
                    exit::DIMENSION,
                    format!(
                        "{path}: observable has dimension {}, expected {dim}",
                        op.dim()
                    ),
                ));
            }
            Ok(op)
        }
        _ => Err(CliError::new(
            exit::UNKNOWN_OBSERVABLE,
            format!(
                "unknown observable '{name}'; valid names are {} or a path to a matrix file",
                OBSERVABLE_NAMES.join(", ")
            ),
        )),
    }
}

/// Runs a parsed command line and returns the report.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let mut warnings = Vec::new();
    let body = match &cli.command {
        Command::Schmidt { state, tps } => cmd_schmidt(cli, state, tps.as_deref(), &mut warnings)?,
        Command::Qcf {
            state,
            obs_a,
            obs_b,
            local,
            tps,
            spacing,
            witness_tol,
        } => cmd_qcf(
            cli,
            QcfArgs {
                state,
                obs_a,
                obs_b,
                local: *local,
                tps: tps.as_deref(),
                spacing: *spacing,
                witness_tol: *witness_tol,
            },
            &mut warnings,
        )?,
        Command::Demo {
            which,
            d,
            sigma1,
            sigma2,
            sep,
            samples,
            hbar,
            sweep,
        } => {
            let args = DemoArgs {
                d: *d,
                sigma1: *sigma1,
                sigma2: *sigma2,
                sep: *sep,
                samples: *samples,
                hbar: *hbar,
                sweep: sweep.as_deref(),
            };
            match which {
                Demo::Coords => cmd_demo_coords(cli, &args, &mut warnings)?,
                Demo::Spins => cmd_demo_spins(cli, &args)?,
                Demo::Bell => cmd_demo_bell(cli, &args)?,
            }
        }
        Command::Refactor { state, bijection } => {
            cmd_refactor(cli, state, bijection, &mut warnings)?
        }
        Command::Chsh { state, tps } => cmd_chsh(cli, state, tps.as_deref(), &mut warnings)?,
    };
    Ok(Output { body, warnings })
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I) -> Result<Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;
    run(&cli)
}

fn path_param(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

#[derive(Serialize)]
struct SchmidtResult {
    dims: [usize; 2],
    rank: usize,
    coefficients: Vec<f64>,
    factorizable: bool,
    truncation_tol: f64,
}

fn cmd_schmidt(
    cli: &Cli,
    state: &Path,
    tps: Option<&Path>,
    warnings: &mut Vec<String>,
) -> Result<String, CliError> {
    let file = load_state(state, tps, warnings)?;
    let tol = truncation_tol(cli)?;
    let sd = schmidt(&file.state, &file.tps, tol)?;
    let (d1, d2) = file.dims();
    match cli.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = sd
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, a)| vec![k.to_string(), format_f64(*a)])
                .collect();
            csv_text(&["k", "coefficient"], &rows)
        }
        Format::Json => {
            let manifest = RunManifest::new(
                cli,
                "schmidt",
                json!({ "state": path_param(state), "tps": tps.map(path_param) }),
            );
            Ok(report(
                &manifest,
                SchmidtResult {
                    dims: [d1, d2],
                    rank: sd.rank,
                    factorizable: sd.is_factorizable(),
                    coefficients: sd.coefficients,
                    truncation_tol: tol,
                },
            ))
        }
    }
}

struct QcfArgs<'a> {
    state: &'a Path,
    obs_a: &'a str,
    obs_b: &'a str,
    local: bool,
    tps: Option<&'a Path>,
    spacing: f64,
    witness_tol: Option<f64>,
}

#[derive(Serialize)]
struct QcfResult {
    value: [f64; 2],
    local: bool,
    witness_threshold: f64,
    /// Only local pairs can witness entanglement.
    verdict: Option<Verdict>,
    schmidt_rank: usize,
}

fn cmd_qcf(cli: &Cli, args: QcfArgs<'_>, warnings: &mut Vec<String>) -> Result<String, CliError> {
    let file = load_state(args.state, args.tps, warnings)?;
    let (d1, d2) = file.dims();
    let threshold = args
        .witness_tol
        .unwrap_or_else(|| default_witness_threshold(d1 * d2));
    let rank = schmidt(&file.state, &file.tps, truncation_tol(cli)?)?.rank;
    let (value, verdict) = if args.local {
        let a = resolve_observable(args.obs_a, d1, args.spacing)?;
        let b = resolve_observable(args.obs_b, d2, args.spacing)?;
        let r = qcf_local_with_threshold(&a, &b, &file.state, &file.tps, threshold)?;
        (r.value, Some(r.verdict))
    } else {
        let a = resolve_observable(args.obs_a, d1 * d2, args.spacing)?;
        let b = resolve_observable(args.obs_b, d1 * d2, args.spacing)?;
        (qcf(&a, &b, &file.state)?, None)
    };
    let verdict_name = |v: Option<Verdict>| match v {
        Some(Verdict::EntangledWitnessed) => "entangled-witnessed",
        Some(Verdict::Inconclusive) => "inconclusive",
        None => "not-local",
    };
    match cli.format {
        Format::Csv => csv_text(
            &["re", "im", "witness_threshold", "verdict", "schmidt_rank"],
            &[vec![
                format_f64(value.re),
                format_f64(value.im),
                format_f64(threshold),
                verdict_name(verdict).to_string(),
                rank.to_string(),
            ]],
        ),
        Format::Json => {
            let manifest = RunManifest::new(
                cli,
                "qcf",
                json!({
                    "state": path_param(args.state),
                    "tps": args.tps.map(path_param),
                    "obs_a": args.obs_a,
                    "obs_b": args.obs_b,
                    "local": args.local,
                    "spacing": args.spacing,
                }),
            );
            Ok(report(
                &manifest,
                QcfResult {
                    value: [value.re, value.im],
                    local: args.local,
                    witness_threshold: threshold,
                    verdict,
                    schmidt_rank: rank,
                },
            ))
        }
    }
}

struct DemoArgs<'a> {
    d: usize,
    sigma1: f64,
    sigma2: f64,
    sep: f64,
    samples: usize,
    hbar: f64,
    sweep: Option<&'a str>,
}

impl DemoArgs<'_> {
    fn parameters(&self) -> Value {
        json!({
            "d": self.d,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "sep": self.sep,
            "samples": self.samples,
            "hbar": self.hbar,
            "sweep": self.sweep,
        })
    }
}

/// Half-width of the grid: eight widths past the widest profile and the
/// outer lobe of the double gaussian.
pub fn coords_half_width(sigma1: f64, sigma2: f64, sep: f64) -> f64 {
    (8.0 * sigma1.max(sigma2)).max(sep + 8.0 * sigma1)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordsReport {
    pub d: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub separation: f64,
    /// Gaussians of widths σ1 and σ2.
    pub gaussian: SumDiffReport,
    /// Both factors of width σ1.
    pub equal_width: SumDiffReport,
    /// Two-lobed profile against a σ1 gaussian.
    pub double_gaussian: SumDiffReport,
    /// Odd profile of width σ1 against a σ2 gaussian.
    pub odd: SumDiffReport,
}

/// Runs the coordinate demo for one parameter point.
pub fn coords_demo(
    d: usize,
    sigma1: f64,
    sigma2: f64,
    sep: f64,
    tol: f64,
) -> crate::Result<CoordsReport> {
    if d.is_multiple_of(2) {
        return Err(Error::EvenGrid { d });
    }
    let half_width = coords_half_width(sigma1, sigma2, sep);
    let grid = Grid::spanning(d, half_width)?;
    let f = gaussian_profile(grid, 0.0, sigma1)?;
    let g = gaussian_profile(grid, 0.0, sigma2)?;
    Ok(CoordsReport {
        d,
        half_width,
        spacing: grid.spacing,
        sigma1,
        sigma2,
        separation: sep,
        gaussian: demo_sum_diff_with_tol(&f, &g, tol)?,
        equal_width: demo_sum_diff_with_tol(&f, &f, tol)?,
        double_gaussian: demo_sum_diff_with_tol(
            &double_gaussian_profile(grid, sep, sigma1)?,
            &f,
            tol,
        )?,
        odd: demo_sum_diff_with_tol(&odd_profile(grid, sigma1)?, &g, tol)?,
    })
}

fn parse_sweep(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::new(
            exit::PARSE,
            format!("--sweep expects START:END:N, got '{text}'"),
        )
    };
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, n] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.parse().map_err(|_| bad())?;
    let end: f64 = end.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    let mut points: Vec<f64> = if n == 1 {
        vec![start]
    } else {
        (0..n)
            .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
            .collect()
    };
    points.sort_by(f64::total_cmp);
    Ok(points)
}

#[derive(Serialize)]
struct SweepRow {
    param: f64,
    rank_ab: usize,
    qcf_ab: f64,
    variance_diff: f64,
}

#[derive(Serialize)]
struct CoordsResult {
    #[serde(flatten)]
    point: CoordsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<SweepRow>>,
}

fn cmd_demo_coords(
    cli: &Cli,
    args: &DemoArgs<'_>,
    warnings: &mut Vec<String>,
) -> Result<String, CliError> {
    if args.d.is_multiple_of(2) {
        return Err(CliError::new(
            exit::GRID,
            format!(
                "--d {} is even; the coordinate demo needs an odd grid so that 2 is invertible modulo d",
                args.d
            ),
        ));
    }
    let tol = truncation_tol(cli)?;
    let point = coords_demo(args.d, args.sigma1, args.sigma2, args.sep, tol)?;
    for r in [
        &point.gaussian,
        &point.equal_width,
        &point.double_gaussian,
        &point.odd,
    ] {
        warnings.extend(r.warnings.iter().cloned());
    }
    warnings.dedup();

    let sweep = match args.sweep {
        None => None,
        Some(text) => {
            let params = parse_sweep(text)?;
            let rows = map_indexed(params.len(), execution(cli), |k| {
                let s2 = params[k];
                let half_width = coords_half_width(args.sigma1, s2, args.sep);
                let grid = Grid::spanning(args.d, half_width)?;
                let f = gaussian_profile(grid, 0.0, args.sigma1)?;
                let g = gaussian_profile(grid, 0.0, s2)?;
                let r = demo_sum_diff_with_tol(&f, &g, tol)?;
                Ok(SweepRow {
                    param: s2,
                    rank_ab: r.rank_ab,
                    qcf_ab: r.qcf_ab,
                    variance_diff: r.variance_diff,
                })
            });
            Some(rows.into_iter().collect::<crate::Result<Vec<_>>>()?)
        }
    };

    match cli.format {
        Format::Csv => {
            let rows = sweep.unwrap_or_else(|| {
                vec![SweepRow {
                    param: args.sigma2,
                    rank_ab: point.gaussian.rank_ab,
                    qcf_ab: point.gaussian.qcf_ab,
                    variance_diff: point.gaussian.variance_diff,
                }]
            });
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        format_f64(r.param),
                        r.rank_ab.to_string(),
                        format_f64(r.qcf_ab),
                        format_f64(r.variance_diff),
                    ]
                })
                .collect();
            csv_text(&["param", "rank_ab", "qcf_ab", "variance_diff"], &rows)
        }
        Format::Json => {
            let manifest = RunManifest::new(cli, "demo coords", args.parameters());
            Ok(report(&manifest, CoordsResult { point, sweep }))
        }
    }
}

fn cmd_demo_spins(cli: &Cli, args: &DemoArgs<'_>) -> Result<String, CliError> {
    let cfg = SpinConfig::new(args.hbar)?;
    match cli.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = spin_samples(cfg, args.samples, cli.seed, execution(cli))?
                .iter()
                .map(|s| {
                    vec![
                        s.sample.to_string(),
                        format_f64(s.residual),
                        format_f64(s.qcf_value),
                    ]
                })
                .collect();
            csv_text(&["sample", "residual", "qcf_value"], &rows)
        }
        Format::Json => {
            let r: SpinReport = demo_spins(cfg, args.samples, cli.seed, execution(cli))?;
            let manifest = RunManifest::new(cli, "demo spins", args.parameters());
            Ok(report(&manifest, r))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshCase {
    pub value: f64,
    pub grid_value: f64,
    pub oracle: f64,
    pub settings: ChshSettings,
}

fn chsh_case(psi: &StateVector) -> crate::Result<ChshCase> {
    let m = chsh_max(psi)?;
    Ok(ChshCase {
        value: m.value,
        grid_value: m.grid_value,
        oracle: chsh_oracle(psi)?,
        settings: m.settings,
    })
}

#[derive(Serialize)]
struct RandomChshSummary {
    samples: usize,
    min_second_coefficient: f64,
    min_value: Option<f64>,
    max_oracle_gap: f64,
    violations: usize,
}

#[derive(Serialize)]
struct BellDemo {
    bell_state: ChshCase,
    /// `ψ_{++}` written in the product coordinates of the `χ` structure.
    chi_product_state: ChshCase,
    random: RandomChshSummary,
}

fn cmd_demo_bell(cli: &Cli, args: &DemoArgs<'_>) -> Result<String, CliError> {
    let samples = map_indexed(args.samples, execution(cli), |i| {
        let psi = random_entangled_state(cli.seed, i as u64, BELL_DEMO_MIN_SECOND)?;
        Ok((chsh_max(&psi)?.value, chsh_oracle(&psi)?))
    })
    .into_iter()
    .collect::<crate::Result<Vec<(f64, f64)>>>()?;

    match cli.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = samples
                .iter()
                .enumerate()
                .map(|(i, (v, o))| vec![i.to_string(), format_f64(*v), format_f64(*o)])
                .collect();
            csv_text(&["sample", "value", "oracle"], &rows)
        }
        Format::Json => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let bell = StateVector::new(crate::ComplexVector::from_real(&[s, 0.0, 0.0, s])?)?;
            let chi = chi_basis(SpinConfig::default())?;
            let coords = chi
                .tps
                .to_product_coords(StateVector::basis(4, 0).vector())?;
            let chi_state = StateVector::normalized(coords)?;
            let random = RandomChshSummary {
                samples: samples.len(),
                min_second_coefficient: BELL_DEMO_MIN_SECOND,
                min_value: samples.iter().map(|p| p.0).reduce(f64::min),
                max_oracle_gap: samples
                    .iter()
                    .map(|(v, o)| (v - o).abs())
                    .fold(0.0, f64::max),
                violations: samples.iter().filter(|p| p.0 > 2.0).count(),
            };
            let manifest = RunManifest::new(cli, "demo bell", args.parameters());
            Ok(report(
                &manifest,
                BellDemo {
                    bell_state: chsh_case(&bell)?,
                    chi_product_state: chsh_case(&chi_state)?,
                    random,
                },
            ))
        }
    }
}

fn named_bijection(name: &str, dims: (usize, usize)) -> Result<IndexBijection, CliError> {
    let (d1, d2) = dims;
    match name {
        "identity" => Ok(IndexBijection::identity(d1, d2)?),
        "swap" => Ok(IndexBijection::swap(d1, d2)?),
        "sumdiff" => {
            if d1 != d2 {
                return Err(CliError::new(
                    exit::DIMENSION,
                    format!("sumdiff needs equal factor dimensions, got {d1}x{d2}"),
                ));
            }
            Ok(IndexBijection::sum_diff(d1)?)
        }
        path => {
            let p = Path::new(path);
            if !p.is_file() {
                return Err(CliError::new(
                    exit::FAILURE,
                    format!("'{path}' is neither sumdiff, swap, identity nor a readable file"),
                ));
            }
            let bij = parse_bijection(&read(p)?).map_err(|e| CliError::from(e).prefixed(p))?;
            if bij.source_dims() != dims {
                let (s1, s2) = bij.source_dims();
                return Err(CliError::new(
                    exit::DIMENSION,
                    format!("{path}: bijection source is {s1}x{s2} but the state is {d1}x{d2}"),
                ));
            }
            Ok(bij)
        }
    }
}

fn cmd_refactor(
    cli: &Cli,
    state: &Path,
    bijection: &str,
    warnings: &mut Vec<String>,
) -> Result<String, CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::new(
            exit::PARSE,
            "refactor writes a state file; only --format json is supported",
        ));
    }
    let mut file = load_state(state, None, warnings)?;
    let bij = named_bijection(bijection, file.dims())?;
    file.tps = relabeled(&file.tps, &bij)?;
    Ok(file.to_json())
}

fn relabeled(
    tps: &TensorProductStructure,
    bij: &IndexBijection,
) -> crate::Result<TensorProductStructure> {
    Ok(tps.relabel(bij)?.canonicalize())
}

#[derive(Serialize)]
struct ChshResult {
    #[serde(flatten)]
    case: ChshCase,
    schmidt_rank: usize,
    violates: bool,
}

fn cmd_chsh(
    cli: &Cli,
    state: &Path,
    tps: Option<&Path>,
    warnings: &mut Vec<String>,
) -> Result<String, CliError> {
    let file = load_state(state, tps, warnings)?;
    if file.dims() != (2, 2) {
        let (d1, d2) = file.dims();
        return Err(CliError::new(
            exit::DIMENSION,
            format!("chsh needs a 2x2 structure, got {d1}x{d2}"),
        ));
    }
    let coords = StateVector::normalized(file.tps.to_product_coords(file.state.vector())?)?;
    let case = chsh_case(&coords)?;
    let rank = schmidt(&file.state, &file.tps, truncation_tol(cli)?)?.rank;
    match cli.format {
        Format::Csv => csv_text(
            &["value", "oracle", "schmidt_rank"],
            &[vec![
                format_f64(case.value),
                format_f64(case.oracle),
                rank.to_string(),
            ]],
        ),
        Format::Json => {
            let manifest = RunManifest::new(
                cli,
                "chsh",
                json!({ "state": path_param(state), "tps": tps.map(path_param) }),
            );
            let violates = case.value > 2.0;
            Ok(report(
                &manifest,
                ChshResult {
                    case,
                    schmidt_rank: rank,
                    violates,
                },
            ))
        }
    }
}
