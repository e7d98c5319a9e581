//! Command-line front end: `sample`, `walk`, `density`, `validate` and `hist`.
//!
//! Exit codes: 0 success or pass, 1 validation failure, 2 usage error,
//! 3 domain or runtime error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{read_points_csv, write_sample_csv, write_trace_jsonl, write_walk_csv};
use crate::kernels::{
    ascending_ladder_potential, ball_hitting_density, descending_ladder_potential, double_density, green_halfspace,
    jump_density, overshoot_density, overshoot_density_conditioned, pcr_density_at, triple_density, Barrier, Direction,
    Face, Point, StableParams,
};
use crate::samplers::{overshoot_point, overshoot_point_conditioned, ConditionedOvershoot, RngStream};
use crate::validate::hist::{csv_err, fmt_f64};
use crate::validate::{run_suite, Histogram2D, Suite, SuiteOptions, ValidationReport};
use crate::walk::{batch_walk, Measure, Mode, Status, WalkConfig};

/// Environment variable read for the seed when no `--seed` is given.
pub const SEED_ENV: &str = "WOHS_SEED";
pub const DEFAULT_SEED: u64 = crate::validate::suites::DEFAULT_SEED;
pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_BINS: (usize, usize) = (60, 60);
pub const DEFAULT_XRANGE: (f64, f64) = (-1.0, 1.0);
pub const DEFAULT_YRANGE: (f64, f64) = (-8.0, 8.0);

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "wohs", version, about = "Walk-on-half-spaces Monte Carlo for stable processes in a slab")]
pub struct Cli {
    /// JSON object of flag values with flat keys named like the flags; flags on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw landing points of single barrier crossings
    Sample(SampleArgs),
    /// Run walks on half-spaces until the slab (-1,1)×R^{d-1} is entered
    Walk(WalkArgs),
    /// Evaluate a first-passage kernel at given points
    Density(DensityArgs),
    /// Run validation suites and print a JSON report
    Validate(ValidateArgs),
    /// Bin two columns of a sample or walk CSV into a 2D histogram
    Hist(HistArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Walk(_) => "walk",
            Command::Density(_) => "density",
            Command::Validate(_) => "validate",
            Command::Hist(_) => "hist",
        }
    }
}

/// Comma-separated list of reals, such as a point `2,0,0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coords(pub Vec<f64>);

impl FromStr for Coords {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(format!("{s:?} holds a non-finite value"));
        }
        Ok(Coords(v))
    }
}

/// Comma-separated list of dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Dims(pub Vec<usize>);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad dimension {t:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Dims)
    }
}

/// `LO,HI` range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range(pub f64, pub f64);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match Coords::from_str(s)?.0[..] {
            [lo, hi] if lo < hi => Ok(Range(lo, hi)),
            _ => Err(format!("expected LO,HI with LO < HI, got {s:?}")),
        }
    }
}

/// `NX,NY` bin counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bins(pub usize, pub usize);

impl FromStr for Bins {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match Dims::from_str(s)?.0[..] {
            [nx, ny] if nx > 0 && ny > 0 => Ok(Bins(nx, ny)),
            _ => Err(format!("expected NX,NY with positive counts, got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Plain,
    Conditioned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Collapsed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Down,
    Up,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Down => Direction::Down,
            DirectionArg::Up => Direction::Up,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Pcr,
    Triple,
    Double,
    Overshoot,
    OvershootCond,
    Green,
    Jump,
    LadderAsc,
    LadderDesc,
    Ball,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Stability index in (0, 2)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dimension; inferred from --start when omitted, else 2
    #[arg(long)]
    pub dim: Option<usize>,
    /// Starting point x1,x2,…; defaults to (2, 0, …, 0)
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<Coords>,
    /// Barrier level [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub barrier: Option<f64>,
    /// Crossing direction [default: down]
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Law of the crossing; conditioned needs alpha < 1 and a slab face as barrier [default: plain]
    #[arg(long, value_enum)]
    pub measure: Option<MeasureArg>,
    /// Number of draws [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed; falls back to WOHS_SEED
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: 1]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WalkArgs {
    /// Stability index in (0, 2)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dimension; inferred from --start when omitted, else 2
    #[arg(long)]
    pub dim: Option<usize>,
    /// Starting point x1,x2,… outside the closed slab; defaults to (2, 0, …, 0)
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<Coords>,
    /// Law of the walk [default: plain]
    #[arg(long, value_enum)]
    pub measure: Option<MeasureArg>,
    /// Transverse bookkeeping [default: collapsed]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Crossing cap per walk; defaults to 1e6 plain (required when alpha < 1), 1e4 conditioned
    #[arg(long)]
    pub max_crossings: Option<u64>,
    /// Number of walks [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed; falls back to WOHS_SEED
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: 1]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write every crossing event as JSON lines to this file
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// Kernel to evaluate
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Stability index in (0, 2)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dimension; inferred from the points when omitted
    #[arg(long)]
    pub dim: Option<usize>,
    /// Starting point
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<Coords>,
    /// Closest-reach point
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<Coords>,
    /// Undershoot or landing point
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<Coords>,
    /// Overshoot point
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<Coords>,
    /// Jump vector
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<Coords>,
    /// Barrier level [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub barrier: Option<f64>,
    /// Crossing direction [default: down]
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Ball centre
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<Coords>,
    /// Ball radius
    #[arg(long)]
    pub radius: Option<f64>,
    /// CSV of points, columns x1..xd, w1.., y1.., z1.., v1.., c1.. (centre), barrier, direction, radius
    #[arg(long, value_name = "FILE")]
    pub points: Option<PathBuf>,
    /// Output file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Suite name
    #[arg(long, conflicts_with = "all")]
    pub suite: Option<String>,
    /// Run every suite
    #[arg(long)]
    pub all: bool,
    /// Comma list of stability indices; combined with every --dim
    #[arg(long)]
    pub alpha: Option<Coords>,
    /// Comma list of dimensions [default: 2]
    #[arg(long)]
    pub dim: Option<Dims>,
    /// Sample size of each stochastic check [default: 100000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed; falls back to WOHS_SEED
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism
    #[arg(long)]
    pub workers: Option<usize>,
    /// Report file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HistArgs {
    /// Sample or walk CSV
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Bin counts NX,NY [default: 60,60]
    #[arg(long)]
    pub bins: Option<Bins>,
    /// Range of the x column [default: -1,1]
    #[arg(long, allow_hyphen_values = true)]
    pub xrange: Option<Range>,
    /// Range of the y column [default: -8,8]
    #[arg(long, allow_hyphen_values = true)]
    pub yrange: Option<Range>,
    /// Coordinate column on the x axis [default: y1]
    #[arg(long)]
    pub x_col: Option<String>,
    /// Coordinate column on the y axis [default: y2]
    #[arg(long)]
    pub y_col: Option<String>,
    /// Histogram CSV; marginals go to the same name with suffixes _mx and _my
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wohs: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
        Error::Domain(_) | Error::Convergence { .. } => EXIT_DOMAIN,
    }
}

fn command() -> clap::Command {
    Cli::command().mut_subcommands(|s| s.args_override_self(true))
}

fn parse_argv(argv: &[OsString]) -> std::result::Result<Cli, i32> {
    command().try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)).map_err(|e| {
        let _ = e.print();
        e.exit_code()
    })
}

/// Parses `argv`; values from a `--config` file are spliced in right after the
/// subcommand so that later command-line flags override them.
fn parse(argv: &[OsString]) -> std::result::Result<Cli, i32> {
    let first = parse_argv(argv)?;
    let Some(path) = first.config.as_deref() else {
        return Ok(first);
    };
    let tokens = config_tokens(path).map_err(|e| {
        eprintln!("wohs: {e}");
        exit_code(&e)
    })?;
    let name = first.command.name();
    let mut pos = None;
    let mut i = 1;
    while i < argv.len() {
        if argv[i] == "--config" {
            i += 2;
            continue;
        }
        if argv[i] == name {
            pos = Some(i);
            break;
        }
        i += 1;
    }
    let pos = pos.expect("clap matched the subcommand");
    let spliced: Vec<OsString> =
        argv[..=pos].iter().cloned().chain(tokens).chain(argv[pos + 1..].iter().cloned()).collect();
    parse_argv(&spliced)
}

fn config_scalar(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s.clone()),
        other => Err(Error::Usage(format!("unsupported config value {other}"))),
    }
}

/// Turns a flat JSON object into `--key=value` tokens.
pub fn config_tokens(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value.as_object().ok_or_else(|| Error::Usage("config file must hold a JSON object".into()))?;
    let mut tokens = Vec::new();
    for (key, v) in obj {
        let key = key.replace('_', "-");
        if key == "config" {
            return Err(Error::Usage("config files cannot nest".into()));
        }
        let value = match v {
            serde_json::Value::Bool(true) => {
                tokens.push(format!("--{key}").into());
                continue;
            }
            serde_json::Value::Bool(false) | serde_json::Value::Null => continue,
            serde_json::Value::Array(items) => items.iter().map(config_scalar).collect::<Result<Vec<_>>>()?.join(","),
            other => config_scalar(other)?,
        };
        tokens.push(format!("--{key}={value}").into());
    }
    Ok(tokens)
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Walk(a) => cmd_walk(a),
        Command::Density(a) => cmd_density(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Hist(a) => cmd_hist(a),
    }
}

/// Seed precedence: flag or config, then `WOHS_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|e| Error::Usage(format!("{SEED_ENV}={v:?} is not a seed: {e}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn params_and_start(alpha: Option<f64>, dim: Option<usize>, start: Option<Coords>) -> Result<(StableParams, Point)> {
    let alpha = alpha.ok_or_else(|| Error::Usage("--alpha is required".into()))?;
    let dim = match (dim, &start) {
        (Some(d), Some(s)) if s.0.len() != d => {
            return Err(Error::Usage(format!("--start has {} coordinates but --dim is {d}", s.0.len())))
        }
        (Some(d), _) => d,
        (None, Some(s)) => s.0.len(),
        (None, None) => 2,
    };
    let params = StableParams::new(alpha, dim)?;
    let start = start.map_or_else(|| Point::on_axis(2.0, dim), |s| Point::from_coords(&s.0));
    Ok((params, start))
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::Usage("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Serialize)]
struct SampleLine {
    sample_id: usize,
    coords: Vec<f64>,
    weight: f64,
}

type Draw = Box<dyn Fn(&mut RngStream) -> Result<(Point, f64)> + Send + Sync>;

fn cmd_sample(a: SampleArgs) -> Result<i32> {
    let (params, start) = params_and_start(a.alpha, a.dim, a.start)?;
    let barrier =
        Barrier { level: a.barrier.unwrap_or(1.0), direction: a.direction.unwrap_or(DirectionArg::Down).into() };
    let seed = resolve_seed(a.seed)?;
    let draw: Draw = match a.measure.unwrap_or(MeasureArg::Plain) {
        MeasureArg::Plain => Box::new(move |rng| Ok((overshoot_point(&start, &barrier, &params, rng)?, 1.0))),
        MeasureArg::Conditioned => {
            ConditionedOvershoot::new(params.alpha())?;
            let face = match barrier.direction {
                Direction::Down if barrier.level == 1.0 => Face::Plus,
                Direction::Up if barrier.level == -1.0 => Face::Minus,
                _ => {
                    return Err(Error::Usage(
                        "the conditioned measure crosses a slab face: use --barrier 1 --direction down \
                         or --barrier -1 --direction up"
                            .into(),
                    ))
                }
            };
            let exponent = 1.0 - params.alpha();
            Box::new(move |rng| {
                let y = overshoot_point_conditioned(&start, face, &params, rng)?;
                let weight = (y.first.abs() / start.first.abs()).powf(exponent);
                Ok((y, weight))
            })
        }
    };
    let n = a.n.unwrap_or(DEFAULT_N);
    let draws = in_pool(a.workers.unwrap_or(1), || {
        (0..n).into_par_iter().map(|i| draw(&mut RngStream::new(seed, i as u64))).collect::<Result<Vec<_>>>()
    })??;
    let (points, weights): (Vec<Point>, Vec<f64>) = draws.into_iter().unzip();
    let mut w = sink(a.out.as_deref())?;
    match a.format.unwrap_or(Format::Csv) {
        Format::Csv => write_sample_csv(&points, &weights, &mut w)?,
        Format::Jsonl => {
            for (i, (p, wt)) in points.iter().zip(&weights).enumerate() {
                serde_json::to_writer(&mut w, &SampleLine { sample_id: i, coords: p.coords(), weight: *wt })?;
                w.write_all(b"\n")?;
            }
        }
    }
    w.flush()?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WalkLine {
    sample_id: usize,
    status: Status,
    n_crossings: u64,
    weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<f64>>,
}

fn cmd_walk(a: WalkArgs) -> Result<i32> {
    let (params, start) = params_and_start(a.alpha, a.dim, a.start)?;
    let mut cfg = WalkConfig::new(params, start).record_trace(a.trace.is_some());
    if let Some(m) = a.measure {
        cfg = cfg.measure(match m {
            MeasureArg::Plain => Measure::Plain,
            MeasureArg::Conditioned => Measure::Conditioned,
        });
    }
    if let Some(m) = a.mode {
        cfg = cfg.mode(match m {
            ModeArg::Full => Mode::FullTrace,
            ModeArg::Collapsed => Mode::Collapsed,
        });
    }
    if let Some(cap) = a.max_crossings {
        cfg = cfg.max_crossings(cap);
    }
    let seed = resolve_seed(a.seed)?;
    let n = a.n.unwrap_or(DEFAULT_N);
    let batch = batch_walk(&cfg, n, a.workers.unwrap_or(1), seed)?;
    if !batch.is_complete() {
        eprintln!("wohs: memory allowed only {} of {} walks; writing the partial batch", batch.results.len(), n);
    }
    let mut w = sink(a.out.as_deref())?;
    match a.format.unwrap_or(Format::Csv) {
        Format::Csv => write_walk_csv(&batch.results, params.dim(), &mut w)?,
        Format::Jsonl => {
            for (i, r) in batch.results.iter().enumerate() {
                let line = WalkLine {
                    sample_id: i,
                    status: r.status,
                    n_crossings: r.n_crossings,
                    weight: r.weight,
                    coords: r.final_point.as_ref().map(Point::coords),
                };
                serde_json::to_writer(&mut w, &line)?;
                w.write_all(b"\n")?;
            }
        }
    }
    w.flush()?;
    if let Some(path) = a.trace.as_deref() {
        write_trace_jsonl(&batch.results, BufWriter::new(File::create(path)?))?;
    }
    Ok(EXIT_OK)
}

/// Arguments of one kernel evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointRow {
    pub x: Option<Vec<f64>>,
    pub w: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub z: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
    pub barrier: Option<f64>,
    pub direction: Option<Direction>,
    pub radius: Option<f64>,
}

impl PointRow {
    /// Fills every missing field from `defaults`.
    fn or(self, defaults: &PointRow) -> PointRow {
        PointRow {
            x: self.x.or_else(|| defaults.x.clone()),
            w: self.w.or_else(|| defaults.w.clone()),
            y: self.y.or_else(|| defaults.y.clone()),
            z: self.z.or_else(|| defaults.z.clone()),
            v: self.v.or_else(|| defaults.v.clone()),
            center: self.center.or_else(|| defaults.center.clone()),
            barrier: self.barrier.or(defaults.barrier),
            direction: self.direction.or(defaults.direction),
            radius: self.radius.or(defaults.radius),
        }
    }

    fn dim(&self) -> Option<usize> {
        [&self.x, &self.w, &self.y, &self.z, &self.v, &self.center].into_iter().flatten().map(Vec::len).next()
    }
}

/// Evaluates `kernel` at one row; the barrier defaults to level 0, direction down.
pub fn eval_kernel(kernel: KernelArg, params: &StableParams, row: &PointRow) -> Result<f64> {
    let name = format!("{kernel:?}").to_lowercase();
    let need = |label: &str, v: &Option<Vec<f64>>| {
        v.as_deref().map(Point::from_coords).ok_or_else(|| Error::Usage(format!("kernel {name} needs point --{label}")))
    };
    let barrier = Barrier { level: row.barrier.unwrap_or(0.0), direction: row.direction.unwrap_or(Direction::Down) };
    match kernel {
        KernelArg::Pcr => pcr_density_at(&need("x", &row.x)?, &need("y", &row.y)?, &barrier, params),
        KernelArg::Triple => triple_density(
            &need("x", &row.x)?,
            &need("w", &row.w)?,
            &need("y", &row.y)?,
            &need("z", &row.z)?,
            &barrier,
            params,
        ),
        KernelArg::Double => {
            double_density(&need("x", &row.x)?, &need("y", &row.y)?, &need("z", &row.z)?, &barrier, params)
        }
        KernelArg::Overshoot => overshoot_density(&need("x", &row.x)?, &need("z", &row.z)?, &barrier, params),
        KernelArg::OvershootCond => {
            let x = need("x", &row.x)?;
            let face = Face::facing(x.first)
                .ok_or_else(|| Error::Domain("conditioned overshoot needs x outside the closed slab".into()))?;
            overshoot_density_conditioned(&x, &need("y", &row.y)?, face, params)
        }
        KernelArg::Green => green_halfspace(&need("x", &row.x)?, &need("y", &row.y)?, &barrier, params),
        KernelArg::Jump => jump_density(&need("v", &row.v)?.coords(), params),
        KernelArg::LadderAsc => ascending_ladder_potential(&need("x", &row.x)?, &need("z", &row.z)?, params),
        KernelArg::LadderDesc => descending_ladder_potential(&need("x", &row.x)?, &need("y", &row.y)?, params),
        KernelArg::Ball => {
            let radius = row.radius.ok_or_else(|| Error::Usage("kernel ball needs --radius".into()))?;
            ball_hitting_density(
                &need("x", &row.x)?,
                &need("y", &row.y)?,
                &need("center", &row.center)?,
                radius,
                params,
            )
        }
    }
}

/// Reads kernel arguments from a CSV; malformed cells become per-row errors.
pub fn read_point_rows<R: io::Read>(r: R) -> Result<Vec<Result<PointRow>>> {
    enum Col {
        Coord(usize, usize),
        Barrier,
        Direction,
        Radius,
    }
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let mut cols = Vec::new();
    for h in header.iter() {
        let h = h.trim();
        let col = match h {
            "barrier" => Col::Barrier,
            "direction" => Col::Direction,
            "radius" => Col::Radius,
            _ => {
                let (slot, rest) = h.split_at(h.find(|c: char| c.is_ascii_digit()).unwrap_or(h.len()));
                let slot = ["x", "w", "y", "z", "v", "c"].iter().position(|s| *s == slot);
                match (slot, rest.parse::<usize>()) {
                    (Some(s), Ok(k)) if k >= 1 => Col::Coord(s, k - 1),
                    _ => return Err(Error::Usage(format!("unknown points column {h:?}"))),
                }
            }
        };
        cols.push(col);
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let row = (|| {
            let mut coords: [Vec<Option<f64>>; 6] = Default::default();
            let mut row = PointRow::default();
            for (col, cell) in cols.iter().zip(record.iter()) {
                let cell = cell.trim();
                if cell.is_empty() {
                    continue;
                }
                let num = || cell.parse::<f64>().map_err(|e| Error::Domain(format!("bad number {cell:?}: {e}")));
                match col {
                    Col::Coord(s, k) => {
                        if coords[*s].len() <= *k {
                            coords[*s].resize(k + 1, None);
                        }
                        coords[*s][*k] = Some(num()?);
                    }
                    Col::Barrier => row.barrier = Some(num()?),
                    Col::Radius => row.radius = Some(num()?),
                    Col::Direction => {
                        row.direction = Some(match cell {
                            "down" => Direction::Down,
                            "up" => Direction::Up,
                            _ => return Err(Error::Domain(format!("direction must be down or up, got {cell:?}"))),
                        })
                    }
                }
            }
            let mut points = coords.into_iter().map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.into_iter()
                        .collect::<Option<Vec<f64>>>()
                        .map(Some)
                        .ok_or_else(|| Error::Domain("point has a missing coordinate".into()))
                }
            });
            let mut next = || points.next().expect("six slots");
            row.x = next()?;
            row.w = next()?;
            row.y = next()?;
            row.z = next()?;
            row.v = next()?;
            row.center = next()?;
            Ok(row)
        })();
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Serialize)]
struct DensityRow {
    row_id: usize,
    value: String,
    error: String,
}

fn cmd_density(a: DensityArgs) -> Result<i32> {
    let kernel = a.kernel.ok_or_else(|| Error::Usage("--kernel is required".into()))?;
    let alpha = a.alpha.ok_or_else(|| Error::Usage("--alpha is required".into()))?;
    let defaults = PointRow {
        x: a.x.map(|c| c.0),
        w: a.w.map(|c| c.0),
        y: a.y.map(|c| c.0),
        z: a.z.map(|c| c.0),
        v: a.v.map(|c| c.0),
        center: a.center.map(|c| c.0),
        barrier: a.barrier,
        direction: a.direction.map(Into::into),
        radius: a.radius,
    };
    let rows = match a.points.as_deref() {
        Some(path) => read_point_rows(File::open(path)?)?,
        None => vec![Ok(PointRow::default())],
    };
    if rows.is_empty() {
        return Err(Error::Domain("points file has no rows".into()));
    }
    let mut out = csv::Writer::from_writer(sink(a.out.as_deref())?);
    let mut first_error = None;
    let mut ok = 0;
    for (row_id, row) in rows.into_iter().enumerate() {
        let value = row.and_then(|r| {
            let r = r.or(&defaults);
            let dim = a.dim.or(r.dim()).ok_or_else(|| Error::Usage("pass --dim or at least one point".into()))?;
            eval_kernel(kernel, &StableParams::new(alpha, dim)?, &r)
        });
        let line = match value {
            Ok(v) => {
                ok += 1;
                DensityRow { row_id, value: fmt_f64(v), error: String::new() }
            }
            Err(e) => {
                let line = DensityRow { row_id, value: String::new(), error: e.to_string() };
                first_error.get_or_insert(e);
                line
            }
        };
        out.serialize(line).map_err(csv_err)?;
    }
    out.flush()?;
    match first_error {
        Some(e) if ok == 0 => Err(e),
        _ => Ok(EXIT_OK),
    }
}

#[derive(Serialize)]
struct CombinedReport {
    pass: bool,
    reports: Vec<ValidationReport>,
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let suites: Vec<Suite> = match (&a.suite, a.all) {
        (Some(name), _) => vec![name.parse()?],
        (None, true) => Suite::ALL.to_vec(),
        (None, false) => return Err(Error::Usage("pass --suite NAME or --all".into())),
    };
    let params = match (a.alpha, a.dim) {
        (None, None) => None,
        (None, Some(_)) => return Err(Error::Usage("--dim needs --alpha".into())),
        (Some(alphas), dims) => {
            let dims = dims.map_or(vec![2], |d| d.0);
            Some(alphas.0.iter().flat_map(|&al| dims.iter().map(move |&d| (al, d))).collect())
        }
    };
    let defaults = SuiteOptions::default();
    let opts = SuiteOptions {
        params,
        seed: resolve_seed(a.seed)?,
        n: a.n.unwrap_or(defaults.n),
        workers: a.workers.unwrap_or(defaults.workers),
    };
    let mut reports = Vec::new();
    for suite in suites {
        let report = run_suite(suite, &opts)?;
        eprintln!("{suite}: {}", if report.pass { "pass" } else { "FAIL" });
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass);
    let json = if reports.len() == 1 {
        reports[0].to_json()?
    } else {
        serde_json::to_string_pretty(&CombinedReport { pass, reports })?
    };
    let mut w = sink(a.out.as_deref())?;
    writeln!(w, "{json}")?;
    w.flush()?;
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn column_index(name: &str) -> Result<usize> {
    name.strip_prefix('y')
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|k| *k >= 1)
        .map(|k| k - 1)
        .ok_or_else(|| Error::Usage(format!("histogram columns are named y1, y2, …; got {name:?}")))
}

/// `hist.csv` → `hist_mx.csv`.
pub fn marginal_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    out.with_file_name(name)
}

fn cmd_hist(a: HistArgs) -> Result<i32> {
    let input = a.input.ok_or_else(|| Error::Usage("--in is required".into()))?;
    let out = a.out.ok_or_else(|| Error::Usage("--out is required".into()))?;
    let ix = column_index(a.x_col.as_deref().unwrap_or("y1"))?;
    let iy = column_index(a.y_col.as_deref().unwrap_or("y2"))?;
    let Bins(nx, ny) = a.bins.unwrap_or(Bins(DEFAULT_BINS.0, DEFAULT_BINS.1));
    let Range(x0, x1) = a.xrange.unwrap_or(Range(DEFAULT_XRANGE.0, DEFAULT_XRANGE.1));
    let Range(y0, y1) = a.yrange.unwrap_or(Range(DEFAULT_YRANGE.0, DEFAULT_YRANGE.1));
    let unreadable = |e: Error| Error::Domain(format!("cannot read {}: {e}", input.display()));
    let records = read_points_csv(File::open(&input).map_err(|e| unreadable(e.into()))?).map_err(unreadable)?;
    if records.is_empty() {
        return Err(Error::Domain(format!("{} holds no points", input.display())));
    }
    let dim = records[0].coords.len();
    if ix >= dim || iy >= dim {
        return Err(Error::Usage(format!("input has only {dim} coordinate columns")));
    }
    let mut h = Histogram2D::new((x0, x1), (y0, y1), nx, ny)?;
    for r in &records {
        h.add_weighted(r.coords[ix], r.coords[iy], r.weight);
    }
    h.write_csv(BufWriter::new(File::create(&out)?))?;
    h.write_marginal_csv(0, BufWriter::new(File::create(marginal_path(&out, "_mx"))?))?;
    h.write_marginal_csv(1, BufWriter::new(File::create(marginal_path(&out, "_my"))?))?;
    eprintln!("binned {} points, {} clipped", h.total(), h.clipped());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsers() {
        assert_eq!("2,-0.5".parse::<Coords>().unwrap(), Coords(vec![2.0, -0.5]));
        assert!("2,x".parse::<Coords>().is_err());
        assert_eq!("-1,1".parse::<Range>().unwrap(), Range(-1.0, 1.0));
        assert!("1,-1".parse::<Range>().is_err());
        assert_eq!("60,40".parse::<Bins>().unwrap(), Bins(60, 40));
        assert!("0,4".parse::<Bins>().is_err());
    }

    #[test]
    fn config_values_become_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"alpha": 1.5, "start": [2, 0], "max_crossings": 10, "all": true, "x_col": "y1"}"#)
            .unwrap();
        let t: Vec<String> = config_tokens(&path).unwrap().into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(t, ["--all", "--alpha=1.5", "--max-crossings=10", "--start=2,0", "--x-col=y1"]);
        std::fs::write(&path, "[1]").unwrap();
        assert!(config_tokens(&path).is_err());
    }

    #[test]
    fn command_line_overrides_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"alpha": 0.5, "n": 7}"#).unwrap();
        let argv: Vec<OsString> =
            ["wohs", "--config", path.to_str().unwrap(), "walk", "--alpha", "1.5"].iter().map(Into::into).collect();
        let Command::Walk(w) = parse(&argv).unwrap().command else { panic!("walk expected") };
        assert_eq!(w.alpha, Some(1.5));
        assert_eq!(w.n, Some(7));
    }

    #[test]
    fn marginal_paths() {
        assert_eq!(marginal_path(Path::new("/tmp/h.csv"), "_mx"), PathBuf::from("/tmp/h_mx.csv"));
        assert_eq!(marginal_path(Path::new("h"), "_my"), PathBuf::from("h_my"));
    }

    #[test]
    fn kernel_rows() {
        let p = StableParams::new(1.0, 2).unwrap();
        let row = PointRow { x: Some(vec![1.0, 0.0]), z: Some(vec![-1.0, 0.0]), ..Default::default() };
        let v = eval_kernel(KernelArg::Overshoot, &p, &row).unwrap();
        assert!((v - 0.025_330_295_910_584_444).abs() < 1e-12);
        assert!(matches!(eval_kernel(KernelArg::Triple, &p, &row), Err(Error::Usage(_))));
        let rows = read_point_rows("x1,x2,y1,y2,direction\n2,0,0.5,0,down\n2,0,bad,0,\n".as_bytes()).unwrap();
        assert_eq!(rows[0].as_ref().unwrap().y, Some(vec![0.5, 0.0]));
        assert!(rows[1].is_err());
        assert!(read_point_rows("q1\n1\n".as_bytes()).is_err());
    }
}
