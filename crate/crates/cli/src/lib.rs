//! `steklov` command-line front end.
//!
//! Every subcommand runs in binary64 or in double-word arithmetic
//! (`--precision extended`), writes one table as CSV or JSON and can also
//! draw it as an SVG chart. Exit codes: 0 on success, 2 when the result was
//! computed but is not converged or not certified, 1 on usage or compute
//! errors.

pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use steklov_core::driver::{
    concentric_exact, converge_sigma, default_cert_tol, default_schedule, example_ratio_grid, sweep, table1,
    validate_section, validate_sigma_with_tol, ConvergenceReport, ConvergenceStatus, SweepGrid, SweepOptions,
    ValidationReport, DEFAULT_ETA_TOL, DEFAULT_K_MAX,
};
use steklov_core::quadrature::default_rel_tol;
use steklov_core::rayleigh::truncated_eigenfunction;
use steklov_core::{derive_frame, DoubleDouble, Precision, Real, ShellConfig};

use crate::svg::{Axes, Series};
use crate::table::{Cell, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "steklov", version, about = "First Steklov-Dirichlet eigenvalue of eccentric spherical shells")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow N = 2^k until the eigenvalue settles; prints the k, N, sigma, eta trace.
    Eigen(Opts),
    /// Certify sigma with the Rayleigh-quotient gaps E(m, N).
    Validate(ValidateOpts),
    /// Run a grid of configurations (default: the 50-point t-ratio grid).
    Sweep(SweepOpts),
    /// Relative changes eta_k for the published convergence table layout.
    Table1(Common),
    /// The first `--rank` axisymmetric eigenvalues of one configuration.
    Modes(Opts),
    /// Series coefficients of the truncated eigenfunction.
    Eigenfunction(EigenfunctionOpts),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// binary64 or extended
    #[arg(long, default_value = "binary64", value_parser = parse_precision)]
    pub precision: Precision,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also draw the table as an SVG chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Dimension parameter: the shell lives in R^(n+2).
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value = "1")]
    pub r1: String,
    #[arg(long, default_value = "3")]
    pub r2: String,
    /// Distance between the centres.
    #[arg(long, conflicts_with = "t_ratio")]
    pub t: Option<String>,
    /// t / (r2 - r1).
    #[arg(long)]
    pub t_ratio: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long)]
    pub eta_tol: Option<String>,
    #[arg(long)]
    pub cert_tol: Option<String>,
    #[arg(long)]
    pub quad_tol: Option<String>,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub kmax: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateOpts {
    #[command(flatten)]
    pub opts: Opts,
    /// Validate against L_N of this size instead of the converged one.
    #[arg(long)]
    pub size: Option<usize>,
    /// Largest truncation m (default: N).
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub m_step: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepOpts {
    #[command(flatten)]
    pub opts: Opts,
    /// JSON object with arrays `n`, `r1`, `r2`, `t_ratio`, `rank`; missing
    /// keys fall back to the single-value flags and the 50-point grid.
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
    /// Also compute E(N, N) for rank-1 records.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EigenfunctionOpts {
    #[command(flatten)]
    pub opts: Opts,
    /// Truncation m (default: the converged N).
    #[arg(long)]
    pub size: Option<usize>,
}

fn parse_precision(s: &str) -> std::result::Result<Precision, String> {
    s.parse()
}

/// Whether the run produced a trustworthy result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Results were written, but did not converge, stopped at the rounding
    /// floor, or were not certified.
    Incomplete,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(Outcome::Complete) => 0,
        Ok(Outcome::Incomplete) => 2,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let precision = match &cli.command {
        Command::Eigen(o) | Command::Modes(o) => o.common.precision,
        Command::Validate(v) => v.opts.common.precision,
        Command::Sweep(s) => s.opts.common.precision,
        Command::Table1(c) => c.precision,
        Command::Eigenfunction(e) => e.opts.common.precision,
    };
    match precision {
        Precision::Binary64 => dispatch::<f64>(&cli.command),
        Precision::Extended => dispatch::<DoubleDouble>(&cli.command),
    }
}

fn dispatch<T: Real>(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Eigen(o) => eigen::<T>(o),
        Command::Validate(v) => validate::<T>(v),
        Command::Sweep(s) => run_sweep::<T>(s),
        Command::Table1(c) => run_table1::<T>(c),
        Command::Modes(o) => modes::<T>(o),
        Command::Eigenfunction(e) => eigenfunction::<T>(e),
    }
}

/// Scientific notation at the working precision, with a signed exponent
/// (`1.5e+0`) so CSV and JSON carry the same literal.
pub fn fmt<T: Real>(x: T) -> String {
    let s = x.to_sci(T::print_digits());
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') && !e.starts_with('+') => format!("{m}e+{e}"),
        _ => s,
    }
}

fn num<T: Real>(x: T) -> Cell {
    Cell::Num(fmt(x))
}

fn parse_value<T: Real>(flag: &str, s: &str) -> Result<T> {
    T::parse_decimal(s).ok_or_else(|| anyhow!("invalid value for --{flag}: `{s}` is not a number"))
}

fn tolerance<T: Real>(flag: &str, s: &Option<String>, default: T) -> Result<T> {
    let v = match s {
        Some(s) => parse_value::<T>(flag, s)?,
        None => default,
    };
    if !(v > T::zero()) {
        bail!("invalid value for --{flag}: tolerance must be positive");
    }
    Ok(v)
}

struct Tolerances<T> {
    eta: T,
    cert: T,
    quad: T,
}

impl Opts {
    fn tolerances<T: Real>(&self) -> Result<Tolerances<T>> {
        Ok(Tolerances {
            eta: tolerance("eta-tol", &self.eta_tol, T::lit(DEFAULT_ETA_TOL))?,
            cert: tolerance("cert-tol", &self.cert_tol, default_cert_tol::<T>())?,
            quad: tolerance("quad-tol", &self.quad_tol, default_rel_tol::<T>())?,
        })
    }

    fn radii<T: Real>(&self) -> Result<(T, T)> {
        Ok((parse_value("r1", &self.r1)?, parse_value("r2", &self.r2)?))
    }

    fn shell<T: Real>(&self) -> Result<ShellConfig<T>> {
        let (r1, r2) = self.radii::<T>()?;
        let cfg = match (&self.t, &self.t_ratio) {
            (Some(t), None) => ShellConfig::new(self.n, r1, r2, parse_value("t", t)?),
            (None, Some(r)) => ShellConfig::from_ratio(self.n, r1, r2, parse_value("t-ratio", r)?),
            _ => bail!("exactly one of --t or --t-ratio is required"),
        };
        Ok(cfg?)
    }

    fn check_rank(&self) -> Result<()> {
        if self.rank == 0 {
            bail!("invalid value for --rank: must be at least 1");
        }
        Ok(())
    }
}

fn write_svg(path: Option<&Path>, series: &[Series], axes: Axes) -> Result<()> {
    if let Some(p) = path {
        let text = svg::render(series, &axes)?;
        std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn status_outcome(status: ConvergenceStatus) -> Outcome {
    if status == ConvergenceStatus::Converged {
        Outcome::Complete
    } else {
        Outcome::Incomplete
    }
}

/// Convergence trace: `k,N,sigma,eta`.
pub fn convergence_table<T: Real>(report: &ConvergenceReport<T>) -> Table {
    let mut t = Table::new(&["k", "N", "sigma", "eta"]);
    for s in &report.steps {
        t.push(vec![Cell::Int(s.k as i64), Cell::Int(s.size as i64), num(s.sigma), Cell::opt_num(s.eta.map(fmt))]);
    }
    t
}

/// Validation gaps: `m,E`.
pub fn validation_table<T: Real>(report: &ValidationReport<T>) -> Table {
    let mut t = Table::new(&["m", "E"]);
    for &(m, e) in &report.gaps {
        t.push(vec![Cell::Int(m as i64), num(e)]);
    }
    t
}

fn eigen<T: Real>(o: &Opts) -> Result<Outcome> {
    o.check_rank()?;
    let tol = o.tolerances::<T>()?;
    let cfg = o.shell::<T>()?;
    if cfg.is_concentric() {
        if o.rank != 1 {
            bail!("rank > 1 has no closed form for the concentric shell (t = 0)");
        }
        let sigma = concentric_exact(cfg.n, cfg.r1, cfg.r2)?;
        let mut t = Table::new(&["k", "N", "sigma", "eta"]);
        t.push(vec![Cell::Empty, Cell::Empty, num(sigma), Cell::Empty]);
        t.emit(o.common.format, o.common.out.as_deref())?;
        eprintln!("sigma = {} (concentric closed form)", fmt(sigma));
        return Ok(Outcome::Complete);
    }
    let report = converge_sigma(&cfg, o.rank, tol.eta, o.kmax)?;
    convergence_table(&report).emit(o.common.format, o.common.out.as_deref())?;
    eprintln!("sigma = {} (N = {}, {})", fmt(report.sigma()), report.final_size(), report.status.as_str());
    let pts = report.steps.iter().filter_map(|s| s.eta.map(|e| (s.k as f64, e.to_f64_lossy()))).collect();
    write_svg(
        o.common.svg.as_deref(),
        &[Series { label: format!("t/(r2-r1) = {}", o.t_ratio.clone().unwrap_or_else(|| fmt(cfg.t_ratio()))), points: pts }],
        Axes { title: "Relative change of sigma".into(), x_label: "k (N = 2^k)".into(), y_label: "eta_k".into(), log_y: true },
    )?;
    Ok(status_outcome(report.status))
}

fn validate<T: Real>(v: &ValidateOpts) -> Result<Outcome> {
    let o = &v.opts;
    if o.rank != 1 {
        bail!("invalid value for --rank: validation covers the first eigenvalue only");
    }
    if v.m_step == 0 {
        bail!("invalid value for --m-step: must be at least 1");
    }
    let tol = o.tolerances::<T>()?;
    let cfg = o.shell::<T>()?;
    if cfg.is_concentric() {
        bail!("the concentric shell (t = 0) has a closed form; nothing to validate");
    }
    let (size, mut outcome, report) = match v.size {
        Some(0) => bail!("invalid value for --size: must be at least 1"),
        Some(size) => (size, Outcome::Complete, None),
        None => {
            let r = converge_sigma(&cfg, 1, tol.eta, o.kmax)?;
            (r.final_size(), status_outcome(r.status), Some(r))
        }
    };
    let m_max = v.m_max.unwrap_or(size);
    let schedule: Vec<usize> = if v.m_max.is_none() && v.m_step == 4 {
        default_schedule(size)
    } else {
        (1..=m_max / v.m_step).map(|j| j * v.m_step).collect()
    };
    if schedule.is_empty() {
        bail!("empty m schedule (--m-max {m_max} < --m-step {})", v.m_step);
    }
    let val = match &report {
        Some(r) => validate_sigma_with_tol(r, Some(&schedule), tol.cert, tol.quad)?,
        None => validate_section(&cfg, size, Some(&schedule), tol.cert, tol.quad)?,
    };
    validation_table(&val).emit(o.common.format, o.common.out.as_deref())?;
    let (m_best, e_best) = val
        .gaps
        .iter()
        .copied()
        .fold(None, |acc: Option<(usize, T)>, (m, e)| match acc {
            Some((_, b)) if b <= e => acc,
            _ => Some((m, e)),
        })
        .expect("nonempty schedule");
    eprintln!(
        "sigma = {} (N = {size}); min E = {} at m = {m_best}; {}",
        fmt(val.sigma_ref),
        fmt(e_best),
        if val.certified { "certified" } else { "not certified" }
    );
    if !val.certified {
        outcome = Outcome::Incomplete;
    }
    let pts = val.gaps.iter().map(|&(m, e)| (m as f64, e.to_f64_lossy())).collect();
    write_svg(
        o.common.svg.as_deref(),
        &[Series { label: format!("N = {size}"), points: pts }],
        Axes { title: "Rayleigh-quotient gap E(m, N)".into(), x_label: "m".into(), y_label: "E(m, N)".into(), log_y: true },
    )?;
    Ok(outcome)
}

/// Sweep records: `n,r1,r2,t_ratio,rank,sigma,final_N,eta_final,E_final,converged`.
pub fn sweep_table<T: Real>(records: &[steklov_core::driver::SweepRecord<T>]) -> Table {
    let mut t = Table::new(&["n", "r1", "r2", "t_ratio", "rank", "sigma", "final_N", "eta_final", "E_final", "converged"]);
    for r in records {
        t.push(vec![
            Cell::Int(r.n as i64),
            num(r.r1),
            num(r.r2),
            num(r.t_ratio),
            Cell::Int(r.rank as i64),
            Cell::opt_num(r.sigma.map(fmt)),
            Cell::Int(r.final_size as i64),
            Cell::opt_num(r.eta_final.map(fmt)),
            Cell::opt_num(r.e_final.map(fmt)),
            Cell::Bool(r.status == Some(ConvergenceStatus::Converged)),
        ]);
    }
    t
}

fn json_list<T: Real>(grid: &Value, key: &str) -> Result<Option<Vec<T>>> {
    let Some(v) = grid.get(key) else { return Ok(None) };
    let items = v.as_array().ok_or_else(|| anyhow!("grid file: `{key}` must be an array"))?;
    items
        .iter()
        .map(|x| {
            let s = match x {
                Value::Number(n) => n.to_string(),
                Value::String(s) => s.clone(),
                _ => bail!("grid file: `{key}` entries must be numbers"),
            };
            T::parse_decimal(&s).ok_or_else(|| anyhow!("grid file: `{key}` entry `{s}` is not a number"))
        })
        .collect::<Result<Vec<T>>>()
        .map(Some)
}

fn json_ints(grid: &Value, key: &str) -> Result<Option<Vec<u64>>> {
    let Some(v) = grid.get(key) else { return Ok(None) };
    let items = v.as_array().ok_or_else(|| anyhow!("grid file: `{key}` must be an array"))?;
    items
        .iter()
        .map(|x| x.as_u64().filter(|&k| k >= 1).ok_or_else(|| anyhow!("grid file: `{key}` entries must be positive integers")))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Grid from `--grid-file`, falling back to the single-value flags.
pub fn load_grid<T: Real>(s: &SweepOpts) -> Result<SweepGrid<T>> {
    let o = &s.opts;
    let (r1, r2) = o.radii::<T>()?;
    let flag_ratios = match (&o.t, &o.t_ratio) {
        (Some(_), _) => bail!("sweep takes --t-ratio (or a t_ratio list in --grid-file), not --t"),
        (None, Some(r)) => vec![parse_value("t-ratio", r)?],
        (None, None) => example_ratio_grid::<T>(),
    };
    let mut grid = SweepGrid { ns: vec![o.n], r1s: vec![r1], r2s: vec![r2], t_ratios: flag_ratios, ranks: vec![o.rank] };
    if let Some(path) = &s.grid_file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing grid file {}", path.display()))?;
        if !v.is_object() {
            bail!("grid file must hold a JSON object");
        }
        if let Some(ns) = json_ints(&v, "n")? {
            grid.ns = ns.into_iter().map(|k| u32::try_from(k)).collect::<std::result::Result<_, _>>()?;
        }
        if let Some(x) = json_list(&v, "r1")? {
            grid.r1s = x;
        }
        if let Some(x) = json_list(&v, "r2")? {
            grid.r2s = x;
        }
        if let Some(x) = json_list(&v, "t_ratio")? {
            grid.t_ratios = x;
        }
        if let Some(x) = json_ints(&v, "rank")? {
            grid.ranks = x.into_iter().map(|k| k as usize).collect();
        }
    }
    Ok(grid)
}

fn run_sweep<T: Real>(s: &SweepOpts) -> Result<Outcome> {
    let o = &s.opts;
    o.check_rank()?;
    let tol = o.tolerances::<T>()?;
    let grid = load_grid::<T>(s)?;
    let opts = SweepOptions { eta_tol: tol.eta, k_max: o.kmax, validate: s.validate, quad_tol: tol.quad };
    let records = sweep(&grid, &opts);
    sweep_table(&records).emit(o.common.format, o.common.out.as_deref())?;

    let mut series: Vec<Series> = Vec::new();
    for r in &records {
        let label = format!("n={} r1={} r2={} rank={}", r.n, r.r1.to_f64_lossy(), r.r2.to_f64_lossy(), r.rank);
        let point = r.sigma.map(|sg| (r.t_ratio.to_f64_lossy(), sg.to_f64_lossy()));
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.extend(point),
            None => series.push(Series { label, points: point.into_iter().collect() }),
        }
    }
    if !records.is_empty() {
        write_svg(
            o.common.svg.as_deref(),
            &series,
            Axes { title: "Steklov-Dirichlet eigenvalue".into(), x_label: "t/(r2-r1)".into(), y_label: "sigma".into(), log_y: false },
        )?;
    }

    let mut failed = 0;
    for r in &records {
        if let Some(e) = &r.error {
            failed += 1;
            eprintln!("n={} r1={} r2={} t_ratio={} rank={}: {e}", r.n, fmt(r.r1), fmt(r.r2), fmt(r.t_ratio), r.rank);
        }
    }
    if failed > 0 {
        bail!("{failed} of {} sweep points failed", records.len());
    }
    let all_converged = records.iter().all(|r| r.status == Some(ConvergenceStatus::Converged));
    Ok(if all_converged { Outcome::Complete } else { Outcome::Incomplete })
}

fn run_table1<T: Real>(c: &Common) -> Result<Outcome> {
    let rows = table1::<T>()?;
    let mut t = Table::new(&["n", "t_ratio", "k", "eta"]);
    for r in &rows {
        t.push(vec![Cell::Int(r.n as i64), Cell::Num(r.t_ratio.to_string()), Cell::Int(r.k as i64), num(r.eta)]);
    }
    t.emit(c.format, c.out.as_deref())?;
    let mut series: Vec<Series> = Vec::new();
    for r in &rows {
        let label = format!("n = {}", r.n);
        let p = (r.t_ratio, r.eta.to_f64_lossy());
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(p),
            None => series.push(Series { label, points: vec![p] }),
        }
    }
    write_svg(
        c.svg.as_deref(),
        &series,
        Axes { title: "eta_k at the two largest k".into(), x_label: "t/(r2-r1)".into(), y_label: "eta_k".into(), log_y: true },
    )?;
    Ok(Outcome::Complete)
}

fn modes<T: Real>(o: &Opts) -> Result<Outcome> {
    o.check_rank()?;
    let tol = o.tolerances::<T>()?;
    let cfg = o.shell::<T>()?;
    if cfg.is_concentric() {
        bail!("higher modes need t > 0 (the concentric shell only has a closed form for rank 1)");
    }
    let mut t = Table::new(&["rank", "sigma", "final_N", "eta_final", "converged"]);
    let mut outcome = Outcome::Complete;
    let mut pts = Vec::new();
    for rank in 1..=o.rank {
        let r = converge_sigma(&cfg, rank, tol.eta, o.kmax)?;
        if r.status != ConvergenceStatus::Converged {
            outcome = Outcome::Incomplete;
        }
        pts.push((rank as f64, r.sigma().to_f64_lossy()));
        t.push(vec![
            Cell::Int(rank as i64),
            num(r.sigma()),
            Cell::Int(r.final_size() as i64),
            Cell::opt_num(r.eta_final().map(fmt)),
            Cell::Bool(r.status == ConvergenceStatus::Converged),
        ]);
    }
    t.emit(o.common.format, o.common.out.as_deref())?;
    write_svg(
        o.common.svg.as_deref(),
        &[Series { label: "axisymmetric".into(), points: pts }],
        Axes { title: "Axisymmetric eigenvalues".into(), x_label: "rank".into(), y_label: "sigma".into(), log_y: false },
    )?;
    Ok(outcome)
}

fn eigenfunction<T: Real>(e: &EigenfunctionOpts) -> Result<Outcome> {
    let o = &e.opts;
    o.check_rank()?;
    let tol = o.tolerances::<T>()?;
    let cfg = o.shell::<T>()?;
    if cfg.is_concentric() {
        bail!("the concentric shell (t = 0) has no bispherical frame");
    }
    let (m, outcome) = match e.size {
        Some(0) => bail!("invalid value for --size: must be at least 1"),
        Some(m) => (m, Outcome::Complete),
        None => {
            let r = converge_sigma(&cfg, o.rank, tol.eta, o.kmax)?;
            (r.final_size(), status_outcome(r.status))
        }
    };
    let frame = derive_frame(&cfg)?;
    let u = truncated_eigenfunction(&frame, cfg.n, m, o.rank)?;
    let mut t = Table::new(&["k", "coefficient", "eigenvector"]);
    for (k, (&c, &a)) in u.coeffs.iter().zip(&u.eigenvector).enumerate() {
        t.push(vec![Cell::Int(k as i64), num(c), num(a)]);
    }
    t.emit(o.common.format, o.common.out.as_deref())?;
    let rq = u.rayleigh_quotient_with_tol(tol.quad)?;
    eprintln!("sigma_m = {} (m = {m}); Rayleigh quotient = {}", fmt(u.sigma), fmt(rq));
    let pts = u.coeffs.iter().enumerate().map(|(k, c)| (k as f64, c.abs().to_f64_lossy())).collect();
    write_svg(
        o.common.svg.as_deref(),
        &[Series { label: format!("m = {m}"), points: pts }],
        Axes { title: "Series coefficients".into(), x_label: "k".into(), y_label: "|C_k|".into(), log_y: true },
    )?;
    Ok(outcome)
}
