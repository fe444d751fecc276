//! Two-step protocol: grow `N = 2^k` until the eigenvalue settles, then certify
//! it with the Rayleigh-quotient gap of truncated eigenfunctions. Also closed
//! forms, the published convergence trace and parameter sweeps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{derive_frame, BisphericalFrame, ShellConfig};
use crate::operator::assemble;
use crate::quadrature::default_rel_tol;
use crate::rayleigh::validation_gap_with_tol;
use crate::scalar::{Precision, Real};
use crate::trideig::eigenvalue;

/// Default stopping tolerance on `η_k`.
pub const DEFAULT_ETA_TOL: f64 = 1e-12;
pub const DEFAULT_K_MAX: u32 = 12;

/// Default certification threshold on `E_(m,N)` for the active precision.
pub fn default_cert_tol<T: Real>() -> T {
    match T::PRECISION {
        Precision::Binary64 => T::lit(1e-9),
        Precision::Extended => T::lit(1e-12),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvergenceStatus {
    /// `η_k` dropped below the requested tolerance.
    Converged,
    /// `η_k` reached the rounding floor of the precision without meeting a
    /// tolerance set below that floor.
    AtFloor,
    NotConverged,
}

impl ConvergenceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvergenceStatus::Converged => "converged",
            ConvergenceStatus::AtFloor => "at-floor",
            ConvergenceStatus::NotConverged => "not-converged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub k: u32,
    pub size: usize,
    pub sigma: T,
    /// `|σ_(2^(k−1)) − σ_(2^k)| / σ_(2^k)`; absent for the first step.
    pub eta: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub config: ShellConfig<T>,
    pub rank: usize,
    pub steps: Vec<StepRecord<T>>,
    pub status: ConvergenceStatus,
    pub precision: Precision,
}

impl<T: Real> ConvergenceReport<T> {
    pub fn final_size(&self) -> usize {
        self.steps.last().map_or(0, |s| s.size)
    }

    pub fn sigma(&self) -> T {
        self.steps.last().expect("at least one step").sigma
    }

    pub fn eta_final(&self) -> Option<T> {
        self.steps.last().and_then(|s| s.eta)
    }

    pub fn converged(&self) -> bool {
        self.status == ConvergenceStatus::Converged
    }
}

/// Eigenvalue of rank `rank` of `L_size`, bisected to `4ε` relative width.
pub fn section_eigenvalue<T: Real>(frame: &BisphericalFrame<T>, n: u32, size: usize, rank: usize) -> Result<T> {
    eigenvalue(&assemble(frame, n, size), rank, T::lit(4.0) * T::epsilon())
}

fn eta<T: Real>(prev: T, cur: T) -> T {
    ((prev - cur) / cur).abs()
}

/// Step 1: `σ` of `L_(2^k)` for increasing `k` until `η_k < eta_tol`.
pub fn converge_sigma<T: Real>(
    cfg: &ShellConfig<T>,
    rank: usize,
    eta_tol: T,
    k_max: u32,
) -> Result<ConvergenceReport<T>> {
    if rank == 0 {
        return Err(Error::InvalidArgument("rank must be >= 1".into()));
    }
    if !(eta_tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("eta tolerance must be positive (got {eta_tol})")));
    }
    let frame = derive_frame(cfg)?;
    let k_start = rank.next_power_of_two().trailing_zeros().max(1);
    if k_start > k_max {
        return Err(Error::Rank { rank, size: 1 << k_max });
    }
    let floor = T::lit(64.0) * T::epsilon();
    let mut steps: Vec<StepRecord<T>> = Vec::new();
    let mut status = ConvergenceStatus::NotConverged;
    for k in k_start..=k_max {
        let size = 1usize << k;
        let sigma = section_eigenvalue(&frame, cfg.n, size, rank)?;
        let eta = steps.last().map(|prev| eta(prev.sigma, sigma));
        steps.push(StepRecord { k, size, sigma, eta });
        if let Some(e) = eta {
            // below the rounding floor a tolerance tighter than the floor
            // cannot be confirmed, even if η happens to come out smaller
            if e <= floor && eta_tol < floor {
                status = ConvergenceStatus::AtFloor;
                break;
            }
            if e < eta_tol {
                status = ConvergenceStatus::Converged;
                break;
            }
        }
    }
    Ok(ConvergenceReport { config: *cfg, rank, steps, status, precision: T::PRECISION })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T> {
    pub config: ShellConfig<T>,
    pub size: usize,
    pub sigma_ref: T,
    /// `(m, E_(m,N))`.
    pub gaps: Vec<(usize, T)>,
    pub cert_tol: T,
    pub certified: bool,
}

impl<T: Real> ValidationReport<T> {
    pub fn min_gap(&self) -> Option<T> {
        self.gaps.iter().map(|g| g.1).fold(None, |acc, e| Some(acc.map_or(e, |a: T| a.min(e))))
    }
}

/// `m = 4, 8, 12, …, N` (or `[N]` when `N < 4`).
pub fn default_schedule(size: usize) -> Vec<usize> {
    if size < 4 {
        vec![size]
    } else {
        (1..=size / 4).map(|j| 4 * j).collect()
    }
}

/// Step 2: `E_(m,N)` along `schedule`; certified once some gap is below
/// `cert_tol`.
pub fn validate_sigma<T: Real>(
    report: &ConvergenceReport<T>,
    schedule: Option<&[usize]>,
    cert_tol: T,
) -> Result<ValidationReport<T>> {
    validate_sigma_with_tol(report, schedule, cert_tol, default_rel_tol::<T>())
}

/// [`validate_sigma`] with an explicit quadrature tolerance.
pub fn validate_sigma_with_tol<T: Real>(
    report: &ConvergenceReport<T>,
    schedule: Option<&[usize]>,
    cert_tol: T,
    quad_tol: T,
) -> Result<ValidationReport<T>> {
    if report.rank != 1 {
        return Err(Error::InvalidArgument("validation covers the first eigenvalue only".into()));
    }
    gaps_against(&report.config, report.final_size(), report.sigma(), schedule, cert_tol, quad_tol)
}

/// Validation against `L_size` directly, without the growing-`N` loop.
pub fn validate_section<T: Real>(
    cfg: &ShellConfig<T>,
    size: usize,
    schedule: Option<&[usize]>,
    cert_tol: T,
    quad_tol: T,
) -> Result<ValidationReport<T>> {
    let frame = derive_frame(cfg)?;
    let sigma_ref = section_eigenvalue(&frame, cfg.n, size, 1)?;
    gaps_against(cfg, size, sigma_ref, schedule, cert_tol, quad_tol)
}

fn gaps_against<T: Real>(
    cfg: &ShellConfig<T>,
    size: usize,
    sigma_ref: T,
    schedule: Option<&[usize]>,
    cert_tol: T,
    quad_tol: T,
) -> Result<ValidationReport<T>> {
    let frame = derive_frame(cfg)?;
    let owned;
    let schedule = match schedule {
        Some(s) => s,
        None => {
            owned = default_schedule(size);
            &owned
        }
    };
    let gaps = schedule
        .par_iter()
        .map(|&m| validation_gap_with_tol(&frame, cfg.n, m, sigma_ref, quad_tol).map(|e| (m, e)))
        .collect::<Result<Vec<_>>>()?;
    let certified = gaps.iter().any(|&(_, e)| e < cert_tol);
    Ok(ValidationReport { config: *cfg, size, sigma_ref, gaps, cert_tol, certified })
}

/// `σ₁ at t = 0`: `n r₁ⁿ / (r₂ (r₂ⁿ − r₁ⁿ))`.
pub fn concentric_exact<T: Real>(n: u32, r1: T, r2: T) -> Result<T> {
    check_radii(n, r1, r2)?;
    let a = r1.powi(n as i32);
    let b = r2.powi(n as i32);
    Ok(T::from_int(n as i64) * a / (r2 * (b - a)))
}

/// Asymptotic lower bound `((n+1)r₁ − n r₂) / (2 r₂ (r₂ − r₁))` for `σ₁` as
/// the inner sphere approaches the outer one. Uninformative when `≤ 0`.
pub fn eccentric_lower_bound<T: Real>(n: u32, r1: T, r2: T) -> Result<T> {
    check_radii(n, r1, r2)?;
    let nn = T::from_int(n as i64);
    Ok(((nn + T::one()) * r1 - nn * r2) / (T::two() * r2 * (r2 - r1)))
}

fn check_radii<T: Real>(n: u32, r1: T, r2: T) -> Result<()> {
    if n == 0 || !(r1 > T::zero()) || !(r1 < r2) || !r2.is_finite() {
        return Err(Error::InvalidShell(format!("need n >= 1 and 0 < r1 < r2 (n = {n}, r1 = {r1}, r2 = {r2})")));
    }
    Ok(())
}

/// `t/(r₂ − r₁) = 0, 0.02, …, 0.98`, each computed as `i/50` in `T`.
pub fn example_ratio_grid<T: Real>() -> Vec<T> {
    (0..50).map(|i| T::from_int(i) / T::from_int(50)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid<T> {
    pub ns: Vec<u32>,
    pub r1s: Vec<T>,
    pub r2s: Vec<T>,
    pub t_ratios: Vec<T>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions<T> {
    pub eta_tol: T,
    pub k_max: u32,
    /// Also compute `E_(N,N)` for rank-1 records.
    pub validate: bool,
    /// Relative tolerance of the quadrature behind `E_(N,N)`.
    pub quad_tol: T,
}

impl<T: Real> Default for SweepOptions<T> {
    fn default() -> Self {
        Self { eta_tol: T::lit(DEFAULT_ETA_TOL), k_max: DEFAULT_K_MAX, validate: false, quad_tol: default_rel_tol::<T>() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<T> {
    pub n: u32,
    pub r1: T,
    pub r2: T,
    pub t_ratio: T,
    pub rank: usize,
    pub sigma: Option<T>,
    pub final_size: usize,
    pub eta_final: Option<T>,
    pub e_final: Option<T>,
    pub status: Option<ConvergenceStatus>,
    pub error: Option<String>,
}

impl<T> SweepRecord<T> {
    /// Higher ranks are eigenvalues of the axisymmetric operator only.
    pub fn axisymmetric_restricted(&self) -> bool {
        self.rank > 1
    }
}

fn sweep_point<T: Real>(n: u32, r1: T, r2: T, t_ratio: T, rank: usize, opts: &SweepOptions<T>) -> SweepRecord<T> {
    let mut rec = SweepRecord {
        n,
        r1,
        r2,
        t_ratio,
        rank,
        sigma: None,
        final_size: 0,
        eta_final: None,
        e_final: None,
        status: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        if t_ratio.is_zero() {
            if rank != 1 {
                return Err(Error::InvalidArgument(
                    "rank > 1 has no closed form at t = 0; omit t_ratio = 0 for higher modes".into(),
                ));
            }
            rec.sigma = Some(concentric_exact(n, r1, r2)?);
            rec.status = Some(ConvergenceStatus::Converged);
            return Ok(());
        }
        let cfg = ShellConfig::from_ratio(n, r1, r2, t_ratio)?;
        let report = converge_sigma(&cfg, rank, opts.eta_tol, opts.k_max)?;
        rec.sigma = Some(report.sigma());
        rec.final_size = report.final_size();
        rec.eta_final = report.eta_final();
        rec.status = Some(report.status);
        if opts.validate && rank == 1 {
            let frame = derive_frame(&cfg)?;
            rec.e_final = Some(validation_gap_with_tol(&frame, n, report.final_size(), report.sigma(), opts.quad_tol)?);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec
}

/// Runs every grid point (in parallel) and returns records in grid order:
/// `n`, then `r1`, `r2`, `rank`, and `t_ratio` innermost.
pub fn sweep<T: Real>(grid: &SweepGrid<T>, opts: &SweepOptions<T>) -> Vec<SweepRecord<T>> {
    let mut points = Vec::new();
    for &n in &grid.ns {
        for &r1 in &grid.r1s {
            for &r2 in &grid.r2s {
                for &rank in &grid.ranks {
                    for &t in &grid.t_ratios {
                        points.push((n, r1, r2, t, rank));
                    }
                }
            }
        }
    }
    points
        .par_iter()
        .map(|&(n, r1, r2, t, rank)| sweep_point(n, r1, r2, t, rank, opts))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row<T> {
    pub n: u32,
    pub t_ratio: f64,
    pub k: u32,
    pub eta: T,
}

/// `(n, t/(r₂−r₁), k)` rows of the published convergence table, `r₁ = 1, r₂ = 3`.
pub const TABLE1_LAYOUT: [(u32, f64, u32); 20] = [
    (1, 0.2, 4),
    (1, 0.2, 5),
    (1, 0.4, 4),
    (1, 0.4, 5),
    (1, 0.6, 5),
    (1, 0.6, 6),
    (1, 0.8, 6),
    (1, 0.8, 7),
    (1, 0.98, 8),
    (1, 0.98, 9),
    (2, 0.2, 4),
    (2, 0.2, 5),
    (2, 0.4, 4),
    (2, 0.4, 5),
    (2, 0.6, 5),
    (2, 0.6, 6),
    (2, 0.8, 6),
    (2, 0.8, 7),
    (2, 0.98, 8),
    (2, 0.98, 9),
];

/// `η_k` for each row of [`TABLE1_LAYOUT`].
pub fn table1<T: Real>() -> Result<Vec<Table1Row<T>>> {
    TABLE1_LAYOUT
        .par_iter()
        .map(|&(n, ratio, k)| {
            let r = T::parse_decimal(&ratio.to_string()).expect("table ratio");
            let cfg = ShellConfig::from_ratio(n, T::one(), T::lit(3.0), r)?;
            let frame = derive_frame(&cfg)?;
            let prev = section_eigenvalue(&frame, n, 1 << (k - 1), 1)?;
            let cur = section_eigenvalue(&frame, n, 1 << k, 1)?;
            Ok(Table1Row { n, t_ratio: ratio, k, eta: eta(prev, cur) })
        })
        .collect()
}
