//! Adaptive Gauss–Legendre quadrature and the reduced θ-integrals
//! `∫₀^π sinⁿθ cos(pθ) / (cosh ξ₂ − cos θ)^k dθ`.
//!
//! Each panel is integrated with an `n`- and a `2n`-point Gauss–Legendre rule;
//! the difference of the two estimates is the panel error and the `2n`-point
//! value is kept. Panels with the largest error are bisected first.

use crate::error::{Error, Result};
use crate::geometry::BisphericalFrame;
use crate::scalar::{Precision, Real};

const MAX_PANELS: usize = 4000;
/// `cos(pθ)` recurrences are restarted from direct evaluations this often.
const REANCHOR: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub est_error: T,
    pub evaluations: usize,
}

/// Default relative tolerance of the active precision.
pub fn default_rel_tol<T: Real>() -> T {
    match T::PRECISION {
        Precision::Binary64 => T::lit(1e-13),
        Precision::Extended => T::lit(1e-28),
    }
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    fn new(points: usize) -> Self {
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        let np = T::from_int(points as i64);
        for i in 0..points {
            let guess = T::pi() * (T::from_int(i as i64) + T::lit(0.75)) / (np + T::half());
            let mut x = guess.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(points, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::two() * T::epsilon() {
                    dp = legendre_with_derivative(points, x).1;
                    break;
                }
            }
            nodes.push(x);
            weights.push(T::two() / ((T::one() - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kk = T::from_int(k as i64);
        let p2 = ((kk + kk - T::one()) * x * p1 - (kk - T::one()) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    let nn = T::from_int(n as i64);
    (p1, nn * (x * p1 - p0) / (x * x - T::one()))
}

struct RulePair<T> {
    low: GaussLegendre<T>,
    high: GaussLegendre<T>,
}

impl<T: Real> RulePair<T> {
    fn new() -> Self {
        let points = match T::PRECISION {
            Precision::Binary64 => 12,
            Precision::Extended => 24,
        };
        Self { low: GaussLegendre::new(points), high: GaussLegendre::new(2 * points) }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    value: Vec<T>,
    error: Vec<T>,
    magnitude: Vec<T>,
}

/// Vector-valued adaptive integration. `f(x, out)` writes `len` integrand
/// components; component `j` is accepted once its error is within
/// `max(rel_tol·|value_j|, abs_tol_j)`, where `abs_tol_j` defaults to
/// `rel_tol·∫|f_j|`.
struct Adaptive<'r, T> {
    rules: &'r RulePair<T>,
    len: usize,
    rel_tol: T,
    abs_tol: Option<T>,
    evaluations: usize,
}

impl<'r, T: Real> Adaptive<'r, T> {
    fn panel<F>(&mut self, f: &mut F, a: T, b: T) -> Result<Panel<T>>
    where
        F: FnMut(T, &mut [T]) -> Result<()>,
    {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        let mut buf = vec![T::zero(); self.len];
        let mut low = vec![T::zero(); self.len];
        let mut high = vec![T::zero(); self.len];
        let mut magnitude = vec![T::zero(); self.len];
        for (rule, acc, track) in [(&self.rules.low, &mut low, false), (&self.rules.high, &mut high, true)] {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                f(mid + half * x, &mut buf)?;
                for j in 0..self.len {
                    acc[j] += w * buf[j];
                    if track {
                        magnitude[j] += w * buf[j].abs();
                    }
                }
            }
            self.evaluations += rule.nodes.len();
        }
        let value: Vec<T> = high.iter().map(|&v| v * half).collect();
        let error = high.iter().zip(&low).map(|(&h, &l)| ((h - l) * half).abs()).collect();
        let magnitude = magnitude.iter().map(|&m| m * half.abs()).collect();
        Ok(Panel { a, b, value, error, magnitude })
    }

    fn run<F>(&mut self, mut f: F, breaks: &[T]) -> Result<(Vec<T>, Vec<T>)>
    where
        F: FnMut(T, &mut [T]) -> Result<()>,
    {
        let mut panels = Vec::new();
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                panels.push(self.panel(&mut f, w[0], w[1])?);
            }
        }
        loop {
            let mut value = vec![T::zero(); self.len];
            let mut error = vec![T::zero(); self.len];
            let mut magnitude = vec![T::zero(); self.len];
            for p in &panels {
                for j in 0..self.len {
                    value[j] += p.value[j];
                    error[j] += p.error[j];
                    magnitude[j] += p.magnitude[j];
                }
            }
            let tol: Vec<T> = (0..self.len)
                .map(|j| {
                    let floor = self.abs_tol.unwrap_or(self.rel_tol * magnitude[j]);
                    (self.rel_tol * value[j].abs()).max(floor).max(T::min_positive())
                })
                .collect();
            if value.iter().chain(&error).any(|x| !x.is_finite()) {
                return Err(Error::Quadrature {
                    best: value[0].to_f64_lossy(),
                    est_error: error[0].to_f64_lossy(),
                    subdivisions: panels.len(),
                });
            }
            if (0..self.len).all(|j| error[j] <= tol[j]) {
                return Ok((value, error));
            }
            if panels.len() >= MAX_PANELS {
                let worst = (0..self.len)
                    .max_by(|&i, &j| (error[i] / tol[i]).partial_cmp(&(error[j] / tol[j])).unwrap())
                    .unwrap_or(0);
                return Err(Error::Quadrature {
                    best: value[worst].to_f64_lossy(),
                    est_error: error[worst].to_f64_lossy(),
                    subdivisions: panels.len(),
                });
            }
            // split the panel contributing most to the worst relative excess
            let score = |p: &Panel<T>| {
                (0..self.len).fold(T::zero(), |acc, j| acc.max(p.error[j] / tol[j]))
            };
            let (idx, _) = panels
                .iter()
                .enumerate()
                .map(|(i, p)| (i, score(p)))
                .fold((0, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            let p = panels.swap_remove(idx);
            let mid = (p.a + p.b) * T::half();
            if !(mid > p.a && mid < p.b) {
                return Err(Error::Quadrature {
                    best: value[0].to_f64_lossy(),
                    est_error: error[0].to_f64_lossy(),
                    subdivisions: panels.len() + 1,
                });
            }
            panels.push(self.panel(&mut f, p.a, mid)?);
            panels.push(self.panel(&mut f, mid, p.b)?);
        }
    }
}

fn scalar_result<T: Real>(value: Vec<T>, error: Vec<T>, evaluations: usize) -> QuadResult<T> {
    QuadResult { value: value[0], est_error: error[0], evaluations }
}

fn check_interval<T: Real>(a: T, b: T, rel_tol: T) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("integration interval [{a}, {b}] must satisfy a < b")));
    }
    if !(rel_tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("relative tolerance must be positive (got {rel_tol})")));
    }
    Ok(())
}

/// `∫_a^b f` to `rel_tol·|value|`, with an absolute floor of `rel_tol·∫|f|`.
pub fn integrate_1d<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, rel_tol: T) -> Result<QuadResult<T>> {
    try_integrate_1d(|x| Ok(f(x)), a, b, rel_tol, None)
}

/// As [`integrate_1d`] with a fallible integrand and an optional explicit
/// absolute tolerance.
pub fn try_integrate_1d<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    a: T,
    b: T,
    rel_tol: T,
    abs_tol: Option<T>,
) -> Result<QuadResult<T>> {
    check_interval(a, b, rel_tol)?;
    let rules = RulePair::new();
    let mut ad = Adaptive { rules: &rules, len: 1, rel_tol, abs_tol, evaluations: 0 };
    let (v, e) = ad.run(
        |x, out| {
            out[0] = f(x)?;
            Ok(())
        },
        &[a, b],
    )?;
    Ok(scalar_result(v, e, ad.evaluations))
}

/// Nested integration over `[ξa, ξb] × [θa, θb]`, outer variable `ξ`.
/// The inner integrals get a tenth of the outer tolerance.
pub fn integrate_2d<T: Real, F: Fn(T, T) -> T>(
    f: F,
    xi_range: (T, T),
    theta_range: (T, T),
    rel_tol: T,
) -> Result<QuadResult<T>> {
    let (xa, xb) = xi_range;
    let (ta, tb) = theta_range;
    check_interval(xa, xb, rel_tol)?;
    check_interval(ta, tb, rel_tol)?;
    let rules = RulePair::new();
    let inner_tol = (rel_tol * T::lit(0.1)).max(T::epsilon() * T::lit(8.0));
    let mut inner_evals = 0usize;
    let mut outer = Adaptive { rules: &rules, len: 1, rel_tol, abs_tol: None, evaluations: 0 };
    let (v, e) = outer.run(
        |xi, out| {
            let mut inner = Adaptive { rules: &rules, len: 1, rel_tol: inner_tol, abs_tol: None, evaluations: 0 };
            let (iv, _) = inner.run(
                |th, o| {
                    o[0] = f(xi, th);
                    Ok(())
                },
                &[ta, tb],
            )?;
            inner_evals += inner.evaluations;
            out[0] = iv[0];
            Ok(())
        },
        &[xa, xb],
    )?;
    Ok(scalar_result(v, e, inner_evals))
}

/// A priori breakpoint `min(π/8, 8ξ₂)` separating the peak of
/// `1/(cosh ξ₂ − cos θ)` at `θ = 0` from the rest of `[0, π]`.
fn theta_breaks<T: Real>(frame: &BisphericalFrame<T>) -> [T; 3] {
    let pi = T::pi();
    let split = (pi / T::lit(8.0)).min(T::lit(8.0) * frame.xi2);
    [T::zero(), split, pi]
}

/// `cosh ξ₂ − cos θ = 2 sinh²(ξ₂/2) + 2 sin²(θ/2)`, accurate near the peak.
fn outer_gap<T: Real>(sinh_half_sq: T, theta: T) -> T {
    let s = (theta * T::half()).sin();
    T::two() * (sinh_half_sq + s * s)
}

/// `∫₀^π sinⁿθ cos(pθ) / (cosh ξ₂ − cos θ)^k dθ` for every `p = 0..=p_max`
/// from one adaptive pass.
pub fn theta_integrals<T: Real>(
    frame: &BisphericalFrame<T>,
    n: u32,
    p_max: usize,
    k: u32,
    rel_tol: T,
) -> Result<Vec<T>> {
    if !(k == 1 || k == 2) {
        return Err(Error::InvalidArgument(format!("theta integral weight power must be 1 or 2 (got {k})")));
    }
    let sh = (frame.xi2 * T::half()).sinh();
    let sinh_half_sq = sh * sh;
    let weight = |theta: T| {
        let g = outer_gap(sinh_half_sq, theta);
        theta.sin().powi(n as i32) / g.powi(k as i32)
    };
    let len = p_max + 1;
    let rules = RulePair::new();

    // absolute floor: rel_tol · ∫|w|, shared by every frequency
    let mut base = Adaptive { rules: &rules, len: 1, rel_tol, abs_tol: None, evaluations: 0 };
    let breaks = theta_breaks(frame);
    let (mass, _) = base.run(
        |th, out| {
            out[0] = weight(th);
            Ok(())
        },
        &breaks,
    )?;
    let abs_tol = rel_tol * mass[0].abs();

    let mut ad = Adaptive { rules: &rules, len, rel_tol, abs_tol: Some(abs_tol), evaluations: 0 };
    let (values, _) = ad.run(
        |th, out| {
            let w = weight(th);
            let (s1, c1) = th.sin_cos();
            let (mut c, mut s) = (T::one(), T::zero());
            for (p, slot) in out.iter_mut().enumerate() {
                if p > 0 {
                    if p % REANCHOR == 0 {
                        let (sp, cp) = (T::from_int(p as i64) * th).sin_cos();
                        c = cp;
                        s = sp;
                    } else {
                        let cn = c * c1 - s * s1;
                        s = s * c1 + c * s1;
                        c = cn;
                    }
                }
                *slot = w * c;
            }
            Ok(())
        },
        &breaks,
    )?;
    Ok(values)
}

/// Single reduced θ-integral at the default tolerance of the precision.
pub fn theta_integral<T: Real>(frame: &BisphericalFrame<T>, n: u32, p: i64, k: u32) -> Result<T> {
    let pa = p.unsigned_abs() as usize;
    if !(k == 1 || k == 2) {
        return Err(Error::InvalidArgument(format!("theta integral weight power must be 1 or 2 (got {k})")));
    }
    let sh = (frame.xi2 * T::half()).sinh();
    let sinh_half_sq = sh * sh;
    let pt = T::from_int(pa as i64);
    let rel_tol = default_rel_tol::<T>();
    let breaks = theta_breaks(frame);
    let rules = RulePair::new();
    let weight = |th: T| th.sin().powi(n as i32) / outer_gap(sinh_half_sq, th).powi(k as i32);
    let mut base = Adaptive { rules: &rules, len: 1, rel_tol, abs_tol: None, evaluations: 0 };
    let (mass, _) = base.run(
        |th, out| {
            out[0] = weight(th);
            Ok(())
        },
        &breaks,
    )?;
    let mut ad = Adaptive { rules: &rules, len: 1, rel_tol, abs_tol: Some(rel_tol * mass[0]), evaluations: 0 };
    let (v, _) = ad.run(
        |th, out| {
            out[0] = weight(th) * (pt * th).cos();
            Ok(())
        },
        &breaks,
    )?;
    Ok(v[0])
}
