//! Shell parameters and the bispherical coordinate frame in which both
//! boundary spheres are coordinate level sets.
//!
//! The outer sphere is `ξ = ξ₂` and the inner sphere is `ξ = ξ₁ > ξ₂`. Both
//! lie on the positive `x₁` side of the foci `(±α, 0, …, 0)`; the outer centre
//! sits at `x₁ = t₀ = α coth ξ₂`, the inner one at `t₀ − t`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eccentric shell in `R^(n+2)`: outer ball of radius `r2`, inner ball of
/// radius `r1`, centres a distance `t` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellConfig<T> {
    pub n: u32,
    pub r1: T,
    pub r2: T,
    pub t: T,
}

impl<T: Real> ShellConfig<T> {
    pub fn new(n: u32, r1: T, r2: T, t: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidShell("n must be at least 1".into()));
        }
        if !(r1 > T::zero()) || !r1.is_finite() || !r2.is_finite() {
            return Err(Error::InvalidShell(format!("radii must be positive and finite (r1 = {r1})")));
        }
        if !(r1 < r2) {
            return Err(Error::InvalidShell(format!("need r1 < r2 (r1 = {r1}, r2 = {r2})")));
        }
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::InvalidShell(format!("center distance must be >= 0 (t = {t})")));
        }
        let gap = r2 - r1;
        if t >= gap {
            return Err(Error::BoundariesTouch { t: t.to_f64_lossy(), gap: gap.to_f64_lossy() });
        }
        Ok(Self { n, r1, r2, t })
    }

    /// Shell with `t = ratio · (r2 − r1)`.
    pub fn from_ratio(n: u32, r1: T, r2: T, ratio: T) -> Result<Self> {
        if !(ratio >= T::zero()) {
            return Err(Error::InvalidShell(format!("t ratio must be >= 0 (got {ratio})")));
        }
        if ratio >= T::one() {
            return Err(Error::BoundariesTouch {
                t: (ratio * (r2 - r1)).to_f64_lossy(),
                gap: (r2 - r1).to_f64_lossy(),
            });
        }
        Self::new(n, r1, r2, ratio * (r2 - r1))
    }

    pub fn t_ratio(&self) -> T {
        self.t / (self.r2 - self.r1)
    }

    pub fn is_concentric(&self) -> bool {
        self.t.is_zero()
    }

    pub fn cast<U: Real>(&self) -> ShellConfig<U> {
        let conv = |x: T| U::parse_decimal(&x.to_sci(40)).unwrap_or_else(|| U::lit(x.to_f64_lossy()));
        ShellConfig { n: self.n, r1: conv(self.r1), r2: conv(self.r2), t: conv(self.t) }
    }
}

/// Derived bispherical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisphericalFrame<T> {
    pub alpha: T,
    pub xi1: T,
    pub xi2: T,
    pub t0: T,
    cosh_xi2: T,
    sinh_xi2: T,
}

/// Point `(ξ, θ, φ₁, …, φₙ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BisphericalPoint<T> {
    pub xi: T,
    pub theta: T,
    pub phis: Vec<T>,
}

impl<T: Real> BisphericalPoint<T> {
    pub fn new(xi: T, theta: T, phis: Vec<T>) -> Result<Self> {
        let pi = T::pi();
        if phis.is_empty() {
            return Err(Error::InvalidArgument("a bispherical point needs at least one azimuthal angle".into()));
        }
        if !(theta >= T::zero() && theta <= pi) {
            return Err(Error::InvalidArgument(format!("theta = {theta} outside [0, pi]")));
        }
        let last = phis.len() - 1;
        for (j, &phi) in phis.iter().enumerate() {
            let upper_ok = if j == last { phi < pi + pi } else { phi <= pi };
            if !(phi >= T::zero() && upper_ok) {
                return Err(Error::InvalidArgument(format!("angle phi_{} = {phi} out of range", j + 1)));
            }
        }
        Ok(Self { xi, theta, phis })
    }

    /// Point on the axisymmetric slice (all azimuthal angles zero).
    pub fn axisym(n: u32, xi: T, theta: T) -> Result<Self> {
        Self::new(xi, theta, vec![T::zero(); n.max(1) as usize])
    }
}

pub fn derive_frame<T: Real>(cfg: &ShellConfig<T>) -> Result<BisphericalFrame<T>> {
    let ShellConfig { r1, r2, t, .. } = *cfg;
    if t.is_zero() {
        return Err(Error::Concentric);
    }
    let gap = r2 - r1;
    if t >= gap {
        return Err(Error::BoundariesTouch { t: t.to_f64_lossy(), gap: gap.to_f64_lossy() });
    }
    // factored so the near-touching limit does not cancel
    let outer = (r2 + r1 - t) * (r2 + r1 + t);
    let inner = (gap - t) * (gap + t);
    let alpha = (outer * inner).sqrt() / (T::two() * t);
    let s1 = alpha / r1;
    let s2 = alpha / r2;
    let xi1 = s1.asinh();
    let xi2 = s2.asinh();
    let cosh_xi2 = (T::one() + s2 * s2).sqrt();
    Ok(BisphericalFrame { alpha, xi1, xi2, t0: alpha * cosh_xi2 / s2, cosh_xi2, sinh_xi2: s2 })
}

impl<T: Real> BisphericalFrame<T> {
    /// Frame from raw coordinates; `t0 = α coth ξ₂`.
    pub fn from_raw(alpha: T, xi1: T, xi2: T) -> Result<Self> {
        if !(alpha > T::zero()) || !(xi1 > xi2) || !(xi2 > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "need alpha > 0 and xi1 > xi2 > 0 (alpha = {alpha}, xi1 = {xi1}, xi2 = {xi2})"
            )));
        }
        let (sinh_xi2, cosh_xi2) = (xi2.sinh(), xi2.cosh());
        Ok(Self { alpha, xi1, xi2, t0: alpha * cosh_xi2 / sinh_xi2, cosh_xi2, sinh_xi2 })
    }

    pub fn cosh_xi2(&self) -> T {
        self.cosh_xi2
    }

    pub fn sinh_xi2(&self) -> T {
        self.sinh_xi2
    }

    /// Inner and outer radii recovered from the frame.
    pub fn radii(&self) -> (T, T) {
        (self.alpha / self.xi1.sinh(), self.alpha / self.sinh_xi2)
    }

    /// Centre distance `α coth ξ₂ − α coth ξ₁`.
    pub fn center_distance(&self) -> T {
        self.t0 - self.alpha / self.xi1.tanh()
    }

    /// Inner sphere centre on the `x₁` axis.
    pub fn inner_center(&self) -> T {
        self.alpha / self.xi1.tanh()
    }

    fn denominator(&self, xi: T, theta: T) -> Result<T> {
        let d = xi.cosh() - theta.cos();
        if !(d > T::min_positive()) {
            return Err(Error::DegeneratePoint(d.to_f64_lossy()));
        }
        Ok(d)
    }

    /// Scale factor `h = α/(cosh ξ − cos θ)`, shared by the ξ and θ directions.
    pub fn scale_factor(&self, xi: T, theta: T) -> Result<T> {
        Ok(self.alpha / self.denominator(xi, theta)?)
    }

    pub fn to_cartesian(&self, p: &BisphericalPoint<T>) -> Result<Vec<T>> {
        let d = self.denominator(p.xi, p.theta)?;
        let n = p.phis.len();
        let mut x = Vec::with_capacity(n + 2);
        x.push(self.alpha * p.xi.sinh() / d);
        // the trailing component is split by cos φ_j / sin φ_j at each level
        let mut tail = self.alpha * p.theta.sin() / d;
        for &phi in &p.phis {
            let (s, c) = phi.sin_cos();
            x.push(tail * c);
            tail = tail * s;
        }
        x.push(tail);
        Ok(x)
    }

    /// Inverse map restricted to the axisymmetric slice: `x₁` along the axis,
    /// `rho ≥ 0` the distance from it.
    pub fn from_cartesian_axisym(&self, x1: T, rho: T) -> Result<(T, T)> {
        if rho < T::zero() {
            return Err(Error::InvalidArgument(format!("rho must be >= 0 (got {rho})")));
        }
        let a = self.alpha;
        let plus = (x1 + a) * (x1 + a) + rho * rho;
        let minus = (x1 - a) * (x1 - a) + rho * rho;
        let floor = T::epsilon() * T::epsilon() * a * a;
        if plus <= floor || minus <= floor {
            return Err(Error::Focus);
        }
        let xi = (plus / minus).ln() * T::half();
        let theta = (T::two() * a * rho).atan2(x1 * x1 + rho * rho - a * a);
        Ok((xi, theta))
    }

    /// Volume Jacobian with the azimuthal factors removed:
    /// `α^(n+2) sinⁿθ / (cosh ξ − cos θ)^(n+2)`.
    pub fn axisym_volume_weight(&self, n: u32, xi: T, theta: T) -> T {
        let d = xi.cosh() - theta.cos();
        let ratio = self.alpha / d;
        ratio.powi(n as i32 + 2) * theta.sin().powi(n as i32)
    }

    /// Surface element on the outer sphere with the azimuthal factors removed:
    /// `α^(n+1) sinⁿθ / (cosh ξ₂ − cos θ)^(n+1)`.
    pub fn surface_weight(&self, n: u32, theta: T) -> T {
        let d = self.cosh_xi2 - theta.cos();
        (self.alpha / d).powi(n as i32 + 1) * theta.sin().powi(n as i32)
    }
}

/// Integral of the azimuthal factors `∏ sin^(n−j) φⱼ` over `[0,π]^(n−1) × [0,2π)`.
pub fn angular_measure<T: Real>(n: u32) -> T {
    let pi = T::pi();
    // Wallis: W_0 = π, W_1 = 2, W_k = (k−1)/k · W_{k−2}
    let wallis = |k: u32| -> T {
        let mut w = if k % 2 == 0 { pi } else { T::two() };
        let mut j = if k % 2 == 0 { 2 } else { 3 };
        while j <= k {
            w = w * T::from_int(j as i64 - 1) / T::from_int(j as i64);
            j += 2;
        }
        w
    };
    (1..n).fold(T::two() * pi, |acc, j| acc * wallis(n - j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DoubleDouble;
    use proptest::prelude::*;

    fn example1() -> BisphericalFrame<f64> {
        derive_frame(&ShellConfig::new(1, 1.0, 3.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn example1_frame_values() {
        let f = example1();
        assert!((f.alpha - 3.0 * 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((f.xi2 - 0.962_423_650_119_206_9).abs() < 1e-15);
        assert!((f.xi1 - 1.924_847_300_238_413_8).abs() < 1e-15);
        assert!((f.t0 - 4.5).abs() < 1e-14);
        assert!((f.cosh_xi2() - 1.5).abs() < 1e-15);
        assert!((f.center_distance() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_touching_and_concentric() {
        assert!(matches!(ShellConfig::new(1, 1.0, 3.0, 2.0), Err(Error::BoundariesTouch { .. })));
        assert!(matches!(ShellConfig::from_ratio(1, 1.0, 3.0, 1.0), Err(Error::BoundariesTouch { .. })));
        let cfg = ShellConfig::new(1, 1.0, 3.0, 0.0).unwrap();
        assert_eq!(derive_frame(&cfg), Err(Error::Concentric));
        // bypassing the constructor still hits the frame check
        let bad = ShellConfig { n: 1, r1: 1.0, r2: 3.0, t: 2.5 };
        assert!(matches!(derive_frame(&bad), Err(Error::BoundariesTouch { .. })));
        assert!(ShellConfig::new(1, 3.0, 1.0, 0.5).is_err());
        assert!(ShellConfig::new(0, 1.0, 3.0, 0.5).is_err());
    }

    #[test]
    fn frame_reproduces_radii_n2() {
        let f = derive_frame(&ShellConfig::new(2, 1.0, 3.0, 0.8).unwrap()).unwrap();
        let (r1, r2) = f.radii();
        assert!((r1 - 1.0).abs() < 1e-13);
        assert!((r2 - 3.0).abs() < 1e-13 * 3.0);
        assert!((f.center_distance() - 0.8).abs() < 1e-13);
    }

    #[test]
    fn extended_frame_is_tighter() {
        type D = DoubleDouble;
        let cfg = ShellConfig::new(1, D::new(1.0), D::new(3.0), D::new(1.0)).unwrap();
        let f = derive_frame(&cfg).unwrap();
        let (r1, r2) = f.radii();
        assert!((r1 - D::new(1.0)).abs().hi() < 1e-30);
        assert!((r2 - D::new(3.0)).abs().hi() < 1e-30);
        assert!((f.xi1 - f.xi2 * D::new(2.0)).abs().hi() < 1e-30);
    }

    #[test]
    fn scale_factor_examples() {
        let f = BisphericalFrame::from_raw(2.0, 2.0, 1.0).unwrap();
        assert!((f.scale_factor(0.0, std::f64::consts::PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(f.scale_factor(0.0, 0.0), Err(Error::DegeneratePoint(_))));
        let e = example1();
        let h = e.scale_factor(e.xi2, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((h - 2.236_067_977_499_79).abs() < 1e-13);
    }

    #[test]
    fn to_cartesian_base_case() {
        let f = BisphericalFrame::from_raw(1.0, 2.0, 0.5).unwrap();
        let pi = std::f64::consts::PI;
        let p = BisphericalPoint::new(0.0, pi, vec![0.0]).unwrap();
        let x = f.to_cartesian(&p).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-15));
        let p = BisphericalPoint::new(1.0, pi / 2.0, vec![0.0]).unwrap();
        let x = f.to_cartesian(&p).unwrap();
        assert!((x[0] - 0.761_594_155_955_764_9).abs() < 1e-15);
        assert!((x[1] - 0.648_054_273_663_885_4).abs() < 1e-15);
        assert_eq!(x[2], 0.0);
    }

    #[test]
    fn to_cartesian_recursion_splits_last_component() {
        let f = example1();
        let base = BisphericalPoint::new(1.3, 0.7, vec![0.4]).unwrap();
        let lifted = BisphericalPoint::new(1.3, 0.7, vec![0.4, 1.1]).unwrap();
        let x3 = f.to_cartesian(&base).unwrap();
        let x4 = f.to_cartesian(&lifted).unwrap();
        assert_eq!(x4.len(), 4);
        assert_eq!(&x4[..2], &x3[..2]);
        assert!((x4[2] - x3[2] * 1.1f64.cos()).abs() < 1e-15);
        assert!((x4[3] - x3[2] * 1.1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn point_validation() {
        let pi = std::f64::consts::PI;
        assert!(BisphericalPoint::new(1.0, 4.0, vec![0.0]).is_err());
        assert!(BisphericalPoint::new(1.0, 1.0, vec![3.5, 0.0]).is_err());
        assert!(BisphericalPoint::new(1.0, 1.0, vec![3.0, 6.0]).is_ok());
        assert!(BisphericalPoint::new(1.0, 1.0, vec![2.0 * pi]).is_err());
        assert!(BisphericalPoint::<f64>::new(1.0, 1.0, vec![]).is_err());
    }

    #[test]
    fn outer_sphere_point_inversion() {
        let f = example1();
        // equator of the outer sphere as seen from its centre
        let (xi, theta) = f.from_cartesian_axisym(f.t0, f.alpha / f.xi2.sinh()).unwrap();
        assert!((xi - f.xi2).abs() < 1e-14);
        assert!((theta - f.xi2.sinh().atan()).abs() < 1e-14);
        // θ = π/2 on the same sphere
        let (xi, theta) = f
            .from_cartesian_axisym(f.alpha * f.xi2.tanh(), f.alpha / f.xi2.cosh())
            .unwrap();
        assert!((xi - f.xi2).abs() < 1e-14);
        assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert_eq!(f.from_cartesian_axisym(f.alpha, 0.0), Err(Error::Focus));
        assert_eq!(f.from_cartesian_axisym(-f.alpha, 0.0), Err(Error::Focus));
    }

    #[test]
    fn weights() {
        let f = BisphericalFrame::from_raw(1.0, 2.0, 0.5).unwrap();
        // ξ = 0, θ = π/2: cosh ξ − cos θ = 1
        assert!((f.axisym_volume_weight(1, 0.0, std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert!((f.axisym_volume_weight(3, 0.0, std::f64::consts::PI) - 0.5f64.powi(5) * std::f64::consts::PI.sin().powi(3)).abs() < 1e-16);
        assert_eq!(f.axisym_volume_weight(2, 0.7, 0.0), 0.0);
        let e = example1();
        assert_eq!(e.surface_weight(1, 0.0), 0.0);
        assert!((e.surface_weight(1, std::f64::consts::FRAC_PI_2) - 5.0).abs() < 1e-13);
    }

    #[test]
    fn angular_measure_small_cases() {
        assert!((angular_measure::<f64>(1) - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        // n = 2: ∫₀^π sin φ₁ dφ₁ · 2π = 4π
        assert!((angular_measure::<f64>(2) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        // n = 3: W₂ · W₁ · 2π = (π/2)(2)(2π)
        let pi = std::f64::consts::PI;
        assert!((angular_measure::<f64>(3) - 2.0 * pi * pi).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn frame_invariants(n in 1u32..6, r1 in 0.05f64..2.0, extra in 0.05f64..3.0, ratio in 0.001f64..0.999) {
            let r2 = r1 + extra;
            let cfg = ShellConfig::from_ratio(n, r1, r2, ratio).unwrap();
            let f = derive_frame(&cfg).unwrap();
            prop_assert!(f.xi1 > f.xi2 && f.xi2 > 0.0);
            let (q1, q2) = f.radii();
            prop_assert!((q1 - r1).abs() <= 1e-13 * r1);
            prop_assert!((q2 - r2).abs() <= 1e-13 * r2);
            prop_assert!((f.center_distance() - cfg.t).abs() <= 1e-12 * r2.max(f.alpha));
        }

        #[test]
        fn boundary_spheres_are_level_sets(ratio in 0.01f64..0.95, theta in 0.0f64..std::f64::consts::PI, phi in 0.0f64..6.28) {
            let cfg = ShellConfig::from_ratio(2, 1.0, 3.0, ratio).unwrap();
            let f = derive_frame(&cfg).unwrap();
            let outer = f.to_cartesian(&BisphericalPoint::new(f.xi2, theta, vec![0.3, phi]).unwrap()).unwrap();
            let d2 = (outer[0] - f.t0).powi(2) + outer[1..].iter().map(|v| v * v).sum::<f64>();
            prop_assert!((d2.sqrt() - 3.0).abs() < 1e-12 * 3.0);
            let inner = f.to_cartesian(&BisphericalPoint::new(f.xi1, theta, vec![0.3, phi]).unwrap()).unwrap();
            let c = f.t0 - cfg.t;
            let d1 = (inner[0] - c).powi(2) + inner[1..].iter().map(|v| v * v).sum::<f64>();
            prop_assert!((d1.sqrt() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn axisym_round_trip(xi in 0.05f64..3.0, theta in 0.0f64..std::f64::consts::PI) {
            let f = example1();
            let x = f.to_cartesian(&BisphericalPoint::axisym(1, xi, theta).unwrap()).unwrap();
            let (xi_b, theta_b) = f.from_cartesian_axisym(x[0], x[1]).unwrap();
            prop_assert!((xi_b - xi).abs() < 1e-12);
            prop_assert!((theta_b - theta).abs() < 1e-12);
        }

        #[test]
        fn volume_weight_matches_scale_factor_form(n in 1u32..5, xi in 0.1f64..2.5, theta in 0.01f64..3.13) {
            let f = example1();
            let direct = f.axisym_volume_weight(n, xi, theta);
            let h = f.scale_factor(xi, theta).unwrap();
            let via_h = h.powi(n as i32 + 2) * theta.sin().powi(n as i32);
            prop_assert!((direct - via_h).abs() <= 1e-13 * direct.abs());
        }
    }
}
