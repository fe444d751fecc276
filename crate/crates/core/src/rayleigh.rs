//! Truncated eigenfunctions and their Rayleigh quotients.
//!
//! The `m`-term eigenfunction is
//!
//! ```text
//! u(ξ, θ) = (cosh ξ − cos θ)^(n/2) Σ_{k<m} C̃_k R_k(ξ) G_k^(n/2)(cos θ),
//! R_k(ξ)  = sinh(a(ξ₁ − ξ)) / sinh(a(ξ₁ − ξ₂)),   a = k + n/2,
//! ```
//!
//! harmonic in the shell and zero on the inner sphere. The eigenvector of
//! `L_m` lives in a symmetrised basis; `C̃_k = ρ_k · a_k` with the scaling from
//! [`basis_scaling`](crate::operator::basis_scaling).

use crate::error::{Error, Result};
use crate::gegenbauer::{cos_expansion_table, gegenbauer_all, gegenbauer_deriv_all};
use crate::geometry::BisphericalFrame;
use crate::operator::{assemble, basis_scaling, coupling_c_sq};
use crate::quadrature::{default_rel_tol, integrate_2d, theta_integrals};
use crate::scalar::Real;
use crate::trideig::smallest_eigenvalues;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedEigenfunction<T> {
    pub frame: BisphericalFrame<T>,
    pub n: u32,
    /// Eigenvalue of `L_m` of the requested rank.
    pub sigma: T,
    pub rank: usize,
    /// Unit-norm eigenvector of `L_m`.
    pub eigenvector: Vec<T>,
    /// Series coefficients `C̃_0 … C̃_{m−1}`.
    pub coeffs: Vec<T>,
}

/// Eigenpair of rank `rank` of `L_m`, wrapped as a series.
pub fn truncated_eigenfunction<T: Real>(
    frame: &BisphericalFrame<T>,
    n: u32,
    m: usize,
    rank: usize,
) -> Result<TruncatedEigenfunction<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("truncation size must be >= 1".into()));
    }
    let mat = assemble(frame, n, m);
    let pairs = smallest_eigenvalues(&mat, rank, T::lit(4.0) * T::epsilon())?;
    let pair = pairs.into_iter().last().expect("rank >= 1");
    let scaling = basis_scaling(frame, n, m);
    let coeffs = pair.vector.iter().zip(&scaling).map(|(&a, &r)| a * r).collect();
    Ok(TruncatedEigenfunction {
        frame: *frame,
        n,
        sigma: pair.value,
        rank,
        eigenvector: pair.vector,
        coeffs,
    })
}

/// `cosh ξ − cos θ` without cancellation near the focus direction.
fn gap<T: Real>(xi: T, theta: T) -> T {
    let a = (xi * T::half()).sinh();
    let b = (theta * T::half()).sin();
    T::two() * (a * a + b * b)
}

impl<T: Real> TruncatedEigenfunction<T> {
    /// Truncation size `m`.
    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    fn lambda(&self) -> T {
        T::from_int(self.n as i64) * T::half()
    }

    fn exponent(&self, k: usize) -> T {
        T::from_int(k as i64) + self.lambda()
    }

    /// `R_k(ξ)` and `R_k'(ξ)`, written with decaying exponentials only.
    fn radial(&self, k: usize, xi: T) -> (T, T) {
        let f = &self.frame;
        let a = self.exponent(k);
        let lead = (-(a * (xi - f.xi2))).exp();
        let denom = -(-(T::two() * a * (f.xi1 - f.xi2))).exp_m1();
        let inner = (-(T::two() * a * (f.xi1 - xi))).exp();
        let value = lead * (-(-(T::two() * a * (f.xi1 - xi))).exp_m1()) / denom;
        let deriv = -a * lead * (T::one() + inner) / denom;
        (value, deriv)
    }

    pub fn eval(&self, xi: T, theta: T) -> T {
        let m = self.size();
        let s = theta.cos();
        let g = gegenbauer_all(self.lambda(), m - 1, s);
        let sum = (0..m).fold(T::zero(), |acc, k| acc + self.coeffs[k] * self.radial(k, xi).0 * g[k]);
        gap(xi, theta).pow_half_int(self.n) * sum
    }

    /// `(∂u/∂ξ, ∂u/∂θ)`.
    pub fn eval_gradient(&self, xi: T, theta: T) -> (T, T) {
        let m = self.size();
        let lambda = self.lambda();
        let (sin_t, cos_t) = theta.sin_cos();
        let g = gegenbauer_all(lambda, m - 1, cos_t);
        let dg = gegenbauer_deriv_all(lambda, m - 1, cos_t);
        let (mut s, mut s_xi, mut s_th) = (T::zero(), T::zero(), T::zero());
        for k in 0..m {
            let (r, dr) = self.radial(k, xi);
            let c = self.coeffs[k];
            s += c * r * g[k];
            s_xi += c * dr * g[k];
            s_th -= c * r * dg[k] * sin_t;
        }
        let q = gap(xi, theta);
        let qp = q.pow_half_int(self.n);
        // d/dξ q^λ = λ q^(λ−1) sinh ξ, d/dθ q^λ = λ q^(λ−1) sin θ
        let qm = lambda * qp / q;
        (qm * xi.sinh() * s + qp * s_xi, qm * sin_t * s + qp * s_th)
    }

    /// Coefficients `D_0 … D_m` with
    /// `∂u/∂n |_(ξ=ξ₂) = (cosh ξ₂ − cos θ)^(n/2) Σ_k D_k G_k(cos θ)`,
    /// the normal pointing out of the shell.
    pub fn boundary_normal_series(&self) -> Vec<T> {
        let f = &self.frame;
        let m = self.size();
        let n = self.n;
        let nn = T::from_int(n as i64);
        let c2: Vec<T> = (0..=m + 1).map(|k| coupling_c_sq(f, n, k)).collect();
        let coeff = |k: isize| -> T {
            if k < 0 || k as usize >= m {
                T::zero()
            } else {
                self.coeffs[k as usize]
            }
        };
        let scale = -T::one() / (T::two() * f.alpha);
        (0..=m)
            .map(|k| {
                let kk = T::from_int(k as i64);
                let ki = k as isize;
                let mut term = nn * f.sinh_xi2() * coeff(ki)
                    - f.cosh_xi2() * (kk + kk + nn) * c2[k] * coeff(ki)
                    + (kk + nn) * c2[k + 1] * coeff(ki + 1);
                if k > 0 {
                    term += kk * c2[k - 1] * coeff(ki - 1);
                }
                scale * term
            })
            .collect()
    }

    /// Green-identity form: `∫ u ∂u/∂n dS / ∫ u² dS` over the outer sphere,
    /// with the reduced θ-integrals at the default tolerance.
    pub fn rayleigh_quotient(&self) -> Result<T> {
        self.rayleigh_quotient_with_tol(default_rel_tol::<T>())
    }

    pub fn rayleigh_quotient_with_tol(&self, rel_tol: T) -> Result<T> {
        let m = self.size();
        let table = cos_expansion_table(self.lambda(), m);
        let fold = |series: &[T]| -> Vec<T> {
            let mut out = vec![T::zero(); m + 1];
            for (k, &c) in series.iter().enumerate() {
                for (p, &t) in table[k].iter().enumerate() {
                    out[p] += c * t;
                }
            }
            out
        };
        let a = fold(&self.coeffs);
        let b = fold(&self.boundary_normal_series());
        let integrals = theta_integrals(&self.frame, self.n, 2 * m, 1, rel_tol)?;
        // ∫ cos pθ cos qθ w = ½ (I_|p−q| + I_(p+q))
        let pair = |x: &[T], y: &[T]| -> T {
            let mut acc = T::zero();
            for (p, &xp) in x.iter().enumerate() {
                if xp == T::zero() {
                    continue;
                }
                let mut row = T::zero();
                for (q, &yq) in y.iter().enumerate() {
                    row += yq * (integrals[p.abs_diff(q)] + integrals[p + q]);
                }
                acc += xp * row;
            }
            acc * T::half()
        };
        let numerator = pair(&a, &b);
        let denominator = pair(&a, &a);
        Ok(numerator / denominator)
    }

    /// Volume form: `∫∫ |∇u|² dV / ∫ u² dS` with nested adaptive quadrature.
    pub fn rayleigh_quotient_2d(&self, rel_tol: T) -> Result<T> {
        let f = &self.frame;
        let n = self.n;
        let alpha = f.alpha;
        let numerator = integrate_2d(
            |xi, theta| {
                let (ux, ut) = self.eval_gradient(xi, theta);
                let h = alpha / gap(xi, theta);
                (ux * ux + ut * ut) * h.powi(n as i32) * theta.sin().powi(n as i32)
            },
            (f.xi2, f.xi1),
            (T::zero(), T::pi()),
            rel_tol,
        )?;
        let denominator = crate::quadrature::integrate_1d(
            |theta| {
                let u = self.eval(f.xi2, theta);
                u * u * f.surface_weight(n, theta)
            },
            T::zero(),
            T::pi(),
            rel_tol,
        )?;
        Ok(numerator.value / denominator.value)
    }
}

/// `E_(m,N) = |σ_ref − RQ(u_m)|` for the first-mode truncation of size `m`.
pub fn validation_gap<T: Real>(frame: &BisphericalFrame<T>, n: u32, m: usize, sigma_ref: T) -> Result<T> {
    validation_gap_with_tol(frame, n, m, sigma_ref, default_rel_tol::<T>())
}

pub fn validation_gap_with_tol<T: Real>(
    frame: &BisphericalFrame<T>,
    n: u32,
    m: usize,
    sigma_ref: T,
    rel_tol: T,
) -> Result<T> {
    let u = truncated_eigenfunction(frame, n, m, 1)?;
    Ok((sigma_ref - u.rayleigh_quotient_with_tol(rel_tol)?).abs())
}
