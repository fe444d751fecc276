//! Finite sections of the Dirichlet-to-Neumann operator on the outer sphere.
//!
//! In the normalised Gegenbauer basis the operator is tridiagonal:
//!
//! ```text
//! L_N = (1/2α) · (diag(d_0, …, d_{N−1}) − T_N),   T_N[k−1,k] = w_k c_{k−1} c_k
//! d_k = (n + 2k) c_k² cosh ξ₂ − n sinh ξ₂
//! w_k = √((k + n − 1) k)
//! c_m = tanh((m + n/2)(ξ₁ − ξ₂))^(−1/2)
//! ```

use crate::geometry::BisphericalFrame;
use crate::scalar::Real;

/// Symmetric tridiagonal matrix stored as its diagonal and sub-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix<T> {
    pub diag: Vec<T>,
    pub offdiag: Vec<T>,
}

impl<T: Real> TridiagonalMatrix<T> {
    pub fn new(diag: Vec<T>, offdiag: Vec<T>) -> Self {
        assert!(!diag.is_empty(), "tridiagonal matrix must be at least 1x1");
        assert_eq!(offdiag.len() + 1, diag.len(), "off-diagonal length must be N-1");
        Self { diag, offdiag }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> T {
        let n = self.size();
        (0..n).fold(T::zero(), |acc, i| {
            let mut row = self.diag[i].abs();
            if i > 0 {
                row += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                row += self.offdiag[i].abs();
            }
            acc.max(row)
        })
    }

    /// `T v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Leading `k × k` principal submatrix.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.size());
        Self { diag: self.diag[..k].to_vec(), offdiag: self.offdiag[..k - 1].to_vec() }
    }
}

/// `c_m`, computed from `coth(x) = 1 + 2/expm1(2x)` so that `c_m − 1` keeps
/// full relative accuracy as it decays.
pub fn coupling_c<T: Real>(frame: &BisphericalFrame<T>, n: u32, m: usize) -> T {
    coupling_c_sq(frame, n, m).sqrt()
}

/// `c_m² − 1 = coth(x) − 1 = 2/expm1(2x)`, `x = (m + n/2)(ξ₁ − ξ₂)`.
pub fn coupling_c_sq_minus_one<T: Real>(frame: &BisphericalFrame<T>, n: u32, m: usize) -> T {
    let x = (T::from_int(m as i64) + T::from_int(n as i64) * T::half()) * (frame.xi1 - frame.xi2);
    T::two() / (T::two() * x).exp_m1()
}

pub fn coupling_c_sq<T: Real>(frame: &BisphericalFrame<T>, n: u32, m: usize) -> T {
    T::one() + coupling_c_sq_minus_one(frame, n, m)
}

pub fn diag_d<T: Real>(frame: &BisphericalFrame<T>, n: u32, k: usize) -> T {
    let nn = T::from_int(n as i64);
    let weight = nn + T::from_int(2 * k as i64);
    weight * coupling_c_sq(frame, n, k) * frame.cosh_xi2() - nn * frame.sinh_xi2()
}

pub fn offdiag_w<T: Real>(n: u32, k: usize) -> T {
    debug_assert!(k >= 1);
    (T::from_int((k + n as usize - 1) as i64) * T::from_int(k as i64)).sqrt()
}

/// The finite section `L_N`.
pub fn assemble<T: Real>(frame: &BisphericalFrame<T>, n: u32, size: usize) -> TridiagonalMatrix<T> {
    assert!(size >= 1, "finite section size must be >= 1");
    let scale = T::one() / (T::two() * frame.alpha);
    let c: Vec<T> = (0..size).map(|k| coupling_c(frame, n, k)).collect();
    let diag = (0..size).map(|k| diag_d(frame, n, k) * scale).collect();
    let offdiag = (1..size)
        .map(|k| -(offdiag_w::<T>(n, k) * c[k - 1] * c[k]) * scale)
        .collect();
    TridiagonalMatrix { diag, offdiag }
}

/// Ratios `ρ_k = (∏_{j≤k} √(j/(j+n−1))) / c_k` between the symmetric basis used
/// by `L_N` and the raw Gegenbauer coefficients of the boundary trace.
pub fn basis_scaling<T: Real>(frame: &BisphericalFrame<T>, n: u32, size: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(size);
    let mut prod = T::one();
    for k in 0..size {
        if k > 0 {
            prod = prod * (T::from_int(k as i64) / T::from_int((k + n as usize - 1) as i64)).sqrt();
        }
        out.push(prod / coupling_c(frame, n, k));
    }
    out
}
