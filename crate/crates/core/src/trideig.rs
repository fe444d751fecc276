//! Smallest eigenpairs of symmetric tridiagonal matrices by Sturm-count
//! bisection followed by inverse iteration.

use crate::error::{Error, Result};
use crate::operator::TridiagonalMatrix;
use crate::scalar::Real;

const MAX_INVERSE_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    /// Unit Euclidean norm, first nonzero component positive.
    pub vector: Vec<T>,
    /// 1-based rank among the ascending eigenvalues.
    pub index: usize,
}

fn pivot_floor<T: Real>(m: &TridiagonalMatrix<T>) -> T {
    let scale = m.norm_inf();
    let floor = T::epsilon() * scale;
    if floor > T::zero() {
        floor
    } else {
        T::min_positive()
    }
}

fn count_below<T: Real>(m: &TridiagonalMatrix<T>, lam: T, floor: T) -> usize {
    let mut count = 0;
    let mut q = T::one();
    for i in 0..m.size() {
        q = if i == 0 {
            m.diag[0] - lam
        } else {
            let e = m.offdiag[i - 1];
            m.diag[i] - lam - e * e / q
        };
        if q.abs() < floor {
            q = if q < T::zero() { -floor } else { floor };
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Number of eigenvalues strictly below `lam`, from the signs of the `LDLᵀ`
/// pivots of `T − lam·I`.
pub fn sturm_count<T: Real>(m: &TridiagonalMatrix<T>, lam: T) -> usize {
    count_below(m, lam, pivot_floor(m))
}

fn gershgorin<T: Real>(m: &TridiagonalMatrix<T>) -> (T, T) {
    let n = m.size();
    let mut lo = m.diag[0];
    let mut hi = m.diag[0];
    for i in 0..n {
        let mut r = T::zero();
        if i > 0 {
            r += m.offdiag[i - 1].abs();
        }
        if i + 1 < n {
            r += m.offdiag[i].abs();
        }
        lo = lo.min(m.diag[i] - r);
        hi = hi.max(m.diag[i] + r);
    }
    let pad = (hi - lo).max(m.norm_inf()) * T::lit(1e-3) + T::min_positive();
    (lo - pad, hi + pad)
}

/// Bisection for the `index`-th smallest eigenvalue (1-based).
fn bisect<T: Real>(m: &TridiagonalMatrix<T>, index: usize, tol: T, bounds: (T, T), floor: T) -> T {
    let (mut lo, mut hi) = bounds;
    let abs_floor = T::min_positive() / T::epsilon();
    loop {
        let mid = (lo + hi) * T::half();
        let width = hi - lo;
        if width <= tol * lo.abs().max(hi.abs()) || width <= abs_floor || !(mid > lo && mid < hi) {
            return mid;
        }
        if count_below(m, mid, floor) >= index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// The `count` smallest eigenpairs in ascending order. Each eigenvalue is
/// bracketed to relative width `max(rel_tol, 4ε)`.
pub fn smallest_eigenvalues<T: Real>(
    m: &TridiagonalMatrix<T>,
    count: usize,
    rel_tol: T,
) -> Result<Vec<EigenPair<T>>> {
    if count == 0 || count > m.size() {
        return Err(Error::Rank { rank: count, size: m.size() });
    }
    if rel_tol < T::epsilon() {
        return Err(Error::ToleranceTooSmall {
            requested: rel_tol.to_f64_lossy(),
            epsilon: T::epsilon().to_f64_lossy(),
        });
    }
    let tol = rel_tol.max(T::lit(4.0) * T::epsilon());
    let floor = pivot_floor(m);
    let bounds = gershgorin(m);
    let mut out = Vec::with_capacity(count);
    for index in 1..=count {
        let value = bisect(m, index, tol, bounds, floor);
        let vector = eigenvector_inverse_iteration(m, value)?;
        out.push(EigenPair { value, vector, index });
    }
    Ok(out)
}

/// Eigenvalue of rank `index` (1-based) without its eigenvector.
pub fn eigenvalue<T: Real>(m: &TridiagonalMatrix<T>, index: usize, rel_tol: T) -> Result<T> {
    if index == 0 || index > m.size() {
        return Err(Error::Rank { rank: index, size: m.size() });
    }
    if rel_tol < T::epsilon() {
        return Err(Error::ToleranceTooSmall {
            requested: rel_tol.to_f64_lossy(),
            epsilon: T::epsilon().to_f64_lossy(),
        });
    }
    let tol = rel_tol.max(T::lit(4.0) * T::epsilon());
    Ok(bisect(m, index, tol, gershgorin(m), pivot_floor(m)))
}

/// LU factorisation of `T − shift·I` with partial pivoting. Row `i` of `U`
/// holds `(u0[i], u1[i], u2[i])` on columns `i, i+1, i+2`.
struct ShiftedLu<T> {
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
    mult: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    fn factor(m: &TridiagonalMatrix<T>, shift: T, floor: T) -> Self {
        let n = m.size();
        let mut u0 = vec![T::zero(); n];
        let mut u1 = vec![T::zero(); n];
        let mut u2 = vec![T::zero(); n];
        let mut mult = vec![T::zero(); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        // current row i: (a, b, c) on columns i, i+1, i+2
        let mut a = m.diag[0] - shift;
        let mut b = if n > 1 { m.offdiag[0] } else { T::zero() };
        let mut c = T::zero();
        for i in 0..n.saturating_sub(1) {
            // next row i+1: (e, d, f) on columns i, i+1, i+2
            let e = m.offdiag[i];
            let d = m.diag[i + 1] - shift;
            let f = if i + 2 < n { m.offdiag[i + 1] } else { T::zero() };
            if e.abs() > a.abs() {
                swapped[i] = true;
                let l = a / e;
                mult[i] = l;
                u0[i] = e;
                u1[i] = d;
                u2[i] = f;
                a = b - l * d;
                b = c - l * f;
                c = T::zero();
            } else {
                if a.abs() < floor {
                    a = if a < T::zero() { -floor } else { floor };
                }
                let l = e / a;
                mult[i] = l;
                u0[i] = a;
                u1[i] = b;
                u2[i] = c;
                a = d - l * b;
                b = f - l * c;
                c = T::zero();
            }
        }
        if a.abs() < floor {
            a = if a < T::zero() { -floor } else { floor };
        }
        u0[n - 1] = a;
        Self { u0, u1, u2, mult, swapped }
    }

    fn solve(&self, rhs: &mut [T]) {
        let n = rhs.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                rhs.swap(i, i + 1);
            }
            let l = self.mult[i];
            let r = rhs[i];
            rhs[i + 1] -= l * r;
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= self.u1[i] * rhs[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * rhs[i + 2];
            }
            rhs[i] = s / self.u0[i];
        }
    }
}

fn normalize<T: Real>(v: &mut [T]) {
    let big = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if big == T::zero() {
        return;
    }
    let norm = v.iter().fold(T::zero(), |acc, &x| acc + (x / big) * (x / big)).sqrt() * big;
    let sign = v.iter().find(|x| **x != T::zero()).map_or(T::one(), |x| x.signum_or_one());
    let inv = sign / norm;
    for x in v.iter_mut() {
        *x *= inv;
    }
}

fn residual_inf<T: Real>(m: &TridiagonalMatrix<T>, lam: T, v: &[T]) -> T {
    m.apply(v)
        .iter()
        .zip(v)
        .fold(T::zero(), |acc, (tv, &x)| acc.max((*tv - lam * x).abs()))
}

/// One inverse-iteration step with right-hand side `e_r`, where the twist
/// index `r` minimises `|γ_r|` of the two-sided factorisation of `T − lam·I`.
/// Components away from `r` are products of pivot ratios, so exponentially
/// small eigenvector tails keep their relative accuracy.
fn twisted_solve<T: Real>(m: &TridiagonalMatrix<T>, lam: T, floor: T) -> Vec<T> {
    let n = m.size();
    let clamp = |q: T| if q.abs() < floor { if q < T::zero() { -floor } else { floor } } else { q };
    let mut top = vec![T::zero(); n];
    let mut bottom = vec![T::zero(); n];
    top[0] = clamp(m.diag[0] - lam);
    for i in 1..n {
        let e = m.offdiag[i - 1];
        top[i] = clamp(m.diag[i] - lam - e * e / top[i - 1]);
    }
    bottom[n - 1] = clamp(m.diag[n - 1] - lam);
    for i in (0..n - 1).rev() {
        let e = m.offdiag[i];
        bottom[i] = clamp(m.diag[i] - lam - e * e / bottom[i + 1]);
    }
    let twist = (0..n)
        .map(|r| (r, (top[r] + bottom[r] - (m.diag[r] - lam)).abs()))
        .fold((0, None::<T>), |best, (r, g)| match best.1 {
            Some(b) if b <= g => best,
            _ => (r, Some(g)),
        })
        .0;
    let mut v = vec![T::zero(); n];
    v[twist] = T::one();
    for i in (0..twist).rev() {
        v[i] = -(m.offdiag[i] / top[i]) * v[i + 1];
    }
    for i in twist + 1..n {
        v[i] = -(m.offdiag[i - 1] / bottom[i]) * v[i - 1];
    }
    v
}

/// Eigenvector for an eigenvalue approximation `lam`. A twisted solve is tried
/// first; if its residual is too large, classical inverse iteration from the
/// all-ones vector takes over.
pub fn eigenvector_inverse_iteration<T: Real>(m: &TridiagonalMatrix<T>, lam: T) -> Result<Vec<T>> {
    let n = m.size();
    if n == 1 {
        return Ok(vec![T::one()]);
    }
    let floor = pivot_floor(m);
    let target = T::lit(64.0) * T::epsilon() * m.norm_inf();
    let mut v = twisted_solve(m, lam, floor);
    if v.iter().all(|x| x.is_finite()) {
        normalize(&mut v);
        if residual_inf(m, lam, &v) <= target {
            return Ok(v);
        }
    }
    let lu = ShiftedLu::factor(m, lam, floor);
    let mut v = vec![T::one(); n];
    normalize(&mut v);
    for _ in 0..MAX_INVERSE_ITERATIONS {
        lu.solve(&mut v);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InverseIteration(MAX_INVERSE_ITERATIONS));
        }
        normalize(&mut v);
        if residual_inf(m, lam, &v) <= target {
            return Ok(v);
        }
    }
    Err(Error::InverseIteration(MAX_INVERSE_ITERATIONS))
}


#[cfg(test)]
mod tests {
    use super::oracle::dense_eigenvalues;
    use super::*;
    use crate::geometry::{derive_frame, ShellConfig};
    use crate::operator::{assemble, diag_d};
    use crate::DoubleDouble;
    use proptest::prelude::*;

    fn two_by_two() -> TridiagonalMatrix<f64> {
        TridiagonalMatrix::new(vec![2.0, 2.0], vec![-1.0])
    }

    fn example1() -> crate::geometry::BisphericalFrame<f64> {
        derive_frame(&ShellConfig::new(1, 1.0, 3.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn sturm_small_cases() {
        let one = TridiagonalMatrix::new(vec![0.7], vec![]);
        assert_eq!(sturm_count(&one, 0.5), 0);
        assert_eq!(sturm_count(&one, 0.9), 1);
        assert_eq!(sturm_count(&two_by_two(), 1.5), 1);
        assert_eq!(sturm_count(&two_by_two(), 0.5), 0);
        assert_eq!(sturm_count(&two_by_two(), 3.5), 2);
    }

    #[test]
    fn two_by_two_spectrum_and_vector() {
        let pairs = smallest_eigenvalues(&two_by_two(), 2, 1e-15).unwrap();
        assert!((pairs[0].value - 1.0).abs() < 1e-14);
        assert!((pairs[1].value - 3.0).abs() < 1e-14);
        assert_eq!(pairs[1].index, 2);
        let v = eigenvector_inverse_iteration(&two_by_two(), 1.0).unwrap();
        let h = 0.5f64.sqrt();
        assert!((v[0] - h).abs() < 1e-14 && (v[1] - h).abs() < 1e-14);
        let w = &pairs[1].vector;
        assert!((w[0] - h).abs() < 1e-12 && (w[1] + h).abs() < 1e-12);
    }

    #[test]
    fn one_by_one() {
        let f = example1();
        let m = assemble(&f, 1, 1);
        let p = smallest_eigenvalues(&m, 1, 1e-15).unwrap();
        assert!((p[0].value - diag_d(&f, 1, 0) / (2.0 * f.alpha)).abs() < 1e-15);
        assert_eq!(p[0].vector, vec![1.0]);
        assert_eq!(eigenvector_inverse_iteration(&m, 0.3).unwrap(), vec![1.0]);
    }

    #[test]
    fn rejects_unreachable_tolerance_and_bad_rank() {
        let m = two_by_two();
        assert!(matches!(smallest_eigenvalues(&m, 1, 1e-17), Err(Error::ToleranceTooSmall { .. })));
        assert!(matches!(smallest_eigenvalues(&m, 3, 1e-12), Err(Error::Rank { .. })));
        assert!(matches!(eigenvalue(&m, 0, 1e-12), Err(Error::Rank { .. })));
    }

    #[test]
    fn operator_section_matches_dense_oracle() {
        let m = assemble(&example1(), 1, 32);
        let dense = dense_eigenvalues(&m.diag, &m.offdiag);
        let p = smallest_eigenvalues(&m, 1, 1e-15).unwrap();
        assert!((p[0].value - dense[0]).abs() <= 1e-13 * dense[0]);
    }

    #[test]
    fn residual_on_l64() {
        let m = assemble(&example1(), 1, 64);
        for p in smallest_eigenvalues(&m, 3, 1e-15).unwrap() {
            assert!(residual_inf(&m, p.value, &p.vector) <= 64.0 * f64::EPSILON * m.norm_inf());
            let norm: f64 = p.vector.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn first_eigenvector_is_positive_and_sigma_decreases_in_n() {
        for n in 1..=3u32 {
            for &ratio in &[0.2, 0.6, 0.9] {
                let f = derive_frame(&ShellConfig::from_ratio(n, 1.0, 3.0, ratio).unwrap()).unwrap();
                let mut prev = f64::INFINITY;
                for k in 1..=9 {
                    let m = assemble(&f, n, 1 << k);
                    let p = &smallest_eigenvalues(&m, 1, 1e-15).unwrap()[0];
                    assert!(p.value > 0.0);
                    assert!(p.value < prev || (prev - p.value).abs() <= 4.0 * f64::EPSILON * prev);
                    prev = p.value;
                    // the tail may decay below the binary64 exponent range; every
                    // representable component must be positive
                    let first_zero = p.vector.iter().position(|&x| x == 0.0).unwrap_or(p.vector.len());
                    assert!(first_zero >= p.vector.len().min(64), "n={n} ratio={ratio} N={}", 1 << k);
                    assert!(p.vector[..first_zero].iter().all(|&x| x > 0.0), "n={n} ratio={ratio} N={}", 1 << k);
                    assert!(p.vector[first_zero..].iter().all(|&x| x == 0.0));
                }
            }
        }
    }

    #[test]
    fn extended_precision_eigenvalue() {
        type D = DoubleDouble;
        let m = TridiagonalMatrix::new(vec![D::new(2.0); 2], vec![D::new(-1.0)]);
        let p = smallest_eigenvalues(&m, 2, D::new(1e-30)).unwrap();
        assert!((p[0].value - D::new(1.0)).abs() < D::new(1e-30));
        assert!((p[1].value - D::new(3.0)).abs() < D::new(1e-30));
        let h = D::new(0.5).sqrt();
        assert!((p[0].vector[0] - h).abs() < D::new(1e-30));
    }

    fn tridiag_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=8).prop_flat_map(|n| {
            (
                proptest::collection::vec(-5.0f64..5.0, n),
                proptest::collection::vec(-3.0f64..3.0, n - 1),
            )
        })
    }

    proptest! {
        #[test]
        fn eigenvalues_match_dense_oracle((diag, off) in tridiag_strategy()) {
            let m = TridiagonalMatrix::new(diag.clone(), off.clone());
            let dense = dense_eigenvalues(&diag, &off);
            let pairs = smallest_eigenvalues(&m, diag.len(), 1e-15).unwrap();
            for (p, want) in pairs.iter().zip(&dense) {
                prop_assert!((p.value - want).abs() < 1e-12, "{} vs {}", p.value, want);
            }
        }

        #[test]
        fn sturm_counts_match_dense_oracle((diag, off) in tridiag_strategy(), shift in -12.0f64..12.0) {
            let m = TridiagonalMatrix::new(diag.clone(), off.clone());
            let dense = dense_eigenvalues(&diag, &off);
            prop_assume!(dense.iter().all(|e| (e - shift).abs() > 1e-9));
            let exact = dense.iter().filter(|&&e| e < shift).count();
            prop_assert_eq!(sturm_count(&m, shift), exact);
        }
    }
}
