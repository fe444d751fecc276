//! Gegenbauer (ultraspherical) polynomials `G_m^(λ)` in the generating-function
//! normalisation `(1 − 2sr + r²)^(−λ) = Σ G_m^(λ)(s) r^m`.

use crate::scalar::Real;

/// `G_m^(λ)(cos θ) = Σ_k coeff_k · cos((m − 2k) θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosExpansion<T> {
    pub order: usize,
    /// `(frequency, coefficient)` pairs, frequencies `m, m−2, …, −m`.
    pub terms: Vec<(i64, T)>,
}

impl<T: Real> CosExpansion<T> {
    pub fn eval(&self, theta: T) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, &(p, c)| acc + c * (T::from_int(p) * theta).cos())
    }

    /// Coefficients merged by `|p|`, indexed `0..=order`.
    pub fn folded(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.order + 1];
        for &(p, c) in &self.terms {
            out[p.unsigned_abs() as usize] += c;
        }
        out
    }
}

pub fn gegenbauer_eval<T: Real>(lambda: T, m: usize, s: T) -> T {
    let mut prev = T::one();
    if m == 0 {
        return prev;
    }
    let mut cur = T::two() * lambda * s;
    for k in 2..=m {
        let kk = T::from_int(k as i64);
        let next = (T::two() * (kk + lambda - T::one()) * s * cur - (kk + T::two() * lambda - T::two()) * prev) / kk;
        prev = cur;
        cur = next;
    }
    cur
}

/// `G_0 … G_{m_max}` at `s` from one recurrence sweep.
pub fn gegenbauer_all<T: Real>(lambda: T, m_max: usize, s: T) -> Vec<T> {
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(T::one());
    if m_max == 0 {
        return out;
    }
    out.push(T::two() * lambda * s);
    for k in 2..=m_max {
        let kk = T::from_int(k as i64);
        let next = (T::two() * (kk + lambda - T::one()) * s * out[k - 1]
            - (kk + T::two() * lambda - T::two()) * out[k - 2])
            / kk;
        out.push(next);
    }
    out
}

/// `d/ds G_m^(λ)(s) = 2λ G_{m−1}^(λ+1)(s)`.
pub fn gegenbauer_deriv<T: Real>(lambda: T, m: usize, s: T) -> T {
    if m == 0 {
        return T::zero();
    }
    T::two() * lambda * gegenbauer_eval(lambda + T::one(), m - 1, s)
}

/// Derivatives of `G_0 … G_{m_max}` at `s`.
pub fn gegenbauer_deriv_all<T: Real>(lambda: T, m_max: usize, s: T) -> Vec<T> {
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(T::zero());
    if m_max == 0 {
        return out;
    }
    let shifted = gegenbauer_all(lambda + T::one(), m_max - 1, s);
    out.extend(shifted.into_iter().map(|g| T::two() * lambda * g));
    out
}

/// Rising factorial ratios `λ^(k)/k!` for `k = 0..=m`.
fn rising_ratios<T: Real>(lambda: T, m: usize) -> Vec<T> {
    let mut r = Vec::with_capacity(m + 1);
    r.push(T::one());
    for k in 1..=m {
        let kk = T::from_int(k as i64);
        let next = r[k - 1] * (lambda + kk - T::one()) / kk;
        r.push(next);
    }
    r
}

pub fn cos_expansion<T: Real>(lambda: T, m: usize) -> CosExpansion<T> {
    let r = rising_ratios(lambda, m);
    let terms = (0..=m)
        .map(|k| (m as i64 - 2 * k as i64, r[k] * r[m - k]))
        .collect();
    CosExpansion { order: m, terms }
}

/// Folded cosine coefficients for every order `0..=m_max`; row `m` has `m+1`
/// entries indexed by frequency.
pub fn cos_expansion_table<T: Real>(lambda: T, m_max: usize) -> Vec<Vec<T>> {
    let r = rising_ratios(lambda, m_max);
    (0..=m_max)
        .map(|m| {
            let mut row = vec![T::zero(); m + 1];
            for k in 0..=m {
                let p = (m as i64 - 2 * k as i64).unsigned_abs() as usize;
                row[p] += r[k] * r[m - k];
            }
            row
        })
        .collect()
}

/// `G_m^(λ)(1) = (2λ)^(m)/m!`.
pub fn value_at_one<T: Real>(lambda: T, m: usize) -> T {
    rising_ratios_of(T::two() * lambda, m)
}

fn rising_ratios_of<T: Real>(a: T, m: usize) -> T {
    (1..=m).fold(T::one(), |acc, k| {
        let kk = T::from_int(k as i64);
        acc * (a + kk - T::one()) / kk
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_1d;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn low_orders() {
        assert_eq!(gegenbauer_eval(1.7, 0, 0.3), 1.0);
        assert!((gegenbauer_eval(0.7, 1, 0.5) - 0.7).abs() < 1e-16);
        assert!((gegenbauer_eval(0.5, 2, 0.5) + 0.125).abs() < 1e-16);
        // G₂ = 2λ(λ+1)s² − λ
        let (l, s) = (1.3, -0.4);
        assert!((gegenbauer_eval(l, 2, s) - (2.0 * l * (l + 1.0) * s * s - l)).abs() < 1e-15);
        assert!((gegenbauer_eval(1.5, 7, -0.45) + 1.987_647_906_005_859_6).abs() < 1e-13);
    }

    #[test]
    fn legendre_table() {
        let table = [
            1.0,
            0.3,
            -0.365,
            -0.3825,
            0.072_937_5,
            0.345_386_25,
            0.129_181_187_5,
            -0.224_072_981_25,
            -0.239_074_591_015_625,
            0.063_700_381_757_812_5,
        ];
        let all = gegenbauer_all(0.5, 9, 0.3);
        for (m, &want) in table.iter().enumerate() {
            assert!((gegenbauer_eval(0.5, m, 0.3) - want).abs() < 1e-13, "m = {m}");
            assert!((all[m] - want).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn derivative_examples() {
        assert!((gegenbauer_deriv(0.5, 1, 0.9) - 1.0).abs() < 1e-16);
        assert_eq!(gegenbauer_deriv(2.0, 0, 0.1), 0.0);
        for &s in &[-0.8, -0.2, 0.35, 0.77] {
            let h = 1e-6;
            let fd = (gegenbauer_eval(0.5, 3, s + h) - gegenbauer_eval(0.5, 3, s - h)) / (2.0 * h);
            assert!((gegenbauer_deriv(0.5, 3, s) - fd).abs() < 1e-8);
        }
        let all = gegenbauer_deriv_all(1.5, 6, 0.42);
        for (m, d) in all.iter().enumerate() {
            assert!((d - gegenbauer_deriv(1.5, m, 0.42)).abs() < 1e-13);
        }
    }

    #[test]
    fn cos_expansion_low_orders() {
        let e0 = cos_expansion(1.3, 0);
        assert_eq!(e0.terms, vec![(0, 1.0)]);
        let e1 = cos_expansion(1.3, 1);
        assert_eq!(e1.terms.len(), 2);
        assert_eq!(e1.terms[0].0, 1);
        assert_eq!(e1.terms[1].0, -1);
        assert!((e1.terms[0].1 - 1.3).abs() < 1e-15 && (e1.terms[1].1 - 1.3).abs() < 1e-15);
        let th = 0.7;
        assert!((e1.eval(th) - gegenbauer_eval(1.3, 1, th.cos())).abs() < 1e-15);
    }

    #[test]
    fn cos_expansion_table_matches_single_rows() {
        let table = cos_expansion_table(1.0, 20);
        for (m, row) in table.iter().enumerate() {
            let single = cos_expansion(1.0, m).folded();
            for (a, b) in row.iter().zip(&single) {
                assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn orthogonality_by_quadrature() {
        for &lambda in &[0.5, 1.0, 1.5] {
            for j in 0..=12 {
                for k in (j + 1)..=12 {
                    // s = cos θ turns the weight (1−s²)^(λ−½) ds into sin^(2λ) θ dθ
                    let f = |th: f64| {
                        let s = th.cos();
                        gegenbauer_eval(lambda, j, s) * gegenbauer_eval(lambda, k, s) * th.sin().powf(2.0 * lambda)
                    };
                    let r = integrate_1d(f, 0.0, PI, 1e-13).unwrap();
                    assert!(r.value.abs() < 1e-10, "λ={lambda} j={j} k={k}: {}", r.value);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_by_endpoint_value(li in 0usize..5, m in 0usize..=64, s in -1.0f64..=1.0) {
            let lambda = [0.5, 1.0, 1.5, 2.0, 3.0][li];
            let top = gegenbauer_eval(lambda, m, 1.0);
            let closed = value_at_one(lambda, m);
            prop_assert!((top - closed).abs() <= 1e-10 * closed);
            prop_assert!(gegenbauer_eval(lambda, m, s).abs() <= top * (1.0 + 1e-12));
        }

        #[test]
        fn cos_expansion_matches_recurrence(li in 0usize..5, m in 0usize..=64, theta in 0.001f64..3.14) {
            let lambda = [0.5, 1.0, 1.5, 2.0, 3.0][li];
            let e = cos_expansion(lambda, m);
            prop_assert_eq!(e.terms.len(), m + 1);
            prop_assert!(e.terms.iter().all(|&(_, c)| c > 0.0));
            let direct = gegenbauer_eval(lambda, m, theta.cos());
            let scale = value_at_one(lambda, m);
            prop_assert!((e.eval(theta) - direct).abs() <= 1e-12 * scale);
        }
    }
}
