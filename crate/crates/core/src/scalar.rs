//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, operator, eigensolver and quadrature code is written against
//! [`Real`], so the same source runs in IEEE binary64 and in the
//! double-word [`DoubleDouble`](crate::DoubleDouble) type.

use std::fmt;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num, NumAssignOps, ToPrimitive};

/// Arithmetic profile tag carried through reports and output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    Binary64,
    Extended,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Binary64 => "binary64",
            Precision::Extended => "extended",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary64" | "f64" | "double" => Ok(Precision::Binary64),
            "extended" | "dd" | "double-double" => Ok(Precision::Extended),
            other => Err(format!("unknown precision `{other}` (expected binary64 or extended)")),
        }
    }
}

/// Real scalar with the elementary functions the finite-section method needs.
pub trait Real:
    Copy
    + Send
    + Sync
    + 'static
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Num
    + NumAssignOps
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
{
    const PRECISION: Precision;

    /// Unit roundoff of the type.
    fn epsilon() -> Self;
    /// Smallest positive normal value.
    fn min_positive() -> Self;
    fn pi() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn asinh(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn atan2(self, other: Self) -> Self;
    fn floor(self) -> Self;
    fn is_finite(self) -> bool;

    /// Number of significant decimal digits used when printing values.
    fn print_digits() -> usize;
    /// Scientific notation with `digits` significant digits.
    fn to_sci(self, digits: usize) -> String;
    /// Parses a decimal literal, keeping the full precision of the type.
    fn parse_decimal(s: &str) -> Option<Self>;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_int(k: i64) -> Self {
        Self::from_i64(k).expect("integer conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    fn signum_or_one(self) -> Self {
        if self < Self::zero() {
            -Self::one()
        } else {
            Self::one()
        }
    }

    fn powi(self, k: i32) -> Self {
        let mut base = if k < 0 { Self::one() / self } else { self };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// `self^(k/2)` for `self >= 0`; used for the `(cosh ξ − cos θ)^(n/2)` factors.
    fn pow_half_int(self, k: u32) -> Self {
        let whole = self.powi((k / 2) as i32);
        if k % 2 == 1 {
            whole * self.sqrt()
        } else {
            whole
        }
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Binary64;

    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn min_positive() -> Self {
        f64::MIN_POSITIVE
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn asinh(self) -> Self {
        f64::asinh(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn atan2(self, other: Self) -> Self {
        f64::atan2(self, other)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn print_digits() -> usize {
        15
    }
    fn to_sci(self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_half_int_matches_powf() {
        for k in 0..8u32 {
            let x = 2.75_f64;
            assert!((x.pow_half_int(k) - x.powf(k as f64 / 2.0)).abs() < 1e-13 * x.powf(4.0));
        }
    }

    #[test]
    fn precision_parses() {
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::Extended);
        assert_eq!("binary64".parse::<Precision>().unwrap(), Precision::Binary64);
        assert!("quad".parse::<Precision>().is_err());
    }
}
