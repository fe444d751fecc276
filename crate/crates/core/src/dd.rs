//! Double-word ("double-double") floating point.
//!
//! A value is the unevaluated sum `hi + lo` of two binary64 numbers with
//! `|lo| <= ulp(hi)/2`, giving roughly 106 bits (about 32 decimal digits) of
//! significand. Basic operations use error-free transformations; the
//! elementary functions reduce their argument and finish with either a Taylor
//! series or one Newton step seeded from the binary64 result.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

use crate::scalar::{Precision, Real};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
const SPLIT_THRESHOLD: f64 = 6.696_928_794_914_17e299;

const PI: DoubleDouble = DoubleDouble::from_parts(std::f64::consts::PI, 1.224_646_799_147_353_2e-16);
const FRAC_PI_2: [f64; 3] = [std::f64::consts::FRAC_PI_2, 6.123_233_995_736_766e-17, -1.497_384_904_859_169_8e-33];
const LN_2: DoubleDouble = DoubleDouble::from_parts(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);
const LN_2_PARTS: [f64; 3] = [std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17, 5.707_708_438_416_212e-34];

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    if a.abs() > SPLIT_THRESHOLD {
        let a = a * 3.725_290_298_461_914e-9; // 2^-28
        let t = SPLITTER * a;
        let hi = t - (t - a);
        let lo = a - hi;
        (hi * 268_435_456.0, lo * 268_435_456.0)
    } else {
        let t = SPLITTER * a;
        let hi = t - (t - a);
        (hi, a - hi)
    }
}

/// Dekker product: `a*b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    /// 2^-104.
    pub const EPSILON: Self = Self { hi: 4.930_380_657_631_324e-32, lo: 0.0 };

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn normalized(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    fn add_f64(self, b: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, b);
        Self::normalized(s1, s2 + self.lo)
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::normalized(p, e + self.lo * b)
    }

    fn mul_pow2(self, b: f64) -> Self {
        Self { hi: self.hi * b, lo: self.lo * b }
    }

    fn sqr(self) -> Self {
        let (p, e) = two_prod(self.hi, self.hi);
        Self::normalized(p, e + 2.0 * self.hi * self.lo + self.lo * self.lo)
    }

    pub fn is_nan(self) -> bool {
        self.hi.is_nan()
    }

    fn nan() -> Self {
        Self { hi: f64::NAN, lo: f64::NAN }
    }

    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            Real::floor(self)
        } else {
            -Real::floor(-self)
        }
    }

    /// `exp(r) - 1` for `|r| <= ln2/2`, by scaling, Taylor series, and
    /// repeated doubling `e^{2x} - 1 = 2s + s^2`.
    fn expm1_reduced(r: Self) -> Self {
        const SQUARINGS: i32 = 10;
        let x = r.mul_pow2(1.0 / 1024.0);
        let mut term = x;
        let mut sum = x;
        let mut k = 2.0;
        loop {
            term = term * x / Self::new(k);
            sum += term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs() || k > 30.0 {
                break;
            }
            k += 1.0;
        }
        for _ in 0..SQUARINGS {
            sum = sum.mul_pow2(2.0) + sum.sqr();
        }
        sum
    }

    /// Taylor sums of sin and cos on `|r| <= π/4`.
    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r.sqr();
        let mut s_term = r;
        let mut s = r;
        let mut c_term = Self::ONE;
        let mut c = Self::ONE;
        let mut k = 1.0;
        loop {
            c_term = -(c_term * r2) / Self::new(k * (k + 1.0));
            s_term = -(s_term * r2) / Self::new((k + 1.0) * (k + 2.0));
            c += c_term;
            s += s_term;
            if c_term.hi.abs() < 1e-36 && s_term.hi.abs() < 1e-36 * r.hi.abs().max(1e-300) {
                break;
            }
            k += 2.0;
            if k > 60.0 {
                break;
            }
        }
        (s, c)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map(|p| p + 1).unwrap_or(32);
        f.write_str(&self.to_sci(digits))
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Self::new(s1);
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Self::normalized(s1, s2 + t2)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        if !p.is_finite() {
            return Self::new(p);
        }
        Self::normalized(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || b.hi.is_infinite() {
            return Self::new(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 }.add_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, b: Self) {
                *self = *self $op b;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDoubleDoubleError;

impl fmt::Display for ParseDoubleDoubleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid decimal literal")
    }
}

impl std::error::Error for ParseDoubleDoubleError {}

impl std::str::FromStr for DoubleDouble {
    type Err = ParseDoubleDoubleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| ParseDoubleDoubleError)?),
            None => (body, 0),
        };
        let mut value = Self::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_point = false;
        let mut seen_digit = false;
        for ch in mantissa.chars() {
            match ch {
                '0'..='9' => {
                    seen_digit = true;
                    value = value.mul_f64(10.0).add_f64(f64::from(ch as u8 - b'0'));
                    if seen_point {
                        frac_digits += 1;
                    }
                }
                '.' if !seen_point => seen_point = true,
                _ => return Err(ParseDoubleDoubleError),
            }
        }
        if !seen_digit {
            return Err(ParseDoubleDoubleError);
        }
        let scale = exp - frac_digits;
        let ten = Self::new(10.0);
        if scale >= 0 {
            value *= ten.powi(scale);
        } else {
            value /= ten.powi(-scale);
        }
        Ok(if neg { -value } else { value })
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = ParseDoubleDoubleError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDoubleDoubleError);
        }
        s.parse()
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        if t.hi.abs() < 9.2e18 {
            Some(t.hi as i64 + t.lo as i64)
        } else {
            None
        }
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_i64().and_then(|v| u64::try_from(v).ok())
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        Some(Self::normalized(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::normalized(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Self::new(x))
    }
}

impl Real for DoubleDouble {
    const PRECISION: Precision = Precision::Extended;

    fn epsilon() -> Self {
        Self::EPSILON
    }

    fn min_positive() -> Self {
        // keeps the low word representable
        Self::new(f64::MIN_POSITIVE * 9.007_199_254_740_992e15)
    }

    fn pi() -> Self {
        PI
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::ZERO } else { Self::nan() };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let corr = (self - Self::new(ax).sqr()).hi * (x * 0.5);
        let (s, e) = two_sum(ax, corr);
        Self::normalized(s, e)
    }

    fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Self::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        let m = (self.hi / LN_2.hi + 0.5).floor();
        let mut r = self;
        for part in LN_2_PARTS {
            let (p, e) = two_prod(m, part);
            r = r - Self::normalized(p, e);
        }
        let e = Self::expm1_reduced(r) + Self::ONE;
        let scale = 2f64.powi(m as i32);
        if scale.is_finite() && scale != 0.0 {
            e.mul_pow2(scale)
        } else {
            let half = 2f64.powi(m as i32 / 2);
            e.mul_pow2(half).mul_pow2(2f64.powi(m as i32 - m as i32 / 2))
        }
    }

    fn exp_m1(self) -> Self {
        if self.hi.abs() <= 0.346 {
            Self::expm1_reduced(self)
        } else {
            self.exp() - Self::ONE
        }
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::new(f64::NEG_INFINITY) } else { Self::nan() };
        }
        if self.hi.is_infinite() {
            return self;
        }
        // Newton on exp(y) = x
        let y = Self::new(self.hi.ln());
        y + (self * (-y).exp() - Self::ONE)
    }

    fn ln_1p(self) -> Self {
        if self.hi.abs() > 0.25 {
            return (Self::ONE + self).ln();
        }
        let y = Self::new(self.hi.ln_1p());
        let em1 = y.exp_m1();
        y + (self - em1) / (Self::ONE + em1)
    }

    fn sinh(self) -> Self {
        if self.hi.abs() > 0.346 {
            let e = self.exp();
            return (e - e.recip()).mul_pow2(0.5);
        }
        let e = self.exp_m1();
        (e + e / (e + Self::ONE)).mul_pow2(0.5)
    }

    fn cosh(self) -> Self {
        let e = self.abs().exp();
        (e + e.recip()).mul_pow2(0.5)
    }

    fn tanh(self) -> Self {
        if self.hi.abs() > 40.0 {
            return Self::new(self.hi.signum());
        }
        let e = self.abs().mul_pow2(2.0).exp_m1();
        let t = e / (e + Self::new(2.0));
        if self.hi < 0.0 {
            -t
        } else {
            t
        }
    }

    fn asinh(self) -> Self {
        let x = self.abs();
        let r = if x.hi > 1e15 {
            x.ln() + LN_2
        } else {
            let x2 = x.sqr();
            (x + x2 / (Self::ONE + (Self::ONE + x2).sqrt())).ln_1p()
        };
        if self.hi < 0.0 {
            -r
        } else {
            r
        }
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn sin_cos(self) -> (Self, Self) {
        if !self.hi.is_finite() {
            return (Self::nan(), Self::nan());
        }
        let j = (self.hi / FRAC_PI_2[0]).round();
        // three-part Cody-Waite reduction by π/2
        let mut r = self;
        for part in FRAC_PI_2 {
            let (p, e) = two_prod(j, part);
            r = r - Self::normalized(p, e);
        }
        let (s, c) = Self::sin_cos_reduced(r);
        match (j as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn atan2(self, x: Self) -> Self {
        let y = self;
        if y.is_zero() && x.is_zero() {
            return Self::ZERO;
        }
        // Newton step on the angle from the binary64 estimate
        let mut theta = Self::new(y.hi.atan2(x.hi));
        for _ in 0..2 {
            let (s, c) = theta.sin_cos();
            let num = y * c - x * s;
            let den = x * c + y * s;
            if den.is_zero() {
                break;
            }
            theta += num / den;
        }
        theta
    }

    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Self::normalized(hi, self.lo.floor())
        } else {
            Self::new(hi)
        }
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    fn print_digits() -> usize {
        30
    }

    fn to_sci(self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.hi.is_nan() {
            return "NaN".to_string();
        }
        if self.hi.is_infinite() {
            return if self.hi > 0.0 { "inf".into() } else { "-inf".into() };
        }
        if self.is_zero() {
            return format!("{:.*e}", digits - 1, 0.0);
        }
        let neg = self.hi < 0.0;
        let x = self.abs();
        let mut e = x.hi.log10().floor() as i32;
        let ten = Self::new(10.0);
        let mut r = if e >= 0 { x / ten.powi(e) } else { x * ten.powi(-e) };
        if r.hi >= 10.0 {
            r /= ten;
            e += 1;
        } else if r.hi < 1.0 {
            r *= ten;
            e -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let mut d = r.hi.floor();
            if d < 0.0 {
                d = 0.0;
            }
            if d > 9.0 {
                d = 9.0;
            }
            ds.push(d as u8);
            r = (r - Self::new(d)) * ten;
        }
        // round half up on the guard digit
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::with_capacity(digits + 8);
        if neg {
            out.push('-');
        }
        out.push((b'0' + ds[0]) as char);
        if ds.len() > 1 {
            out.push('.');
            for &d in &ds[1..] {
                out.push((b'0' + d) as char);
            }
        }
        out.push('e');
        out.push_str(&e.to_string());
        out
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse().ok()
    }

    fn powi(self, k: i32) -> Self {
        let mut base = if k < 0 { self.recip() } else { self };
        let mut e = k.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }
}

impl DoubleDouble {
    pub fn recip(self) -> Self {
        Self::ONE / self
    }
}
