//! Double-double arithmetic: an unevaluated sum of two `f64`s giving
//! roughly 31 significant decimal digits.
//!
//! The error-free transformations (`two_sum`, `two_prod`) and the
//! add/mul/div/sqrt kernels follow the classic Dekker/Bailey recipes.
//! Values are kept normalized: `|lo| <= ulp(hi)/2`, so comparing `(hi, lo)`
//! lexicographically is a correct order on finite values.

use crate::real::Real;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Extended-precision scalar stored as `hi + lo` with `hi` the `f64`
/// nearest the represented value.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Requires `|a| >= |b|` (or either operand zero).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    /// Construct from a high/low pair that is already normalized.
    /// Intended for frozen constants produced offline.
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact quotient of two `f64`s as a double-double, e.g. `from_ratio(3, 10)`
    /// for a decimal constant that is not exactly representable in binary.
    pub fn from_ratio(num: f64, den: f64) -> Self {
        Self::from_f64(num) / Self::from_f64(den)
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn sqrt(self) -> Self {
        if self == Self::ZERO {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self {
                hi: f64::NAN,
                lo: f64::NAN,
            };
        }
        // Karp's method: one Newton correction on the f64 estimate doubles
        // its precision, which is exactly what double-double needs.
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Self::from_f64(ax);
        let err = (self - ax_dd * ax_dd).hi * (x * 0.5);
        let (hi, lo) = quick_two_sum(ax, err);
        Self { hi, lo }
    }

    /// Decimal representation with the requested number of significant
    /// digits (clamped to 33, about all a double-double carries).
    pub fn to_decimal_string(self, digits: usize) -> String {
        let digits = digits.clamp(1, 33);
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        if self == Self::ZERO {
            return "0.0".to_string();
        }
        let neg = self.hi < 0.0;
        let mut x = self.abs();
        // Decimal exponent such that the scaled value lands in [1, 10).
        let mut exp10 = self.hi.abs().log10().floor() as i32;
        let ten = Self::from_f64(10.0);
        for _ in 0..exp10.abs() {
            if exp10 > 0 {
                x = x / ten;
            } else {
                x = x * ten;
            }
        }
        while x.hi >= 10.0 {
            x = x / ten;
            exp10 += 1;
        }
        while x.hi < 1.0 {
            x = x * ten;
            exp10 -= 1;
        }
        // Digit extraction with a correction pass for 10s and -1s caused
        // by rounding in the repeated scaling.
        let mut raw = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.hi.floor();
            raw.push(d as i64);
            x = (x - Self::from_f64(d)) * ten;
        }
        for i in (1..raw.len()).rev() {
            if raw[i] < 0 {
                raw[i] += 10;
                raw[i - 1] -= 1;
            } else if raw[i] > 9 {
                raw[i] -= 10;
                raw[i - 1] += 1;
            }
        }
        // Round using the guard digit.
        if raw[digits] >= 5 {
            let mut i = digits - 1;
            loop {
                raw[i] += 1;
                if raw[i] <= 9 || i == 0 {
                    break;
                }
                raw[i] = 0;
                i -= 1;
            }
            if raw[0] > 9 {
                raw[0] = 1;
                exp10 += 1;
                raw.truncate(digits);
            }
        }
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push(char::from(b'0' + raw[0] as u8));
        s.push('.');
        for &d in raw[1..digits].iter() {
            s.push(char::from(b'0' + d as u8));
        }
        if exp10 != 0 {
            s.push('e');
            s.push_str(&exp10.to_string());
        }
        s
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    #[inline]
    fn div(self, rhs: Self) -> Self {
        // Long division with three quotient terms.
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Self { hi: s, lo: e } + Self::from_f64(q3)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl DivAssign for DoubleDouble {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
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

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e}, {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(32))
    }
}

impl Real for DoubleDouble {
    const ZERO: Self = Self::ZERO;
    const ONE: Self = Self::ONE;

    fn from_f64(x: f64) -> Self {
        Self::from_f64(x)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn abs(self) -> Self {
        Self::abs(self)
    }

    fn sqrt(self) -> Self {
        Self::sqrt(self)
    }

    fn is_finite(self) -> bool {
        Self::is_finite(self)
    }

    fn infinity() -> Self {
        Self {
            hi: f64::INFINITY,
            lo: 0.0,
        }
    }
}
