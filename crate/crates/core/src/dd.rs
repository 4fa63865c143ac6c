//! Double-double arithmetic: a value is the unevaluated sum `hi + lo` of two
//! binary64 numbers with `|lo| <= ulp(hi) / 2`, giving about 106 bits.
//!
//! Kernels follow the usual error-free transformations (two-sum and
//! fused-multiply-add two-product). Transcendentals reduce the argument and
//! sum Taylor series in double-double.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const EPSILON: DoubleDouble = DoubleDouble { hi: 4.930380657631324e-32, lo: 0.0 };
    pub const PI: DoubleDouble = DoubleDouble { hi: 3.141592653589793, lo: 1.2246467991473532e-16 };
    pub const FRAC_PI_2: DoubleDouble = DoubleDouble { hi: 1.5707963267948966, lo: 6.123233995736766e-17 };
    pub const LN_2: DoubleDouble = DoubleDouble { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };

    pub fn new(hi: f64, lo: f64) -> Self {
        Self::renorm(hi, lo)
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        if !hi.is_finite() {
            return DoubleDouble { hi, lo: 0.0 };
        }
        let (h, l) = quick_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        let hi = v.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return DoubleDouble { hi, lo: 0.0 };
        }
        let rest = v - BigInt::from_f64(hi).expect("finite f64 converts to BigInt");
        let lo = rest.to_f64().unwrap_or(0.0);
        let (h, l) = two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    fn mul_f64(self, k: f64) -> Self {
        let (p, e) = two_prod(self.hi, k);
        Self::renorm(p, e + self.lo * k)
    }

    fn scale_pow2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::zero();
        }
        if self.hi < 0.0 {
            return DoubleDouble { hi: f64::NAN, lo: 0.0 };
        }
        if !self.hi.is_finite() {
            return self;
        }
        let s = DoubleDouble::from(self.hi.sqrt());
        s + (self - s * s) / (s + s)
    }

    /// e^x - 1 for |x| <= ln2/2 after scaling, accurate near zero.
    fn expm1_reduced(r: Self) -> Self {
        // r is already small; shrink further by 2^-9 and undo by doubling.
        let s = r.scale_pow2(-9);
        let mut term = s;
        let mut sum = s;
        let mut i = 2.0;
        loop {
            term = term * s / DoubleDouble::from(i);
            sum = sum + term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs().max(1e-300) {
                break;
            }
            i += 1.0;
            if i > 40.0 {
                break;
            }
        }
        let two = DoubleDouble::from(2.0);
        for _ in 0..9 {
            sum = sum * (sum + two);
        }
        sum
    }

    pub fn exp(self) -> Self {
        if self.hi.is_nan() {
            return self;
        }
        if self.hi > 709.78 {
            return DoubleDouble { hi: f64::INFINITY, lo: 0.0 };
        }
        if self.hi < -745.2 {
            return Self::zero();
        }
        let k = (self.hi / Self::LN_2.hi).round();
        let r = self - Self::LN_2.mul_f64(k);
        let p = Self::expm1_reduced(r);
        (p + Self::one()).scale_pow2(k as i32)
    }

    fn expm1(self) -> Self {
        if self.hi.abs() < 0.3465 {
            Self::expm1_reduced(self)
        } else {
            self.exp() - Self::one()
        }
    }

    pub fn ln(self) -> Self {
        if self.hi.is_nan() || self.hi < 0.0 {
            return DoubleDouble { hi: f64::NAN, lo: 0.0 };
        }
        if self.hi == 0.0 {
            return DoubleDouble { hi: f64::NEG_INFINITY, lo: 0.0 };
        }
        if !self.hi.is_finite() {
            return self;
        }
        let mut y = DoubleDouble::from(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Self::one();
        }
        y
    }

    fn sin_taylor(r: Self) -> Self {
        let r2 = r * r;
        let mut term = r;
        let mut sum = r;
        let mut k = 1.0;
        loop {
            term = -(term * r2) / DoubleDouble::from((2.0 * k) * (2.0 * k + 1.0));
            sum = sum + term;
            if term.hi.abs() <= 1e-36 || k > 30.0 {
                break;
            }
            k += 1.0;
        }
        sum
    }

    fn cos_taylor(r: Self) -> Self {
        let r2 = r * r;
        let mut term = Self::one();
        let mut sum = Self::one();
        let mut k = 1.0;
        loop {
            term = -(term * r2) / DoubleDouble::from((2.0 * k - 1.0) * (2.0 * k));
            sum = sum + term;
            if term.hi.abs() <= 1e-36 || k > 30.0 {
                break;
            }
            k += 1.0;
        }
        sum
    }

    fn sin_cos(self) -> (Self, Self) {
        if !self.hi.is_finite() {
            let nan = DoubleDouble { hi: f64::NAN, lo: 0.0 };
            return (nan, nan);
        }
        let k = (self.hi / Self::FRAC_PI_2.hi).round();
        let r = self - Self::FRAC_PI_2.mul_f64(k);
        let s = Self::sin_taylor(r);
        let c = Self::cos_taylor(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    pub fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            let x2 = self * self;
            let mut term = self;
            let mut sum = self;
            let mut k = 1.0;
            loop {
                term = term * x2 / DoubleDouble::from((2.0 * k) * (2.0 * k + 1.0));
                sum = sum + term;
                if term.hi.abs() <= 1e-36 || k > 30.0 {
                    break;
                }
                k += 1.0;
            }
            return sum;
        }
        let e = self.expm1();
        // sinh x = (em1 + em1 / (em1 + 1)) / 2
        (e + e / (e + Self::one())).scale_pow2(-1)
    }

    pub fn cosh(self) -> Self {
        let e = self.abs().exp();
        (e + Self::one() / e).scale_pow2(-1)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mut base = self;
        let mut m = n.unsigned_abs();
        let mut acc = Self::one();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            m >>= 1;
        }
        if n < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    pub fn powf(self, e: Self) -> Self {
        if e.lo == 0.0 && e.hi.fract() == 0.0 && e.hi.abs() < 2f64.powi(30) {
            return self.powi(e.hi as i32);
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return if e.hi > 0.0 { Self::zero() } else { DoubleDouble { hi: f64::INFINITY, lo: 0.0 } };
        }
        (e * self.ln()).exp()
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return DoubleDouble { hi: s1, lo: 0.0 };
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Self::renorm(s1, s2 + t2)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        if !p1.is_finite() {
            return DoubleDouble { hi: p1, lo: 0.0 };
        }
        Self::renorm(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        if b.hi == 0.0 || !b.hi.is_finite() || !self.hi.is_finite() {
            return DoubleDouble { hi: self.hi / b.hi, lo: 0.0 };
        }
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble { hi: h, lo: l } + DoubleDouble::from(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        let q = self / b;
        let t = if q.hi >= 0.0 { q.hi.floor() } else { q.hi.ceil() };
        self - b.mul_f64(t)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble { hi: 0.0, lo: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble { hi: 1.0, lo: 0.0 }
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(DoubleDouble::from)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == 0.0 {
            write!(f, "{}", self.hi)
        } else {
            write!(f, "{}{:+e}", self.hi, self.lo)
        }
    }
}
