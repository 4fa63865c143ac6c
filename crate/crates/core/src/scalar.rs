//! Floating-point scalars used by the numeric side of the engine.
//!
//! Symbolic trees never hold floats; only evaluation, quadrature and the
//! verification oracle work in a [`Scalar`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

use crate::dd::DoubleDouble;

/// A real scalar type with the transcendental kernels the engine needs.
pub trait Scalar:
    Num + Copy + PartialOrd + std::ops::Neg<Output = Self> + Debug + Display + Send + Sync + 'static
{
    /// Significand bits.
    const BITS: u32;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    fn from_bigint(v: &BigInt) -> Self {
        Self::from_f64(v.to_f64().unwrap_or(f64::NAN))
    }

    fn from_rational(q: &BigRational) -> Self {
        Self::from_bigint(q.numer()) / Self::from_bigint(q.denom())
    }

    fn epsilon() -> Self;
    fn pi() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: Self) -> Self;
    fn is_finite(self) -> bool;

    fn from_i64(v: i64) -> Self {
        Self::from_f64(v as f64)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

macro_rules! impl_native {
    ($t:ty, $bits:expr) => {
        impl Scalar for $t {
            const BITS: u32 = $bits;

            fn from_f64(v: f64) -> Self {
                v as $t
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            fn pi() -> Self {
                std::f64::consts::PI as $t
            }
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            fn sinh(self) -> Self {
                <$t>::sinh(self)
            }
            fn cosh(self) -> Self {
                <$t>::cosh(self)
            }
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            fn powf(self, e: Self) -> Self {
                <$t>::powf(self, e)
            }
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

impl_native!(f32, 24);
impl_native!(f64, 53);

impl Scalar for DoubleDouble {
    const BITS: u32 = 106;

    fn from_f64(v: f64) -> Self {
        DoubleDouble::from(v)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn from_bigint(v: &BigInt) -> Self {
        DoubleDouble::from_bigint(v)
    }
    fn epsilon() -> Self {
        DoubleDouble::EPSILON
    }
    fn pi() -> Self {
        DoubleDouble::PI
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn sin(self) -> Self {
        DoubleDouble::sin(self)
    }
    fn cos(self) -> Self {
        DoubleDouble::cos(self)
    }
    fn sinh(self) -> Self {
        DoubleDouble::sinh(self)
    }
    fn cosh(self) -> Self {
        DoubleDouble::cosh(self)
    }
    fn powi(self, n: i32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn powf(self, e: Self) -> Self {
        DoubleDouble::powf(self, e)
    }
    fn is_finite(self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }
}

/// Working precision for numeric evaluation, chosen from a bit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Precision {
    /// IEEE binary64.
    Double,
    /// Unevaluated sum of two binary64 values (106 significand bits).
    DoubleDouble,
}

impl Precision {
    pub const DEFAULT_BITS: u32 = 64;

    /// Smallest supported precision with at least `bits` significand bits.
    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            0..=53 => Some(Precision::Double),
            54..=106 => Some(Precision::DoubleDouble),
            _ => None,
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Precision::Double => <f64 as Scalar>::BITS,
            Precision::DoubleDouble => <DoubleDouble as Scalar>::BITS,
        }
    }

    /// The next precision up, used when a check disagrees.
    pub fn doubled(self) -> Self {
        Precision::DoubleDouble
    }

    pub fn epsilon(self) -> f64 {
        match self {
            Precision::Double => f64::EPSILON,
            Precision::DoubleDouble => DoubleDouble::EPSILON.hi(),
        }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::from_bits(Self::DEFAULT_BITS).expect("default precision is supported")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_conversion() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!((f64::from_rational(&q) - 1.0 / 3.0).abs() < 1e-16);
        let d = DoubleDouble::from_rational(&q);
        let back = d * DoubleDouble::from(3.0) - DoubleDouble::from(1.0);
        assert!(back.abs().to_f64() < 1e-31);
    }

    #[test]
    fn precision_from_bits() {
        assert_eq!(Precision::from_bits(53), Some(Precision::Double));
        assert_eq!(Precision::from_bits(64), Some(Precision::DoubleDouble));
        assert_eq!(Precision::from_bits(200), None);
        assert_eq!(Precision::default(), Precision::DoubleDouble);
    }
}
