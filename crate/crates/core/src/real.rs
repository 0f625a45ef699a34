//! Scalar abstraction shared by every geometric routine.
//!
//! Orbit points of free-group words spread exponentially in the word length,
//! so the same algorithms run either on `f64` or on [`Mp`], an
//! arbitrary-precision binary float with a compile-time bit width.
//! Arithmetic and square roots are carried out at full precision. `ln` and
//! `exp` are evaluated at double precision after an exact binary range
//! reduction: their results only ever enter as eigenvalue rescalings, where a
//! relative error of one ulp moves a point by a distance of the same order.

use core::cmp::Ordering;
use core::fmt::{self, Debug, Display};
use core::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

/// Ordered field with the handful of transcendental functions the geometry needs.
pub trait Real:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Decimal digits carried by the representation.
    const DIGITS: u32;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn abs(&self) -> Self;
    fn is_negative(&self) -> bool;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Unit roundoff of the representation.
    fn epsilon() -> Self;

    /// Largest base-10 logarithm of a condition number the representation can
    /// resolve while keeping two correct digits.
    fn max_log10_condition() -> f64 {
        Self::DIGITS as f64 - 2.0
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const DIGITS: u32 = 16;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
}

type Big = FBig<HalfEven, 2>;

/// Binary floating point number with `BITS` bits of significand.
#[derive(Clone)]
pub struct Mp<const BITS: usize>(Big);

impl<const BITS: usize> Mp<BITS> {
    fn wrap(x: Big) -> Self {
        Mp(x)
    }

    fn from_big(x: Big) -> Self {
        Mp(x.with_precision(BITS).value())
    }

    /// Binary exponent `e` with `2^e <= |x| < 2^(e+1)`, for nonzero finite `x`.
    fn binary_exponent(&self) -> isize {
        let repr = self.0.repr();
        repr.exponent() + repr.digits() as isize - 1
    }

    /// `x * 2^k`, exact.
    fn scale_pow2(&self, k: isize) -> Self {
        let (sig, exp) = self.0.repr().clone().into_parts();
        Mp(Big::from_parts(sig, exp + k).with_precision(BITS).value())
    }
}

impl<const BITS: usize> Debug for Mp<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp<{}>({:e})", BITS, self.to_f64())
    }
}

impl<const BITS: usize> Display for Mp<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(&self.to_f64(), f)
    }
}

impl<const BITS: usize> PartialEq for Mp<BITS> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl<const BITS: usize> PartialOrd for Mp<BITS> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! mp_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<const BITS: usize> $tr for Mp<BITS> {
            type Output = Self;
            fn $method(self, rhs: Self) -> Self {
                Mp::wrap(self.0 $op rhs.0)
            }
        }
        impl<'a, const BITS: usize> $tr<&'a Mp<BITS>> for Mp<BITS> {
            type Output = Self;
            fn $method(self, rhs: &'a Mp<BITS>) -> Self {
                Mp::wrap(self.0 $op &rhs.0)
            }
        }
    };
}

mp_binop!(Add, add, +);
mp_binop!(Sub, sub, -);
mp_binop!(Mul, mul, *);
mp_binop!(Div, div, /);

impl<const BITS: usize> Neg for Mp<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Mp(-self.0)
    }
}

const LN_2: f64 = core::f64::consts::LN_2;

impl<const BITS: usize> Real for Mp<BITS> {
    const DIGITS: u32 = (BITS as u64 * 30103 / 100000) as u32;

    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value {x} lifted to Mp");
        Mp::from_big(Big::try_from(x).expect("finite f64 converts exactly"))
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn sqrt(&self) -> Self {
        // negative inputs only arise from rounding in callers; clamp
        if self.is_negative() {
            return Mp::zero();
        }
        Mp::wrap(self.0.sqrt())
    }

    fn exp(&self) -> Self {
        let y = self.to_f64();
        let k = libm::round(y / LN_2);
        let reduced = self.clone() - Mp::from_f64(k) * Mp::from_f64(LN_2);
        Mp::from_f64(libm::exp(reduced.to_f64())).scale_pow2(k as isize)
    }

    fn ln(&self) -> Self {
        assert!(!self.is_negative() && self.0 != Big::ZERO, "ln of a non-positive value");
        let e = self.binary_exponent();
        let mantissa = self.scale_pow2(-e).to_f64();
        Mp::from_f64(libm::log(mantissa) + e as f64 * LN_2)
    }

    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_negative(&self) -> bool {
        self.0 < Big::ZERO
    }

    fn zero() -> Self {
        Mp::from_big(Big::ZERO)
    }

    fn one() -> Self {
        Mp::from_big(Big::ONE)
    }

    fn epsilon() -> Self {
        Mp::one().scale_pow2(1 - BITS as isize)
    }
}
