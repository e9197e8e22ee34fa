use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Number type the simplex runs over.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    /// Magnitude below which a pivot candidate or reduced cost counts as zero.
    fn pivot_tolerance() -> Self;

    /// `tol` for inexact types, zero for exact ones.
    fn scaled_tolerance(tol: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_f64(value: f64) -> Self;

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    fn pivot_tolerance() -> Self {
        1e-11
    }

    fn scaled_tolerance(tol: f64) -> Self {
        tol
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(value: f64) -> Self {
        value
    }
}

impl Scalar for BigRational {
    fn pivot_tolerance() -> Self {
        Self::zero()
    }

    fn scaled_tolerance(_: f64) -> Self {
        Self::zero()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    /// Exact binary expansion of `value`; panics on NaN or infinity.
    fn from_f64(value: f64) -> Self {
        BigRational::from_float(value).expect("finite float")
    }

    fn abs_value(&self) -> Self {
        self.abs()
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to a scaled integer division for very large parts.
    let scale = BigInt::from(10u8).pow(30);
    let scaled = (r.numer() * &scale) / r.denom();
    ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN) / 1e30
}
