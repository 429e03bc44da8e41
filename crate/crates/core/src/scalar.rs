//! Scalar abstraction for weights and approval-weight sums.
//!
//! Everything that adds up node weights is generic over [`Scalar`], so the
//! same bookkeeping runs on `f64` in the simulator and on exact rationals
//! (`Ratio<i64>`) in oracle tests where threshold boundaries must be hit
//! exactly.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, SubAssign};

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Weight-like quantity: f32, f64 or an exact rational.
pub trait Scalar:
    Num
    + Copy
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + Sum
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; panics on values the type cannot hold.
    fn from_real(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(|| panic!("{value} not representable as scalar"))
    }

    fn to_real(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + Sum
        + Debug
        + Send
        + Sync
        + 'static
{
}
