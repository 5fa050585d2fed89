use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Coefficient field for series and matrices.
///
/// Implemented for `f32`, `f64` and `BigRational`; only the rational
/// instance gives exact spectra.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    fn is_negative_value(&self) -> bool {
        *self < Self::zero()
    }
}

impl<T> Scalar for T where T: Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive {}
