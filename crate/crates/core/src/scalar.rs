//! Scalar abstraction: the numeric core is generic over `Real`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar type the library's math is written against.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable in scalar type")
    }

    /// Converts a count into `Self` (for averages and normalizations).
    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("count not representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
