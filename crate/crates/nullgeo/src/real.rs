//! Scalar abstraction: the numeric kernels are generic over the floating
//! point type through this trait.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar usable throughout the toolkit (f32 or f64).
pub trait Real:
    Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + fmt::LowerExp + Send + Sync + 'static
{
    /// Shorthand for converting an f64 literal into the scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn half(self) -> Self {
        self / Self::of(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
