//! Scalar abstraction: the whole library is generic over the floating
//! point type through this trait. `f64` is the default precision used by
//! the CLI (see the `Real` alias at the crate root); `f32` also satisfies
//! the bounds, with correspondingly weaker tolerances.

use num_traits::{Float as NtFloat, FloatConst, FromPrimitive, ToPrimitive};

pub trait Float:
    NtFloat
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + core::ops::AddAssign
    + core::ops::SubAssign
    + core::ops::MulAssign
    + core::iter::Sum
    + core::fmt::Debug
    + core::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal must be representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("value must be representable as f64")
    }
}

impl Float for f32 {}
impl Float for f64 {}
