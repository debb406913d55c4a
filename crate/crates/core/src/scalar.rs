//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point type the estimators are generic over (`f32` or `f64`).
///
/// `RealField` supplies the arithmetic and the decompositions; the num-traits
/// conversions are used for literals and for handing values to the RNG and the
/// serializers, which always work in `f64`.
pub trait Scalar:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + LowerExp
    + Debug
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or sample. Lossy for `f32`.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }

    /// Unit roundoff of the type.
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
