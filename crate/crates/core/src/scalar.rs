//! Real scalar abstraction for the floating-point parts of the crate
//! (quantizer targets, channel noise, error-rate estimates).

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// A real scalar usable for received signals and error-rate statistics.
///
/// Implemented for `f32` and `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + Default + 'static
{
    fn of_int(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("integer representable as float")
    }

    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
