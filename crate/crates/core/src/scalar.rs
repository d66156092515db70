use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// Real scalar used for pixel values, disparities and losses: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless for `f32`, rounding for `f64`.
    fn to_f32_lossy(self) -> f32;

    fn lit(v: f64) -> Self;

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable as a float")
    }
}

impl Scalar for f32 {
    fn to_f32_lossy(self) -> f32 {
        self
    }

    fn lit(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    fn to_f32_lossy(self) -> f32 {
        self as f32
    }

    fn lit(v: f64) -> Self {
        v
    }
}
