//! Scalar abstractions. Flows are exact by default; transport runs in floating point.

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed};

/// Field elements usable as flow values.
pub trait FlowScalar: Num + Signed + Clone + PartialOrd + std::fmt::Debug + Send + Sync {
    fn from_ratio(num: i64, den: i64) -> Self;
}

impl FlowScalar for Ratio<i64> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
}

impl FlowScalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl FlowScalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
}

/// Floating-point types for quadrature and transport.
pub trait Real: Float + FromPrimitive + Default + std::fmt::Debug + std::iter::Sum + Send + Sync {}

impl Real for f32 {}
impl Real for f64 {}

pub fn ratio_to_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
