//! Scalar abstraction for score arithmetic.
//!
//! All anomaly scores, thresholds and metrics in this crate are generic over
//! [`Real`], so the same code runs in f32 or f64. The CLI and file formats use
//! f64 (see the aliases at the crate root).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable for anomaly scores: f32 or f64.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<Self>
        + Debug
        + Display
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// Lossless for every count that fits the mantissa; counts here are cell and
/// trajectory totals, far below 2^52.
pub(crate) fn from_usize<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("count representable as scalar")
}

pub(crate) fn from_i64<F: Real>(n: i64) -> F {
    F::from_i64(n).expect("sum representable as scalar")
}

pub(crate) fn from_u64<F: Real>(n: u64) -> F {
    F::from_u64(n).expect("sum representable as scalar")
}
