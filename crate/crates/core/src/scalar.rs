//! Real scalar used for weights, probabilities and scores.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign};

pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + LowerExp + FromStr + Default + Send + Sync + 'static
{
    /// Nearest representable value of a path count.
    fn from_count(count: u128) -> Self {
        Self::from_u128(count).unwrap_or_else(Self::infinity)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + LowerExp + FromStr + Default + Send + Sync + 'static
{
}
