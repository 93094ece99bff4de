//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by the similarity and scoring pipeline.
///
/// Everything downstream defaults to `f64`; `f32` halves the memory of the
/// pairwise similarity table on large graphs at some cost in precision.
/// The blanket impl covers any float type with the conversions the pipeline
/// relies on, so external float types qualify automatically.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum<Self> + AddAssign + Display + Debug + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<Self>
        + AddAssign
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// Converts a finite `f64` constant into the working scalar.
///
/// Panics on values the target type cannot represent at all (e.g. NaN from a
/// corrupted computation); plain rounding to `f32` is fine.
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("finite f64 should convert into the working scalar")
}

/// Converts a count into the working scalar, for averaging denominators.
pub fn real_of_usize<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("count should fit the working scalar")
}

/// Rounds to 6 decimal places — the precision all serialized scores use,
/// so that output files stay stable across platforms.
pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0 // avoid serializing a distracting -0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean<F: Real>(xs: &[F]) -> F {
        xs.iter().copied().sum::<F>() / real_of_usize(xs.len())
    }

    #[test]
    fn blanket_impl_covers_both_float_widths() {
        assert_eq!(mean(&[1.0f64, 2.0, 3.0]), 2.0);
        assert_eq!(mean(&[1.0f32, 2.0, 3.0]), 2.0);
    }

    #[test]
    fn constants_convert_to_either_width() {
        assert_eq!(real::<f64>(0.8), 0.8);
        assert!((real::<f32>(0.8) - 0.8f32).abs() < f32::EPSILON);
    }
}
