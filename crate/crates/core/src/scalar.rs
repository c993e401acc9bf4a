//! Floating point abstraction shared by every numeric kernel.
//!
//! All physics in this crate is written against [`Real`], which is
//! implemented for `f32` and `f64`. The concrete `f64` aliases at the crate
//! root are what the command-line front end uses.

use std::fmt::{Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftNum;

pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + LowerExp + Sum {
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` literal. Panics only on values unrepresentable as `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $erfc:path) => {
        impl Real for $t {
            fn erfc(self) -> Self {
                $erfc(self)
            }

            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardNormal)
            }
        }
    };
}

impl_real!(f32, libm::erfcf);
impl_real!(f64, libm::erfc);

/// Absolute value without the `Float`/`Signed` method ambiguity.
#[inline]
pub(crate) fn abs<T: Real>(x: T) -> T {
    Float::abs(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_matches_known_values() {
        assert!((Real::erfc(0.0_f64) - 1.0).abs() < 1e-15);
        // erfc(1) = 0.157299207050285...
        assert!((Real::erfc(1.0_f64) - 0.157_299_207_050_285_1).abs() < 1e-15);
        assert!((Real::erfc(1.0_f32) - 0.157_299_2).abs() < 1e-6);
    }

    #[test]
    fn lit_roundtrips() {
        assert_eq!(<f64 as Real>::lit(3.5e-6), 3.5e-6);
        assert_eq!(<f32 as Real>::lit(0.25), 0.25_f32);
    }
}
