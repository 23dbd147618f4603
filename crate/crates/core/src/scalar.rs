//! Scalar abstraction shared by the evolution operators and the generator runtime.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, NumCast, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable for latent coordinates, weights and pixels: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Draw one value from `Normal(mean, std)`.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: Self, std: Self) -> Self;

    /// Lossless widening used for metrics and serialization fallbacks.
    fn as_f64(self) -> f64;

    /// Rounding conversion from `f64`.
    fn from_f64_lossy(v: f64) -> Self;

    /// Exact conversion from a stored `f32` weight.
    fn from_stored(v: f32) -> Self;

    /// Conversion back to the on-disk weight precision.
    fn to_stored(self) -> f32;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: Self, std: Self) -> Self {
                let z: $t = StandardNormal.sample(rng);
                mean + std * z
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn from_f64_lossy(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn from_stored(v: f32) -> Self {
                v as $t
            }

            #[inline]
            fn to_stored(self) -> f32 {
                self as f32
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Shorthand for a numeric constant in generic code.
#[inline]
pub(crate) fn c<T: Scalar>(v: f64) -> T {
    T::from_f64_lossy(v)
}
