//! Scalar abstraction shared by every real-valued computation in the crate.

use std::fmt::{Debug, Display};

use num_traits as nt;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

/// Real scalar used for probabilities, privacy parameters and noise draws.
///
/// Implemented for `f32` and `f64`. The sampling hooks exist because the
/// `rand_distr` samplers are only available for those concrete types.
pub trait Real:
    nt::Float
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Uniform draw from `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Gamma draw with the given shape and scale (both positive).
    fn sample_gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Self;

    /// Poisson draw with the given mean. A zero mean yields zero.
    fn sample_poisson<R: Rng + ?Sized>(mean: Self, rng: &mut R) -> u64;

    /// Converts an `f64` literal, which always succeeds for the implementors.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable")
    }

    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("count representable")
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            fn sample_gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Self {
                Gamma::new(shape, scale)
                    .expect("validated gamma parameters")
                    .sample(rng)
            }

            fn sample_poisson<R: Rng + ?Sized>(mean: Self, rng: &mut R) -> u64 {
                if !(mean > 0.0) {
                    return 0;
                }
                let draw: $t = Poisson::new(mean)
                    .expect("finite positive poisson mean")
                    .sample(rng);
                draw as u64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
